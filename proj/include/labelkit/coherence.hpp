#pragma once

#include "labelkit/scene.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace labelkit {

enum class EasingKind {
    Linear,
    QuadIn,
    QuadOut,
    QuadInOut,
    CubicIn,
    CubicOut,
    CubicInOut,
    SineIn,
    SineOut,
    SineInOut,
};

inline constexpr std::array<EasingKind, 10> kAllEasings{
    EasingKind::Linear,  EasingKind::QuadIn,   EasingKind::QuadOut, EasingKind::QuadInOut, EasingKind::CubicIn,
    EasingKind::CubicOut, EasingKind::CubicInOut, EasingKind::SineIn, EasingKind::SineOut,  EasingKind::SineInOut,
};

// Names as they appear in scene files, config messages and CLI flags.
std::string_view easing_name(EasingKind kind);
std::optional<EasingKind> easing_from_name(std::string_view name);

// Easing curve on normalized progress p in [0, 1].
double ease_progress(EasingKind kind, double p);

// Completion in [0, 1] at t_current for a transition that started at
// t_start and lasts t_transition seconds. Progress is clamped before the
// curve is applied. Throws LabelError when t_transition <= 0.
double ease(EasingKind kind, double t_current, double t_start, double t_transition);

WorldPosition interpolate_position(WorldPosition start, WorldPosition goal, double e);

// fade_in: alpha follows e; otherwise 1 - e.
double fade_alpha(bool fade_in, double e);

struct AggregationBlend {
    double member_alpha = 1.0;
    double super_alpha = 0.0;
    WorldPosition member_position;
};

// A member label moving into its super label: member fades out while the
// super label fades in, and the member slides toward the super position.
// Splitting runs the same blend with e reversed.
AggregationBlend aggregate_transition(WorldPosition member_start, WorldPosition super_position, double e);

template <typename T>
T lerp_value(const T& a, const T& b, double e);

template <>
inline double lerp_value(const double& a, const double& b, double e) { return a + (b - a) * e; }

template <>
inline WorldPosition lerp_value(const WorldPosition& a, const WorldPosition& b, double e)
{
    return interpolate_position(a, b, e);
}

template <>
inline Extent lerp_value(const Extent& a, const Extent& b, double e)
{
    return {a.width + (b.width - a.width) * e, a.height + (b.height - a.height) * e};
}

// One animated property. A new goal always retargets from wherever the value
// currently is, so the emitted sequence never jumps.
template <typename T>
struct Transition {
    T start{};
    T goal{};
    double t_start = 0.0;
    double t_transition = 1.0;
    EasingKind easing = EasingKind::SineInOut;

    static Transition settled(const T& value, double t_now, double duration, EasingKind kind)
    {
        return Transition{value, value, t_now, duration, kind};
    }

    double completion(double t_now) const { return ease(easing, t_now, t_start, t_transition); }

    T value(double t_now) const
    {
        if (start == goal) return goal;
        const double e = completion(t_now);
        if (e >= 1.0) return goal;
        return lerp_value(start, goal, e);
    }

    bool finished(double t_now) const { return start == goal || t_now >= t_start + t_transition; }
};

template <typename T>
Transition<T> retarget(const Transition<T>& current, const T& new_goal, double t_now)
{
    Transition<T> next = current;
    next.start = current.value(t_now);
    next.goal = new_goal;
    next.t_start = t_now;
    return next;
}

} // namespace labelkit
