#include "labelkit/coherence.hpp"

#include "labelkit/geo.hpp"

#include <algorithm>
#include <cmath>

namespace labelkit {

namespace {

struct NamedEasing {
    EasingKind kind;
    std::string_view name;
};

constexpr std::array<NamedEasing, 10> kNames{{
    {EasingKind::Linear, "linear"},
    {EasingKind::QuadIn, "quad-in"},
    {EasingKind::QuadOut, "quad-out"},
    {EasingKind::QuadInOut, "quad-in-out"},
    {EasingKind::CubicIn, "cubic-in"},
    {EasingKind::CubicOut, "cubic-out"},
    {EasingKind::CubicInOut, "cubic-in-out"},
    {EasingKind::SineIn, "sine-in"},
    {EasingKind::SineOut, "sine-out"},
    {EasingKind::SineInOut, "sine-in-out"},
}};

} // namespace

std::string_view easing_name(EasingKind kind)
{
    for (const auto& n : kNames)
        if (n.kind == kind) return n.name;
    return "sine-in-out";
}

std::optional<EasingKind> easing_from_name(std::string_view name)
{
    for (const auto& n : kNames)
        if (n.name == name) return n.kind;
    return std::nullopt;
}

double ease_progress(EasingKind kind, double p)
{
    p = std::clamp(p, 0.0, 1.0);
    switch (kind) {
    case EasingKind::Linear: return p;
    case EasingKind::QuadIn: return p * p;
    case EasingKind::QuadOut: return p * (2.0 - p);
    case EasingKind::QuadInOut: return p < 0.5 ? 2.0 * p * p : 1.0 - 2.0 * (1.0 - p) * (1.0 - p);
    case EasingKind::CubicIn: return p * p * p;
    case EasingKind::CubicOut: {
        const double q = 1.0 - p;
        return 1.0 - q * q * q;
    }
    case EasingKind::CubicInOut: {
        if (p < 0.5) return 4.0 * p * p * p;
        const double q = 1.0 - p;
        return 1.0 - 4.0 * q * q * q;
    }
    case EasingKind::SineIn: return p >= 1.0 ? 1.0 : 1.0 - std::cos(p * kPi / 2.0);
    case EasingKind::SineOut: return std::sin(p * kPi / 2.0);
    case EasingKind::SineInOut: return 0.5 * (1.0 - std::cos(kPi * p)); // == -0.5 * (cos(pi p) - 1)
    }
    return p;
}

double ease(EasingKind kind, double t_current, double t_start, double t_transition)
{
    if (!(t_transition > 0.0) || !std::isfinite(t_transition)) throw LabelError("ease: transition duration must be positive");
    const double p = std::clamp((t_current - t_start) / t_transition, 0.0, 1.0);
    return ease_progress(kind, p);
}

WorldPosition interpolate_position(WorldPosition start, WorldPosition goal, double e)
{
    return {start.x + (goal.x - start.x) * e, start.y + (goal.y - start.y) * e, start.z + (goal.z - start.z) * e};
}

double fade_alpha(bool fade_in, double e) { return fade_in ? e : 1.0 - e; }

AggregationBlend aggregate_transition(WorldPosition member_start, WorldPosition super_position, double e)
{
    return {1.0 - e, e, interpolate_position(member_start, super_position, e)};
}

} // namespace labelkit
