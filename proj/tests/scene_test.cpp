#include "labelkit/scene.hpp"

#include <gtest/gtest.h>

#include <random>

namespace labelkit {
namespace {

Scene small_scene()
{
    Scene s;
    s.pois = {
        {"a", "Alpha", {0, 0, -10}, {}, "adventure", "img/a.png", {10, "min"}, "g1"},
        {"b", "Beta", {5, 0, -10}, {}, "children", "img/b.png", {20, "min"}, "g1"},
        {"c", "Gamma", {0, 0, -30}, {}, "thrilling", "img/c.png", {60, "min"}, std::nullopt},
    };
    s.groups = {{"g1", "Group one", {"a", "b"}}};
    return s;
}

bool mentions(const std::vector<Violation>& v, const std::string& needle)
{
    for (const auto& x : v)
        if (x.entity.find(needle) != std::string::npos || x.message.find(needle) != std::string::npos) return true;
    return false;
}

TEST(ScalarToColor, Endpoints)
{
    const ColorScale scale = ColorScale::white_to_red(0, 120);
    EXPECT_EQ(scalar_to_color(scale, 0), (Rgb{255, 255, 255}));
    EXPECT_EQ(scalar_to_color(scale, 120), (Rgb{255, 0, 0}));
}

TEST(ScalarToColor, Midpoint)
{
    const Rgb c = scalar_to_color(ColorScale::white_to_red(0, 120), 60);
    EXPECT_DOUBLE_EQ(c.r, 255.0);
    EXPECT_DOUBLE_EQ(c.g, 127.5);
    EXPECT_DOUBLE_EQ(c.b, 127.5);
}

TEST(ScalarToColor, ClampsOutOfRange)
{
    const ColorScale scale = ColorScale::white_to_red(0, 120);
    EXPECT_EQ(scalar_to_color(scale, -40), scalar_to_color(scale, 0));
    EXPECT_EQ(scalar_to_color(scale, 1e9), scalar_to_color(scale, 120));
}

TEST(ScalarToColor, MonotoneBetweenStops)
{
    ColorScale scale{{{0, {255, 255, 255}}, {10, {40, 200, 90}}, {30, {255, 0, 0}}}};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0, 30);
    for (int k = 0; k < 500; ++k) {
        double a = dist(rng), b = dist(rng);
        if (a > b) std::swap(a, b);
        // Same segment only: monotone per channel, direction given by the stops.
        if ((a < 10) != (b < 10)) continue;
        const auto& lo = a < 10 ? scale.stops[0] : scale.stops[1];
        const auto& hi = a < 10 ? scale.stops[1] : scale.stops[2];
        const Rgb ca = scalar_to_color(scale, a), cb = scalar_to_color(scale, b);
        auto check = [](double from, double to, double x, double y) {
            if (to >= from) EXPECT_LE(x, y + 1e-12);
            else EXPECT_GE(x, y - 1e-12);
        };
        check(lo.color.r, hi.color.r, ca.r, cb.r);
        check(lo.color.g, hi.color.g, ca.g, cb.g);
        check(lo.color.b, hi.color.b, ca.b, cb.b);
    }
}

TEST(ValidateScene, WellFormed) { EXPECT_TRUE(validate_scene(small_scene()).empty()); }

TEST(ValidateScene, DuplicateId)
{
    Scene s = small_scene();
    s.pois.push_back(s.pois[2]);
    const auto v = validate_scene(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(mentions(v, "'c'"));
}

TEST(ValidateScene, ThresholdOrdering)
{
    Scene s = small_scene();
    s.thresholds.m1_deg = 30;
    s.thresholds.m2_deg = 30;
    const auto v = validate_scene(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].entity, "thresholds");
}

TEST(ValidateScene, OverlappingGroupsRejected)
{
    Scene s = small_scene();
    s.groups.push_back({"g2", "Group two", {"b", "c"}});
    s.pois[2].group_id = "g2";
    EXPECT_TRUE(mentions(validate_scene(s), "also belongs"));
}

TEST(ValidateScene, UnresolvedMemberAndEmptyGroup)
{
    Scene s = small_scene();
    s.groups[0].member_ids.push_back("zzz");
    s.groups.push_back({"g3", "Empty", {}});
    const auto v = validate_scene(s);
    EXPECT_TRUE(mentions(v, "zzz"));
    EXPECT_TRUE(mentions(v, "no members"));
}

TEST(ValidateScene, ExtentOrderingAndScale)
{
    Scene s = small_scene();
    s.label_extents.lowest = {200, 10};
    s.color_scale.stops.pop_back();
    const auto v = validate_scene(s);
    EXPECT_TRUE(mentions(v, "label_extents"));
    EXPECT_TRUE(mentions(v, "color_scale"));
}

TEST(ValidateScene, NonFiniteScalar)
{
    Scene s = small_scene();
    s.pois[0].scalar.value = std::numeric_limits<double>::quiet_NaN();
    EXPECT_TRUE(mentions(validate_scene(s), "poi:a"));
}

} // namespace
} // namespace labelkit
