#include "labelkit/pipeline.hpp"
#include "labelkit/scene_io.hpp"

#include <gtest/gtest.h>

#include <random>

namespace labelkit {
namespace {

const std::filesystem::path kData = LABELKIT_DATA_DIR;

std::shared_ptr<const Scene> theme_park() { return std::make_shared<const Scene>(load_scene(kData / "theme-park.json")); }

std::shared_ptr<const Scene> row_scene(int n)
{
    auto s = std::make_shared<Scene>();
    for (int k = 0; k < n; ++k)
        s->pois.push_back({"p" + std::to_string(k), "P" + std::to_string(k), {3.0 * k - 10, 0, -40.0 - 6.0 * k}, {}, "adventure",
                           "", {10.0 * k, "min"}, std::nullopt});
    s->label_extents = {{4, 4}, {6, 6}, {8, 9}};
    return s;
}

DevicePose pose_at(WorldPosition p, double yaw = 0, double pitch = 0)
{
    DevicePose d;
    d.position = p;
    d.yaw_deg = yaw;
    d.pitch_deg = pitch;
    return d;
}

TEST(ElementTargets, PerLevel)
{
    EXPECT_EQ(element_targets(LodLevel::Lowest), (ElementAlpha{1, 1, 0, 0}));
    EXPECT_EQ(element_targets(LodLevel::Middle), (ElementAlpha{1, 1, 1, 0}));
    EXPECT_EQ(element_targets(LodLevel::Highest), (ElementAlpha{1, 1, 1, 1}));
}

TEST(LabelEngine, FirstFrameIsSettledAndStatic)
{
    LabelEngine engine(row_scene(6));
    const auto pose = pose_at({0, 1.6, 0});
    const FrameSnapshot a = engine.update_frame(pose, 0.0);
    const FrameSnapshot b = engine.update_frame(pose, 1.0 / 60);
    EXPECT_EQ(a.labels.size(), 6u);
    EXPECT_TRUE(same_labels(a, b));
    EXPECT_EQ(b.frame_index, 1u);
    EXPECT_EQ(engine.retargets(), 0u);
}

TEST(LabelEngine, ConvergesAfterMoveThenHoldsBitIdentical)
{
    LabelEngine engine(row_scene(8));
    engine.update_frame(pose_at({0, 1.6, 0}), 0.0);
    const auto moved = pose_at({5, 1.6, -10});
    const double dt = 1.0 / 30;
    FrameSnapshot prev = engine.update_frame(moved, dt);
    const FrameSnapshot first_after = prev;
    bool changed = false;
    for (int f = 2; f <= 40; ++f) {
        const FrameSnapshot next = engine.update_frame(moved, f * dt);
        if (!same_labels(prev, next)) changed = true;
        // Settled once a full transition has elapsed since the move.
        if (f * dt >= dt + engine.scene().transition_duration_s) EXPECT_TRUE(same_labels(prev, next)) << "frame " << f;
        prev = next;
    }
    EXPECT_TRUE(changed);
    EXPECT_FALSE(same_labels(first_after, prev));
}

TEST(LabelEngine, YawAndPitchLeaveWorldContentUnchanged)
{
    const auto scene = theme_park();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> yaw(-180, 180), pitch(-60, 60);
    const WorldPosition at{-300, 1.6, -300};
    LabelEngine reference(scene);
    const FrameSnapshot base = reference.update_frame(pose_at(at), 0.0);
    for (int k = 0; k < 8; ++k) {
        LabelEngine engine(scene);
        const FrameSnapshot s = engine.update_frame(pose_at(at, yaw(rng), pitch(rng)), 0.0);
        EXPECT_TRUE(same_labels(base, s));
    }
}

TEST(LabelEngine, RejectsBackwardTimeAndBadPose)
{
    LabelEngine engine(row_scene(2));
    engine.update_frame(pose_at({0, 1.6, 0}), 1.0);
    EXPECT_THROW(engine.update_frame(pose_at({0, 1.6, 0}), 0.5), LabelError);
    EXPECT_THROW(engine.update_frame(pose_at({NAN, 1.6, 0}), 2.0), LabelError);
    EXPECT_NO_THROW(engine.update_frame(pose_at({0, 1.6, 0}), 1.0));
}

TEST(LabelEngine, RejectsInvalidScene)
{
    auto s = std::make_shared<Scene>(*row_scene(2));
    s->pois[1].id = s->pois[0].id;
    EXPECT_THROW(LabelEngine{s}, LabelError);
}

TEST(LabelEngine, StagesInstrumented)
{
    LabelEngine engine(theme_park());
    const FrameSnapshot s = engine.update_frame(pose_at({0, 1.6, 200}), 0.0);
    const StageTimings& t = s.instrumentation.stage_us;
    for (double v : {t.positioning_us, t.aggregation_us, t.occlusion_us, t.lod_us, t.coherence_us}) EXPECT_GE(v, 0.0);
    EXPECT_GT(s.instrumentation.rays_cast, 0u);
}

TEST(LabelEngine, ThemeParkFarAwayShowsSixSuperLabels)
{
    LabelEngine engine(theme_park());
    const FrameSnapshot s = engine.update_frame(pose_at({0, 1.6, 20000}), 0.0);
    std::size_t supers = 0;
    for (const LabelRecord& r : s.labels) supers += r.kind == EntityKind::Super;
    EXPECT_EQ(supers, 6u);
}

TEST(LabelEngine, AggregationTransitionFadesMembers)
{
    const auto scene = theme_park();
    const Scene& sc = *scene;
    LabelEngine engine(scene);
    // Start inside Tomorrowland, then walk far away so it collapses.
    const LabelGroup& group = *sc.find_group("tomorrowland");
    const WorldPosition inside = sc.find_poi(group.member_ids[0])->position + WorldPosition{0, 1.6, 0};
    const FrameSnapshot start = engine.update_frame(pose_at(inside), 0.0);
    auto find = [](const FrameSnapshot& s, const std::string& id, EntityKind kind) -> const LabelRecord* {
        for (const LabelRecord& r : s.labels)
            if (r.id == id && r.kind == kind) return &r;
        return nullptr;
    };
    ASSERT_NE(find(start, group.member_ids[0], EntityKind::Poi), nullptr);
    ASSERT_EQ(find(start, "tomorrowland", EntityKind::Super), nullptr);

    const WorldPosition away{-900, 1.6, -1080};
    double prev_member = 1.0;
    const double dt = 1.0 / 30;
    bool saw_blend = false;
    for (int f = 1; f <= 40; ++f) {
        const FrameSnapshot s = engine.update_frame(pose_at(away), f * dt);
        const LabelRecord* member = find(s, group.member_ids[0], EntityKind::Poi);
        const LabelRecord* super = find(s, "tomorrowland", EntityKind::Super);
        const double m = member ? member->alpha.rectangle : 0.0;
        const double su = super ? super->alpha.rectangle : 0.0;
        EXPECT_LE(m, prev_member);
        EXPECT_NEAR(m + su, 1.0, 1e-12);
        if (member && super) saw_blend = true;
        prev_member = m;
    }
    EXPECT_TRUE(saw_blend);
    EXPECT_EQ(prev_member, 0.0);
}

TEST(LabelEngine, OverridesApply)
{
    LabelEngine engine(row_scene(3));
    EXPECT_THROW(engine.set_thresholds({45, 30, 20}), LabelError);
    EXPECT_THROW(engine.set_transition_duration(0.0), LabelError);
    EXPECT_THROW(engine.set_scalar("missing", 1.0), LabelError);
    engine.set_easing(EasingKind::Linear);
    EXPECT_EQ(engine.easing(), EasingKind::Linear);
    const auto pose = pose_at({0, 1.6, 0});
    const Rgb before = engine.update_frame(pose, 0.0).labels[0].background;
    engine.set_scalar("p0", 120.0);
    const Rgb after = engine.update_frame(pose, 0.1).labels[0].background;
    EXPECT_NE(before, after);
    EXPECT_EQ(after, (Rgb{255, 0, 0}));
}

TEST(SnapshotJson, RoundTrip)
{
    LabelEngine engine(theme_park());
    const FrameSnapshot s = engine.update_frame(pose_at({-300, 1.6, -300}, 12, 3), 0.25);
    const FrameSnapshot back = snapshot_from_json(snapshot_to_json(s));
    EXPECT_TRUE(same_labels(s, back));
    EXPECT_EQ(back.frame_index, s.frame_index);
    EXPECT_EQ(back.instrumentation.rays_cast, s.instrumentation.rays_cast);
    EXPECT_EQ(snapshot_to_json(back), snapshot_to_json(s));
}

TEST(SnapshotJson, RejectsMalformed)
{
    EXPECT_THROW(snapshot_from_json(nlohmann::json::object()), FormatError);
}

FrameSnapshot one_label(WorldPosition at, Extent e)
{
    FrameSnapshot s;
    LabelRecord r;
    r.id = "x";
    r.position = at;
    r.normal = orient_billboard(at, {0, 0, 0});
    r.extent = e;
    s.labels.push_back(r);
    return s;
}

TEST(Projection, CenteredOnAxis)
{
    CameraModel cam;
    cam.pose = pose_at({0, 0, 0});
    const auto p = project_to_screen(one_label({0, -5, -50}, {10, 10}), cam);
    ASSERT_TRUE(p[0].on_screen);
    EXPECT_NEAR((p[0].min_x + p[0].max_x) / 2, cam.viewport_width / 2, 1e-9);
    EXPECT_NEAR((p[0].min_y + p[0].max_y) / 2, cam.viewport_height / 2, 1e-9);
    EXPECT_NEAR(p[0].depth, 50.0, 1e-12);
}

TEST(Projection, DoublingDistanceHalvesHeight)
{
    CameraModel cam;
    cam.pose = pose_at({0, 0, 0});
    const auto near = project_to_screen(one_label({0, -5, -50}, {10, 10}), cam)[0];
    const auto far = project_to_screen(one_label({0, -5, -100}, {10, 10}), cam)[0];
    const double hn = near.max_y - near.min_y, hf = far.max_y - far.min_y;
    EXPECT_NEAR(hf / hn, 0.5, 0.0025);
}

TEST(Projection, BehindAndBesideAreOffScreen)
{
    CameraModel cam;
    cam.pose = pose_at({0, 0, 0});
    EXPECT_FALSE(project_to_screen(one_label({0, 0, 50}, {10, 10}), cam)[0].on_screen);
    // Well past the horizontal half field of view.
    EXPECT_FALSE(project_to_screen(one_label({100, 0, -10}, {10, 10}), cam)[0].on_screen);
    cam.pose.yaw_deg = 90;
    EXPECT_TRUE(project_to_screen(one_label({100, -5, 0}, {10, 10}), cam)[0].on_screen);
}

TEST(ScreenOverlap, SeparatingAxis)
{
    ScreenLabel a, b;
    a.corners = {ScreenPoint{0, 10}, ScreenPoint{10, 10}, ScreenPoint{0, 0}, ScreenPoint{10, 0}};
    a.min_x = 0, a.max_x = 10, a.min_y = 0, a.max_y = 10;
    b = a;
    for (auto& c : b.corners) c.x += 5;
    EXPECT_TRUE(screen_overlap(a, b));
    for (auto& c : b.corners) c.x += 5;
    EXPECT_FALSE(screen_overlap(a, b)); // touching edges only
}

TEST(ScreenSpace, ResolvedLabelsNeverOverlapFromDevice)
{
    const auto scene = theme_park();
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> yaw(-180, 180), pitch(-30, 30);
    for (const WorldPosition at : {WorldPosition{0, 1.6, 200}, WorldPosition{-450, 1.6, -250}, WorldPosition{0, 1.6, -900}}) {
        LabelEngine engine(scene);
        for (int k = 0; k < 8; ++k) {
            CameraModel cam;
            cam.pose = pose_at(at, yaw(rng), pitch(rng));
            const FrameSnapshot s = engine.update_frame(cam.pose, k);
            const auto screen = project_to_screen(s, cam);
            for (std::size_t i = 0; i < screen.size(); ++i) {
                if (!screen[i].on_screen) continue;
                for (std::size_t j = i + 1; j < screen.size(); ++j) {
                    if (!screen[j].on_screen) continue;
                    EXPECT_FALSE(screen_overlap(screen[i], screen[j])) << screen[i].id << " / " << screen[j].id;
                }
            }
        }
    }
}

TEST(ComputeGoals, PureFunctionOfPosition)
{
    const auto scene = theme_park();
    const FrameGoals a = compute_goals(*scene, {10, 1.6, -50}, nullptr);
    const FrameGoals b = compute_goals(*scene, {10, 1.6, -50}, nullptr);
    EXPECT_EQ(a.anchors, b.anchors);
    EXPECT_EQ(a.lods.levels, b.lods.levels);
    EXPECT_EQ(a.occlusion.rays_cast, b.occlusion.rays_cast);
}

} // namespace
} // namespace labelkit
