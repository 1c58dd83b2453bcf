#include <doctest.h>

#include <set>

#include "mirroreval/rng.hpp"
#include "mirroreval/world.hpp"

using namespace mirroreval;

namespace {

int candidate_count(const ScenarioConfig& cfg) {
    int n = 0;
    for (const CubeSpec& c : cfg.cubes) {
        if (c.role == CubeRole::candidate) ++n;
    }
    return n;
}

std::int64_t min_candidate_pair_dist_um(const ScenarioConfig& cfg) {
    std::int64_t best = INT64_MAX;
    const auto cands = cfg.candidate_cubes();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        for (std::size_t j = i + 1; j < cands.size(); ++j) {
            const double dx = static_cast<double>(cands[i]->cx_um - cands[j]->cx_um);
            const double dy = static_cast<double>(cands[i]->cy_um - cands[j]->cy_um);
            best = std::min(best, static_cast<std::int64_t>(std::sqrt(dx * dx + dy * dy)));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("palette has ten pairwise-distinguishable colors") {
    CHECK(palette().size() == 10);
    for (ColorLabel a : palette()) {
        for (ColorLabel b : palette()) {
            if (a == b) continue;
            CHECK(rgb_distance(color_rgb(a), color_rgb(b)) >= 100.0);
        }
        CHECK(rgb_distance(color_rgb(a), kWallGrey) >= 100.0);
        CHECK(rgb_distance(color_rgb(a), kFloorGrey) >= 100.0);
        CHECK(rgb_distance(color_rgb(a), kOccluderGrey) >= 100.0);
    }
}

TEST_CASE("scenario generation satisfies the type invariants over many seeds") {
    Rng seed_rng(101);
    for (int i = 0; i < 10'000; ++i) {
        const std::uint64_t seed = seed_rng.next_u64();
        const ConditionId condition = static_cast<ConditionId>(i % 5);
        const ScenarioConfig cfg = generate_scenario(condition, seed);

        CHECK(cfg.condition == condition);
        CHECK(cfg.max_steps == 100);

        // Mirror present iff not E2.
        CHECK(cfg.room.mirror.has_value() == (condition != ConditionId::E2));
        // Occluders only in E5.
        CHECK(cfg.room.occluders.empty() == (condition != ConditionId::E5));
        if (condition == ConditionId::E5) {
            CHECK(cfg.room.occluders.size() >= 1);
            CHECK(cfg.room.occluders.size() <= 3);
        }

        // wrong_color: E3 only, never the ego color.
        CHECK(cfg.wrong_color.has_value() == (condition == ConditionId::E3));
        if (cfg.wrong_color) CHECK(*cfg.wrong_color != cfg.ego_color);

        // Distractor counts.
        if (condition == ConditionId::E4 || condition == ConditionId::E5) {
            CHECK(cfg.distractors.size() >= 1);
            CHECK(cfg.distractors.size() <= 6);
        } else {
            CHECK(cfg.distractors.empty());
        }

        // Candidate cube structure in the cube-selection conditions.
        if (condition != ConditionId::E5) {
            CHECK(candidate_count(cfg) == 3);
            std::set<ColorLabel> colors;
            int ego_matches = 0;
            for (const CubeSpec* c : cfg.candidate_cubes()) {
                colors.insert(c->color);
                if (c->color == cfg.ego_color) ++ego_matches;
            }
            CHECK(colors.size() == 3);
            CHECK(ego_matches == 1);
            CHECK(min_candidate_pair_dist_um(cfg) >= 2 * kStepLenUm);
        } else {
            CHECK(candidate_count(cfg) == 0);
            CHECK(cfg.cubes.size() >= 2);
            CHECK(cfg.cubes.size() <= 5);
        }

        // Poses sit inside the room.
        CHECK(pose_inside_room(cfg.ego_start, cfg.room));
        for (const DistractorSpec& d : cfg.distractors) CHECK(pose_inside_room(d.initial_pose, cfg.room));
        CHECK(cfg.ego_start.heading_deg % kTurnDeg == 0);

        // Spawn heading keeps the mirror dead angle: facing at least 90
        // degrees away from the mirror center direction.
        const MirrorSpec mirror_ref =
            cfg.room.mirror ? *cfg.room.mirror : *generate_scenario(ConditionId::E1, seed).room.mirror;
        const Vec3 mc = mirror_center(mirror_ref);
        const Vec3 f = heading_dir(cfg.ego_start.heading_deg);
        const double dot_fm = f.x * (mc.x - cfg.ego_start.x()) + f.y * (mc.y - cfg.ego_start.y());
        CHECK(dot_fm <= 1e-9);
    }
}

TEST_CASE("identical (condition, seed) yields identical configs") {
    for (int c = 0; c < 5; ++c) {
        const ConditionId condition = static_cast<ConditionId>(c);
        const ScenarioConfig a = generate_scenario(condition, 424242);
        const ScenarioConfig b = generate_scenario(condition, 424242);
        CHECK(a.ego_color == b.ego_color);
        CHECK(a.ego_start == b.ego_start);
        REQUIRE(a.cubes.size() == b.cubes.size());
        for (std::size_t i = 0; i < a.cubes.size(); ++i) {
            CHECK(a.cubes[i].cx_um == b.cubes[i].cx_um);
            CHECK(a.cubes[i].cy_um == b.cubes[i].cy_um);
            CHECK(a.cubes[i].color == b.cubes[i].color);
        }
        REQUIRE(a.distractors.size() == b.distractors.size());
        for (std::size_t i = 0; i < a.distractors.size(); ++i) {
            CHECK(a.distractors[i].motion_seed == b.distractors[i].motion_seed);
            CHECK(a.distractors[i].initial_pose == b.distractors[i].initial_pose);
        }
    }
}

TEST_CASE("E2 equals E1 minus the mirror for the same seed") {
    const ScenarioConfig e1 = generate_scenario(ConditionId::E1, 77);
    const ScenarioConfig e2 = generate_scenario(ConditionId::E2, 77);
    CHECK(!e2.room.mirror.has_value());
    CHECK(e1.room.mirror.has_value());
    CHECK(e1.ego_color == e2.ego_color);
    CHECK(e1.ego_start == e2.ego_start);
    REQUIRE(e1.cubes.size() == e2.cubes.size());
    for (std::size_t i = 0; i < e1.cubes.size(); ++i) {
        CHECK(e1.cubes[i].cx_um == e2.cubes[i].cx_um);
        CHECK(e1.cubes[i].color == e2.cubes[i].color);
    }
}

TEST_CASE("rotations are exact: 30 degree steps, 12 lefts compose to identity") {
    const ScenarioConfig cfg = generate_scenario(ConditionId::E1, 5);
    WorldState s = initial_state(cfg);

    const ApplyResult turned = apply_action(s, Action::a, cfg.room);
    CHECK(turned.state.ego.heading_deg == (s.ego.heading_deg + 30) % 360);
    CHECK(turned.state.ego.x_um == s.ego.x_um);
    CHECK(!turned.bumped);

    WorldState w = s;
    for (int i = 0; i < 12; ++i) w = apply_action(w, Action::a, cfg.room).state;
    CHECK(w.ego.heading_deg == s.ego.heading_deg);
    CHECK(w.ego.x_um == s.ego.x_um);
    CHECK(w.ego.y_um == s.ego.y_um);
}

TEST_CASE("translation moves exactly one step along the heading") {
    ScenarioConfig cfg = generate_scenario(ConditionId::E1, 5);
    WorldState s = initial_state(cfg);
    s.ego = Pose{2'000'000, 2'000'000, 0};
    const WorldState moved = apply_action(s, Action::w, cfg.room).state;
    CHECK(moved.ego.x_um == 2'500'000);
    CHECK(moved.ego.y_um == 2'000'000);
    CHECK(moved.t == s.t + 1);
}

TEST_CASE("move then unmove restores the pose exactly") {
    Rng rng(99);
    const ScenarioConfig cfg = generate_scenario(ConditionId::E1, 9);
    for (int i = 0; i < 1000; ++i) {
        WorldState s = initial_state(cfg);
        s.ego.x_um = rng.uniform_range(1'000'000, 9'000'000);
        s.ego.y_um = rng.uniform_range(1'000'000, 9'000'000);
        s.ego.heading_deg = static_cast<int>(rng.uniform(12)) * 30;
        const ApplyResult fwd = apply_action(s, Action::w, cfg.room);
        const ApplyResult back = apply_action(fwd.state, Action::s, cfg.room);
        if (!fwd.bumped && !back.bumped) {
            CHECK(back.state.ego.x_um == s.ego.x_um);
            CHECK(back.state.ego.y_um == s.ego.y_um);
            CHECK(back.state.ego.heading_deg == s.ego.heading_deg);
        }
    }
}

TEST_CASE("blocked moves keep the pose and report the bump") {
    const ScenarioConfig cfg = generate_scenario(ConditionId::E1, 5);
    WorldState s = initial_state(cfg);
    s.ego = Pose{400'000, 5'000'000, 180};  // 0.1 m of slack to the west wall
    const ApplyResult r = apply_action(s, Action::w, cfg.room);
    CHECK(r.bumped);
    CHECK(r.state.ego == s.ego);
    CHECK(r.state.t == s.t + 1);
    CHECK(r.state.bumped_last);
}

TEST_CASE("pose stays inside the room under action fuzzing") {
    Rng rng(123);
    const ScenarioConfig cfg = generate_scenario(ConditionId::E1, 11);
    WorldState s = initial_state(cfg);
    constexpr Action kMoves[4] = {Action::w, Action::a, Action::s, Action::d};
    for (int i = 0; i < 100'000; ++i) {
        s = apply_action(s, kMoves[rng.uniform(4)], cfg.room).state;
        REQUIRE(pose_inside_room(s.ego, cfg.room));
        REQUIRE(s.ego.heading_deg % 30 == 0);
        REQUIRE(s.ego.heading_deg >= 0);
        REQUIRE(s.ego.heading_deg < 360);
    }
}

TEST_CASE("distractor stepping is deterministic and leaves non-distractor scenarios unchanged") {
    const ScenarioConfig e1 = generate_scenario(ConditionId::E1, 21);
    WorldState s1 = initial_state(e1);
    const WorldState stepped = step_distractors(s1, e1);
    CHECK(stepped.ego == s1.ego);
    CHECK(stepped.distractors.empty());

    const ScenarioConfig e4 = generate_scenario(ConditionId::E4, 21);
    WorldState a = initial_state(e4);
    WorldState b = initial_state(e4);
    for (int i = 0; i < 50; ++i) {
        a.t = i;
        b.t = i;
        a = step_distractors(a, e4);
        b = step_distractors(b, e4);
        REQUIRE(a.distractors.size() == b.distractors.size());
        for (std::size_t k = 0; k < a.distractors.size(); ++k) {
            REQUIRE(a.distractors[k] == b.distractors[k]);
            REQUIRE(pose_inside_room(a.distractors[k], e4.room));
        }
    }
}

TEST_CASE("cube reach uses a closed threshold") {
    const ScenarioConfig cfg = generate_scenario(ConditionId::E1, 3);
    CubeSpec cube;
    cube.cx_um = 5'000'000;
    cube.cy_um = 5'000'000;

    WorldState s = initial_state(cfg);
    // reach = step + edge/2 + body radius = 1.1 m
    s.ego = Pose{5'000'000 + 1'100'000, 5'000'000, 0};
    CHECK(cube_within_reach(s, cube));  // exactly at the threshold
    s.ego.x_um += 1;
    CHECK(!cube_within_reach(s, cube));
    s.ego = Pose{5'400'000, 5'000'000, 0};
    CHECK(cube_within_reach(s, cube));
    s.ego = Pose{9'500'000, 9'500'000, 0};
    CHECK(!cube_within_reach(s, cube));
}

TEST_CASE("E4 forces an ego-colored distractor about half the time") {
    int with_collision = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const ScenarioConfig cfg = generate_scenario(ConditionId::E4, 50'000 + i);
        bool any = false;
        for (const DistractorSpec& d : cfg.distractors) {
            if (d.color == cfg.ego_color) any = true;
        }
        if (any) ++with_collision;
    }
    // 0.5 forced plus natural collisions on the unforced half (~0.65 overall).
    const double rate = static_cast<double>(with_collision) / n;
    CHECK(rate > 0.55);
    CHECK(rate < 0.75);
}

TEST_CASE("reflect_point is an involution that fixes the mirror plane") {
    const ScenarioConfig cfg = generate_scenario(ConditionId::E1, 8);
    const MirrorSpec& m = *cfg.room.mirror;

    const Vec3 on_plane = wall_point(m.wall_id, um_to_m(m.u_min_um) + 0.3, 1.0);
    const Vec3 r = reflect_point(on_plane, m);
    CHECK(norm(r - on_plane) < 1e-12);

    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const Vec3 p{rng.next_double() * 10, rng.next_double() * 10, rng.next_double() * 3};
        const Vec3 rr = reflect_point(reflect_point(p, m), m);
        CHECK(norm(rr - p) < 1e-12);
    }

    // 1 m in front maps to 1 m behind with the tangential coordinates kept.
    const Vec3 n = wall_inward_normal(m.wall_id);
    const Vec3 front = on_plane + n * 1.0;
    const Vec3 image = reflect_point(front, m);
    CHECK(norm(image - (on_plane - n * 1.0)) < 1e-12);
}
