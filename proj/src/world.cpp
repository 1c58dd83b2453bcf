#include "mirroreval/world.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "mirroreval/rng.hpp"

namespace mirroreval {

namespace {

constexpr std::int64_t kRoomWUm = 10'000'000;
constexpr std::int64_t kRoomDUm = 10'000'000;

// 0.5 m displacement per heading, in exact micrometers (llround(5e5*cos),
// llround(5e5*sin)). Hardcoded so the table never depends on libm rounding.
constexpr std::array<StepVec, 12> kStepTable{{
    {500000, 0},        // 0
    {433013, 250000},   // 30
    {250000, 433013},   // 60
    {0, 500000},        // 90
    {-250000, 433013},  // 120
    {-433013, 250000},  // 150
    {-500000, 0},       // 180
    {-433013, -250000}, // 210
    {-250000, -433013}, // 240
    {0, -500000},       // 270
    {250000, -433013},  // 300
    {433013, -250000},  // 330
}};

std::int64_t room_w_um(const RoomSpec& room) { return m_to_um(room.width); }
std::int64_t room_d_um(const RoomSpec& room) { return m_to_um(room.depth); }

std::int64_t sample_um(Rng& rng, std::int64_t lo_um, std::int64_t hi_um) {
    return rng.uniform_range(lo_um, hi_um);
}

std::int64_t sq_dist_um2(std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by) {
    const std::int64_t dx = ax - bx;
    const std::int64_t dy = ay - by;
    return dx * dx + dy * dy;
}

// Signed distance (um) from a point to the mirror wall plane, measured inward.
std::int64_t dist_to_wall_um(int wall_id, std::int64_t x_um, std::int64_t y_um) {
    switch (wall_id) {
        case 0: return y_um;
        case 1: return kRoomWUm - x_um;
        case 2: return kRoomDUm - y_um;
        default: return x_um;
    }
}

// Integer-only test that a heading keeps the mirror center at >= 90 degrees
// off the facing direction, so the first frame cannot show the reflection.
bool heading_faces_away(const Pose& pose, int heading_deg, std::int64_t mx_um, std::int64_t my_um) {
    const StepVec f = step_vector(heading_deg);
    const __int128 d =
        static_cast<__int128>(f.dx_um) * (mx_um - pose.x_um) + static_cast<__int128>(f.dy_um) * (my_um - pose.y_um);
    return d <= 0;
}

MirrorSpec sample_mirror(Rng& rng) {
    MirrorSpec m;
    m.wall_id = static_cast<int>(rng.uniform(4));
    const std::int64_t width_um = sample_um(rng, 2'500'000, 4'000'000);
    const std::int64_t wall_len = m_to_um(wall_length(m.wall_id));
    const std::int64_t margin = 500'000;
    const std::int64_t lo = margin;
    const std::int64_t hi = wall_len - margin - width_um;
    m.u_min_um = sample_um(rng, lo, hi);
    m.u_max_um = m.u_min_um + width_um;
    m.height_um = 2'500'000;
    return m;
}

Pose sample_ego_start(Rng& rng, const MirrorSpec& mirror) {
    Pose p;
    p.x_um = sample_um(rng, 1'000'000, 9'000'000);
    p.y_um = sample_um(rng, 1'000'000, 9'000'000);
    const Vec3 mc = mirror_center(mirror);
    const std::int64_t mx = m_to_um(mc.x);
    const std::int64_t my = m_to_um(mc.y);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const int heading = static_cast<int>(rng.uniform(12)) * kTurnDeg;
        if (heading_faces_away(p, heading, mx, my)) {
            p.heading_deg = heading;
            return p;
        }
    }
    // At least 5 of the 12 headings satisfy the dot test from any interior
    // point, so 64 draws cannot all miss; keep the type system happy anyway.
    p.heading_deg = 0;
    return p;
}

std::vector<CubeSpec> sample_candidate_cubes(Rng& rng, const MirrorSpec& mirror, ColorLabel ego_color,
                                             const Pose& ego_start) {
    // One cube carries c*, the other two carry distinct non-ego colors.
    std::vector<ColorLabel> others;
    for (ColorLabel c : palette()) {
        if (c != ego_color) others.push_back(c);
    }
    rng.shuffle(others);
    std::vector<ColorLabel> colors{ego_color, others[0], others[1]};
    rng.shuffle(colors);

    constexpr std::int64_t kWallMarginUm = 800'000;
    constexpr std::int64_t kMirrorWallClearUm = 1'000'000;
    constexpr std::int64_t kPairSepUm = 1'200'000;   // generator margin over the 1.0 m invariant
    constexpr std::int64_t kEgoClearUm = 1'000'000;

    std::vector<CubeSpec> cubes;
    while (cubes.size() < 3) {
        CubeSpec c;
        c.color = colors[cubes.size()];
        c.cx_um = sample_um(rng, kWallMarginUm, kRoomWUm - kWallMarginUm);
        c.cy_um = sample_um(rng, kWallMarginUm, kRoomDUm - kWallMarginUm);
        c.role = CubeRole::candidate;
        if (dist_to_wall_um(mirror.wall_id, c.cx_um, c.cy_um) < kMirrorWallClearUm) continue;
        if (sq_dist_um2(c.cx_um, c.cy_um, ego_start.x_um, ego_start.y_um) < kEgoClearUm * kEgoClearUm) continue;
        bool ok = true;
        for (const CubeSpec& prev : cubes) {
            if (sq_dist_um2(c.cx_um, c.cy_um, prev.cx_um, prev.cy_um) < kPairSepUm * kPairSepUm) {
                ok = false;
                break;
            }
        }
        if (ok) cubes.push_back(c);
    }
    return cubes;
}

std::vector<DistractorSpec> sample_distractors(Rng& rng, int count) {
    std::vector<DistractorSpec> out;
    for (int i = 0; i < count; ++i) {
        DistractorSpec d;
        d.color = palette()[rng.uniform(kPaletteSize)];
        d.initial_pose.x_um = sample_um(rng, 1'000'000, 9'000'000);
        d.initial_pose.y_um = sample_um(rng, 1'000'000, 9'000'000);
        d.initial_pose.heading_deg = static_cast<int>(rng.uniform(12)) * kTurnDeg;
        d.motion_seed = rng.next_u64();
        out.push_back(d);
    }
    return out;
}

std::vector<OccluderSpec> sample_occluders(Rng& rng, const MirrorSpec& mirror) {
    // Panels sit on the segment from room center to mirror center, sized to
    // hide 30-70% of the mirror from that vantage (similar triangles).
    const Vec3 mc = mirror_center(mirror);
    const std::int64_t mx = m_to_um(mc.x);
    const std::int64_t my = m_to_um(mc.y);
    const std::int64_t cx = kRoomWUm / 2;
    const std::int64_t cy = kRoomDUm / 2;
    const std::int64_t mirror_w = mirror.u_max_um - mirror.u_min_um;

    const int count = static_cast<int>(rng.uniform_range(1, 3));
    std::vector<OccluderSpec> out;
    for (int i = 0; i < count; ++i) {
        const std::int64_t frac_pm = rng.uniform_range(400, 700);      // position along segment, per-mille
        const std::int64_t cover_pm = rng.uniform_range(300, 700);     // mirror coverage, per-mille
        const std::int64_t jitter_pm = rng.uniform_range(-150, 150);   // lateral offset, per-mille of width
        OccluderSpec o;
        o.cx_um = cx + (mx - cx) * frac_pm / 1000;
        o.cy_um = cy + (my - cy) * frac_pm / 1000;
        // Tangential jitter along the mirror wall direction.
        const Vec3 tan = wall_tangent(mirror.wall_id);
        const std::int64_t jitter_um = mirror_w * frac_pm / 1000 * jitter_pm / 1000;
        o.cx_um += static_cast<std::int64_t>(tan.x) * jitter_um;
        o.cy_um += static_cast<std::int64_t>(tan.y) * jitter_um;
        o.half_width_um = mirror_w * frac_pm / 1000 * cover_pm / 1000 / 2;
        o.height_um = 1'800'000;
        out.push_back(o);
    }
    return out;
}

std::vector<CubeSpec> sample_clutter_cubes(Rng& rng, int count) {
    std::vector<CubeSpec> out;
    constexpr std::int64_t kWallMarginUm = 800'000;
    constexpr std::int64_t kSepUm = 800'000;
    while (static_cast<int>(out.size()) < count) {
        CubeSpec c;
        c.color = palette()[rng.uniform(kPaletteSize)];
        c.cx_um = sample_um(rng, kWallMarginUm, kRoomWUm - kWallMarginUm);
        c.cy_um = sample_um(rng, kWallMarginUm, kRoomDUm - kWallMarginUm);
        c.role = CubeRole::clutter;
        bool ok = true;
        for (const CubeSpec& prev : out) {
            if (sq_dist_um2(c.cx_um, c.cy_um, prev.cx_um, prev.cy_um) < kSepUm * kSepUm) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(c);
    }
    return out;
}

}  // namespace

std::string_view condition_name(ConditionId c) {
    switch (c) {
        case ConditionId::E1: return "E1";
        case ConditionId::E2: return "E2";
        case ConditionId::E3: return "E3";
        case ConditionId::E4: return "E4";
        case ConditionId::E5: return "E5";
    }
    return "?";
}

std::optional<ConditionId> condition_from_name(std::string_view name) {
    if (name == "E1") return ConditionId::E1;
    if (name == "E2") return ConditionId::E2;
    if (name == "E3") return ConditionId::E3;
    if (name == "E4") return ConditionId::E4;
    if (name == "E5") return ConditionId::E5;
    return std::nullopt;
}

std::string_view action_name(Action a) {
    switch (a) {
        case Action::w: return "w";
        case Action::a: return "a";
        case Action::s: return "s";
        case Action::d: return "d";
        case Action::done: return "done";
    }
    return "?";
}

std::optional<Action> action_from_name(std::string_view name) {
    if (name == "w") return Action::w;
    if (name == "a") return Action::a;
    if (name == "s") return Action::s;
    if (name == "d") return Action::d;
    if (name == "done") return Action::done;
    return std::nullopt;
}

StepVec step_vector(int heading_deg) {
    return kStepTable[static_cast<std::size_t>(((heading_deg % 360) + 360) % 360) / kTurnDeg];
}

Vec3 heading_dir(int heading_deg) {
    const StepVec v = step_vector(heading_deg);
    return {static_cast<double>(v.dx_um) / static_cast<double>(kStepLenUm),
            static_cast<double>(v.dy_um) / static_cast<double>(kStepLenUm), 0.0};
}

Vec3 wall_inward_normal(int wall_id) {
    switch (wall_id) {
        case 0: return {0, 1, 0};
        case 1: return {-1, 0, 0};
        case 2: return {0, -1, 0};
        default: return {1, 0, 0};
    }
}

Vec3 wall_tangent(int wall_id) {
    switch (wall_id) {
        case 0: return {1, 0, 0};   // u = x
        case 1: return {0, 1, 0};   // u = y
        case 2: return {1, 0, 0};   // u = x
        default: return {0, 1, 0};  // u = y
    }
}

Vec3 wall_point(int wall_id, double u, double z) {
    switch (wall_id) {
        case 0: return {u, 0, z};
        case 1: return {kRoomWidthM, u, z};
        case 2: return {u, kRoomDepthM, z};
        default: return {0, u, z};
    }
}

double wall_length(int wall_id) { return (wall_id == 0 || wall_id == 2) ? kRoomWidthM : kRoomDepthM; }

Vec3 mirror_plane_point(const MirrorSpec& m) { return wall_point(m.wall_id, um_to_m(m.u_min_um), 0.0); }

Vec3 reflect_point(const Vec3& p, const MirrorSpec& m) {
    const Vec3 n = wall_inward_normal(m.wall_id);
    const Vec3 p0 = mirror_plane_point(m);
    const double d = dot(p - p0, n);
    return p - n * (2.0 * d);
}

Vec3 reflect_dir(const Vec3& d, const MirrorSpec& m) {
    const Vec3 n = wall_inward_normal(m.wall_id);
    return d - n * (2.0 * dot(d, n));
}

Vec3 mirror_center(const MirrorSpec& m) {
    const double u = 0.5 * (um_to_m(m.u_min_um) + um_to_m(m.u_max_um));
    return wall_point(m.wall_id, u, 0.5 * um_to_m(m.height_um));
}

std::vector<const CubeSpec*> ScenarioConfig::candidate_cubes() const {
    std::vector<const CubeSpec*> out;
    for (const CubeSpec& c : cubes) {
        if (c.role == CubeRole::candidate) out.push_back(&c);
    }
    return out;
}

ScenarioConfig generate_scenario(ConditionId condition, std::uint64_t seed) {
    Rng rng(stable_hash64({seed, static_cast<std::uint64_t>(condition)}));

    ScenarioConfig cfg;
    cfg.condition = condition;
    cfg.seed = seed;
    cfg.max_steps = kDefaultMaxSteps;

    // Every condition is generated against a mirror so that E2 is the same
    // world as E1 with the mirror deleted, per seed.
    const MirrorSpec mirror = sample_mirror(rng);
    cfg.room.mirror = mirror;

    cfg.ego_color = palette()[rng.uniform(kPaletteSize)];
    cfg.ego_start = sample_ego_start(rng, mirror);

    switch (condition) {
        case ConditionId::E1:
            cfg.cubes = sample_candidate_cubes(rng, mirror, cfg.ego_color, cfg.ego_start);
            break;
        case ConditionId::E2:
            cfg.cubes = sample_candidate_cubes(rng, mirror, cfg.ego_color, cfg.ego_start);
            cfg.room.mirror.reset();
            break;
        case ConditionId::E3: {
            cfg.cubes = sample_candidate_cubes(rng, mirror, cfg.ego_color, cfg.ego_start);
            std::vector<ColorLabel> others;
            for (ColorLabel c : palette()) {
                if (c != cfg.ego_color) others.push_back(c);
            }
            cfg.wrong_color = others[rng.uniform(others.size())];
            break;
        }
        case ConditionId::E4: {
            cfg.cubes = sample_candidate_cubes(rng, mirror, cfg.ego_color, cfg.ego_start);
            cfg.distractors = sample_distractors(rng, static_cast<int>(rng.uniform_range(1, 6)));
            // Half the scenarios force a distractor with the ego's exact color.
            if (rng.next_double() < 0.5) {
                cfg.distractors[rng.uniform(cfg.distractors.size())].color = cfg.ego_color;
            }
            break;
        }
        case ConditionId::E5: {
            cfg.distractors = sample_distractors(rng, static_cast<int>(rng.uniform_range(1, 6)));
            cfg.cubes = sample_clutter_cubes(rng, static_cast<int>(rng.uniform_range(2, 5)));
            cfg.room.occluders = sample_occluders(rng, mirror);
            break;
        }
    }
    return cfg;
}

WorldState initial_state(const ScenarioConfig& scenario) {
    WorldState s;
    s.t = 0;
    s.ego = scenario.ego_start;
    for (const DistractorSpec& d : scenario.distractors) s.distractors.push_back(d.initial_pose);
    s.bumped_last = false;
    return s;
}

bool pose_inside_room(const Pose& p, const RoomSpec& room) {
    return p.x_um >= kBodyRadiusUm && p.x_um <= room_w_um(room) - kBodyRadiusUm && p.y_um >= kBodyRadiusUm &&
           p.y_um <= room_d_um(room) - kBodyRadiusUm;
}

namespace {

// Shared by the ego and distractors: walls block, everything else passes.
bool move_pose(Pose& p, Action action, const RoomSpec& room) {
    switch (action) {
        case Action::a:
            p.heading_deg = (p.heading_deg + kTurnDeg) % 360;
            return false;
        case Action::d:
            p.heading_deg = (p.heading_deg - kTurnDeg + 360) % 360;
            return false;
        case Action::w:
        case Action::s: {
            const StepVec v = step_vector(p.heading_deg);
            const std::int64_t sign = (action == Action::w) ? 1 : -1;
            Pose moved = p;
            moved.x_um += sign * v.dx_um;
            moved.y_um += sign * v.dy_um;
            if (!pose_inside_room(moved, room)) return true;
            p = moved;
            return false;
        }
        case Action::done:
            return false;
    }
    return false;
}

}  // namespace

ApplyResult apply_action(const WorldState& state, Action action, const RoomSpec& room) {
    ApplyResult r;
    r.state = state;
    r.bumped = move_pose(r.state.ego, action, room);
    r.state.t = state.t + 1;
    r.state.bumped_last = r.bumped;
    return r;
}

WorldState step_distractors(const WorldState& state, const ScenarioConfig& scenario) {
    WorldState next = state;
    for (std::size_t i = 0; i < next.distractors.size(); ++i) {
        // One draw per (distractor, timestep): replays and out-of-order
        // episode execution see identical motion.
        Rng rng(stable_hash64({scenario.distractors[i].motion_seed, static_cast<std::uint64_t>(state.t)}));
        const double u = rng.next_double();
        Action act = Action::s;
        if (u < 0.5) {
            act = Action::w;
        } else if (u < 0.7) {
            act = Action::a;
        } else if (u < 0.9) {
            act = Action::d;
        }
        move_pose(next.distractors[i], act, scenario.room);
    }
    return next;
}

bool cube_within_reach(const WorldState& state, const CubeSpec& cube) {
    const std::int64_t reach = kStepLenUm + cube.edge_um / 2 + kBodyRadiusUm;
    return sq_dist_um2(state.ego.x_um, state.ego.y_um, cube.cx_um, cube.cy_um) <= reach * reach;
}

}  // namespace mirroreval
