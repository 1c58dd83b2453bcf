#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mirroreval/color.hpp"
#include "mirroreval/geom.hpp"

namespace mirroreval {

enum class ConditionId : std::uint8_t { E1, E2, E3, E4, E5 };

std::string_view condition_name(ConditionId c);
std::optional<ConditionId> condition_from_name(std::string_view name);

enum class Action : std::uint8_t { w, a, s, d, done };

std::string_view action_name(Action a);
std::optional<Action> action_from_name(std::string_view name);

// --- Fixed geometry constants -------------------------------------------

inline constexpr std::int64_t kStepLenUm = 500'000;    // 0.5 m per w/s
inline constexpr std::int64_t kBodyRadiusUm = 300'000; // 0.3 m capsule radius
inline constexpr std::int64_t kCubeEdgeUm = 600'000;   // 0.6 m cube edge
inline constexpr int kTurnDeg = 30;
inline constexpr double kRoomWidthM = 10.0;
inline constexpr double kRoomDepthM = 10.0;
inline constexpr double kWallHeightM = 3.0;
inline constexpr double kEyeHeightM = 1.4;
inline constexpr double kBodyHeightM = 1.7;       // capsule total height
inline constexpr double kHeadBandLoM = 1.25;      // darker band marking the head
inline constexpr double kHeadBandHiM = 1.35;
inline constexpr int kDefaultMaxSteps = 100;

// x/y in micrometers, heading in integer degrees, always a multiple of 30.
struct Pose {
    std::int64_t x_um = 0;
    std::int64_t y_um = 0;
    int heading_deg = 0;

    double x() const { return um_to_m(x_um); }
    double y() const { return um_to_m(y_um); }

    bool operator==(const Pose&) const = default;
};

// Unit direction for a heading, as exact micrometer step components.
// Precomputed so the 12 headings behave identically on every libm.
struct StepVec {
    std::int64_t dx_um;
    std::int64_t dy_um;
};
StepVec step_vector(int heading_deg);

// Facing direction as unit doubles (derived from the integer table).
Vec3 heading_dir(int heading_deg);

struct MirrorSpec {
    int wall_id = 0;              // 0:y=0  1:x=W  2:y=D  3:x=0
    std::int64_t u_min_um = 0;    // horizontal extent along the wall
    std::int64_t u_max_um = 0;
    std::int64_t height_um = 0;   // top edge; bottom sits on the floor
    // Frame/border renders as plain wall material; there is no visual marker.
};

struct OccluderSpec {
    // Opaque vertical panel, parallel to the mirror wall.
    std::int64_t cx_um = 0;
    std::int64_t cy_um = 0;
    std::int64_t half_width_um = 0;
    std::int64_t height_um = 0;
};

struct RoomSpec {
    double width = kRoomWidthM;
    double depth = kRoomDepthM;
    double wall_height = kWallHeightM;
    std::optional<MirrorSpec> mirror;
    std::vector<OccluderSpec> occluders;
};

enum class CubeRole : std::uint8_t { candidate, clutter };

struct CubeSpec {
    ColorLabel color = ColorLabel::red;
    std::int64_t cx_um = 0;
    std::int64_t cy_um = 0;
    std::int64_t edge_um = kCubeEdgeUm;
    CubeRole role = CubeRole::candidate;
};

struct DistractorSpec {
    ColorLabel color = ColorLabel::red;
    Pose initial_pose;
    std::uint64_t motion_seed = 0;
};

struct ScenarioConfig {
    ConditionId condition = ConditionId::E1;
    std::uint64_t seed = 0;
    RoomSpec room;
    ColorLabel ego_color = ColorLabel::red;  // c*, hidden from the first-person view
    Pose ego_start;
    std::vector<CubeSpec> cubes;
    std::vector<DistractorSpec> distractors;
    std::optional<ColorLabel> wrong_color;   // E3 only, never equals ego_color
    int max_steps = kDefaultMaxSteps;

    std::vector<const CubeSpec*> candidate_cubes() const;
};

struct WorldState {
    int t = 0;
    Pose ego;
    std::vector<Pose> distractors;
    bool bumped_last = false;
};

struct ConfigError {
    std::string message;
};

// Wall helpers shared by generation, rendering, and visibility.
Vec3 wall_inward_normal(int wall_id);
Vec3 wall_tangent(int wall_id);                    // direction of increasing u
Vec3 wall_point(int wall_id, double u, double z);  // u along wall, z up
double wall_length(int wall_id);
// Mirror plane point/normal and the mirror image of p across that plane.
Vec3 mirror_plane_point(const MirrorSpec& m);
Vec3 reflect_point(const Vec3& p, const MirrorSpec& m);
Vec3 reflect_dir(const Vec3& d, const MirrorSpec& m);
Vec3 mirror_center(const MirrorSpec& m);

ScenarioConfig generate_scenario(ConditionId condition, std::uint64_t seed);

WorldState initial_state(const ScenarioConfig& scenario);

// Applies one of w/a/s/d. Blocked translations leave the pose unchanged and
// report bumped=true. `done` is the episode engine's business, not the world's.
struct ApplyResult {
    WorldState state;
    bool bumped = false;
};
ApplyResult apply_action(const WorldState& state, Action action, const RoomSpec& room);

// One seeded motion step for every distractor (E4/E5); no-op otherwise.
WorldState step_distractors(const WorldState& state, const ScenarioConfig& scenario);

bool cube_within_reach(const WorldState& state, const CubeSpec& cube);

bool pose_inside_room(const Pose& p, const RoomSpec& room);

}  // namespace mirroreval
