#pragma once

#include <cstdint>
#include <vector>

#include "mirroreval/world.hpp"

namespace mirroreval {

struct CameraSpec {
    int width = 640;
    int height = 480;
    double vertical_fov_deg = 110.0;  // horizontal FOV follows from aspect
    double eye_height = kEyeHeightM;
};

struct Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB, 3 bytes per pixel

    Rgb at(int px, int py) const {
        const std::size_t i = (static_cast<std::size_t>(py) * width + px) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
};

struct VisibilityReport {
    double visible_fraction = 0.0;
    bool m = false;
    int rays_cast = 0;
};

// Ego reflection counts as mirror evidence once >= 20% of sampled silhouette
// points are visible through the mirror.
inline constexpr double kVisThreshold = 0.2;
inline constexpr int kVisSamples = 64;

enum class SurfaceKind : std::uint8_t {
    none,
    wall,
    floor,
    ceiling,
    cube,
    occluder,
    distractor,
    ego,
};

// Per-pixel provenance, exposed for tests and debugging overlays.
struct PixelTag {
    SurfaceKind surface = SurfaceKind::none;
    bool via_mirror = false;
    std::int16_t object_index = -1;
};

// OpenMP-parallel production kernel. Bit-identical to the serial reference.
Frame render_frame(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam);

// Serial reference implementation, kept for equivalence testing.
Frame render_frame_serial(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam);

// Serial render that also reports what each pixel hit.
Frame render_frame_tagged(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam,
                          std::vector<PixelTag>& tags);

VisibilityReport ego_reflection_visibility(const WorldState& state, const ScenarioConfig& scenario,
                                           const CameraSpec& cam);

// Raw "any part of the mirror surface is in view" bit, logged alongside m so
// alternative mirror-evidence definitions can be recomputed from traces.
bool mirror_surface_in_view(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam);

double attenuation(double distance);

}  // namespace mirroreval
