#include "mirroreval/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mirroreval {

namespace {

constexpr double kEps = 1e-7;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAttenuationRate = 0.15;

// Capsule body: vertical axis, hemispherical caps.
constexpr double kCapsuleRadius = 0.3;
constexpr double kAxisLoZ = kBodyRadiusUm * 1e-6;            // 0.3
constexpr double kAxisHiZ = kBodyHeightM - kCapsuleRadius;   // 1.4

struct ColorF {
    double r = 0, g = 0, b = 0;
};

ColorF to_f(Rgb c) { return {c.r / 255.0, c.g / 255.0, c.b / 255.0}; }

struct CapsulePrim {
    double cx, cy;
    ColorF color;
    ColorF band_color;
    std::int16_t index;  // distractor index, or -1 for the ego body
};

struct CubePrim {
    double min_x, min_y, max_x, max_y, max_z;
    ColorF color;
    std::int16_t index;
};

struct OccluderPrim {
    Vec3 center;     // at z = 0
    Vec3 tangent;    // horizontal, unit
    Vec3 normal;     // horizontal, unit
    double half_width;
    double height;
};

struct Scene {
    double room_w, room_d, room_h;
    bool has_mirror = false;
    int mirror_wall = 0;
    double mirror_u_min = 0, mirror_u_max = 0, mirror_height = 0;
    std::vector<CubePrim> cubes;
    std::vector<OccluderPrim> occluders;
    std::vector<CapsulePrim> distractors;
    CapsulePrim ego;
};

struct Hit {
    double t = kInf;
    SurfaceKind kind = SurfaceKind::none;
    bool mirror = false;  // set when the nearest hit lands on the mirror rectangle
    ColorF color;
    std::int16_t index = -1;
};

Scene build_scene(const WorldState& state, const ScenarioConfig& scenario) {
    Scene sc;
    sc.room_w = scenario.room.width;
    sc.room_d = scenario.room.depth;
    sc.room_h = scenario.room.wall_height;
    if (scenario.room.mirror) {
        const MirrorSpec& m = *scenario.room.mirror;
        sc.has_mirror = true;
        sc.mirror_wall = m.wall_id;
        sc.mirror_u_min = um_to_m(m.u_min_um);
        sc.mirror_u_max = um_to_m(m.u_max_um);
        sc.mirror_height = um_to_m(m.height_um);
    }
    for (std::size_t i = 0; i < scenario.cubes.size(); ++i) {
        const CubeSpec& c = scenario.cubes[i];
        const double e = um_to_m(c.edge_um);
        CubePrim p;
        p.min_x = um_to_m(c.cx_um) - e / 2;
        p.max_x = um_to_m(c.cx_um) + e / 2;
        p.min_y = um_to_m(c.cy_um) - e / 2;
        p.max_y = um_to_m(c.cy_um) + e / 2;
        p.max_z = e;
        p.color = to_f(color_rgb(c.color));
        p.index = static_cast<std::int16_t>(i);
        sc.cubes.push_back(p);
    }
    for (const OccluderSpec& o : scenario.room.occluders) {
        OccluderPrim p;
        p.center = {um_to_m(o.cx_um), um_to_m(o.cy_um), 0.0};
        p.tangent = wall_tangent(scenario.room.mirror ? scenario.room.mirror->wall_id : 0);
        p.normal = {-p.tangent.y, p.tangent.x, 0.0};
        p.half_width = um_to_m(o.half_width_um);
        p.height = um_to_m(o.height_um);
        sc.occluders.push_back(p);
    }
    for (std::size_t i = 0; i < state.distractors.size(); ++i) {
        const Pose& p = state.distractors[i];
        const Rgb rgb = color_rgb(scenario.distractors[i].color);
        CapsulePrim cp;
        cp.cx = p.x();
        cp.cy = p.y();
        cp.color = to_f(rgb);
        cp.band_color = {cp.color.r * 0.5, cp.color.g * 0.5, cp.color.b * 0.5};
        cp.index = static_cast<std::int16_t>(i);
        sc.distractors.push_back(cp);
    }
    const Rgb ego_rgb = color_rgb(scenario.ego_color);
    sc.ego.cx = state.ego.x();
    sc.ego.cy = state.ego.y();
    sc.ego.color = to_f(ego_rgb);
    sc.ego.band_color = {sc.ego.color.r * 0.5, sc.ego.color.g * 0.5, sc.ego.color.b * 0.5};
    sc.ego.index = -1;
    return sc;
}

// Nearest room-shell hit for a ray starting inside the box. Returns the wall
// id for side walls, or -1 floor, -2 ceiling.
void intersect_room(const Scene& sc, const Vec3& o, const Vec3& d, double& t_out, int& face_out) {
    double best = kInf;
    int face = -3;
    if (d.y < 0) {
        const double t = (0.0 - o.y) / d.y;
        if (t > kEps && t < best) { best = t; face = 0; }
    }
    if (d.x > 0) {
        const double t = (sc.room_w - o.x) / d.x;
        if (t > kEps && t < best) { best = t; face = 1; }
    }
    if (d.y > 0) {
        const double t = (sc.room_d - o.y) / d.y;
        if (t > kEps && t < best) { best = t; face = 2; }
    }
    if (d.x < 0) {
        const double t = (0.0 - o.x) / d.x;
        if (t > kEps && t < best) { best = t; face = 3; }
    }
    if (d.z < 0) {
        const double t = (0.0 - o.z) / d.z;
        if (t > kEps && t < best) { best = t; face = -1; }
    }
    if (d.z > 0) {
        const double t = (sc.room_h - o.z) / d.z;
        if (t > kEps && t < best) { best = t; face = -2; }
    }
    t_out = best;
    face_out = face;
}

double wall_u_at(int wall_id, const Vec3& p) {
    return (wall_id == 0 || wall_id == 2) ? p.x : p.y;
}

bool intersect_cube(const CubePrim& c, const Vec3& o, const Vec3& d, double t_max, double& t_out) {
    double t0 = kEps, t1 = t_max;
    const double inv_x = 1.0 / d.x;
    double tx0 = (c.min_x - o.x) * inv_x, tx1 = (c.max_x - o.x) * inv_x;
    if (inv_x < 0) std::swap(tx0, tx1);
    t0 = std::max(t0, tx0);
    t1 = std::min(t1, tx1);
    if (t0 > t1) return false;
    const double inv_y = 1.0 / d.y;
    double ty0 = (c.min_y - o.y) * inv_y, ty1 = (c.max_y - o.y) * inv_y;
    if (inv_y < 0) std::swap(ty0, ty1);
    t0 = std::max(t0, ty0);
    t1 = std::min(t1, ty1);
    if (t0 > t1) return false;
    const double inv_z = 1.0 / d.z;
    double tz0 = (0.0 - o.z) * inv_z, tz1 = (c.max_z - o.z) * inv_z;
    if (inv_z < 0) std::swap(tz0, tz1);
    t0 = std::max(t0, tz0);
    t1 = std::min(t1, tz1);
    if (t0 > t1) return false;
    if (t0 <= kEps) return false;  // origin inside or behind; treat as miss
    t_out = t0;
    return true;
}

bool intersect_occluder(const OccluderPrim& p, const Vec3& o, const Vec3& d, double t_max, double& t_out) {
    const double denom = dot(d, p.normal);
    if (std::abs(denom) < 1e-12) return false;
    const double t = dot(p.center - o, p.normal) / denom;
    if (t <= kEps || t >= t_max) return false;
    const Vec3 hit = o + d * t;
    if (hit.z < 0.0 || hit.z > p.height) return false;
    const double u = dot(hit - p.center, p.tangent);
    if (std::abs(u) > p.half_width) return false;
    t_out = t;
    return true;
}

// Vertical capsule: cylinder trunk plus two cap spheres.
bool intersect_capsule(const CapsulePrim& cp, const Vec3& o, const Vec3& d, double t_max, double& t_out,
                       double& hit_z) {
    double best = t_max;
    bool found = false;
    const double ox = o.x - cp.cx;
    const double oy = o.y - cp.cy;
    const double a = d.x * d.x + d.y * d.y;
    const double r2 = kCapsuleRadius * kCapsuleRadius;
    if (a > 1e-16) {
        const double b = 2.0 * (ox * d.x + oy * d.y);
        const double c = ox * ox + oy * oy - r2;
        const double disc = b * b - 4 * a * c;
        if (disc >= 0) {
            const double sq = std::sqrt(disc);
            for (const double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
                if (t <= kEps || t >= best) continue;
                const double z = o.z + t * d.z;
                if (z >= kAxisLoZ && z <= kAxisHiZ) {
                    best = t;
                    hit_z = z;
                    found = true;
                    break;  // roots are ordered; the first valid one is nearest
                }
            }
        }
    }
    for (const double cz : {kAxisLoZ, kAxisHiZ}) {
        const double oz = o.z - cz;
        const double sa = dot(d, d);
        const double sb = 2.0 * (ox * d.x + oy * d.y + oz * d.z);
        const double scc = ox * ox + oy * oy + oz * oz - r2;
        const double disc = sb * sb - 4 * sa * scc;
        if (disc < 0) continue;
        const double sq = std::sqrt(disc);
        for (const double t : {(-sb - sq) / (2 * sa), (-sb + sq) / (2 * sa)}) {
            if (t <= kEps || t >= best) continue;
            const double z = o.z + t * d.z;
            if ((cz == kAxisLoZ && z < kAxisLoZ) || (cz == kAxisHiZ && z > kAxisHiZ)) {
                best = t;
                hit_z = z;
                found = true;
                break;
            }
        }
    }
    if (found) t_out = best;
    return found;
}

ColorF capsule_color(const CapsulePrim& cp, double hit_z) {
    return (hit_z >= kHeadBandLoM && hit_z <= kHeadBandHiM) ? cp.band_color : cp.color;
}

// Single nearest hit. `allow_mirror` lets the mirror rectangle act as a
// portal; bounce rays pass false so reflections of the mirror render as wall.
Hit trace(const Scene& sc, const Vec3& o, const Vec3& d, bool include_ego, bool allow_mirror) {
    Hit h;
    int face;
    intersect_room(sc, o, d, h.t, face);
    if (face == -1) {
        h.kind = SurfaceKind::floor;
        h.color = to_f(kFloorGrey);
    } else if (face == -2) {
        h.kind = SurfaceKind::ceiling;
        h.color = to_f(kWallGrey);
    } else {
        h.kind = SurfaceKind::wall;
        h.color = to_f(kWallGrey);
        if (allow_mirror && sc.has_mirror && face == sc.mirror_wall) {
            const Vec3 hp = o + d * h.t;
            const double u = wall_u_at(face, hp);
            if (u >= sc.mirror_u_min && u <= sc.mirror_u_max && hp.z >= 0.0 && hp.z <= sc.mirror_height) {
                h.mirror = true;
            }
        }
    }
    for (const CubePrim& c : sc.cubes) {
        double t;
        if (intersect_cube(c, o, d, h.t, t)) {
            h = Hit{t, SurfaceKind::cube, false, c.color, c.index};
        }
    }
    for (const OccluderPrim& p : sc.occluders) {
        double t;
        if (intersect_occluder(p, o, d, h.t, t)) {
            h = Hit{t, SurfaceKind::occluder, false, to_f(kOccluderGrey), -1};
        }
    }
    for (const CapsulePrim& cp : sc.distractors) {
        double t, z;
        if (intersect_capsule(cp, o, d, h.t, t, z)) {
            h = Hit{t, SurfaceKind::distractor, false, capsule_color(cp, z), cp.index};
        }
    }
    if (include_ego) {
        double t, z;
        if (intersect_capsule(sc.ego, o, d, h.t, t, z)) {
            h = Hit{t, SurfaceKind::ego, false, capsule_color(sc.ego, z), -1};
        }
    }
    return h;
}

struct CameraFrame {
    Vec3 eye, fwd, right, up;
    double tan_h, tan_v;
};

CameraFrame camera_frame(const WorldState& state, const CameraSpec& cam) {
    CameraFrame cf;
    cf.eye = {state.ego.x(), state.ego.y(), cam.eye_height};
    cf.fwd = heading_dir(state.ego.heading_deg);
    cf.up = {0, 0, 1};
    cf.right = cross(cf.fwd, cf.up);
    cf.tan_v = std::tan(0.5 * cam.vertical_fov_deg * kDegToRad);
    cf.tan_h = cf.tan_v * static_cast<double>(cam.width) / static_cast<double>(cam.height);
    return cf;
}

std::uint8_t quantize(double c) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

void shade_pixel(const Scene& sc, const CameraFrame& cf, int px, int py, int width, int height,
                 std::uint8_t* out, PixelTag* tag) {
    const double sx = 2.0 * (px + 0.5) / width - 1.0;
    const double sy = 1.0 - 2.0 * (py + 0.5) / height;
    const Vec3 dir = normalized(cf.fwd + cf.right * (sx * cf.tan_h) + cf.up * (sy * cf.tan_v));

    Hit h = trace(sc, cf.eye, dir, /*include_ego=*/false, /*allow_mirror=*/true);
    double dist = h.t;
    bool via_mirror = false;
    if (h.mirror) {
        via_mirror = true;
        const Vec3 hp = cf.eye + dir * h.t;
        const Vec3 n = wall_inward_normal(sc.mirror_wall);
        const Vec3 rd = dir - n * (2.0 * dot(dir, n));
        const Hit h2 = trace(sc, hp + rd * kEps, rd, /*include_ego=*/true, /*allow_mirror=*/false);
        dist = h.t + h2.t;
        h = h2;
        if (h.kind == SurfaceKind::none) {
            h.color = to_f(kWallGrey);
            h.kind = SurfaceKind::wall;
        }
    }
    const double att = attenuation(dist);
    out[0] = quantize(h.color.r * att);
    out[1] = quantize(h.color.g * att);
    out[2] = quantize(h.color.b * att);
    if (tag) {
        tag->surface = h.kind;
        tag->via_mirror = via_mirror;
        tag->object_index = h.index;
    }
}

Frame render_impl(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam, bool parallel,
                  std::vector<PixelTag>* tags) {
    const Scene sc = build_scene(state, scenario);
    const CameraFrame cf = camera_frame(state, cam);
    Frame f;
    f.width = cam.width;
    f.height = cam.height;
    f.pixels.resize(static_cast<std::size_t>(cam.width) * cam.height * 3);
    if (tags) tags->resize(static_cast<std::size_t>(cam.width) * cam.height);

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int py = 0; py < cam.height; ++py) {
            for (int px = 0; px < cam.width; ++px) {
                const std::size_t i = static_cast<std::size_t>(py) * cam.width + px;
                shade_pixel(sc, cf, px, py, cam.width, cam.height, &f.pixels[i * 3],
                            tags ? &(*tags)[i] : nullptr);
            }
        }
    } else {
        for (int py = 0; py < cam.height; ++py) {
            for (int px = 0; px < cam.width; ++px) {
                const std::size_t i = static_cast<std::size_t>(py) * cam.width + px;
                shade_pixel(sc, cf, px, py, cam.width, cam.height, &f.pixels[i * 3],
                            tags ? &(*tags)[i] : nullptr);
            }
        }
    }
    return f;
}

// True when the segment from a to b is blocked by scene geometry other than
// walls and the ego body. Walls cannot block interior segments in a convex
// room, and the ego is the thing whose visibility is being measured.
bool segment_blocked(const Scene& sc, const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    const double limit = 1.0 - 1e-6;
    double t;
    double z;
    for (const CubePrim& c : sc.cubes) {
        if (intersect_cube(c, a, d, limit, t)) return true;
    }
    for (const OccluderPrim& p : sc.occluders) {
        if (intersect_occluder(p, a, d, limit, t)) return true;
    }
    for (const CapsulePrim& cp : sc.distractors) {
        if (intersect_capsule(cp, a, d, limit, t, z)) return true;
    }
    return false;
}

bool in_frustum(const CameraFrame& cf, const Vec3& p) {
    const Vec3 v = p - cf.eye;
    const double fz = dot(v, cf.fwd);
    if (fz <= 0) return false;
    if (std::abs(dot(v, cf.right)) > fz * cf.tan_h) return false;
    if (std::abs(dot(v, cf.up)) > fz * cf.tan_v) return false;
    return true;
}

// Capsule horizontal cross-section radius at height z; 0 outside the body.
double capsule_profile(double z) {
    if (z < 0.0 || z > kBodyHeightM) return 0.0;
    if (z < kAxisLoZ) {
        const double dz = kAxisLoZ - z;
        return std::sqrt(std::max(0.0, kCapsuleRadius * kCapsuleRadius - dz * dz));
    }
    if (z > kAxisHiZ) {
        const double dz = z - kAxisHiZ;
        return std::sqrt(std::max(0.0, kCapsuleRadius * kCapsuleRadius - dz * dz));
    }
    return kCapsuleRadius;
}

}  // namespace

double attenuation(double distance) { return 1.0 / (1.0 + kAttenuationRate * distance); }

Frame render_frame(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam) {
    return render_impl(state, scenario, cam, /*parallel=*/true, nullptr);
}

Frame render_frame_serial(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam) {
    return render_impl(state, scenario, cam, /*parallel=*/false, nullptr);
}

Frame render_frame_tagged(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam,
                          std::vector<PixelTag>& tags) {
    return render_impl(state, scenario, cam, /*parallel=*/false, &tags);
}

VisibilityReport ego_reflection_visibility(const WorldState& state, const ScenarioConfig& scenario,
                                           const CameraSpec& cam) {
    VisibilityReport rep;
    if (!scenario.room.mirror) return rep;
    const MirrorSpec& m = *scenario.room.mirror;

    const Scene sc = build_scene(state, scenario);
    const CameraFrame cf = camera_frame(state, cam);
    const Vec3 n = wall_inward_normal(m.wall_id);
    const Vec3 p0 = mirror_plane_point(m);
    const double u_min = um_to_m(m.u_min_um);
    const double u_max = um_to_m(m.u_max_um);
    const double z_max = um_to_m(m.height_um);

    // Virtual (reflected) body axis. Reflection across a vertical plane keeps z.
    const Vec3 real_axis{state.ego.x(), state.ego.y(), 0.0};
    const Vec3 virt_axis = reflect_point(real_axis, m);

    // 8 bearings on the eye-facing half of the capsule x 8 height levels.
    const double beta = std::atan2(cf.eye.y - virt_axis.y, cf.eye.x - virt_axis.x);
    int visible = 0;
    int cast = 0;
    for (int j = 0; j < 8; ++j) {
        const double theta = beta + (j - 3.5) * (157.5 / 8.0) * kDegToRad;
        for (int k = 0; k < 8; ++k) {
            const double z = 0.05 + (k + 0.5) * (1.6 / 8.0);
            const double rho = capsule_profile(z);
            const Vec3 virt_pt{virt_axis.x + rho * std::cos(theta), virt_axis.y + rho * std::sin(theta), z};
            ++cast;

            if (!in_frustum(cf, virt_pt)) continue;

            // The sample sits behind the mirror plane; the sight line must
            // cross the plane inside the mirror rectangle.
            const Vec3 seg = virt_pt - cf.eye;
            const double denom = dot(seg, n);
            if (std::abs(denom) < 1e-15) continue;
            const double s = dot(p0 - cf.eye, n) / denom;
            if (s <= 0.0 || s >= 1.0) continue;
            const Vec3 hit = cf.eye + seg * s;
            const double u = wall_u_at(m.wall_id, hit);
            if (u < u_min || u > u_max || hit.z < 0.0 || hit.z > z_max) continue;

            if (segment_blocked(sc, cf.eye, hit)) continue;
            const Vec3 real_pt = reflect_point(virt_pt, m);
            if (segment_blocked(sc, hit, real_pt)) continue;
            ++visible;
        }
    }
    rep.rays_cast = cast;
    rep.visible_fraction = static_cast<double>(visible) / cast;
    rep.m = rep.visible_fraction >= kVisThreshold;
    return rep;
}

bool mirror_surface_in_view(const WorldState& state, const ScenarioConfig& scenario, const CameraSpec& cam) {
    if (!scenario.room.mirror) return false;
    const MirrorSpec& m = *scenario.room.mirror;
    const Scene sc = build_scene(state, scenario);
    const CameraFrame cf = camera_frame(state, cam);
    const double u_min = um_to_m(m.u_min_um);
    const double u_max = um_to_m(m.u_max_um);
    const double z_max = um_to_m(m.height_um);
    for (int i = 0; i < 6; ++i) {
        const double u = u_min + (i + 0.5) * (u_max - u_min) / 6.0;
        for (int j = 0; j < 4; ++j) {
            const double z = (j + 0.5) * z_max / 4.0;
            const Vec3 p = wall_point(m.wall_id, u, z);
            if (!in_frustum(cf, p)) continue;
            if (!segment_blocked(sc, cf.eye, p)) return true;
        }
    }
    return false;
}

}  // namespace mirroreval
