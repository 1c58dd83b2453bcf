#include "mirroreval/agents.hpp"

#include <cmath>

#include "mirroreval/remote.hpp"
#include "mirroreval/rng.hpp"

namespace mirroreval {

namespace {

constexpr double kVantageArriveM = 0.6;
constexpr int kFacingWaitSteps = 4;

struct PointUm {
    std::int64_t x;
    std::int64_t y;
};

std::int64_t clamp_um(std::int64_t v, std::int64_t lo, std::int64_t hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

double sq_dist_m(const Pose& p, PointUm q) {
    const double dx = um_to_m(p.x_um - q.x);
    const double dy = um_to_m(p.y_um - q.y);
    return dx * dx + dy * dy;
}

// Candidate standing spots in front of the mirror; lateral and depth
// fallbacks cover occluded or crowded center lines.
std::vector<PointUm> mirror_vantages(const ScenarioConfig& scenario) {
    std::vector<PointUm> out;
    if (!scenario.room.mirror) {
        out.push_back({m_to_um(scenario.room.width / 2), m_to_um(scenario.room.depth / 2)});
        return out;
    }
    const MirrorSpec& m = *scenario.room.mirror;
    const Vec3 center = mirror_center(m);
    const Vec3 n = wall_inward_normal(m.wall_id);
    const Vec3 tan = wall_tangent(m.wall_id);
    const auto at = [&](double depth, double lateral) {
        const Vec3 p = center + n * depth + tan * lateral;
        PointUm q{m_to_um(p.x), m_to_um(p.y)};
        q.x = clamp_um(q.x, 800'000, m_to_um(scenario.room.width) - 800'000);
        q.y = clamp_um(q.y, 800'000, m_to_um(scenario.room.depth) - 800'000);
        return q;
    };
    out.push_back(at(2.5, 0.0));
    out.push_back(at(2.5, 1.2));
    out.push_back(at(2.5, -1.2));
    out.push_back(at(3.5, 0.0));
    out.push_back(at(1.8, 0.8));
    out.push_back(at(1.8, -0.8));
    return out;
}

PointUm mirror_center_um(const ScenarioConfig& scenario) {
    if (!scenario.room.mirror) {
        // E2 has no mirror; aim at the center of wall 0 so seeking stays defined.
        return {m_to_um(scenario.room.width / 2), 0};
    }
    const Vec3 c = mirror_center(*scenario.room.mirror);
    return {m_to_um(c.x), m_to_um(c.y)};
}

const CubeSpec* find_candidate(const ScenarioConfig& scenario, ColorLabel color) {
    for (const CubeSpec& c : scenario.cubes) {
        if (c.role == CubeRole::candidate && c.color == color) return &c;
    }
    return nullptr;
}

// Shared mirror-seeking movement: walk to a vantage, face the mirror, scan in
// place, rotate through fallback vantages if the reflection stays hidden.
class MirrorSeeker {
public:
    explicit MirrorSeeker(const ScenarioConfig& scenario)
        : vantages_(mirror_vantages(scenario)), mirror_(mirror_center_um(scenario)) {}

    Action next(const WorldState& state) {
        const PointUm v = vantages_[vantage_idx_ % vantages_.size()];
        if (sq_dist_m(state.ego, v) > kVantageArriveM * kVantageArriveM) {
            facing_wait_ = 0;
            return plan_turn_toward(state.ego, v.x, v.y);
        }
        const Action turn = plan_turn_toward(state.ego, mirror_.x, mirror_.y);
        if (turn != Action::w) return turn;
        // Facing the mirror already; scan in place and relocate if nothing shows.
        ++facing_wait_;
        if (facing_wait_ > kFacingWaitSteps) {
            facing_wait_ = 0;
            ++vantage_idx_;
        }
        return (facing_wait_ % 2 == 1) ? Action::a : Action::d;
    }

private:
    std::vector<PointUm> vantages_;
    PointUm mirror_;
    std::size_t vantage_idx_ = 0;
    int facing_wait_ = 0;
};

class ScriptedBackend : public Backend {
public:
    ScriptedBackend(const BackendSpec& spec, const ScenarioConfig& scenario)
        : spec_(spec),
          family_(family_for_condition(scenario.condition)),
          rng_(stable_hash64({scenario.seed, 0x5c71f7edull, static_cast<std::uint64_t>(spec.kind)})) {}

    std::string id() const override { return std::string(backend_kind_name(spec_.kind)); }

    std::string step_raw(const PrivilegedView& priv, const StepInput& input, const PromptPair&) override {
        return agent_step_to_json(next_step(priv, input), family_);
    }

protected:
    virtual AgentStep next_step(const PrivilegedView& priv, const StepInput& input) = 0;

    AgentStep base_step(Action action, std::string summary) const {
        AgentStep s;
        s.action = action;
        s.summary = std::move(summary);
        s.view_description = "scripted";
        s.reasoning = "scripted";
        return s;
    }

    const BackendSpec spec_;
    const SchemaFamily family_;
    Rng rng_;
};

class PerfectOracle : public ScriptedBackend {
public:
    PerfectOracle(const BackendSpec& spec, const ScenarioConfig& scenario)
        : ScriptedBackend(spec, scenario), seeker_(scenario) {}

protected:
    AgentStep next_step(const PrivilegedView& priv, const StepInput&) override {
        const ColorLabel c_star = priv.scenario.ego_color;
        const bool m_now = priv.visibility.m;
        AgentStep step;
        if (!seen_m_) {
            step = base_step(seeker_.next(priv.state), "scanning for the mirror");
        } else if (family_ == SchemaFamily::exploration) {
            step = base_step(Action::done, "reflection identified; finishing");
        } else {
            const CubeSpec* target = find_candidate(priv.scenario, c_star);
            if (target && cube_within_reach(priv.state, *target)) {
                step = base_step(Action::done, "selecting the matching cube");
                step.selected_cube = c_star;
            } else if (target) {
                step = base_step(plan_turn_toward(priv.state.ego, target->cx_um, target->cy_um),
                                 "approaching the matching cube");
            } else {
                step = base_step(Action::a, "no matching cube present");
            }
        }
        step.identification = (seen_m_ || m_now) ? std::optional<ColorLabel>(c_star) : std::nullopt;
        seen_m_ = seen_m_ || m_now;
        return step;
    }

private:
    MirrorSeeker seeker_;
    bool seen_m_ = false;
};

class Confabulator : public ScriptedBackend {
public:
    Confabulator(const BackendSpec& spec, const ScenarioConfig& scenario)
        : ScriptedBackend(spec, scenario), seeker_(scenario) {
        const ColorLabel c_star = scenario.ego_color;
        if (spec.confabulator_force_wrong) {
            std::vector<ColorLabel> others;
            for (ColorLabel c : palette()) {
                if (c != c_star) others.push_back(c);
            }
            claim_ = others[rng_.uniform(others.size())];
        } else {
            claim_ = palette()[rng_.uniform(kPaletteSize)];
        }
    }

protected:
    AgentStep next_step(const PrivilegedView& priv, const StepInput&) override {
        const ColorLabel c_star = priv.scenario.ego_color;
        const bool m_now = priv.visibility.m;
        AgentStep step;
        if (!seen_m_) {
            step = base_step(seeker_.next(priv.state), "scanning for the mirror");
        } else if (family_ == SchemaFamily::exploration) {
            step = base_step(Action::done, "reflection identified; finishing");
        } else {
            const CubeSpec* target = find_candidate(priv.scenario, c_star);
            if (target && cube_within_reach(priv.state, *target)) {
                step = base_step(Action::done, "selecting the matching cube");
                step.selected_cube = c_star;
            } else if (target) {
                step = base_step(plan_turn_toward(priv.state.ego, target->cx_um, target->cy_um),
                                 "approaching the matching cube");
            } else {
                step = base_step(Action::a, "no matching cube present");
            }
        }
        // Commits to a guess from the first step and only revises on evidence.
        step.identification = (seen_m_ || m_now) ? c_star : claim_;
        seen_m_ = seen_m_ || m_now;
        return step;
    }

private:
    MirrorSeeker seeker_;
    ColorLabel claim_ = ColorLabel::red;
    bool seen_m_ = false;
};

class MirrorStarer : public ScriptedBackend {
public:
    MirrorStarer(const BackendSpec& spec, const ScenarioConfig& scenario)
        : ScriptedBackend(spec, scenario), seeker_(scenario) {}

protected:
    AgentStep next_step(const PrivilegedView& priv, const StepInput&) override {
        const bool m_now = priv.visibility.m;
        AgentStep step;
        if (!seen_m_) {
            step = base_step(seeker_.next(priv.state), "looking for a reflection");
        } else {
            // Holds position and keeps the reflection in view without ever
            // committing to a decision.
            oscillate_ = !oscillate_;
            step = base_step(oscillate_ ? Action::a : Action::d, "watching the mirror");
        }
        step.identification = std::nullopt;
        seen_m_ = seen_m_ || m_now;
        return step;
    }

private:
    MirrorSeeker seeker_;
    bool seen_m_ = false;
    bool oscillate_ = false;
};

class BlindGuesser : public ScriptedBackend {
public:
    BlindGuesser(const BackendSpec& spec, const ScenarioConfig& scenario) : ScriptedBackend(spec, scenario) {}

protected:
    AgentStep next_step(const PrivilegedView& priv, const StepInput&) override {
        AgentStep step = base_step(Action::done, "committing immediately");
        if (family_ == SchemaFamily::cube_selection) {
            const auto candidates = priv.scenario.candidate_cubes();
            if (!candidates.empty()) {
                step.selected_cube = candidates[rng_.uniform(candidates.size())]->color;
            }
        }
        step.identification = palette()[rng_.uniform(kPaletteSize)];
        return step;
    }
};

class RandomWalker : public ScriptedBackend {
public:
    RandomWalker(const BackendSpec& spec, const ScenarioConfig& scenario) : ScriptedBackend(spec, scenario) {}

protected:
    AgentStep next_step(const PrivilegedView& priv, const StepInput&) override {
        if (rng_.next_double() < 0.05) {
            AgentStep step = base_step(Action::done, "stopping at random");
            if (family_ == SchemaFamily::cube_selection) {
                const auto candidates = priv.scenario.candidate_cubes();
                if (!candidates.empty()) {
                    step.selected_cube = candidates[rng_.uniform(candidates.size())]->color;
                }
            }
            return step;
        }
        constexpr Action kMoves[4] = {Action::w, Action::a, Action::s, Action::d};
        return base_step(kMoves[rng_.uniform(4)], "wandering");
    }
};

class RemoteBackend : public Backend {
public:
    RemoteBackend(const BackendSpec& spec, std::shared_ptr<RemoteClient> client)
        : spec_(spec), client_(std::move(client)) {}

    std::string id() const override { return "remote:" + spec_.remote.model_id; }

    std::string step_raw(const PrivilegedView&, const StepInput& input, const PromptPair& prompts) override {
        return client_->chat_completion(prompts.system_text, prompts.user_text, input.frame);
    }

private:
    BackendSpec spec_;
    std::shared_ptr<RemoteClient> client_;
};

}  // namespace

std::string_view backend_kind_name(BackendKind k) {
    switch (k) {
        case BackendKind::perfect_oracle: return "perfect_oracle";
        case BackendKind::random_walker: return "random_walker";
        case BackendKind::blind_guesser: return "blind_guesser";
        case BackendKind::confabulator: return "confabulator";
        case BackendKind::mirror_starer: return "mirror_starer";
        case BackendKind::remote: return "remote";
    }
    return "?";
}

std::optional<BackendKind> backend_kind_from_name(std::string_view name) {
    for (BackendKind k : {BackendKind::perfect_oracle, BackendKind::random_walker, BackendKind::blind_guesser,
                          BackendKind::confabulator, BackendKind::mirror_starer, BackendKind::remote}) {
        if (name == backend_kind_name(k)) return k;
    }
    return std::nullopt;
}

Action plan_turn_toward(const Pose& ego, std::int64_t target_x_um, std::int64_t target_y_um) {
    const double dx = um_to_m(target_x_um - ego.x_um);
    const double dy = um_to_m(target_y_um - ego.y_um);
    double bearing = std::atan2(dy, dx) * kRadToDeg - ego.heading_deg;
    while (bearing > 180.0) bearing -= 360.0;
    while (bearing <= -180.0) bearing += 360.0;
    constexpr double kTol = 1e-9;  // the exact +-15 boundary steps forward
    if (bearing > 15.0 + kTol) return Action::a;
    if (bearing < -15.0 - kTol) return Action::d;
    return Action::w;
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const ScenarioConfig& scenario,
                                      std::shared_ptr<RemoteClient> remote_client) {
    switch (spec.kind) {
        case BackendKind::perfect_oracle: return std::make_unique<PerfectOracle>(spec, scenario);
        case BackendKind::random_walker: return std::make_unique<RandomWalker>(spec, scenario);
        case BackendKind::blind_guesser: return std::make_unique<BlindGuesser>(spec, scenario);
        case BackendKind::confabulator: return std::make_unique<Confabulator>(spec, scenario);
        case BackendKind::mirror_starer: return std::make_unique<MirrorStarer>(spec, scenario);
        case BackendKind::remote: return std::make_unique<RemoteBackend>(spec, std::move(remote_client));
    }
    return nullptr;
}

}  // namespace mirroreval
