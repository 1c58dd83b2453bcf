#pragma once

#include <memory>
#include <optional>
#include <string>

#include "mirroreval/protocol.hpp"
#include "mirroreval/render.hpp"
#include "mirroreval/world.hpp"

namespace mirroreval {

class RemoteClient;

enum class BackendKind : std::uint8_t {
    perfect_oracle,
    random_walker,
    blind_guesser,
    confabulator,
    mirror_starer,
    remote,
};

std::string_view backend_kind_name(BackendKind k);
std::optional<BackendKind> backend_kind_from_name(std::string_view name);

struct RemoteEndpointConfig {
    std::string base_url;
    std::string model_id;
    double temperature = 0.2;  // recorded in every trace
    int max_retries = 3;
    double timeout_seconds = 60.0;
    int max_in_flight = 4;
    int backoff_ms = 250;  // doubled per retry
    std::string auth_env_var = "MIRROREVAL_API_KEY";
};

struct BackendSpec {
    BackendKind kind = BackendKind::perfect_oracle;
    // When set (the default), the confabulator's initial claim is forced to
    // differ from the true ego color.
    bool confabulator_force_wrong = true;
    RemoteEndpointConfig remote;
};

// Ground truth handed to scripted policies only; real models never see it.
struct PrivilegedView {
    const ScenarioConfig& scenario;
    const WorldState& state;
    const VisibilityReport& visibility;
};

// A backend produces raw wire text per step; parsing and validation stay in
// the protocol module so every backend exercises the same path.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    virtual std::string step_raw(const PrivilegedView& priv, const StepInput& input, const PromptPair& prompts) = 0;
};

// One backend instance per episode; scripted kinds are seeded from the
// scenario seed and are fully deterministic.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const ScenarioConfig& scenario,
                                      std::shared_ptr<RemoteClient> remote_client);

// Greedy waypoint steering: turn while the bearing is outside +-15 degrees,
// otherwise step forward. The +15 boundary maps to w.
Action plan_turn_toward(const Pose& ego, std::int64_t target_x_um, std::int64_t target_y_um);

}  // namespace mirroreval
