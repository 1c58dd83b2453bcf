#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mirroreval/render.hpp"
#include "mirroreval/world.hpp"

namespace mirroreval {

// E1-E4 use the cube-selection schema; E5 uses the exploration schema.
enum class SchemaFamily : std::uint8_t { cube_selection, exploration };

SchemaFamily family_for_condition(ConditionId condition);
const std::vector<std::string>& family_keys(SchemaFamily family);

// The textual parts of one step's model input. The frame travels alongside.
struct StepInput {
    const Frame* frame = nullptr;
    int t = 1;
    int remaining_steps = 0;
    std::string instruction;
    std::string history_text;
    std::string position_text;
    std::optional<std::string> warning;  // set when the previous move bumped a wall
};

// One validated model output. identification == nullopt means "unknown";
// selected_cube == nullopt means "none".
struct AgentStep {
    Action action = Action::w;
    std::optional<ColorLabel> identification;
    std::optional<ColorLabel> selected_cube;
    std::string view_description;
    std::string reasoning;
    std::string summary;

    bool operator==(const AgentStep&) const = default;
};

enum class ProtocolErrorKind : std::uint8_t {
    not_json,
    wrong_keys,
    bad_action,
    bad_color,
    premature_selection,
    fenced_output,  // warning only: recoverable after stripping
};

std::string_view protocol_error_name(ProtocolErrorKind k);

struct ProtocolError {
    ProtocolErrorKind kind;
    std::string raw;
    std::string detail;
};

struct ParseOutcome {
    std::optional<AgentStep> step;
    std::optional<ProtocolError> error;
    bool fenced = false;  // a fence pair was stripped before parsing

    bool ok() const { return step.has_value(); }
};

struct PromptPair {
    std::string system_text;
    std::string user_text;
};

// Verbatim prompt templates (exposed for golden-file tests). Interpolation
// touches only the <...> slots; everything else is fixed bytes.
const std::string& cube_system_prompt();
const std::string& exploration_system_prompt();
const std::string& cube_user_template();
const std::string& exploration_user_template();

PromptPair build_prompts(const ScenarioConfig& scenario, const StepInput& input);

ParseOutcome parse_agent_output(const std::string& raw, SchemaFamily family, int t);

// Canonical JSON for an AgentStep in the family's exact key set; feeds the
// scripted backends and the round-trip property tests.
std::string agent_step_to_json(const AgentStep& step, SchemaFamily family);

inline constexpr std::size_t kSummaryMaxChars = 500;

struct HistoryEntry {
    std::string action_text;
    std::string summary;
};

std::string format_history(const std::optional<HistoryEntry>& prev);

std::string format_position(const Pose& pose, int remaining_steps);

extern const char* const kBumpWarningText;

}  // namespace mirroreval
