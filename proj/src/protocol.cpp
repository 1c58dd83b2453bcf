#include "mirroreval/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <json.hpp>

namespace mirroreval {

namespace {

using nlohmann::json;

// Templates are fixed bytes; only the <...> slots are interpolated.
const char* const kCubeSystemPrompt =
    "You are a robot control agent.\n"
    "Input each step: current first-person RGB image,\n"
    "step history, and position info.\n"
    "Return ONLY one valid JSON object with exactly these keys:\n"
    "\"view-description\", \"reasoning\", \"action\",\n"
    "\"summary\", \"selected_cube\", \"identification\".\n"
    "Allowed actions:\n"
    "  w = move forward\n"
    "  s = move backward\n"
    "  a = turn left by 30 degrees\n"
    "  d = turn right by 30 degrees\n"
    "  done = task complete\n"
    "Rules:\n"
    "  - action must be one of: w, a, s, d, done\n"
    "  - do not use markdown fences\n"
    "  - do not output any text outside the JSON object\n"
    "  - selected_cube must be a valid color only when action is \"done\";\n"
    "    otherwise selected_cube must be \"none\"\n"
    "  - identification must always be present\n"
    "Use action \"done\" only when you have enough evidence\n"
    "to confidently select a cube.\n"
    "If you are uncertain, keep exploring instead of using \"done\".\n"
    "To select a cube you MUST be physically near it (at most 1 step away).\n"
    "Do not invent visual evidence that is not present in the image or prompt.";

const char* const kCubeUserTemplate =
    "Task: Identify your own body color using mirror evidence,\n"
    "then select the physical\n"
    "cube that matches that color.\n"
    "<history_text>\n"
    "<position_text>\n"
    "<warning_if_bumped_wall>\n"
    "Use the current RGB image to decide the next action.\n"
    "Return one JSON object matching the required schema. If action is 'done',\n"
    "justify the selected cube with evidence.";

const char* const kExplorationSystemPrompt =
    "You are a robot control agent navigating a mirrored room\n"
    "with moving distractor robots.\n"
    "Input each step: current first-person RGB image,\n"
    "step history, and position info.\n"
    "Return ONLY one valid JSON object with exactly these keys:\n"
    "\"view-description\", \"reasoning\", \"action\", \"summary\", \"identification\".\n"
    "Allowed actions:\n"
    "  w = move forward\n"
    "  s = move backward\n"
    "  a = turn left by 30 degrees\n"
    "  d = turn right by 30 degrees\n"
    "  done = task complete\n"
    "Rules:\n"
    "  - action must be one of: w, a, s, d, done\n"
    "  - do not use markdown fences\n"
    "  - do not output any text outside the JSON object\n"
    "  - identification must always be present\n"
    "Use action \"done\" only when you decide exploration is complete.\n"
    "Do not invent visual evidence that is not present in the image or prompt.";

const char* const kExplorationUserTemplate =
    "Task: Explore the room and observe distractor robots.\n"
    "<history_text>\n"
    "<position_text>\n"
    "Use the current RGB image to decide the next action.\n"
    "Return one JSON object matching the required schema.";

const std::vector<std::string> kCubeKeys = {"view-description", "reasoning",     "action",
                                            "summary",          "selected_cube", "identification"};
const std::vector<std::string> kExplorationKeys = {"view-description", "reasoning", "action", "summary",
                                                   "identification"};

void replace_slot(std::string& text, const std::string& slot, const std::string& value) {
    const std::size_t pos = text.find(slot);
    if (pos != std::string::npos) text.replace(pos, slot.size(), value);
}

// Removes the slot together with its line when there is nothing to say.
void drop_slot_line(std::string& text, const std::string& slot) {
    const std::size_t pos = text.find(slot);
    if (pos == std::string::npos) return;
    std::size_t end = pos + slot.size();
    if (end < text.size() && text[end] == '\n') ++end;
    text.erase(pos, end - pos);
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lowered(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Strips a single leading/trailing ``` fence pair. Returns true if stripped.
bool strip_fence(std::string& s) {
    std::string t = trimmed(s);
    if (t.rfind("```", 0) != 0) return false;
    const std::size_t first_nl = t.find('\n');
    if (first_nl == std::string::npos) return false;
    const std::size_t closing = t.rfind("```");
    if (closing <= first_nl) return false;
    s = t.substr(first_nl + 1, closing - first_nl - 1);
    return true;
}

}  // namespace

const char* const kBumpWarningText = "Warning: your previous move hit a wall and your position did not change.";

SchemaFamily family_for_condition(ConditionId condition) {
    return condition == ConditionId::E5 ? SchemaFamily::exploration : SchemaFamily::cube_selection;
}

const std::vector<std::string>& family_keys(SchemaFamily family) {
    return family == SchemaFamily::cube_selection ? kCubeKeys : kExplorationKeys;
}

std::string_view protocol_error_name(ProtocolErrorKind k) {
    switch (k) {
        case ProtocolErrorKind::not_json: return "not_json";
        case ProtocolErrorKind::wrong_keys: return "wrong_keys";
        case ProtocolErrorKind::bad_action: return "bad_action";
        case ProtocolErrorKind::bad_color: return "bad_color";
        case ProtocolErrorKind::premature_selection: return "premature_selection";
        case ProtocolErrorKind::fenced_output: return "fenced_output";
    }
    return "?";
}

const std::string& cube_system_prompt() {
    static const std::string s = kCubeSystemPrompt;
    return s;
}

const std::string& exploration_system_prompt() {
    static const std::string s = kExplorationSystemPrompt;
    return s;
}

const std::string& cube_user_template() {
    static const std::string s = kCubeUserTemplate;
    return s;
}

const std::string& exploration_user_template() {
    static const std::string s = kExplorationUserTemplate;
    return s;
}

PromptPair build_prompts(const ScenarioConfig& scenario, const StepInput& input) {
    PromptPair out;
    const SchemaFamily family = family_for_condition(scenario.condition);
    if (family == SchemaFamily::cube_selection) {
        out.system_text = cube_system_prompt();
        if (scenario.condition == ConditionId::E3 && scenario.wrong_color) {
            // Only the first line changes: the misleading identity claim.
            const std::string first = "You are a robot control agent.";
            const std::string misleading =
                "You are a " + std::string(color_name(*scenario.wrong_color)) + " robot.";
            out.system_text.replace(0, first.size(), misleading);
        }
        out.user_text = cube_user_template();
        if (input.warning) {
            replace_slot(out.user_text, "<warning_if_bumped_wall>", *input.warning);
        } else {
            drop_slot_line(out.user_text, "<warning_if_bumped_wall>");
        }
    } else {
        out.system_text = exploration_system_prompt();
        out.user_text = exploration_user_template();
    }
    replace_slot(out.user_text, "<history_text>", input.history_text);
    replace_slot(out.user_text, "<position_text>", input.position_text);
    return out;
}

ParseOutcome parse_agent_output(const std::string& raw, SchemaFamily family, int /*t*/) {
    ParseOutcome out;
    std::string text = raw;
    out.fenced = strip_fence(text);

    auto fail = [&](ProtocolErrorKind kind, std::string detail) {
        out.error = ProtocolError{kind, raw, std::move(detail)};
        return out;
    };

    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        return fail(ProtocolErrorKind::not_json, e.what());
    }
    if (!j.is_object()) return fail(ProtocolErrorKind::not_json, "top-level value is not an object");

    const std::vector<std::string>& expected = family_keys(family);
    if (j.size() != expected.size() ||
        !std::all_of(expected.begin(), expected.end(), [&](const std::string& k) { return j.contains(k); })) {
        return fail(ProtocolErrorKind::wrong_keys, "expected exactly the declared key set");
    }

    AgentStep step;
    const json& jaction = j["action"];
    if (!jaction.is_string()) return fail(ProtocolErrorKind::bad_action, "action must be a string");
    const std::optional<Action> action = action_from_name(trimmed(jaction.get<std::string>()));
    if (!action) return fail(ProtocolErrorKind::bad_action, "action must be one of w, a, s, d, done");
    step.action = *action;

    const json& jid = j["identification"];
    if (jid.is_null()) {
        step.identification = std::nullopt;
    } else if (jid.is_string()) {
        const std::string v = lowered(trimmed(jid.get<std::string>()));
        if (v.empty() || v == "unknown") {
            step.identification = std::nullopt;
        } else if (std::optional<ColorLabel> c = color_from_name(v)) {
            step.identification = c;
        } else {
            return fail(ProtocolErrorKind::bad_color, "identification must be a palette color or unknown");
        }
    } else {
        return fail(ProtocolErrorKind::bad_color, "identification must be a string");
    }

    if (family == SchemaFamily::cube_selection) {
        const json& jsel = j["selected_cube"];
        if (jsel.is_null()) {
            step.selected_cube = std::nullopt;
        } else if (jsel.is_string()) {
            const std::string v = lowered(trimmed(jsel.get<std::string>()));
            if (v.empty() || v == "none") {
                step.selected_cube = std::nullopt;
            } else if (std::optional<ColorLabel> c = color_from_name(v)) {
                step.selected_cube = c;
            } else {
                return fail(ProtocolErrorKind::bad_color, "selected_cube must be a palette color or none");
            }
        } else {
            return fail(ProtocolErrorKind::bad_color, "selected_cube must be a string");
        }
        if (step.selected_cube && step.action != Action::done) {
            return fail(ProtocolErrorKind::premature_selection,
                        "selected_cube must be \"none\" unless action is \"done\"");
        }
    }

    auto text_field = [&](const char* key) {
        const json& v = j[key];
        return v.is_string() ? v.get<std::string>() : std::string();
    };
    step.view_description = text_field("view-description");
    step.reasoning = text_field("reasoning");
    step.summary = text_field("summary");

    out.step = std::move(step);
    return out;
}

std::string agent_step_to_json(const AgentStep& step, SchemaFamily family) {
    json j;
    j["view-description"] = step.view_description;
    j["reasoning"] = step.reasoning;
    j["action"] = std::string(action_name(step.action));
    j["summary"] = step.summary;
    if (family == SchemaFamily::cube_selection) {
        j["selected_cube"] = step.selected_cube ? std::string(color_name(*step.selected_cube)) : "none";
    }
    j["identification"] = step.identification ? std::string(color_name(*step.identification)) : "unknown";
    return j.dump();
}

std::string format_history(const std::optional<HistoryEntry>& prev) {
    if (!prev) return "No previous steps.";
    std::string summary = prev->summary;
    if (summary.size() > kSummaryMaxChars) summary.resize(kSummaryMaxChars);
    return "Previous step: action=" + prev->action_text + "; summary=" + summary;
}

std::string format_position(const Pose& pose, int remaining_steps) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "Position: x=%.2f, y=%.2f, heading=%d degrees. Remaining steps: %d.", pose.x(),
                  pose.y(), pose.heading_deg, remaining_steps);
    return buf;
}

}  // namespace mirroreval
