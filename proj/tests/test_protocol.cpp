#include <doctest.h>

#include "mirroreval/protocol.hpp"
#include "mirroreval/rng.hpp"

using namespace mirroreval;

namespace {

// Frozen golden copies of the wire templates. Deliberately duplicated here:
// any drift in the production constants must fail loudly.
const char* const kGoldenCubeSystem =
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

const char* const kGoldenCubeUser =
    "Task: Identify your own body color using mirror evidence,\n"
    "then select the physical\n"
    "cube that matches that color.\n"
    "<history_text>\n"
    "<position_text>\n"
    "<warning_if_bumped_wall>\n"
    "Use the current RGB image to decide the next action.\n"
    "Return one JSON object matching the required schema. If action is 'done',\n"
    "justify the selected cube with evidence.";

const char* const kGoldenExplorationSystem =
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

const char* const kGoldenExplorationUser =
    "Task: Explore the room and observe distractor robots.\n"
    "<history_text>\n"
    "<position_text>\n"
    "Use the current RGB image to decide the next action.\n"
    "Return one JSON object matching the required schema.";

StepInput basic_input() {
    StepInput in;
    in.t = 1;
    in.remaining_steps = 99;
    in.history_text = "No previous steps.";
    in.position_text = "Position: x=5.00, y=5.00, heading=0 degrees. Remaining steps: 99.";
    return in;
}

std::string valid_cube_json(const std::string& action, const std::string& selected,
                            const std::string& identification) {
    return std::string("{\"view-description\": \"v\", \"reasoning\": \"r\", \"action\": \"") + action +
           "\", \"summary\": \"s\", \"selected_cube\": \"" + selected + "\", \"identification\": \"" +
           identification + "\"}";
}

}  // namespace

TEST_CASE("prompt templates byte-match the golden text") {
    CHECK(cube_system_prompt() == kGoldenCubeSystem);
    CHECK(cube_user_template() == kGoldenCubeUser);
    CHECK(exploration_system_prompt() == kGoldenExplorationSystem);
    CHECK(exploration_user_template() == kGoldenExplorationUser);
}

TEST_CASE("build_prompts interpolates only the declared slots") {
    const ScenarioConfig e1 = generate_scenario(ConditionId::E1, 1);
    StepInput in = basic_input();
    const PromptPair p = build_prompts(e1, in);
    CHECK(p.system_text == kGoldenCubeSystem);
    CHECK(p.user_text.find("No previous steps.") != std::string::npos);
    CHECK(p.user_text.find("Position: x=5.00") != std::string::npos);
    CHECK(p.user_text.find('<') == std::string::npos);  // every slot resolved
    // No warning: the slot line disappears entirely.
    CHECK(p.user_text.find("Warning") == std::string::npos);
    CHECK(p.user_text.find("\n\n") == std::string::npos);

    in.warning = kBumpWarningText;
    const PromptPair warned = build_prompts(e1, in);
    CHECK(warned.user_text.find(kBumpWarningText) != std::string::npos);
}

TEST_CASE("family routing per condition") {
    for (ConditionId c : {ConditionId::E1, ConditionId::E2, ConditionId::E4}) {
        const ScenarioConfig cfg = generate_scenario(c, 2);
        CHECK(family_for_condition(c) == SchemaFamily::cube_selection);
        CHECK(build_prompts(cfg, basic_input()).system_text == kGoldenCubeSystem);
    }
    const ScenarioConfig e5 = generate_scenario(ConditionId::E5, 2);
    CHECK(family_for_condition(ConditionId::E5) == SchemaFamily::exploration);
    const PromptPair p = build_prompts(e5, basic_input());
    CHECK(p.system_text == kGoldenExplorationSystem);
    CHECK(p.user_text.find("Task: Explore the room and observe distractor robots.") == 0);
}

TEST_CASE("E3 swaps only the first system line for the misleading identity") {
    ScenarioConfig e3 = generate_scenario(ConditionId::E3, 3);
    e3.wrong_color = ColorLabel::blue;
    const PromptPair p = build_prompts(e3, basic_input());
    CHECK(p.system_text.rfind("You are a blue robot.\n", 0) == 0);
    // The remainder matches the base prompt after its first line.
    const std::string base(kGoldenCubeSystem);
    CHECK(p.system_text.substr(p.system_text.find('\n')) == base.substr(base.find('\n')));
}

TEST_CASE("parse accepts schema-conforming cube output") {
    const ParseOutcome r = parse_agent_output(valid_cube_json("w", "none", "unknown"),
                                              SchemaFamily::cube_selection, 1);
    REQUIRE(r.ok());
    CHECK(r.step->action == Action::w);
    CHECK(!r.step->identification.has_value());
    CHECK(!r.step->selected_cube.has_value());
    CHECK(!r.fenced);

    const ParseOutcome done = parse_agent_output(valid_cube_json("done", "red", "red"),
                                                 SchemaFamily::cube_selection, 5);
    REQUIRE(done.ok());
    CHECK(done.step->action == Action::done);
    CHECK(done.step->selected_cube == ColorLabel::red);
}

TEST_CASE("parse error taxonomy and precedence") {
    // not_json
    const ParseOutcome nj = parse_agent_output("I think I should move forward", SchemaFamily::cube_selection, 1);
    REQUIRE(!nj.ok());
    CHECK(nj.error->kind == ProtocolErrorKind::not_json);

    // wrong_keys: exploration schema must not carry selected_cube
    const ParseOutcome wk = parse_agent_output(valid_cube_json("w", "none", "unknown"),
                                               SchemaFamily::exploration, 1);
    REQUIRE(!wk.ok());
    CHECK(wk.error->kind == ProtocolErrorKind::wrong_keys);

    // wrong_keys: missing key
    const ParseOutcome missing = parse_agent_output(
        R"({"view-description":"v","reasoning":"r","action":"w","summary":"s","selected_cube":"none"})",
        SchemaFamily::cube_selection, 1);
    REQUIRE(!missing.ok());
    CHECK(missing.error->kind == ProtocolErrorKind::wrong_keys);

    // bad_action
    const ParseOutcome ba = parse_agent_output(valid_cube_json("jump", "none", "unknown"),
                                               SchemaFamily::cube_selection, 1);
    REQUIRE(!ba.ok());
    CHECK(ba.error->kind == ProtocolErrorKind::bad_action);

    // bad_action wins over bad_color (declared precedence)
    const ParseOutcome both = parse_agent_output(valid_cube_json("jump", "none", "navy"),
                                                 SchemaFamily::cube_selection, 1);
    REQUIRE(!both.ok());
    CHECK(both.error->kind == ProtocolErrorKind::bad_action);

    // bad_color: fuzzy color names are not accepted
    const ParseOutcome bc = parse_agent_output(valid_cube_json("w", "none", "navy"),
                                               SchemaFamily::cube_selection, 1);
    REQUIRE(!bc.ok());
    CHECK(bc.error->kind == ProtocolErrorKind::bad_color);

    // premature_selection: selection outside done
    const ParseOutcome ps = parse_agent_output(valid_cube_json("w", "red", "unknown"),
                                               SchemaFamily::cube_selection, 1);
    REQUIRE(!ps.ok());
    CHECK(ps.error->kind == ProtocolErrorKind::premature_selection);
}

TEST_CASE("fence stripping recovers the payload and flags it") {
    const std::string fenced = "```json\n" + valid_cube_json("a", "none", "unknown") + "\n```";
    const ParseOutcome r = parse_agent_output(fenced, SchemaFamily::cube_selection, 1);
    REQUIRE(r.ok());
    CHECK(r.fenced);
    CHECK(r.step->action == Action::a);
}

TEST_CASE("identification normalization: case folding; unknown variants stay committed claims") {
    const ParseOutcome upper = parse_agent_output(valid_cube_json("w", "none", "RED"),
                                                  SchemaFamily::cube_selection, 1);
    REQUIRE(upper.ok());
    CHECK(upper.step->identification == ColorLabel::red);

    // Only the exact token (or empty/null) maps to unknown.
    const ParseOutcome not_sure = parse_agent_output(valid_cube_json("w", "none", "not sure"),
                                                     SchemaFamily::cube_selection, 1);
    REQUIRE(!not_sure.ok());
    CHECK(not_sure.error->kind == ProtocolErrorKind::bad_color);

    const ParseOutcome empty = parse_agent_output(valid_cube_json("w", "none", ""),
                                                  SchemaFamily::cube_selection, 1);
    REQUIRE(empty.ok());
    CHECK(!empty.step->identification.has_value());

    const ParseOutcome null_id = parse_agent_output(
        R"({"view-description":"v","reasoning":"r","action":"w","summary":"s","selected_cube":"none","identification":null})",
        SchemaFamily::cube_selection, 1);
    REQUIRE(null_id.ok());
    CHECK(!null_id.step->identification.has_value());
}

TEST_CASE("done without a selection parses; the harness scores it as a miss") {
    const ParseOutcome r = parse_agent_output(valid_cube_json("done", "none", "red"),
                                              SchemaFamily::cube_selection, 9);
    REQUIRE(r.ok());
    CHECK(r.step->action == Action::done);
    CHECK(!r.step->selected_cube.has_value());
}

TEST_CASE("round-trip: serialize then parse yields the identical step") {
    Rng rng(64);
    for (int i = 0; i < 500; ++i) {
        const SchemaFamily family = rng.next_double() < 0.5 ? SchemaFamily::cube_selection
                                                            : SchemaFamily::exploration;
        AgentStep step;
        const double a = rng.next_double();
        step.action = a < 0.2 ? Action::w : a < 0.4 ? Action::a : a < 0.6 ? Action::s : a < 0.8 ? Action::d
                                                                                                : Action::done;
        if (rng.next_double() < 0.5) step.identification = palette()[rng.uniform(kPaletteSize)];
        if (family == SchemaFamily::cube_selection && step.action == Action::done && rng.next_double() < 0.7) {
            step.selected_cube = palette()[rng.uniform(kPaletteSize)];
        }
        step.view_description = "v";
        step.reasoning = "r";
        step.summary = "summary " + std::to_string(i);

        const ParseOutcome r = parse_agent_output(agent_step_to_json(step, family), family, 1);
        REQUIRE(r.ok());
        REQUIRE(*r.step == step);
    }
}

TEST_CASE("actions outside the five-symbol alphabet are never accepted") {
    Rng rng(1234);
    const char* bad[] = {"W ", "forward", "move_forward", "turn_left", "Done!", "ww", "", "q", "DONE"};
    for (const char* b : bad) {
        // "done" would be valid; everything in this list must not be.
        const ParseOutcome r =
            parse_agent_output(valid_cube_json(b, "none", "unknown"), SchemaFamily::cube_selection, 1);
        if (r.ok()) {
            // Trimmed "W " lowercases? No: actions are matched exactly after trim.
            FAIL("accepted invalid action: ", b);
        }
    }
    (void)rng;
}

TEST_CASE("history formatting: sentinel, verbatim fields, truncation") {
    CHECK(format_history(std::nullopt) == "No previous steps.");

    HistoryEntry prev{"a", "turning to scan"};
    const std::string h = format_history(prev);
    CHECK(h.find("action=a") != std::string::npos);
    CHECK(h.find("summary=turning to scan") != std::string::npos);

    HistoryEntry long_prev{"w", std::string(2000, 'x')};
    const std::string t = format_history(long_prev);
    const std::string summary_part = t.substr(t.find("summary=") + 8);
    CHECK(summary_part.size() == kSummaryMaxChars);
}

TEST_CASE("position text carries the remaining step budget") {
    const Pose p{3'500'000, 4'000'000, 120};
    const std::string s = format_position(p, 87);
    CHECK(s == "Position: x=3.50, y=4.00, heading=120 degrees. Remaining steps: 87.");
}
