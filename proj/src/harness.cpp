#include "mirroreval/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mirroreval/png_io.hpp"
#include "mirroreval/protocol.hpp"
#include "mirroreval/remote.hpp"
#include "mirroreval/render.hpp"
#include "mirroreval/rng.hpp"

namespace mirroreval {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json backend_config_snapshot(const BackendSpec& spec) {
    json j;
    j["kind"] = std::string(backend_kind_name(spec.kind));
    if (spec.kind == BackendKind::confabulator) {
        j["confabulator_force_wrong"] = spec.confabulator_force_wrong;
    }
    if (spec.kind == BackendKind::remote) {
        j["base_url"] = spec.remote.base_url;
        j["model_id"] = spec.remote.model_id;
        j["temperature"] = spec.remote.temperature;
        j["max_retries"] = spec.remote.max_retries;
        j["timeout_seconds"] = spec.remote.timeout_seconds;
        j["max_in_flight"] = spec.remote.max_in_flight;
    }
    return j;
}

// Candidate colors are unique in E1-E4, so a selection names at most one cube.
const CubeSpec* candidate_with_color(const ScenarioConfig& scenario, ColorLabel color) {
    for (const CubeSpec& c : scenario.cubes) {
        if (c.role == CubeRole::candidate && c.color == color) return &c;
    }
    return nullptr;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string digest_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t derive_episode_seed(std::uint64_t base_seed, ConditionId condition, int seed_index, int run_index) {
    return stable_hash64({base_seed, static_cast<std::uint64_t>(condition), static_cast<std::uint64_t>(seed_index),
                          static_cast<std::uint64_t>(run_index)});
}

EpisodeRecord run_episode(const ScenarioConfig& scenario, const BackendSpec& backend,
                          std::shared_ptr<RemoteClient> remote, const EpisodeRunOptions& opt) {
    if (backend.kind == BackendKind::remote && !opt.render_frames) {
        throw RemoteConfigError("remote backends require rendered frames");
    }
    const CameraSpec cam;
    const SchemaFamily family = family_for_condition(scenario.condition);
    std::unique_ptr<Backend> agent = make_backend(backend, scenario, remote);

    EpisodeRecord rec;
    rec.scenario = scenario;
    rec.backend_config = backend_config_snapshot(backend);
    EpisodeTrace& trace = rec.trace;
    trace.condition = scenario.condition;
    trace.c_star = scenario.ego_color;
    trace.scenario_seed = scenario.seed;
    trace.backend_id = agent->id();

    WorldState state = initial_state(scenario);
    std::optional<HistoryEntry> history;
    bool prev_bumped = false;
    std::uint64_t prompts_fnv = 0xcbf29ce484222325ull;

    const int max_steps = std::min(opt.max_steps, scenario.max_steps);
    for (int t = 1; t <= max_steps; ++t) {
        const VisibilityReport vis = ego_reflection_visibility(state, scenario, cam);
        const bool raw_mirror_bit = mirror_surface_in_view(state, scenario, cam);

        Frame frame;
        if (opt.render_frames) {
            frame = render_frame(state, scenario, cam);
            rec.frame_digests.push_back(digest_hex(fnv1a64(frame.pixels.data(), frame.pixels.size())));
            if (opt.save_frames && !opt.frame_dir.empty()) {
                char name[32];
                std::snprintf(name, sizeof(name), "step_%03d.png", t);
                write_png((fs::path(opt.frame_dir) / name).string(), frame);
            }
        } else {
            rec.frame_digests.emplace_back();
        }

        StepInput input;
        input.frame = opt.render_frames ? &frame : nullptr;
        input.t = t;
        input.remaining_steps = max_steps - t;
        input.instruction = family == SchemaFamily::cube_selection
                                ? "Identify your own body color using mirror evidence, then select the physical "
                                  "cube that matches that color."
                                : "Explore the room and observe distractor robots.";
        input.history_text = format_history(history);
        input.position_text = format_position(state.ego, input.remaining_steps);
        if (prev_bumped) input.warning = kBumpWarningText;

        const PromptPair prompts = build_prompts(scenario, input);
        prompts_fnv = fnv1a64(prompts.system_text.data(), prompts.system_text.size(), prompts_fnv);
        prompts_fnv = fnv1a64(prompts.user_text.data(), prompts.user_text.size(), prompts_fnv);

        const PrivilegedView priv{scenario, state, vis};
        std::vector<std::string> flags;

        std::string raw = agent->step_raw(priv, input, prompts);
        ParseOutcome outcome = parse_agent_output(raw, family, t);
        if (outcome.fenced) flags.push_back("fenced_output");
        if (!outcome.ok()) {
            // One corrective re-prompt with the error appended, then give up
            // on this step.
            PromptPair retry = prompts;
            retry.user_text += "\nYour previous output was invalid (" +
                               std::string(protocol_error_name(outcome.error->kind)) +
                               ": " + outcome.error->detail + "). Return ONLY one valid JSON object.";
            prompts_fnv = fnv1a64(retry.user_text.data(), retry.user_text.size(), prompts_fnv);
            flags.push_back("reprompted:" + std::string(protocol_error_name(outcome.error->kind)));
            raw = agent->step_raw(priv, input, retry);
            outcome = parse_agent_output(raw, family, t);
            if (outcome.fenced) flags.push_back("fenced_output");
        }

        StepRecord step;
        step.t = t;
        step.m = vis.m;
        step.mirror_in_view = raw_mirror_bit;
        step.pose = state.ego;

        if (!outcome.ok()) {
            // Second failure: a no-op step. The world clock still advances.
            flags.push_back("protocol_error:" + std::string(protocol_error_name(outcome.error->kind)));
            flags.push_back("noop");
            step.flags = std::move(flags);
            trace.steps.push_back(std::move(step));
            state.t += 1;
            state.bumped_last = false;
            state = step_distractors(state, scenario);
            history = HistoryEntry{"none", "previous output was invalid and was discarded"};
            prev_bumped = false;
            continue;
        }

        const AgentStep& astep = *outcome.step;
        step.action = astep.action;
        step.identification = astep.identification;
        step.selected_cube = astep.selected_cube;
        step.flags = std::move(flags);

        if (astep.action == Action::done) {
            trace.steps.push_back(std::move(step));
            trace.terminated = true;
            trace.tau = t;
            trace.T = t;
            trace.final_decision =
                family == SchemaFamily::cube_selection ? astep.selected_cube : astep.identification;
            if (family == SchemaFamily::cube_selection && astep.selected_cube) {
                const CubeSpec* cube = candidate_with_color(scenario, *astep.selected_cube);
                // Logged, not enforced: TSA compares colors only.
                trace.proximity_violation = cube == nullptr || !cube_within_reach(state, *cube);
            }
            break;
        }

        const ApplyResult applied = apply_action(state, astep.action, scenario.room);
        step.bumped = applied.bumped;
        trace.steps.push_back(std::move(step));
        state = step_distractors(applied.state, scenario);
        prev_bumped = applied.bumped;
        history = HistoryEntry{std::string(action_name(astep.action)), astep.summary};
    }

    if (!trace.terminated) {
        trace.T = static_cast<int>(trace.steps.size());
        trace.tau = trace.T;
    }
    rec.prompts_hash = digest_hex(prompts_fnv);
    return rec;
}

namespace {

struct EpisodeSlot {
    bool ok = false;
    bool failed = false;
    std::string error;
    EpisodeRecord record;
    int seed_index = 0;
    int run_index = 0;
};

}  // namespace

std::string trace_file_path(const std::string& output_dir, ConditionId condition) {
    return (fs::path(output_dir) / (std::string(condition_name(condition)) + ".jsonl")).string();
}

std::string aggregate_file_path(const std::string& output_dir, ConditionId condition) {
    return (fs::path(output_dir) / (std::string(condition_name(condition)) + ".aggregate.json")).string();
}

ExperimentResult run_experiment(const RunConfig& cfg) {
    if (cfg.conditions.empty()) throw std::invalid_argument("run_experiment: no conditions selected");
    if (cfg.output_dir.empty()) throw std::invalid_argument("run_experiment: output_dir required");
    fs::create_directories(cfg.output_dir);

    std::shared_ptr<RemoteClient> remote;
    if (cfg.backend.kind == BackendKind::remote) {
        remote = std::make_shared<RemoteClient>(cfg.backend.remote);
    }

    ExperimentResult result;
    for (ConditionId condition : cfg.conditions) {
        const int n = cfg.seeds_per_condition * cfg.runs_per_seed;
        std::vector<EpisodeSlot> slots(static_cast<std::size_t>(n));
        std::atomic<int> next{0};

        auto worker = [&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                EpisodeSlot& slot = slots[static_cast<std::size_t>(i)];
                slot.seed_index = i / cfg.runs_per_seed;
                slot.run_index = i % cfg.runs_per_seed;
                const std::uint64_t seed =
                    derive_episode_seed(cfg.base_seed, condition, slot.seed_index, slot.run_index);
                try {
                    ScenarioConfig scenario = generate_scenario(condition, seed);
                    scenario.max_steps = cfg.max_steps;
                    EpisodeRunOptions opt;
                    opt.render_frames = cfg.render_frames;
                    opt.save_frames = cfg.save_frames;
                    opt.max_steps = cfg.max_steps;
                    if (cfg.save_frames) {
                        char sub[64];
                        std::snprintf(sub, sizeof(sub), "frames/%s/s%02d_r%02d",
                                      std::string(condition_name(condition)).c_str(), slot.seed_index,
                                      slot.run_index);
                        opt.frame_dir = (fs::path(cfg.output_dir) / sub).string();
                        fs::create_directories(opt.frame_dir);
                    }
                    slot.record = run_episode(scenario, cfg.backend, remote, opt);
                    slot.record.seed_index = slot.seed_index;
                    slot.record.run_index = slot.run_index;
                    slot.ok = true;
                } catch (const BackendUnavailable& e) {
                    slot.failed = true;
                    slot.error = e.what();
                }
            }
        };

        const int workers = std::max(1, cfg.parallel);
        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
            for (std::thread& th : pool) th.join();
        }

        // Single writer; records land in index order so output is stable.
        std::ofstream out(trace_file_path(cfg.output_dir, condition), std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + trace_file_path(cfg.output_dir, condition));
        json header;
        header["type"] = "header";
        header["schema_version"] = kTraceSchemaVersion;
        header["created_at"] = utc_timestamp();
        header["condition"] = std::string(condition_name(condition));
        header["backend"] = std::string(backend_kind_name(cfg.backend.kind));
        header["base_seed"] = cfg.base_seed;
        header["seeds_per_condition"] = cfg.seeds_per_condition;
        header["runs_per_seed"] = cfg.runs_per_seed;
        header["max_steps"] = cfg.max_steps;
        out << header.dump() << "\n";

        std::vector<EpisodeMetrics> episodes;
        std::string backend_id;
        for (const EpisodeSlot& slot : slots) {
            if (slot.failed) {
                result.infrastructure_failures += 1;
                result.failure_messages.push_back(std::string(condition_name(condition)) + " s" +
                                                  std::to_string(slot.seed_index) + " r" +
                                                  std::to_string(slot.run_index) + ": " + slot.error);
                continue;
            }
            out << record_to_json(slot.record).dump() << "\n";
            episodes.push_back(episode_metrics(slot.record.trace));
            backend_id = slot.record.trace.backend_id;
        }
        out.close();

        if (!episodes.empty()) {
            const AggregateMetrics agg = aggregate(episodes);
            json aj;
            aj["schema_version"] = kTraceSchemaVersion;
            aj["condition"] = std::string(condition_name(condition));
            aj["backend"] = backend_id;
            aj["metrics"] = aggregate_to_json(agg);
            const BaselineReport baseline = chance_baseline(condition);
            aj["chance_baseline"] = {{"values", baseline.values}, {"single_marker", baseline.single_marker}};
            std::ofstream af(aggregate_file_path(cfg.output_dir, condition), std::ios::trunc);
            af << aj.dump(2) << "\n";
            result.aggregates.emplace(condition, agg);
            result.episodes.emplace(condition, std::move(episodes));
        }
    }

    if (result.infrastructure_failures > 0) {
        json ij;
        ij["infrastructure_failures"] = result.infrastructure_failures;
        ij["messages"] = result.failure_messages;
        std::ofstream f(fs::path(cfg.output_dir) / "infrastructure.json", std::ios::trunc);
        f << ij.dump(2) << "\n";
    }
    return result;
}

AggregateMetrics replay(const std::string& trace_file) {
    std::ifstream in(trace_file);
    if (!in) throw std::invalid_argument("replay: cannot open " + trace_file);

    std::string line;
    bool header_seen = false;
    std::vector<EpisodeMetrics> episodes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (!header_seen) {
            if (j.value("type", "") != "header") {
                throw std::invalid_argument("replay: first line must be the header");
            }
            const int version = j.at("schema_version").get<int>();
            if (version != kTraceSchemaVersion) {
                throw std::runtime_error("replay: trace schema version " + std::to_string(version) +
                                         " does not match supported version " +
                                         std::to_string(kTraceSchemaVersion));
            }
            header_seen = true;
            continue;
        }
        const EpisodeRecord rec = record_from_json(j);
        if (const auto err = validate_trace(rec.trace, rec.scenario.max_steps)) {
            throw std::runtime_error("replay: invalid trace (seed " + std::to_string(rec.trace.scenario_seed) +
                                     "): " + err->message);
        }
        episodes.push_back(episode_metrics(rec.trace));
    }
    if (episodes.empty()) throw std::invalid_argument("replay: no episode records in " + trace_file);
    return aggregate(episodes);
}

}  // namespace mirroreval
