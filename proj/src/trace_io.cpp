#include "mirroreval/trace_io.hpp"

#include <stdexcept>

namespace mirroreval {

namespace {

using nlohmann::json;

json color_or_null(const std::optional<ColorLabel>& c) {
    return c ? json(std::string(color_name(*c))) : json(nullptr);
}

std::optional<ColorLabel> color_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    const std::optional<ColorLabel> c = color_from_name(j.get<std::string>());
    if (!c) throw std::runtime_error("unknown color label: " + j.dump());
    return c;
}

ColorLabel required_color(const json& j) {
    const std::optional<ColorLabel> c = color_from(j);
    if (!c) throw std::runtime_error("color label must not be null here");
    return *c;
}

ConditionId condition_from(const json& j) {
    const std::optional<ConditionId> c = condition_from_name(j.get<std::string>());
    if (!c) throw std::runtime_error("unknown condition id: " + j.dump());
    return *c;
}

}  // namespace

json pose_to_json(const Pose& p) {
    return {{"x", p.x()}, {"y", p.y()}, {"heading", p.heading_deg}};
}

Pose pose_from_json(const json& j) {
    Pose p;
    p.x_um = m_to_um(j.at("x").get<double>());
    p.y_um = m_to_um(j.at("y").get<double>());
    p.heading_deg = j.at("heading").get<int>();
    return p;
}

json scenario_to_json(const ScenarioConfig& s) {
    json j;
    j["condition"] = std::string(condition_name(s.condition));
    j["seed"] = s.seed;
    j["max_steps"] = s.max_steps;
    j["ego_color"] = std::string(color_name(s.ego_color));
    j["ego_start"] = pose_to_json(s.ego_start);
    j["wrong_color"] = color_or_null(s.wrong_color);

    json room;
    room["width"] = s.room.width;
    room["depth"] = s.room.depth;
    room["wall_height"] = s.room.wall_height;
    if (s.room.mirror) {
        const MirrorSpec& m = *s.room.mirror;
        room["mirror"] = {{"wall_id", m.wall_id},
                          {"u_min", um_to_m(m.u_min_um)},
                          {"u_max", um_to_m(m.u_max_um)},
                          {"height", um_to_m(m.height_um)}};
    } else {
        room["mirror"] = nullptr;
    }
    room["occluders"] = json::array();
    for (const OccluderSpec& o : s.room.occluders) {
        room["occluders"].push_back({{"x", um_to_m(o.cx_um)},
                                     {"y", um_to_m(o.cy_um)},
                                     {"half_width", um_to_m(o.half_width_um)},
                                     {"height", um_to_m(o.height_um)}});
    }
    j["room"] = room;

    j["cubes"] = json::array();
    for (const CubeSpec& c : s.cubes) {
        j["cubes"].push_back({{"color", std::string(color_name(c.color))},
                              {"x", um_to_m(c.cx_um)},
                              {"y", um_to_m(c.cy_um)},
                              {"edge", um_to_m(c.edge_um)},
                              {"role", c.role == CubeRole::candidate ? "candidate" : "clutter"}});
    }
    j["distractors"] = json::array();
    for (const DistractorSpec& d : s.distractors) {
        j["distractors"].push_back({{"color", std::string(color_name(d.color))},
                                    {"pose", pose_to_json(d.initial_pose)},
                                    {"motion_seed", d.motion_seed}});
    }
    return j;
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig s;
    s.condition = condition_from(j.at("condition"));
    s.seed = j.at("seed").get<std::uint64_t>();
    s.max_steps = j.at("max_steps").get<int>();
    s.ego_color = required_color(j.at("ego_color"));
    s.ego_start = pose_from_json(j.at("ego_start"));
    s.wrong_color = color_from(j.at("wrong_color"));

    const json& room = j.at("room");
    s.room.width = room.at("width").get<double>();
    s.room.depth = room.at("depth").get<double>();
    s.room.wall_height = room.at("wall_height").get<double>();
    if (!room.at("mirror").is_null()) {
        const json& m = room.at("mirror");
        MirrorSpec spec;
        spec.wall_id = m.at("wall_id").get<int>();
        spec.u_min_um = m_to_um(m.at("u_min").get<double>());
        spec.u_max_um = m_to_um(m.at("u_max").get<double>());
        spec.height_um = m_to_um(m.at("height").get<double>());
        s.room.mirror = spec;
    }
    for (const json& o : room.at("occluders")) {
        OccluderSpec spec;
        spec.cx_um = m_to_um(o.at("x").get<double>());
        spec.cy_um = m_to_um(o.at("y").get<double>());
        spec.half_width_um = m_to_um(o.at("half_width").get<double>());
        spec.height_um = m_to_um(o.at("height").get<double>());
        s.room.occluders.push_back(spec);
    }
    for (const json& c : j.at("cubes")) {
        CubeSpec spec;
        spec.color = required_color(c.at("color"));
        spec.cx_um = m_to_um(c.at("x").get<double>());
        spec.cy_um = m_to_um(c.at("y").get<double>());
        spec.edge_um = m_to_um(c.at("edge").get<double>());
        spec.role = c.at("role").get<std::string>() == "candidate" ? CubeRole::candidate : CubeRole::clutter;
        s.cubes.push_back(spec);
    }
    for (const json& d : j.at("distractors")) {
        DistractorSpec spec;
        spec.color = required_color(d.at("color"));
        spec.initial_pose = pose_from_json(d.at("pose"));
        spec.motion_seed = d.at("motion_seed").get<std::uint64_t>();
        s.distractors.push_back(spec);
    }
    return s;
}

json record_to_json(const EpisodeRecord& r) {
    json j;
    j["type"] = "episode";
    j["condition"] = std::string(condition_name(r.trace.condition));
    j["scenario_seed"] = r.trace.scenario_seed;
    j["seed_index"] = r.seed_index;
    j["run_index"] = r.run_index;
    j["backend"] = r.trace.backend_id;
    j["backend_config"] = r.backend_config;
    j["scenario"] = scenario_to_json(r.scenario);
    j["c_star"] = std::string(color_name(r.trace.c_star));
    j["T"] = r.trace.T;
    j["tau"] = r.trace.tau;
    j["terminated"] = r.trace.terminated;
    j["final_decision"] = color_or_null(r.trace.final_decision);
    j["proximity_violation"] = r.trace.proximity_violation;
    j["retry_policy"] = r.retry_policy;
    j["prompts_hash"] = r.prompts_hash;
    j["frame_digests"] = r.frame_digests;

    json steps = json::array();
    for (const StepRecord& s : r.trace.steps) {
        json js;
        js["t"] = s.t;
        js["action"] = s.action ? json(std::string(action_name(*s.action))) : json(nullptr);
        js["m"] = s.m;
        js["mirror_in_view"] = s.mirror_in_view;
        js["identification"] = color_or_null(s.identification);
        js["selected_cube"] = color_or_null(s.selected_cube);
        js["pose"] = pose_to_json(s.pose);
        js["bumped"] = s.bumped;
        js["flags"] = s.flags;
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    return j;
}

EpisodeRecord record_from_json(const json& j) {
    EpisodeRecord r;
    r.scenario = scenario_from_json(j.at("scenario"));
    r.seed_index = j.at("seed_index").get<int>();
    r.run_index = j.at("run_index").get<int>();
    r.backend_config = j.at("backend_config");
    r.retry_policy = j.at("retry_policy").get<std::string>();
    r.prompts_hash = j.at("prompts_hash").get<std::string>();
    r.frame_digests = j.at("frame_digests").get<std::vector<std::string>>();

    EpisodeTrace& t = r.trace;
    t.condition = condition_from(j.at("condition"));
    t.scenario_seed = j.at("scenario_seed").get<std::uint64_t>();
    t.backend_id = j.at("backend").get<std::string>();
    t.c_star = required_color(j.at("c_star"));
    t.T = j.at("T").get<int>();
    t.tau = j.at("tau").get<int>();
    t.terminated = j.at("terminated").get<bool>();
    t.final_decision = color_from(j.at("final_decision"));
    t.proximity_violation = j.at("proximity_violation").get<bool>();
    for (const json& js : j.at("steps")) {
        StepRecord s;
        s.t = js.at("t").get<int>();
        if (!js.at("action").is_null()) {
            const std::optional<Action> a = action_from_name(js.at("action").get<std::string>());
            if (!a) throw std::runtime_error("unknown action in trace: " + js.at("action").dump());
            s.action = a;
        }
        s.m = js.at("m").get<bool>();
        s.mirror_in_view = js.at("mirror_in_view").get<bool>();
        s.identification = color_from(js.at("identification"));
        s.selected_cube = color_from(js.at("selected_cube"));
        s.pose = pose_from_json(js.at("pose"));
        s.bumped = js.at("bumped").get<bool>();
        s.flags = js.at("flags").get<std::vector<std::string>>();
        t.steps.push_back(std::move(s));
    }
    return r;
}

json summary_to_json(const MetricSummary& s) {
    json j;
    j["mean"] = s.mean ? json(*s.mean) : json(nullptr);
    j["sem"] = s.sem ? json(*s.sem) : json(nullptr);
    j["n"] = s.n_defined;
    return j;
}

MetricSummary summary_from_json(const json& j) {
    MetricSummary s;
    if (!j.at("mean").is_null()) s.mean = j.at("mean").get<double>();
    if (!j.at("sem").is_null()) s.sem = j.at("sem").get<double>();
    s.n_defined = j.at("n").get<int>();
    return s;
}

json aggregate_to_json(const AggregateMetrics& a) {
    json j;
    j["n_episodes"] = a.n_episodes;
    j["tsa"] = summary_to_json(a.tsa);
    j["ttd"] = summary_to_json(a.ttd);
    j["mcr"] = summary_to_json(a.mcr);
    j["mtato"] = summary_to_json(a.mtato);
    j["caal"] = summary_to_json(a.caal);
    j["cr"] = summary_to_json(a.cr);
    j["mgd"] = summary_to_json(a.mgd);
    j["sc"] = summary_to_json(a.sc);
    j["ar_sc"] = summary_to_json(a.ar_sc);
    j["completed"] = summary_to_json(a.completed);
    j["tsa_c"] = summary_to_json(a.tsa_c);
    j["completion_gap"] = a.completion_gap ? json(*a.completion_gap) : json(nullptr);
    return j;
}

AggregateMetrics aggregate_from_json(const json& j) {
    AggregateMetrics a;
    a.n_episodes = j.at("n_episodes").get<int>();
    a.tsa = summary_from_json(j.at("tsa"));
    a.ttd = summary_from_json(j.at("ttd"));
    a.mcr = summary_from_json(j.at("mcr"));
    a.mtato = summary_from_json(j.at("mtato"));
    a.caal = summary_from_json(j.at("caal"));
    a.cr = summary_from_json(j.at("cr"));
    a.mgd = summary_from_json(j.at("mgd"));
    a.sc = summary_from_json(j.at("sc"));
    a.ar_sc = summary_from_json(j.at("ar_sc"));
    a.completed = summary_from_json(j.at("completed"));
    a.tsa_c = summary_from_json(j.at("tsa_c"));
    if (!j.at("completion_gap").is_null()) a.completion_gap = j.at("completion_gap").get<double>();
    return a;
}

}  // namespace mirroreval
