#include "mirroreval/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mirroreval {

namespace {

// Compensated (Kahan) accumulation keeps aggregation order-stable.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary out;
    out.n_defined = static_cast<int>(values.size());
    if (values.empty()) return out;
    KahanSum sum;
    for (double v : values) sum.add(v);
    const double mean = sum.value() / values.size();
    out.mean = mean;
    if (values.size() >= 2) {
        KahanSum sq;
        for (double v : values) sq.add((v - mean) * (v - mean));
        const double sd = std::sqrt(sq.value() / (values.size() - 1));
        out.sem = sd / std::sqrt(static_cast<double>(values.size()));
    }
    return out;
}

}  // namespace

std::optional<TraceValidationError> validate_trace(const EpisodeTrace& trace, int max_steps) {
    auto err = [](std::string msg) { return TraceValidationError{std::move(msg)}; };
    if (trace.T < 1 || trace.T > max_steps) return err("T out of range");
    if (static_cast<int>(trace.steps.size()) != trace.T) return err("step count does not match T");
    for (int i = 0; i < trace.T; ++i) {
        if (trace.steps[i].t != i + 1) return err("step timestamps must be 1..T in order");
    }
    int first_done = 0;
    for (const StepRecord& s : trace.steps) {
        if (s.action == Action::done) {
            first_done = s.t;
            break;
        }
    }
    if (trace.terminated) {
        if (first_done == 0 || trace.tau != first_done) return err("tau must be the first done step");
        if (trace.tau != trace.T) return err("episodes stop at done; tau must equal T");
    } else {
        if (first_done != 0) return err("non-terminated trace contains a done action");
        if (trace.tau != trace.T) return err("tau must equal T when no done was produced");
        if (trace.final_decision) return err("final_decision requires termination");
    }
    if (trace.terminated) {
        const StepRecord& last = trace.steps[trace.tau - 1];
        const bool cube_family = trace.condition != ConditionId::E5;
        const std::optional<ColorLabel>& expected = cube_family ? last.selected_cube : last.identification;
        if (trace.final_decision != expected) {
            return err(cube_family ? "final_decision must match the selected cube at tau"
                                   : "final_decision must match the identification at tau");
        }
    }
    return std::nullopt;
}

EpisodeMetrics episode_metrics(const EpisodeTrace& trace) {
    EpisodeMetrics m;
    const int tau = trace.tau;

    m.tsa = (trace.terminated && trace.final_decision && *trace.final_decision == trace.c_star) ? 1 : 0;
    m.ttd = tau;
    m.completed = trace.terminated ? 1 : 0;

    // Existence windows are strict t < tau throughout.
    int t_claim = 0;
    int t_mirror_pre_tau = 0;
    for (const StepRecord& s : trace.steps) {
        if (s.t >= tau) break;
        if (t_mirror_pre_tau == 0 && s.m) t_mirror_pre_tau = s.t;
        if (t_claim == 0 && s.identification) t_claim = s.t;
        if (s.identification && *s.identification == trace.c_star) m.caal = 1;
    }
    m.mcr = t_mirror_pre_tau > 0 ? 1 : 0;
    m.mtato = (m.tsa == 1) ? std::optional<int>(m.mcr) : std::nullopt;
    m.cr = (t_claim > 0 && (t_mirror_pre_tau == 0 || t_claim < t_mirror_pre_tau)) ? 1 : 0;

    // Gaze duration and self-correction scan the full trajectory.
    int t_mirror_full = 0;
    for (const StepRecord& s : trace.steps) {
        if (s.m) {
            m.mgd += 1;
            if (t_mirror_full == 0) t_mirror_full = s.t;
        }
    }
    int t_guess = 0;
    for (const StepRecord& s : trace.steps) {
        if (t_mirror_full != 0 && s.t >= t_mirror_full) break;
        if (s.identification) {
            t_guess = s.t;
            break;
        }
    }
    const bool applicable = t_mirror_full > 0 && t_guess > 0 &&
                            *trace.steps[t_guess - 1].identification != trace.c_star;
    m.ar_sc_applicable = applicable ? 1 : 0;
    if (applicable) {
        const int tau_tilde = trace.terminated ? trace.tau : trace.T;
        int corrected = 0;
        for (const StepRecord& s : trace.steps) {
            if (s.t < t_mirror_full || s.t > tau_tilde) continue;
            if (s.identification && *s.identification == trace.c_star) {
                corrected = 1;
                break;
            }
        }
        m.sc = corrected;
    }
    return m;
}

AggregateMetrics aggregate(const std::vector<EpisodeMetrics>& episodes) {
    if (episodes.empty()) throw std::invalid_argument("aggregate: no episodes");

    AggregateMetrics agg;
    agg.n_episodes = static_cast<int>(episodes.size());

    std::vector<double> tsa, ttd, mcr, mtato, caal, cr, mgd, sc, ar, completed, tsa_c;
    for (const EpisodeMetrics& e : episodes) {
        tsa.push_back(e.tsa);
        ttd.push_back(e.ttd);
        mcr.push_back(e.mcr);
        if (e.mtato) mtato.push_back(*e.mtato);
        caal.push_back(e.caal);
        cr.push_back(e.cr);
        mgd.push_back(e.mgd);
        if (e.sc) sc.push_back(*e.sc);
        ar.push_back(e.ar_sc_applicable);
        completed.push_back(e.completed);
        if (e.completed) tsa_c.push_back(e.tsa);
    }
    agg.tsa = summarize(tsa);
    agg.ttd = summarize(ttd);
    agg.mcr = summarize(mcr);
    agg.mtato = summarize(mtato);
    agg.caal = summarize(caal);
    agg.cr = summarize(cr);
    agg.mgd = summarize(mgd);
    agg.sc = summarize(sc);
    agg.ar_sc = summarize(ar);
    agg.completed = summarize(completed);
    agg.tsa_c = summarize(tsa_c);
    if (agg.tsa_c.mean && agg.tsa.mean) agg.completion_gap = *agg.tsa_c.mean - *agg.tsa.mean;
    return agg;
}

BaselineReport chance_baseline(ConditionId condition) {
    if (condition == ConditionId::E5) {
        // Open-ended final attribution: no single chance marker; uniform over
        // the ten colors gives 1/10, over ten colors plus unknown gives 1/11.
        return {{0.1, 1.0 / 11.0}, false};
    }
    return {{1.0 / 3.0}, true};
}

}  // namespace mirroreval
