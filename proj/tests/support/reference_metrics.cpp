#include "support/reference_metrics.hpp"

#include <cmath>

namespace mirroreval::testing {

namespace {

// Step lookup by timestep value, ignoring vector order.
const StepRecord* step_at(const EpisodeTrace& tr, int t) {
    for (const StepRecord& s : tr.steps) {
        if (s.t == t) return &s;
    }
    return nullptr;
}

bool mirror_visible_at(const EpisodeTrace& tr, int t) {
    const StepRecord* s = step_at(tr, t);
    return s && s->m;
}

bool has_claim_at(const EpisodeTrace& tr, int t) {
    const StepRecord* s = step_at(tr, t);
    return s && s->identification.has_value();
}

bool claims_color_at(const EpisodeTrace& tr, int t, ColorLabel c) {
    const StepRecord* s = step_at(tr, t);
    return s && s->identification && *s->identification == c;
}

}  // namespace

EpisodeMetrics reference_episode_metrics(const EpisodeTrace& tr) {
    EpisodeMetrics m;

    // Task success: the final decision matches the true color. A trace that
    // never terminated has no final decision and scores 0.
    m.tsa = 0;
    if (tr.terminated && tr.final_decision.has_value() && *tr.final_decision == tr.c_star) m.tsa = 1;

    // Time to decision is tau (tau == T when no done was produced).
    m.ttd = tr.tau;

    // Mirror consultation: evidence strictly before tau.
    m.mcr = 0;
    for (int t = 1; t < tr.tau; ++t) {
        if (mirror_visible_at(tr, t)) m.mcr = 1;
    }

    // Temporal ordering: defined only on success, then identical to MCR.
    if (m.tsa == 1) {
        int value = 0;
        for (int t = 1; t < tr.tau; ++t) {
            if (mirror_visible_at(tr, t)) value = 1;
        }
        m.mtato = value;
    } else {
        m.mtato = std::nullopt;
    }

    // Correct attribution at least once, strictly before tau.
    m.caal = 0;
    for (int t = 1; t < tr.tau; ++t) {
        if (claims_color_at(tr, t, tr.c_star)) m.caal = 1;
    }

    // Confabulation: first committed claim before tau, compared against the
    // first pre-tau mirror evidence.
    int t_claim = -1;
    for (int t = 1; t < tr.tau; ++t) {
        if (has_claim_at(tr, t)) {
            t_claim = t;
            break;
        }
    }
    int t_mirror = -1;
    for (int t = 1; t < tr.tau; ++t) {
        if (mirror_visible_at(tr, t)) {
            t_mirror = t;
            break;
        }
    }
    m.cr = (t_claim != -1 && (t_mirror == -1 || t_claim < t_mirror)) ? 1 : 0;

    // Gaze duration: count over the whole trajectory, 1..T.
    m.mgd = 0;
    for (int t = 1; t <= tr.T; ++t) {
        if (mirror_visible_at(tr, t)) m.mgd += 1;
    }

    // Self-correction. The mirror onset here is NOT windowed by tau.
    int t_mirror_any = -1;
    for (int t = 1; t <= tr.T; ++t) {
        if (mirror_visible_at(tr, t)) {
            t_mirror_any = t;
            break;
        }
    }
    int t_guess = -1;
    if (t_mirror_any != -1) {
        for (int t = 1; t < t_mirror_any; ++t) {
            if (has_claim_at(tr, t)) {
                t_guess = t;
                break;
            }
        }
    }
    const bool applicable =
        t_mirror_any != -1 && t_guess != -1 && !claims_color_at(tr, t_guess, tr.c_star);
    m.ar_sc_applicable = applicable ? 1 : 0;
    if (applicable) {
        const int tau_tilde = tr.terminated ? tr.tau : tr.T;
        int sc = 0;
        for (int t = t_mirror_any; t <= tau_tilde; ++t) {
            if (claims_color_at(tr, t, tr.c_star)) sc = 1;
        }
        m.sc = sc;
    } else {
        m.sc = std::nullopt;
    }

    m.completed = tr.terminated ? 1 : 0;
    return m;
}

ReferenceSummary reference_summary(const std::vector<double>& values) {
    ReferenceSummary out;
    out.n = static_cast<int>(values.size());
    if (values.empty()) return out;
    long double sum = 0;
    for (double v : values) sum += static_cast<long double>(v);
    out.mean = sum / values.size();
    out.has_mean = true;
    if (values.size() >= 2) {
        long double sq = 0;
        for (double v : values) {
            const long double d = static_cast<long double>(v) - out.mean;
            sq += d * d;
        }
        const long double sd = std::sqrt(sq / (values.size() - 1));
        out.sem = sd / std::sqrt(static_cast<long double>(values.size()));
        out.has_sem = true;
    }
    return out;
}

}  // namespace mirroreval::testing
