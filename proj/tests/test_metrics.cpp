#include <doctest.h>

#include <cmath>

#include "mirroreval/metrics.hpp"
#include "support/reference_metrics.hpp"
#include "support/trace_fixtures.hpp"

using namespace mirroreval;
using namespace mirroreval::testing;

TEST_CASE("fixture: mirror at t=5, correct claim from t=6, correct done at t=20") {
    TraceBuilder b(ColorLabel::blue);
    for (int t = 1; t <= 4; ++t) b.step(false, "");
    b.step(true, "");  // t=5: first mirror evidence
    for (int t = 6; t <= 19; ++t) b.step(false, "blue");
    b.done("blue", "blue");  // t=20
    const EpisodeTrace tr = b.build();
    REQUIRE(!validate_trace(tr).has_value());

    const EpisodeMetrics m = episode_metrics(tr);
    CHECK(m.tsa == 1);
    CHECK(m.ttd == 20);
    CHECK(m.mcr == 1);
    REQUIRE(m.mtato.has_value());
    CHECK(*m.mtato == 1);
    CHECK(m.caal == 1);
    CHECK(m.cr == 0);
    CHECK(m.mgd == 1);  // the single visible step
    CHECK(m.ar_sc_applicable == 0);
    CHECK(!m.sc.has_value());
    CHECK(m.completed == 1);
    CHECK(reference_episode_metrics(tr) == m);
}

TEST_CASE("fixture: pre-mirror wrong claim, no mirror ever, wrong cube at t=3") {
    TraceBuilder b(ColorLabel::blue);
    b.step(false, "red");
    b.step(false, "red");
    b.done("green", "red");  // t=3
    const EpisodeTrace tr = b.build();
    REQUIRE(!validate_trace(tr).has_value());

    const EpisodeMetrics m = episode_metrics(tr);
    CHECK(m.tsa == 0);
    CHECK(m.cr == 1);  // claim exists, mirror never does
    CHECK(m.mcr == 0);
    CHECK(!m.mtato.has_value());
    CHECK(m.caal == 0);
    CHECK(m.mgd == 0);
    CHECK(m.ar_sc_applicable == 0);
    CHECK(reference_episode_metrics(tr) == m);
}

TEST_CASE("fixture: wrong guess at t=2, mirror at t=7, self-corrected at t=9") {
    TraceBuilder b(ColorLabel::blue);
    b.step(false, "");
    b.step(false, "red");  // wrong committed guess
    for (int t = 3; t <= 6; ++t) b.step(false, "red");
    b.step(true, "red");  // t=7: mirror evidence
    b.step(false, "red");
    b.step(false, "blue");  // t=9: corrected
    b.step(false, "blue");
    b.done("blue", "blue");
    const EpisodeTrace tr = b.build();
    REQUIRE(!validate_trace(tr).has_value());

    const EpisodeMetrics m = episode_metrics(tr);
    CHECK(m.ar_sc_applicable == 1);
    REQUIRE(m.sc.has_value());
    CHECK(*m.sc == 1);
    CHECK(m.cr == 1);  // first claim (t=2) precedes first mirror (t=7)
    CHECK(m.caal == 1);
    CHECK(reference_episode_metrics(tr) == m);
}

TEST_CASE("non-terminated episodes score TSA 0 with TTD = T") {
    TraceBuilder b(ColorLabel::red);
    for (int t = 1; t <= 30; ++t) b.step(t > 10, "red");
    b.run_out();
    const EpisodeTrace tr = b.build();
    REQUIRE(!validate_trace(tr).has_value());

    const EpisodeMetrics m = episode_metrics(tr);
    CHECK(m.tsa == 0);
    CHECK(m.ttd == 30);
    CHECK(m.completed == 0);
    CHECK(m.mgd == 20);
    CHECK(reference_episode_metrics(tr) == m);
}

TEST_CASE("E5 uses the final identification as the task decision") {
    TraceBuilder b(ColorLabel::cyan, ConditionId::E5);
    b.step(true, "");
    b.done("", "cyan");
    const EpisodeTrace tr = b.build();
    REQUIRE(!validate_trace(tr).has_value());
    CHECK(episode_metrics(tr).tsa == 1);

    TraceBuilder b2(ColorLabel::cyan, ConditionId::E5);
    b2.step(true, "");
    b2.done("", "");  // terminated with unknown: no decision to score
    CHECK(episode_metrics(b2.build()).tsa == 0);
}

TEST_CASE("self-correction window includes tau itself") {
    // Correct claim appears only at the done step; SC counts it, CAAL (strict
    // pre-tau window) does not.
    TraceBuilder b(ColorLabel::blue);
    b.step(false, "red");
    b.step(true, "red");
    b.done("blue", "blue", true);
    const EpisodeTrace tr = b.build();
    const EpisodeMetrics m = episode_metrics(tr);
    CHECK(m.ar_sc_applicable == 1);
    REQUIRE(m.sc.has_value());
    CHECK(*m.sc == 1);
    CHECK(m.caal == 0);
    CHECK(reference_episode_metrics(tr) == m);
}

TEST_CASE("metric oracle equivalence over fuzzed traces") {
    Rng rng(2024);
    for (int i = 0; i < 3000; ++i) {
        const EpisodeTrace tr = random_trace(rng);
        REQUIRE(!validate_trace(tr).has_value());
        const EpisodeMetrics got = episode_metrics(tr);
        const EpisodeMetrics want = reference_episode_metrics(tr);
        REQUIRE(got == want);

        // Structural relations from the definitions.
        bool claim_exists = false;
        for (const StepRecord& s : tr.steps) {
            if (s.t < tr.tau && s.identification) claim_exists = true;
        }
        if (got.mcr == 0) REQUIRE(got.cr == (claim_exists ? 1 : 0));
        if (got.mtato.has_value()) REQUIRE(*got.mtato == got.mcr);
        int pre_tau_m = 0;
        for (const StepRecord& s : tr.steps) {
            if (s.t < tr.tau && s.m) ++pre_tau_m;
        }
        REQUIRE(got.mgd >= pre_tau_m);
    }
}

TEST_CASE("aggregation: {1,0,1} gives 0.6667 +- 0.3333") {
    std::vector<EpisodeMetrics> eps(3);
    eps[0].tsa = 1;
    eps[1].tsa = 0;
    eps[2].tsa = 1;
    const AggregateMetrics agg = aggregate(eps);
    REQUIRE(agg.tsa.mean.has_value());
    REQUIRE(agg.tsa.sem.has_value());
    // sample sd = 0.5774 over 3 values; sem = sd / sqrt(3) = 1/3
    CHECK(std::abs(*agg.tsa.mean - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(*agg.tsa.sem - 1.0 / 3.0) < 1e-12);
    CHECK(agg.tsa.n_defined == 3);
}

TEST_CASE("aggregation matches the long-double reference on random inputs") {
    Rng rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = static_cast<int>(rng.uniform_range(1, 60));
        std::vector<EpisodeMetrics> eps(static_cast<std::size_t>(n));
        std::vector<double> ttd;
        for (EpisodeMetrics& e : eps) {
            e.ttd = static_cast<int>(rng.uniform_range(1, 100));
            ttd.push_back(e.ttd);
        }
        const AggregateMetrics agg = aggregate(eps);
        const ReferenceSummary ref = reference_summary(ttd);
        REQUIRE(agg.ttd.mean.has_value());
        CHECK(std::abs(*agg.ttd.mean - static_cast<double>(ref.mean)) < 1e-12);
        if (n == 1) {
            CHECK(!agg.ttd.sem.has_value());  // n-1 divisor degenerate: report --
        } else {
            REQUIRE(agg.ttd.sem.has_value());
            CHECK(std::abs(*agg.ttd.sem - static_cast<double>(ref.sem)) < 1e-12);
        }
    }
}

TEST_CASE("undefined episode values are excluded, never zero-filled") {
    // 21 episodes; 5 of them unsuccessful, so MTATO is undefined for those.
    std::vector<EpisodeMetrics> eps;
    for (int i = 0; i < 21; ++i) {
        EpisodeMetrics e;
        e.tsa = i < 16 ? 1 : 0;
        e.mtato = e.tsa == 1 ? std::optional<int>(1) : std::nullopt;
        e.completed = 1;
        eps.push_back(e);
    }
    const AggregateMetrics agg = aggregate(eps);
    CHECK(agg.mtato.n_defined == 16);
    REQUIRE(agg.mtato.mean.has_value());
    CHECK(*agg.mtato.mean == 1.0);  // zeros from undefined episodes would drag this down

    int tsa_count = 0;
    for (const EpisodeMetrics& e : eps) tsa_count += e.tsa;
    CHECK(agg.mtato.n_defined == tsa_count);
}

TEST_CASE("all-undefined metrics aggregate to the -- sentinel state") {
    std::vector<EpisodeMetrics> eps(4);  // all tsa=0, all incomplete
    const AggregateMetrics agg = aggregate(eps);
    CHECK(!agg.mtato.mean.has_value());
    CHECK(agg.mtato.n_defined == 0);
    CHECK(!agg.sc.mean.has_value());
    CHECK(!agg.tsa_c.mean.has_value());
    CHECK(!agg.completion_gap.has_value());
}

TEST_CASE("completed-success consistency over fuzzed traces") {
    Rng rng(31337);
    std::vector<EpisodeMetrics> eps;
    long long lhs = 0, rhs = 0;
    for (int i = 0; i < 500; ++i) {
        const EpisodeMetrics m = episode_metrics(random_trace(rng));
        lhs += static_cast<long long>(m.completed) * m.tsa;
        rhs += m.tsa;
        eps.push_back(m);
    }
    CHECK(lhs <= rhs);
    const AggregateMetrics agg = aggregate(eps);
    CHECK(agg.n_episodes == 500);
}

TEST_CASE("chance baselines per condition") {
    for (ConditionId c : {ConditionId::E1, ConditionId::E2, ConditionId::E3, ConditionId::E4}) {
        const BaselineReport b = chance_baseline(c);
        CHECK(b.single_marker);
        REQUIRE(b.values.size() == 1);
        CHECK(std::abs(b.values[0] - 1.0 / 3.0) < 1e-15);
    }
    const BaselineReport e5 = chance_baseline(ConditionId::E5);
    CHECK(!e5.single_marker);
    REQUIRE(e5.values.size() == 2);
    CHECK(std::abs(e5.values[0] - 0.1) < 1e-15);
    CHECK(std::abs(e5.values[1] - 1.0 / 11.0) < 1e-15);
}

TEST_CASE("trace validation rejects malformed traces") {
    TraceBuilder ok(ColorLabel::red);
    ok.step(false, "");
    ok.done("red");
    EpisodeTrace tr = ok.build();
    CHECK(!validate_trace(tr).has_value());

    EpisodeTrace bad_tau = tr;
    bad_tau.tau = 1;
    CHECK(validate_trace(bad_tau).has_value());

    EpisodeTrace bad_decision = tr;
    bad_decision.final_decision = ColorLabel::green;
    CHECK(validate_trace(bad_decision).has_value());

    EpisodeTrace bad_order = tr;
    std::swap(bad_order.steps[0], bad_order.steps[1]);
    CHECK(validate_trace(bad_order).has_value());

    TraceBuilder no_done(ColorLabel::red);
    no_done.step(false, "");
    EpisodeTrace undone = no_done.run_out().build();
    undone.final_decision = ColorLabel::red;  // decision without termination
    CHECK(validate_trace(undone).has_value());
}
