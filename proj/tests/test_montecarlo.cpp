#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mta/ddc.hpp"
#include "mta/errors.hpp"
#include "mta/montecarlo.hpp"
#include "mta/rng.hpp"

using namespace mta;

TEST_CASE("resource model layout") {
    const ResourceModelSpec spec;
    const DdcModel mod = build_resource_model(spec);
    CHECK_NOTHROW(validate(mod));
    REQUIRE(mod.n_states() == 30);
    CHECK(mod.n_actions == 3);
    CHECK(mod.beta == 0.9);
    CHECK(mod.benchmark == 2);
    CHECK(mod.state_values.front() == 1.0);
    CHECK(mod.state_values.back() == 30.0);

    // flows: 0.5*sqrt(x)-2, 0.4*sqrt(x)-2, 0
    CHECK(mod.flows[0][3] == doctest::Approx(-1.0).epsilon(1e-14));  // x=4
    CHECK(mod.flows[1][24] == doctest::Approx(0.0).epsilon(1e-14)); // x=25
    for (int x = 0; x < 30; ++x) CHECK(mod.flows[2][x] == 0.0);

    const std::vector<double>& pi = spec.pi;
    const int n = 30;
    // the first action resets the state to values 1..4
    for (int x = 0; x < n; ++x)
        for (int j = 0; j < 4; ++j) CHECK(mod.transitions[0][x * n + j] == doctest::Approx(pi[j]));
    // the second action rebuilds relative to the current value
    {
        const int x = 19; // value 20 moves to values 10..13
        for (int j = 0; j < 4; ++j)
            CHECK(mod.transitions[1][x * n + (9 + j)] == doctest::Approx(pi[j]));
    }
    // the third action drifts up and stacks at the cap
    {
        const int x = 27; // value 28 moves to 28,29,30,30
        CHECK(mod.transitions[2][x * n + 27] == doctest::Approx(pi[0]));
        CHECK(mod.transitions[2][x * n + 28] == doctest::Approx(pi[1]));
        CHECK(mod.transitions[2][x * n + 29] == doctest::Approx(pi[2] + pi[3]));
    }
    CHECK(mod.transitions[2][29 * n + 29] == doctest::Approx(1.0));

    CHECK(mod.shocks.family == ShockSpec::Family::MultivariateNormal);
    REQUIRE(mod.shocks.cov.size() == 9);
    CHECK(mod.shocks.cov[0] == 0.5);
    CHECK(mod.shocks.cov[1] == 0.5);
    CHECK(mod.shocks.cov[4] == 1.0);
    CHECK(mod.shocks.cov[8] == 0.0);
}

TEST_CASE("resource spec validation") {
    ResourceModelSpec spec;
    spec.pi = {0.5, 0.5, 0.25, -0.25};
    CHECK_THROWS_AS(build_resource_model(spec), validation_error);
    spec = ResourceModelSpec();
    spec.n_states = 3;
    CHECK_THROWS_AS(build_resource_model(spec), validation_error);
    spec = ResourceModelSpec();
    spec.cov2 = {0.5, 0.9, 0.9, 0.5}; // not PSD
    CHECK_THROWS_AS(build_resource_model(spec), validation_error);
}

namespace {

struct SolvedResource {
    DdcModel model;
    std::vector<DiscreteShocks> shocks;
    ModelSolution solution;
};

SolvedResource solve_resource(int n_states, int n_draws, std::uint64_t seed) {
    SolvedResource out;
    ResourceModelSpec spec;
    spec.n_states = n_states;
    out.model = build_resource_model(spec);
    for (int x = 0; x < n_states; ++x) {
        const ShockSpec resolved =
            resolve_for_state(out.model.shocks, static_cast<int>(out.model.state_values[x]));
        out.shocks.push_back(discretize(resolved, n_draws, derive_seed(seed, "shocks", x)));
    }
    out.solution = solve_model(out.model, out.shocks);
    return out;
}

} // namespace

TEST_CASE("panel simulation is deterministic and well formed") {
    const SolvedResource r = solve_resource(8, 200, 5);
    const PanelData a = simulate_panel(r.solution, r.model, 7, 11, 42);
    const PanelData b = simulate_panel(r.solution, r.model, 7, 11, 42);
    const PanelData c = simulate_panel(r.solution, r.model, 7, 11, 43);
    REQUIRE(a.records.size() == 7 * 11);
    CHECK(a.n_agents == 7);
    CHECK(a.n_periods == 11);
    bool same = true, diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const PanelRecord &x = a.records[i], &y = b.records[i], &z = c.records[i];
        same = same && x.agent == y.agent && x.period == y.period && x.state == y.state &&
               x.action == y.action;
        diff = diff || x.state != z.state || x.action != z.action;
        REQUIRE(x.state >= 0);
        REQUIRE(x.state < 8);
        REQUIRE(x.action >= 0);
        REQUIRE(x.action < 3);
    }
    CHECK(same);
    CHECK(diff);
    for (int i = 0; i < 7; ++i)
        for (int t = 0; t < 11; ++t) {
            const PanelRecord& rec = a.records[i * 11 + t];
            CHECK(rec.agent == i);
            CHECK(rec.period == t);
        }
}

TEST_CASE("panel frequencies converge to the model law") {
    const SolvedResource r = solve_resource(30, 2000, 9);
    const PanelData panel = simulate_panel(r.solution, r.model, 2000, 50, 77);
    const PanelFrequencies freq = estimate_ccp_and_transitions(panel, 30, 3);

    long total = 0;
    for (long v : freq.visits) total += v;
    CHECK(total == 2000 * 50);

    for (int x = 0; x < 30; ++x) {
        if (freq.visits[x] < 2000) continue;
        for (int y = 0; y < 3; ++y)
            CHECK(std::fabs(freq.ccp[x * 3 + y] - r.solution.ccp[x][y]) < 0.035);
    }
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 30; ++x) {
            if (freq.trans_obs[y][x] < 1000) continue;
            for (int j = 0; j < 30; ++j)
                CHECK(std::fabs(freq.trans[y][x * 30 + j] - r.model.transitions[y][x * 30 + j]) <
                      0.045);
        }
}

TEST_CASE("frequency tables on a hand-built panel") {
    PanelData panel;
    panel.n_agents = 2;
    panel.n_periods = 3;
    // agent 1 arrives out of order and has a gap: no transition across it
    panel.records = {
        {0, 0, 0, 0}, {0, 1, 1, 1}, {0, 2, 0, 0},
        {1, 2, 2, 0}, {1, 0, 0, 1},
    };
    const PanelFrequencies f = estimate_ccp_and_transitions(panel, 3, 2);
    CHECK(f.visits[0] == 3);
    CHECK(f.visits[1] == 1);
    CHECK(f.visits[2] == 1);
    CHECK(f.ccp[0 * 2 + 0] == doctest::Approx(2.0 / 3));
    CHECK(f.ccp[0 * 2 + 1] == doctest::Approx(1.0 / 3));
    CHECK(f.ccp[1 * 2 + 1] == doctest::Approx(1.0));
    // observed transitions: (x=0,y=0)->1 and (x=1,y=1)->0, both once
    CHECK(f.trans_obs[0][0] == 1);
    CHECK(f.trans[0][0 * 3 + 1] == doctest::Approx(1.0));
    CHECK(f.trans_obs[1][1] == 1);
    CHECK(f.trans[1][1 * 3 + 0] == doctest::Approx(1.0));
    // agent 1's t=0 -> t=2 pair is not consecutive
    CHECK(f.trans_obs[1][0] == 0);

    PanelData dup = panel;
    dup.records.push_back({0, 1, 2, 0});
    CHECK_THROWS_AS(estimate_ccp_and_transitions(dup, 3, 2), validation_error);

    PanelData bad = panel;
    bad.records[0].action = 5;
    CHECK_THROWS_AS(estimate_ccp_and_transitions(bad, 3, 2), validation_error);
}

TEST_CASE("assembled inputs fill the unobserved cells") {
    PanelData panel;
    panel.n_agents = 1;
    panel.n_periods = 2;
    panel.records = {{0, 0, 0, 1}, {0, 1, 2, 1}};
    const PanelFrequencies f = estimate_ccp_and_transitions(panel, 3, 2);
    const AssembledInputs in = assemble_estimation_inputs(f);
    REQUIRE(in.ccps.size() == 3);
    CHECK(in.visited == std::vector<char>{1, 0, 1});
    CHECK(in.ccps[0][1] == doctest::Approx(1.0));
    CHECK(in.ccps[1][0] == doctest::Approx(0.5)); // unvisited: uniform placeholder
    CHECK(in.ccps[1][1] == doctest::Approx(0.5));
    // observed pair: state 0, action 1 -> state 2
    CHECK(in.transitions[1][0 * 3 + 2] == doctest::Approx(1.0));
    // unobserved rows become self-loops
    CHECK(in.transitions[0][0 * 3 + 0] == doctest::Approx(1.0));
    CHECK(in.transitions[1][1 * 3 + 1] == doctest::Approx(1.0));
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) {
            double tot = 0.0;
            for (int j = 0; j < 3; ++j) tot += in.transitions[y][x * 3 + j];
            CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("fit metrics formulas") {
    const std::vector<std::vector<double>> truth{{1.0, 3.0}, {0.0, 0.0}};
    const std::vector<std::vector<double>> est{{1.5, 2.5}, {0.0, 0.0}};
    const FitMetrics m = fit_metrics(est, truth, {0, 1}, 1);
    CHECK(m.states_used == 2);
    CHECK(m.rmse[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.r2[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::isnan(m.rmse[1]));
    CHECK(std::isnan(m.r2[1]));

    const FitMetrics perfect = fit_metrics(truth, truth, {0, 1}, 1);
    CHECK(perfect.rmse[0] == 0.0);
    CHECK(perfect.r2[0] == doctest::Approx(1.0));

    // constant truth has no variance to explain
    const std::vector<std::vector<double>> flat{{2.0, 2.0}, {0.0, 0.0}};
    const FitMetrics fm = fit_metrics(est, flat, {0, 1}, 1);
    CHECK(std::isnan(fm.r2[0]));
    CHECK_FALSE(std::isnan(fm.rmse[0]));

    CHECK_THROWS_AS(fit_metrics(est, truth, {}, 1), validation_error);
}

TEST_CASE("replication is deterministic in the seed") {
    const SolvedResource r = solve_resource(8, 300, 33);
    const ReplicationResult a = run_replication(r.model, r.solution, r.shocks, 60, 25, 11);
    const ReplicationResult b = run_replication(r.model, r.solution, r.shocks, 60, 25, 11);
    CHECK(a.seed == 11);
    REQUIRE(a.metrics.rmse.size() == 3);
    CHECK(a.metrics.states_used > 0);
    for (int y = 0; y < 3; ++y) {
        if (y == r.model.benchmark) {
            CHECK(std::isnan(a.metrics.rmse[y]));
            continue;
        }
        CHECK(a.metrics.rmse[y] == b.metrics.rmse[y]);
        CHECK(std::isfinite(a.metrics.rmse[y]));
    }
}

TEST_CASE("simplex lattice enumerates interior grid points") {
    const std::vector<std::array<double, 3>> grid = simplex_lattice(7);
    REQUIRE(grid.size() == 15);
    CHECK(grid.front()[0] == doctest::Approx(1.0 / 7));
    CHECK(grid.front()[1] == doctest::Approx(1.0 / 7));
    CHECK(grid.front()[2] == doctest::Approx(5.0 / 7));
    CHECK(grid.back()[0] == doctest::Approx(5.0 / 7));
    for (const auto& p : grid) {
        CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : p) CHECK(v > 0.0);
    }
    CHECK_THROWS_AS(simplex_lattice(2), validation_error);
}

TEST_CASE("width sweep on a non-degenerate grid collapses to points") {
    // 1/7-grid marginals never align with 1/S column mass for S=100 or 1000,
    // so every optimal basis is non-degenerate and the set is a singleton
    const std::vector<std::array<double, 3>> grid = simplex_lattice(7);
    ShockSpec spec = ShockSpec::multivariate_normal(
        {0.0, 0.0, 0.0}, {0.5, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0});
    const std::vector<int> draws{100, 1000};
    const std::vector<SweepRow> rows = shrinkage_sweep(grid, draws, 1, spec, 2024);
    REQUIRE(rows.size() == 30);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        CHECK(r.n_draws == draws[i / 15]);
        const std::array<double, 3>& gp = grid[i % 15];
        for (int y = 0; y < 3; ++y) {
            CHECK(r.p[y] == gp[y]);
            CHECK(r.width[y] == 0.0);
        }
    }
}
