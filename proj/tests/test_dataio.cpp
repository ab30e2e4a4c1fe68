#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mta/dataio.hpp"
#include "mta/ddc.hpp"
#include "mta/errors.hpp"
#include "mta/montecarlo.hpp"
#include "mta/rng.hpp"

using namespace mta;

TEST_CASE("bus csv ingestion, happy path") {
    std::istringstream in(
        "bus_id,t,mileage,replace\n"
        "7,0,300.5,0\n"
        "\n"
        "7,1,13000,1\n"
        "3,0,0,0\n");
    const std::vector<RawBusRecord> rec = ingest_bus_csv(in);
    REQUIRE(rec.size() == 3);
    CHECK(rec[0].bus_id == 7);
    CHECK(rec[0].period == 0);
    CHECK(rec[0].mileage == 300.5);
    CHECK(rec[0].replace == 0);
    CHECK(rec[1].replace == 1);
    CHECK(rec[2].bus_id == 3);
}

TEST_CASE("bus csv ingestion reports every bad line at once") {
    std::istringstream in(
        "bus_id,t,mileage,replace\n"
        "1,0,100,0\n"
        "1,one,200,0\n"
        "2,0,-50,0\n"
        "2,1,300,2\n");
    try {
        ingest_bus_csv(in);
        FAIL("expected validation_error");
    } catch (const validation_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("line 4") != std::string::npos);
        CHECK(msg.find("line 5") != std::string::npos);
    }
}

TEST_CASE("bus csv ingestion rejects a wrong header") {
    std::istringstream in("bus,t,mileage,replace\n1,0,100,0\n");
    CHECK_THROWS_AS(ingest_bus_csv(in), validation_error);
    std::istringstream empty("");
    CHECK_THROWS_AS(ingest_bus_csv(empty), validation_error);
    std::istringstream missing("bus_id,t,mileage,replace\n1,0,100\n");
    CHECK_THROWS_AS(ingest_bus_csv(missing), validation_error);
}

TEST_CASE("mileage discretization bins and reindexes") {
    std::vector<RawBusRecord> rec{
        {7, 1, 13000.0, 1},
        {7, 0, 300.5, 0},
        {3, 0, 112500.0, 0},
        {3, 1, 10000000.0, 0},
    };
    const PanelData panel = discretize_mileage(rec, 30);
    CHECK(panel.n_agents == 2);
    REQUIRE(panel.records.size() == 4);
    // bus ids map to dense agents in ascending id order: 3 -> 0, 7 -> 1
    CHECK(panel.records[0].agent == 0);
    CHECK(panel.records[0].period == 0);
    CHECK(panel.records[0].state == 9); // 112500 / 12500
    CHECK(panel.records[1].state == 29); // capped
    CHECK(panel.records[2].agent == 1);
    CHECK(panel.records[2].period == 0);
    CHECK(panel.records[2].state == 0);
    CHECK(panel.records[3].state == 1); // 13000 / 12500
    CHECK(panel.records[3].action == 1);
}

TEST_CASE("transition template shape") {
    const double th = 0.7405;
    const std::vector<std::vector<double>> t = bus_transition_template(th, 30);
    REQUIRE(t.size() == 2);
    for (int x = 0; x < 29; ++x) {
        CHECK(t[0][x * 30 + x] == th);
        CHECK(t[0][x * 30 + x + 1] == doctest::Approx(1.0 - th));
    }
    CHECK(t[0][29 * 30 + 29] == 1.0);
    for (int x = 0; x < 30; ++x) {
        CHECK(t[1][x * 30 + 0] == th);
        CHECK(t[1][x * 30 + 1] == doctest::Approx(1.0 - th));
        double s0 = 0.0, s1 = 0.0;
        for (int j = 0; j < 30; ++j) {
            s0 += t[0][x * 30 + j];
            s1 += t[1][x * 30 + j];
        }
        CHECK(s0 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s1 == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bus_transition_template(0.0, 30), validation_error);
    CHECK_THROWS_AS(bus_transition_template(1.0, 30), validation_error);
    const std::vector<std::vector<double>> two = bus_transition_template(0.6, 0.8, 5);
    CHECK(two[0][0] == 0.6);
    CHECK(two[1][0] == 0.8);
}

TEST_CASE("pooled stay fraction") {
    PanelData panel;
    panel.n_agents = 1;
    panel.n_periods = 5;
    panel.records = {
        {0, 0, 0, 0}, {0, 1, 0, 0}, {0, 2, 1, 0}, {0, 3, 1, 1}, {0, 4, 0, 0},
    };
    // keep 0->0 stay, keep 0->1 advance, keep 1->1 stay, replace ->0 stay
    CHECK(estimate_advance_theta(panel, 30) == doctest::Approx(0.75));

    PanelData absorbing;
    absorbing.n_agents = 1;
    absorbing.n_periods = 2;
    absorbing.records = {{0, 0, 29, 0}, {0, 1, 29, 0}};
    CHECK_THROWS_AS(estimate_advance_theta(absorbing, 30), validation_error);

    PanelData gap;
    gap.n_agents = 1;
    gap.n_periods = 3;
    gap.records = {{0, 0, 3, 0}, {0, 2, 4, 0}}; // not consecutive
    CHECK_THROWS_AS(estimate_advance_theta(gap, 30), validation_error);
}

namespace {

struct BusWorld {
    DdcModel model;
    std::vector<DiscreteShocks> shocks;
    ModelSolution solution;
};

// two-action renewal model with flat keep utility and the state-dependent
// mixture shocks; the estimation pipeline should hand the flat profile back
BusWorld bus_world(double keep_flow, double theta, int n_draws, std::uint64_t seed) {
    BusWorld w;
    w.model.state_values.resize(30);
    std::iota(w.model.state_values.begin(), w.model.state_values.end(), 0.0);
    w.model.n_actions = 2;
    w.model.beta = 0.9;
    w.model.benchmark = 1;
    w.model.flows = {std::vector<double>(30, keep_flow), std::vector<double>(30, 0.0)};
    w.model.transitions = bus_transition_template(theta, 30);
    w.model.shocks = ShockSpec::state_dependent_normal_mixture(0.1, 0.5);
    validate(w.model);
    for (int x = 0; x < 30; ++x)
        w.shocks.push_back(
            discretize(mixture_for_state(0.1, 0.5, x), n_draws, derive_seed(seed, "shocks", x)));
    w.solution = solve_model(w.model, w.shocks);
    return w;
}

} // namespace

TEST_CASE("point estimate recovers a flat keep utility") {
    const double keep_flow = 0.9, theta = 0.7405;
    const BusWorld w = bus_world(keep_flow, theta, 3000, 1001);
    // with a moderate keep premium both actions stay interior
    for (int x = 0; x < 30; ++x) {
        CHECK(w.solution.ccp[x][1] > 0.02);
        CHECK(w.solution.ccp[x][1] < 0.5);
    }

    const PanelData panel = simulate_panel(w.solution, w.model, 400, 125, 71);
    BootstrapConfig cfg;
    cfg.seed = 515;
    const BusPointEstimate pe = bus_point_estimate(panel, cfg);

    CHECK(std::fabs(pe.theta - theta) < 0.02);

    const PanelFrequencies freq = estimate_ccp_and_transitions(panel, 30, 2);
    double err_sum = 0.0;
    int scored = 0;
    for (int x = 0; x < 30; ++x) {
        if (freq.visits[x] < 600 || !pe.estimate.identified[x]) continue;
        const double err = std::fabs(pe.estimate.flows[0][x] - keep_flow);
        CHECK(err < 0.5);
        err_sum += err;
        ++scored;
        CHECK(std::fabs(pe.estimate.flows[1][x]) < 1e-8);
    }
    REQUIRE(scored >= 4);
    CHECK(err_sum / scored < 0.3);

    // unvisited states must not claim identification
    for (int x = 0; x < 30; ++x)
        if (!pe.visited[x]) CHECK(pe.estimate.identified[x] == 0);
}

TEST_CASE("identity resample reproduces the point estimate") {
    const BusWorld w = bus_world(0.9, 0.7405, 1500, 77);
    const PanelData panel = simulate_panel(w.solution, w.model, 60, 40, 5);
    BootstrapConfig cfg;
    cfg.seed = 99;
    cfg.n_draws = 800;
    cfg.n_resamples = 1;
    cfg.resample_size = -1;
    const BusPointEstimate pe = bus_point_estimate(panel, cfg);
    const BootstrapResult boot = bootstrap_estimate(panel, cfg);
    REQUIRE(boot.estimates.size() == 1);
    CHECK(boot.excluded.empty());
    CHECK(boot.theta[0] == pe.theta);
    for (int x = 0; x < 30; ++x) {
        if (!pe.estimate.identified[x]) {
            CHECK(boot.quantile_counts[x] == 0);
            CHECK(std::isnan(boot.flow_quantiles[x][2]));
            continue;
        }
        CHECK(boot.quantile_counts[x] == 1);
        for (int q = 0; q < 5; ++q)
            CHECK(boot.flow_quantiles[x][q] == doctest::Approx(pe.estimate.flows[0][x]));
    }
}

TEST_CASE("bootstrap is deterministic and covers the truth") {
    const double keep_flow = 0.9;
    const BusWorld w = bus_world(keep_flow, 0.7405, 2000, 31);
    const PanelData panel = simulate_panel(w.solution, w.model, 300, 100, 13);
    BootstrapConfig cfg;
    cfg.seed = 2200;
    cfg.n_resamples = 30;
    cfg.n_draws = 1500;

    const BootstrapResult a = bootstrap_estimate(panel, cfg);
    const BootstrapResult b = bootstrap_estimate(panel, cfg);
    REQUIRE(!a.estimates.empty());
    CHECK(a.resample_indices == b.resample_indices);
    CHECK(a.resample_seeds == b.resample_seeds);
    CHECK(a.theta == b.theta);

    long replaced = 0;
    for (const PanelRecord& r : panel.records)
        if (r.action == 1) ++replaced;
    CHECK(std::accumulate(a.replacements_observed.begin(), a.replacements_observed.end(), 0L) ==
          replaced);

    int scored = 0, covered = 0;
    for (int x = 0; x < 30; ++x) {
        if (a.quantile_counts[x] < 25) continue;
        const std::array<double, 5>& q = a.flow_quantiles[x];
        CHECK(q[0] <= q[1]);
        CHECK(q[1] <= q[2]);
        CHECK(q[2] <= q[3]);
        CHECK(q[3] <= q[4]);
        ++scored;
        if (q[0] <= keep_flow && keep_flow <= q[4]) ++covered;
    }
    REQUIRE(scored >= 4);
    CHECK(covered >= scored / 2);
}

TEST_CASE("bootstrap validates its configuration") {
    PanelData panel;
    panel.n_agents = 1;
    panel.n_periods = 2;
    panel.records = {{0, 0, 0, 0}, {0, 1, 0, 0}};
    BootstrapConfig cfg;
    cfg.n_resamples = 0;
    CHECK_THROWS_AS(bootstrap_estimate(panel, cfg), validation_error);
    cfg = BootstrapConfig();
    cfg.n_draws = 0;
    CHECK_THROWS_AS(bootstrap_estimate(panel, cfg), validation_error);
    cfg = BootstrapConfig();
    cfg.beta = 1.0;
    CHECK_THROWS_AS(bootstrap_estimate(panel, cfg), validation_error);
}
