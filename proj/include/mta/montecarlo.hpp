#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mta/ddc.hpp"

namespace mta {

/**
 * Three-choice resource extraction design. Choice 0 empties the pool,
 * choice 1 extracts partially, choice 2 waits; the wait flow is the
 * benchmark zero. Defaults match the benchmark study configuration.
 */
struct ResourceModelSpec {
    int n_states = 30;
    std::vector<double> pi = {0.3, 0.35, 0.25, 0.10};
    double beta = 0.9;
    // covariance of the shock differences (eps0 - eps2, eps1 - eps2), row-major 2x2
    std::vector<double> cov2 = {0.5, 0.5, 0.5, 1.0};
};

DdcModel build_resource_model(const ResourceModelSpec& spec);

struct PanelRecord {
    int agent;
    int period;
    int state;
    int action;
};

struct PanelData {
    int n_agents = 0;
    int n_periods = 0; // longest observed series; informational
    std::vector<PanelRecord> records;
};

/**
 * Forward simulation: agents start at independent uniform states, each
 * period draws a fresh shock vector from the model's (possibly
 * state-dependent) law, acts by argmax of w + eps, then transitions.
 * Single RNG stream in (agent, period) order makes the panel a pure
 * function of the seed.
 */
PanelData simulate_panel(const ModelSolution& solution, const DdcModel& model, int n_agents,
                         int n_periods, std::uint64_t seed);

/**
 * Frequency estimators. CCP rows of unvisited states are all-zero with
 * visits == 0; transition rows never observed are all-zero with
 * trans_obs == 0. No fill policy is applied here.
 */
struct PanelFrequencies {
    int n_states = 0;
    int n_actions = 0;
    std::vector<long> visits;                 // choice observations per state
    std::vector<double> ccp;                  // n_states x n_actions row-major
    std::vector<std::vector<double>> trans;   // per action, n x n row-major
    std::vector<std::vector<long>> trans_obs; // per action, observed pairs per state
};

PanelFrequencies estimate_ccp_and_transitions(const PanelData& panel, int n_states,
                                              int n_actions);

/**
 * Estimator-ready inputs from raw frequencies: unvisited states get a
 * uniform CCP placeholder, unobserved transition rows a self-loop. Both
 * fills are masked by the visited flags; they keep the payoff system square
 * without inventing data at states that are reported as identified.
 */
struct AssembledInputs {
    std::vector<CcpVector> ccps;
    std::vector<std::vector<double>> transitions;
    std::vector<char> visited;
};

AssembledInputs assemble_estimation_inputs(const PanelFrequencies& freq);

struct FitMetrics {
    std::vector<double> rmse; // per action; NaN at the benchmark
    std::vector<double> r2;   // per action; NaN at the benchmark
    int states_used = 0;
};

/// RMSE and R^2 per non-benchmark action over the given states only.
FitMetrics fit_metrics(const std::vector<std::vector<double>>& estimated,
                       const std::vector<std::vector<double>>& truth,
                       const std::vector<int>& states, int benchmark);

struct ReplicationResult {
    FitMetrics metrics;
    std::uint64_t seed = 0;
};

/**
 * One finite-sample replication: simulate a panel from the solved model,
 * re-estimate CCPs and transitions by frequency, run the payoff recovery
 * with the given discretized shocks (selection policy; sampled CCPs touch
 * the boundary routinely), and score fit on states that are both visited
 * and interior.
 */
ReplicationResult run_replication(const DdcModel& model, const ModelSolution& solution,
                                  const std::vector<DiscreteShocks>& shocks_by_state,
                                  int n_agents, int n_periods, std::uint64_t seed);

struct SweepRow {
    std::array<double, 3> p;
    int n_draws = 0;
    std::uint64_t seed = 0;
    std::array<double, 3> width;
};

/**
 * Identified-set widths across a grid of interior 3-choice CCPs. One shock
 * set is drawn per (draw count, seed index) pair and shared by the whole
 * grid; rows come out in (draw count, seed, grid point) order.
 */
std::vector<SweepRow> shrinkage_sweep(const std::vector<std::array<double, 3>>& grid,
                                      const std::vector<int>& draw_counts, int n_seeds,
                                      const ShockSpec& spec, std::uint64_t master_seed);

/// Interior lattice {(i,j,k)/d : i+j+k = d, all >= 1} in lexicographic order.
std::vector<std::array<double, 3>> simplex_lattice(int denominator);

} // namespace mta
