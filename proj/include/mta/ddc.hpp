#pragma once

#include <cstdint>
#include <vector>

#include "mta/shocks.hpp"
#include "mta/surplus.hpp"
#include "mta/transport.hpp"

namespace mta {

/**
 * Finite-state dynamic discrete choice model. States are indexed 0..n-1;
 * state_values carries the numeric label each index stands for (the resource
 * design counts 1..30, the bus design 0..29), which is what flow formulas
 * and state-dependent shock laws consume.
 *
 * transitions[y] is row-major n x n with transitions[y][x*n + x'] =
 * Pr(x'|x, y). flows[y][x] is the deterministic flow payoff. benchmark is
 * the choice whose flow is pinned to zero when estimating.
 */
struct DdcModel {
    std::vector<double> state_values;
    int n_actions = 0;
    double beta = 0.0;
    std::vector<std::vector<double>> transitions;
    std::vector<std::vector<double>> flows;
    ShockSpec shocks;
    int benchmark = 0;

    int n_states() const { return static_cast<int>(state_values.size()); }
};

/// Throws validation_error on dimension, stochasticity, or range violations.
void validate(const DdcModel& model);

struct ModelSolution {
    std::vector<double> V;              // ex-ante value per state
    std::vector<std::vector<double>> w; // per action, choice-specific value per state
    std::vector<CcpVector> ccp;         // per state
    double bellman_residual = 0.0;
    long iterations = 0;
};

/**
 * Value iteration on V(x) = surplus(flows(x) + beta * T V; x) from V = 0
 * until the sup-norm step is <= tol. The map is a beta-contraction, so the
 * step sequence must not increase; that is checked every sweep.
 */
ModelSolution solve_model(const DdcModel& model,
                          const std::vector<DiscreteShocks>& shocks_by_state,
                          double tol = 1e-10, long max_iter = 100000);

/**
 * Ex-ante values from the benchmark payoffs W(x) = w0_{y0}(x): solves
 * (beta * T0 - I) V = W directly. The matrix is strictly diagonally
 * dominant for beta < 1 (checked), and the solve residual is verified
 * against 1e-10 * (1 + |W|_inf).
 */
std::vector<double> ex_ante_values(const std::vector<double>& W,
                                   const std::vector<double>& trans0, double beta);

/// flows[y][x] = w0[y][x] + V[x] - beta * sum_x' transitions[y][x*n+x'] V[x'].
std::vector<std::vector<double>> utility_flows(const std::vector<std::vector<double>>& w0,
                                               const std::vector<double>& V,
                                               const std::vector<std::vector<double>>& transitions,
                                               double beta);

/**
 * Treatment of states whose CCP touches the simplex boundary. The payoff
 * system needs the benchmark payoff at every state, so such states cannot
 * simply be dropped.
 *
 *   strict     throw identification_error naming the state when the
 *              benchmark probability itself is 0 or 1; other boundary
 *              states contribute the terminal-basis dual value and are
 *              left out of identified_states.
 *   selection  never throw; every boundary state contributes the
 *              terminal-basis dual value (for p_{y0} = 0 that is the upper
 *              end of the identified interval) and is left out of
 *              identified_states.
 */
enum class BoundaryPolicy { strict, selection };

struct EstimationResult {
    std::vector<std::vector<double>> w0;    // per action, per state
    std::vector<double> V;
    std::vector<std::vector<double>> flows; // per action, per state
    std::vector<int> identified_states;     // ascending; states with interior CCPs
    std::vector<char> identified;           // flag per state
    std::vector<IdentifiedSetBounds> bounds; // per state when requested, else empty
};

/**
 * Two-step payoff recovery: per-state inversion of the CCPs, then the
 * benchmark linear system and flow assembly. Values stored at
 * non-identified states are the deterministic dual selection described
 * above, flagged via identified; serialization is expected to mask them.
 */
EstimationResult estimate(const std::vector<CcpVector>& ccps,
                          const std::vector<std::vector<double>>& transitions, double beta,
                          const std::vector<DiscreteShocks>& shocks_by_state, int y0,
                          bool with_bounds = false,
                          BoundaryPolicy policy = BoundaryPolicy::strict);

} // namespace mta
