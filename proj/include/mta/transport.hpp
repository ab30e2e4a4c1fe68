#pragma once

#include <cstdint>
#include <vector>

#include "mta/shocks.hpp"
#include "mta/surplus.hpp"

namespace mta {

/**
 * Semi-discrete assignment between choices and shock draws.
 *
 * The primal problem maximizes total matching gain
 *     sum_{y,s} pi_{ys} * eps_y^s
 * over couplings pi >= 0 with row marginals p_y and column marginals 1/S.
 * Its optimal value equals minus the convex conjugate of the surplus
 * function at p, so conjugate(p) = -primal_objective.
 *
 * Duals are stated in the same maximization convention:
 *     lambda_y + z_s >= eps_y^s  for every (y,s),
 * with equality on the support of an optimal coupling. Reported duals are
 * normalized to mean(z) = 0, which makes w0_y = -lambda_y the zero-surplus
 * payoff vector directly (adding a constant to lambda and subtracting it
 * from z changes nothing else).
 */
struct TransportProblem {
    CcpVector p;
    DiscreteShocks shocks;

    /// Validates dimensions and scaling caps (S <= 200000, choices <= 50).
    static TransportProblem create(CcpVector p, DiscreteShocks shocks);
};

struct CouplingEntry {
    int y;
    int s;
    double mass;
};

struct TransportSolution {
    /// Basic arcs of the terminal tree, sorted by (y, s). Degenerate entries
    /// carry zero mass; positive entries are the support of the coupling.
    std::vector<CouplingEntry> coupling;
    std::vector<double> lambda; // one per choice
    std::vector<double> z;      // one per draw, normalized to mean zero
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    long iterations = 0;
    bool basis_degenerate = false;
};

TransportSolution solve_transport(const TransportProblem& problem);
TransportSolution solve_transport(const CcpVector& p, const DiscreteShocks& shocks);

struct InversionResult {
    PayoffVector w0;         // zero-surplus payoffs rationalizing p
    double gstar = 0.0;      // conjugate of the surplus function at p
    double surplus_residual = 0.0; // surplus_value(w0), ~0 by construction
    TransportSolution solution;
};

/**
 * Recovers the unique zero-surplus payoff vector consistent with interior p
 * under the discretized shock measure: w0_y = -(lambda_y + mean(z)).
 * Throws identification_error if p has a zero entry.
 */
InversionResult invert_ccp(const CcpVector& p, const DiscreteShocks& shocks);

/**
 * Per-choice bounds of the set of zero-surplus payoff vectors consistent
 * with p. With a connected optimal support the set is a single point and
 * lower == upper == w0. Entries of p equal to zero leave the corresponding
 * component bounded on one side only (lower = -infinity).
 */
struct IdentifiedSetBounds {
    std::vector<double> lower;
    std::vector<double> upper;

    double width(int y) const { return upper[y] - lower[y]; }
    double max_width() const;
};

IdentifiedSetBounds identified_set_bounds(const CcpVector& p, const DiscreteShocks& shocks,
                                          const TransportSolution& base);

/**
 * |surplus(w) + conjugate(p) - sum_y p_y w_y| under the discretized measure.
 * Zero exactly when w is a subgradient-consistent payoff for p; strictly
 * positive otherwise.
 */
double fenchel_check(const PayoffVector& w, const CcpVector& p, const DiscreteShocks& shocks);

} // namespace mta
