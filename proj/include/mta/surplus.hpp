#pragma once

#include <vector>

#include "mta/shocks.hpp"

namespace mta {

/// Choice-specific values w_y; one entry per choice.
using PayoffVector = std::vector<double>;

/// Euler-Mascheroni constant, pinned so the logit closed forms are reproducible.
inline constexpr double euler_gamma = 0.5772156649015329;

/**
 * Conditional choice probabilities. Validated on construction: entries in
 * [0,1] summing to 1 within 1e-12; interior means every entry is strictly
 * positive.
 */
struct CcpVector {
    std::vector<double> probs;
    bool interior = false;

    CcpVector() = default;
    explicit CcpVector(std::vector<double> p);

    int size() const { return static_cast<int>(probs.size()); }
    double operator[](int y) const { return probs[y]; }
};

/**
 * Expected maximum of w_y + eps_y under the discretized shock measure:
 * (1/S) * sum_s max_y (w_y + eps_y^s), summed in ascending draw order.
 */
double surplus_value(const PayoffVector& w, const DiscreteShocks& shocks);

/// Maximizing choice for one draw; ties resolve to the lowest index.
int argmax_choice(const PayoffVector& w, const DiscreteShocks& shocks, int s);

/// Fraction of draws on which each choice attains the maximum (lowest index on ties).
CcpVector choice_probs(const PayoffVector& w, const DiscreteShocks& shocks);

/// Number of draws whose top two choices are exactly tied (diagnostic).
int count_argmax_ties(const PayoffVector& w, const DiscreteShocks& shocks);

/**
 * Closed-form zero-surplus payoffs for iid Gumbel(0,1) shocks:
 * w0_y = log p_y - euler_gamma. Requires interior p.
 */
PayoffVector logit_oracle_w0(const CcpVector& p);

/**
 * Closed-form convex conjugate of the Gumbel surplus:
 * sum_y p_y log p_y - euler_gamma. Requires interior p (infinite on the boundary).
 */
double logit_gstar(const CcpVector& p);

} // namespace mta
