#include "mta/ddc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mta/errors.hpp"
#include "mta/linalg.hpp"

namespace mta {

void validate(const DdcModel& model) {
    const int n = model.n_states();
    const int m = model.n_actions;
    if (n < 1) throw validation_error("DdcModel: no states");
    if (m < 1) throw validation_error("DdcModel: no actions");
    if (!(model.beta >= 0.0 && model.beta < 1.0))
        throw validation_error("DdcModel: beta must lie in [0,1)");
    if (model.benchmark < 0 || model.benchmark >= m)
        throw validation_error("DdcModel: benchmark action out of range");
    if (static_cast<int>(model.transitions.size()) != m)
        throw validation_error("DdcModel: need one transition matrix per action");
    if (static_cast<int>(model.flows.size()) != m)
        throw validation_error("DdcModel: need one flow vector per action");
    for (int y = 0; y < m; ++y) {
        if (static_cast<int>(model.flows[y].size()) != n)
            throw validation_error("DdcModel: flow vector length mismatch at action "
                                   + std::to_string(y));
        const std::vector<double>& t = model.transitions[y];
        if (static_cast<int>(t.size()) != n * n)
            throw validation_error("DdcModel: transition matrix shape mismatch at action "
                                   + std::to_string(y));
        for (int x = 0; x < n; ++x) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                const double v = t[static_cast<std::size_t>(x) * n + j];
                if (v < 0.0)
                    throw validation_error("DdcModel: negative transition probability at action "
                                           + std::to_string(y) + ", state " + std::to_string(x));
                row += v;
            }
            if (std::fabs(row - 1.0) > 1e-12)
                throw validation_error("DdcModel: transition row does not sum to 1 at action "
                                       + std::to_string(y) + ", state " + std::to_string(x));
        }
    }
}

namespace {

void check_shocks(const std::vector<DiscreteShocks>& shocks_by_state, int n, int m,
                  const char* who) {
    if (static_cast<int>(shocks_by_state.size()) != n)
        throw validation_error(std::string(who) + ": need one shock set per state");
    for (int x = 0; x < n; ++x)
        if (shocks_by_state[x].dim != m)
            throw validation_error(std::string(who) + ": shock dimension != action count at state "
                                   + std::to_string(x));
}

} // namespace

ModelSolution solve_model(const DdcModel& model,
                          const std::vector<DiscreteShocks>& shocks_by_state, double tol,
                          long max_iter) {
    validate(model);
    const int n = model.n_states();
    const int m = model.n_actions;
    check_shocks(shocks_by_state, n, m, "solve_model");
    if (!(tol > 0.0)) throw validation_error("solve_model: tol must be positive");

    ModelSolution sol;
    sol.V.assign(n, 0.0);
    std::vector<double> next(n, 0.0);
    PayoffVector wx(m);
    double prev_res = HUGE_VAL;
    long it = 0;
    for (; it < max_iter; ++it) {
        double res = 0.0;
        for (int x = 0; x < n; ++x) {
            for (int y = 0; y < m; ++y) {
                const double* row = model.transitions[y].data() + static_cast<std::size_t>(x) * n;
                double cont = 0.0;
                for (int j = 0; j < n; ++j) cont += row[j] * sol.V[j];
                wx[y] = model.flows[y][x] + model.beta * cont;
            }
            next[x] = surplus_value(wx, shocks_by_state[x]);
            res = std::max(res, std::fabs(next[x] - sol.V[x]));
        }
        sol.V.swap(next);
        if (res > prev_res + 1e-12)
            throw numerical_error("solve_model: contraction violated (residual "
                                  + std::to_string(res) + " after " + std::to_string(prev_res)
                                  + ")");
        prev_res = res;
        if (res <= tol) { ++it; break; }
    }
    if (prev_res > tol)
        throw numerical_error("solve_model: no convergence after " + std::to_string(max_iter)
                              + " iterations; residual " + std::to_string(prev_res));

    sol.iterations = it;
    sol.bellman_residual = prev_res;
    sol.w.assign(m, std::vector<double>(n, 0.0));
    sol.ccp.reserve(n);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < m; ++y) {
            const double* row = model.transitions[y].data() + static_cast<std::size_t>(x) * n;
            double cont = 0.0;
            for (int j = 0; j < n; ++j) cont += row[j] * sol.V[j];
            sol.w[y][x] = model.flows[y][x] + model.beta * cont;
            wx[y] = sol.w[y][x];
        }
        sol.ccp.push_back(choice_probs(wx, shocks_by_state[x]));
    }
    return sol;
}

std::vector<double> ex_ante_values(const std::vector<double>& W,
                                   const std::vector<double>& trans0, double beta) {
    const int n = static_cast<int>(W.size());
    if (static_cast<int>(trans0.size()) != n * n)
        throw validation_error("ex_ante_values: transition matrix shape mismatch");
    if (!(beta >= 0.0 && beta < 1.0))
        throw validation_error("ex_ante_values: beta must lie in [0,1)");

    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = beta * trans0[static_cast<std::size_t>(x) * n + j];
            a[static_cast<std::size_t>(x) * n + j] = v - (j == x ? 1.0 : 0.0);
            if (j != x) off += std::fabs(v);
        }
        if (std::fabs(a[static_cast<std::size_t>(x) * n + x]) <= off)
            throw validation_error("ex_ante_values: system not strictly diagonally dominant at row "
                                   + std::to_string(x));
    }

    std::vector<double> V = lu_solve(a, W, n);

    double wmax = 0.0, rmax = 0.0;
    for (double v : W) wmax = std::max(wmax, std::fabs(v));
    for (int x = 0; x < n; ++x) {
        double ax = 0.0;
        for (int j = 0; j < n; ++j)
            ax += (beta * trans0[static_cast<std::size_t>(x) * n + j] - (j == x ? 1.0 : 0.0)) * V[j];
        rmax = std::max(rmax, std::fabs(ax - W[x]));
    }
    if (rmax > 1e-10 * (1.0 + wmax))
        throw numerical_error("ex_ante_values: solve residual " + std::to_string(rmax));
    return V;
}

std::vector<std::vector<double>> utility_flows(const std::vector<std::vector<double>>& w0,
                                               const std::vector<double>& V,
                                               const std::vector<std::vector<double>>& transitions,
                                               double beta) {
    const int m = static_cast<int>(w0.size());
    const int n = static_cast<int>(V.size());
    if (static_cast<int>(transitions.size()) != m)
        throw validation_error("utility_flows: need one transition matrix per action");
    std::vector<std::vector<double>> flows(m, std::vector<double>(n, 0.0));
    for (int y = 0; y < m; ++y) {
        if (static_cast<int>(w0[y].size()) != n ||
            static_cast<int>(transitions[y].size()) != n * n)
            throw validation_error("utility_flows: shape mismatch at action " + std::to_string(y));
        for (int x = 0; x < n; ++x) {
            const double* row = transitions[y].data() + static_cast<std::size_t>(x) * n;
            double cont = 0.0;
            for (int j = 0; j < n; ++j) cont += row[j] * V[j];
            flows[y][x] = w0[y][x] + V[x] - beta * cont;
        }
    }
    return flows;
}

EstimationResult estimate(const std::vector<CcpVector>& ccps,
                          const std::vector<std::vector<double>>& transitions, double beta,
                          const std::vector<DiscreteShocks>& shocks_by_state, int y0,
                          bool with_bounds, BoundaryPolicy policy) {
    const int n = static_cast<int>(ccps.size());
    const int m = static_cast<int>(transitions.size());
    if (n < 1) throw validation_error("estimate: no states");
    if (m < 1) throw validation_error("estimate: no transition matrices");
    if (y0 < 0 || y0 >= m) throw validation_error("estimate: benchmark action out of range");
    if (!(beta >= 0.0 && beta < 1.0)) throw validation_error("estimate: beta must lie in [0,1)");
    check_shocks(shocks_by_state, n, m, "estimate");
    for (int x = 0; x < n; ++x)
        if (ccps[x].size() != m)
            throw validation_error("estimate: CCP length != action count at state "
                                   + std::to_string(x));
    for (int y = 0; y < m; ++y) {
        if (static_cast<int>(transitions[y].size()) != n * n)
            throw validation_error("estimate: transition matrix shape mismatch at action "
                                   + std::to_string(y));
        for (int x = 0; x < n; ++x) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                const double v = transitions[y][static_cast<std::size_t>(x) * n + j];
                if (v < 0.0)
                    throw validation_error("estimate: negative transition probability at action "
                                           + std::to_string(y) + ", state " + std::to_string(x));
                row += v;
            }
            if (std::fabs(row - 1.0) > 1e-12)
                throw validation_error("estimate: transition row does not sum to 1 at action "
                                       + std::to_string(y) + ", state " + std::to_string(x));
        }
    }

    EstimationResult res;
    res.w0.assign(m, std::vector<double>(n, 0.0));
    res.identified.assign(n, 0);
    if (with_bounds) res.bounds.resize(n);

    for (int x = 0; x < n; ++x) {
        const CcpVector& p = ccps[x];
        TransportSolution sol;
        if (p.interior) {
            InversionResult inv = invert_ccp(p, shocks_by_state[x]);
            for (int y = 0; y < m; ++y) res.w0[y][x] = inv.w0[y];
            res.identified[x] = 1;
            res.identified_states.push_back(x);
            sol = std::move(inv.solution);
        } else {
            if (policy == BoundaryPolicy::strict && (p[y0] == 0.0 || p[y0] == 1.0))
                throw identification_error(
                    "estimate: benchmark choice probability is "
                    + std::to_string(p[y0]) + " at state " + std::to_string(x)
                    + "; the payoff system cannot be assembled");
            sol = solve_transport(p, shocks_by_state[x]);
            for (int y = 0; y < m; ++y) res.w0[y][x] = -sol.lambda[y];
        }
        if (with_bounds)
            res.bounds[x] = identified_set_bounds(p, shocks_by_state[x], sol);
    }

    std::vector<double> W(n);
    for (int x = 0; x < n; ++x) W[x] = res.w0[y0][x];
    res.V = ex_ante_values(W, transitions[y0], beta);
    res.flows = utility_flows(res.w0, res.V, transitions, beta);
    return res;
}

} // namespace mta
