#include "mta/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mta/errors.hpp"
#include "mta/rng.hpp"

namespace mta {

DdcModel build_resource_model(const ResourceModelSpec& spec) {
    const int n = spec.n_states;
    if (n < 4) throw validation_error("resource model: need at least 4 states");
    if (!(spec.beta >= 0.0 && spec.beta < 1.0))
        throw validation_error("resource model: beta must lie in [0,1)");
    if (spec.pi.size() != 4)
        throw validation_error("resource model: pi must have 4 entries");
    double s = 0.0;
    for (double v : spec.pi) {
        if (v < 0.0) throw validation_error("resource model: pi entries must be nonnegative");
        s += v;
    }
    if (std::fabs(s - 1.0) > 1e-12)
        throw validation_error("resource model: pi must sum to 1");
    if (spec.cov2.size() != 4)
        throw validation_error("resource model: cov2 must be 2x2");
    const double c00 = spec.cov2[0], c01 = spec.cov2[1], c10 = spec.cov2[2], c11 = spec.cov2[3];
    if (std::fabs(c01 - c10) > 1e-12)
        throw validation_error("resource model: cov2 must be symmetric");
    if (c00 < 0.0 || c11 < 0.0 || c00 * c11 - c01 * c10 < -1e-12)
        throw validation_error("resource model: cov2 must be positive semidefinite");

    DdcModel model;
    model.n_actions = 3;
    model.beta = spec.beta;
    model.benchmark = 2;
    model.state_values.resize(n);
    for (int i = 0; i < n; ++i) model.state_values[i] = i + 1;

    model.flows.assign(3, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        const double x = model.state_values[i];
        model.flows[0][i] = 0.5 * std::sqrt(x) - 2.0;
        model.flows[1][i] = 0.4 * std::sqrt(x) - 2.0;
        // flows[2] stays 0: waiting is the benchmark.
    }

    model.transitions.assign(3, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
    auto put = [&](int y, int x, int value, double prob) {
        // values land on 1..n; anything above stacks at the cap
        const int j = std::min(value, n) - 1;
        model.transitions[y][static_cast<std::size_t>(x) * n + j] += prob;
    };
    for (int x = 0; x < n; ++x) {
        const int v = x + 1;
        for (int k = 0; k < 4; ++k) {
            put(0, x, 1 + k, spec.pi[k]);
            put(1, x, std::max(1 + k, v - 10 + k), spec.pi[k]);
            put(2, x, v + k, spec.pi[k]);
        }
    }

    // Shock differences (eps0 - eps2, eps1 - eps2) are jointly normal; the
    // benchmark coordinate is pinned at zero by embedding the 2x2 covariance
    // in a singular 3x3 one.
    std::vector<double> cov3(9, 0.0);
    cov3[0] = c00;
    cov3[1] = c01;
    cov3[3] = c10;
    cov3[4] = c11;
    model.shocks = ShockSpec::multivariate_normal(std::vector<double>(3, 0.0), cov3);

    validate(model);
    return model;
}

PanelData simulate_panel(const ModelSolution& solution, const DdcModel& model, int n_agents,
                         int n_periods, std::uint64_t seed) {
    validate(model);
    const int n = model.n_states();
    const int m = model.n_actions;
    if (n_agents < 1) throw validation_error("simulate_panel: need at least one agent");
    if (n_periods < 1) throw validation_error("simulate_panel: need at least one period");
    if (static_cast<int>(solution.w.size()) != m)
        throw validation_error("simulate_panel: solution action count mismatch");
    for (int y = 0; y < m; ++y)
        if (static_cast<int>(solution.w[y].size()) != n)
            throw validation_error("simulate_panel: solution state count mismatch");

    std::vector<ShockSampler> samplers;
    samplers.reserve(n);
    for (int x = 0; x < n; ++x) {
        ShockSpec resolved =
            resolve_for_state(model.shocks, static_cast<int>(model.state_values[x]));
        if (resolved.dim != m)
            throw validation_error("simulate_panel: shock dimension != action count");
        samplers.emplace_back(std::move(resolved));
    }

    // cumulative transition rows, one per (action, state), for Rng64::pick
    std::vector<std::vector<double>> cum(m);
    for (int y = 0; y < m; ++y) {
        cum[y].resize(static_cast<std::size_t>(n) * n);
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                acc += model.transitions[y][static_cast<std::size_t>(x) * n + j];
                cum[y][static_cast<std::size_t>(x) * n + j] = acc;
            }
        }
    }

    Rng64 rng(seed);
    PanelData panel;
    panel.n_agents = n_agents;
    panel.n_periods = n_periods;
    panel.records.reserve(static_cast<std::size_t>(n_agents) * n_periods);
    std::vector<double> eps(m);
    for (int i = 0; i < n_agents; ++i) {
        int x = std::min(static_cast<int>(rng.uniform() * n), n - 1);
        for (int t = 0; t < n_periods; ++t) {
            samplers[x].draw(rng, eps.data());
            int best = 0;
            double best_v = solution.w[0][x] + eps[0];
            for (int y = 1; y < m; ++y) {
                const double v = solution.w[y][x] + eps[y];
                if (v > best_v) {
                    best_v = v;
                    best = y;
                }
            }
            panel.records.push_back({i, t, x, best});
            x = rng.pick(cum[best].data() + static_cast<std::size_t>(x) * n, n);
        }
    }
    return panel;
}

PanelFrequencies estimate_ccp_and_transitions(const PanelData& panel, int n_states,
                                              int n_actions) {
    if (n_states < 1 || n_actions < 1)
        throw validation_error("panel frequencies: need positive state and action counts");
    for (const PanelRecord& r : panel.records) {
        if (r.state < 0 || r.state >= n_states)
            throw validation_error("panel frequencies: state out of range at agent "
                                   + std::to_string(r.agent) + ", period "
                                   + std::to_string(r.period));
        if (r.action < 0 || r.action >= n_actions)
            throw validation_error("panel frequencies: action out of range at agent "
                                   + std::to_string(r.agent) + ", period "
                                   + std::to_string(r.period));
    }

    std::vector<PanelRecord> sorted = panel.records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const PanelRecord& a, const PanelRecord& b) {
        if (a.agent != b.agent) return a.agent < b.agent;
        return a.period < b.period;
    });
    for (std::size_t k = 1; k < sorted.size(); ++k)
        if (sorted[k].agent == sorted[k - 1].agent && sorted[k].period == sorted[k - 1].period)
            throw validation_error("panel frequencies: duplicate observation for agent "
                                   + std::to_string(sorted[k].agent) + ", period "
                                   + std::to_string(sorted[k].period));

    PanelFrequencies freq;
    freq.n_states = n_states;
    freq.n_actions = n_actions;
    freq.visits.assign(n_states, 0);
    freq.ccp.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
    freq.trans.assign(n_actions,
                      std::vector<double>(static_cast<std::size_t>(n_states) * n_states, 0.0));
    freq.trans_obs.assign(n_actions, std::vector<long>(n_states, 0));

    for (const PanelRecord& r : sorted) {
        freq.visits[r.state] += 1;
        freq.ccp[static_cast<std::size_t>(r.state) * n_actions + r.action] += 1.0;
    }
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        const PanelRecord& prev = sorted[k - 1];
        const PanelRecord& cur = sorted[k];
        if (cur.agent != prev.agent || cur.period != prev.period + 1) continue;
        freq.trans[prev.action][static_cast<std::size_t>(prev.state) * n_states + cur.state] +=
            1.0;
        freq.trans_obs[prev.action][prev.state] += 1;
    }

    for (int x = 0; x < n_states; ++x) {
        if (freq.visits[x] == 0) continue;
        const double inv = 1.0 / static_cast<double>(freq.visits[x]);
        for (int y = 0; y < n_actions; ++y)
            freq.ccp[static_cast<std::size_t>(x) * n_actions + y] *= inv;
    }
    for (int y = 0; y < n_actions; ++y)
        for (int x = 0; x < n_states; ++x) {
            if (freq.trans_obs[y][x] == 0) continue;
            const double inv = 1.0 / static_cast<double>(freq.trans_obs[y][x]);
            for (int j = 0; j < n_states; ++j)
                freq.trans[y][static_cast<std::size_t>(x) * n_states + j] *= inv;
        }
    return freq;
}

AssembledInputs assemble_estimation_inputs(const PanelFrequencies& freq) {
    const int n = freq.n_states;
    const int m = freq.n_actions;
    AssembledInputs out;
    out.ccps.reserve(n);
    out.visited.assign(n, 0);
    for (int x = 0; x < n; ++x) {
        std::vector<double> row(m);
        if (freq.visits[x] > 0) {
            out.visited[x] = 1;
            for (int y = 0; y < m; ++y)
                row[y] = freq.ccp[static_cast<std::size_t>(x) * m + y];
        } else {
            // placeholder kept exactly on the simplex; masked by visited
            double acc = 0.0;
            for (int y = 0; y + 1 < m; ++y) {
                row[y] = 1.0 / m;
                acc += row[y];
            }
            row[m - 1] = 1.0 - acc;
        }
        out.ccps.emplace_back(std::move(row));
    }
    out.transitions = freq.trans;
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < n; ++x)
            if (freq.trans_obs[y][x] == 0)
                out.transitions[y][static_cast<std::size_t>(x) * n + x] = 1.0;
    return out;
}

FitMetrics fit_metrics(const std::vector<std::vector<double>>& estimated,
                       const std::vector<std::vector<double>>& truth,
                       const std::vector<int>& states, int benchmark) {
    const int m = static_cast<int>(truth.size());
    if (static_cast<int>(estimated.size()) != m)
        throw validation_error("fit metrics: action count mismatch");
    if (m < 1) throw validation_error("fit metrics: no actions");
    if (benchmark < 0 || benchmark >= m)
        throw validation_error("fit metrics: benchmark out of range");
    if (states.empty()) throw validation_error("fit metrics: no states to score");
    const int n = static_cast<int>(truth[0].size());
    for (int y = 0; y < m; ++y)
        if (static_cast<int>(estimated[y].size()) != n
            || static_cast<int>(truth[y].size()) != n)
            throw validation_error("fit metrics: state count mismatch at action "
                                   + std::to_string(y));
    for (int x : states)
        if (x < 0 || x >= n) throw validation_error("fit metrics: state index out of range");

    const double nan = std::nan("");
    FitMetrics out;
    out.states_used = static_cast<int>(states.size());
    out.rmse.assign(m, nan);
    out.r2.assign(m, nan);
    for (int y = 0; y < m; ++y) {
        if (y == benchmark) continue;
        double mean_t = 0.0;
        for (int x : states) mean_t += truth[y][x];
        mean_t /= static_cast<double>(states.size());
        double ss_res = 0.0, ss_tot = 0.0;
        for (int x : states) {
            const double d = estimated[y][x] - truth[y][x];
            ss_res += d * d;
            const double c = truth[y][x] - mean_t;
            ss_tot += c * c;
        }
        out.rmse[y] = std::sqrt(ss_res / static_cast<double>(states.size()));
        out.r2[y] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : nan;
    }
    return out;
}

ReplicationResult run_replication(const DdcModel& model, const ModelSolution& solution,
                                  const std::vector<DiscreteShocks>& shocks_by_state,
                                  int n_agents, int n_periods, std::uint64_t seed) {
    const int n = model.n_states();
    const int m = model.n_actions;
    PanelData panel = simulate_panel(solution, model, n_agents, n_periods, seed);
    PanelFrequencies freq = estimate_ccp_and_transitions(panel, n, m);
    AssembledInputs inputs = assemble_estimation_inputs(freq);
    EstimationResult est = estimate(inputs.ccps, inputs.transitions, model.beta, shocks_by_state,
                                    model.benchmark, false, BoundaryPolicy::selection);
    std::vector<int> score_states;
    for (int x : est.identified_states)
        if (inputs.visited[x]) score_states.push_back(x);
    ReplicationResult out;
    if (score_states.empty()) {
        // nothing both visited and interior; report an empty score, not an error
        out.metrics.rmse.assign(m, std::nan(""));
        out.metrics.r2.assign(m, std::nan(""));
        out.metrics.states_used = 0;
    } else {
        out.metrics = fit_metrics(est.flows, model.flows, score_states, model.benchmark);
    }
    out.seed = seed;
    return out;
}

std::vector<std::array<double, 3>> simplex_lattice(int denominator) {
    if (denominator < 3)
        throw validation_error("simplex lattice: denominator must be at least 3");
    std::vector<std::array<double, 3>> grid;
    const double d = denominator;
    for (int i = 1; i + 2 <= denominator; ++i)
        for (int j = 1; i + j + 1 <= denominator; ++j) {
            const int k = denominator - i - j;
            grid.push_back({i / d, j / d, k / d});
        }
    return grid;
}

std::vector<SweepRow> shrinkage_sweep(const std::vector<std::array<double, 3>>& grid,
                                      const std::vector<int>& draw_counts, int n_seeds,
                                      const ShockSpec& spec, std::uint64_t master_seed) {
    if (grid.empty()) throw validation_error("shrinkage sweep: empty grid");
    if (draw_counts.empty()) throw validation_error("shrinkage sweep: no draw counts");
    if (n_seeds < 1) throw validation_error("shrinkage sweep: need at least one seed");
    if (spec.dim != 3) throw validation_error("shrinkage sweep: shock dimension must be 3");

    std::vector<SweepRow> rows;
    rows.reserve(grid.size() * draw_counts.size() * static_cast<std::size_t>(n_seeds));
    for (std::size_t si = 0; si < draw_counts.size(); ++si)
        for (int k = 0; k < n_seeds; ++k) {
            const std::uint64_t seed =
                derive_seed(master_seed, "sweep", si * static_cast<std::uint64_t>(n_seeds) + k);
            const DiscreteShocks shocks = discretize(spec, draw_counts[si], seed);
            for (const std::array<double, 3>& g : grid) {
                CcpVector p(std::vector<double>{g[0], g[1], g[2]});
                TransportSolution sol = solve_transport(p, shocks);
                IdentifiedSetBounds b = identified_set_bounds(p, shocks, sol);
                SweepRow row;
                row.p = g;
                row.n_draws = draw_counts[si];
                row.seed = seed;
                row.width = {b.width(0), b.width(1), b.width(2)};
                rows.push_back(row);
            }
        }
    return rows;
}

} // namespace mta
