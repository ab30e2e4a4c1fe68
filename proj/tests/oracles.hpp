// Independent reference implementations the tests compare the library
// against. Everything here is deliberately naive: dense Gaussian solves,
// exhaustive enumeration of basis trees and dual vertices. Usable only at
// toy sizes, which is the point.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mta/shocks.hpp"
#include "mta/surplus.hpp"

namespace oracle {

// Dense Gaussian elimination with partial pivoting. Returns false when the
// matrix is singular to working precision.
inline bool solve_dense(std::vector<double> a, std::vector<double> b, int n,
                        std::vector<double>& out) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
        if (std::fabs(a[piv * n + c]) < 1e-12) return false;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
            std::swap(b[c], b[piv]);
        }
        for (int r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            if (f == 0.0) continue;
            for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
            b[r] -= f * b[c];
        }
    }
    out.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double v = b[r];
        for (int j = r + 1; j < n; ++j) v -= a[r * n + j] * out[j];
        out[r] = v / a[r * n + r];
    }
    return true;
}

template <class F>
inline void for_each_combination(int n, int k, F&& f) {
    std::vector<char> mask(n, 0);
    std::fill(mask.begin(), mask.begin() + k, 1);
    do {
        f(mask);
    } while (std::prev_permutation(mask.begin(), mask.end()));
}

// Maximum of sum pi_{ys} eps_y^s over couplings with row marginals p and
// column marginals 1/S, by enumerating every spanning tree of the bipartite
// graph and keeping the feasible ones. C(m*S, m+S-1) subsets, so toy only.
inline double brute_force_transport(const std::vector<double>& p,
                                    const mta::DiscreteShocks& shocks) {
    const int m = shocks.dim, S = shocks.n_draws;
    const int arcs = m * S, nodes = m + S, edges = nodes - 1;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> up(nodes), deg(nodes);
    std::vector<double> rem(nodes), flow(edges);
    std::vector<int> sel(edges);
    for_each_combination(arcs, edges, [&](const std::vector<char>& mask) {
        int cnt = 0;
        for (int a = 0; a < arcs; ++a)
            if (mask[a]) sel[cnt++] = a;
        for (int v = 0; v < nodes; ++v) up[v] = v;
        auto find = [&](int x) {
            while (up[x] != x) x = up[x] = up[up[x]];
            return x;
        };
        for (int e = 0; e < edges; ++e) {
            const int y = sel[e] % m, s = sel[e] / m;
            const int ra = find(y), rb = find(m + s);
            if (ra == rb) return; // cycle
            up[ra] = rb;
        }
        // acyclic with nodes-1 edges => spanning tree; peel leaves to solve
        for (int v = 0; v < nodes; ++v) deg[v] = 0;
        for (int e = 0; e < edges; ++e) {
            ++deg[sel[e] % m];
            ++deg[m + sel[e] / m];
        }
        for (int y = 0; y < m; ++y) rem[y] = p[y];
        for (int s = 0; s < S; ++s) rem[m + s] = 1.0 / S;
        std::vector<char> used(edges, 0);
        bool ok = true;
        for (int round = 0; round < edges; ++round) {
            int pick = -1;
            for (int e = 0; e < edges && pick < 0; ++e) {
                if (used[e]) continue;
                const int y = sel[e] % m, s = sel[e] / m;
                if (deg[y] == 1 || deg[m + s] == 1) pick = e;
            }
            if (pick < 0) { ok = false; break; }
            const int y = sel[pick] % m, s = sel[pick] / m;
            const int leaf = deg[y] == 1 ? y : m + s;
            const int othr = leaf == y ? m + s : y;
            flow[pick] = rem[leaf];
            rem[othr] -= rem[leaf];
            rem[leaf] = 0.0;
            used[pick] = 1;
            --deg[y];
            --deg[m + s];
        }
        if (!ok) return;
        double obj = 0.0;
        for (int e = 0; e < edges; ++e) {
            if (flow[e] < -1e-12) return; // infeasible basis
            obj += flow[e] * shocks.at(sel[e] / m, sel[e] % m);
        }
        if (obj > best) best = obj;
    });
    return best;
}

// Per-choice extremes of lambda over the optimal dual face
//   { (lambda, z) : lambda_y + z_s >= eps_y^s, sum_s z_s = 0,
//                   sum_y p_y lambda_y = objective }
// by enumerating candidate vertices (subsets of m+S-2 active inequalities on
// top of the two equalities). Requires interior p so the face is bounded.
struct DualFace {
    std::vector<double> lam_lo, lam_hi;
    bool found = false;
};

inline DualFace enumerate_dual_face(const std::vector<double>& p,
                                    const mta::DiscreteShocks& shocks, double objective) {
    const int m = shocks.dim, S = shocks.n_draws;
    const int nv = m + S;
    DualFace face;
    face.lam_lo.assign(m, std::numeric_limits<double>::infinity());
    face.lam_hi.assign(m, -std::numeric_limits<double>::infinity());
    double gmax = 0.0;
    for (double v : shocks.points) gmax = std::max(gmax, std::fabs(v));
    const double feas_tol = 1e-9 * (1.0 + gmax);
    std::vector<double> a, b, x;
    for_each_combination(m * S, nv - 2, [&](const std::vector<char>& mask) {
        a.assign(static_cast<std::size_t>(nv) * nv, 0.0);
        b.assign(nv, 0.0);
        int r = 0;
        for (int arc = 0; arc < m * S; ++arc) {
            if (!mask[arc]) continue;
            const int y = arc % m, s = arc / m;
            a[r * nv + y] = 1.0;
            a[r * nv + m + s] = 1.0;
            b[r] = shocks.at(s, y);
            ++r;
        }
        for (int s = 0; s < S; ++s) a[r * nv + m + s] = 1.0;
        b[r++] = 0.0;
        for (int y = 0; y < m; ++y) a[r * nv + y] = p[y];
        b[r++] = objective;
        if (!solve_dense(a, b, nv, x)) return;
        for (int y = 0; y < m; ++y)
            for (int s = 0; s < S; ++s)
                if (x[y] + x[m + s] < shocks.at(s, y) - feas_tol) return;
        face.found = true;
        for (int y = 0; y < m; ++y) {
            face.lam_lo[y] = std::min(face.lam_lo[y], x[y]);
            face.lam_hi[y] = std::max(face.lam_hi[y], x[y]);
        }
    });
    return face;
}

inline double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); }

inline double gumbel_cdf(double x, double scale) { return std::exp(-std::exp(-x / scale)); }

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
template <class Cdf>
inline double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::fabs(f - (i + 1) / n));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

inline std::vector<double> random_simplex(std::mt19937_64& g, int m) {
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> p(m);
    double tot = 0.0;
    for (int y = 0; y < m; ++y) tot += p[y] = ex(g);
    double acc = 0.0;
    for (int y = 0; y + 1 < m; ++y) {
        p[y] /= tot;
        acc += p[y];
    }
    p[m - 1] = 1.0 - acc;
    return p;
}

inline mta::DiscreteShocks random_shocks(std::mt19937_64& g, int m, int S, double spread = 2.0) {
    std::uniform_real_distribution<double> u(-spread, spread);
    mta::DiscreteShocks sh;
    sh.n_draws = S;
    sh.dim = m;
    sh.seed = 0;
    sh.spec = mta::ShockSpec::gumbel_iid(m);
    sh.points.resize(static_cast<std::size_t>(S) * m);
    for (double& v : sh.points) v = u(g);
    return sh;
}

} // namespace oracle
