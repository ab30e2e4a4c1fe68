#include "mta/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mta/errors.hpp"

namespace mta {

TransportProblem TransportProblem::create(CcpVector p, DiscreteShocks shocks) {
    if (p.size() != shocks.dim)
        throw validation_error("TransportProblem: probability length != shock dimension");
    if (shocks.n_draws < 1)
        throw validation_error("TransportProblem: empty shock set");
    if (shocks.n_draws > 200000)
        throw validation_error("TransportProblem: draw count exceeds the 200000 cap");
    if (shocks.dim > 50)
        throw validation_error("TransportProblem: choice count exceeds the 50 cap");
    TransportProblem prob;
    prob.p = std::move(p);
    prob.shocks = std::move(shocks);
    return prob;
}

namespace {

/**
 * Network simplex on the bipartite transportation graph: m choice nodes
 * (supplies p_y) and n draw nodes (demands 1/n each). The basis is a
 * spanning tree held as one arc slot per tree edge plus intrusive adjacency
 * lists, so a pivot touches only the re-hung subtree. Entering arcs come
 * from a round-robin block scan (best violation within the first block that
 * has one); after a run of degenerate pivots the scan falls back to Bland's
 * rule (lowest-index eligible arc, lowest-index leaving tie-break) until
 * flow moves again, which is what rules out cycling.
 */
class NetworkSimplex {
public:
    NetworkSimplex(const CcpVector& p, const DiscreteShocks& sh)
        : m_(sh.dim), n_(sh.n_draws), b_(1.0 / sh.n_draws),
          pts_(sh.points.data()), supply_(p.probs) {
        double gmax = 0.0;
        for (double v : sh.points) gmax = std::max(gmax, std::fabs(v));
        tol_ = 1e-11 * (1.0 + gmax);

        arcs_.resize(m_ + n_);
        head_.assign(m_ + n_, -1);
        parent_.assign(m_ + n_, -1);
        lam_.assign(m_, 0.0);
        zz_.assign(n_, 0.0);
        mark_.assign(m_ + n_, 0);

        if (m_ == 2) init_sorted_split();
        else init_northwest();
        recompute_duals();
    }

    void run() {
        const long max_pivots = 2000 + 20L * (m_ + n_);
        int degenerate_run = 0;
        bool bland = false;
        for (;;) {
            const long k = bland ? price_bland() : price_block();
            if (k < 0) break;
            if (++pivots_ > max_pivots)
                throw numerical_error("solve_transport: pivot limit exceeded after "
                                      + std::to_string(pivots_) + " pivots");
            const double theta = pivot(static_cast<int>(k % m_), static_cast<int>(k / m_));
            if (theta > 1e-13) {
                degenerate_run = 0;
                bland = false;
            } else if (++degenerate_run > 100) {
                bland = true;
            }
        }
        recompute_duals();
        // gauge: mean(z) = 0 so the zero-surplus payoffs are -lambda
        double zbar = std::accumulate(zz_.begin(), zz_.end(), 0.0) / n_;
        for (double& v : lam_) v += zbar;
        for (double& v : zz_) v -= zbar;
    }

    TransportSolution extract() const {
        TransportSolution sol;
        sol.coupling.reserve(m_ + n_ - 1);
        for (int slot = 0; slot < m_ + n_ - 1; ++slot) {
            const Arc& a = arcs_[slot];
            sol.coupling.push_back({a.y, a.s, std::max(a.flow, 0.0)});
        }
        std::sort(sol.coupling.begin(), sol.coupling.end(),
                  [](const CouplingEntry& l, const CouplingEntry& r) {
                      return l.y != r.y ? l.y < r.y : l.s < r.s;
                  });
        sol.lambda = lam_;
        sol.z = zz_;
        double primal = 0.0;
        for (const CouplingEntry& e : sol.coupling) primal += e.mass * gain(e.y, e.s);
        double dual = 0.0;
        for (int y = 0; y < m_; ++y) dual += supply_[y] * lam_[y];
        for (int s = 0; s < n_; ++s) dual += b_ * zz_[s];
        sol.primal_objective = primal;
        sol.dual_objective = dual;
        sol.iterations = pivots_;
        for (const CouplingEntry& e : sol.coupling)
            if (e.mass <= 1e-12) { sol.basis_degenerate = true; break; }
        return sol;
    }

private:
    struct Arc {
        int y = -1, s = -1;
        double flow = 0.0;
        int next_row = -1, prev_row = -1; // adjacency list through the row node
        int next_col = -1, prev_col = -1; // adjacency list through the col node
    };

    double gain(int y, int s) const { return pts_[static_cast<std::size_t>(s) * m_ + y]; }
    int row_node(int y) const { return y; }
    int col_node(int s) const { return m_ + s; }

    void link(int slot) {
        Arc& a = arcs_[slot];
        a.next_row = head_[row_node(a.y)];
        a.prev_row = -1;
        if (a.next_row >= 0) side_prev(a.next_row, row_node(a.y)) = slot;
        head_[row_node(a.y)] = slot;
        a.next_col = head_[col_node(a.s)];
        a.prev_col = -1;
        if (a.next_col >= 0) side_prev(a.next_col, col_node(a.s)) = slot;
        head_[col_node(a.s)] = slot;
    }

    void unlink(int slot) {
        const Arc& a = arcs_[slot];
        for (int node : {row_node(a.y), col_node(a.s)}) {
            const int nx = side_next(slot, node), pv = side_prev(slot, node);
            if (pv >= 0) side_next(pv, node) = nx; else head_[node] = nx;
            if (nx >= 0) side_prev(nx, node) = pv;
        }
    }

    int& side_next(int slot, int node) {
        return node < m_ ? arcs_[slot].next_row : arcs_[slot].next_col;
    }
    int& side_prev(int slot, int node) {
        return node < m_ ? arcs_[slot].prev_row : arcs_[slot].prev_col;
    }
    int side_next_c(int slot, int node) const {
        return node < m_ ? arcs_[slot].next_row : arcs_[slot].next_col;
    }
    int other_end(int slot, int node) const {
        const Arc& a = arcs_[slot];
        return node == row_node(a.y) ? col_node(a.s) : row_node(a.y);
    }

    void add_arc(int slot, int y, int s, double flow) {
        arcs_[slot].y = y;
        arcs_[slot].s = s;
        arcs_[slot].flow = flow;
        link(slot);
    }

    // Staircase sweep over [0,1]: choice y covers (P_{y-1}, P_y], draw s covers
    // ((s)/n, (s+1)/n]; each overlap becomes a basic arc, ties advance the row
    // first so the staircase stays a connected tree with m+n-1 arcs. Draws are
    // walked in grouped order: by preferred choice, strongest preference
    // first, so the staircase starts near the optimal assignment and the
    // boundary draws (the ones a pivot might actually move) sit next to the
    // group of the adjacent row. With one choice the order is immaterial.
    void init_northwest() {
        std::vector<int> order(n_);
        std::iota(order.begin(), order.end(), 0);
        if (m_ >= 3) {
            std::vector<int> group(n_);
            std::vector<double> margin(n_);
            for (int s = 0; s < n_; ++s) {
                int top = 0;
                for (int y = 1; y < m_; ++y)
                    if (gain(y, s) > gain(top, s)) top = y;
                double second = -std::numeric_limits<double>::infinity();
                for (int y = 0; y < m_; ++y)
                    if (y != top) second = std::max(second, gain(y, s));
                group[s] = top;
                margin[s] = gain(top, s) - second;
            }
            std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
                if (group[a] != group[c]) return group[a] < group[c];
                return margin[a] > margin[c];
            });
        }

        std::vector<double> pref(m_ + 1, 0.0);
        for (int y = 0; y < m_; ++y) pref[y + 1] = pref[y] + supply_[y];
        int y = 0, s = 0, slot = 0;
        double pos = 0.0;
        add_arc(slot, 0, order[0], 0.0);
        parent_[col_node(order[0])] = slot;
        for (;;) {
            const double ur = pref[y + 1];
            const double uc = (s + 1) * b_;
            const double nxt = std::min(ur, uc);
            arcs_[slot].flow += std::max(nxt - pos, 0.0);
            pos = nxt;
            const bool can_row = y < m_ - 1, can_col = s < n_ - 1;
            if (!can_row && !can_col) break;
            ++slot;
            if (can_row && (!can_col || ur <= uc)) {
                ++y;
                add_arc(slot, y, order[s], 0.0);
                parent_[row_node(y)] = slot;
            } else {
                ++s;
                add_arc(slot, y, order[s], 0.0);
                parent_[col_node(order[s])] = slot;
            }
        }
    }

    // Two-choice case: sorting draws by the gain difference makes the optimal
    // split a quantile, so the initial tree already prices out.
    void init_sorted_split() {
        std::vector<int> order(n_);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
            return gain(0, a) - gain(1, a) > gain(0, c) - gain(1, c);
        });
        const double p0 = supply_[0];
        int split = std::min(static_cast<int>(std::floor(p0 * n_)), n_ - 1);
        int slot = 0;
        for (int i = 0; i < split; ++i, ++slot) {
            add_arc(slot, 0, order[i], b_);
            parent_[col_node(order[i])] = slot;
        }
        const double to_row0 = std::max(p0 - split * b_, 0.0);
        add_arc(slot, 0, order[split], to_row0);
        parent_[col_node(order[split])] = slot;
        ++slot;
        add_arc(slot, 1, order[split], std::max(b_ - to_row0, 0.0));
        parent_[row_node(1)] = slot;
        ++slot;
        for (int i = split + 1; i < n_; ++i, ++slot) {
            add_arc(slot, 1, order[i], b_);
            parent_[col_node(order[i])] = slot;
        }
    }

    void recompute_duals() {
        lam_[0] = 0.0;
        std::vector<int> stack{row_node(0)};
        std::vector<int> via(m_ + n_, -1);
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            for (int slot = head_[node]; slot >= 0; slot = side_next_c(slot, node)) {
                if (slot == via[node]) continue;
                const int nxt = other_end(slot, node);
                if (nxt == row_node(0) || via[nxt] >= 0) continue;
                const Arc& a = arcs_[slot];
                if (node < m_) zz_[a.s] = gain(a.y, a.s) - lam_[a.y];
                else lam_[a.y] = gain(a.y, a.s) - zz_[a.s];
                via[nxt] = slot;
                stack.push_back(nxt);
            }
        }
    }

    // Best violating arc within the first block (round-robin) that has one.
    long price_block() {
        const long total = static_cast<long>(m_) * n_;
        const long block = std::min<long>(total, 8192);
        long scanned = 0;
        while (scanned < total) {
            const long end = std::min(cursor_ + block, total);
            long best_k = -1;
            double best_v = tol_;
            long k = cursor_;
            int y = static_cast<int>(k % m_), s = static_cast<int>(k / m_);
            for (; k < end; ++k) {
                const double v = pts_[k] - zz_[s] - lam_[y];
                if (v > best_v) { best_v = v; best_k = k; }
                if (++y == m_) { y = 0; ++s; }
            }
            scanned += end - cursor_;
            cursor_ = end < total ? end : 0;
            if (best_k >= 0) return best_k;
        }
        return -1;
    }

    long price_bland() {
        const long total = static_cast<long>(m_) * n_;
        int y = 0, s = 0;
        for (long k = 0; k < total; ++k) {
            if (pts_[k] - zz_[s] - lam_[y] > tol_) return k;
            if (++y == m_) { y = 0; ++s; }
        }
        return -1;
    }

    // One simplex step with entering arc (ye, se); returns the shifted flow.
    double pivot(int ye, int se) {
        const double viol = gain(ye, se) - lam_[ye] - zz_[se];

        // tree path between the entering endpoints, via parent walks
        path_up_.clear();
        for (int node = row_node(ye); parent_[node] >= 0;) {
            path_up_.push_back(parent_[node]);
            node = other_end(parent_[node], node);
        }
        cycle_.clear();
        cycle_.push_back(-1); // entering arc placeholder at position 0
        int meet = -1;
        {
            mark_epoch_++;
            int node = row_node(ye);
            mark_[node] = mark_epoch_;
            for (int a : path_up_) {
                node = other_end(a, node);
                mark_[node] = mark_epoch_;
            }
            node = col_node(se);
            while (mark_[node] != mark_epoch_) {
                cycle_.push_back(parent_[node]);
                node = other_end(parent_[node], node);
            }
            meet = node;
        }
        const std::size_t se_side_len = cycle_.size() - 1;
        {
            int node = row_node(ye);
            std::size_t keep = 0;
            while (node != meet) {
                ++keep;
                node = other_end(path_up_[keep - 1], node);
            }
            for (std::size_t i = keep; i-- > 0;) cycle_.push_back(path_up_[i]);
        }

        // flows alternate +viol-direction, -, +, ... around the cycle
        double theta = std::numeric_limits<double>::infinity();
        int leave_pos = -1;
        for (std::size_t i = 1; i < cycle_.size(); i += 2) {
            const Arc& a = arcs_[cycle_[i]];
            const long key = static_cast<long>(a.s) * m_ + a.y;
            if (a.flow < theta ||
                (a.flow == theta && leave_pos >= 0 &&
                 key < static_cast<long>(arcs_[cycle_[leave_pos]].s) * m_ + arcs_[cycle_[leave_pos]].y)) {
                theta = a.flow;
                leave_pos = static_cast<int>(i);
            }
        }
        const int leave_slot = cycle_[leave_pos];
        for (std::size_t i = 1; i < cycle_.size(); ++i) {
            Arc& a = arcs_[cycle_[i]];
            a.flow += (i % 2 == 1) ? -theta : theta;
        }
        arcs_[leave_slot].flow = 0.0;

        // subtree on the far side of the leaving arc gets re-hung onto the
        // entering arc and its duals shifted by the violation
        const Arc leave = arcs_[leave_slot];
        int u = (parent_[row_node(leave.y)] == leave_slot) ? row_node(leave.y)
                                                           : col_node(leave.s);
        const bool far_is_col = static_cast<std::size_t>(leave_pos) <= se_side_len;
        const int e_far = far_is_col ? col_node(se) : row_node(ye);
        const double dr = far_is_col ? -viol : viol;
        const double dc = -dr;

        dfs_stack_.clear();
        dfs_stack_.push_back(u);
        dfs_via_.clear();
        dfs_via_.push_back(leave_slot);
        while (!dfs_stack_.empty()) {
            const int node = dfs_stack_.back();
            const int via = dfs_via_.back();
            dfs_stack_.pop_back();
            dfs_via_.pop_back();
            if (node < m_) lam_[node] += dr;
            else zz_[node - m_] += dc;
            for (int slot = head_[node]; slot >= 0; slot = side_next_c(slot, node)) {
                if (slot == via || slot == leave_slot) continue;
                dfs_stack_.push_back(other_end(slot, node));
                dfs_via_.push_back(slot);
            }
        }

        // reverse parents along e_far -> u, hanging e_far on the entering arc
        {
            int node = e_far, carry = leave_slot; // slot id is reused by the entering arc
            while (node != u) {
                const int pa = parent_[node];
                parent_[node] = carry;
                carry = pa;
                node = other_end(pa, node);
            }
            parent_[u] = carry;
        }

        unlink(leave_slot);
        add_arc(leave_slot, ye, se, theta);
        return theta;
    }

    int m_, n_;
    double b_;
    const double* pts_;
    std::vector<double> supply_;
    double tol_ = 1e-11;
    std::vector<Arc> arcs_;
    std::vector<int> head_;
    std::vector<int> parent_;
    std::vector<double> lam_, zz_;
    long cursor_ = 0;
    long pivots_ = 0;
    std::vector<int> path_up_, cycle_, dfs_stack_, dfs_via_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t mark_epoch_ = 0;
};

} // namespace

TransportSolution solve_transport(const TransportProblem& problem) {
    NetworkSimplex simplex(problem.p, problem.shocks);
    simplex.run();
    TransportSolution sol = simplex.extract();

    const int m = problem.shocks.dim, n = problem.shocks.n_draws;
    std::vector<double> row_sum(m, 0.0), col_sum(n, 0.0);
    for (const CouplingEntry& e : sol.coupling) {
        row_sum[e.y] += e.mass;
        col_sum[e.s] += e.mass;
    }
    for (int y = 0; y < m; ++y)
        if (std::fabs(row_sum[y] - problem.p[y]) > 1e-10)
            throw numerical_error("solve_transport: choice marginal violated at y="
                                  + std::to_string(y));
    const double b = 1.0 / n;
    for (int s = 0; s < n; ++s)
        if (std::fabs(col_sum[s] - b) > 1e-10)
            throw numerical_error("solve_transport: draw marginal violated at s="
                                  + std::to_string(s));

    const double scale = 1.0 + std::fabs(sol.primal_objective);
    if (std::fabs(sol.primal_objective - sol.dual_objective) > 1e-9 * scale)
        throw numerical_error("solve_transport: duality gap "
                              + std::to_string(sol.primal_objective - sol.dual_objective));
    return sol;
}

TransportSolution solve_transport(const CcpVector& p, const DiscreteShocks& shocks) {
    return solve_transport(TransportProblem::create(p, shocks));
}

InversionResult invert_ccp(const CcpVector& p, const DiscreteShocks& shocks) {
    if (!p.interior)
        throw identification_error(
            "invert_ccp: probabilities on the simplex boundary are not point-identified");
    InversionResult res;
    res.solution = solve_transport(p, shocks);
    res.gstar = -res.solution.primal_objective;
    res.w0.resize(p.size());
    for (int y = 0; y < p.size(); ++y) res.w0[y] = -res.solution.lambda[y];
    res.surplus_residual = surplus_value(res.w0, shocks);
    return res;
}

double IdentifiedSetBounds::max_width() const {
    double w = 0.0;
    for (std::size_t y = 0; y < lower.size(); ++y)
        w = std::max(w, upper[y] - lower[y]);
    return w;
}

namespace {

struct UnionFind {
    std::vector<int> up;
    explicit UnionFind(int n) : up(n) { std::iota(up.begin(), up.end(), 0); }
    int find(int x) {
        while (up[x] != x) x = up[x] = up[up[x]];
        return x;
    }
    void join(int a, int b) { up[find(a)] = find(b); }
};

} // namespace

IdentifiedSetBounds identified_set_bounds(const CcpVector& p, const DiscreteShocks& shocks,
                                          const TransportSolution& base) {
    const int m = shocks.dim, n = shocks.n_draws;
    if (p.size() != m)
        throw validation_error("identified_set_bounds: probability length != shock dimension");
    if (static_cast<int>(base.lambda.size()) != m || static_cast<int>(base.z.size()) != n)
        throw validation_error("identified_set_bounds: base solution does not match the shocks");

    PayoffVector w0(m);
    double zbar = std::accumulate(base.z.begin(), base.z.end(), 0.0) / n;
    for (int y = 0; y < m; ++y) w0[y] = -(base.lambda[y] + zbar);

    // the base must price out; a violated dual constraint means it is stale
    // or belongs to a different problem
    {
        double gmax = 0.0;
        for (double v : shocks.points) gmax = std::max(gmax, std::fabs(v));
        const double slack_tol = 1e-8 * (1.0 + gmax);
        const double* pts0 = shocks.points.data();
        for (int s = 0; s < n; ++s) {
            const double zs = base.z[s];
            for (int y = 0; y < m; ++y)
                if (base.lambda[y] + zs - pts0[static_cast<std::size_t>(s) * m + y] < -slack_tol)
                    throw numerical_error("identified_set_bounds: base duals infeasible at (y="
                                          + std::to_string(y) + ", s=" + std::to_string(s) + ")");
        }
    }

    // components of the optimal support; duals move rigidly inside each one
    UnionFind uf(m + n);
    for (const CouplingEntry& e : base.coupling)
        if (e.mass > 1e-12) uf.join(e.y, m + e.s);

    std::vector<int> comp_of(m + n, -1);
    int k = 0;
    for (int v = 0; v < m + n; ++v) {
        const int r = uf.find(v);
        if (comp_of[r] < 0) comp_of[r] = k++;
        comp_of[v] = comp_of[r];
    }

    IdentifiedSetBounds out;
    out.lower = w0;
    out.upper = w0;
    if (k == 1) return out;

    std::vector<double> col_weight(k, 0.0);
    for (int s = 0; s < n; ++s) col_weight[comp_of[m + s]] += 1.0 / n;

    // tightest cross-component slack lambda_y + z_s - eps, a shortest-path weight
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(k) * k, inf);
    for (int c = 0; c < k; ++c) dist[static_cast<std::size_t>(c) * k + c] = 0.0;
    const double* pts = shocks.points.data();
    for (int s = 0; s < n; ++s) {
        const int cb = comp_of[m + s];
        const double zs = base.z[s];
        for (int y = 0; y < m; ++y) {
            const int ca = comp_of[y];
            if (ca == cb) continue;
            const double r = std::max(base.lambda[y] + zs - pts[static_cast<std::size_t>(s) * m + y], 0.0);
            double& cell = dist[static_cast<std::size_t>(ca) * k + cb];
            if (r < cell) cell = r;
        }
    }
    for (int t = 0; t < k; ++t)
        for (int i = 0; i < k; ++i) {
            const double dit = dist[static_cast<std::size_t>(i) * k + t];
            if (dit == inf) continue;
            for (int j = 0; j < k; ++j) {
                const double alt = dit + dist[static_cast<std::size_t>(t) * k + j];
                if (alt < dist[static_cast<std::size_t>(i) * k + j])
                    dist[static_cast<std::size_t>(i) * k + j] = alt;
            }
        }

    for (int y = 0; y < m; ++y) {
        const int a = comp_of[y];
        double up = 0.0, down = 0.0;
        for (int j = 0; j < k; ++j) {
            if (col_weight[j] == 0.0) continue;
            up += col_weight[j] * dist[static_cast<std::size_t>(a) * k + j];
            down += col_weight[j] * dist[static_cast<std::size_t>(j) * k + a];
        }
        out.upper[y] = w0[y] + up;
        out.lower[y] = w0[y] - down;
    }
    return out;
}

double fenchel_check(const PayoffVector& w, const CcpVector& p, const DiscreteShocks& shocks) {
    if (static_cast<int>(w.size()) != shocks.dim || p.size() != shocks.dim)
        throw validation_error("fenchel_check: dimension mismatch");
    const TransportSolution sol = solve_transport(p, shocks);
    const double conjugate = -sol.primal_objective;
    double inner = 0.0;
    for (int y = 0; y < p.size(); ++y) inner += p[y] * w[y];
    return std::fabs(surplus_value(w, shocks) + conjugate - inner);
}

} // namespace mta
