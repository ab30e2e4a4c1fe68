#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mta/config.hpp"
#include "mta/dataio.hpp"
#include "mta/ddc.hpp"
#include "mta/errors.hpp"
#include "mta/montecarlo.hpp"
#include "mta/rng.hpp"
#include "mta/transport.hpp"

namespace {

using namespace mta;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    bool bounds = false;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/**
 * Output CSV with the standard comment header. Opened in binary mode so
 * reruns are byte-identical regardless of platform newline conventions.
 */
class CsvWriter {
public:
    CsvWriter(const std::string& dir, const std::string& name, std::uint64_t config_hash) {
        std::filesystem::path d(dir);
        std::error_code ec;
        std::filesystem::create_directories(d, ec);
        path_ = (d / name).string();
        file_.open(path_, std::ios::binary);
        if (!file_) throw validation_error("cannot open output file " + path_);
        char head[64];
        std::snprintf(head, sizeof head, "# mta %s config_hash=%016llx\n", version(),
                      static_cast<unsigned long long>(config_hash));
        file_ << head;
    }

    void line(const std::string& s) { file_ << s << '\n'; }

    void close() {
        file_.close();
        if (file_.fail()) throw validation_error("write failed: " + path_);
    }

    const std::string& path() const { return path_; }

private:
    std::ofstream file_;
    std::string path_;
};

std::uint64_t config_hash(const Config& cfg) {
    const std::string text = cfg.canonical_text();
    return fnv1a64(text.data(), text.size());
}

/// Round-robin worker pool; body(i) for i in [0,n). First exception wins.
template <class F>
void parallel_for(int n, int jobs, F&& body) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    auto run = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(run);
    for (std::thread& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------- input files

std::vector<std::string> split_fields(const std::string& text) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream split(text);
    while (std::getline(split, field, ',')) {
        std::size_t b = 0, e = field.size();
        while (b < e && (field[b] == ' ' || field[b] == '\t' || field[b] == '\r')) ++b;
        while (e > b && (field[e - 1] == ' ' || field[e - 1] == '\t' || field[e - 1] == '\r')) --e;
        fields.push_back(field.substr(b, e - b));
    }
    if (!text.empty() && text.back() == ',') fields.push_back("");
    return fields;
}

long parse_long_field(const std::string& s, const std::string& file, long line_no) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw validation_error(file + ": line " + std::to_string(line_no)
                               + ": not an integer: " + s);
    }
}

double parse_double_field(const std::string& s, const std::string& file, long line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw validation_error(file + ": line " + std::to_string(line_no)
                               + ": not a number: " + s);
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    return in;
}

/// Panel observations, header `i,t,x,y`, all integers.
PanelData read_panel_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw validation_error(path + ": empty input");
    if (split_fields(line) != std::vector<std::string>{"i", "t", "x", "y"})
        throw validation_error(path + ": header must be exactly `i,t,x,y`");
    PanelData panel;
    long line_no = 1;
    int max_agent = -1;
    long min_t = 0, max_t = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> f = split_fields(line);
        if (f.empty() || (f.size() == 1 && f[0].empty())) continue;
        if (f.size() != 4)
            throw validation_error(path + ": line " + std::to_string(line_no)
                                   + ": expected 4 fields, got " + std::to_string(f.size()));
        PanelRecord r;
        r.agent = static_cast<int>(parse_long_field(f[0], path, line_no));
        r.period = static_cast<int>(parse_long_field(f[1], path, line_no));
        r.state = static_cast<int>(parse_long_field(f[2], path, line_no));
        r.action = static_cast<int>(parse_long_field(f[3], path, line_no));
        if (r.state < 0 || r.action < 0)
            throw validation_error(path + ": line " + std::to_string(line_no)
                                   + ": state and action must be nonnegative");
        max_agent = std::max(max_agent, r.agent);
        if (max_t < min_t) min_t = max_t = r.period;
        min_t = std::min(min_t, static_cast<long>(r.period));
        max_t = std::max(max_t, static_cast<long>(r.period));
        panel.records.push_back(r);
    }
    if (panel.records.empty()) throw validation_error(path + ": no observations");
    panel.n_agents = max_agent + 1;
    panel.n_periods = static_cast<int>(max_t - min_t + 1);
    return panel;
}

/// CCP table, header `x,p_0,...,p_{m-1}`, states 0..n-1 in order.
std::vector<CcpVector> read_ccp_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw validation_error(path + ": empty input");
    const std::vector<std::string> head = split_fields(line);
    if (head.size() < 3 || head[0] != "x")
        throw validation_error(path + ": header must be `x,p_0,...,p_{m-1}`");
    for (std::size_t y = 1; y < head.size(); ++y)
        if (head[y] != "p_" + std::to_string(y - 1))
            throw validation_error(path + ": header must be `x,p_0,...,p_{m-1}`");
    const int m = static_cast<int>(head.size()) - 1;

    std::vector<CcpVector> ccps;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> f = split_fields(line);
        if (f.empty() || (f.size() == 1 && f[0].empty())) continue;
        if (static_cast<int>(f.size()) != m + 1)
            throw validation_error(path + ": line " + std::to_string(line_no)
                                   + ": expected " + std::to_string(m + 1) + " fields");
        const long x = parse_long_field(f[0], path, line_no);
        if (x != static_cast<long>(ccps.size()))
            throw validation_error(path + ": line " + std::to_string(line_no)
                                   + ": states must run 0,1,2,... in order");
        std::vector<double> p(m);
        for (int y = 0; y < m; ++y) p[y] = parse_double_field(f[y + 1], path, line_no);
        try {
            ccps.emplace_back(std::move(p));
        } catch (const validation_error& e) {
            throw validation_error(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (ccps.empty()) throw validation_error(path + ": no states");
    return ccps;
}

/// Sparse transition triples, header `y,x,x_next,prob`; missing entries are 0.
std::vector<std::vector<double>> read_transitions_csv(const std::string& path, int n_states,
                                                      int n_actions) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw validation_error(path + ": empty input");
    if (split_fields(line) != std::vector<std::string>{"y", "x", "x_next", "prob"})
        throw validation_error(path + ": header must be exactly `y,x,x_next,prob`");

    std::vector<std::vector<double>> trans(
        n_actions, std::vector<double>(static_cast<std::size_t>(n_states) * n_states, 0.0));
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> f = split_fields(line);
        if (f.empty() || (f.size() == 1 && f[0].empty())) continue;
        if (f.size() != 4)
            throw validation_error(path + ": line " + std::to_string(line_no)
                                   + ": expected 4 fields");
        const long y = parse_long_field(f[0], path, line_no);
        const long x = parse_long_field(f[1], path, line_no);
        const long j = parse_long_field(f[2], path, line_no);
        const double prob = parse_double_field(f[3], path, line_no);
        if (y < 0 || y >= n_actions || x < 0 || x >= n_states || j < 0 || j >= n_states)
            throw validation_error(path + ": line " + std::to_string(line_no)
                                   + ": index out of range");
        trans[y][static_cast<std::size_t>(x) * n_states + j] = prob;
    }
    return trans;
}

/// Probability vector from a file: comma or newline separated numbers, # comments.
std::vector<double> read_prob_file(const std::string& path) {
    std::ifstream in = open_input(path);
    std::vector<double> p;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        for (const std::string& f : split_fields(line))
            if (!f.empty()) p.push_back(parse_double_field(f, path, line_no));
    }
    if (p.empty()) throw validation_error(path + ": no probabilities found");
    return p;
}

// ---------------------------------------------------------------- shock specs

ShockSpec shock_spec_from(const Config& cfg, const std::string& family, int fallback_dim) {
    if (family == "gumbel") {
        const int dim = static_cast<int>(cfg.get_int("shocks.dim", fallback_dim));
        if (dim < 1) throw validation_error("config: shocks.dim required for gumbel shocks");
        return ShockSpec::gumbel_iid(dim, cfg.get_double("shocks.scale", 1.0));
    }
    if (family == "normal") {
        const int dim = static_cast<int>(cfg.get_int("shocks.dim", fallback_dim));
        if (dim < 1) throw validation_error("config: shocks.dim required for normal shocks");
        std::vector<double> cov = cfg.get_double_list("shocks.cov");
        if (static_cast<int>(cov.size()) != dim * dim)
            throw validation_error("config: shocks.cov must have dim*dim entries");
        std::vector<double> mean(dim, 0.0);
        if (cfg.has("shocks.mean")) {
            mean = cfg.get_double_list("shocks.mean");
            if (static_cast<int>(mean.size()) != dim)
                throw validation_error("config: shocks.mean must have dim entries");
        }
        return ShockSpec::multivariate_normal(std::move(mean), std::move(cov));
    }
    if (family == "bus_mixture") {
        const double a = cfg.get_double("shocks.a", 0.1);
        const double b = cfg.get_double("shocks.b", 0.5);
        const int x = static_cast<int>(cfg.get_int("shocks.x", 0));
        return mixture_for_state(a, b, x);
    }
    throw validation_error("config: unknown shocks.family `" + family
                           + "` (gumbel, normal, bus_mixture)");
}

/// Per-state shock sets with seeds derived from the master seed.
std::vector<DiscreteShocks> per_state_shocks(const Config& cfg, int n_states, int n_actions,
                                             int n_draws, std::uint64_t master) {
    const std::string family = cfg.get_string("shocks.family", "gumbel");
    std::vector<DiscreteShocks> shocks;
    shocks.reserve(n_states);
    if (family == "bus_mixture") {
        const double a = cfg.get_double("shocks.a", 0.1);
        const double b = cfg.get_double("shocks.b", 0.5);
        if (n_actions != 2)
            throw validation_error("config: bus_mixture shocks need exactly 2 actions");
        for (int x = 0; x < n_states; ++x)
            shocks.push_back(discretize(mixture_for_state(a, b, x), n_draws,
                                        derive_seed(master, "shocks", x)));
        return shocks;
    }
    const ShockSpec spec = shock_spec_from(cfg, family, n_actions);
    if (spec.dim != n_actions)
        throw validation_error("config: shock dimension != action count");
    for (int x = 0; x < n_states; ++x)
        shocks.push_back(discretize(spec, n_draws, derive_seed(master, "shocks", x)));
    return shocks;
}

// ------------------------------------------------------------------- commands

void cmd_invert(const Config& cfg, const Options& opt) {
    std::vector<double> pvals;
    if (cfg.has("invert.p")) pvals = cfg.get_double_list("invert.p");
    else if (cfg.has("invert.p_csv")) pvals = read_prob_file(cfg.get_string("invert.p_csv"));
    else throw validation_error("config: invert needs invert.p or invert.p_csv");
    CcpVector p(pvals);

    const ShockSpec spec = shock_spec_from(cfg, cfg.get_string("shocks.family", "gumbel"),
                                           static_cast<int>(pvals.size()));
    if (spec.dim != static_cast<int>(pvals.size()))
        throw validation_error("config: shock dimension != number of probabilities");
    const std::uint64_t master = cfg.get_seed("seed", 0);
    const int n_draws = static_cast<int>(cfg.get_int("discretization.S", 1000));
    const std::uint64_t dseed =
        cfg.get_seed("discretization.seed", derive_seed(master, "shocks", 0));
    const DiscreteShocks shocks = discretize(spec, n_draws, dseed);

    const InversionResult inv = invert_ccp(p, shocks);
    const bool with_bounds = opt.bounds || cfg.get_bool("invert.bounds", false);
    IdentifiedSetBounds bounds;
    if (with_bounds) bounds = identified_set_bounds(p, shocks, inv.solution);

    CsvWriter out(opt.out_dir, "invert.csv", config_hash(cfg));
    const double gap = std::fabs(inv.solution.primal_objective - inv.solution.dual_objective);
    out.line("# gstar=" + fmt(inv.gstar) + " duality_gap=" + fmt(gap) + " surplus_residual="
             + fmt(inv.surplus_residual) + " iterations="
             + std::to_string(inv.solution.iterations));
    out.line(with_bounds ? "y,w0,lower,upper" : "y,w0");
    for (int y = 0; y < p.size(); ++y) {
        std::string row = std::to_string(y) + "," + fmt(inv.w0[y]);
        if (with_bounds) row += "," + fmt(bounds.lower[y]) + "," + fmt(bounds.upper[y]);
        out.line(row);
    }
    out.close();
    std::cout << "conjugate value " << fmt(inv.gstar) << ", duality gap " << fmt(gap) << "\n";
    std::cout << "wrote " << out.path() << "\n";
}

BoundaryPolicy policy_from(const Config& cfg, BoundaryPolicy fallback) {
    const std::string name =
        cfg.get_string("estimation.policy",
                       fallback == BoundaryPolicy::strict ? "strict" : "selection");
    if (name == "strict") return BoundaryPolicy::strict;
    if (name == "selection") return BoundaryPolicy::selection;
    throw validation_error("config: estimation.policy must be strict or selection");
}

void cmd_estimate(const Config& cfg, const Options& opt) {
    const double beta = cfg.get_double("estimation.beta", 0.9);
    const bool with_bounds = opt.bounds || cfg.get_bool("estimation.bounds", false);
    const std::uint64_t master = cfg.get_seed("seed", 0);

    EstimationResult est;
    std::vector<char> visited;
    std::vector<DiscreteShocks> shocks;
    int n = 0, m = 0, y0 = 0;
    bool have_theta = false;
    double theta = 0.0;

    if (cfg.has("io.bus_csv")) {
        const PanelData panel =
            discretize_mileage(ingest_bus_csv(cfg.get_string("io.bus_csv")),
                               static_cast<int>(cfg.get_int("estimation.n_states", 30)));
        n = static_cast<int>(cfg.get_int("estimation.n_states", 30));
        m = 2;
        y0 = static_cast<int>(cfg.get_int("estimation.y0", 1));
        const int n_draws = static_cast<int>(cfg.get_int("estimation.S", 2000));
        const double a = cfg.get_double("shocks.a", 0.1);
        const double b = cfg.get_double("shocks.b", 0.5);
        shocks.reserve(n);
        for (int x = 0; x < n; ++x)
            shocks.push_back(
                discretize(mixture_for_state(a, b, x), n_draws, derive_seed(master, "shocks", x)));
        PanelFrequencies freq = estimate_ccp_and_transitions(panel, n, m);
        theta = estimate_advance_theta(panel, n);
        have_theta = true;
        AssembledInputs inputs = assemble_estimation_inputs(freq);
        // sampled CCPs touch the boundary routinely, so the bus pipeline
        // defaults to the selection policy
        est = estimate(inputs.ccps, bus_transition_template(theta, n), beta, shocks, y0,
                       with_bounds, policy_from(cfg, BoundaryPolicy::selection));
        visited = std::move(inputs.visited);
    } else if (cfg.has("io.panel")) {
        const PanelData panel = read_panel_csv(cfg.get_string("io.panel"));
        int max_x = 0, max_y = 0;
        for (const PanelRecord& r : panel.records) {
            max_x = std::max(max_x, r.state);
            max_y = std::max(max_y, r.action);
        }
        n = static_cast<int>(cfg.get_int("estimation.n_states", max_x + 1));
        m = static_cast<int>(cfg.get_int("estimation.n_actions", max_y + 1));
        y0 = static_cast<int>(cfg.get_int("estimation.y0", 0));
        const int n_draws = static_cast<int>(cfg.get_int("estimation.S", 1000));
        shocks = per_state_shocks(cfg, n, m, n_draws, master);
        PanelFrequencies freq = estimate_ccp_and_transitions(panel, n, m);
        AssembledInputs inputs = assemble_estimation_inputs(freq);
        est = estimate(inputs.ccps, inputs.transitions, beta, shocks, y0, with_bounds,
                       policy_from(cfg, BoundaryPolicy::strict));
        visited = std::move(inputs.visited);
    } else if (cfg.has("io.ccps")) {
        std::vector<CcpVector> ccps = read_ccp_csv(cfg.get_string("io.ccps"));
        n = static_cast<int>(ccps.size());
        m = ccps[0].size();
        y0 = static_cast<int>(cfg.get_int("estimation.y0", 0));
        std::vector<std::vector<double>> trans =
            read_transitions_csv(cfg.get_string("io.transitions"), n, m);
        const int n_draws = static_cast<int>(cfg.get_int("estimation.S", 1000));
        shocks = per_state_shocks(cfg, n, m, n_draws, master);
        est = estimate(ccps, trans, beta, shocks, y0, with_bounds,
                       policy_from(cfg, BoundaryPolicy::strict));
        visited.assign(n, 1);
    } else {
        throw validation_error("config: estimate needs io.bus_csv, io.panel, or io.ccps");
    }

    // unvisited states run on placeholder inputs; never report them as identified
    for (int x = 0; x < n; ++x)
        if (!visited[x]) est.identified[x] = 0;

    CsvWriter out(opt.out_dir, "estimate.csv", config_hash(cfg));
    if (have_theta) out.line("# theta=" + fmt(theta));
    out.line("x,y,w0,flow,lower,upper,identified_flag");
    const double nan = std::nan("");
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < m; ++y) {
            const bool ok = est.identified[x] != 0;
            const double lo = with_bounds ? est.bounds[x].lower[y] : nan;
            const double hi = with_bounds ? est.bounds[x].upper[y] : nan;
            out.line(std::to_string(x) + "," + std::to_string(y) + ","
                     + fmt(ok ? est.w0[y][x] : nan) + "," + fmt(ok ? est.flows[y][x] : nan) + ","
                     + fmt(lo) + "," + fmt(hi) + "," + (ok ? "1" : "0"));
        }
    out.close();

    int identified = 0;
    double max_residual = 0.0;
    PayoffVector wx(m);
    for (int x = 0; x < n; ++x) {
        if (!est.identified[x]) continue;
        ++identified;
        for (int y = 0; y < m; ++y) wx[y] = est.w0[y][x];
        max_residual = std::max(max_residual, std::fabs(surplus_value(wx, shocks[x])));
    }
    std::cout << "identified " << identified << " of " << n << " states\n";
    std::cout << "max surplus residual at identified states " << fmt(max_residual) << "\n";
    if (have_theta) std::cout << "advance theta " << fmt(theta) << "\n";
    std::cout << "wrote " << out.path() << "\n";
}

void cmd_montecarlo(const Config& cfg, const Options& opt) {
    ResourceModelSpec rspec;
    rspec.n_states = static_cast<int>(cfg.get_int("resource.n_states", rspec.n_states));
    rspec.beta = cfg.get_double("resource.beta", rspec.beta);
    if (cfg.has("resource.pi")) rspec.pi = cfg.get_double_list("resource.pi");
    if (cfg.has("resource.cov")) rspec.cov2 = cfg.get_double_list("resource.cov");
    const DdcModel model = build_resource_model(rspec);
    const int n = model.n_states();
    const int m = model.n_actions;

    const int N = static_cast<int>(cfg.get_int("montecarlo.N", 1000));
    const int T = static_cast<int>(cfg.get_int("montecarlo.T", 1000));
    const int reps = static_cast<int>(cfg.get_int("montecarlo.replications", 100));
    const int n_draws = static_cast<int>(cfg.get_int("montecarlo.S", 5000));
    const std::uint64_t master = cfg.get_seed("seed", 0);
    if (reps < 1) throw validation_error("config: montecarlo.replications must be positive");

    std::vector<DiscreteShocks> shocks;
    shocks.reserve(n);
    for (int x = 0; x < n; ++x)
        shocks.push_back(discretize(model.shocks, n_draws, derive_seed(master, "shocks", x)));
    const ModelSolution solution = solve_model(model, shocks);

    std::vector<ReplicationResult> results(reps);
    parallel_for(reps, opt.jobs, [&](int r) {
        results[r] = run_replication(model, solution, shocks, N, T,
                                     derive_seed(master, "mc", r));
    });

    CsvWriter out(opt.out_dir, "montecarlo_reps.csv", config_hash(cfg));
    std::string head = "rep,seed";
    for (int y = 0; y < m; ++y) {
        if (y == model.benchmark) continue;
        head += ",rmse_y" + std::to_string(y) + ",r2_y" + std::to_string(y);
    }
    head += ",states_used";
    out.line(head);
    for (int r = 0; r < reps; ++r) {
        std::string row = std::to_string(r) + "," + std::to_string(results[r].seed);
        for (int y = 0; y < m; ++y) {
            if (y == model.benchmark) continue;
            row += "," + fmt(results[r].metrics.rmse[y]) + "," + fmt(results[r].metrics.r2[y]);
        }
        row += "," + std::to_string(results[r].metrics.states_used);
        out.line(row);
    }
    out.close();

    auto mean_std = [&](auto&& pick) {
        double sum = 0.0;
        long count = 0;
        for (const ReplicationResult& r : results) {
            const double v = pick(r);
            if (std::isfinite(v)) {
                sum += v;
                ++count;
            }
        }
        const double mean = count ? sum / static_cast<double>(count) : std::nan("");
        double ss = 0.0;
        for (const ReplicationResult& r : results) {
            const double v = pick(r);
            if (std::isfinite(v)) ss += (v - mean) * (v - mean);
        }
        const double sd = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : std::nan("");
        return std::pair<double, double>(mean, sd);
    };

    CsvWriter summary(opt.out_dir, "montecarlo_summary.csv", config_hash(cfg));
    summary.line("y,metric,mean,std");
    for (int y = 0; y < m; ++y) {
        if (y == model.benchmark) continue;
        const auto rmse = mean_std([&](const ReplicationResult& r) { return r.metrics.rmse[y]; });
        const auto r2 = mean_std([&](const ReplicationResult& r) { return r.metrics.r2[y]; });
        summary.line(std::to_string(y) + ",rmse," + fmt(rmse.first) + "," + fmt(rmse.second));
        summary.line(std::to_string(y) + ",r2," + fmt(r2.first) + "," + fmt(r2.second));
        std::cout << "action " << y << ": rmse " << fmt(rmse.first) << " (" << fmt(rmse.second)
                  << "), r2 " << fmt(r2.first) << " (" << fmt(r2.second) << ")\n";
    }
    summary.close();
    std::cout << "wrote " << out.path() << "\n";
    std::cout << "wrote " << summary.path() << "\n";
}

void cmd_sweep(const Config& cfg, const Options& opt) {
    std::vector<std::array<double, 3>> grid;
    if (cfg.has("sweep.points")) {
        const std::vector<double> flat = cfg.get_double_list("sweep.points");
        if (flat.size() % 3 != 0)
            throw validation_error("config: sweep.points length must be a multiple of 3");
        for (std::size_t k = 0; k + 3 <= flat.size(); k += 3)
            grid.push_back({flat[k], flat[k + 1], flat[k + 2]});
    } else {
        grid = simplex_lattice(static_cast<int>(cfg.get_int("sweep.grid_denominator", 7)));
    }

    std::vector<int> draw_counts;
    if (cfg.has("sweep.S"))
        for (long s : cfg.get_int_list("sweep.S")) draw_counts.push_back(static_cast<int>(s));
    else
        draw_counts = {100, 1000};
    const int n_seeds = static_cast<int>(cfg.get_int("sweep.seeds", 1));
    const std::uint64_t master = cfg.get_seed("seed", 0);

    ShockSpec spec;
    if (cfg.has("shocks.family")) {
        spec = shock_spec_from(cfg, cfg.get_string("shocks.family"), 3);
    } else {
        // default: the resource-design difference law with the benchmark pinned
        const ResourceModelSpec rspec;
        std::vector<double> cov3(9, 0.0);
        cov3[0] = rspec.cov2[0];
        cov3[1] = rspec.cov2[1];
        cov3[3] = rspec.cov2[2];
        cov3[4] = rspec.cov2[3];
        spec = ShockSpec::multivariate_normal(std::vector<double>(3, 0.0), std::move(cov3));
    }

    const std::vector<SweepRow> rows = shrinkage_sweep(grid, draw_counts, n_seeds, spec, master);

    CsvWriter out(opt.out_dir, "sweep.csv", config_hash(cfg));
    out.line("p1,p2,p3,S,seed,width_y0,width_y1,width_y2");
    for (const SweepRow& r : rows)
        out.line(fmt(r.p[0]) + "," + fmt(r.p[1]) + "," + fmt(r.p[2]) + ","
                 + std::to_string(r.n_draws) + "," + std::to_string(r.seed) + ","
                 + fmt(r.width[0]) + "," + fmt(r.width[1]) + "," + fmt(r.width[2]));
    out.close();
    std::cout << "wrote " << out.path() << " (" << rows.size() << " rows)\n";
}

void cmd_bootstrap(const Config& cfg, const Options& opt) {
    BootstrapConfig bc;
    bc.n_states = static_cast<int>(cfg.get_int("bootstrap.n_states", bc.n_states));
    bc.n_resamples = static_cast<int>(cfg.get_int("bootstrap.B", bc.n_resamples));
    bc.resample_size =
        static_cast<int>(cfg.get_int("bootstrap.resample_size", bc.resample_size));
    bc.n_draws = static_cast<int>(cfg.get_int("bootstrap.S", bc.n_draws));
    bc.a = cfg.get_double("shocks.a", bc.a);
    bc.b = cfg.get_double("shocks.b", bc.b);
    bc.beta = cfg.get_double("estimation.beta", bc.beta);
    bc.benchmark = static_cast<int>(cfg.get_int("estimation.y0", bc.benchmark));
    bc.seed = cfg.get_seed("seed", 0);

    PanelData panel;
    if (cfg.has("io.bus_csv"))
        panel = discretize_mileage(ingest_bus_csv(cfg.get_string("io.bus_csv")), bc.n_states);
    else if (cfg.has("io.panel"))
        panel = read_panel_csv(cfg.get_string("io.panel"));
    else
        throw validation_error("config: bootstrap needs io.bus_csv or io.panel");

    const BootstrapResult result = bootstrap_estimate(panel, bc);

    CsvWriter out(opt.out_dir, "bootstrap.csv", config_hash(cfg));
    out.line("# resamples=" + std::to_string(bc.n_resamples) + " excluded="
             + std::to_string(result.excluded.size()));
    out.line("x,q05,q25,q50,q75,q95,n_replacements_observed");
    for (int x = 0; x < bc.n_states; ++x) {
        const std::array<double, 5>& q = result.flow_quantiles[x];
        out.line(std::to_string(x) + "," + fmt(q[0]) + "," + fmt(q[1]) + "," + fmt(q[2]) + ","
                 + fmt(q[3]) + "," + fmt(q[4]) + ","
                 + std::to_string(result.replacements_observed[x]));
    }
    out.close();
    std::cout << result.estimates.size() << " of " << bc.n_resamples
              << " resamples estimated, " << result.excluded.size() << " excluded\n";
    std::cout << "wrote " << out.path() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"choice-probability inversion and payoff recovery toolkit"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "run configuration file")->required();
        sub->add_option("--out", opt.out_dir, "output directory (default .)");
        sub->add_option("--jobs", opt.jobs, "worker thread count (default 1)")
            ->check(CLI::PositiveNumber);
        return sub;
    };
    CLI::App* invert = add_common(app.add_subcommand(
        "invert", "recover zero-surplus payoffs from one probability vector"));
    invert->add_flag("--bounds", opt.bounds, "also report identified-set bounds");
    CLI::App* estimate = add_common(
        app.add_subcommand("estimate", "two-step payoff recovery from panel or CCP inputs"));
    estimate->add_flag("--bounds", opt.bounds, "also report identified-set bounds");
    CLI::App* montecarlo = add_common(
        app.add_subcommand("montecarlo", "replication study on the resource extraction design"));
    CLI::App* sweep = add_common(
        app.add_subcommand("sweep", "identified-set widths across a probability grid"));
    CLI::App* bootstrap = add_common(
        app.add_subcommand("bootstrap", "resample whole agents and re-estimate"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const Config cfg = Config::parse_file(opt.config_path);
        if (invert->parsed()) cmd_invert(cfg, opt);
        else if (estimate->parsed()) cmd_estimate(cfg, opt);
        else if (montecarlo->parsed()) cmd_montecarlo(cfg, opt);
        else if (sweep->parsed()) cmd_sweep(cfg, opt);
        else if (bootstrap->parsed()) cmd_bootstrap(cfg, opt);
        return 0;
    } catch (const validation_error& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 2;
    } catch (const identification_error& e) {
        std::cerr << "error: identification: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "error: numerical: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 2;
    }
}
