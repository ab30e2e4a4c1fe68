#include "mta/dataio.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "mta/errors.hpp"
#include "mta/rng.hpp"

namespace mta {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

bool parse_long(const std::string& s, long& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

} // namespace

std::vector<RawBusRecord> ingest_bus_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw validation_error("bus csv: empty input");
    if (trim(line) != "bus_id,t,mileage,replace")
        throw validation_error("bus csv: header must be exactly `bus_id,t,mileage,replace`");

    std::vector<RawBusRecord> records;
    std::vector<std::string> problems;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;

        std::vector<std::string> fields;
        std::string field;
        std::istringstream split(text);
        while (std::getline(split, field, ',')) fields.push_back(trim(field));
        if (!text.empty() && text.back() == ',') fields.push_back("");

        auto reject = [&](const std::string& why) {
            if (problems.size() < 20)
                problems.push_back("line " + std::to_string(line_no) + ": " + why);
            else if (problems.size() == 20)
                problems.push_back("...");
        };

        if (fields.size() != 4) {
            reject("expected 4 fields, got " + std::to_string(fields.size()));
            continue;
        }
        RawBusRecord r;
        long replace = 0;
        if (!parse_long(fields[0], r.bus_id)) {
            reject("bus_id is not an integer");
            continue;
        }
        if (!parse_long(fields[1], r.period)) {
            reject("t is not an integer");
            continue;
        }
        if (!parse_double(fields[2], r.mileage)) {
            reject("mileage is not a number");
            continue;
        }
        if (r.mileage < 0.0) {
            reject("mileage is negative");
            continue;
        }
        if (!parse_long(fields[3], replace) || (replace != 0 && replace != 1)) {
            reject("replace must be 0 or 1");
            continue;
        }
        r.replace = static_cast<int>(replace);
        records.push_back(r);
    }
    if (!problems.empty()) {
        std::string msg = "bus csv: " + std::to_string(problems.size() > 20 ? 20 : problems.size())
                          + " malformed row(s): ";
        for (std::size_t i = 0; i < problems.size(); ++i) {
            if (i) msg += "; ";
            msg += problems[i];
        }
        throw validation_error(msg);
    }
    return records;
}

std::vector<RawBusRecord> ingest_bus_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("bus csv: cannot open " + path);
    return ingest_bus_csv(in);
}

PanelData discretize_mileage(const std::vector<RawBusRecord>& records, int n_states) {
    if (n_states < 1) throw validation_error("discretize_mileage: need at least one state");
    std::map<long, int> agent_of; // ascending bus_id -> dense index
    for (const RawBusRecord& r : records) agent_of.emplace(r.bus_id, 0);
    int next = 0;
    for (auto& kv : agent_of) kv.second = next++;

    PanelData panel;
    panel.n_agents = next;
    panel.records.reserve(records.size());
    long min_t = 0, max_t = -1;
    for (const RawBusRecord& r : records) {
        const double q = r.mileage / 12500.0;
        const int state = q >= n_states - 1 ? n_states - 1 : static_cast<int>(q);
        panel.records.push_back(
            {agent_of[r.bus_id], static_cast<int>(r.period), state, r.replace});
        if (max_t < min_t) min_t = max_t = r.period;
        min_t = std::min(min_t, r.period);
        max_t = std::max(max_t, r.period);
    }
    panel.n_periods = records.empty() ? 0 : static_cast<int>(max_t - min_t + 1);
    std::sort(panel.records.begin(), panel.records.end(),
              [](const PanelRecord& a, const PanelRecord& b) {
                  if (a.agent != b.agent) return a.agent < b.agent;
                  return a.period < b.period;
              });
    return panel;
}

std::vector<std::vector<double>> bus_transition_template(double theta_keep, double theta_replace,
                                                         int n_states) {
    if (!(theta_keep > 0.0 && theta_keep < 1.0))
        throw validation_error("bus transitions: keep theta must lie strictly in (0,1)");
    if (!(theta_replace > 0.0 && theta_replace < 1.0))
        throw validation_error("bus transitions: replace theta must lie strictly in (0,1)");
    if (n_states < 2) throw validation_error("bus transitions: need at least 2 states");

    std::vector<std::vector<double>> trans(
        2, std::vector<double>(static_cast<std::size_t>(n_states) * n_states, 0.0));
    for (int x = 0; x < n_states; ++x) {
        if (x + 1 < n_states) {
            trans[0][static_cast<std::size_t>(x) * n_states + x] = theta_keep;
            trans[0][static_cast<std::size_t>(x) * n_states + x + 1] = 1.0 - theta_keep;
        } else {
            trans[0][static_cast<std::size_t>(x) * n_states + x] = 1.0;
        }
        trans[1][static_cast<std::size_t>(x) * n_states + 0] = theta_replace;
        trans[1][static_cast<std::size_t>(x) * n_states + 1] = 1.0 - theta_replace;
    }
    return trans;
}

std::vector<std::vector<double>> bus_transition_template(double theta, int n_states) {
    return bus_transition_template(theta, theta, n_states);
}

double estimate_advance_theta(const PanelData& panel, int n_states) {
    if (n_states < 2) throw validation_error("advance theta: need at least 2 states");
    std::vector<PanelRecord> sorted = panel.records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const PanelRecord& a, const PanelRecord& b) {
        if (a.agent != b.agent) return a.agent < b.agent;
        return a.period < b.period;
    });
    long stays = 0, advances = 0;
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        const PanelRecord& prev = sorted[k - 1];
        const PanelRecord& cur = sorted[k];
        if (cur.agent != prev.agent || cur.period != prev.period + 1) continue;
        if (prev.action == 0) {
            if (prev.state == n_states - 1) continue; // absorbing row: stay is forced
            if (cur.state == prev.state) ++stays;
            else if (cur.state == prev.state + 1) ++advances;
        } else if (prev.action == 1) {
            if (cur.state == 0) ++stays;
            else if (cur.state == 1) ++advances;
        }
    }
    if (stays + advances == 0)
        throw validation_error("advance theta: no usable transition pairs in the panel");
    return static_cast<double>(stays) / static_cast<double>(stays + advances);
}

namespace {

std::vector<DiscreteShocks> bus_shocks(const BootstrapConfig& config) {
    std::vector<DiscreteShocks> shocks;
    shocks.reserve(config.n_states);
    for (int x = 0; x < config.n_states; ++x)
        shocks.push_back(discretize(mixture_for_state(config.a, config.b, x), config.n_draws,
                                    derive_seed(config.seed, "shocks", x)));
    return shocks;
}

// Unvisited states enter the estimator through simplex placeholders; strip
// them from the identification report so only data-backed states are flagged.
void mask_unvisited(EstimationResult& est, const std::vector<char>& visited) {
    est.identified_states.clear();
    for (std::size_t x = 0; x < visited.size(); ++x) {
        if (!visited[x]) est.identified[x] = 0;
        if (est.identified[x]) est.identified_states.push_back(static_cast<int>(x));
    }
}

BusPointEstimate point_estimate_with(const PanelData& panel, const BootstrapConfig& config,
                                     const std::vector<DiscreteShocks>& shocks,
                                     bool with_bounds) {
    PanelFrequencies freq = estimate_ccp_and_transitions(panel, config.n_states, 2);
    const double theta = estimate_advance_theta(panel, config.n_states);
    std::vector<std::vector<double>> trans = bus_transition_template(theta, config.n_states);
    AssembledInputs inputs = assemble_estimation_inputs(freq);
    BusPointEstimate out;
    out.estimate = estimate(inputs.ccps, trans, config.beta, shocks, config.benchmark,
                            with_bounds, BoundaryPolicy::selection);
    out.theta = theta;
    mask_unvisited(out.estimate, inputs.visited);
    out.visited = std::move(inputs.visited);
    return out;
}

bool benchmark_interior_somewhere(const PanelFrequencies& freq, int benchmark) {
    for (int x = 0; x < freq.n_states; ++x) {
        if (freq.visits[x] == 0) continue;
        const double p = freq.ccp[static_cast<std::size_t>(x) * freq.n_actions + benchmark];
        if (p > 0.0 && p < 1.0) return true;
    }
    return false;
}

double quantile_sorted(const std::vector<double>& v, double q) {
    // linear interpolation between order statistics at rank q*(n-1)
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

void check_bootstrap_config(const BootstrapConfig& config) {
    if (config.n_resamples < 1)
        throw validation_error("bootstrap: need at least one resample");
    if (config.resample_size < -1)
        throw validation_error("bootstrap: resample size must be -1, 0, or positive");
    if (config.n_draws < 1) throw validation_error("bootstrap: need at least one shock draw");
    if (config.n_states < 2) throw validation_error("bootstrap: need at least 2 states");
    if (config.benchmark != 0 && config.benchmark != 1)
        throw validation_error("bootstrap: benchmark must be action 0 or 1");
    if (!(config.beta >= 0.0 && config.beta < 1.0))
        throw validation_error("bootstrap: beta must lie in [0,1)");
}

} // namespace

BusPointEstimate bus_point_estimate(const PanelData& panel, const BootstrapConfig& config,
                                    bool with_bounds) {
    check_bootstrap_config(config);
    return point_estimate_with(panel, config, bus_shocks(config), with_bounds);
}

BootstrapResult bootstrap_estimate(const PanelData& panel, const BootstrapConfig& config) {
    check_bootstrap_config(config);
    if (panel.records.empty()) throw validation_error("bootstrap: empty panel");

    // agent -> record index range; PanelData from discretize_mileage is dense and sorted
    std::map<int, std::vector<std::size_t>> by_agent;
    for (std::size_t k = 0; k < panel.records.size(); ++k)
        by_agent[panel.records[k].agent].push_back(k);
    std::vector<const std::vector<std::size_t>*> buses;
    buses.reserve(by_agent.size());
    for (const auto& kv : by_agent) buses.push_back(&kv.second);
    const int n_buses = static_cast<int>(buses.size());

    const std::vector<DiscreteShocks> shocks = bus_shocks(config);

    BootstrapResult out;
    out.replacements_observed.assign(config.n_states, 0);
    for (const PanelRecord& r : panel.records) {
        if (r.state < 0 || r.state >= config.n_states)
            throw validation_error("bootstrap: panel state out of range");
        if (r.action == 1) out.replacements_observed[r.state] += 1;
    }

    const int size = config.resample_size > 0 ? config.resample_size : n_buses;
    for (int r = 0; r < config.n_resamples; ++r) {
        const std::uint64_t rs = derive_seed(config.seed, "bootstrap", r);
        std::vector<int> indices(size);
        if (config.resample_size == -1) {
            for (int k = 0; k < n_buses; ++k) indices[k] = k;
        } else {
            Rng64 rng(rs);
            for (int k = 0; k < size; ++k)
                indices[k] = std::min(static_cast<int>(rng.uniform() * n_buses), n_buses - 1);
        }

        PanelData resample;
        resample.n_agents = size;
        resample.n_periods = panel.n_periods;
        for (int k = 0; k < size; ++k)
            for (std::size_t idx : *buses[indices[k]]) {
                PanelRecord rec = panel.records[idx];
                rec.agent = k;
                resample.records.push_back(rec);
            }

        PanelFrequencies freq = estimate_ccp_and_transitions(resample, config.n_states, 2);
        if (!benchmark_interior_somewhere(freq, config.benchmark)) {
            out.excluded.push_back(r);
            continue;
        }
        double theta;
        try {
            theta = estimate_advance_theta(resample, config.n_states);
        } catch (const validation_error&) {
            out.excluded.push_back(r);
            continue;
        }
        std::vector<std::vector<double>> trans =
            bus_transition_template(theta, config.n_states);
        AssembledInputs inputs = assemble_estimation_inputs(freq);
        EstimationResult est = estimate(inputs.ccps, trans, config.beta, shocks,
                                        config.benchmark, false, BoundaryPolicy::selection);

        mask_unvisited(est, inputs.visited);
        out.estimates.push_back(std::move(est));
        out.theta.push_back(theta);
        out.resample_seeds.push_back(rs);
        out.resample_indices.push_back(std::move(indices));
    }

    out.flow_quantiles.assign(config.n_states,
                              {std::nan(""), std::nan(""), std::nan(""), std::nan(""),
                               std::nan("")});
    out.quantile_counts.assign(config.n_states, 0);
    const int keep = config.benchmark == 1 ? 0 : 1;
    std::vector<double> values;
    for (int x = 0; x < config.n_states; ++x) {
        values.clear();
        for (const EstimationResult& est : out.estimates)
            if (est.identified[x]) values.push_back(est.flows[keep][x]);
        out.quantile_counts[x] = static_cast<long>(values.size());
        if (values.empty()) continue;
        std::sort(values.begin(), values.end());
        const double qs[5] = {0.05, 0.25, 0.50, 0.75, 0.95};
        for (int i = 0; i < 5; ++i) out.flow_quantiles[x][i] = quantile_sorted(values, qs[i]);
    }
    return out;
}

} // namespace mta
