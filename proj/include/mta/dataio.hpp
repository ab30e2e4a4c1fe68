#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mta/ddc.hpp"
#include "mta/montecarlo.hpp"

namespace mta {

/**
 * One observation of one bus: cumulative mileage since the last engine
 * replacement and the replace decision taken that period. How a replacement
 * resets mileage inside the raw records is the data supplier's contract;
 * ingestion takes the file at face value.
 */
struct RawBusRecord {
    long bus_id;
    long period;
    double mileage;
    int replace;
};

/**
 * Reads a CSV with header `bus_id,t,mileage,replace`. Malformed rows
 * (missing columns, non-numeric fields, negative mileage, replace outside
 * {0,1}) are collected and reported together, by physical line number with
 * the header on line 1. Blank lines are skipped.
 */
std::vector<RawBusRecord> ingest_bus_csv(std::istream& in);
std::vector<RawBusRecord> ingest_bus_csv(const std::string& path);

/**
 * Mileage to a 30-state grid: state = min(floor(mileage / 12500), n_states-1).
 * Bus ids are remapped to dense agent indices in ascending id order; records
 * come out sorted by (agent, period).
 */
PanelData discretize_mileage(const std::vector<RawBusRecord>& records, int n_states = 30);

/**
 * Keep (y=0): stay with theta, advance one state with 1-theta, absorbing at
 * the top. Replace (y=1): to state 0 with theta, state 1 with 1-theta. The
 * two-theta overload frees the actions to advance at different rates; the
 * data pools them by default.
 */
std::vector<std::vector<double>> bus_transition_template(double theta, int n_states = 30);
std::vector<std::vector<double>> bus_transition_template(double theta_keep, double theta_replace,
                                                         int n_states);

/**
 * Pooled frequency of zero-increment transitions: keep pairs staying in
 * place vs advancing one state (pairs at the absorbing top state are
 * uninformative and skipped), replace pairs landing on state 0 vs state 1.
 * Pairs that fit neither pattern are ignored.
 */
double estimate_advance_theta(const PanelData& panel, int n_states = 30);

struct BootstrapConfig {
    int n_resamples = 100;
    int resample_size = 0; // 0: number of distinct buses; -1: identity resample (test mode)
    int n_draws = 2000;    // shock draws per state for the inversion
    std::uint64_t seed = 0;
    double a = 0.1; // state-dependent mixture variance slope
    double b = 0.5; // mixture weight on the unit-variance component
    double beta = 0.9;
    int benchmark = 1; // replace
    int n_states = 30;
};

struct BusPointEstimate {
    EstimationResult estimate;
    double theta = 0.0;
    std::vector<char> visited;
};

/**
 * Full pipeline on one panel: frequency CCPs, pooled theta, transition
 * template, per-state mixture shocks discretized with seeds derived from
 * config.seed, then payoff recovery under the selection policy (sampled
 * CCPs touch the boundary routinely; non-identified states stay flagged).
 */
BusPointEstimate bus_point_estimate(const PanelData& panel, const BootstrapConfig& config,
                                    bool with_bounds = false);

struct BootstrapResult {
    std::vector<EstimationResult> estimates;  // one per included resample
    std::vector<double> theta;                // aligned with estimates
    std::vector<std::uint64_t> resample_seeds; // aligned with estimates
    std::vector<std::vector<int>> resample_indices; // drawn bus indices, aligned
    std::vector<int> excluded;                // resample numbers flagged and dropped
    // per state: 5/25/50/75/95 percentiles of the keep flow across included
    // resamples where the state was visited and identified; NaN when none
    std::vector<std::array<double, 5>> flow_quantiles;
    std::vector<long> quantile_counts;        // values behind each quantile row
    std::vector<long> replacements_observed;  // action-1 observations per state, original panel
};

/**
 * Resamples whole buses with replacement and reruns the point-estimate
 * pipeline per resample. A resample whose benchmark CCP is on the boundary
 * at every visited state (or with no usable transition pairs) is excluded
 * and its number recorded. Shock draws are shared across resamples;
 * everything is a pure function of config.seed.
 */
BootstrapResult bootstrap_estimate(const PanelData& panel, const BootstrapConfig& config);

} // namespace mta
