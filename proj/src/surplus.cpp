#include "mta/surplus.hpp"

#include <cmath>
#include <string>

#include "mta/errors.hpp"

namespace mta {

CcpVector::CcpVector(std::vector<double> p) : probs(std::move(p)) {
    if (probs.empty())
        throw validation_error("CcpVector: empty probability vector");
    double total = 0.0;
    for (std::size_t y = 0; y < probs.size(); ++y) {
        const double v = probs[y];
        if (!(v >= 0.0 && v <= 1.0))
            throw validation_error("CcpVector: entry " + std::to_string(y) + " outside [0,1]");
        total += v;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw validation_error("CcpVector: probabilities sum to " + std::to_string(total));
    interior = true;
    for (double v : probs)
        if (v <= 0.0) { interior = false; break; }
}

static void check_dims(const PayoffVector& w, const DiscreteShocks& shocks, const char* who) {
    if (static_cast<int>(w.size()) != shocks.dim)
        throw validation_error(std::string(who) + ": payoff length != shock dimension");
}

double surplus_value(const PayoffVector& w, const DiscreteShocks& shocks) {
    check_dims(w, shocks, "surplus_value");
    const int d = shocks.dim;
    const double* pt = shocks.points.data();
    double acc = 0.0;
    for (int s = 0; s < shocks.n_draws; ++s, pt += d) {
        double best = w[0] + pt[0];
        for (int y = 1; y < d; ++y) {
            const double v = w[y] + pt[y];
            if (v > best) best = v;
        }
        acc += best;
    }
    return acc / shocks.n_draws;
}

int argmax_choice(const PayoffVector& w, const DiscreteShocks& shocks, int s) {
    check_dims(w, shocks, "argmax_choice");
    const double* pt = shocks.points.data() + static_cast<std::size_t>(s) * shocks.dim;
    int arg = 0;
    double best = w[0] + pt[0];
    for (int y = 1; y < shocks.dim; ++y) {
        const double v = w[y] + pt[y];
        if (v > best) { best = v; arg = y; }
    }
    return arg;
}

CcpVector choice_probs(const PayoffVector& w, const DiscreteShocks& shocks) {
    check_dims(w, shocks, "choice_probs");
    const int d = shocks.dim;
    std::vector<int> counts(d, 0);
    const double* pt = shocks.points.data();
    for (int s = 0; s < shocks.n_draws; ++s, pt += d) {
        int arg = 0;
        double best = w[0] + pt[0];
        for (int y = 1; y < d; ++y) {
            const double v = w[y] + pt[y];
            if (v > best) { best = v; arg = y; }
        }
        ++counts[arg];
    }
    std::vector<double> p(d);
    for (int y = 0; y < d; ++y) p[y] = static_cast<double>(counts[y]) / shocks.n_draws;
    return CcpVector(std::move(p));
}

int count_argmax_ties(const PayoffVector& w, const DiscreteShocks& shocks) {
    check_dims(w, shocks, "count_argmax_ties");
    const int d = shocks.dim;
    int ties = 0;
    const double* pt = shocks.points.data();
    for (int s = 0; s < shocks.n_draws; ++s, pt += d) {
        double best = w[0] + pt[0], second = -HUGE_VAL;
        for (int y = 1; y < d; ++y) {
            const double v = w[y] + pt[y];
            if (v > best) { second = best; best = v; }
            else if (v > second) second = v;
        }
        if (d > 1 && second == best) ++ties;
    }
    return ties;
}

PayoffVector logit_oracle_w0(const CcpVector& p) {
    if (!p.interior)
        throw validation_error("logit_oracle_w0: requires interior probabilities");
    PayoffVector w(p.size());
    for (int y = 0; y < p.size(); ++y) w[y] = std::log(p[y]) - euler_gamma;
    return w;
}

double logit_gstar(const CcpVector& p) {
    if (!p.interior)
        throw std::domain_error("logit_gstar: infinite on the boundary of the simplex");
    double acc = 0.0;
    for (int y = 0; y < p.size(); ++y) acc += p[y] * std::log(p[y]);
    return acc - euler_gamma;
}

} // namespace mta
