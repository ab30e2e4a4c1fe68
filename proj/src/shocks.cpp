#include "mta/shocks.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

#include "mta/errors.hpp"
#include "mta/linalg.hpp"
#include "mta/rng.hpp"

namespace mta {

ShockSpec ShockSpec::gumbel_iid(int dim, double scale) {
    ShockSpec s;
    s.family = Family::GumbelIid;
    s.dim = dim;
    s.scale = scale;
    return s;
}

ShockSpec ShockSpec::multivariate_normal(std::vector<double> mean, std::vector<double> cov) {
    ShockSpec s;
    s.family = Family::MultivariateNormal;
    s.dim = static_cast<int>(mean.size());
    s.mean = std::move(mean);
    s.cov = std::move(cov);
    return s;
}

ShockSpec ShockSpec::mixture(std::vector<double> weights, std::vector<ShockSpec> components) {
    ShockSpec s;
    s.family = Family::Mixture;
    s.dim = components.empty() ? 0 : components.front().dim;
    s.weights = std::move(weights);
    s.components = std::move(components);
    return s;
}

ShockSpec ShockSpec::state_dependent_normal_mixture(double a, double b) {
    ShockSpec s;
    s.family = Family::StateDependentNormalMixture;
    s.dim = 2;
    s.a = a;
    s.b = b;
    return s;
}

std::string ShockSpec::family_name() const {
    switch (family) {
        case Family::GumbelIid: return "gumbel_iid";
        case Family::MultivariateNormal: return "multivariate_normal";
        case Family::Mixture: return "mixture";
        case Family::StateDependentNormalMixture: return "state_dependent_normal_mixture";
    }
    return "?";
}

void validate(const ShockSpec& spec) {
    if (spec.dim <= 0)
        throw validation_error("ShockSpec: dim must be positive");
    switch (spec.family) {
        case ShockSpec::Family::GumbelIid:
            if (!(spec.scale > 0.0))
                throw validation_error("ShockSpec: gumbel scale must be positive");
            break;
        case ShockSpec::Family::MultivariateNormal: {
            const int d = spec.dim;
            if (static_cast<int>(spec.mean.size()) != d)
                throw validation_error("ShockSpec: mean length != dim");
            if (static_cast<int>(spec.cov.size()) != d * d)
                throw validation_error("ShockSpec: cov must be dim*dim");
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j)
                    if (std::fabs(spec.cov[i * d + j] - spec.cov[j * d + i]) > 1e-12)
                        throw validation_error("ShockSpec: cov is not symmetric");
            std::vector<double> l, diag; // PSD check happens inside the factorization
            ldlt_psd(spec.cov, d, l, diag);
            break;
        }
        case ShockSpec::Family::Mixture: {
            if (spec.components.empty())
                throw validation_error("ShockSpec: mixture needs at least one component");
            if (spec.weights.size() != spec.components.size())
                throw validation_error("ShockSpec: mixture weights/components size mismatch");
            double total = 0.0;
            for (double w : spec.weights) {
                if (w < 0.0) throw validation_error("ShockSpec: mixture weight is negative");
                total += w;
            }
            if (std::fabs(total - 1.0) > 1e-9)
                throw validation_error("ShockSpec: mixture weights must sum to 1");
            for (const ShockSpec& c : spec.components) {
                if (c.dim != spec.dim)
                    throw validation_error("ShockSpec: mixture component dimension mismatch");
                validate(c);
            }
            break;
        }
        case ShockSpec::Family::StateDependentNormalMixture:
            if (spec.a < 0.0) throw validation_error("ShockSpec: parameter a must be nonnegative");
            if (spec.b < 0.0 || spec.b > 1.0)
                throw validation_error("ShockSpec: parameter b must lie in [0,1]");
            break;
    }
}

ShockSampler::ShockSampler(ShockSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    if (spec_.family == ShockSpec::Family::StateDependentNormalMixture)
        throw validation_error(
            "ShockSampler: state-dependent spec needs a state; resolve via mixture_for_state");
    if (spec_.dim > 50)
        throw validation_error("ShockSampler: dimension cap is 50 choices");
    switch (spec_.family) {
        case ShockSpec::Family::MultivariateNormal: {
            std::vector<double> d;
            ldlt_psd(spec_.cov, spec_.dim, lower_, d);
            sqrt_d_.resize(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) sqrt_d_[i] = std::sqrt(d[i]);
            break;
        }
        case ShockSpec::Family::Mixture: {
            double c = 0.0;
            for (double w : spec_.weights) cum_weights_.push_back(c += w);
            children_.reserve(spec_.components.size());
            for (const ShockSpec& comp : spec_.components) children_.emplace_back(comp);
            break;
        }
        default: break;
    }
}

void ShockSampler::draw(Rng64& rng, double* out) const {
    const int d = spec_.dim;
    switch (spec_.family) {
        case ShockSpec::Family::GumbelIid:
            for (int y = 0; y < d; ++y) out[y] = rng.gumbel(spec_.scale);
            break;
        case ShockSpec::Family::MultivariateNormal: {
            double eta[64];
            for (int y = 0; y < d; ++y) eta[y] = sqrt_d_[y] * rng.normal();
            for (int i = 0; i < d; ++i) {
                double v = eta[i]; // unit diagonal
                for (int k = 0; k < i; ++k) v += lower_[i * d + k] * eta[k];
                out[i] = spec_.mean[i] + v;
            }
            break;
        }
        case ShockSpec::Family::Mixture: {
            const int k = rng.pick(cum_weights_.data(), static_cast<int>(cum_weights_.size()));
            children_[k].draw(rng, out);
            break;
        }
        case ShockSpec::Family::StateDependentNormalMixture:
            break; // unreachable, rejected in the constructor
    }
}

DiscreteShocks discretize(const ShockSpec& spec, int n_draws, std::uint64_t seed) {
    validate(spec);
    if (spec.family == ShockSpec::Family::StateDependentNormalMixture)
        throw validation_error(
            "discretize: state-dependent spec needs a state; resolve via mixture_for_state");
    if (n_draws <= 0)
        throw validation_error("discretize: n_draws must be positive");
    if (spec.dim > 50)
        throw validation_error("discretize: dimension cap is 50 choices");
    if (n_draws > 200000)
        throw validation_error("discretize: draw cap is 200000");

    DiscreteShocks out;
    out.n_draws = n_draws;
    out.dim = spec.dim;
    out.seed = seed;
    out.spec = spec;
    out.points.resize(static_cast<std::size_t>(n_draws) * spec.dim);

    ShockSampler sampler(spec);
    Rng64 rng(seed);
    for (int s = 0; s < n_draws; ++s)
        sampler.draw(rng, out.points.data() + static_cast<std::size_t>(s) * spec.dim);
    return out;
}

ShockSpec mixture_for_state(double a, double b, int x) {
    if (x < 0) throw validation_error("mixture_for_state: state must be nonnegative");
    const double v2 = 1.0 / (1.0 + a * x);
    auto comp = [](double var) {
        return ShockSpec::multivariate_normal({0.0, 0.0}, {var, 0.0, 0.0, 0.0});
    };
    ShockSpec s = ShockSpec::mixture({b, 1.0 - b}, {comp(1.0), comp(v2)});
    validate(s);
    return s;
}

ShockSpec resolve_for_state(const ShockSpec& spec, int x) {
    if (spec.family == ShockSpec::Family::StateDependentNormalMixture)
        return mixture_for_state(spec.a, spec.b, x);
    return spec;
}

void dump_csv(const DiscreteShocks& shocks, std::ostream& out) {
    out << "s";
    for (int y = 0; y < shocks.dim; ++y) out << ",eps_" << y;
    out << "\n";
    char buf[32];
    for (int s = 0; s < shocks.n_draws; ++s) {
        out << s;
        for (int y = 0; y < shocks.dim; ++y) {
            std::snprintf(buf, sizeof buf, "%.12g", shocks.at(s, y));
            out << ',' << buf;
        }
        out << "\n";
    }
}

} // namespace mta
