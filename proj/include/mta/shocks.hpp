#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mta {

/**
 * Distribution of the per-choice utility shock vector. A spec is a value
 * object; nothing is sampled until discretize() is called.
 *
 * Families:
 *   GumbelIid                 iid Gumbel(0, scale) across choices
 *   MultivariateNormal        N(mean, cov), cov PSD (possibly singular)
 *   Mixture                   finite mixture of sub-specs of equal dimension
 *   StateDependentNormalMixture
 *                             two-part normal mixture template whose second
 *                             variance depends on the state; must be resolved
 *                             through mixture_for_state before discretizing
 *
 * Binary problems are represented with the benchmark shock pinned to zero:
 * component 0 carries the law of the shock difference, component 1 is
 * degenerate at 0.
 */
struct ShockSpec {
    enum class Family { GumbelIid, MultivariateNormal, Mixture, StateDependentNormalMixture };

    Family family = Family::GumbelIid;
    int dim = 0;

    // GumbelIid
    double scale = 1.0;

    // MultivariateNormal
    std::vector<double> mean; // dim
    std::vector<double> cov;  // dim*dim row-major, symmetric PSD

    // Mixture
    std::vector<double> weights;
    std::vector<ShockSpec> components;

    // StateDependentNormalMixture(a, b): weights (b, 1-b), variances (1, 1/(1+a*x))
    double a = 0.0;
    double b = 0.0;

    static ShockSpec gumbel_iid(int dim, double scale = 1.0);
    static ShockSpec multivariate_normal(std::vector<double> mean, std::vector<double> cov);
    static ShockSpec mixture(std::vector<double> weights, std::vector<ShockSpec> components);
    static ShockSpec state_dependent_normal_mixture(double a, double b);

    std::string family_name() const;
};

/// Throws validation_error naming the offending field if the spec is malformed.
void validate(const ShockSpec& spec);

/**
 * S iid draws from the spec, each carrying probability mass 1/S.
 * points is S x dim row-major: points[s*dim + y] is draw s, choice y.
 * Deterministic in (spec, n_draws, seed).
 */
struct DiscreteShocks {
    int n_draws = 0;
    int dim = 0;
    std::vector<double> points;
    std::uint64_t seed = 0;
    ShockSpec spec;

    double weight() const { return 1.0 / n_draws; }
    double at(int s, int y) const { return points[static_cast<std::size_t>(s) * dim + y]; }
};

DiscreteShocks discretize(const ShockSpec& spec, int n_draws, std::uint64_t seed);

class Rng64;

/**
 * Sampler with factorizations precomputed once per spec; draw() writes one
 * dim-length point. The per-point draw order is part of the frozen seed
 * mapping (rng.hpp): an MVN consumes dim normals, a mixture consumes one
 * uniform for the component pick and then that component's draws.
 */
class ShockSampler {
public:
    explicit ShockSampler(ShockSpec spec);

    void draw(Rng64& rng, double* out) const;
    int dim() const { return spec_.dim; }

private:
    ShockSpec spec_;
    std::vector<double> sqrt_d_;       // MVN: sqrt of the LDL^T diagonal
    std::vector<double> lower_;        // MVN: unit-lower factor
    std::vector<double> cum_weights_;  // mixture
    std::vector<ShockSampler> children_;
};

/**
 * Concrete two-component normal mixture for state x: weights (b, 1-b),
 * variances (1, 1/(1+a*x)), dimension 2 with the difference law on
 * component 0 and component 1 degenerate at zero.
 */
ShockSpec mixture_for_state(double a, double b, int x);

/// Identity for concrete specs; resolves a state-dependent template at state x.
ShockSpec resolve_for_state(const ShockSpec& spec, int x);

/// CSV dump with columns s,eps_0,...,eps_{dim-1}.
void dump_csv(const DiscreteShocks& shocks, std::ostream& out);

} // namespace mta
