#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "crt/core.hpp"
#include "crt/errors.hpp"
#include "crt/numeric.hpp"
#include "crt/randomization.hpp"
#include "crt/rng.hpp"
#include "crt/variance.hpp"

namespace crt {

// Cluster sizes are N = 10(B+1) with B Beta-Binomial(a, b) on {0,...,n_supp},
// so the size support is {10, 20, ..., 10(n_supp+1)}.
struct SizeDist {
    double a = 1.0;
    double b = 1.0;
    long n_supp = 49;

    long n_max() const { return 10 * (n_supp + 1); }
};

enum class OutcomeDesign { design1, design2 };
enum class SamplingRule { full, fixed10, capped_fraction };
enum class CarScheme { car1, car2 };

struct DgpConfig {
    SizeDist size_dist;
    OutcomeDesign design = OutcomeDesign::design1;
    SamplingRule sampling_rule = SamplingRule::full;
    CarScheme car = CarScheme::car1;
    long num_clusters = 100;  // G
    double pi = 0.5;
};

struct TrueEstimands {
    double theta1 = 0.0;
    double theta2 = 0.0;
};

// Beta-Binomial pmf through log-gamma.
inline double beta_binomial_pmf(double a, double b, long n, long k) {
    if (!(a > 0.0) || !(b > 0.0) || n < 1) {
        throw DomainError("beta_binomial_pmf: need a > 0, b > 0, n >= 1");
    }
    if (k < 0 || k > n) {
        throw DomainError("beta_binomial_pmf: k outside [0, n]");
    }
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n);
    const double log_choose =
        std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
    const double log_beta_num =
        std::lgamma(kk + a) + std::lgamma(nn - kk + b) - std::lgamma(nn + a + b);
    const double log_beta_den = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp(log_choose + log_beta_num - log_beta_den);
}

// Tabulated pmf/cdf of B, with exact-pmf mean and inverse-cdf sampling.
class BetaBinomialTable {
  public:
    BetaBinomialTable(double a, double b, long n_supp) : n_(n_supp) {
        pmf_.reserve(static_cast<std::size_t>(n_supp) + 1);
        cdf_.reserve(static_cast<std::size_t>(n_supp) + 1);
        KahanSum cum, mean;
        for (long k = 0; k <= n_supp; ++k) {
            const double p = beta_binomial_pmf(a, b, n_supp, k);
            pmf_.push_back(p);
            cum.add(p);
            cdf_.push_back(cum.value());
            mean.add(p * static_cast<double>(k));
        }
        mean_ = mean.value();
    }

    const std::vector<double>& pmf() const { return pmf_; }
    double cdf(long k) const { return cdf_[static_cast<std::size_t>(k)]; }
    double mean() const { return mean_; }
    long support() const { return n_; }

    long sample(Rng& rng) const {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<long>(static_cast<long>(it - cdf_.begin()), n_);
    }

  private:
    long n_;
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    double mean_ = 0.0;
};

// The covariate Z2 is Beta(2,2) standardized by its population moments
// (mean 1/2, variance 1/20), giving support [-sqrt(5), sqrt(5)].
namespace dgp_detail {
inline constexpr double z2_scale = 4.47213595499957939282;  // sqrt(20)
inline constexpr double z2_halfspan = 2.23606797749978969641;  // sqrt(5)

inline double standardize_beta(double b) { return (b - 0.5) * z2_scale; }

inline double m1(double z) { return z; }
inline double m0(double z) { return z <= 0.5 ? -std::log(z + 3.0) : 0.0; }

// Beta(2,2) is the distribution of the median of three iid uniforms.
inline double sample_beta22(Rng& rng) {
    double u0 = rng.uniform01(), u1 = rng.uniform01(), u2 = rng.uniform01();
    const double lo = std::min(u0, std::min(u1, u2));
    const double hi = std::max(u0, std::max(u1, u2));
    return u0 + u1 + u2 - lo - hi;
}
}  // namespace dgp_detail

// E[m0(Z2)] by Gauss-Legendre quadrature. The indicator in m0 cuts the
// integrand at z = 1/2, so the quadrature runs over exactly the region where
// the integrand is smooth and nonzero; node-doubling then converges to
// machine precision.
inline double m0_centering_constant(std::size_t nodes = 64) {
    const double b_star = 0.5 + 0.5 / dgp_detail::z2_scale;
    return integrate(
        [](double b) {
            const double z = dgp_detail::standardize_beta(b);
            return -std::log(z + 3.0) * 6.0 * b * (1.0 - b);
        },
        0.0, b_star, nodes);
}

// E[m1(Z2)] = E[Z2] = 0 by the standardization; kept for symmetry.
inline double m1_centering_constant() { return 0.0; }

// Analytic estimands. Design 1 has both equal to zero by symmetry of Z1;
// design 2 ties the sign of Z1's mean to whether N is above its expectation.
inline TrueEstimands true_estimands(const DgpConfig& cfg) {
    if (cfg.design == OutcomeDesign::design1) return {0.0, 0.0};
    const BetaBinomialTable tbl(cfg.size_dist.a, cfg.size_dist.b, cfg.size_dist.n_supp);
    const double mean_size = 10.0 * (tbl.mean() + 1.0);
    KahanSum p_big, size_big, size_small;
    for (long k = 0; k <= cfg.size_dist.n_supp; ++k) {
        const double n = 10.0 * (static_cast<double>(k) + 1.0);
        const double p = tbl.pmf()[static_cast<std::size_t>(k)];
        if (n >= mean_size) {
            p_big.add(p);
            size_big.add(p * n);
        } else {
            size_small.add(p * n);
        }
    }
    TrueEstimands out;
    out.theta1 = 2.0 * p_big.value() - 1.0;
    // For symmetric size distributions theta1 is zero exactly; shed the
    // trailing rounding noise of the pmf sum.
    if (std::fabs(out.theta1) < 1e-12) out.theta1 = 0.0;
    out.theta2 = (size_big.value() - size_small.value()) / mean_size;
    return out;
}

namespace dgp_detail {

inline long sampled_count(SamplingRule rule, long size) {
    switch (rule) {
        case SamplingRule::full: return size;
        case SamplingRule::fixed10: return std::min<long>(10, size);
        case SamplingRule::capped_fraction: {
            const long frac = static_cast<long>(std::floor(0.4 * static_cast<double>(size)));
            return std::max<long>(10, std::min<long>(frac, 200));
        }
    }
    throw DomainError("sampled_count: unknown sampling rule");
}

inline std::string car1_label(double z2) {
    const double width = 2.0 * z2_halfspan / 10.0;
    long idx = static_cast<long>(std::floor((z2 + z2_halfspan) / width));
    idx = std::clamp<long>(idx, 0, 9);
    return "z" + std::to_string(idx);
}

inline std::string car2_label(double z2, long size, long median_size) {
    const double width = 2.0 * z2_halfspan / 5.0;
    long idx = static_cast<long>(std::floor((z2 + z2_halfspan) / width));
    idx = std::clamp<long>(idx, 0, 4);
    return "z" + std::to_string(idx) + (size >= median_size ? "|big" : "|small");
}

// Population median of N: smallest support point whose CDF reaches 1/2.
inline long median_size(const BetaBinomialTable& tbl) {
    for (long k = 0; k <= tbl.support(); ++k) {
        if (tbl.cdf(k) >= 0.5) return 10 * (k + 1);
    }
    return 10 * (tbl.support() + 1);
}

}  // namespace dgp_detail

struct OracleSample {
    ExperimentSample sample;
    std::vector<ClusterPotential> potential;  // parallel to sample.clusters()
};

namespace dgp_detail {

inline OracleSample generate_impl(const DgpConfig& cfg, Rng& rng, bool with_potential) {
    if (cfg.num_clusters < 2) {
        throw DomainError("generate_sample: G must be at least 2");
    }
    const BetaBinomialTable tbl(cfg.size_dist.a, cfg.size_dist.b, cfg.size_dist.n_supp);
    const double mean_size = 10.0 * (tbl.mean() + 1.0);
    const long med = median_size(tbl);
    static const double m0c = m0_centering_constant();
    const double noise_sd[2] = {1.0, std::sqrt(2.0)};

    struct Draft {
        long size;
        double z1, z2, eta0, eta1;
        std::string stratum;
    };
    std::vector<Draft> drafts;
    drafts.reserve(static_cast<std::size_t>(cfg.num_clusters));
    std::vector<std::string> strata;
    strata.reserve(static_cast<std::size_t>(cfg.num_clusters));

    for (long g = 0; g < cfg.num_clusters; ++g) {
        Draft d;
        d.size = 10 * (tbl.sample(rng) + 1);
        d.z2 = standardize_beta(sample_beta22(rng));
        double p_plus = 0.5;
        if (cfg.design == OutcomeDesign::design2) {
            p_plus = static_cast<double>(d.size) >= mean_size ? 0.75 : 0.25;
        }
        d.z1 = rng.bernoulli(p_plus) ? 1.0 : -1.0;
        d.eta0 = rng.uniform(0.0, 1.0);
        d.eta1 = rng.uniform(0.0, 5.0);
        d.stratum = cfg.car == CarScheme::car1 ? car1_label(d.z2)
                                               : car2_label(d.z2, d.size, med);
        strata.push_back(d.stratum);
        drafts.push_back(std::move(d));
    }

    Assignment assignment = assign({MechanismKind::sbr, cfg.pi}, strata, rng);

    std::vector<ClusterRecord> clusters;
    clusters.reserve(drafts.size());
    std::vector<ClusterPotential> potential;
    if (with_potential) potential.reserve(drafts.size());

    for (std::size_t g = 0; g < drafts.size(); ++g) {
        const Draft& d = drafts[g];
        const int arm = assignment.arms[g];
        const double base[2] = {d.eta0 * d.z1 + (m0(d.z2) - m0c),
                                d.eta1 * d.z1 + m1(d.z2)};
        const long m = sampled_count(cfg.sampling_rule, d.size);
        std::vector<double> outcomes;
        outcomes.reserve(static_cast<std::size_t>(m));
        if (with_potential) {
            ClusterPotential pot;
            pot.treated.reserve(static_cast<std::size_t>(d.size));
            pot.control.reserve(static_cast<std::size_t>(d.size));
            for (long i = 0; i < d.size; ++i) {
                pot.treated.push_back(base[1] + rng.normal(0.0, noise_sd[1]));
                pot.control.push_back(base[0] + rng.normal(0.0, noise_sd[0]));
            }
            const std::vector<long> sampled = subsample_units(d.size, m, rng);
            for (long unit : sampled) {
                const auto i = static_cast<std::size_t>(unit - 1);
                outcomes.push_back(arm == 1 ? pot.treated[i] : pot.control[i]);
            }
            potential.push_back(std::move(pot));
        } else {
            // Units are exchangeable, so only the observed arm's noise for the
            // sampled units ever needs to be drawn; the subset itself is still
            // drawn uniformly as the sampling framework prescribes.
            const std::vector<long> sampled = subsample_units(d.size, m, rng);
            (void)sampled;
            for (long i = 0; i < m; ++i) {
                outcomes.push_back(base[arm] + rng.normal(0.0, noise_sd[arm]));
            }
        }
        clusters.emplace_back(std::to_string(g), d.size, std::move(outcomes),
                              std::vector<double>{d.z1, d.z2}, d.stratum, arm);
    }

    return OracleSample{ExperimentSample(std::move(clusters), cfg.pi, std::move(assignment.tau)),
                        std::move(potential)};
}

}  // namespace dgp_detail

inline ExperimentSample generate_sample(const DgpConfig& cfg, Rng& rng) {
    return dgp_detail::generate_impl(cfg, rng, false).sample;
}

inline OracleSample generate_sample_with_potential(const DgpConfig& cfg, Rng& rng) {
    return dgp_detail::generate_impl(cfg, rng, true);
}

inline const char* to_string(OutcomeDesign d) {
    return d == OutcomeDesign::design1 ? "design1" : "design2";
}
inline const char* to_string(SamplingRule r) {
    switch (r) {
        case SamplingRule::full: return "full";
        case SamplingRule::fixed10: return "fixed10";
        case SamplingRule::capped_fraction: return "capped_fraction";
    }
    return "?";
}
inline const char* to_string(CarScheme c) { return c == CarScheme::car1 ? "car1" : "car2"; }

}  // namespace crt
