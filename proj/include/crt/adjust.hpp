#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "crt/core.hpp"
#include "crt/errors.hpp"
#include "crt/inference.hpp"
#include "crt/numeric.hpp"

namespace crt {

// User-specified per-stratum feature map for linear adjustment. The callable
// sees the whole cluster record (covariates, size, stratum label) and returns
// the feature vector; its dimension must be constant within a stratum.
// An empty vector means intercept-only adjustment.
struct CovariateDesign {
    std::function<std::vector<double>(const ClusterRecord&)> features;

    static CovariateDesign intercept_only() {
        return {[](const ClusterRecord&) { return std::vector<double>{}; }};
    }

    // Features taken from the cluster's covariate vector by position,
    // optionally with the cluster size appended.
    static CovariateDesign from_covariates(std::vector<std::size_t> indices,
                                           bool include_size = false) {
        return {[indices = std::move(indices), include_size](const ClusterRecord& c) {
            std::vector<double> psi;
            psi.reserve(indices.size() + (include_size ? 1 : 0));
            for (std::size_t i : indices) {
                if (i >= c.covariates().size()) {
                    throw DomainError("CovariateDesign: covariate index out of range (cluster " +
                                      c.id() + ")");
                }
                psi.push_back(c.covariates()[i]);
            }
            if (include_size) psi.push_back(static_cast<double>(c.size()));
            return psi;
        }};
    }
};

namespace detail {

// Least squares via modified Gram-Schmidt QR with re-orthogonalization.
// Columns are rejected as dependent when their remaining norm falls below
// 1e-10 times the largest original column norm.
inline std::vector<double> qr_least_squares(std::vector<std::vector<double>> cols,
                                            const std::vector<double>& response,
                                            const std::string& context) {
    const std::size_t n = response.size();
    const std::size_t p = cols.size();

    double max_norm = 0.0;
    for (const auto& col : cols) {
        double ss = 0.0;
        for (double v : col) ss += v * v;
        max_norm = std::max(max_norm, std::sqrt(ss));
    }
    const double tol = 1e-10 * max_norm;

    std::vector<std::vector<double>> q(p);
    std::vector<std::vector<double>> r(p, std::vector<double>(p, 0.0));
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> v = cols[j];
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += q[k][i] * v[i];
                r[k][j] += dot;
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q[k][i];
            }
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (!(norm > tol)) {
            throw RankDeficient("least squares: dependent design column in " + context);
        }
        r[j][j] = norm;
        for (double& x : v) x /= norm;
        q[j] = std::move(v);
    }

    std::vector<double> qty(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) qty[j] += q[j][i] * response[i];
    }
    std::vector<double> beta(p, 0.0);
    for (std::size_t j = p; j-- > 0;) {
        double acc = qty[j];
        for (std::size_t k = j + 1; k < p; ++k) acc -= r[j][k] * beta[k];
        beta[j] = acc / r[j][j];
    }
    return beta;
}

}  // namespace detail

// Linear covariate adjustment for the equally-weighted or size-weighted
// estimand. Fits per-(stratum, arm) regressions of the working outcome on a
// constant plus the features, then averages the doubly-robust-style augmented
// observations. The realized per-stratum treated fraction enters the weights.
inline EstimateReport adjusted_estimate(const ExperimentSample& s, EstimandKind target,
                                        const CovariateDesign& design, double alpha = 0.05) {
    if (target != EstimandKind::theta1 && target != EstimandKind::theta2) {
        throw DomainError("adjusted_estimate: target must be theta1 or theta2");
    }
    const bool size_weighted = (target == EstimandKind::theta2);
    const detail::StratumIndex idx = detail::StratumIndex::build(s);
    const std::size_t n_strata = idx.size();
    const std::size_t G = s.clusters().size();

    // Working outcome V_g and weight nu_g for the chosen estimand.
    std::vector<double> v(G), nu(G);
    std::vector<std::vector<double>> psi(G);
    std::vector<std::size_t> dim(n_strata, 0);
    std::vector<bool> dim_seen(n_strata, false);
    for (std::size_t g = 0; g < G; ++g) {
        const auto& c = s.clusters()[g];
        v[g] = size_weighted ? static_cast<double>(c.size()) * c.mean() : c.mean();
        nu[g] = size_weighted ? static_cast<double>(c.size()) : 1.0;
        psi[g] = design.features(c);
        for (double x : psi[g]) {
            if (!std::isfinite(x)) {
                throw DomainError("adjusted_estimate: non-finite feature (cluster " + c.id() + ")");
            }
        }
        const auto k = static_cast<std::size_t>(idx.stratum_of[g]);
        if (!dim_seen[k]) {
            dim[k] = psi[g].size();
            dim_seen[k] = true;
        } else if (psi[g].size() != dim[k]) {
            throw DomainError("adjusted_estimate: feature dimension varies within stratum '" +
                              idx.labels[k] + "'");
        }
    }

    std::vector<std::vector<std::size_t>> cell(n_strata * 2);
    for (std::size_t g = 0; g < G; ++g) {
        cell[static_cast<std::size_t>(idx.stratum_of[g]) * 2 +
             static_cast<std::size_t>(s.clusters()[g].arm())]
            .push_back(g);
    }

    // Per-cell regression coefficients (intercept first).
    std::vector<std::vector<double>> beta(n_strata * 2);
    for (std::size_t k = 0; k < n_strata; ++k) {
        for (int a : {0, 1}) {
            const auto& members = cell[k * 2 + static_cast<std::size_t>(a)];
            if (members.empty()) {
                throw EmptyCell("adjusted_estimate: stratum '" + idx.labels[k] +
                                "' has an empty treatment arm");
            }
            if (members.size() < dim[k] + 2) {
                throw RankDeficient("adjusted_estimate: stratum '" + idx.labels[k] +
                                    "' arm " + std::to_string(a) + " has fewer than d+2 clusters");
            }
            std::vector<std::vector<double>> cols(dim[k] + 1,
                                                  std::vector<double>(members.size()));
            std::vector<double> y(members.size());
            for (std::size_t i = 0; i < members.size(); ++i) {
                cols[0][i] = 1.0;
                for (std::size_t j = 0; j < dim[k]; ++j) cols[j + 1][i] = psi[members[i]][j];
                y[i] = v[members[i]];
            }
            beta[k * 2 + static_cast<std::size_t>(a)] =
                detail::qr_least_squares(std::move(cols), y, "stratum '" + idx.labels[k] + "'");
        }
    }

    auto eta = [&](int a, std::size_t g) {
        const auto k = static_cast<std::size_t>(idx.stratum_of[g]);
        const auto& b = beta[k * 2 + static_cast<std::size_t>(a)];
        double fit = b[0];
        for (std::size_t j = 0; j < dim[k]; ++j) fit += b[j + 1] * psi[g][j];
        return fit;
    };

    std::vector<double> pihat(n_strata);
    for (std::size_t k = 0; k < n_strata; ++k) {
        const double n1 = static_cast<double>(cell[k * 2 + 1].size());
        const double ns = n1 + static_cast<double>(cell[k * 2].size());
        pihat[k] = n1 / ns;
    }

    // Augmented observations and the point estimate.
    std::vector<double> xi(G);
    KahanSum xi_sum, size_sum;
    for (std::size_t g = 0; g < G; ++g) {
        const auto k = static_cast<std::size_t>(idx.stratum_of[g]);
        const double e1 = eta(1, g), e0 = eta(0, g);
        const int a = s.clusters()[g].arm();
        xi[g] = (a == 1 ? (v[g] - e1) / pihat[k] : -(v[g] - e0) / (1.0 - pihat[k])) + e1 - e0;
        xi_sum.add(xi[g]);
        size_sum.add(static_cast<double>(s.clusters()[g].size()));
    }
    if (size_weighted && !(size_sum.value() > 0.0)) {
        throw ZeroSizeArm("adjusted_estimate: zero total cluster size");
    }
    const double g_real = static_cast<double>(G);
    const double estimate =
        size_weighted ? xi_sum.value() / size_sum.value() : xi_sum.value() / g_real;

    // Influence pieces for the variance.
    std::vector<double> omega_own(G);  // Omega-tilde for the cluster's own arm
    std::vector<KahanSum> omega_cell(n_strata * 2);
    std::vector<KahanSum> nu_stratum(n_strata), v_cell1(n_strata), v_cell0(n_strata);
    for (std::size_t g = 0; g < G; ++g) {
        const auto k = static_cast<std::size_t>(idx.stratum_of[g]);
        const double e1 = eta(1, g), e0 = eta(0, g);
        const int a = s.clusters()[g].arm();
        if (a == 1) {
            omega_own[g] = (1.0 - 1.0 / pihat[k]) * e1 - e0 + v[g] / pihat[k];
            v_cell1[k].add(v[g]);
        } else {
            omega_own[g] = (1.0 / (1.0 - pihat[k]) - 1.0) * e0 - e1 + v[g] / (1.0 - pihat[k]);
            v_cell0[k].add(v[g]);
        }
        omega_cell[k * 2 + static_cast<std::size_t>(a)].add(omega_own[g]);
        nu_stratum[k].add(nu[g]);
    }

    std::vector<double> omega2(n_strata);
    for (std::size_t k = 0; k < n_strata; ++k) {
        const double n1 = static_cast<double>(cell[k * 2 + 1].size());
        const double n0 = static_cast<double>(cell[k * 2].size());
        const double ns = n1 + n0;
        omega2[k] = v_cell1[k].value() / n1 - v_cell0[k].value() / n0 -
                    estimate * (nu_stratum[k].value() / ns);
    }

    KahanSum var_sum;
    for (std::size_t g = 0; g < G; ++g) {
        const auto k = static_cast<std::size_t>(idx.stratum_of[g]);
        const int a = s.clusters()[g].arm();
        const double n_cell = static_cast<double>(cell[k * 2 + static_cast<std::size_t>(a)].size());
        const double ns = static_cast<double>(cell[k * 2].size() + cell[k * 2 + 1].size());
        const double centered = omega_own[g] -
                                omega_cell[k * 2 + static_cast<std::size_t>(a)].value() / n_cell -
                                estimate * (nu[g] - nu_stratum[k].value() / ns);
        var_sum.add(centered * centered + omega2[k] * omega2[k]);
    }
    double variance = var_sum.value() / g_real;
    if (size_weighted) {
        const double mean_size = size_sum.value() / g_real;
        variance /= mean_size * mean_size;
    }
    if (variance < 0.0) {
        throw DegenerateVariance("adjusted_estimate: negative variance estimate");
    }

    EstimateReport report;
    report.target = target;
    report.estimate = estimate;
    report.variance = variance;
    report.std_error = std::sqrt(variance / g_real);
    report.alpha = alpha;
    report.num_clusters = static_cast<long>(G);
    report.variance_kind = VarianceKind::adjusted;
    auto [lo, hi] = confidence_interval(estimate, variance, static_cast<long>(G), alpha);
    report.ci_lower = lo;
    report.ci_upper = hi;
    return report;
}

}  // namespace crt
