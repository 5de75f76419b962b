#pragma once

#include <string>
#include <vector>

#include "crt/core.hpp"
#include "crt/errors.hpp"
#include "crt/numeric.hpp"

namespace crt {

// Three-part split of the consistent variance estimators: a within-stratum
// term, an across-stratum heterogeneity term, and a term for the dispersion
// the assignment mechanism leaves in the treated fractions.
struct VarianceDecomposition {
    double within = 0.0;
    double heterogeneity = 0.0;
    double assignment = 0.0;
    double total = 0.0;
};

// How a stratum with a missing treatment-arm cell enters the per-stratum
// sums. The formulas need both arm means per stratum, so the default refuses
// such samples outright. zero_weight_missing instead gives the undefined
// terms zero weight, the same convention used for strata absent from the
// sample altogether; the replication engine relies on it so that rare
// single-cluster strata do not abort a study.
enum class CellPolicy { require_both_arms, zero_weight_missing };

namespace detail {

// Shared skeleton of the two consistent estimators: feed it the per-cluster
// value (outcome mean, or the size-weighted arm-centered transform) and it
// evaluates the three components.
inline VarianceDecomposition decompose(const ExperimentSample& s,
                                       const std::vector<double>& value, CellPolicy policy) {
    const StratumIndex idx = StratumIndex::build(s);
    const double pi = s.pi();
    const double G = static_cast<double>(s.num_clusters());

    std::vector<MomentAccum> cell(idx.size() * 2);
    MomentAccum arm_wide[2];
    for (std::size_t g = 0; g < s.clusters().size(); ++g) {
        const int a = s.clusters()[g].arm();
        cell[static_cast<std::size_t>(idx.stratum_of[g]) * 2 + static_cast<std::size_t>(a)]
            .add(value[g]);
        arm_wide[a].add(value[g]);
    }
    if (arm_wide[0].count == 0 || arm_wide[1].count == 0) {
        throw EmptyArm("variance: one treatment arm has no clusters");
    }
    if (policy == CellPolicy::require_both_arms) {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (cell[k * 2].count == 0 || cell[k * 2 + 1].count == 0) {
                throw EmptyCell("variance: stratum '" + idx.labels[k] +
                                "' has an empty treatment arm");
            }
        }
    }

    KahanSum within1, within0, hetero, assign;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const MomentAccum& c0 = cell[k * 2];
        const MomentAccum& c1 = cell[k * 2 + 1];
        const double w = static_cast<double>(c0.count + c1.count) / G;
        if (c1.count > 0) within1.add(w * c1.mean() * c1.mean());
        if (c0.count > 0) within0.add(w * c0.mean() * c0.mean());
        if (c0.count > 0 && c1.count > 0) {
            const double d1 = c1.mean() - arm_wide[1].mean();
            const double d0 = c0.mean() - arm_wide[0].mean();
            hetero.add(w * (d1 - d0) * (d1 - d0));
            const double lever = d1 / pi + d0 / (1.0 - pi);
            assign.add(s.tau_for(idx.labels[k]) * w * lever * lever);
        }
    }

    VarianceDecomposition out;
    out.within = (arm_wide[1].mean_sq() - within1.value()) / pi +
                 (arm_wide[0].mean_sq() - within0.value()) / (1.0 - pi);
    out.heterogeneity = hetero.value();
    out.assignment = assign.value();
    out.total = out.within + out.heterogeneity + out.assignment;
    if (out.total < 0.0) {
        throw DegenerateVariance("variance: negative total " + std::to_string(out.total) +
                                 " (sample too small for the within-term subtraction)");
    }
    return out;
}

}  // namespace detail

// Consistent variance estimator for the equally-weighted estimator.
inline VarianceDecomposition var_theta1(const ExperimentSample& s,
                                        CellPolicy policy = CellPolicy::require_both_arms) {
    std::vector<double> value;
    value.reserve(s.clusters().size());
    for (const auto& c : s.clusters()) value.push_back(c.mean());
    return detail::decompose(s, value, policy);
}

// Consistent variance estimator for the size-weighted estimator. Built on the
// feasible transform hat_y = (N_g / mean N) * (mean_g - size-weighted mean of
// the cluster's own arm).
inline VarianceDecomposition var_theta2(const ExperimentSample& s,
                                        CellPolicy policy = CellPolicy::require_both_arms) {
    const SizeWeightedCenters ctx = size_weighted_centers(s);
    std::vector<double> value;
    value.reserve(s.clusters().size());
    for (const auto& c : s.clusters()) {
        value.push_back(transform_value(c, TransformKind::hat_y, &ctx));
    }
    return detail::decompose(s, value, policy);
}

// Heteroskedasticity-robust variance of the equally-weighted estimator, i.e.
// what OLS of the cluster means on treatment reports. Consistent only when
// the design leaves full Bernoulli dispersion in every stratum; otherwise it
// over-covers.
inline double var_hc_theta1(const ExperimentSample& s) {
    MomentAccum arm[2];
    for (const auto& c : s.clusters()) arm[c.arm()].add(c.mean());
    if (arm[0].count == 0 || arm[1].count == 0) {
        throw EmptyArm("var_hc_theta1: one treatment arm has no clusters");
    }
    const double G = static_cast<double>(s.num_clusters());
    const double a_bar = static_cast<double>(arm[1].count) / G;
    const double v1 = arm[1].mean_sq() - arm[1].mean() * arm[1].mean();
    const double v0 = arm[0].mean_sq() - arm[0].mean() * arm[0].mean();
    return v1 / a_bar + v0 / (1.0 - a_bar);
}

// Per-cluster residual sums sum_{i in M_g} (Y_i - c_a), with c_a the
// size-weighted outcome mean of the cluster's arm. These are exactly the
// inputs the cluster-robust estimator needs, and they only require the
// cached aggregates.
inline std::vector<double> cr_residual_sums(const ExperimentSample& s) {
    const SizeWeightedCenters ctx = size_weighted_centers(s);
    std::vector<double> sums;
    sums.reserve(s.clusters().size());
    for (const auto& c : s.clusters()) {
        sums.push_back(static_cast<double>(c.sampled_count()) *
                       (c.mean() - ctx.center[c.arm()]));
    }
    return sums;
}

// Cluster-robust variance of the size-weighted estimator (the conventional
// weighted-least-squares sandwich). Generally conservative under designs
// with strong balance.
inline double var_cr_theta2(const ExperimentSample& s,
                            const std::vector<double>& residual_sums) {
    if (residual_sums.size() != s.clusters().size()) {
        throw DomainError("var_cr_theta2: residual sums must be one per cluster");
    }
    const double G = static_cast<double>(s.num_clusters());
    KahanSum size_sum[2], meat[2];
    for (std::size_t g = 0; g < s.clusters().size(); ++g) {
        const auto& c = s.clusters()[g];
        const double n = static_cast<double>(c.size());
        const double ratio = n / static_cast<double>(c.sampled_count());
        size_sum[c.arm()].add(n);
        meat[c.arm()].add(ratio * ratio * residual_sums[g] * residual_sums[g]);
    }
    double total = 0.0;
    for (int a : {0, 1}) {
        if (!(size_sum[a].value() > 0.0)) {
            throw ZeroSizeArm("var_cr_theta2: zero total cluster size in one arm");
        }
        const double avg_size = size_sum[a].value() / G;
        total += meat[a].value() / G / (avg_size * avg_size);
    }
    return total;
}

// Full potential-outcome lists for one cluster; simulation/oracle use only.
struct ClusterPotential {
    std::vector<double> treated;  // Y_i(1), i = 1..N_g
    std::vector<double> control;  // Y_i(0)
};

// Finite-population design-based variance of the size-weighted estimator
// under complete randomization with a single stratum and full sampling. The
// subtracted term is the precision gained from observing the whole
// population's treatment-effect heterogeneity.
inline double var_finpop_theta2(const std::vector<ClusterPotential>& pop, double pi) {
    if (!(pi > 0.0) || !(pi < 1.0)) {
        throw DomainError("var_finpop_theta2: pi must lie strictly inside (0,1)");
    }
    if (pop.empty()) {
        throw DomainError("var_finpop_theta2: need at least one cluster");
    }
    KahanSum tot1, tot0;
    long units = 0;
    for (const auto& c : pop) {
        if (c.treated.size() != c.control.size() || c.treated.empty()) {
            throw DomainError("var_finpop_theta2: each cluster needs matching Y(1)/Y(0) lists");
        }
        units += static_cast<long>(c.treated.size());
        for (double y : c.treated) tot1.add(y);
        for (double y : c.control) tot0.add(y);
    }
    const double n_units = static_cast<double>(units);
    const double mean1 = tot1.value() / n_units;
    const double mean0 = tot0.value() / n_units;

    const double G = static_cast<double>(pop.size());
    KahanSum main_term, het_term;
    for (const auto& c : pop) {
        KahanSum s1, s0;
        for (double y : c.treated) s1.add(y - mean1);
        for (double y : c.control) s0.add(y - mean0);
        main_term.add(s1.value() * s1.value() / pi +
                      s0.value() * s0.value() / (1.0 - pi));
        const double d = s1.value() - s0.value();
        het_term.add(d * d);
    }
    const double scale = G / n_units;
    return scale * scale * (main_term.value() / G - het_term.value() / G);
}

}  // namespace crt
