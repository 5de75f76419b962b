#pragma once

#include "crt/core.hpp"
#include "crt/errors.hpp"
#include "crt/numeric.hpp"

namespace crt {

namespace detail {
inline void require_both_arms(const ExperimentSample& s, const char* who) {
    long seen[2] = {0, 0};
    for (const auto& c : s.clusters()) ++seen[c.arm()];
    if (seen[0] == 0 || seen[1] == 0) {
        throw EmptyArm(std::string(who) + ": one treatment arm has no clusters");
    }
}
}  // namespace detail

// Difference in means of the pooled individual outcomes. Computed from the
// cached per-cluster aggregates: sum_i Y_i = |M_g| * mean_g.
inline double estimate_dim(const ExperimentSample& s) {
    detail::require_both_arms(s, "estimate_dim");
    KahanSum num[2], den[2];
    for (const auto& c : s.clusters()) {
        const double m = static_cast<double>(c.sampled_count());
        num[c.arm()].add(m * c.mean());
        den[c.arm()].add(m);
    }
    return num[1].value() / den[1].value() - num[0].value() / den[0].value();
}

// Difference in "average of averages": unweighted arm means of the cluster
// outcome means.
inline double estimate_theta1(const ExperimentSample& s) {
    detail::require_both_arms(s, "estimate_theta1");
    MomentAccum arm[2];
    for (const auto& c : s.clusters()) arm[c.arm()].add(c.mean());
    return arm[1].mean() - arm[0].mean();
}

// Difference in "weighted average of averages": arm means of the cluster
// outcome means weighted by true cluster size N_g.
inline double estimate_theta2(const ExperimentSample& s) {
    detail::require_both_arms(s, "estimate_theta2");
    KahanSum num[2], den[2];
    for (const auto& c : s.clusters()) {
        const double n = static_cast<double>(c.size());
        num[c.arm()].add(n * c.mean());
        den[c.arm()].add(n);
    }
    for (int a : {0, 1}) {
        if (!(den[a].value() > 0.0)) {
            throw ZeroSizeArm("estimate_theta2: zero total cluster size in one arm");
        }
    }
    return num[1].value() / den[1].value() - num[0].value() / den[0].value();
}

// Self-normalized variant of the size-weighted estimator, the one suited for
// regression adjustment: each arm's sum of N_g*mean_g over G is divided by
// mean size times that arm's share of clusters.
inline double estimate_theta2_sd(const ExperimentSample& s) {
    detail::require_both_arms(s, "estimate_theta2_sd");
    const double G = static_cast<double>(s.num_clusters());
    KahanSum num[2];
    KahanSum size_sum;
    long treated = 0;
    for (const auto& c : s.clusters()) {
        const double n = static_cast<double>(c.size());
        num[c.arm()].add(n * c.mean());
        size_sum.add(n);
        treated += c.arm();
    }
    const double mean_size = size_sum.value() / G;
    const double a_bar = static_cast<double>(treated) / G;
    return num[1].value() / G / (mean_size * a_bar) -
           num[0].value() / G / (mean_size * (1.0 - a_bar));
}

}  // namespace crt
