#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crt/errors.hpp"
#include "crt/numeric.hpp"

namespace crt {

// One sampled cluster. The outcome mean is cached at construction so that
// downstream formulas can work from cluster-level aggregates alone and the
// individual rows can be streamed and discarded by callers that need to.
class ClusterRecord {
  public:
    ClusterRecord(std::string id, long size, std::vector<double> sampled_outcomes,
                  std::vector<double> covariates, std::string stratum, int arm)
        : id_(std::move(id)),
          size_(size),
          outcomes_(std::move(sampled_outcomes)),
          covariates_(std::move(covariates)),
          stratum_(std::move(stratum)),
          arm_(arm) {
        if (size_ < 1) {
            throw DomainError("ClusterRecord: cluster size must be >= 1 (id=" + id_ + ")");
        }
        if (outcomes_.empty() || static_cast<long>(outcomes_.size()) > size_) {
            throw DomainError("ClusterRecord: need 1 <= sampled outcomes <= size (id=" + id_ + ")");
        }
        if (arm_ != 0 && arm_ != 1) {
            throw DomainError("ClusterRecord: arm must be 0 or 1 (id=" + id_ + ")");
        }
        KahanSum acc;
        for (double y : outcomes_) {
            if (!std::isfinite(y)) {
                throw DomainError("ClusterRecord: non-finite outcome (id=" + id_ + ")");
            }
            acc.add(y);
        }
        mean_ = acc.value() / static_cast<double>(outcomes_.size());
    }

    const std::string& id() const { return id_; }
    long size() const { return size_; }
    const std::vector<double>& sampled_outcomes() const { return outcomes_; }
    long sampled_count() const { return static_cast<long>(outcomes_.size()); }
    const std::vector<double>& covariates() const { return covariates_; }
    const std::string& stratum() const { return stratum_; }
    int arm() const { return arm_; }
    double mean() const { return mean_; }

  private:
    std::string id_;
    long size_;
    std::vector<double> outcomes_;
    std::vector<double> covariates_;
    std::string stratum_;
    int arm_;
    double mean_;
};

inline double cluster_mean(const ClusterRecord& c) { return c.mean(); }

// A full experiment: G clusters plus the design metadata the variance
// formulas need (target treated fraction and per-stratum assignment
// dispersion tau). tau is a property of the design, supplied by the caller,
// never inferred from the data.
class ExperimentSample {
  public:
    ExperimentSample(std::vector<ClusterRecord> clusters, double pi,
                     std::map<std::string, double> tau)
        : clusters_(std::move(clusters)), pi_(pi), tau_(std::move(tau)) {
        if (clusters_.size() < 2) {
            throw DomainError("ExperimentSample: need at least 2 clusters");
        }
        if (!(pi_ > 0.0) || !(pi_ < 1.0)) {
            throw DomainError("ExperimentSample: pi must lie strictly inside (0,1)");
        }
        const double tau_max = pi_ * (1.0 - pi_) + 1e-12;
        for (const auto& [label, t] : tau_) {
            if (t < -1e-12 || t > tau_max) {
                throw DomainError("ExperimentSample: tau(" + label + ") outside [0, pi(1-pi)]");
            }
        }
        for (const auto& c : clusters_) {
            if (tau_.find(c.stratum()) == tau_.end()) {
                throw DomainError("ExperimentSample: stratum '" + c.stratum() +
                                  "' missing from tau map");
            }
        }
    }

    const std::vector<ClusterRecord>& clusters() const { return clusters_; }
    long num_clusters() const { return static_cast<long>(clusters_.size()); }
    double pi() const { return pi_; }
    const std::map<std::string, double>& tau() const { return tau_; }

    double tau_for(const std::string& stratum) const {
        auto it = tau_.find(stratum);
        if (it == tau_.end()) {
            throw UnknownStratum("unknown stratum '" + stratum + "'");
        }
        return it->second;
    }

  private:
    std::vector<ClusterRecord> clusters_;
    double pi_;
    std::map<std::string, double> tau_;
};

// Which per-cluster statistic feeds a stratum/arm average.
enum class TransformKind {
    mean,           // cluster outcome mean
    mean_sq,        // squared outcome mean
    size,           // N_g
    size_weighted,  // N_g * mean
    hat_y,          // size-weighted, arm-centered transform
    hat_y_sq,
};

enum class EstimandKind { dim, theta1, theta2, theta2_sd };
enum class VarianceKind { consistent, hc_naive, cluster_robust, adjusted };

inline const char* to_string(EstimandKind k) {
    switch (k) {
        case EstimandKind::dim: return "dim";
        case EstimandKind::theta1: return "theta1";
        case EstimandKind::theta2: return "theta2";
        case EstimandKind::theta2_sd: return "theta2_sd";
    }
    return "?";
}

inline const char* to_string(VarianceKind k) {
    switch (k) {
        case VarianceKind::consistent: return "consistent";
        case VarianceKind::hc_naive: return "hc_naive";
        case VarianceKind::cluster_robust: return "cluster_robust";
        case VarianceKind::adjusted: return "adjusted";
    }
    return "?";
}

// Point estimate with its variance on the per-sqrt(G) asymptotic scale, so
// std_error = sqrt(variance / G).
struct EstimateReport {
    EstimandKind target = EstimandKind::theta1;
    double estimate = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double alpha = 0.05;
    long num_clusters = 0;
    VarianceKind variance_kind = VarianceKind::consistent;
    std::map<std::string, double> diagnostics;
};

// Constants for the arm-centered size-weighted transform: the mean cluster
// size and the size-weighted outcome mean of each arm.
struct SizeWeightedCenters {
    double mean_size = 0.0;
    double center[2] = {0.0, 0.0};
};

inline SizeWeightedCenters size_weighted_centers(const ExperimentSample& s) {
    KahanSum size_total;
    KahanSum num[2], den[2];
    for (const auto& c : s.clusters()) {
        const double n = static_cast<double>(c.size());
        size_total.add(n);
        num[c.arm()].add(n * c.mean());
        den[c.arm()].add(n);
    }
    for (int a : {0, 1}) {
        if (!(den[a].value() > 0.0)) {
            throw ZeroSizeArm(std::string("size_weighted_centers: arm ") +
                              (a == 1 ? "1" : "0") + " has zero total size");
        }
    }
    SizeWeightedCenters ctx;
    ctx.mean_size = size_total.value() / static_cast<double>(s.num_clusters());
    ctx.center[0] = num[0].value() / den[0].value();
    ctx.center[1] = num[1].value() / den[1].value();
    return ctx;
}

inline double transform_value(const ClusterRecord& c, TransformKind t,
                              const SizeWeightedCenters* ctx = nullptr) {
    switch (t) {
        case TransformKind::mean: return c.mean();
        case TransformKind::mean_sq: return c.mean() * c.mean();
        case TransformKind::size: return static_cast<double>(c.size());
        case TransformKind::size_weighted: return static_cast<double>(c.size()) * c.mean();
        case TransformKind::hat_y:
        case TransformKind::hat_y_sq: {
            if (ctx == nullptr) {
                throw DomainError("transform_value: hat_y needs sample-level centers");
            }
            const double v = static_cast<double>(c.size()) / ctx->mean_size *
                             (c.mean() - ctx->center[c.arm()]);
            return t == TransformKind::hat_y ? v : v * v;
        }
    }
    throw DomainError("transform_value: unknown transform");
}

struct GroupStats {
    long count = 0;
    double mean = 0.0;
};

// Average of a per-cluster transform over the clusters matching the given
// (arm, stratum) filter; omitting a filter widens it.
inline GroupStats stratum_arm_stats(const ExperimentSample& s, TransformKind t,
                                    std::optional<int> arm = std::nullopt,
                                    std::optional<std::string_view> stratum = std::nullopt) {
    SizeWeightedCenters ctx;
    const bool needs_ctx = (t == TransformKind::hat_y || t == TransformKind::hat_y_sq);
    if (needs_ctx) ctx = size_weighted_centers(s);

    MomentAccum acc;
    for (const auto& c : s.clusters()) {
        if (arm && c.arm() != *arm) continue;
        if (stratum && c.stratum() != *stratum) continue;
        acc.add(transform_value(c, t, needs_ctx ? &ctx : nullptr));
    }
    if (acc.count == 0) {
        std::string where;
        if (stratum) where += " stratum '" + std::string(*stratum) + "'";
        if (arm) where += std::string(" arm ") + (*arm == 1 ? "1" : "0");
        throw EmptyCell("stratum_arm_stats: no cluster matches" + where);
    }
    return {acc.count, acc.mean()};
}

// Within-stratum imbalance: sum over the stratum of (1{A=1} - pi).
inline double imbalance(const ExperimentSample& s, std::string_view stratum) {
    bool known = s.tau().find(std::string(stratum)) != s.tau().end();
    KahanSum acc;
    for (const auto& c : s.clusters()) {
        if (c.stratum() != stratum) continue;
        known = true;
        acc.add((c.arm() == 1 ? 1.0 : 0.0) - s.pi());
    }
    if (!known) {
        throw UnknownStratum("imbalance: unknown stratum '" + std::string(stratum) + "'");
    }
    return acc.value();
}

namespace detail {

// Stable stratum indexing: labels in order of first appearance.
struct StratumIndex {
    std::vector<std::string> labels;
    std::vector<int> stratum_of;  // parallel to sample.clusters()

    static StratumIndex build(const ExperimentSample& s) {
        StratumIndex idx;
        idx.stratum_of.reserve(s.clusters().size());
        std::unordered_map<std::string_view, int> lookup;
        for (const auto& c : s.clusters()) {
            auto [it, inserted] = lookup.try_emplace(c.stratum(), static_cast<int>(idx.labels.size()));
            if (inserted) idx.labels.push_back(c.stratum());
            idx.stratum_of.push_back(it->second);
        }
        return idx;
    }

    std::size_t size() const { return labels.size(); }
};

}  // namespace detail

}  // namespace crt
