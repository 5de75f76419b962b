#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "crt/dgp.hpp"
#include "crt/errors.hpp"
#include "crt/estimators.hpp"
#include "crt/inference.hpp"
#include "crt/numeric.hpp"
#include "crt/variance.hpp"

namespace crt {

// One summary row of a replication study: the analytic truths, the mean
// point estimates, the mean estimated standard deviations, and the empirical
// CI coverage.
struct StudyRow {
    std::string design;
    std::string car;
    std::string sampling_rule;
    double bb_a = 0.0;
    double bb_b = 0.0;
    long n_supp = 0;
    long n_max = 0;
    long num_clusters = 0;
    double pi = 0.5;
    double alpha = 0.05;
    long replications = 0;
    long excluded = 0;
    std::uint64_t seed = 0;
    double theta1_true = 0.0;
    double theta2_true = 0.0;
    double mean_theta1_hat = 0.0;
    double mean_theta2_hat = 0.0;
    double mean_sigma1_hat = 0.0;
    double mean_sigma2_hat = 0.0;
    double coverage1 = 0.0;
    double coverage2 = 0.0;
};

inline const char* study_csv_header() {
    return "design,car,sampling_rule,bb_a,bb_b,n_supp,n_max,G,pi,alpha,reps,excluded,seed,"
           "theta1_true,theta2_true,mean_theta1_hat,mean_theta2_hat,mean_sigma1_hat,"
           "mean_sigma2_hat,coverage1,coverage2";
}

inline std::string to_csv(const StudyRow& row) {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%s,%.10g,%.10g,%ld,%ld,%ld,%.10g,%.10g,%ld,%ld,%llu,"
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g",
                  row.design.c_str(), row.car.c_str(), row.sampling_rule.c_str(), row.bb_a,
                  row.bb_b, row.n_supp, row.n_max, row.num_clusters, row.pi, row.alpha,
                  row.replications, row.excluded,
                  static_cast<unsigned long long>(row.seed), row.theta1_true, row.theta2_true,
                  row.mean_theta1_hat, row.mean_theta2_hat, row.mean_sigma1_hat,
                  row.mean_sigma2_hat, row.coverage1, row.coverage2);
    return buf;
}

// Run `reps` independent replications of the study described by `cfg`.
// Replication r always draws from the stream derived from (seed, r), and the
// final reduction walks replications in order, so the row is bit-identical
// for any worker count. Replications that die with EmptyCell (a degenerate
// stratum-arm cell) are counted and excluded; any other estimation failure
// aborts the study with the replication index attached.
inline StudyRow run_study(const DgpConfig& cfg, long reps, double alpha, std::uint64_t seed,
                          unsigned workers = 0) {
    if (reps < 1) {
        throw DomainError("run_study: reps must be at least 1");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw DomainError("run_study: alpha must lie in (0,1)");
    }
    const TrueEstimands truths = true_estimands(cfg);

    struct RepResult {
        double t1 = 0.0, t2 = 0.0, s1 = 0.0, s2 = 0.0;
        bool cover1 = false, cover2 = false;
        bool excluded = false;
    };
    std::vector<RepResult> results(static_cast<std::size_t>(reps));

    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mtx;

    auto work = [&]() {
        for (;;) {
            const long r = next.fetch_add(1);
            if (r >= reps || failed.load()) break;
            try {
                Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(r));
                const ExperimentSample sample = generate_sample(cfg, rng);
                RepResult& out = results[static_cast<std::size_t>(r)];
                out.t1 = estimate_theta1(sample);
                out.t2 = estimate_theta2(sample);
                const double v1 = var_theta1(sample, CellPolicy::zero_weight_missing).total;
                const double v2 = var_theta2(sample, CellPolicy::zero_weight_missing).total;
                out.s1 = std::sqrt(v1);
                out.s2 = std::sqrt(v2);
                const long G = sample.num_clusters();
                const auto [lo1, hi1] = confidence_interval(out.t1, v1, G, alpha);
                const auto [lo2, hi2] = confidence_interval(out.t2, v2, G, alpha);
                out.cover1 = lo1 <= truths.theta1 && truths.theta1 <= hi1;
                out.cover2 = lo2 <= truths.theta2 && truths.theta2 <= hi2;
            } catch (const EmptyCell&) {
                results[static_cast<std::size_t>(r)].excluded = true;
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(failure_mtx);
                if (!failed.exchange(true)) {
                    failure = "replication " + std::to_string(r) + ": " + e.what();
                }
            }
        }
    };

    unsigned n_workers = workers != 0 ? workers : std::thread::hardware_concurrency();
    if (n_workers == 0) n_workers = 1;
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(reps));
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) {
        throw Error("run_study: " + failure);
    }

    KahanSum t1, t2, s1, s2;
    long covered1 = 0, covered2 = 0, excluded = 0;
    for (const RepResult& r : results) {
        if (r.excluded) {
            ++excluded;
            continue;
        }
        t1.add(r.t1);
        t2.add(r.t2);
        s1.add(r.s1);
        s2.add(r.s2);
        covered1 += r.cover1 ? 1 : 0;
        covered2 += r.cover2 ? 1 : 0;
    }
    const long included = reps - excluded;
    if (included == 0) {
        throw Error("run_study: every replication was excluded (EmptyCell)");
    }
    const double ni = static_cast<double>(included);

    StudyRow row;
    row.design = to_string(cfg.design);
    row.car = to_string(cfg.car);
    row.sampling_rule = to_string(cfg.sampling_rule);
    row.bb_a = cfg.size_dist.a;
    row.bb_b = cfg.size_dist.b;
    row.n_supp = cfg.size_dist.n_supp;
    row.n_max = cfg.size_dist.n_max();
    row.num_clusters = cfg.num_clusters;
    row.pi = cfg.pi;
    row.alpha = alpha;
    row.replications = reps;
    row.excluded = excluded;
    row.seed = seed;
    row.theta1_true = truths.theta1;
    row.theta2_true = truths.theta2;
    row.mean_theta1_hat = t1.value() / ni;
    row.mean_theta2_hat = t2.value() / ni;
    row.mean_sigma1_hat = s1.value() / ni;
    row.mean_sigma2_hat = s2.value() / ni;
    row.coverage1 = static_cast<double>(covered1) / ni;
    row.coverage2 = static_cast<double>(covered2) / ni;
    return row;
}

}  // namespace crt
