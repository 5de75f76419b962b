#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "crt/crt.hpp"
#include "test_support.hpp"

using Catch::Approx;
using namespace crt;

namespace {

std::vector<std::vector<double>> eval_features(const ExperimentSample& s,
                                               const CovariateDesign& design) {
    std::vector<std::vector<double>> psi;
    for (const auto& c : s.clusters()) psi.push_back(design.features(c));
    return psi;
}

}  // namespace

TEST_CASE("intercept-only adjustment equals the stratum-weighted mean difference") {
    Rng rng(51);
    for (int rep = 0; rep < 25; ++rep) {
        support::InstanceOptions opt;
        opt.num_strata = 1 + static_cast<long>(rng.below(3));
        opt.clusters_per_cell = 2 + static_cast<long>(rng.below(3));
        const auto s = support::random_sample(rng, opt);
        const auto rep1 = adjusted_estimate(s, EstimandKind::theta1,
                                            CovariateDesign::intercept_only());

        // Sum over strata of (G(s)/G) (mean V treated - mean V control).
        std::map<std::string, std::array<double, 4>> cells;
        for (const auto& c : s.clusters()) {
            auto& cell = cells[c.stratum()];
            cell[static_cast<std::size_t>(c.arm())] += 1.0;
            cell[2 + static_cast<std::size_t>(c.arm())] += c.mean();
        }
        double expected = 0.0;
        for (const auto& [label, cell] : cells) {
            expected += (cell[0] + cell[1]) / static_cast<double>(s.num_clusters()) *
                        (cell[3] / cell[1] - cell[2] / cell[0]);
        }
        REQUIRE(rep1.estimate == Approx(expected).epsilon(1e-10).margin(1e-10));

        // Under exact within-stratum balance this is exactly theta1-hat.
        REQUIRE(rep1.estimate == Approx(estimate_theta1(s)).epsilon(1e-10).margin(1e-10));
    }
}

TEST_CASE("constant outcomes give zero estimate and zero variance") {
    std::vector<ClusterRecord> c;
    for (int g = 0; g < 8; ++g) {
        c.push_back(support::cluster(std::to_string(g), 2 + g % 3, {7.0},
                                     g < 4 ? "s1" : "s2", g % 2));
    }
    ExperimentSample s(std::move(c), 0.5, {{"s1", 0.0}, {"s2", 0.0}});
    const auto rep = adjusted_estimate(s, EstimandKind::theta1, CovariateDesign::intercept_only());
    REQUIRE(rep.estimate == Approx(0.0).margin(1e-13));
    REQUIRE(rep.variance == Approx(0.0).margin(1e-13));
}

TEST_CASE("matches the independent normal-equations evaluation") {
    Rng rng(52);
    for (int rep = 0; rep < 25; ++rep) {
        // 8 clusters, one stratum, features = (N); plus a two-strata variant.
        support::InstanceOptions opt;
        opt.num_strata = 1 + static_cast<long>(rng.below(2));
        opt.clusters_per_cell = 4;
        const auto s = support::random_sample(rng, opt);
        const auto design = CovariateDesign::from_covariates({}, true);  // psi = (N)

        for (auto target : {EstimandKind::theta1, EstimandKind::theta2}) {
            const auto got = adjusted_estimate(s, target, design);
            const auto [est, var] =
                support::ref_adjusted(s, target == EstimandKind::theta2, eval_features(s, design));
            REQUIRE(got.estimate == Approx(est).epsilon(1e-10).margin(1e-10));
            REQUIRE(got.variance == Approx(var).epsilon(1e-10).margin(1e-10));
        }
    }
}

TEST_CASE("location shift is absorbed for the equally-weighted target") {
    Rng rng(53);
    support::InstanceOptions opt;
    opt.clusters_per_cell = 3;
    const auto s = support::random_sample(rng, opt);
    std::vector<ClusterRecord> shifted;
    for (const auto& c : s.clusters()) {
        std::vector<double> y = c.sampled_outcomes();
        for (double& v : y) v += 11.5;
        shifted.push_back(support::cluster(c.id(), c.size(), std::move(y), c.stratum(), c.arm()));
    }
    ExperimentSample s2(std::move(shifted), s.pi(), s.tau());
    const auto design = CovariateDesign::from_covariates({}, true);
    const auto a = adjusted_estimate(s, EstimandKind::theta1, design);
    const auto b = adjusted_estimate(s2, EstimandKind::theta1, design);
    REQUIRE(a.estimate == Approx(b.estimate).epsilon(1e-10).margin(1e-10));
}

TEST_CASE("duplicated feature columns are rejected") {
    Rng rng(54);
    support::InstanceOptions opt;
    opt.clusters_per_cell = 5;
    const auto s = support::random_sample(rng, opt);
    const CovariateDesign dup{[](const ClusterRecord& c) {
        return std::vector<double>{static_cast<double>(c.size()),
                                   2.0 * static_cast<double>(c.size())};
    }};
    REQUIRE_THROWS_AS(adjusted_estimate(s, EstimandKind::theta1, dup), RankDeficient);
}

TEST_CASE("cells that are too small are rejected with the stratum named") {
    std::vector<ClusterRecord> c;
    c.push_back(support::cluster("a", 2, {1.0}, "s1", 1));
    c.push_back(support::cluster("b", 2, {2.0}, "s1", 1));
    c.push_back(support::cluster("c", 2, {3.0}, "s1", 0));
    c.push_back(support::cluster("d", 2, {4.0}, "s1", 0));
    c.push_back(support::cluster("e", 2, {5.0}, "s2", 1));  // lone cluster
    ExperimentSample s(std::move(c), 0.5, {{"s1", 0.0}, {"s2", 0.0}});
    REQUIRE_THROWS_AS(adjusted_estimate(s, EstimandKind::theta1, CovariateDesign::intercept_only()),
                      EmptyCell);

    std::vector<ClusterRecord> d;
    d.push_back(support::cluster("a", 2, {1.0}, "s1", 1));
    d.push_back(support::cluster("b", 2, {2.0}, "s1", 0));
    d.push_back(support::cluster("c", 2, {3.0}, "s1", 0));
    ExperimentSample s2(std::move(d), 0.5, {{"s1", 0.0}});
    REQUIRE_THROWS_WITH(
        adjusted_estimate(s2, EstimandKind::theta1, CovariateDesign::intercept_only()),
        Catch::Matchers::ContainsSubstring("s1"));
}
