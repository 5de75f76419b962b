#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "crt/crt.hpp"
#include "crt/serialize.hpp"
#include "test_support.hpp"

using Catch::Approx;
using namespace crt;

namespace {

DgpConfig small_config() {
    DgpConfig cfg;
    cfg.design = OutcomeDesign::design2;
    cfg.car = CarScheme::car1;
    cfg.size_dist = {1.0, 1.0, 19};
    cfg.sampling_rule = SamplingRule::fixed10;
    cfg.num_clusters = 80;
    return cfg;
}

}  // namespace

TEST_CASE("study rows are bit-identical across worker counts") {
    const auto cfg = small_config();
    const auto a = run_study(cfg, 60, 0.05, 2024, 1);
    const auto b = run_study(cfg, 60, 0.05, 2024, 4);
    REQUIRE(a.mean_theta1_hat == b.mean_theta1_hat);
    REQUIRE(a.mean_theta2_hat == b.mean_theta2_hat);
    REQUIRE(a.mean_sigma1_hat == b.mean_sigma1_hat);
    REQUIRE(a.mean_sigma2_hat == b.mean_sigma2_hat);
    REQUIRE(a.coverage1 == b.coverage1);
    REQUIRE(a.coverage2 == b.coverage2);
    REQUIRE(a.excluded == b.excluded);
    REQUIRE(to_csv(a) == to_csv(b));
}

TEST_CASE("single replication yields indicator coverage") {
    const auto row = run_study(small_config(), 1, 0.05, 7, 1);
    REQUIRE((row.coverage1 == 0.0 || row.coverage1 == 1.0));
    REQUIRE((row.coverage2 == 0.0 || row.coverage2 == 1.0));
    REQUIRE(row.replications == 1);
}

TEST_CASE("invalid study parameters are rejected") {
    REQUIRE_THROWS_AS(run_study(small_config(), 0, 0.05, 7, 1), DomainError);
    REQUIRE_THROWS_AS(run_study(small_config(), 10, 0.0, 7, 1), DomainError);
}

TEST_CASE("study means land near the truths") {
    const auto cfg = small_config();
    const auto truths = true_estimands(cfg);
    const auto row = run_study(cfg, 400, 0.05, 99, 2);
    // sigma/sqrt(G)/sqrt(reps) is about 0.025 here; allow 4x.
    REQUIRE(row.mean_theta1_hat == Approx(truths.theta1).margin(0.1));
    REQUIRE(row.mean_theta2_hat == Approx(truths.theta2).margin(0.1));
    REQUIRE(row.coverage1 > 0.85);
    REQUIRE(row.coverage2 > 0.85);
    REQUIRE(row.theta1_true == truths.theta1);
}

TEST_CASE("csv line matches the header shape") {
    const auto row = run_study(small_config(), 2, 0.05, 1, 1);
    const std::string header = study_csv_header();
    const std::string line = to_csv(row);
    const auto commas = [](const std::string& s) {
        return std::count(s.begin(), s.end(), ',');
    };
    REQUIRE(commas(header) == commas(line));
}

TEST_CASE("config json round trip") {
    DgpConfig cfg = small_config();
    cfg.pi = 0.4;
    const auto j = to_json(cfg);
    const auto back = dgp_config_from_json(j);
    REQUIRE(back.size_dist.a == cfg.size_dist.a);
    REQUIRE(back.size_dist.n_supp == cfg.size_dist.n_supp);
    REQUIRE(back.design == cfg.design);
    REQUIRE(back.sampling_rule == cfg.sampling_rule);
    REQUIRE(back.car == cfg.car);
    REQUIRE(back.num_clusters == cfg.num_clusters);
    REQUIRE(back.pi == cfg.pi);

    auto bad = to_json(cfg);
    bad["design"] = "design3";
    REQUIRE_THROWS_AS(dgp_config_from_json(bad), DomainError);
    auto missing = to_json(cfg);
    missing.erase("G");
    REQUIRE_THROWS_AS(dgp_config_from_json(missing), DomainError);
}
