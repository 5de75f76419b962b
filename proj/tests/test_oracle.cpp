#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "crt/crt.hpp"
#include "test_support.hpp"

using Catch::Approx;
using namespace crt;

TEST_CASE("schools example is exact") {
    DiscretePopulation pop{{{0.5, 40, 1.0, 10}, {0.5, 10, -2.0, 5}}};
    const auto est = discrete_estimands(pop);
    REQUIRE(est.theta1 == -0.5);
    REQUIRE(est.theta2 == 0.4);
    REQUIRE(est.vartheta == 0.0);
}

TEST_CASE("sampling proportional to size recovers the size-weighted estimand") {
    Rng rng(61);
    for (int rep = 0; rep < 30; ++rep) {
        DiscretePopulation pop;
        const int types = 2 + static_cast<int>(rng.below(4));
        double total = 0.0;
        std::vector<double> raw;
        for (int t = 0; t < types; ++t) {
            raw.push_back(rng.uniform(0.1, 1.0));
            total += raw.back();
        }
        for (int t = 0; t < types; ++t) {
            const long size = 2 * (1 + static_cast<long>(rng.below(20)));
            pop.types.push_back({raw[static_cast<std::size_t>(t)] / total, size,
                                 rng.uniform(-3.0, 3.0), size / 2});
        }
        const auto est = discrete_estimands(pop);
        REQUIRE(est.vartheta == Approx(est.theta2).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("constant sampled count recovers the equally-weighted estimand") {
    Rng rng(62);
    for (int rep = 0; rep < 30; ++rep) {
        DiscretePopulation pop;
        const int types = 2 + static_cast<int>(rng.below(4));
        double total = 0.0;
        std::vector<double> raw;
        for (int t = 0; t < types; ++t) {
            raw.push_back(rng.uniform(0.1, 1.0));
            total += raw.back();
        }
        for (int t = 0; t < types; ++t) {
            pop.types.push_back({raw[static_cast<std::size_t>(t)] / total,
                                 5 + static_cast<long>(rng.below(40)), rng.uniform(-3.0, 3.0), 5});
        }
        const auto est = discrete_estimands(pop);
        REQUIRE(est.vartheta == Approx(est.theta1).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("constant effects collapse all three estimands") {
    Rng rng(63);
    for (int rep = 0; rep < 30; ++rep) {
        DiscretePopulation pop;
        const double effect = rng.uniform(-2.0, 2.0);
        pop.types.push_back({0.3, 7, effect, 3});
        pop.types.push_back({0.2, 19, effect, 19});
        pop.types.push_back({0.5, 4, effect, 1});
        const auto est = discrete_estimands(pop);
        REQUIRE(est.theta1 == Approx(effect).epsilon(1e-12).margin(1e-12));
        REQUIRE(est.theta2 == Approx(effect).epsilon(1e-12).margin(1e-12));
        REQUIRE(est.vartheta == Approx(effect).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("discrete population validation") {
    REQUIRE_THROWS_AS(discrete_estimands({}), DomainError);
    REQUIRE_THROWS_AS(discrete_estimands({{{0.5, 10, 1.0, 5}, {0.4, 10, 1.0, 5}}}), DomainError);
    REQUIRE_THROWS_AS(discrete_estimands({{{1.0, 10, 1.0, 11}}}), DomainError);
}

TEST_CASE("enumerate_sbr tiny cases") {
    const auto two = enumerate_sbr({"a", "a"}, 0.5);
    REQUIRE(two.size() == 2);
    for (const auto& e : two) REQUIRE(e.probability == Approx(0.5));

    const auto four = enumerate_sbr({"a", "a", "b", "b"}, 0.5);
    REQUIRE(four.size() == 4);
    for (const auto& e : four) REQUIRE(e.probability == Approx(0.25));

    const auto six = enumerate_sbr({"a", "a", "a"}, 0.5);
    REQUIRE(six.size() == 6);
    for (const auto& e : six) REQUIRE(e.probability == Approx(1.0 / 6.0));
}

TEST_CASE("enumerate_sbr probabilities sum to one") {
    Rng rng(64);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<std::string> strata;
        const int ns = 1 + static_cast<int>(rng.below(3));
        for (int s = 0; s < ns; ++s) {
            const long size = 1 + static_cast<long>(rng.below(5));
            for (long i = 0; i < size; ++i) strata.push_back("s" + std::to_string(s));
        }
        const double pi = rng.uniform(0.2, 0.8);
        const auto all = enumerate_sbr(strata, pi);
        double total = 0.0;
        for (const auto& e : all) total += e.probability;
        REQUIRE(total == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("enumerate_sbr guards against blowup") {
    REQUIRE_THROWS_AS(enumerate_sbr(std::vector<std::string>(30, "a"), 0.5), TooLarge);
}

TEST_CASE("assignment-averaged theta1 is the mean cluster effect under strong balance") {
    Rng rng(65);
    for (int rep = 0; rep < 10; ++rep) {
        // G <= 8, exact balance, full sampling via unit clusters.
        const long per_stratum = 2 + 2 * static_cast<long>(rng.below(2));  // 2 or 4
        const long n_strata = 1 + static_cast<long>(rng.below(2));
        std::vector<std::string> strata;
        std::vector<double> y1, y0;
        for (long s = 0; s < n_strata; ++s) {
            for (long i = 0; i < per_stratum; ++i) {
                strata.push_back("s" + std::to_string(s));
                y1.push_back(rng.uniform(-3.0, 3.0));
                y0.push_back(rng.uniform(-3.0, 3.0));
            }
        }
        const long G = static_cast<long>(strata.size());
        const auto assignments = enumerate_sbr(strata, 0.5);

        KahanSum averaged;
        for (const auto& e : assignments) {
            std::vector<ClusterRecord> c;
            for (long g = 0; g < G; ++g) {
                const double y = e.arms[static_cast<std::size_t>(g)] == 1
                                     ? y1[static_cast<std::size_t>(g)]
                                     : y0[static_cast<std::size_t>(g)];
                c.push_back(support::cluster(std::to_string(g), 1, {y},
                                             strata[static_cast<std::size_t>(g)],
                                             e.arms[static_cast<std::size_t>(g)]));
            }
            ExperimentSample s(std::move(c), 0.5,
                               [&] {
                                   std::map<std::string, double> tau;
                                   for (const auto& label : strata) tau[label] = 0.0;
                                   return tau;
                               }());
            averaged.add(e.probability * estimate_theta1(s));
        }
        KahanSum truth;
        for (long g = 0; g < G; ++g) {
            truth.add((y1[static_cast<std::size_t>(g)] - y0[static_cast<std::size_t>(g)]) /
                      static_cast<double>(G));
        }
        REQUIRE(averaged.value() == Approx(truth.value()).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("normal equations solve tiny regressions") {
    REQUIRE(solve_normal_equations({{1.0, 1.0, 1.0}}, {4.0, 4.0, 4.0})[0] == Approx(4.0));

    const auto slope = solve_normal_equations({{1.0, 2.0, 3.0, 4.0}}, {2.0, 4.0, 6.0, 8.0});
    REQUIRE(slope[0] == Approx(2.0));

    Rng rng(66);
    std::vector<double> x1, x2, y;
    for (int i = 0; i < 8; ++i) {
        x1.push_back(rng.uniform(-1.0, 1.0));
        x2.push_back(rng.uniform(-1.0, 1.0));
        y.push_back(rng.uniform(-1.0, 1.0));
    }
    const auto beta = solve_normal_equations({x1, x2}, y);
    double dot1 = 0.0, dot2 = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double resid = y[static_cast<std::size_t>(i)] -
                             beta[0] * x1[static_cast<std::size_t>(i)] -
                             beta[1] * x2[static_cast<std::size_t>(i)];
        dot1 += resid * x1[static_cast<std::size_t>(i)];
        dot2 += resid * x2[static_cast<std::size_t>(i)];
    }
    REQUIRE(dot1 == Approx(0.0).margin(1e-10));
    REQUIRE(dot2 == Approx(0.0).margin(1e-10));

    REQUIRE_THROWS_AS(solve_normal_equations({x1, x1}, y), RankDeficient);
}
