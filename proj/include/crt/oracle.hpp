#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crt/errors.hpp"
#include "crt/numeric.hpp"

namespace crt {

// A finite cluster-type distribution with per-unit treatment effects:
// each type has a probability, a true size N, a constant per-unit effect,
// and the number of units a researcher would sample from it.
struct DiscretePopulation {
    struct Type {
        double probability;
        long size;
        double effect;
        long sampled;
    };
    std::vector<Type> types;
};

struct DiscreteEstimands {
    double theta1;    // clusters weighted equally
    double theta2;    // clusters weighted by size
    double vartheta;  // clusters weighted by sampled count (what naive DIM targets)
};

// Exact estimands of a discrete population, by direct summation.
inline DiscreteEstimands discrete_estimands(const DiscretePopulation& pop) {
    if (pop.types.empty()) {
        throw DomainError("discrete_estimands: population has no types");
    }
    KahanSum prob, eq, size_w, size_tot, samp_w, samp_tot;
    for (const auto& t : pop.types) {
        if (!(t.probability > 0.0)) {
            throw DomainError("discrete_estimands: probabilities must be positive");
        }
        if (t.size < 1 || t.sampled < 1 || t.sampled > t.size) {
            throw DomainError("discrete_estimands: need 1 <= sampled <= size");
        }
        prob.add(t.probability);
        eq.add(t.probability * t.effect);
        size_w.add(t.probability * static_cast<double>(t.size) * t.effect);
        size_tot.add(t.probability * static_cast<double>(t.size));
        samp_w.add(t.probability * static_cast<double>(t.sampled) * t.effect);
        samp_tot.add(t.probability * static_cast<double>(t.sampled));
    }
    if (std::fabs(prob.value() - 1.0) > 1e-9) {
        throw DomainError("discrete_estimands: probabilities must sum to 1");
    }
    return {eq.value(), size_w.value() / size_tot.value(), samp_w.value() / samp_tot.value()};
}

// One achievable arm vector with its exact probability.
struct EnumeratedAssignment {
    std::vector<int> arms;
    double probability;
};

// Exhaustive enumeration of the stratified-block-randomization assignment
// distribution for tiny samples: within each stratum the treated count is
// floor(pi*G(s)) plus a Bernoulli draw on the fractional part, and every
// subset of that size is equally likely.
inline std::vector<EnumeratedAssignment> enumerate_sbr(const std::vector<std::string>& strata,
                                                       double pi,
                                                       std::size_t max_assignments = 10000) {
    if (strata.empty()) {
        throw DomainError("enumerate_sbr: strata list must be nonempty");
    }
    if (!(pi > 0.0) || !(pi < 1.0)) {
        throw DomainError("enumerate_sbr: pi must lie strictly inside (0,1)");
    }

    std::vector<std::vector<std::size_t>> groups;
    {
        std::unordered_map<std::string, std::size_t> lookup;
        for (std::size_t g = 0; g < strata.size(); ++g) {
            auto [it, inserted] = lookup.try_emplace(strata[g], groups.size());
            if (inserted) groups.emplace_back();
            groups[it->second].push_back(g);
        }
    }

    auto choose = [](std::size_t n, std::size_t k) {
        double c = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        }
        return c;
    };

    // Per stratum: the list of (treated count, count probability).
    struct CountLaw {
        std::vector<std::pair<long, double>> counts;
    };
    std::vector<CountLaw> laws(groups.size());
    double total = 1.0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const double target = pi * static_cast<double>(groups[k].size());
        const long lo = static_cast<long>(std::floor(target));
        const double frac = target - static_cast<double>(lo);
        if (frac > 1e-12) {
            laws[k].counts = {{lo, 1.0 - frac}, {lo + 1, frac}};
        } else {
            laws[k].counts = {{lo, 1.0}};
        }
        double states = 0.0;
        for (auto [cnt, p] : laws[k].counts) {
            states += choose(groups[k].size(), static_cast<std::size_t>(cnt));
        }
        total *= states;
        if (total > static_cast<double>(max_assignments)) {
            throw TooLarge("enumerate_sbr: more than " + std::to_string(max_assignments) +
                           " assignments");
        }
    }

    // Cartesian product over strata of (count choice, subset choice).
    std::vector<EnumeratedAssignment> result;
    std::vector<int> arms(strata.size(), 0);

    std::function<void(std::size_t, double)> recurse = [&](std::size_t k, double prob) {
        if (k == groups.size()) {
            result.push_back({arms, prob});
            return;
        }
        const auto& members = groups[k];
        for (auto [cnt, count_prob] : laws[k].counts) {
            const double subset_prob =
                count_prob / choose(members.size(), static_cast<std::size_t>(cnt));
            // Enumerate subsets of `members` of size cnt via bitmask-free
            // combination walking.
            std::vector<std::size_t> pick(static_cast<std::size_t>(cnt));
            std::function<void(std::size_t, std::size_t)> combos = [&](std::size_t start,
                                                                       std::size_t depth) {
                if (depth == pick.size()) {
                    for (std::size_t i : pick) arms[members[i]] = 1;
                    recurse(k + 1, prob * subset_prob);
                    for (std::size_t i : pick) arms[members[i]] = 0;
                    return;
                }
                for (std::size_t i = start; i + (pick.size() - depth) <= members.size(); ++i) {
                    pick[depth] = i;
                    combos(i + 1, depth + 1);
                }
            };
            if (cnt == 0) {
                recurse(k + 1, prob * subset_prob);
            } else {
                combos(0, 0);
            }
        }
    };
    recurse(0, 1.0);
    return result;
}

// Least squares through the normal equations, for tiny cross-checks of the
// regression formulations (at most a handful of columns). Gaussian
// elimination with partial pivoting on X'X.
inline std::vector<double> solve_normal_equations(const std::vector<std::vector<double>>& columns,
                                                  const std::vector<double>& response) {
    const std::size_t p = columns.size();
    if (p == 0 || p > 6) {
        throw DomainError("solve_normal_equations: need between 1 and 6 columns");
    }
    const std::size_t n = response.size();
    for (const auto& col : columns) {
        if (col.size() != n) {
            throw DomainError("solve_normal_equations: column length mismatch");
        }
    }

    std::vector<std::vector<double>> xtx(p, std::vector<double>(p + 1, 0.0));
    double max_diag = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < p; ++k) {
            KahanSum acc;
            for (std::size_t i = 0; i < n; ++i) acc.add(columns[j][i] * columns[k][i]);
            xtx[j][k] = acc.value();
        }
        KahanSum acc;
        for (std::size_t i = 0; i < n; ++i) acc.add(columns[j][i] * response[i]);
        xtx[j][p] = acc.value();
        max_diag = std::max(max_diag, std::fabs(xtx[j][j]));
    }

    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < p; ++row) {
            if (std::fabs(xtx[row][col]) > std::fabs(xtx[pivot][col])) pivot = row;
        }
        std::swap(xtx[col], xtx[pivot]);
        if (std::fabs(xtx[col][col]) <= 1e-12 * max_diag) {
            throw RankDeficient("solve_normal_equations: design matrix not full rank");
        }
        for (std::size_t row = col + 1; row < p; ++row) {
            const double f = xtx[row][col] / xtx[col][col];
            for (std::size_t k = col; k <= p; ++k) xtx[row][k] -= f * xtx[col][k];
        }
    }
    std::vector<double> beta(p, 0.0);
    for (std::size_t j = p; j-- > 0;) {
        double acc = xtx[j][p];
        for (std::size_t k = j + 1; k < p; ++k) acc -= xtx[j][k] * beta[k];
        beta[j] = acc / xtx[j][j];
    }
    return beta;
}

}  // namespace crt
