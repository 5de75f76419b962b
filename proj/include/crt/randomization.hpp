#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crt/errors.hpp"
#include "crt/rng.hpp"

namespace crt {

enum class MechanismKind { sbr, bernoulli };

// Assignment mechanism. The mechanism pins the per-stratum dispersion tau:
// stratified block randomization achieves strong balance (tau = 0), Bernoulli
// assignment has tau = pi(1-pi).
struct MechanismSpec {
    MechanismKind kind = MechanismKind::sbr;
    double pi = 0.5;

    double tau() const { return kind == MechanismKind::sbr ? 0.0 : pi * (1.0 - pi); }
};

struct Assignment {
    std::vector<int> arms;
    std::map<std::string, double> tau;  // stratum -> tau(s)
};

// Assign arms to clusters given their stratum labels.
//
// sbr: within each stratum of size G(s), the treated count is
// floor(pi*G(s)) plus an independent Bernoulli draw on the fractional part,
// and treated positions are a uniform subset. bernoulli: arms are iid.
inline Assignment assign(const MechanismSpec& mech, const std::vector<std::string>& strata,
                         Rng& rng) {
    if (strata.empty()) {
        throw DomainError("assign: strata list must be nonempty");
    }
    if (!(mech.pi > 0.0) || !(mech.pi < 1.0)) {
        throw DomainError("assign: pi must lie strictly inside (0,1)");
    }

    Assignment out;
    out.arms.assign(strata.size(), 0);
    for (const auto& label : strata) {
        out.tau.emplace(label, mech.tau());
    }

    if (mech.kind == MechanismKind::bernoulli) {
        for (std::size_t g = 0; g < strata.size(); ++g) {
            out.arms[g] = rng.bernoulli(mech.pi) ? 1 : 0;
        }
        return out;
    }

    // Group cluster indices by stratum, in order of first appearance.
    std::vector<std::vector<std::size_t>> groups;
    {
        std::unordered_map<std::string_view, std::size_t> lookup;
        for (std::size_t g = 0; g < strata.size(); ++g) {
            auto [it, inserted] = lookup.try_emplace(strata[g], groups.size());
            if (inserted) groups.emplace_back();
            groups[it->second].push_back(g);
        }
    }

    for (auto& members : groups) {
        const double target = mech.pi * static_cast<double>(members.size());
        long treated = static_cast<long>(std::floor(target));
        const double frac = target - static_cast<double>(treated);
        if (frac > 1e-12 && rng.bernoulli(frac)) ++treated;

        // Uniformly permute positions; the first `treated` get arm 1.
        for (std::size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[rng.below(i)]);
        }
        for (long i = 0; i < treated; ++i) {
            out.arms[members[static_cast<std::size_t>(i)]] = 1;
        }
    }
    return out;
}

// Uniformly distributed m-subset of {1,...,N}, returned sorted. Uses Floyd's
// sampling so the cost is O(m) regardless of N.
inline std::vector<long> subsample_units(long full_size, long m, Rng& rng) {
    if (m < 1 || m > full_size) {
        throw BadSubsampleSize("subsample_units: need 1 <= m <= N");
    }
    std::vector<long> picked;
    picked.reserve(static_cast<std::size_t>(m));
    if (m == full_size) {
        for (long i = 1; i <= full_size; ++i) picked.push_back(i);
        return picked;
    }
    std::unordered_set<long> seen;
    seen.reserve(static_cast<std::size_t>(m) * 2);
    for (long j = full_size - m + 1; j <= full_size; ++j) {
        const long t = static_cast<long>(rng.below(static_cast<std::uint64_t>(j))) + 1;
        if (!seen.insert(t).second) {
            seen.insert(j);
            picked.push_back(j);
        } else {
            picked.push_back(t);
        }
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace crt
