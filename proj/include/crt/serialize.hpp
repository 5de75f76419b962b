#pragma once

#include <string>

#include <json.hpp>

#include "crt/core.hpp"
#include "crt/dgp.hpp"
#include "crt/errors.hpp"
#include "crt/montecarlo.hpp"

namespace crt {

inline nlohmann::json to_json(const DgpConfig& cfg) {
    return nlohmann::json{
        {"size_dist", {{"a", cfg.size_dist.a}, {"b", cfg.size_dist.b}, {"n_supp", cfg.size_dist.n_supp}}},
        {"design", to_string(cfg.design)},
        {"sampling_rule", to_string(cfg.sampling_rule)},
        {"car", to_string(cfg.car)},
        {"G", cfg.num_clusters},
        {"pi", cfg.pi},
    };
}

inline DgpConfig dgp_config_from_json(const nlohmann::json& j) {
    DgpConfig cfg;
    try {
        const auto& sd = j.at("size_dist");
        cfg.size_dist.a = sd.at("a").get<double>();
        cfg.size_dist.b = sd.at("b").get<double>();
        cfg.size_dist.n_supp = sd.at("n_supp").get<long>();

        const std::string design = j.at("design").get<std::string>();
        if (design == "design1") {
            cfg.design = OutcomeDesign::design1;
        } else if (design == "design2") {
            cfg.design = OutcomeDesign::design2;
        } else {
            throw DomainError("config: design must be design1 or design2");
        }

        const std::string rule = j.at("sampling_rule").get<std::string>();
        if (rule == "full") {
            cfg.sampling_rule = SamplingRule::full;
        } else if (rule == "fixed10") {
            cfg.sampling_rule = SamplingRule::fixed10;
        } else if (rule == "capped_fraction") {
            cfg.sampling_rule = SamplingRule::capped_fraction;
        } else {
            throw DomainError("config: sampling_rule must be full, fixed10, or capped_fraction");
        }

        const std::string car = j.at("car").get<std::string>();
        if (car == "car1") {
            cfg.car = CarScheme::car1;
        } else if (car == "car2") {
            cfg.car = CarScheme::car2;
        } else {
            throw DomainError("config: car must be car1 or car2");
        }

        cfg.num_clusters = j.at("G").get<long>();
        cfg.pi = j.value("pi", 0.5);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    if (!(cfg.size_dist.a > 0.0) || !(cfg.size_dist.b > 0.0) || cfg.size_dist.n_supp < 1) {
        throw DomainError("config: size_dist needs a > 0, b > 0, n_supp >= 1");
    }
    if (cfg.num_clusters < 2) {
        throw DomainError("config: G must be at least 2");
    }
    if (!(cfg.pi > 0.0) || !(cfg.pi < 1.0)) {
        throw DomainError("config: pi must lie strictly inside (0,1)");
    }
    return cfg;
}

inline nlohmann::json to_json(const StudyRow& row) {
    return nlohmann::json{
        {"design", row.design},
        {"car", row.car},
        {"sampling_rule", row.sampling_rule},
        {"bb_a", row.bb_a},
        {"bb_b", row.bb_b},
        {"n_supp", row.n_supp},
        {"n_max", row.n_max},
        {"G", row.num_clusters},
        {"pi", row.pi},
        {"alpha", row.alpha},
        {"reps", row.replications},
        {"excluded", row.excluded},
        {"seed", row.seed},
        {"theta1_true", row.theta1_true},
        {"theta2_true", row.theta2_true},
        {"mean_theta1_hat", row.mean_theta1_hat},
        {"mean_theta2_hat", row.mean_theta2_hat},
        {"mean_sigma1_hat", row.mean_sigma1_hat},
        {"mean_sigma2_hat", row.mean_sigma2_hat},
        {"coverage1", row.coverage1},
        {"coverage2", row.coverage2},
    };
}

inline nlohmann::json to_json(const EstimateReport& rep) {
    nlohmann::json diag = nlohmann::json::object();
    for (const auto& [key, value] : rep.diagnostics) diag[key] = value;
    return nlohmann::json{
        {"target", to_string(rep.target)},
        {"estimate", rep.estimate},
        {"variance", rep.variance},
        {"std_error", rep.std_error},
        {"ci_lower", rep.ci_lower},
        {"ci_upper", rep.ci_upper},
        {"alpha", rep.alpha},
        {"G", rep.num_clusters},
        {"variance_kind", to_string(rep.variance_kind)},
        {"diagnostics", diag},
    };
}

}  // namespace crt
