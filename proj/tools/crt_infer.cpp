// Command-line front end: analyze cluster-level experiment data from CSV,
// simulate replication studies, print analytic truths, and run the discrete
// estimand oracle.
//
// Exit codes: 0 success, 2 input/schema error, 3 estimation error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crt/crt.hpp"
#include "crt/serialize.hpp"

namespace {

using nlohmann::json;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV input (one row per sampled individual)

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    out.push_back(field);
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw InputError("input file '" + path + "' is empty");
    table.columns = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.columns.size()) {
            throw InputError("row " + std::to_string(table.rows.size() + 2) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(table.columns.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

std::size_t column_index(const CsvTable& t, const std::string& name) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw InputError("missing required column '" + name + "'");
    return static_cast<std::size_t>(it - t.columns.begin());
}

double parse_number(const std::string& raw, const std::string& what, std::size_t row) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw InputError("row " + std::to_string(row + 2) + ": cannot parse " + what + " '" +
                         raw + "'");
    }
}

// Clusters in order of first appearance, with per-cluster covariates taken
// from the named extra columns (must be constant within a cluster).
crt::ExperimentSample sample_from_csv(const CsvTable& table, double pi,
                                      const std::map<std::string, double>* tau_map,
                                      double mechanism_tau,
                                      const std::vector<std::string>& covariate_cols) {
    const std::size_t id_col = column_index(table, "cluster_id");
    const std::size_t outcome_col = column_index(table, "outcome");
    const std::size_t arm_col = column_index(table, "arm");
    const std::size_t stratum_col = column_index(table, "stratum");
    std::optional<std::size_t> size_col;
    if (std::find(table.columns.begin(), table.columns.end(), "cluster_size") !=
        table.columns.end()) {
        size_col = column_index(table, "cluster_size");
    } else {
        std::cerr << "warning: no cluster_size column; using sampled row counts as sizes, "
                     "so size-weighted estimates target the sample-weighted quantity\n";
    }
    std::vector<std::size_t> cov_idx;
    for (const auto& name : covariate_cols) {
        if (name == "cluster_size") {
            if (!size_col) throw InputError("covariate 'cluster_size' requested but absent");
            cov_idx.push_back(*size_col);
        } else {
            cov_idx.push_back(column_index(table, name));
        }
    }

    struct Draft {
        std::vector<double> outcomes;
        std::vector<double> covariates;
        std::string stratum;
        int arm = 0;
        long size = 0;
        bool size_declared = false;
    };
    std::vector<std::string> order;
    std::map<std::string, Draft> drafts;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string& id = row[id_col];
        auto it = drafts.find(id);
        const bool fresh = it == drafts.end();
        if (fresh) {
            order.push_back(id);
            it = drafts.emplace(id, Draft{}).first;
        }
        Draft& d = it->second;

        const double arm_raw = parse_number(row[arm_col], "arm", r);
        if (arm_raw != 0.0 && arm_raw != 1.0) {
            throw InputError("row " + std::to_string(r + 2) + ": arm must be 0 or 1");
        }
        const int arm = static_cast<int>(arm_raw);
        long size = 0;
        if (size_col) {
            const double size_raw = parse_number(row[*size_col], "cluster_size", r);
            size = static_cast<long>(size_raw);
            if (size < 1 || static_cast<double>(size) != size_raw) {
                throw InputError("row " + std::to_string(r + 2) +
                                 ": cluster_size must be a positive integer");
            }
        }
        std::vector<double> covs;
        for (std::size_t j = 0; j < cov_idx.size(); ++j) {
            covs.push_back(parse_number(row[cov_idx[j]], "covariate " + covariate_cols[j], r));
        }

        if (fresh) {
            d.arm = arm;
            d.stratum = row[stratum_col];
            d.size = size;
            d.size_declared = size_col.has_value();
            d.covariates = covs;
        } else {
            if (d.arm != arm) {
                throw InputError("cluster '" + id + "' carries two different arm values");
            }
            if (d.stratum != row[stratum_col]) {
                throw InputError("cluster '" + id + "' carries two different strata");
            }
            if (size_col && d.size != size) {
                throw InputError("cluster '" + id + "' carries two different cluster_size values");
            }
            if (d.covariates != covs) {
                throw InputError("cluster '" + id + "' has non-constant covariates");
            }
        }
        d.outcomes.push_back(parse_number(row[outcome_col], "outcome", r));
    }
    if (order.empty()) throw InputError("input contains no data rows");

    std::map<std::string, double> tau;
    std::vector<crt::ClusterRecord> clusters;
    for (const auto& id : order) {
        Draft& d = drafts.at(id);
        if (!d.size_declared) d.size = static_cast<long>(d.outcomes.size());
        if (static_cast<long>(d.outcomes.size()) > d.size) {
            throw InputError("cluster '" + id + "' has " + std::to_string(d.outcomes.size()) +
                             " rows but declared size " + std::to_string(d.size));
        }
        if (tau_map) {
            const auto it = tau_map->find(d.stratum);
            if (it == tau_map->end()) {
                throw InputError("stratum '" + d.stratum + "' missing from the tau map");
            }
            tau[d.stratum] = it->second;
        } else {
            tau[d.stratum] = mechanism_tau;
        }
        try {
            clusters.emplace_back(id, d.size, std::move(d.outcomes), std::move(d.covariates),
                                  d.stratum, d.arm);
        } catch (const crt::DomainError& e) {
            throw InputError(e.what());
        }
    }
    try {
        return crt::ExperimentSample(std::move(clusters), pi, std::move(tau));
    } catch (const crt::DomainError& e) {
        throw InputError(e.what());
    }
}

// ---------------------------------------------------------------------------
// analyze

crt::EstimateReport make_report(crt::EstimandKind target, double estimate, double variance,
                                crt::VarianceKind kind, long num_clusters, double alpha) {
    crt::EstimateReport rep;
    rep.target = target;
    rep.estimate = estimate;
    rep.variance = variance;
    rep.std_error = std::sqrt(variance / static_cast<double>(num_clusters));
    rep.alpha = alpha;
    rep.num_clusters = num_clusters;
    rep.variance_kind = kind;
    const auto [lo, hi] = crt::confidence_interval(estimate, variance, num_clusters, alpha);
    rep.ci_lower = lo;
    rep.ci_upper = hi;
    return rep;
}

// The naive difference-in-means inherits the cluster-robust sandwich of the
// size-weighted estimator once every cluster is treated as fully sampled.
crt::ExperimentSample as_fully_sampled(const crt::ExperimentSample& s) {
    std::vector<crt::ClusterRecord> clusters;
    for (const auto& c : s.clusters()) {
        clusters.emplace_back(c.id(), c.sampled_count(), c.sampled_outcomes(), c.covariates(),
                              c.stratum(), c.arm());
    }
    return crt::ExperimentSample(std::move(clusters), s.pi(), s.tau());
}

struct AnalyzeArgs {
    std::string input;
    double pi = 0.5;
    double alpha = 0.05;
    std::string mechanism = "sbr";
    std::string tau_file;
    std::vector<std::string> targets = {"theta1", "theta2"};
    std::vector<std::string> covariates;
    std::string format = "table";
};

int run_analyze(const AnalyzeArgs& args) {
    std::optional<std::map<std::string, double>> tau_map;
    double mechanism_tau = 0.0;
    crt::ExperimentSample* sample_ptr = nullptr;
    std::optional<crt::ExperimentSample> sample;
    try {
        if (!(args.pi > 0.0) || !(args.pi < 1.0)) throw InputError("pi must lie inside (0,1)");
        if (!args.tau_file.empty()) {
            std::ifstream in(args.tau_file);
            if (!in) throw InputError("cannot open tau file '" + args.tau_file + "'");
            json j;
            in >> j;
            tau_map.emplace();
            for (auto it = j.begin(); it != j.end(); ++it) {
                (*tau_map)[it.key()] = it.value().get<double>();
            }
        } else if (args.mechanism == "sbr") {
            mechanism_tau = 0.0;
        } else if (args.mechanism == "bernoulli") {
            mechanism_tau = args.pi * (1.0 - args.pi);
        } else {
            throw InputError("mechanism must be sbr or bernoulli");
        }
        const CsvTable table = read_csv(args.input);
        sample.emplace(sample_from_csv(table, args.pi, tau_map ? &*tau_map : nullptr,
                                       mechanism_tau, args.covariates));
        sample_ptr = &*sample;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const crt::ExperimentSample& s = *sample_ptr;
    std::vector<crt::EstimateReport> reports;
    try {
        long treated = 0;
        for (const auto& c : s.clusters()) treated += c.arm();
        const double realized_pi =
            static_cast<double>(treated) / static_cast<double>(s.num_clusters());
        const bool adjust = !args.covariates.empty();
        const auto design = crt::CovariateDesign::from_covariates(
            [&] {
                std::vector<std::size_t> idx(args.covariates.size());
                for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                return idx;
            }());

        for (const auto& name : args.targets) {
            crt::EstimateReport rep;
            if (name == "dim") {
                const auto full = as_fully_sampled(s);
                rep = make_report(crt::EstimandKind::dim, crt::estimate_dim(s),
                                  crt::var_cr_theta2(full, crt::cr_residual_sums(full)),
                                  crt::VarianceKind::cluster_robust, s.num_clusters(), args.alpha);
            } else if (name == "theta1") {
                if (adjust) {
                    rep = crt::adjusted_estimate(s, crt::EstimandKind::theta1, design, args.alpha);
                } else {
                    rep = make_report(crt::EstimandKind::theta1, crt::estimate_theta1(s),
                                      crt::var_theta1(s).total, crt::VarianceKind::consistent,
                                      s.num_clusters(), args.alpha);
                }
                rep.diagnostics["hc_variance"] = crt::var_hc_theta1(s);
            } else if (name == "theta2" || name == "theta2_sd") {
                const auto target = name == "theta2" ? crt::EstimandKind::theta2
                                                     : crt::EstimandKind::theta2_sd;
                if (adjust && target == crt::EstimandKind::theta2) {
                    rep = crt::adjusted_estimate(s, target, design, args.alpha);
                } else {
                    const double point = target == crt::EstimandKind::theta2
                                             ? crt::estimate_theta2(s)
                                             : crt::estimate_theta2_sd(s);
                    rep = make_report(target, point, crt::var_theta2(s).total,
                                      crt::VarianceKind::consistent, s.num_clusters(), args.alpha);
                }
                rep.diagnostics["cluster_robust_variance"] =
                    crt::var_cr_theta2(s, crt::cr_residual_sums(s));
            } else {
                std::cerr << "error: unknown target '" << name << "'\n";
                return 2;
            }
            rep.diagnostics["realized_pi"] = realized_pi;
            reports.push_back(std::move(rep));
        }
    } catch (const crt::Error& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 3;
    }

    if (args.format == "json") {
        json out = json::array();
        for (const auto& rep : reports) out.push_back(crt::to_json(rep));
        std::cout << out.dump(2) << "\n";
    } else if (args.format == "csv") {
        std::cout << "target,estimate,variance,std_error,ci_lower,ci_upper,alpha,G,variance_kind\n";
        for (const auto& rep : reports) {
            std::printf("%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%ld,%s\n", to_string(rep.target),
                        rep.estimate, rep.variance, rep.std_error, rep.ci_lower, rep.ci_upper,
                        rep.alpha, rep.num_clusters, to_string(rep.variance_kind));
        }
    } else {
        std::printf("%-10s %12s %12s %24s %s\n", "target", "estimate", "std.err",
                    "confidence interval", "variance");
        for (const auto& rep : reports) {
            std::printf("%-10s %12.6f %12.6f [%10.6f, %10.6f] %s\n", to_string(rep.target),
                        rep.estimate, rep.std_error, rep.ci_lower, rep.ci_upper,
                        to_string(rep.variance_kind));
            for (const auto& [key, value] : rep.diagnostics) {
                std::printf("%-10s   %s = %.6f\n", "", key.c_str(), value);
            }
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate / truth

struct DgpArgs {
    std::string config;
    std::string design = "design1";
    double bb_a = 1.0;
    double bb_b = 1.0;
    long n_supp = 49;
    std::string sampling = "full";
    std::string car = "car1";
    long clusters = 100;
    double pi = 0.5;
};

std::vector<crt::DgpConfig> load_configs(const DgpArgs& args) {
    if (!args.config.empty()) {
        std::ifstream in(args.config);
        if (!in) throw InputError("cannot open config '" + args.config + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw InputError(std::string("config parse failure: ") + e.what());
        }
        std::vector<crt::DgpConfig> out;
        try {
            if (j.is_array()) {
                for (const auto& item : j) out.push_back(crt::dgp_config_from_json(item));
            } else {
                out.push_back(crt::dgp_config_from_json(j));
            }
        } catch (const crt::DomainError& e) {
            throw InputError(e.what());
        }
        if (out.empty()) throw InputError("config contains no entries");
        return out;
    }
    json inline_cfg = {
        {"size_dist", {{"a", args.bb_a}, {"b", args.bb_b}, {"n_supp", args.n_supp}}},
        {"design", args.design},
        {"sampling_rule", args.sampling},
        {"car", args.car},
        {"G", args.clusters},
        {"pi", args.pi},
    };
    try {
        return {crt::dgp_config_from_json(inline_cfg)};
    } catch (const crt::DomainError& e) {
        throw InputError(e.what());
    }
}

unsigned resolve_workers(long requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    if (const char* env = std::getenv("CRT_INFER_WORKERS")) {
        const long parsed = std::atol(env);
        if (parsed > 0) return static_cast<unsigned>(parsed);
    }
    return std::thread::hardware_concurrency();
}

void dump_sample_csv(const crt::ExperimentSample& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open dump file '" + path + "'");
    out << "cluster_id,unit_id,outcome,arm,stratum,cluster_size,z1,z2\n";
    char buf[256];
    for (const auto& c : s.clusters()) {
        const auto& z = c.covariates();
        for (std::size_t i = 0; i < c.sampled_outcomes().size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%d,%s,%ld,%.17g,%.17g\n",
                          c.id().c_str(), i + 1, c.sampled_outcomes()[i], c.arm(),
                          c.stratum().c_str(), c.size(), z.size() > 0 ? z[0] : 0.0,
                          z.size() > 1 ? z[1] : 0.0);
            out << buf;
        }
    }
}

void render_table(std::ostream& os, const std::vector<crt::StudyRow>& rows) {
    std::string group;
    for (const auto& row : rows) {
        std::string key = row.car + " | " + row.design +
                          " | G=" + std::to_string(row.num_clusters) +
                          " | N_max=" + std::to_string(row.n_max);
        if (key != group) {
            group = key;
            os << "\n" << group << "\n";
            char head[256];
            std::snprintf(head, sizeof head, "%-16s %-12s %8s %8s %9s %9s %8s %8s %7s %7s\n",
                          "sampling", "sizes", "theta1", "theta2", "mean_th1", "mean_th2",
                          "sigma1", "sigma2", "cov1", "cov2");
            os << head;
        }
        char size_label[64];
        std::snprintf(size_label, sizeof size_label, "Bb(%g,%g)", row.bb_a, row.bb_b);
        char line[256];
        std::snprintf(line, sizeof line,
                      "%-16s %-12s %8.4f %8.4f %9.4f %9.4f %8.4f %8.4f %7.4f %7.4f\n",
                      row.sampling_rule.c_str(), size_label, row.theta1_true, row.theta2_true,
                      row.mean_theta1_hat, row.mean_theta2_hat, row.mean_sigma1_hat,
                      row.mean_sigma2_hat, row.coverage1, row.coverage2);
        os << line;
    }
}

struct SimulateArgs {
    DgpArgs dgp;
    long reps = 0;
    double alpha = 0.05;
    unsigned long long seed = 12345;
    long workers = 0;
    std::string out;
    std::string format = "csv";
    bool table = false;
    std::string dump_csv;
};

int run_simulate(const SimulateArgs& args) {
    std::vector<crt::DgpConfig> configs;
    try {
        configs = load_configs(args.dgp);
        if (args.reps < 1) throw InputError("--reps must be at least 1");
        if (!(args.alpha > 0.0) || !(args.alpha < 1.0)) throw InputError("alpha outside (0,1)");
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const unsigned workers = resolve_workers(args.workers);
    std::vector<crt::StudyRow> rows;
    try {
        if (!args.dump_csv.empty()) {
            crt::Rng rng = crt::Rng::derive(args.seed, 0);
            dump_sample_csv(crt::generate_sample(configs.front(), rng), args.dump_csv);
        }
        for (const auto& cfg : configs) {
            rows.push_back(crt::run_study(cfg, args.reps, args.alpha, args.seed, workers));
            std::cerr << "finished " << to_string(cfg.design) << " " << to_string(cfg.car) << " "
                      << to_string(cfg.sampling_rule) << " Bb(" << cfg.size_dist.a << ","
                      << cfg.size_dist.b << ") G=" << cfg.num_clusters
                      << (rows.back().excluded > 0
                              ? " [excluded " + std::to_string(rows.back().excluded) + "]"
                              : "")
                      << "\n";
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const crt::Error& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 3;
    }

    std::ostringstream body;
    if (args.table) {
        render_table(body, rows);
    } else if (args.format == "json") {
        json out = json::array();
        for (const auto& row : rows) out.push_back(crt::to_json(row));
        body << out.dump(2) << "\n";
    } else {
        body << crt::study_csv_header() << "\n";
        for (const auto& row : rows) body << crt::to_csv(row) << "\n";
    }

    if (args.out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(args.out, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open output file '" << args.out << "'\n";
            return 2;
        }
        out << body.str();
    }
    return 0;
}

int run_truth(const DgpArgs& args) {
    std::vector<crt::DgpConfig> configs;
    try {
        configs = load_configs(args);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    for (const auto& cfg : configs) {
        const auto truths = crt::true_estimands(cfg);
        std::printf("%.6f %.6f\n", truths.theta1, truths.theta2);
    }
    return 0;
}

int run_example(const std::string& population_path) {
    crt::DiscretePopulation pop;
    if (population_path.empty()) {
        pop.types = {{0.5, 40, 1.0, 10}, {0.5, 10, -2.0, 5}};
    } else {
        std::ifstream in(population_path);
        if (!in) {
            std::cerr << "error: cannot open population file '" << population_path << "'\n";
            return 2;
        }
        json j;
        try {
            in >> j;
            for (const auto& item : j) {
                pop.types.push_back({item.at("probability").get<double>(),
                                     item.at("size").get<long>(), item.at("effect").get<double>(),
                                     item.at("sampled").get<long>()});
            }
        } catch (const json::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    try {
        const auto est = crt::discrete_estimands(pop);
        std::printf("equally-weighted   theta1   = %.6f\n", est.theta1);
        std::printf("size-weighted      theta2   = %.6f\n", est.theta2);
        std::printf("sample-weighted    vartheta = %.6f\n", est.vartheta);
    } catch (const crt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

void add_dgp_options(CLI::App* cmd, DgpArgs& args) {
    cmd->add_option("--config", args.config, "JSON config file (object or array)");
    cmd->add_option("--design", args.design, "design1 or design2");
    cmd->add_option("--bb-a", args.bb_a, "Beta-Binomial a");
    cmd->add_option("--bb-b", args.bb_b, "Beta-Binomial b");
    cmd->add_option("--n-supp", args.n_supp, "Beta-Binomial support size (N_max = 10(n_supp+1))");
    cmd->add_option("--sampling", args.sampling, "full, fixed10, or capped_fraction");
    cmd->add_option("--car", args.car, "car1 or car2");
    cmd->add_option("-G,--clusters", args.clusters, "number of clusters");
    cmd->add_option("--pi", args.pi, "target treated fraction");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"estimation and inference for cluster randomized experiments"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "estimate treatment effects from a CSV");
    analyze->add_option("--input", analyze_args.input, "CSV with one row per sampled individual")
        ->required();
    analyze->add_option("--pi", analyze_args.pi, "design target treated fraction");
    analyze->add_option("--alpha", analyze_args.alpha, "confidence level alpha");
    analyze->add_option("--mechanism", analyze_args.mechanism,
                        "assignment mechanism (sbr or bernoulli) fixing tau");
    analyze->add_option("--tau-file", analyze_args.tau_file,
                        "JSON object mapping stratum to tau, overriding --mechanism");
    analyze->add_option("--targets", analyze_args.targets,
                        "subset of dim,theta1,theta2,theta2_sd")
        ->delimiter(',');
    analyze->add_option("--covariates", analyze_args.covariates,
                        "covariate columns for linear adjustment of theta1/theta2")
        ->delimiter(',');
    analyze->add_option("--format", analyze_args.format, "table, json, or csv");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run a replication study");
    add_dgp_options(simulate, sim_args.dgp);
    simulate->add_option("--reps", sim_args.reps, "replications per config")->required();
    simulate->add_option("--alpha", sim_args.alpha, "confidence level alpha");
    simulate->add_option("--seed", sim_args.seed, "master seed");
    simulate->add_option("--workers", sim_args.workers,
                         "worker threads (default: CRT_INFER_WORKERS or all cores)");
    simulate->add_option("--out", sim_args.out, "output file (default stdout)");
    simulate->add_option("--format", sim_args.format, "csv or json");
    simulate->add_flag("--table", sim_args.table, "render the study as a formatted table");
    simulate->add_option("--dump-csv", sim_args.dump_csv,
                         "write replication 0's sample as an analyze-ready CSV");

    DgpArgs truth_args;
    auto* truth = app.add_subcommand("truth", "print analytic estimands for a config");
    add_dgp_options(truth, truth_args);

    std::string population_path;
    auto* example = app.add_subcommand("example", "discrete-population estimand oracle");
    example->add_option("--population", population_path,
                        "JSON list of {probability,size,effect,sampled}");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (analyze->parsed()) return run_analyze(analyze_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (truth->parsed()) return run_truth(truth_args);
    if (example->parsed()) return run_example(population_path);
    return 2;
}
