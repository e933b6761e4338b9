#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsngc/baselines.hpp"
#include "lsngc/causality.hpp"
#include "lsngc/embedding.hpp"
#include "lsngc/errors.hpp"
#include "lsngc/evaluate.hpp"
#include "lsngc/io.hpp"
#include "lsngc/simulate.hpp"

namespace {

constexpr const char* kVersionText =
    "lsngc 1.0.0\n"
    "defaults: d=auto (Cao, d_max=10), c_f=25, c_g=5, alpha=0.05, epsilon_log=1e-12\n";

int parse_lag(const std::string& text) {
    if (text == "auto") return lsngc::kAutoLag;
    try {
        const int d = std::stoi(text);
        if (d >= 1) return d;
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError("--d", "expected 'auto' or a positive integer, got '" + text + "'");
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& raw) {
    std::map<std::string, double> overrides;
    for (const auto& item : raw) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--override", "expected key=value, got '" + item + "'");
        overrides[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
    return overrides;
}

// Prints the resolved options as a reusable INI block:
//   lsngc --config saved.ini <subcommand>
// reproduces the run byte-for-byte. Empty repeatable options are dropped
// since `key=""` would re-parse as one empty element.
void echo_config(const CLI::App& app) {
    std::cout << "# --- effective configuration; save the block below and rerun with"
                 " `lsngc --config FILE " << app.get_name() << "` ---\n";
    std::cout << '[' << app.get_name() << "]\n";
    std::istringstream lines(app.config_to_str(true, false));
    std::string line;
    while (std::getline(lines, line)) {
        if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
        std::cout << line << '\n';
    }
    std::cout << "# --- end configuration ---\n";
}

struct SimulateArgs {
    std::string model;
    int t = 500;
    int burn_in = 50;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    std::string out_prefix = "sim";
};

int cmd_simulate(const CLI::App& app, const SimulateArgs& args) {
    lsngc::SimulationSpec spec;
    spec.model = lsngc::model_from_string(args.model);
    spec.t = args.t;
    spec.burn_in = args.burn_in;
    spec.seed = args.seed;
    spec.overrides = parse_overrides(args.overrides);

    const auto sim = lsngc::simulate(spec);
    const std::string ensemble_path = args.out_prefix + "_ensemble.csv";
    const std::string truth_path = args.out_prefix + "_truth.csv";
    const std::string spec_path = args.out_prefix + "_spec.json";
    lsngc::write_ensemble(sim.ensemble, ensemble_path);
    lsngc::write_adjacency(sim.truth, truth_path);

    nlohmann::json echo;
    echo["model"] = args.model;
    echo["T"] = spec.t;
    echo["burn_in"] = spec.burn_in;
    echo["seed"] = spec.seed;
    echo["overrides"] = spec.overrides;
    echo["series_names"] = sim.ensemble.series_names;
    echo["files"] = {ensemble_path, truth_path};
    std::ofstream out(spec_path);
    if (!out) throw lsngc::IoError("cannot open '" + spec_path + "' for writing");
    out << echo.dump(2) << '\n';

    echo_config(app);
    std::cout << "wrote " << ensemble_path << ", " << truth_path << ", " << spec_path << '\n';
    return 0;
}

struct AnalyzeArgs {
    std::string input;
    std::string method = "lsngc";
    std::string d_text = "auto";
    lsngc::RunConfig config;
    int surrogates = 100;
    std::string out = "affinity.json";
};

int cmd_analyze(const CLI::App& app, AnalyzeArgs args) {
    args.config.d = parse_lag(args.d_text);
    const auto method = lsngc::method_from_string(args.method);
    const auto ensemble = lsngc::read_ensemble(args.input);

    lsngc::AffinityMatrix affinity;
    if (method == lsngc::Method::lsngc) {
        affinity = lsngc::lsngc_affinity(ensemble, args.config);
    } else {
        const int d = lsngc::select_lag(lsngc::normalize(ensemble), args.config);
        const auto scores = lsngc::cross_map_score(ensemble, d, d + 1, args.config.workers);
        const auto sig = lsngc::lm_significance(ensemble, scores, args.surrogates,
                                                args.config.alpha, args.config.seed,
                                                args.config.workers);
        affinity.f_stat = scores.score;
        affinity.p_value = sig.p_value;
        affinity.significant = sig.significant;
    }
    lsngc::write_affinity(affinity, args.out, ensemble.series_names, args.method);

    echo_config(app);
    struct Edge {
        std::size_t s, r;
        double strength, p;
    };
    std::vector<Edge> edges;
    for (std::size_t s = 0; s < affinity.size(); ++s)
        for (std::size_t r = 0; r < affinity.size(); ++r)
            if (s != r && affinity.significant(s, r) != 0.0)
                edges.push_back({s, r, affinity.f_stat(s, r), affinity.p_value(s, r)});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.p < b.p || (a.p == b.p && a.strength > b.strength);
    });
    std::cout << "significant edges (" << edges.size() << " of "
              << affinity.size() * (affinity.size() - 1) << "):\n";
    const char* strength_name = method == lsngc::Method::lsngc ? "F" : "score";
    for (const auto& e : edges)
        std::printf("  %s -> %s  %s=%.6g  p=%.6g\n", ensemble.series_names[e.s].c_str(),
                    ensemble.series_names[e.r].c_str(), strength_name, e.strength, e.p);
    std::cout << "wrote " << args.out << '\n';
    return 0;
}

struct EvaluateArgs {
    std::string affinity_path;
    std::string truth_path;
    double epsilon_log = 1e-12;
};

int cmd_evaluate(const CLI::App& app, const EvaluateArgs& args) {
    const auto file = lsngc::read_affinity(args.affinity_path);
    const auto truth = lsngc::read_adjacency(args.truth_path);

    lsngc::RecoveryScore score;
    if (file.method == "lm") {
        score.auc = lsngc::roc_auc(file.matrix.f_stat, truth);
    } else {
        score.auc = lsngc::roc_auc(lsngc::log_transform(file.matrix, args.epsilon_log), truth);
    }
    const auto [sens, spec] = lsngc::sens_spec(file.matrix.significant, truth);
    score.sensitivity = sens;
    score.specificity = spec;
    score.combined = 0.5 * (sens + spec);

    echo_config(app);
    nlohmann::json out = {{"auc", score.auc},
                          {"sensitivity", score.sensitivity},
                          {"specificity", score.specificity},
                          {"combined", score.combined}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct BenchmarkArgs {
    std::vector<std::string> suite = {"all"};
    std::vector<std::string> methods = {"lsngc", "lm"};
    int runs = 50;
    std::vector<int> lengths = {500, 400, 300, 200, 100, 50};
    std::string d_text = "3";
    lsngc::RunConfig config;
    int lm_surrogates = 100;
    int burn_in = 50;
    std::string out_prefix = "benchmark";
};

int cmd_benchmark(const CLI::App& app, BenchmarkArgs args) {
    args.config.d = parse_lag(args.d_text);

    std::vector<std::string> networks;
    for (const auto& name : args.suite) {
        if (name == "all") {
            const auto& all = lsngc::all_model_names();
            networks.insert(networks.end(), all.begin(), all.end());
        } else {
            lsngc::model_from_string(name); // validates
            networks.push_back(name);
        }
    }

    echo_config(app);
    std::vector<lsngc::BenchmarkReport> reports;
    const std::string json_path = args.out_prefix + "_report.json";
    const std::string csv_path = args.out_prefix + "_results.csv";
    try {
        // One cell per (network, method, length): whatever finished before a
        // failure is still written out below.
        for (const auto& network : networks) {
            for (const auto& method : args.methods) {
                for (const int t : args.lengths) {
                    lsngc::BenchmarkRequest request;
                    request.network.model = lsngc::model_from_string(network);
                    request.network.seed = args.config.seed;
                    request.network.burn_in = args.burn_in;
                    request.method = lsngc::method_from_string(method);
                    request.runs = args.runs;
                    request.lengths = {t};
                    request.config = args.config;
                    request.lm_surrogates = args.lm_surrogates;
                    auto cell = lsngc::run_benchmark(request);
                    for (auto& report : cell) {
                        std::printf("%s %s T=%d: median AUC %.3f (q1 %.3f, q3 %.3f)\n",
                                    report.network.c_str(), report.method.c_str(), report.t,
                                    report.auc.median, report.auc.q1, report.auc.q3);
                        std::fflush(stdout);
                        reports.push_back(std::move(report));
                    }
                }
            }
        }
    } catch (...) {
        if (!reports.empty()) lsngc::write_reports(reports, json_path, csv_path);
        throw;
    }
    lsngc::write_reports(reports, json_path, csv_path);
    std::cout << "wrote " << json_path << ", " << csv_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear Granger causality network inference"};
    app.set_version_flag("--version", kVersionText);
    app.set_config("--config", "",
                   "INI config file with a [subcommand] section; flags override it");
    app.require_subcommand(1);

    const auto& models = lsngc::all_model_names();
    std::vector<std::string> model_choices = models;
    std::vector<std::string> suite_choices = models;
    suite_choices.push_back("all");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Generate a benchmark network time-series set");
    sim->add_option("--model", sim_args.model, "Network model")
        ->required()
        ->check(CLI::IsMember(model_choices));
    sim->add_option("--T", sim_args.t, "Time points kept after burn-in")->capture_default_str();
    sim->add_option("--burn-in", sim_args.burn_in, "Discarded prefix length")
        ->capture_default_str();
    sim->add_option("--seed", sim_args.seed, "Simulation seed")->capture_default_str();
    sim->add_option("--override", sim_args.overrides,
                    "Coupling-constant override key=value (repeatable)");
    sim->add_option("--out-prefix", sim_args.out_prefix, "Output file prefix")
        ->capture_default_str();

    AnalyzeArgs an_args;
    auto* analyze = app.add_subcommand("analyze", "Infer a causal network from an ensemble CSV");
    analyze->add_option("input", an_args.input, "Ensemble CSV path")->required();
    analyze->add_option("--method", an_args.method, "Analysis method")
        ->capture_default_str()
        ->check(CLI::IsMember({"lsngc", "lm"}));
    analyze->add_option("--d", an_args.d_text, "Embedding dimension ('auto' = Cao)")
        ->capture_default_str();
    analyze->add_option("--cf", an_args.config.c_f, "Codebook size for Z")->capture_default_str();
    analyze->add_option("--cg", an_args.config.c_g, "Codebook size for W_s")
        ->capture_default_str();
    analyze->add_option("--alpha", an_args.config.alpha, "FDR level")->capture_default_str();
    analyze->add_option("--seed", an_args.config.seed, "Analysis seed")->capture_default_str();
    analyze->add_option("--epsilon-log", an_args.config.epsilon_log, "Log-transform epsilon")
        ->capture_default_str();
    analyze->add_option("--surrogates", an_args.surrogates, "IAAFT null size (lm only)")
        ->capture_default_str();
    analyze->add_option("--workers", an_args.config.workers, "Thread count (0 = all)")
        ->capture_default_str();
    analyze->add_option("--out", an_args.out, "Affinity JSON path")->capture_default_str();

    EvaluateArgs ev_args;
    auto* evaluate = app.add_subcommand("evaluate", "Score an affinity file against ground truth");
    evaluate->add_option("--affinity", ev_args.affinity_path, "Affinity JSON path")->required();
    evaluate->add_option("--truth", ev_args.truth_path, "Truth adjacency CSV path")->required();
    evaluate->add_option("--epsilon-log", ev_args.epsilon_log, "Log-transform epsilon")
        ->capture_default_str();

    BenchmarkArgs bm_args;
    auto* benchmark =
        app.add_subcommand("benchmark", "Run the network-recovery experiment grid");
    benchmark->add_option("--suite", bm_args.suite, "Networks to run (or 'all')")
        ->capture_default_str()
        ->delimiter(',')
        ->check(CLI::IsMember(suite_choices));
    benchmark->add_option("--methods", bm_args.methods, "Methods to run")
        ->capture_default_str()
        ->delimiter(',')
        ->check(CLI::IsMember({"lsngc", "lm"}));
    benchmark->add_option("--runs", bm_args.runs, "Repetitions per cell")->capture_default_str();
    benchmark->add_option("--lengths", bm_args.lengths, "Time-series lengths")
        ->capture_default_str()
        ->delimiter(',');
    benchmark->add_option("--d", bm_args.d_text,
                          "Embedding dimension ('auto' = Cao; auto needs T >= 100)")
        ->capture_default_str();
    benchmark->add_option("--cf", bm_args.config.c_f, "Codebook size for Z")
        ->capture_default_str();
    benchmark->add_option("--cg", bm_args.config.c_g, "Codebook size for W_s")
        ->capture_default_str();
    benchmark->add_option("--alpha", bm_args.config.alpha, "FDR level")->capture_default_str();
    benchmark->add_option("--seed", bm_args.config.seed, "Base seed for runs and analysis")
        ->capture_default_str();
    benchmark->add_option("--burn-in", bm_args.burn_in, "Simulation burn-in")
        ->capture_default_str();
    benchmark->add_option("--lm-surrogates", bm_args.lm_surrogates,
                          "IAAFT null size for LM significance (0 = skip mask)")
        ->capture_default_str();
    benchmark->add_option("--workers", bm_args.config.workers, "Thread count (0 = all)")
        ->capture_default_str();
    benchmark->add_option("--out-prefix", bm_args.out_prefix, "Output file prefix")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(*sim, sim_args);
        if (analyze->parsed()) return cmd_analyze(*analyze, an_args);
        if (evaluate->parsed()) return cmd_evaluate(*evaluate, ev_args);
        if (benchmark->parsed()) return cmd_benchmark(*benchmark, bm_args);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const lsngc::BadConfig& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
