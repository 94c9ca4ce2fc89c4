// Command-line front end: config-driven simulate / fit / evaluate pipelines
// and named presets reproducing the benchmark experiments end to end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wcr/config.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_exe_dir;

// Accepts a literal path, a name with implied .json, or a preset name
// resolved against ./presets and the presets directory next to the binary.
std::string resolve_config(const std::string& arg) {
    std::vector<std::string> candidates = {
        arg, arg + ".json", "presets/" + arg + ".json",
        g_exe_dir + "/presets/" + arg + ".json",
        g_exe_dir + "/../presets/" + arg + ".json"};
    for (const auto& c : candidates)
        if (fs::exists(c) && fs::is_regular_file(c)) return c;
    throw std::invalid_argument("config or preset not found: " + arg);
}

std::uint64_t effective_seed(const wcr::ExperimentConfig& cfg,
                             std::optional<std::uint64_t> flag_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("WCR_SEED")) return std::stoull(env);
    return cfg.seed;
}

int default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n > 0 ? static_cast<int>(n) : 1;
}

void print_report(const wcr::FitReport& report) {
    std::cout << "fit: residual " << report.residual << ", " << report.active.size()
              << " active terms, " << report.iterations << " iterations, "
              << report.fit_seconds << " s\n";
    for (const auto& p : report.table) {
        std::cout << "  " << p.name << " = " << p.estimate;
        if (p.truth) std::cout << "   (truth " << *p.truth << ")";
        if (p.clamped) std::cout << "   [clamped]";
        std::cout << "\n";
    }
    if (report.mre) std::cout << "mre: " << report.mre->total << "\n";
}

struct EvalOutput {
    nlohmann::json metrics = nlohmann::json::array();
};

// Predicts forward from the latest usable snapshot and compares marginals
// against the data where a matching snapshot exists.
EvalOutput evaluate_report(const wcr::FitReport& report, const wcr::SnapshotDataset& data,
                           std::vector<double> times, std::optional<double> t0_flag,
                           double dt_sim, std::size_t n_paths, std::uint64_t seed,
                           int threads, const std::string& out_stem) {
    if (times.empty()) throw std::invalid_argument("evaluate: no times given");
    std::sort(times.begin(), times.end());
    double t0;
    if (t0_flag) {
        t0 = *t0_flag;
        if (!data.snapshot_at(t0))
            throw std::invalid_argument("evaluate: no data snapshot at requested t0");
    } else {
        bool found = false;
        t0 = 0.0;
        for (double t : data.times)
            if (t < times.front() - 1e-9) {
                t0 = t;
                found = true;
            }
        if (!found)
            throw std::invalid_argument(
                "evaluate: no data snapshot earlier than the first requested time");
    }

    wcr::SdeModel fitted = report.fitted_model();
    wcr::StableSamplerConfig sampler;
    sampler.alpha = fitted.alpha;
    sampler.bounding = wcr::BoundingMode::VPerturbation;
    wcr::SnapshotDataset pred =
        wcr::predict(fitted, *data.snapshot_at(t0), t0, times, sampler, n_paths,
                     seed, dt_sim, threads);

    EvalOutput out;
    for (std::size_t l = 0; l < times.size(); ++l) {
        nlohmann::json entry;
        entry["time"] = times[l];
        const Eigen::MatrixXd* ref = data.snapshot_at(times[l]);
        if (ref) {
            Eigen::VectorXd w = wcr::wd1_marginal(pred.snapshots[l], *ref);
            entry["wd1"] = std::vector<double>(w.data(), w.data() + w.size());
            std::cout << "t = " << times[l] << ": wd1 =";
            for (Eigen::Index i = 0; i < w.size(); ++i) std::cout << " " << w[i];
            std::cout << "\n";
        } else {
            std::cout << "t = " << times[l] << ": no data snapshot, histogram only\n";
        }
        if (!out_stem.empty()) {
            std::string hpath = out_stem + "-hist-t" + wcr::detail::fmt17(times[l]) + ".csv";
            wcr::save_histogram_csv(pred.snapshots[l], hpath);
            entry["histogram"] = hpath;
        }
        out.metrics.push_back(entry);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    g_exe_dir = fs::weakly_canonical(fs::path(argv[0])).parent_path().string();

    CLI::App app{"Weak collocation regression toolkit for Levy-driven SDEs"};
    app.require_subcommand(1);

    std::string config_arg, dataset_stem, report_path, out_path;
    std::optional<std::uint64_t> seed_flag;
    int threads = default_threads();
    std::vector<double> times_flag;
    std::optional<double> t0_flag;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed_flag, "override config seed");
        sub->add_option("--threads", threads, "worker thread cap");
        sub->add_option("--out", out_path, "output path or stem");
    };

    auto* sim = app.add_subcommand("simulate", "generate snapshot data from a config");
    sim->add_option("config", config_arg, "config file or preset name")->required();
    add_common(sim);

    auto* fit = app.add_subcommand("fit", "identify SDE terms from snapshot data");
    fit->add_option("config", config_arg, "config file or preset name")->required();
    fit->add_option("--data", dataset_stem, "dataset stem (defaults to fresh simulation)");
    add_common(fit);

    auto* eva = app.add_subcommand("evaluate", "compare fitted model forecasts to data");
    eva->add_option("report", report_path, "fit report JSON")->required();
    eva->add_option("data", dataset_stem, "dataset stem")->required();
    eva->add_option("--times", times_flag, "evaluation times")->delimiter(',');
    eva->add_option("--t0", t0_flag, "forecast start time (must be a data snapshot)");
    add_common(eva);

    auto* rep = app.add_subcommand("reproduce", "run a preset end to end");
    rep->add_option("preset", config_arg, "preset name")->required();
    add_common(rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            auto cfg = wcr::load_experiment(resolve_config(config_arg));
            cfg.seed = effective_seed(cfg, seed_flag);
            auto ds = wcr::generate_data(cfg, threads);
            std::string stem = out_path.empty() ? cfg.name + "-data" : out_path;
            wcr::save_dataset(ds, stem);
            std::cout << "wrote " << stem << ".json / " << stem << ".csv\n";
        } else if (fit->parsed()) {
            auto cfg = wcr::load_experiment(resolve_config(config_arg));
            cfg.seed = effective_seed(cfg, seed_flag);
            wcr::SnapshotDataset ds;
            if (!dataset_stem.empty()) {
                ds = wcr::load_dataset(dataset_stem);
                if (ds.dim != cfg.dim)
                    throw std::invalid_argument("fit: dataset dimension " +
                                                std::to_string(ds.dim) +
                                                " does not match config dimension " +
                                                std::to_string(cfg.dim));
            } else {
                ds = wcr::generate_data(cfg, threads);
            }
            auto report = wcr::run_fit(cfg, ds, threads);
            print_report(report);
            std::string path = out_path.empty() ? cfg.name + "-report.json" : out_path;
            wcr::save_fit_report(report, path);
            std::string csv = path;
            if (csv.size() > 5 && csv.substr(csv.size() - 5) == ".json")
                csv = csv.substr(0, csv.size() - 5);
            wcr::save_parameter_csv(report, csv + ".csv");
            std::cout << "wrote " << path << " and " << csv << ".csv\n";
        } else if (eva->parsed()) {
            auto report = wcr::load_fit_report(report_path);
            auto ds = wcr::load_dataset(dataset_stem);
            std::uint64_t seed = seed_flag ? *seed_flag : ds.seed + 1;
            if (const char* env = std::getenv("WCR_SEED"); env && !seed_flag)
                seed = std::stoull(env);
            std::string stem = out_path.empty() ? "evaluation" : out_path;
            auto out = evaluate_report(report, ds, times_flag, t0_flag, 1e-3, 10000,
                                       seed, threads, stem);
            std::ofstream f(stem + "-metrics.json");
            if (!f) throw std::runtime_error("cannot open " + stem + "-metrics.json");
            f << out.metrics.dump(2) << "\n";
            std::cout << "wrote " << stem << "-metrics.json\n";
        } else if (rep->parsed()) {
            auto cfg = wcr::load_experiment(resolve_config(config_arg));
            cfg.seed = effective_seed(cfg, seed_flag);
            std::string stem = out_path.empty() ? cfg.name : out_path;
            auto ds = wcr::generate_data(cfg, threads);
            wcr::save_dataset(ds, stem + "-data");
            auto report = wcr::run_fit(cfg, ds, threads);
            print_report(report);
            wcr::save_fit_report(report, stem + "-report.json");
            wcr::save_parameter_csv(report, stem + "-report.csv");
            if (!cfg.eval_times.empty()) {
                auto ev = wcr::run_evaluate(cfg, report, ds, threads);
                nlohmann::json jm = nlohmann::json::array();
                for (std::size_t l = 0; l < ev.times.size(); ++l) {
                    const auto& w = ev.wd1[l];
                    jm.push_back({{"time", ev.times[l]},
                                  {"wd1", std::vector<double>(w.data(), w.data() + w.size())}});
                    std::cout << "t = " << ev.times[l] << ": wd1 =";
                    for (Eigen::Index i = 0; i < w.size(); ++i) std::cout << " " << w[i];
                    std::cout << "\n";
                }
                std::ofstream f(stem + "-metrics.json");
                f << jm.dump(2) << "\n";
            }
            std::cout << "wrote " << stem << "-data.{json,csv}, " << stem
                      << "-report.{json,csv}\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
