#pragma once

// Experiment configuration (JSON) and the end-to-end pipeline:
// simulate -> (perturb) -> kernels -> assemble -> regress -> report.

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcr/assembly.hpp"
#include "wcr/collocation.hpp"
#include "wcr/json_io.hpp"
#include "wcr/model.hpp"
#include "wcr/model_eval.hpp"
#include "wcr/regression.hpp"
#include "wcr/simulate.hpp"

namespace wcr {

// Basis specification: {"type":"full_poly","degree":p} or
// {"type":"explicit","basis":{...}} (basis_to_json format).
inline BasisDictionary basis_spec_from_json(const nlohmann::json& j, int dim,
                                            std::optional<double> alpha = std::nullopt) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "full_poly") return full_poly_basis(dim, j.at("degree").get<int>());
    if (type == "explicit") {
        auto b = basis_from_json(j.at("basis"));
        if (b.has_abs_pow() && !b.alpha() && alpha)
            return BasisDictionary(b.dim(), b.elements(), alpha);
        return b;
    }
    throw std::invalid_argument("basis_spec_from_json: unknown type " + type);
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw std::invalid_argument("matrix_from_json: empty");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

inline SdeModel truth_model_from_json(const nlohmann::json& j, int dim, double alpha) {
    SdeModel m;
    m.dim = dim;
    m.alpha = alpha;
    const std::string custom =
        j.value("custom_drift", std::string("none"));
    if (custom == "cubic_gaussian_well") {
        m.custom_drift = CustomDrift::CubicGaussianWell;
    } else if (custom != "none") {
        throw std::invalid_argument("truth model: unknown custom drift " + custom);
    }
    if (m.custom_drift == CustomDrift::None) {
        const auto& jd = j.at("drift");
        m.drift_basis = basis_spec_from_json(jd.at("basis"), dim, alpha);
        m.drift_coeffs = matrix_from_json(jd.at("coeffs"));
    }
    const auto& js = j.at("diffusion");
    const std::string smode = js.at("mode").get<std::string>();
    if (smode == "constant_diagonal") {
        auto s = js.at("sigma").get<std::vector<double>>();
        m.diffusion = DiffusionTerm::constant_diagonal(
            Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())));
    } else if (smode == "functional_sigma_1d" || smode == "functional_g_1d") {
        auto b = basis_spec_from_json(js.at("basis"), dim, alpha);
        auto c = vector_from_json(js.at("coeffs"));
        m.diffusion = smode == "functional_sigma_1d"
                          ? DiffusionTerm::functional_sigma(std::move(b), std::move(c))
                          : DiffusionTerm::functional_g(std::move(b), std::move(c));
    } else {
        throw std::invalid_argument("truth model: unknown diffusion mode " + smode);
    }
    const auto& jl = j.at("levy");
    const std::string lmode = jl.at("mode").get<std::string>();
    if (lmode == "constant_diagonal") {
        auto x = jl.at("xi").get<std::vector<double>>();
        m.levy = LevyTerm::constant_diagonal(
            Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
    } else if (lmode == "functional_xi_1d" || lmode == "functional_xi_alpha_1d") {
        auto b = basis_spec_from_json(jl.at("basis"), dim, alpha);
        auto c = vector_from_json(jl.at("coeffs"));
        m.levy = lmode == "functional_xi_1d"
                     ? LevyTerm::functional_xi(std::move(b), std::move(c))
                     : LevyTerm::functional_xi_alpha(std::move(b), std::move(c));
    } else {
        throw std::invalid_argument("truth model: unknown Levy mode " + lmode);
    }
    m.validate();
    return m;
}

struct ExperimentConfig {
    std::string name;
    int dim = 1;
    double alpha = 1.5;
    std::optional<SdeModel> truth;  // absent when fitting external data

    // data generation
    std::size_t n_paths = 10000;
    double dt_sim = 1e-3;
    std::vector<double> obs_times;
    GaussianInit init;
    StableSamplerConfig sampler;
    std::uint64_t seed = 1;
    std::optional<NoisePerturbation> perturbation;

    // collocation
    std::size_t n_kernels = 100;
    std::vector<KernelGroupSpec> groups{KernelGroupSpec{}};

    // fit
    AssemblyDicts dicts;
    CoefficientLayout layout;
    double fit_t_max = 1.0;
    StridgeConfig stridge_cfg;

    // evaluation horizon
    std::vector<double> eval_times;
    std::size_t eval_paths = 10000;
};

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.name = j.value("name", std::string("experiment"));
    cfg.dim = j.at("dim").get<int>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.seed = j.value("seed", std::uint64_t{1});

    if (j.contains("truth"))
        cfg.truth = truth_model_from_json(j.at("truth"), cfg.dim, cfg.alpha);

    if (j.contains("data")) {
        const auto& jd = j.at("data");
        cfg.n_paths = jd.value("n_paths", std::size_t{10000});
        cfg.dt_sim = jd.value("dt_sim", 1e-3);
        cfg.obs_times = jd.at("obs_times").get<std::vector<double>>();
        if (jd.contains("init")) {
            cfg.init.mean = jd.at("init").value("mean", 0.0);
            cfg.init.var = jd.at("init").value("var", 0.2);
        }
        const std::string bounding = jd.value("bounding", std::string("v_perturbation"));
        if (bounding == "none") cfg.sampler.bounding = BoundingMode::None;
        else if (bounding == "v_perturbation") cfg.sampler.bounding = BoundingMode::VPerturbation;
        else if (bounding == "clip") cfg.sampler.bounding = BoundingMode::Clip;
        else throw std::invalid_argument("data: unknown bounding " + bounding);
        cfg.sampler.eps = jd.value("eps", 1e-3);
        cfg.sampler.clip_radius = jd.value("clip_radius", 10.0);
    }
    cfg.sampler.alpha = cfg.alpha;

    if (j.contains("perturbation")) {
        const auto& jp = j.at("perturbation");
        NoisePerturbation p;
        const std::string kind = jp.value("kind", std::string("additive"));
        if (kind == "additive") p.kind = NoisePerturbation::Kind::Additive;
        else if (kind == "multiplicative") p.kind = NoisePerturbation::Kind::Multiplicative;
        else throw std::invalid_argument("perturbation: unknown kind " + kind);
        p.delta = jp.at("delta").get<double>();
        cfg.perturbation = p;
    }

    if (j.contains("kernels")) {
        const auto& jk = j.at("kernels");
        cfg.n_kernels = jk.at("m").get<std::size_t>();
        if (jk.contains("groups")) {
            cfg.groups.clear();
            for (const auto& g : jk.at("groups"))
                cfg.groups.push_back({g.value("gamma", 1.0), g.value("fraction", 1.0),
                                      g.value("lhs_ratio", 1.0)});
        }
    }

    const auto& jf = j.at("fit");
    cfg.dicts.drift = basis_spec_from_json(jf.at("drift_basis"), cfg.dim, cfg.alpha);
    auto ds = diffusion_structure_from_string(
        jf.value("diffusion", std::string("constant_diagonal")));
    int diffusion_b = 1;
    if (ds == DiffusionStructure::Diagonal || ds == DiffusionStructure::Full) {
        cfg.dicts.diffusion =
            basis_spec_from_json(jf.at("diffusion_basis"), cfg.dim, cfg.alpha);
        diffusion_b = cfg.dicts.diffusion->size();
    }
    auto ls = levy_structure_from_string(
        jf.value("levy", std::string("constant_diagonal")));
    int levy_b = 1;
    if (ls == LevyStructure::Functional1d) {
        cfg.dicts.levy = basis_spec_from_json(jf.at("levy_basis"), cfg.dim, cfg.alpha);
        levy_b = cfg.dicts.levy->size();
    }
    cfg.layout = CoefficientLayout::make(cfg.dim, cfg.dicts.drift.size(), ds,
                                         diffusion_b, ls, levy_b);
    cfg.fit_t_max = jf.value("t_max", 1.0);
    if (jf.contains("stridge")) {
        const auto& js = jf.at("stridge");
        cfg.stridge_cfg.threshold = js.value("threshold", 0.05);
        cfg.stridge_cfg.ridge = js.value("ridge", -1.0);
        cfg.stridge_cfg.max_iter = js.value("max_iter", 50);
    }

    if (j.contains("evaluate")) {
        cfg.eval_times = j.at("evaluate").at("times").get<std::vector<double>>();
        cfg.eval_paths = j.at("evaluate").value("n_paths", std::size_t{10000});
    }
    return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_experiment: cannot open " + path);
    return experiment_from_json(nlohmann::json::parse(f));
}

// Simulates the ground-truth model over the configured observation grid and
// applies the optional observation-noise perturbation.
inline SnapshotDataset generate_data(const ExperimentConfig& cfg, int threads = 1) {
    if (!cfg.truth) throw std::invalid_argument("generate_data: config has no truth model");
    SimulateOptions opt;
    opt.n_paths = cfg.n_paths;
    opt.dt_sim = cfg.dt_sim;
    opt.obs_times = cfg.obs_times;
    opt.init = cfg.init;
    opt.sampler = cfg.sampler;
    opt.seed = cfg.seed;
    opt.threads = threads;
    SnapshotDataset ds = simulate(*cfg.truth, opt);
    if (cfg.perturbation) ds = perturb(ds, *cfg.perturbation, cfg.seed);
    return ds;
}

// Weak-form fit on the snapshots with t <= fit_t_max.
inline FitReport run_fit(const ExperimentConfig& cfg, const SnapshotDataset& data,
                         int threads = 1, KernelSet* kernels_out = nullptr) {
    const auto t_start = std::chrono::steady_clock::now();
    SnapshotDataset train = data.restrict_to(cfg.fit_t_max);
    if (train.num_snapshots() < 2)
        throw std::invalid_argument("run_fit: fewer than two training snapshots");
    KernelSet kernels = build_kernel_set(train, cfg.groups, cfg.n_kernels, cfg.seed);
    if (kernels_out) *kernels_out = kernels;
    LinearSystem sys = assemble(train, kernels, cfg.dicts, cfg.layout, cfg.alpha, threads);
    StridgeResult sol = stridge(sys.matrix, sys.rhs, cfg.stridge_cfg);

    FitReport report;
    report.zeta = sol.coeffs;
    report.layout = cfg.layout;
    report.dicts = cfg.dicts;
    report.alpha = cfg.alpha;
    report.table = parameter_table(sol.coeffs, cfg.layout, cfg.dicts, cfg.alpha);
    report.residual = sol.residual;
    report.active = sol.active;
    report.iterations = sol.iterations;
    if (cfg.truth) {
        auto truth = truth_report_values(*cfg.truth, cfg.layout, cfg.dicts);
        if (truth) {
            for (int f = 0; f < cfg.layout.total(); ++f)
                report.table[static_cast<std::size_t>(f)].truth = (*truth)[f];
            report.mre = mre_breakdown(report.table, cfg.layout);
        }
    }
    report.fit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

struct EvaluationResult {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> wd1;  // per-axis W1 fitted-vs-data at each time
};

// Pushes the fitted model forward from the last training snapshot and
// compares marginals against held-out data snapshots.
inline EvaluationResult run_evaluate(const ExperimentConfig& cfg, const FitReport& report,
                                     const SnapshotDataset& data, int threads = 1) {
    if (cfg.eval_times.empty())
        throw std::invalid_argument("run_evaluate: no evaluation times configured");
    SnapshotDataset train = data.restrict_to(cfg.fit_t_max);
    if (train.num_snapshots() == 0)
        throw std::invalid_argument("run_evaluate: no training snapshots");
    const double t0 = train.times.back();
    const Eigen::MatrixXd& initial = train.snapshots.back();

    SdeModel fitted = report.fitted_model();
    StableSamplerConfig sampler = cfg.sampler;
    sampler.alpha = fitted.alpha;
    SnapshotDataset pred = predict(fitted, initial, t0, cfg.eval_times, sampler,
                                   cfg.eval_paths, cfg.seed + 1, cfg.dt_sim, threads);

    EvaluationResult out;
    for (std::size_t l = 0; l < cfg.eval_times.size(); ++l) {
        const Eigen::MatrixXd* ref = data.snapshot_at(cfg.eval_times[l]);
        if (!ref)
            throw std::invalid_argument("run_evaluate: no data snapshot at t = " +
                                        std::to_string(cfg.eval_times[l]));
        out.times.push_back(cfg.eval_times[l]);
        out.wd1.push_back(wd1_marginal(pred.snapshots[l], *ref));
    }
    return out;
}

}  // namespace wcr
