#pragma once

// Reconstruction of the identified SDE from the flat coefficient vector,
// error metrics (MRE over truth-nonzero parameters, relative L2 of drift
// fields, Wasserstein-1 between sample sets), and forward prediction.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wcr/assembly.hpp"
#include "wcr/json_io.hpp"
#include "wcr/model.hpp"
#include "wcr/simulate.hpp"

namespace wcr {

struct ParameterEntry {
    std::string name;
    double estimate = 0.0;
    std::optional<double> truth;
    bool clamped = false;  // negative noise-intensity coefficient reported as 0
};

// Reconstructs the SDE from the regressed flat vector. Diffusion entries are
// coefficients of G = sigma sigma^T / 2, so constant-diagonal sigma_i =
// sqrt(2 G_ii); the constant Levy coefficient is |xi_i|^alpha, so xi_i is its
// alpha-th root. Negative noise coefficients are clamped to zero.
inline SdeModel reconstruct(const Eigen::VectorXd& zeta,
                            const CoefficientLayout& layout,
                            const AssemblyDicts& dicts, double alpha,
                            std::vector<int>* clamped_indices = nullptr) {
    if (zeta.size() != layout.total())
        throw std::invalid_argument("reconstruct: coefficient length mismatch");
    dicts.check(layout);
    SdeModel m;
    m.dim = layout.dim;
    m.alpha = alpha;
    m.drift_basis = dicts.drift;
    m.drift_coeffs.resize(layout.dim, layout.drift_b);
    for (int i = 0; i < layout.dim; ++i)
        for (int j = 0; j < layout.drift_b; ++j)
            m.drift_coeffs(i, j) = zeta[layout.drift_index(i, j)];

    auto clamp0 = [&](double v, int flat) {
        if (v < 0.0) {
            if (clamped_indices) clamped_indices->push_back(flat);
            return 0.0;
        }
        return v;
    };

    switch (layout.diffusion) {
        case DiffusionStructure::ConstantDiagonal: {
            Eigen::VectorXd sigma(layout.dim);
            for (int i = 0; i < layout.dim; ++i) {
                int flat = layout.diffusion_index(i, i, 0);
                sigma[i] = std::sqrt(2.0 * clamp0(zeta[flat], flat));
            }
            m.diffusion = DiffusionTerm::constant_diagonal(sigma);
            break;
        }
        case DiffusionStructure::Diagonal: {
            Eigen::VectorXd g(layout.diffusion_b);
            for (int s = 0; s < layout.diffusion_b; ++s)
                g[s] = zeta[layout.diffusion_index(0, 0, s)];
            m.diffusion = DiffusionTerm::functional_g(*dicts.diffusion, g);
            break;
        }
        case DiffusionStructure::None:
            m.diffusion = DiffusionTerm::constant_diagonal(Eigen::VectorXd::Zero(layout.dim));
            break;
        case DiffusionStructure::Full:
            throw std::invalid_argument("reconstruct: full diffusion reconstruction not supported");
    }

    if (layout.levy == LevyStructure::ConstantDiagonal) {
        Eigen::VectorXd xi(layout.dim);
        for (int i = 0; i < layout.dim; ++i) {
            int flat = layout.levy_index(i);
            xi[i] = std::pow(clamp0(zeta[flat], flat), 1.0 / alpha);
        }
        m.levy = LevyTerm::constant_diagonal(xi);
    } else {
        Eigen::VectorXd c(layout.levy_b);
        for (int s = 0; s < layout.levy_b; ++s) c[s] = zeta[layout.levy_index(0, s)];
        m.levy = LevyTerm::functional_xi_alpha(*dicts.levy, c);
    }
    m.validate();
    return m;
}

// Report-frame values: drift coefficients as-is, constant-diagonal diffusion
// as sigma_i, functional diffusion as G coefficients, constant Levy as xi_i,
// functional Levy as |xi0|^alpha expansion coefficients.
inline std::vector<ParameterEntry> parameter_table(const Eigen::VectorXd& zeta,
                                                   const CoefficientLayout& layout,
                                                   const AssemblyDicts& dicts,
                                                   double alpha) {
    std::vector<ParameterEntry> table(layout.total());
    for (int f = 0; f < layout.total(); ++f) {
        auto e = layout.decode(f);
        ParameterEntry& p = table[f];
        switch (e.block) {
            case CoefficientLayout::Block::Drift:
                p.name = "lambda" + std::to_string(e.j) +
                         (layout.dim > 1 ? "^(" + std::to_string(e.i + 1) + ")" : "") +
                         ":" + dicts.drift.elements()[e.j].name();
                p.estimate = zeta[f];
                break;
            case CoefficientLayout::Block::Diffusion:
                if (layout.diffusion == DiffusionStructure::ConstantDiagonal) {
                    p.name = "sigma" +
                             (layout.dim > 1 ? "^(" + std::to_string(e.i + 1) + ")"
                                             : std::string());
                    double gv = zeta[f];
                    p.clamped = gv < 0.0;
                    p.estimate = gv > 0.0 ? std::sqrt(2.0 * gv) : 0.0;
                } else {
                    p.name = "G:" + dicts.diffusion->elements()[e.s].name();
                    p.estimate = zeta[f];
                }
                break;
            case CoefficientLayout::Block::Levy:
                if (layout.levy == LevyStructure::ConstantDiagonal) {
                    p.name = "xi" +
                             (layout.dim > 1 ? "^(" + std::to_string(e.i + 1) + ")"
                                             : std::string());
                    double v = zeta[f];
                    p.clamped = v < 0.0;
                    p.estimate = v > 0.0 ? std::pow(v, 1.0 / alpha) : 0.0;
                } else {
                    p.name = "xi_alpha:" + dicts.levy->elements()[e.s].name();
                    p.estimate = zeta[f];
                }
                break;
        }
    }
    return table;
}

// Report-frame truth vector for a ground-truth model, mapped onto the fit
// layout. Returns nullopt entries (and overall nullopt) when the truth is
// not representable in the fit dictionaries.
inline std::optional<Eigen::VectorXd> truth_report_values(
    const SdeModel& truth, const CoefficientLayout& layout,
    const AssemblyDicts& dicts) {
    if (truth.dim != layout.dim) return std::nullopt;
    if (truth.custom_drift != CustomDrift::None) return std::nullopt;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.total());

    // drift: match elements between dictionaries
    for (int j = 0; j < truth.drift_basis.size(); ++j) {
        const auto& elem = truth.drift_basis.elements()[j];
        int match = -1;
        for (int k = 0; k < dicts.drift.size(); ++k)
            if (dicts.drift.elements()[k] == elem) {
                match = k;
                break;
            }
        for (int i = 0; i < layout.dim; ++i) {
            double c = truth.drift_coeffs(i, j);
            if (c == 0.0) continue;
            if (match < 0) return std::nullopt;
            out[layout.drift_index(i, match)] += c;
        }
    }

    // diffusion
    if (layout.diffusion == DiffusionStructure::ConstantDiagonal) {
        if (truth.diffusion.mode != DiffusionTerm::Mode::ConstantDiagonal)
            return std::nullopt;
        for (int i = 0; i < layout.dim; ++i)
            out[layout.diffusion_index(i, i, 0)] = truth.diffusion.sigma_const[i];
    } else if (layout.diffusion == DiffusionStructure::Diagonal) {
        // G = sigma(x)^2 / 2 for 1d monomial sigma expansions
        if (truth.diffusion.mode == DiffusionTerm::Mode::FunctionalSigma1d) {
            const auto& tb = *truth.diffusion.basis;
            for (int s1 = 0; s1 < tb.size(); ++s1)
                for (int s2 = 0; s2 < tb.size(); ++s2) {
                    double c = 0.5 * truth.diffusion.coeffs[s1] * truth.diffusion.coeffs[s2];
                    if (c == 0.0) continue;
                    const auto& e1 = tb.elements()[s1];
                    const auto& e2 = tb.elements()[s2];
                    if (e1.kind != BasisKind::Monomial || e2.kind != BasisKind::Monomial)
                        return std::nullopt;
                    std::vector<int> prod(e1.exponents);
                    for (std::size_t q = 0; q < prod.size(); ++q) prod[q] += e2.exponents[q];
                    auto target = BasisElement::monomial(prod);
                    int match = -1;
                    for (int k = 0; k < dicts.diffusion->size(); ++k)
                        if (dicts.diffusion->elements()[k] == target) {
                            match = k;
                            break;
                        }
                    if (match < 0) return std::nullopt;
                    out[layout.diffusion_index(0, 0, match)] += c;
                }
        } else if (truth.diffusion.mode == DiffusionTerm::Mode::FunctionalG1d) {
            if (truth.diffusion.basis->size() != layout.diffusion_b) return std::nullopt;
            for (int s = 0; s < layout.diffusion_b; ++s)
                out[layout.diffusion_index(0, 0, s)] = truth.diffusion.coeffs[s];
        } else {
            return std::nullopt;
        }
    } else if (layout.diffusion != DiffusionStructure::None) {
        return std::nullopt;
    }

    // Levy
    if (layout.levy == LevyStructure::ConstantDiagonal) {
        if (truth.levy.mode != LevyTerm::Mode::ConstantDiagonal) return std::nullopt;
        for (int i = 0; i < layout.dim; ++i)
            out[layout.levy_index(i)] = truth.levy.xi_const[i];
    } else {
        // |xi0(x)|^alpha over the fit basis; handles xi0 that is a single
        // monomial of degree 0 or 1.
        double c0 = 0.0, c1 = 0.0;
        if (truth.levy.mode == LevyTerm::Mode::ConstantDiagonal) {
            c0 = truth.levy.xi_const[0];
        } else if (truth.levy.mode == LevyTerm::Mode::FunctionalXi1d) {
            const auto& tb = *truth.levy.basis;
            for (int s = 0; s < tb.size(); ++s) {
                const auto& e = tb.elements()[s];
                double c = truth.levy.coeffs[s];
                if (c == 0.0) continue;
                if (e.kind != BasisKind::Monomial) return std::nullopt;
                if (e.degree() == 0)
                    c0 += c;
                else if (e.degree() == 1)
                    c1 += c;
                else
                    return std::nullopt;
            }
            if (c0 != 0.0 && c1 != 0.0) return std::nullopt;
        } else if (truth.levy.mode == LevyTerm::Mode::FunctionalXiAlpha1d) {
            if (truth.levy.basis->size() != layout.levy_b) return std::nullopt;
            for (int s = 0; s < layout.levy_b; ++s)
                out[layout.levy_index(0, s)] = truth.levy.coeffs[s];
            c0 = c1 = 0.0;
        }
        auto set_on = [&](const BasisElement& target, double value) {
            for (int k = 0; k < dicts.levy->size(); ++k)
                if (dicts.levy->elements()[k] == target) {
                    out[layout.levy_index(0, k)] = value;
                    return true;
                }
            return false;
        };
        if (c0 != 0.0 &&
            !set_on(BasisElement::one(1), std::pow(std::abs(c0), truth.alpha)))
            return std::nullopt;
        if (c1 != 0.0 &&
            !set_on(BasisElement::abs_pow_alpha(0), std::pow(std::abs(c1), truth.alpha)))
            return std::nullopt;
    }
    return out;
}

// Converts report-frame truth for the constant noise blocks: the layout
// stores G and |xi|^alpha, the report frame stores sigma and xi. The
// truth vector above is already in report frame for those entries.
struct MreBreakdown {
    double total = 0.0;
    std::optional<double> drift, diffusion, levy;
};

inline MreBreakdown mre_breakdown(const std::vector<ParameterEntry>& table,
                                  const CoefficientLayout& layout) {
    MreBreakdown out;
    bool any = false;
    double md = 0.0, ms = 0.0, ml = 0.0;
    bool hd = false, hs = false, hl = false;
    for (int f = 0; f < layout.total(); ++f) {
        const auto& p = table[f];
        if (!p.truth || *p.truth == 0.0) continue;
        double rel = std::abs(p.estimate - *p.truth) / std::abs(*p.truth);
        any = true;
        out.total = std::max(out.total, rel);
        switch (layout.decode(f).block) {
            case CoefficientLayout::Block::Drift: md = std::max(md, rel); hd = true; break;
            case CoefficientLayout::Block::Diffusion: ms = std::max(ms, rel); hs = true; break;
            case CoefficientLayout::Block::Levy: ml = std::max(ml, rel); hl = true; break;
        }
    }
    if (!any) throw std::invalid_argument("mre: no nonzero truth parameters");
    if (hd) out.drift = md;
    if (hs) out.diffusion = ms;
    if (hl) out.levy = ml;
    return out;
}

inline double mre(const std::vector<ParameterEntry>& table,
                  const CoefficientLayout& layout) {
    return mre_breakdown(table, layout).total;
}

// Monte Carlo relative L2 distance of two drift fields over a box.
inline double drift_l2_rel(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& truth,
                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fitted,
                           const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                           std::size_t n_samples, std::uint64_t seed) {
    if (((upper - lower).array() < 0.0).any())
        throw std::invalid_argument("drift_l2_rel: invalid box");
    auto eng = make_engine(seed, stream::kEval);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double num = 0.0, den = 0.0;
    Eigen::VectorXd x(lower.size());
    for (std::size_t k = 0; k < n_samples; ++k) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x[i] = lower[i] + (upper[i] - lower[i]) * u01(eng);
        Eigen::VectorXd mt = truth(x);
        num += (fitted(x) - mt).squaredNorm();
        den += mt.squaredNorm();
    }
    if (den == 0.0) throw std::invalid_argument("drift_l2_rel: zero-norm truth field");
    return std::sqrt(num / den);
}

// Wasserstein-1 between two 1d empirical distributions (quantile-function
// integral; reduces to the mean absolute difference of sorted samples for
// equal counts).
inline double wd1_scalar(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wd1: empty sample set");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size();
    double dist = 0.0, u = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        double ua = static_cast<double>(i + 1) / static_cast<double>(n);
        double ub = static_cast<double>(j + 1) / static_cast<double>(m);
        double next = std::min(ua, ub);
        dist += (next - u) * std::abs(a[i] - b[j]);
        u = next;
        if (ua <= ub) ++i;
        if (ub <= ua) ++j;
    }
    return dist;
}

// Per-coordinate W1 between the marginals of two sample matrices.
inline Eigen::VectorXd wd1_marginal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("wd1_marginal: dim mismatch");
    Eigen::VectorXd out(a.cols());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        std::vector<double> va(a.col(c).data(), a.col(c).data() + a.rows());
        std::vector<double> vb(b.col(c).data(), b.col(c).data() + b.rows());
        out[c] = wd1_scalar(std::move(va), std::move(vb));
    }
    return out;
}

// Forward prediction: bootstrap-resample the initial snapshot and simulate
// the fitted model to the horizon times.
inline SnapshotDataset predict(const SdeModel& fitted, const Eigen::MatrixXd& initial,
                               double t0, const std::vector<double>& horizon,
                               const StableSamplerConfig& sampler, std::size_t n_paths,
                               std::uint64_t seed, double dt_sim = 1e-3,
                               int threads = 1) {
    if (initial.rows() == 0) throw std::invalid_argument("predict: empty initial snapshot");
    auto eng = make_engine(seed, stream::kResample);
    std::uniform_int_distribution<Eigen::Index> pick(0, initial.rows() - 1);
    Eigen::MatrixXd states(static_cast<Eigen::Index>(n_paths), initial.cols());
    for (Eigen::Index r = 0; r < states.rows(); ++r) states.row(r) = initial.row(pick(eng));
    SimulateOptions opt;
    opt.dt_sim = dt_sim;
    opt.obs_times = horizon;
    opt.init_states = std::move(states);
    opt.t0 = t0;
    opt.sampler = sampler;
    opt.seed = seed;
    opt.threads = threads;
    return simulate(fitted, opt);
}

// Fixed-bin histogram export for plotting (100 bins over the sample range).
inline void save_histogram_csv(const Eigen::MatrixXd& samples, const std::string& path,
                               int bins = 100) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_histogram_csv: cannot open " + path);
    f << "axis,bin_left,bin_right,density\n";
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
        double lo = samples.col(c).minCoeff(), hi = samples.col(c).maxCoeff();
        if (hi <= lo) hi = lo + 1.0;
        double w = (hi - lo) / bins;
        std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
        for (Eigen::Index r = 0; r < samples.rows(); ++r) {
            auto b = static_cast<long>((samples(r, c) - lo) / w);
            if (b < 0) b = 0;
            if (b >= bins) b = bins - 1;
            ++count[static_cast<std::size_t>(b)];
        }
        for (int b = 0; b < bins; ++b)
            f << c << "," << detail::fmt17(lo + b * w) << ","
              << detail::fmt17(lo + (b + 1) * w) << ","
              << detail::fmt17(static_cast<double>(count[static_cast<std::size_t>(b)]) /
                               (static_cast<double>(samples.rows()) * w))
              << "\n";
    }
}

struct FitReport {
    Eigen::VectorXd zeta;
    CoefficientLayout layout;
    AssemblyDicts dicts;
    double alpha = 1.5;
    std::vector<ParameterEntry> table;
    std::optional<MreBreakdown> mre;
    double residual = 0.0;
    std::vector<int> active;
    int iterations = 0;
    double fit_seconds = 0.0;

    SdeModel fitted_model() const { return reconstruct(zeta, layout, dicts, alpha); }
};

inline nlohmann::json fit_report_to_json(const FitReport& r) {
    nlohmann::json j;
    j["alpha"] = r.alpha;
    j["zeta"] = vector_to_json(r.zeta);
    j["layout"] = {{"dim", r.layout.dim},
                   {"drift_b", r.layout.drift_b},
                   {"diffusion_b", r.layout.diffusion_b},
                   {"levy_b", r.layout.levy_b},
                   {"diffusion", to_string(r.layout.diffusion)},
                   {"levy", to_string(r.layout.levy)}};
    j["dictionaries"]["drift"] = basis_to_json(r.dicts.drift);
    if (r.dicts.diffusion) j["dictionaries"]["diffusion"] = basis_to_json(*r.dicts.diffusion);
    if (r.dicts.levy) j["dictionaries"]["levy"] = basis_to_json(*r.dicts.levy);
    j["parameters"] = nlohmann::json::array();
    for (const auto& p : r.table) {
        nlohmann::json e = {{"name", p.name}, {"estimate", p.estimate}};
        if (p.truth) e["truth"] = *p.truth;
        if (p.clamped) e["clamped"] = true;
        j["parameters"].push_back(e);
    }
    if (r.mre) {
        j["mre"]["total"] = r.mre->total;
        if (r.mre->drift) j["mre"]["drift"] = *r.mre->drift;
        if (r.mre->diffusion) j["mre"]["diffusion"] = *r.mre->diffusion;
        if (r.mre->levy) j["mre"]["levy"] = *r.mre->levy;
    }
    j["residual"] = r.residual;
    j["active"] = r.active;
    j["iterations"] = r.iterations;
    j["fit_seconds"] = r.fit_seconds;
    return j;
}

inline FitReport fit_report_from_json(const nlohmann::json& j) {
    FitReport r;
    r.alpha = j.at("alpha").get<double>();
    r.zeta = vector_from_json(j.at("zeta"));
    const auto& jl = j.at("layout");
    r.dicts.drift = basis_from_json(j.at("dictionaries").at("drift"));
    if (j.at("dictionaries").contains("diffusion"))
        r.dicts.diffusion = basis_from_json(j.at("dictionaries").at("diffusion"));
    if (j.at("dictionaries").contains("levy"))
        r.dicts.levy = basis_from_json(j.at("dictionaries").at("levy"));
    r.layout = CoefficientLayout::make(
        jl.at("dim").get<int>(), jl.at("drift_b").get<int>(),
        diffusion_structure_from_string(jl.at("diffusion").get<std::string>()),
        jl.at("diffusion_b").get<int>(),
        levy_structure_from_string(jl.at("levy").get<std::string>()),
        jl.at("levy_b").get<int>());
    for (const auto& e : j.at("parameters")) {
        ParameterEntry p;
        p.name = e.at("name").get<std::string>();
        p.estimate = e.at("estimate").get<double>();
        if (e.contains("truth")) p.truth = e.at("truth").get<double>();
        if (e.contains("clamped")) p.clamped = e.at("clamped").get<bool>();
        r.table.push_back(p);
    }
    if (j.contains("mre")) {
        MreBreakdown m;
        m.total = j.at("mre").at("total").get<double>();
        if (j.at("mre").contains("drift")) m.drift = j.at("mre").at("drift").get<double>();
        if (j.at("mre").contains("diffusion"))
            m.diffusion = j.at("mre").at("diffusion").get<double>();
        if (j.at("mre").contains("levy")) m.levy = j.at("mre").at("levy").get<double>();
        r.mre = m;
    }
    r.residual = j.at("residual").get<double>();
    r.active = j.at("active").get<std::vector<int>>();
    r.iterations = j.at("iterations").get<int>();
    r.fit_seconds = j.at("fit_seconds").get<double>();
    return r;
}

inline void save_fit_report(const FitReport& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_fit_report: cannot open " + path);
    f << fit_report_to_json(r).dump(2) << "\n";
}

inline FitReport load_fit_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_fit_report: cannot open " + path);
    return fit_report_from_json(nlohmann::json::parse(f));
}

// Flat CSV parameter table: name, truth (empty if unknown), estimate.
inline void save_parameter_csv(const FitReport& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_parameter_csv: cannot open " + path);
    f << "parameter,truth,estimate\n";
    for (const auto& p : r.table) {
        f << p.name << ",";
        if (p.truth) f << detail::fmt17(*p.truth);
        f << "," << detail::fmt17(p.estimate) << "\n";
    }
}

}  // namespace wcr
