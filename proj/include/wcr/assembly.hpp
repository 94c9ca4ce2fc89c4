#pragma once

// Turns (dataset, kernel set, dictionaries) into the stacked regression
// system A zeta = H: Monte Carlo weak-form feature rows per (kernel,
// snapshot), trapezoidal time difference, kernel-major block stacking.
//
// Column contract: drift columns are means of psi_{x_i} Lambda_j, diffusion
// columns means of d_{ij} psi Lambda_s, and the Levy column is
// -mean((-Delta_i)^{alpha/2} psi) so the regressed coefficient equals
// +|xi_i|^alpha (the functional 1d mode folds theta_{alpha,1} in as well).

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "wcr/collocation.hpp"
#include "wcr/dataset.hpp"
#include "wcr/dictionary.hpp"
#include "wcr/specfun.hpp"

namespace wcr {

// Compensated (Kahan) mean; sample counts up to ~3e4 with heavy-tailed
// kernel values degrade naive sums.
inline double kahan_mean(const Eigen::VectorXd& v) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double y = v[i] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(v.size());
}

struct AssemblyDicts {
    BasisDictionary drift;
    std::optional<BasisDictionary> diffusion;  // functional diffusion modes
    std::optional<BasisDictionary> levy;       // functional 1d Levy mode

    void check(const CoefficientLayout& layout) const {
        if (layout.drift_b != drift.size())
            throw std::invalid_argument("AssemblyDicts: drift basis size mismatch");
        if (layout.diffusion == DiffusionStructure::Diagonal ||
            layout.diffusion == DiffusionStructure::Full) {
            if (!diffusion || diffusion->size() != layout.diffusion_b)
                throw std::invalid_argument("AssemblyDicts: diffusion basis mismatch");
        }
        if (layout.levy == LevyStructure::Functional1d) {
            if (!levy || levy->size() != layout.levy_b)
                throw std::invalid_argument("AssemblyDicts: Levy basis mismatch");
        }
    }
};

struct FeatureRow {
    Eigen::VectorXd coeffs;  // length layout.total()
    double kernel_mean = 0.0;
};

// Kernel-independent per-snapshot precomputation (basis value tables).
struct SnapshotBasis {
    Eigen::MatrixXd drift;                     // N x b
    std::optional<Eigen::MatrixXd> diffusion;  // N x b_sigma
    std::optional<Eigen::MatrixXd> levy;       // N x b_xi

    SnapshotBasis(const Eigen::MatrixXd& samples, const AssemblyDicts& dicts,
                  const CoefficientLayout& layout)
        : drift(dicts.drift.eval_block(samples).transpose()) {
        if (layout.diffusion == DiffusionStructure::Diagonal ||
            layout.diffusion == DiffusionStructure::Full)
            diffusion = dicts.diffusion->eval_block(samples).transpose();
        if (layout.levy == LevyStructure::Functional1d)
            levy = dicts.levy->eval_block(samples).transpose();
    }
};

inline FeatureRow feature_row_impl(const Eigen::MatrixXd& samples,
                                   const SnapshotBasis& basis,
                                   const GaussianKernel& kernel,
                                   const CoefficientLayout& layout, double alpha) {
    const Eigen::Index n = samples.rows();
    const int d = layout.dim;
    if (n == 0) throw std::invalid_argument("feature_row: empty snapshot");
    for (Eigen::Index k = 0; k < n; ++k)
        if (!samples.row(k).allFinite())
            throw std::invalid_argument("feature_row: non-finite sample at index " +
                                        std::to_string(k));

    const double g = kernel.width;
    const double norm = std::pow(g * std::sqrt(2.0 * M_PI), -d);

    // standardized offsets and per-axis Gaussian factors
    Eigen::MatrixXd t = (samples.rowwise() - kernel.center.transpose()) / g;
    Eigen::MatrixXd axis_exp = (-0.5 * t.array().square()).exp();

    Eigen::VectorXd psi = norm * axis_exp.rowwise().prod();
    Eigen::MatrixXd grad(n, d);  // psi_{x_i} = -t_i / g * psi
    for (int i = 0; i < d; ++i)
        grad.col(i) = -psi.cwiseProduct(t.col(i)) / g;

    FeatureRow row;
    row.coeffs = Eigen::VectorXd::Zero(layout.total());
    row.kernel_mean = kahan_mean(psi);

    const double inv_n = 1.0 / static_cast<double>(n);

    // drift block: mean over samples of psi_{x_i} Lambda_j
    {
        Eigen::MatrixXd block = grad.transpose() * basis.drift * inv_n;  // d x b
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < layout.drift_b; ++j)
                row.coeffs[layout.drift_index(i, j)] = block(i, j);
    }

    // diffusion block
    auto second_deriv = [&](int i, int j) -> Eigen::VectorXd {
        if (i == j)
            return psi.cwiseProduct((t.col(i).array().square() - 1.0).matrix()) /
                   (g * g);
        return psi.cwiseProduct(t.col(i)).cwiseProduct(t.col(j)) / (g * g);
    };
    switch (layout.diffusion) {
        case DiffusionStructure::ConstantDiagonal:
            for (int i = 0; i < d; ++i)
                row.coeffs[layout.diffusion_index(i, i, 0)] =
                    kahan_mean(second_deriv(i, i));
            break;
        case DiffusionStructure::Diagonal:
            for (int i = 0; i < d; ++i) {
                Eigen::VectorXd vals =
                    basis.diffusion->transpose() * second_deriv(i, i) * inv_n;
                for (int s = 0; s < layout.diffusion_b; ++s)
                    row.coeffs[layout.diffusion_index(i, i, s)] = vals[s];
            }
            break;
        case DiffusionStructure::Full:
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Eigen::VectorXd vals =
                        basis.diffusion->transpose() * second_deriv(i, j) * inv_n;
                    for (int s = 0; s < layout.diffusion_b; ++s)
                        row.coeffs[layout.diffusion_index(i, j, s)] = vals[s];
                }
            break;
        case DiffusionStructure::None:
            break;
    }

    // Levy block
    const FracDerivKernel fd(alpha, g);
    auto frac_column = [&](int i) {
        // (-Delta_i)^{alpha/2} psi per sample
        Eigen::VectorXd vals(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            double off = 1.0;
            for (int j = 0; j < d; ++j)
                if (j != i) off *= axis_exp(k, j);
            vals[k] = norm * off * fd.profile(t(k, i) * g);
        }
        return vals;
    };
    if (layout.levy == LevyStructure::ConstantDiagonal) {
        for (int i = 0; i < d; ++i)
            row.coeffs[layout.levy_index(i)] = -kahan_mean(frac_column(i));
    } else {
        const double theta = FracLaplacianSpec(alpha, 1).theta;
        Eigen::VectorXd fl = frac_column(0);
        Eigen::VectorXd vals = basis.levy->transpose() * fl * inv_n;
        for (int s = 0; s < layout.levy_b; ++s)
            row.coeffs[layout.levy_index(0, s)] = -theta * vals[s];
    }

    if (!row.coeffs.allFinite())
        throw std::runtime_error("feature_row: non-finite feature entry");
    return row;
}

inline FeatureRow feature_row(const Eigen::MatrixXd& samples,
                              const GaussianKernel& kernel,
                              const AssemblyDicts& dicts,
                              const CoefficientLayout& layout, double alpha) {
    dicts.check(layout);
    SnapshotBasis basis(samples, dicts, layout);
    return feature_row_impl(samples, basis, kernel, layout, alpha);
}

// Trapezoidal LMM pair: a = (dt/2)(b_l + b_{l+1}), rhs = h_{l+1} - h_l.
inline std::pair<Eigen::VectorXd, double> lmm_trapezoid(const FeatureRow& lo,
                                                        const FeatureRow& hi,
                                                        double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("lmm_trapezoid: dt > 0");
    return {0.5 * dt * (lo.coeffs + hi.coeffs), hi.kernel_mean - lo.kernel_mean};
}

struct LinearSystem {
    Eigen::MatrixXd matrix;  // M (L-1) x P
    Eigen::VectorXd rhs;
    CoefficientLayout layout;
    // provenance: row r belongs to kernel r / (L-1), snapshot pair r % (L-1)
    std::size_t kernels = 0;
    std::size_t snapshot_pairs = 0;
};

inline LinearSystem assemble(const SnapshotDataset& ds, const KernelSet& kernels,
                             const AssemblyDicts& dicts,
                             const CoefficientLayout& layout, double alpha,
                             int threads = 1) {
    ds.validate();
    dicts.check(layout);
    if (ds.dim != layout.dim)
        throw std::invalid_argument("assemble: dataset/layout dimension mismatch");
    const std::size_t L = ds.num_snapshots();
    if (L < 2) throw std::invalid_argument("assemble: need at least two snapshots");
    const std::size_t M = kernels.size();
    if (M == 0) throw std::invalid_argument("assemble: empty kernel set");

    std::vector<SnapshotBasis> bases;
    bases.reserve(L);
    for (const auto& snap : ds.snapshots) bases.emplace_back(snap, dicts, layout);

    LinearSystem sys;
    sys.layout = layout;
    sys.kernels = M;
    sys.snapshot_pairs = L - 1;
    sys.matrix.resize(static_cast<Eigen::Index>(M * (L - 1)), layout.total());
    sys.rhs.resize(static_cast<Eigen::Index>(M * (L - 1)));

    std::atomic<std::size_t> next{0};
    std::string error;
    std::mutex error_mu;
    auto worker = [&]() {
        for (;;) {
            std::size_t m = next.fetch_add(1);
            if (m >= M) return;
            try {
                std::vector<FeatureRow> rows;
                rows.reserve(L);
                for (std::size_t l = 0; l < L; ++l)
                    rows.push_back(feature_row_impl(ds.snapshots[l], bases[l],
                                                    kernels.kernels[m], layout, alpha));
                for (std::size_t l = 0; l + 1 < L; ++l) {
                    auto [a, h] =
                        lmm_trapezoid(rows[l], rows[l + 1], ds.times[l + 1] - ds.times[l]);
                    auto r = static_cast<Eigen::Index>(m * (L - 1) + l);
                    sys.matrix.row(r) = a.transpose();
                    sys.rhs[r] = h;
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (error.empty())
                    error = "assemble: kernel " + std::to_string(m) + ": " + e.what();
            }
        }
    };
    const int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!error.empty()) throw std::runtime_error(error);
    return sys;
}

// Optional CSV dump of (A, H) for offline inspection.
inline void dump_system_csv(const LinearSystem& sys, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("dump_system_csv: cannot open " + path);
    for (Eigen::Index r = 0; r < sys.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < sys.matrix.cols(); ++c)
            f << detail::fmt17(sys.matrix(r, c)) << ",";
        f << detail::fmt17(sys.rhs[r]) << "\n";
    }
}

}  // namespace wcr
