#pragma once

// Sequential-threshold ridge regression (STRidge): least-squares warm start,
// iterative hard thresholding, ridge refit on the active set until the
// active set reaches a fixpoint.
//
// Columns are normalized to unit RMS before thresholding so mixed-magnitude
// basis columns compare like with like; the threshold tau is applied to the
// normalized-frame coefficients relative to the largest one (an absolute cut
// in the normalized frame would depend on the kernel normalization and the
// snapshot spacing).

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace wcr {

struct StridgeConfig {
    double ridge = -1.0;   // < 0: scale-aware default 1e-5 trace(A^T A)/P
    double threshold = 0.05;
    int max_iter = 50;

    void validate() const {
        if (!(threshold >= 0.0))
            throw std::invalid_argument("StridgeConfig: threshold >= 0");
        if (max_iter < 1) throw std::invalid_argument("StridgeConfig: max_iter >= 1");
    }
};

struct StridgeResult {
    Eigen::VectorXd coeffs;
    std::vector<int> active;
    int iterations = 0;
    double residual = 0.0;       // ||A zeta - H|| / ||H|| (0 if H = 0)
    bool rank_deficient = false;
    bool underdetermined = false;  // fewer rows than columns
};

namespace detail {

// Ridge solve via QR on the stacked [A; sqrt(lambda) I] system; falls back
// to a minimum-norm SVD solve when the subproblem is rank deficient.
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& h,
                                   double lambda, bool& rank_deficient) {
    const Eigen::Index p = a.cols();
    if (lambda > 0.0) {
        Eigen::MatrixXd stacked(a.rows() + p, p);
        stacked.topRows(a.rows()) = a;
        stacked.bottomRows(p) =
            std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows() + p);
        rhs.head(a.rows()) = h;
        return stacked.colPivHouseholderQr().solve(rhs);
    }
    auto qr = a.colPivHouseholderQr();
    if (qr.rank() < p) {
        rank_deficient = true;
        return a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(h);
    }
    return qr.solve(h);
}

}  // namespace detail

inline StridgeResult stridge(const Eigen::MatrixXd& a, const Eigen::VectorXd& h,
                             const StridgeConfig& cfg) {
    cfg.validate();
    if (a.rows() != h.size())
        throw std::invalid_argument("stridge: row count mismatch");
    if (!a.allFinite() || !h.allFinite())
        throw std::invalid_argument("stridge: non-finite entries");
    const Eigen::Index p = a.cols();

    StridgeResult res;
    res.underdetermined = a.rows() < p;

    // unit-RMS column scaling; zero columns stay zero
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double rms = std::sqrt(a.col(j).squaredNorm() / static_cast<double>(a.rows()));
        scale[j] = rms > 0.0 ? rms : 1.0;
    }
    Eigen::MatrixXd an = a * scale.cwiseInverse().asDiagonal();

    double lambda = cfg.ridge;
    if (lambda < 0.0)
        lambda = 1e-5 * an.squaredNorm() / static_cast<double>(p);

    // least-squares warm start (no ridge)
    Eigen::VectorXd w = detail::ridge_solve(an, h, 0.0, res.rank_deficient);

    std::vector<int> active;
    for (int it = 0; it < cfg.max_iter; ++it) {
        res.iterations = it + 1;
        const double wmax = w.cwiseAbs().maxCoeff();
        std::vector<int> next_active;
        for (Eigen::Index j = 0; j < p; ++j)
            if (wmax > 0.0 && std::abs(w[j]) >= cfg.threshold * wmax)
                next_active.push_back(static_cast<int>(j));
        const bool converged = (next_active == active) && it > 0;
        active = std::move(next_active);
        if (active.empty()) {
            w.setZero();
            break;
        }
        Eigen::MatrixXd sub(an.rows(), static_cast<Eigen::Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k)
            sub.col(static_cast<Eigen::Index>(k)) = an.col(active[k]);
        Eigen::VectorXd ws = detail::ridge_solve(sub, h, lambda, res.rank_deficient);
        w.setZero();
        for (std::size_t k = 0; k < active.size(); ++k) w[active[k]] = ws[k];
        if (converged) break;
    }

    res.coeffs = w.cwiseQuotient(scale);
    res.active = active;
    double hn = h.norm();
    res.residual = hn > 0.0 ? (a * res.coeffs - h).norm() / hn : 0.0;
    return res;
}

}  // namespace wcr
