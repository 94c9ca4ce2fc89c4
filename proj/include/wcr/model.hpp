#pragma once

// SDE model dX = m(X) dt + sigma(X) dB + xi(X) dL over a basis dictionary.
// Serves both as ground truth for simulation and as the reconstructed
// output of a fit.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "wcr/dictionary.hpp"
#include "wcr/specfun.hpp"

namespace wcr {

// Drift terms that are deliberately outside every dictionary (used to test
// polynomial approximation of non-polynomial dynamics).
enum class CustomDrift { None, CubicGaussianWell };  // -4x^3 - 2x e^{-x^2}, d = 1

struct DiffusionTerm {
    enum class Mode {
        ConstantDiagonal,  // sigma_i constants
        FunctionalSigma1d, // sigma(x) = coeffs . basis(x), d = 1
        FunctionalG1d      // G(x) = coeffs . basis(x), sigma = sqrt(2G), d = 1
    };
    Mode mode = Mode::ConstantDiagonal;
    Eigen::VectorXd sigma_const;              // ConstantDiagonal
    std::optional<BasisDictionary> basis;     // functional modes
    Eigen::VectorXd coeffs;

    static DiffusionTerm constant_diagonal(Eigen::VectorXd sigma) {
        DiffusionTerm t;
        t.mode = Mode::ConstantDiagonal;
        t.sigma_const = std::move(sigma);
        return t;
    }
    static DiffusionTerm functional_sigma(BasisDictionary b, Eigen::VectorXd c) {
        DiffusionTerm t;
        t.mode = Mode::FunctionalSigma1d;
        t.basis = std::move(b);
        t.coeffs = std::move(c);
        return t;
    }
    static DiffusionTerm functional_g(BasisDictionary b, Eigen::VectorXd c) {
        DiffusionTerm t;
        t.mode = Mode::FunctionalG1d;
        t.basis = std::move(b);
        t.coeffs = std::move(c);
        return t;
    }

    double sigma_at(const Eigen::VectorXd& x, int axis) const {
        switch (mode) {
            case Mode::ConstantDiagonal:
                return sigma_const[axis];
            case Mode::FunctionalSigma1d:
                return coeffs.dot(basis->eval(x));
            case Mode::FunctionalG1d: {
                double g = coeffs.dot(basis->eval(x));
                return g > 0.0 ? std::sqrt(2.0 * g) : 0.0;
            }
        }
        return 0.0;
    }
};

struct LevyTerm {
    enum class Mode {
        ConstantDiagonal,    // xi_i constants
        FunctionalXi1d,      // xi0(x) = coeffs . basis(x), d = 1
        FunctionalXiAlpha1d  // |xi0(x)|^alpha = coeffs . basis(x), d = 1
    };
    Mode mode = Mode::ConstantDiagonal;
    Eigen::VectorXd xi_const;
    std::optional<BasisDictionary> basis;
    Eigen::VectorXd coeffs;

    static LevyTerm constant_diagonal(Eigen::VectorXd xi) {
        LevyTerm t;
        t.mode = Mode::ConstantDiagonal;
        t.xi_const = std::move(xi);
        return t;
    }
    static LevyTerm functional_xi(BasisDictionary b, Eigen::VectorXd c) {
        LevyTerm t;
        t.mode = Mode::FunctionalXi1d;
        t.basis = std::move(b);
        t.coeffs = std::move(c);
        return t;
    }
    static LevyTerm functional_xi_alpha(BasisDictionary b, Eigen::VectorXd c) {
        LevyTerm t;
        t.mode = Mode::FunctionalXiAlpha1d;
        t.basis = std::move(b);
        t.coeffs = std::move(c);
        return t;
    }

    double xi_at(const Eigen::VectorXd& x, int axis, double alpha) const {
        switch (mode) {
            case Mode::ConstantDiagonal:
                return xi_const[axis];
            case Mode::FunctionalXi1d:
                return coeffs.dot(basis->eval(x));
            case Mode::FunctionalXiAlpha1d: {
                double v = coeffs.dot(basis->eval(x));
                return v > 0.0 ? std::pow(v, 1.0 / alpha) : 0.0;
            }
        }
        return 0.0;
    }
};

struct SdeModel {
    int dim = 1;
    double alpha = 1.5;
    BasisDictionary drift_basis;
    Eigen::MatrixXd drift_coeffs;  // dim x b
    CustomDrift custom_drift = CustomDrift::None;
    DiffusionTerm diffusion;
    LevyTerm levy;

    void validate() const {
        if (dim < 1) throw std::invalid_argument("SdeModel: dim >= 1");
        if (!FracLaplacianSpec::valid_alpha(alpha))
            throw std::invalid_argument("SdeModel: alpha outside (0,1) U (1,2)");
        if (custom_drift == CustomDrift::None) {
            if (drift_coeffs.rows() != dim ||
                drift_coeffs.cols() != drift_basis.size())
                throw std::invalid_argument("SdeModel: drift coefficient shape");
        }
        if (diffusion.mode == DiffusionTerm::Mode::ConstantDiagonal &&
            diffusion.sigma_const.size() != dim)
            throw std::invalid_argument("SdeModel: sigma length != dim");
        if (diffusion.mode != DiffusionTerm::Mode::ConstantDiagonal && dim != 1)
            throw std::invalid_argument("SdeModel: functional diffusion needs d = 1");
        if (levy.mode == LevyTerm::Mode::ConstantDiagonal &&
            levy.xi_const.size() != dim)
            throw std::invalid_argument("SdeModel: xi length != dim");
        if (levy.mode != LevyTerm::Mode::ConstantDiagonal && dim != 1)
            throw std::invalid_argument("SdeModel: functional Levy intensity needs d = 1");
    }

    Eigen::VectorXd drift_at(const Eigen::VectorXd& x) const {
        if (custom_drift == CustomDrift::CubicGaussianWell) {
            Eigen::VectorXd m(1);
            double v = x[0];
            m[0] = -4.0 * v * v * v - 2.0 * v * std::exp(-v * v);
            return m;
        }
        return drift_coeffs * drift_basis.eval(x);
    }
};

}  // namespace wcr
