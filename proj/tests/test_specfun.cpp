// Special-function layer: Gamma, 1F1 on the non-positive axis, Gaussian
// kernel calculus, and the closed-form fractional derivative of a Gaussian
// kernel cross-checked against an independent FFT oracle.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wcr/frac_fft.hpp"
#include "wcr/specfun.hpp"
#include "support/ddreal.hpp"

using Catch::Approx;

TEST_CASE("gamma_fn matches known values", "[specfun]") {
    CHECK(wcr::gamma_fn(1.0) == Approx(1.0).epsilon(1e-13));
    CHECK(wcr::gamma_fn(0.5) == Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(wcr::gamma_fn(5.0) == Approx(24.0).epsilon(1e-13));
    CHECK(wcr::gamma_fn(2.5) == Approx(1.5 * 0.5 * std::sqrt(M_PI)).epsilon(1e-13));
    // reflection-branch value
    CHECK(wcr::gamma_fn(-0.5) == Approx(-2.0 * std::sqrt(M_PI)).epsilon(1e-12));
    CHECK_THROWS(wcr::gamma_fn(0.0));
    CHECK_THROWS(wcr::gamma_fn(-3.0));
}

TEST_CASE("1F1 point identities", "[specfun]") {
    // z = 0
    CHECK(wcr::hyp1f1_nonpos(1.75, 0.5, 0.0) == Approx(1.0));
    // a == b: 1F1(a;a;z) = e^z
    CHECK(wcr::hyp1f1_nonpos(1.25, 1.25, -2.0) == Approx(std::exp(-2.0)).epsilon(1e-13));
    CHECK_THROWS(wcr::hyp1f1_nonpos(-1.0, 0.5, -1.0));
    CHECK_THROWS(wcr::hyp1f1_nonpos(1.0, 0.5, 1.0));
}

TEST_CASE("1F1 matches extended-precision oracle on random points", "[specfun]") {
    // Regime actually used: a = (1+alpha)/2 with alpha in (0,2), b = 1/2,
    // z = -(x-rho)^2/(2 gamma^2) covering both the series branch (|z| <= 50)
    // and the asymptotic branch.
    std::mt19937_64 eng(12345);
    std::uniform_real_distribution<double> ua(0.5, 1.5);
    std::uniform_real_distribution<double> uz(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double a = ua(eng);
        if (std::abs(a - 1.0) < 1e-3) continue;  // alpha = 1 excluded upstream
        double b = 0.5;
        // log-uniform magnitude from 1e-3 to 1e3
        double w = std::pow(10.0, -3.0 + 6.0 * uz(eng));
        double got = wcr::hyp1f1_nonpos(a, b, -w);
        double ref = ddtest::hyp1f1_oracle(a, b, -w);
        double rel = std::abs(got - ref) / std::abs(ref);
        worst = std::max(worst, rel);
    }
    INFO("worst relative error " << worst);
    CHECK(worst < 1e-10);
}

TEST_CASE("1F1 contiguous recurrence", "[specfun]") {
    // a 1F1(a+1;b;z) = (b-a) 1F1(a-1... use the standard three-term relation
    // (b-a) 1F1(a-1;b;z) + (2a-b+z) 1F1(a;b;z) - a 1F1(a+1;b;z) = 0.
    for (double z : {-0.3, -2.0, -9.5, -31.0}) {
        double a = 1.2, b = 0.5;
        double fm = wcr::hyp1f1_nonpos(a - 1.0, b, z);
        double f0 = wcr::hyp1f1_nonpos(a, b, z);
        double fp = wcr::hyp1f1_nonpos(a + 1.0, b, z);
        double lhs = (b - a) * fm + (2.0 * a - b + z) * f0 - a * fp;
        double scale = std::abs((b - a) * fm) + std::abs((2.0 * a - b + z) * f0) +
                       std::abs(a * fp);
        CHECK(std::abs(lhs) <= 1e-12 * scale);
    }
}

TEST_CASE("Gaussian kernel value, gradient, Hessian", "[specfun]") {
    Eigen::VectorXd rho(2);
    rho << 0.3, -0.7;
    wcr::GaussianKernel k(rho, 0.8);

    Eigen::VectorXd x(2);
    x << -0.2, 0.4;

    // translation invariance: psi(x, rho) == psi(x+s, rho+s)
    Eigen::VectorXd s(2);
    s << 1.7, -2.4;
    wcr::GaussianKernel kt(rho + s, 0.8);
    CHECK(k.value(x) == Approx(kt.value(x + s)).epsilon(1e-14));

    // normalization constant at the center
    CHECK(k.value(rho) == Approx(1.0 / (2.0 * M_PI * 0.8 * 0.8)).epsilon(1e-14));

    // gradient vs central finite differences
    const double h = 1e-6;
    Eigen::VectorXd g = k.gradient(x);
    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        double fd = (k.value(xp) - k.value(xm)) / (2.0 * h);
        CHECK(g[i] == Approx(fd).epsilon(1e-7));
    }

    // Hessian symmetry and finite-difference agreement (h ~ eps^{1/4} is
    // near-optimal for second differences)
    Eigen::MatrixXd hess = k.hessian(x);
    CHECK(hess(0, 1) == Approx(hess(1, 0)).epsilon(1e-14));
    const double h2 = 1e-4;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
            xpp[i] += h2; xpp[j] += h2;
            xpm[i] += h2; xpm[j] -= h2;
            xmp[i] -= h2; xmp[j] += h2;
            xmm[i] -= h2; xmm[j] -= h2;
            double fd = (k.value(xpp) - k.value(xpm) - k.value(xmp) + k.value(xmm)) /
                        (4.0 * h2 * h2);
            CHECK(hess(i, j) == Approx(fd).margin(1e-6 * std::abs(hess(i, i)) + 1e-10));
        }

    CHECK_THROWS(wcr::GaussianKernel(rho, 0.0));
    CHECK_THROWS(wcr::GaussianKernel(rho, -1.0));
}

namespace {

// Relative L2 mismatch between the closed-form fractional derivative and the
// FFT oracle over the window |x - rho| <= 6 gamma.
double closed_vs_fft(double rho, double gamma, double alpha) {
    const std::size_t n = 1 << 14;
    // Domain large enough that the polynomially-decaying fractional
    // derivative has negligible periodization error.
    const double L = 400.0;
    const double dx = L / static_cast<double>(n);
    Eigen::VectorXd c(1);
    c << rho;
    wcr::GaussianKernel k(c, gamma);
    std::vector<double> f(n);
    for (std::size_t j = 0; j < n; ++j) {
        double x = -L / 2.0 + dx * static_cast<double>(j) + rho;
        Eigen::VectorXd xv(1);
        xv << x;
        f[j] = k.value(xv);
    }
    auto oracle = wcr::frac_laplacian_fft_oracle(f, dx, alpha);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double x = -L / 2.0 + dx * static_cast<double>(j) + rho;
        if (std::abs(x - rho) > 6.0 * gamma) continue;
        Eigen::VectorXd xv(1);
        xv << x;
        double closed = wcr::frac_deriv_gaussian_1comp(k, 0, alpha, xv);
        double diff = closed - oracle.values[j];
        num += diff * diff;
        den += closed * closed;
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("closed-form fractional derivative matches FFT oracle",
          "[specfun][oracle]") {
    std::mt19937_64 eng(777);
    std::uniform_real_distribution<double> urho(-2.0, 2.0);
    std::uniform_real_distribution<double> ugam(0.4, 1.5);
    // Jump-regime range used by the toolkit; at small alpha the oracle's own
    // periodization error (tails ~ |x|^{-1-alpha}) would dominate the check.
    std::uniform_real_distribution<double> ual(1.05, 1.95);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        double alpha = ual(eng);
        double rel = closed_vs_fft(urho(eng), ugam(eng), alpha);
        worst = std::max(worst, rel);
    }
    INFO("worst relative L2 " << worst);
    CHECK(worst <= 1e-4);
}

TEST_CASE("alpha -> 2 limit approaches -psi''", "[specfun]") {
    // (-Delta)^{alpha/2} psi -> -psi'' as alpha -> 2.
    Eigen::VectorXd c(1);
    c << 0.2;
    wcr::GaussianKernel k(c, 0.9);
    double num = 0.0, den = 0.0;
    for (double x = -3.0; x <= 3.5; x += 0.05) {
        Eigen::VectorXd xv(1);
        xv << x;
        double fd = wcr::frac_deriv_gaussian_1comp(k, 0, 1.999, xv);
        double lap = -k.hessian(xv)(0, 0);
        num += (fd - lap) * (fd - lap);
        den += lap * lap;
    }
    CHECK(std::sqrt(num / den) <= 0.02);
}

TEST_CASE("fractional-derivative width scaling on the unnormalized profile",
          "[specfun]") {
    // Halving gamma multiplies the on-center unnormalized profile value by
    // 2^alpha (the gamma^{-alpha} prefactor of the closed form).
    for (double alpha : {0.6, 1.3, 1.7}) {
        wcr::FracDerivKernel wide(alpha, 1.0);
        wcr::FracDerivKernel narrow(alpha, 0.5);
        CHECK(narrow.profile(0.0) / wide.profile(0.0) ==
              Approx(std::pow(2.0, alpha)).epsilon(1e-12));
    }
}

TEST_CASE("FracDerivKernel agrees with frac_deriv_gaussian_1comp", "[specfun]") {
    double alpha = 1.5, gamma = 0.7;
    Eigen::VectorXd c(2);
    c << 0.4, -0.9;
    wcr::GaussianKernel k(c, gamma);
    wcr::FracDerivKernel fd(alpha, gamma);
    Eigen::VectorXd x(2);
    x << 1.1, 0.3;
    // axis 0: off-axis Gaussian factor times profile
    double off = std::exp(-std::pow(x[1] - c[1], 2) / (2.0 * gamma * gamma));
    double norm = std::pow(gamma * std::sqrt(2.0 * M_PI), -2);
    double expect = norm * off * fd.profile(x[0] - c[0]);
    CHECK(wcr::frac_deriv_gaussian_1comp(k, 0, alpha, x) ==
          Approx(expect).epsilon(1e-13));
}

TEST_CASE("invalid alpha rejected", "[specfun]") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(1);
    wcr::GaussianKernel k(c, 1.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    CHECK_THROWS(wcr::frac_deriv_gaussian_1comp(k, 0, 1.0, x));
    CHECK_THROWS(wcr::frac_deriv_gaussian_1comp(k, 0, 2.0, x));
    CHECK_THROWS(wcr::frac_deriv_gaussian_1comp(k, 0, 0.0, x));
    CHECK_THROWS(wcr::FracLaplacianSpec(2.5, 1));
}
