// Model reconstruction from regressed coefficients, error metrics (MRE,
// relative drift L2, Wasserstein-1 with brute-force oracles), forward
// prediction, and FitReport serialization.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "wcr/model_eval.hpp"

using Catch::Approx;
using wcr::CoefficientLayout;
using wcr::DiffusionStructure;
using wcr::LevyStructure;

TEST_CASE("reconstruct inverts the coefficient frame", "[model_eval]") {
    const double alpha = 1.5;
    wcr::AssemblyDicts dicts;
    dicts.drift = wcr::full_poly_basis(2, 1);  // {1, x1, x2}
    auto layout = CoefficientLayout::make(2, 3, DiffusionStructure::ConstantDiagonal,
                                          1, LevyStructure::ConstantDiagonal, 1);
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(layout.total());
    zeta[layout.drift_index(0, 1)] = -1.0;
    zeta[layout.drift_index(1, 2)] = 2.0;
    zeta[layout.diffusion_index(0, 0, 0)] = 0.5;   // G = 0.5 -> sigma = 1
    zeta[layout.diffusion_index(1, 1, 0)] = -0.1;  // negative -> clamped to 0
    zeta[layout.levy_index(0)] = 1.0;              // |xi|^alpha = 1 -> xi = 1
    zeta[layout.levy_index(1)] = std::pow(0.5, alpha);

    std::vector<int> clamped;
    auto m = wcr::reconstruct(zeta, layout, dicts, alpha, &clamped);
    CHECK(m.drift_coeffs(0, 1) == -1.0);
    CHECK(m.drift_coeffs(1, 2) == 2.0);
    CHECK(m.diffusion.sigma_const[0] == Approx(1.0));
    CHECK(m.diffusion.sigma_const[1] == 0.0);
    CHECK(m.levy.xi_const[0] == Approx(1.0));
    CHECK(m.levy.xi_const[1] == Approx(0.5));
    CHECK(clamped == std::vector<int>{layout.diffusion_index(1, 1, 0)});

    CHECK_THROWS(wcr::reconstruct(Eigen::VectorXd::Zero(3), layout, dicts, alpha));
}

TEST_CASE("reconstruct handles functional and absent noise blocks",
          "[model_eval]") {
    const double alpha = 1.5;
    wcr::AssemblyDicts dicts;
    dicts.drift = wcr::full_poly_basis(1, 1);
    dicts.diffusion = wcr::full_poly_basis(1, 2);
    auto layout = CoefficientLayout::make(1, 2, DiffusionStructure::Diagonal, 3,
                                          LevyStructure::ConstantDiagonal, 1);
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(layout.total());
    zeta[layout.diffusion_index(0, 0, 2)] = 0.5;  // G(x) = 0.5 x^2
    auto m = wcr::reconstruct(zeta, layout, dicts, alpha);
    Eigen::VectorXd x(1);
    x << 2.0;
    CHECK(m.diffusion.sigma_at(x, 0) == Approx(std::sqrt(2.0 * 0.5 * 4.0)));

    auto none = CoefficientLayout::make(1, 2, DiffusionStructure::None, 0,
                                        LevyStructure::ConstantDiagonal, 1);
    wcr::AssemblyDicts nd;
    nd.drift = dicts.drift;
    auto m2 = wcr::reconstruct(Eigen::VectorXd::Zero(none.total()), none, nd, alpha);
    CHECK(m2.diffusion.sigma_at(x, 0) == 0.0);
}

TEST_CASE("MRE arithmetic over truth-nonzero parameters", "[model_eval]") {
    wcr::AssemblyDicts dicts;
    dicts.drift = wcr::full_poly_basis(1, 1);  // {1, x}
    auto layout = CoefficientLayout::make(1, 2, DiffusionStructure::ConstantDiagonal,
                                          1, LevyStructure::ConstantDiagonal, 1);
    std::vector<wcr::ParameterEntry> table(4);
    table[0] = {"lambda0", 0.9796, 1.0, false};
    table[1] = {"lambda1", -1.0141, -1.0, false};
    table[2] = {"sigma", 0.3, 0.0, false};  // truth 0: excluded from MRE
    table[3] = {"xi", 0.5, std::nullopt, false};
    CHECK(wcr::mre(table, layout) == Approx(0.0204).margin(1e-12));

    auto breakdown = wcr::mre_breakdown(table, layout);
    REQUIRE(breakdown.drift.has_value());
    CHECK(*breakdown.drift == Approx(0.0204).margin(1e-12));
    CHECK_FALSE(breakdown.diffusion.has_value());

    // no nonzero truth -> error
    for (auto& p : table) p.truth = 0.0;
    CHECK_THROWS(wcr::mre(table, layout));
}

TEST_CASE("truth values map onto the fit layout in the report frame",
          "[model_eval]") {
    const double alpha = 1.5;
    wcr::SdeModel truth;
    truth.dim = 1;
    truth.alpha = alpha;
    truth.drift_basis =
        wcr::reduced_basis(1, {wcr::BasisElement::monomial({1}),
                               wcr::BasisElement::monomial({3})});
    truth.drift_coeffs.resize(1, 2);
    truth.drift_coeffs << 1.0, -1.0;
    truth.diffusion = wcr::DiffusionTerm::constant_diagonal(
        Eigen::VectorXd::Constant(1, 1.0));
    truth.levy = wcr::LevyTerm::constant_diagonal(Eigen::VectorXd::Constant(1, 1.0));

    wcr::AssemblyDicts dicts;
    dicts.drift = wcr::full_poly_basis(1, 3);  // {1, x, x^2, x^3}
    auto layout = CoefficientLayout::make(1, 4, DiffusionStructure::ConstantDiagonal,
                                          1, LevyStructure::ConstantDiagonal, 1);
    auto v = wcr::truth_report_values(truth, layout, dicts);
    REQUIRE(v.has_value());
    CHECK((*v)[layout.drift_index(0, 0)] == 0.0);
    CHECK((*v)[layout.drift_index(0, 1)] == 1.0);
    CHECK((*v)[layout.drift_index(0, 3)] == -1.0);
    CHECK((*v)[layout.diffusion_index(0, 0, 0)] == 1.0);  // report frame: sigma
    CHECK((*v)[layout.levy_index(0)] == 1.0);             // report frame: xi

    // drift term outside the dictionary -> not representable
    wcr::AssemblyDicts small;
    small.drift = wcr::full_poly_basis(1, 2);
    auto l2 = CoefficientLayout::make(1, 3, DiffusionStructure::ConstantDiagonal,
                                      1, LevyStructure::ConstantDiagonal, 1);
    CHECK_FALSE(wcr::truth_report_values(truth, l2, small).has_value());
}

namespace {

// Exhaustive-assignment W1 oracle for equal-count 1d sets (n <= 8).
double w1_bruteforce_equal(std::vector<double> a, std::vector<double> b) {
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::sort(perm.begin(), perm.end());
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            cost += std::abs(a[i] - b[perm[i]]);
        best = std::min(best, cost / static_cast<double>(a.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Quantile-grid W1 oracle for unequal counts: both empirical quantile
// functions are constant on multiples of 1/(n m), so midpoint evaluation on
// that grid is exact.
double w1_bruteforce_grid(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size(), g = n * m;
    double sum = 0.0;
    for (std::size_t k = 0; k < g; ++k) {
        double u = (static_cast<double>(k) + 0.5) / static_cast<double>(g);
        auto qa = a[static_cast<std::size_t>(
            std::ceil(u * static_cast<double>(n))) - 1];
        auto qb = b[static_cast<std::size_t>(
            std::ceil(u * static_cast<double>(m))) - 1];
        sum += std::abs(qa - qb);
    }
    return sum / static_cast<double>(g);
}

}  // namespace

TEST_CASE("Wasserstein-1 scalar distance", "[model_eval][oracle]") {
    CHECK(wcr::wd1_scalar({0.0}, {1.0}) == Approx(1.0));
    CHECK(wcr::wd1_scalar({0.0, 0.0}, {1.0, 1.0}) == Approx(1.0));
    CHECK(wcr::wd1_scalar({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK_THROWS(wcr::wd1_scalar({}, {1.0}));

    std::mt19937_64 eng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        // equal counts vs exhaustive assignment
        std::vector<double> a(7), b(7);
        for (auto& v : a) v = u(eng);
        for (auto& v : b) v = u(eng);
        CHECK(wcr::wd1_scalar(a, b) == Approx(w1_bruteforce_equal(a, b)).epsilon(1e-12));
        // symmetry
        CHECK(wcr::wd1_scalar(a, b) == Approx(wcr::wd1_scalar(b, a)).epsilon(1e-12));

        // unequal counts vs quantile-grid oracle
        std::vector<double> c(4), d(6);
        for (auto& v : c) v = u(eng);
        for (auto& v : d) v = u(eng);
        CHECK(wcr::wd1_scalar(c, d) == Approx(w1_bruteforce_grid(c, d)).epsilon(1e-12));

        // triangle inequality
        std::vector<double> e(5);
        for (auto& v : e) v = u(eng);
        std::vector<double> a5(a.begin(), a.begin() + 5);
        std::vector<double> b5(b.begin(), b.begin() + 5);
        CHECK(wcr::wd1_scalar(a5, b5) <=
              wcr::wd1_scalar(a5, e) + wcr::wd1_scalar(e, b5) + 1e-12);
    }
}

TEST_CASE("marginal W1 over matrix columns", "[model_eval]") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 0.0, 5.0, 0.0, 5.0;
    b << 1.0, 5.0, 1.0, 5.0;
    auto w = wcr::wd1_marginal(a, b);
    CHECK(w[0] == Approx(1.0));
    CHECK(w[1] == 0.0);
    Eigen::MatrixXd c(2, 3);
    CHECK_THROWS(wcr::wd1_marginal(a, c));
}

TEST_CASE("relative drift L2 metric", "[model_eval]") {
    auto field = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd m(1);
        m[0] = x[0] - x[0] * x[0] * x[0];
        return m;
    };
    auto doubled = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return 2.0 * field(x);
    };
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(1, -1.2);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(1, 1.2);
    CHECK(wcr::drift_l2_rel(field, field, lo, hi, 1000, 1) == 0.0);
    CHECK(wcr::drift_l2_rel(field, doubled, lo, hi, 1000, 1) == Approx(1.0));
    auto zero = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(x.size());
    };
    CHECK_THROWS(wcr::drift_l2_rel(zero, field, lo, hi, 100, 1));
}

TEST_CASE("prediction with zero dynamics preserves the initial marginal",
          "[model_eval]") {
    wcr::SdeModel m;
    m.dim = 1;
    m.alpha = 1.5;
    m.drift_basis = wcr::full_poly_basis(1, 0);
    m.drift_coeffs = Eigen::MatrixXd::Zero(1, 1);
    m.diffusion = wcr::DiffusionTerm::constant_diagonal(Eigen::VectorXd::Zero(1));
    m.levy = wcr::LevyTerm::constant_diagonal(Eigen::VectorXd::Zero(1));

    std::mt19937_64 eng(6);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd initial(500, 1);
    for (int r = 0; r < 500; ++r) initial(r, 0) = normal(eng);

    wcr::StableSamplerConfig sampler;
    sampler.alpha = 1.5;
    auto pred = wcr::predict(m, initial, 1.0, {1.5}, sampler, 5000, 11, 1e-2);
    REQUIRE(pred.num_snapshots() == 1);
    // every predicted state is a resampled initial state
    std::vector<double> pool(initial.col(0).data(), initial.col(0).data() + 500);
    std::sort(pool.begin(), pool.end());
    for (Eigen::Index r = 0; r < pred.snapshots[0].rows(); ++r)
        CHECK(std::binary_search(pool.begin(), pool.end(), pred.snapshots[0](r, 0)));
    // marginal preserved up to bootstrap noise
    CHECK(wcr::wd1_marginal(pred.snapshots[0], initial)[0] < 0.1);
}

TEST_CASE("fit report JSON round trip", "[model_eval]") {
    wcr::FitReport r;
    r.alpha = 1.5;
    r.dicts.drift = wcr::full_poly_basis(1, 1);
    r.layout = CoefficientLayout::make(1, 2, DiffusionStructure::ConstantDiagonal,
                                       1, LevyStructure::ConstantDiagonal, 1);
    r.zeta = Eigen::VectorXd::LinSpaced(r.layout.total(), 0.25, 1.0);
    r.table = wcr::parameter_table(r.zeta, r.layout, r.dicts, r.alpha);
    r.table[1].truth = -1.0;
    r.residual = 0.05;
    r.active = {1, 3};
    r.iterations = 4;
    r.fit_seconds = 1.25;

    const std::string path =
        (std::filesystem::temp_directory_path() / "wcr_test_report.json").string();
    wcr::save_fit_report(r, path);
    auto back = wcr::load_fit_report(path);
    CHECK(back.alpha == r.alpha);
    CHECK(back.zeta == r.zeta);
    CHECK(back.layout.total() == r.layout.total());
    CHECK(back.active == r.active);
    CHECK(back.residual == r.residual);
    REQUIRE(back.table.size() == r.table.size());
    CHECK(back.table[1].truth == r.table[1].truth);
    CHECK(back.table[0].name == r.table[0].name);
    // the reconstructed model from the round-tripped report is usable
    CHECK_NOTHROW(back.fitted_model());
}
