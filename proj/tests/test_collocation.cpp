// Test-kernel collocation: Latin Hypercube stratification, group
// apportionment, data-driven bounds, and KernelSet JSON round trip.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>

#include "wcr/collocation.hpp"

using Catch::Approx;

namespace {

wcr::SnapshotDataset two_snapshot_dataset() {
    wcr::SnapshotDataset ds;
    ds.dim = 2;
    ds.times = {0.1, 0.2};
    Eigen::MatrixXd a(3, 2), b(2, 2);
    a << -1.0, 0.5, 0.0, 2.0, 0.5, -0.5;
    b << 3.0, 0.0, -2.0, 1.0;
    ds.snapshots = {a, b};
    return ds;
}

}  // namespace

TEST_CASE("data bounds cover every snapshot", "[collocation]") {
    auto ds = two_snapshot_dataset();
    auto [lo, hi] = wcr::data_bounds(ds);
    CHECK(lo[0] == -2.0);
    CHECK(lo[1] == -0.5);
    CHECK(hi[0] == 3.0);
    CHECK(hi[1] == 2.0);
}

TEST_CASE("LHS centers stratify exactly", "[collocation]") {
    const std::size_t m = 40;
    Eigen::VectorXd lo(2), hi(2);
    lo << -1.0, 2.0;
    hi << 3.0, 5.0;
    const double ratio = 0.8;
    auto centers = wcr::lhs_centers(m, lo, hi, ratio, std::uint64_t{7});
    REQUIRE(centers.size() == m);

    for (int j = 0; j < 2; ++j) {
        const double c = 0.5 * (lo[j] + hi[j]);
        const double r = 0.5 * ratio * (hi[j] - lo[j]);
        std::vector<int> occupancy(m, 0);
        for (const auto& x : centers) {
            CHECK(x[j] >= c - r);
            CHECK(x[j] <= c + r);
            double frac = (x[j] - (c - r)) / (2.0 * r);
            auto stratum = static_cast<std::size_t>(frac * static_cast<double>(m));
            if (stratum >= m) stratum = m - 1;
            ++occupancy[stratum];
        }
        // exactly one center per equal-probability stratum per dimension
        for (std::size_t k = 0; k < m; ++k) CHECK(occupancy[k] == 1);
    }

    // determinism in the seed
    auto again = wcr::lhs_centers(m, lo, hi, ratio, std::uint64_t{7});
    for (std::size_t k = 0; k < m; ++k) CHECK(centers[k] == again[k]);
    auto other = wcr::lhs_centers(m, lo, hi, ratio, std::uint64_t{8});
    CHECK(centers[0] != other[0]);

    CHECK_THROWS(wcr::lhs_centers(0, lo, hi, ratio, std::uint64_t{7}));
    CHECK_THROWS(wcr::lhs_centers(m, hi, lo, ratio, std::uint64_t{7}));
    CHECK_THROWS(wcr::lhs_centers(m, lo, hi, 0.0, std::uint64_t{7}));
}

TEST_CASE("group apportionment uses largest remainders", "[collocation]") {
    std::vector<wcr::KernelGroupSpec> g70_30 = {{1.0, 0.7, 1.0}, {0.5, 0.3, 1.0}};
    auto counts = wcr::apportion(10, g70_30);
    CHECK(counts == std::vector<std::size_t>{7, 3});

    // fractional seats go to the largest remainders
    std::vector<wcr::KernelGroupSpec> g3 = {{1.0, 0.25, 1.0}, {1.0, 0.25, 1.0},
                                            {0.5, 0.5, 1.0}};
    counts = wcr::apportion(10, g3);
    CHECK(counts[0] + counts[1] + counts[2] == 10);
    CHECK(counts[2] == 5);
    CHECK(counts[0] + counts[1] == 5);

    std::vector<wcr::KernelGroupSpec> bad = {{1.0, 0.5, 1.0}, {1.0, 0.4, 1.0}};
    CHECK_THROWS(wcr::apportion(10, bad));  // fractions don't sum to 1
    std::vector<wcr::KernelGroupSpec> neg = {{-1.0, 1.0, 1.0}};
    CHECK_THROWS(wcr::apportion(10, neg));  // gamma <= 0
}

TEST_CASE("kernel set construction and JSON round trip", "[collocation]") {
    auto ds = two_snapshot_dataset();
    std::vector<wcr::KernelGroupSpec> groups = {{0.7, 0.6, 0.9}, {1.4, 0.4, 0.5}};
    auto ks = wcr::build_kernel_set(ds, groups, 20, 13);
    REQUIRE(ks.size() == 20);
    // first 12 kernels have width 0.7, remaining 8 width 1.4
    for (std::size_t k = 0; k < 12; ++k) CHECK(ks.kernels[k].width == 0.7);
    for (std::size_t k = 12; k < 20; ++k) CHECK(ks.kernels[k].width == 1.4);

    // determinism
    auto ks2 = wcr::build_kernel_set(ds, groups, 20, 13);
    for (std::size_t k = 0; k < 20; ++k)
        CHECK(ks.kernels[k].center == ks2.kernels[k].center);

    const std::string path =
        (std::filesystem::temp_directory_path() / "wcr_test_kernels.json").string();
    wcr::save_kernel_set(ks, path);
    auto back = wcr::load_kernel_set(path);
    REQUIRE(back.size() == ks.size());
    CHECK(back.seed == ks.seed);
    CHECK(back.lower == ks.lower);
    CHECK(back.upper == ks.upper);
    for (std::size_t k = 0; k < ks.size(); ++k) {
        CHECK(back.kernels[k].width == ks.kernels[k].width);
        CHECK(back.kernels[k].center == ks.kernels[k].center);
    }

    CHECK_THROWS(wcr::build_kernel_set(ds, {}, 20, 13));
}
