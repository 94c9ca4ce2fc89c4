#pragma once

// Sampling of the M Gaussian test kernels: data-driven bounds, Latin
// Hypercube centers, and mixed-width kernel groups.

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wcr/dataset.hpp"
#include "wcr/rng.hpp"
#include "wcr/specfun.hpp"

namespace wcr {

struct KernelGroupSpec {
    double gamma = 1.0;      // kernel width
    double fraction = 1.0;   // share of M, groups must sum to 1
    double lhs_ratio = 1.0;  // scaling of the sampling box about the data midpoint
};

struct KernelSet {
    std::vector<GaussianKernel> kernels;
    std::uint64_t seed = 0;
    std::vector<KernelGroupSpec> groups;
    Eigen::VectorXd lower, upper;  // data bounds used for sampling

    std::size_t size() const { return kernels.size(); }
};

// Coordinatewise min/max over every sample of every snapshot.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> data_bounds(
    const SnapshotDataset& ds) {
    if (ds.snapshots.empty())
        throw std::invalid_argument("data_bounds: empty dataset");
    Eigen::VectorXd lo = ds.snapshots.front().colwise().minCoeff().transpose();
    Eigen::VectorXd hi = ds.snapshots.front().colwise().maxCoeff().transpose();
    for (std::size_t l = 1; l < ds.snapshots.size(); ++l) {
        lo = lo.cwiseMin(ds.snapshots[l].colwise().minCoeff().transpose());
        hi = hi.cwiseMax(ds.snapshots[l].colwise().maxCoeff().transpose());
    }
    return {lo, hi};
}

// One center per equal-probability stratum per dimension inside the box
// scaled about the data midpoint: [c - r, c + r], c = (l+u)/2,
// r = lhs_ratio (u - l)/2.  Stratum order is an independent uniform random
// permutation per dimension.
inline std::vector<Eigen::VectorXd> lhs_centers(std::size_t m,
                                                const Eigen::VectorXd& lower,
                                                const Eigen::VectorXd& upper,
                                                double lhs_ratio,
                                                std::mt19937_64& eng) {
    if (m < 1) throw std::invalid_argument("lhs_centers: M >= 1");
    const int d = static_cast<int>(lower.size());
    if (upper.size() != d || ((upper - lower).array() < 0.0).any())
        throw std::invalid_argument("lhs_centers: need upper >= lower");
    if (!(lhs_ratio > 0.0)) throw std::invalid_argument("lhs_centers: lhs_ratio > 0");

    std::vector<Eigen::VectorXd> centers(m, Eigen::VectorXd(d));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<std::size_t> perm(m);
    for (int j = 0; j < d; ++j) {
        const double c = 0.5 * (lower[j] + upper[j]);
        const double r = 0.5 * lhs_ratio * (upper[j] - lower[j]);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), eng);
        for (std::size_t k = 0; k < m; ++k) {
            double frac = (static_cast<double>(perm[k]) + u01(eng)) /
                          static_cast<double>(m);
            centers[k][j] = c - r + 2.0 * r * frac;
        }
    }
    return centers;
}

inline std::vector<Eigen::VectorXd> lhs_centers(std::size_t m,
                                                const Eigen::VectorXd& lower,
                                                const Eigen::VectorXd& upper,
                                                double lhs_ratio,
                                                std::uint64_t seed) {
    auto eng = make_engine(seed, stream::kKernels);
    return lhs_centers(m, lower, upper, lhs_ratio, eng);
}

// Largest-remainder apportionment of M across group fractions.
inline std::vector<std::size_t> apportion(std::size_t m,
                                          const std::vector<KernelGroupSpec>& groups) {
    double total = 0.0;
    for (const auto& g : groups) {
        if (!(g.fraction > 0.0 && g.fraction <= 1.0))
            throw std::invalid_argument("KernelGroupSpec: fraction in (0, 1]");
        if (!(g.gamma > 0.0)) throw std::invalid_argument("KernelGroupSpec: gamma > 0");
        if (!(g.lhs_ratio > 0.0))
            throw std::invalid_argument("KernelGroupSpec: lhs_ratio > 0");
        total += g.fraction;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("KernelGroupSpec: fractions must sum to 1");
    std::vector<std::size_t> counts(groups.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        double exact = groups[i].fraction * static_cast<double>(m);
        counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-12));
        assigned += counts[i];
        rema.emplace_back(exact - std::floor(exact + 1e-12), i);
    }
    std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        return a.first > b.first;
    });
    for (std::size_t k = 0; assigned < m; ++k, ++assigned) ++counts[rema[k % rema.size()].second];
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] == 0 && m >= groups.size())
            throw std::invalid_argument("build_kernel_set: group received zero kernels");
    return counts;
}

inline KernelSet build_kernel_set(const SnapshotDataset& ds,
                                  const std::vector<KernelGroupSpec>& groups,
                                  std::size_t m, std::uint64_t seed) {
    if (groups.empty()) throw std::invalid_argument("build_kernel_set: no groups");
    auto [lo, hi] = data_bounds(ds);
    auto counts = apportion(m, groups);
    KernelSet ks;
    ks.seed = seed;
    ks.groups = groups;
    ks.lower = lo;
    ks.upper = hi;
    auto eng = make_engine(seed, stream::kKernels);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        auto centers = lhs_centers(counts[gi], lo, hi, groups[gi].lhs_ratio, eng);
        for (auto& c : centers)
            ks.kernels.emplace_back(std::move(c), groups[gi].gamma);
    }
    return ks;
}

inline nlohmann::json kernel_set_to_json(const KernelSet& ks) {
    nlohmann::json j;
    j["seed"] = ks.seed;
    j["lower"] = std::vector<double>(ks.lower.data(), ks.lower.data() + ks.lower.size());
    j["upper"] = std::vector<double>(ks.upper.data(), ks.upper.data() + ks.upper.size());
    j["groups"] = nlohmann::json::array();
    for (const auto& g : ks.groups)
        j["groups"].push_back({{"gamma", g.gamma},
                               {"fraction", g.fraction},
                               {"lhs_ratio", g.lhs_ratio}});
    j["kernels"] = nlohmann::json::array();
    for (const auto& k : ks.kernels) {
        std::vector<double> c(k.center.data(), k.center.data() + k.center.size());
        j["kernels"].push_back({{"center", c}, {"width", k.width}});
    }
    return j;
}

inline KernelSet kernel_set_from_json(const nlohmann::json& j) {
    KernelSet ks;
    ks.seed = j.at("seed").get<std::uint64_t>();
    auto lo = j.at("lower").get<std::vector<double>>();
    auto hi = j.at("upper").get<std::vector<double>>();
    ks.lower = Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    ks.upper = Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    for (const auto& g : j.at("groups"))
        ks.groups.push_back({g.at("gamma").get<double>(), g.at("fraction").get<double>(),
                             g.at("lhs_ratio").get<double>()});
    for (const auto& k : j.at("kernels")) {
        auto c = k.at("center").get<std::vector<double>>();
        ks.kernels.emplace_back(
            Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())),
            k.at("width").get<double>());
    }
    return ks;
}

inline void save_kernel_set(const KernelSet& ks, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_kernel_set: cannot open " + path);
    f << kernel_set_to_json(ks).dump(2) << "\n";
}

inline KernelSet load_kernel_set(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_kernel_set: cannot open " + path);
    return kernel_set_from_json(nlohmann::json::parse(f));
}

}  // namespace wcr
