#pragma once

// Aggregate snapshot data: L snapshots of d-dimensional samples without
// trajectory linkage, plus the two-file on-disk format (JSON metadata and
// a CSV sample table sharing one stem).

#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wcr/rng.hpp"

namespace wcr {

inline constexpr const char* kGeneratorVersion = "wcr-1";

struct SnapshotDataset {
    int dim = 1;
    std::vector<double> times;            // strictly increasing
    std::vector<Eigen::MatrixXd> snapshots;  // each N_l x dim
    double alpha = 1.5;                   // generation metadata
    std::uint64_t seed = 0;               // generation metadata

    std::size_t num_snapshots() const { return snapshots.size(); }

    void validate() const {
        if (snapshots.size() != times.size())
            throw std::invalid_argument("SnapshotDataset: times/snapshots mismatch");
        for (std::size_t l = 1; l < times.size(); ++l)
            if (!(times[l] > times[l - 1]))
                throw std::invalid_argument("SnapshotDataset: times not increasing");
        for (std::size_t l = 0; l < snapshots.size(); ++l) {
            const auto& s = snapshots[l];
            if (s.rows() == 0)
                throw std::invalid_argument("SnapshotDataset: empty snapshot " +
                                            std::to_string(l));
            if (s.cols() != dim)
                throw std::invalid_argument("SnapshotDataset: dim mismatch");
            if (!s.allFinite())
                throw std::invalid_argument("SnapshotDataset: non-finite sample in snapshot " +
                                            std::to_string(l));
        }
    }

    // Subset of snapshots with t <= t_max (for train/test splits).
    SnapshotDataset restrict_to(double t_max) const {
        SnapshotDataset out;
        out.dim = dim;
        out.alpha = alpha;
        out.seed = seed;
        for (std::size_t l = 0; l < times.size(); ++l) {
            if (times[l] <= t_max + 1e-12) {
                out.times.push_back(times[l]);
                out.snapshots.push_back(snapshots[l]);
            }
        }
        return out;
    }

    const Eigen::MatrixXd* snapshot_at(double t) const {
        for (std::size_t l = 0; l < times.size(); ++l)
            if (std::abs(times[l] - t) < 1e-9) return &snapshots[l];
        return nullptr;
    }
};

struct NoisePerturbation {
    enum class Kind { Additive, Multiplicative };
    Kind kind = Kind::Additive;
    double delta = 0.0;

    void validate() const {
        if (!(delta >= 0.0))
            throw std::invalid_argument("NoisePerturbation: delta >= 0");
    }
};

// Elementwise observation-noise perturbation: x + delta*U or x*(1 + delta*U)
// with U uniform on [-1, 1]. The input is left untouched.
inline SnapshotDataset perturb(const SnapshotDataset& ds, const NoisePerturbation& p,
                               std::uint64_t seed) {
    p.validate();
    SnapshotDataset out = ds;
    if (p.delta == 0.0) return out;
    auto eng = make_engine(seed, stream::kPerturb);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& snap : out.snapshots) {
        for (Eigen::Index r = 0; r < snap.rows(); ++r)
            for (Eigen::Index c = 0; c < snap.cols(); ++c) {
                double du = p.delta * u(eng);
                snap(r, c) = p.kind == NoisePerturbation::Kind::Additive
                                 ? snap(r, c) + du
                                 : snap(r, c) * (1.0 + du);
            }
    }
    return out;
}

namespace detail {
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

// Writes <stem>.json (metadata) and <stem>.csv (samples, grouped by
// snapshot_index ascending, 17 significant digits).
inline void save_dataset(const SnapshotDataset& ds, const std::string& stem) {
    ds.validate();
    nlohmann::json meta;
    meta["dim"] = ds.dim;
    meta["times"] = ds.times;
    std::vector<std::size_t> counts;
    for (const auto& s : ds.snapshots) counts.push_back(static_cast<std::size_t>(s.rows()));
    meta["counts"] = counts;
    meta["alpha"] = ds.alpha;
    meta["seed"] = ds.seed;
    meta["generator_version"] = kGeneratorVersion;
    std::ofstream mf(stem + ".json");
    if (!mf) throw std::runtime_error("save_dataset: cannot open " + stem + ".json");
    mf << meta.dump(2) << "\n";

    std::ofstream cf(stem + ".csv");
    if (!cf) throw std::runtime_error("save_dataset: cannot open " + stem + ".csv");
    cf << "snapshot_index";
    for (int i = 1; i <= ds.dim; ++i) cf << ",x" << i;
    cf << "\n";
    for (std::size_t l = 0; l < ds.snapshots.size(); ++l) {
        const auto& s = ds.snapshots[l];
        for (Eigen::Index r = 0; r < s.rows(); ++r) {
            cf << l;
            for (int c = 0; c < ds.dim; ++c) cf << "," << detail::fmt17(s(r, c));
            cf << "\n";
        }
    }
}

inline SnapshotDataset load_dataset(const std::string& stem) {
    std::ifstream mf(stem + ".json");
    if (!mf) throw std::runtime_error("load_dataset: cannot open " + stem + ".json");
    nlohmann::json meta = nlohmann::json::parse(mf);
    SnapshotDataset ds;
    ds.dim = meta.at("dim").get<int>();
    ds.times = meta.at("times").get<std::vector<double>>();
    ds.alpha = meta.at("alpha").get<double>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    auto counts = meta.at("counts").get<std::vector<std::size_t>>();
    if (counts.size() != ds.times.size())
        throw std::runtime_error("load_dataset: counts/times length mismatch");
    ds.snapshots.reserve(counts.size());
    for (std::size_t c : counts)
        ds.snapshots.emplace_back(Eigen::MatrixXd(c, ds.dim));

    std::ifstream cf(stem + ".csv");
    if (!cf) throw std::runtime_error("load_dataset: cannot open " + stem + ".csv");
    std::string line;
    if (!std::getline(cf, line))
        throw std::runtime_error("load_dataset: empty CSV " + stem + ".csv");
    std::vector<std::size_t> filled(counts.size(), 0);
    while (std::getline(cf, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        auto next_field = [&]() {
            std::size_t comma = line.find(',', pos);
            std::string f = line.substr(pos, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - pos);
            pos = comma == std::string::npos ? line.size() : comma + 1;
            return f;
        };
        std::size_t snap = std::stoull(next_field());
        if (snap >= counts.size())
            throw std::runtime_error("load_dataset: snapshot index out of range");
        if (filled[snap] >= counts[snap])
            throw std::runtime_error("load_dataset: sample count exceeds metadata for snapshot " +
                                     std::to_string(snap));
        for (int c = 0; c < ds.dim; ++c)
            ds.snapshots[snap](static_cast<Eigen::Index>(filled[snap]), c) =
                std::stod(next_field());
        ++filled[snap];
    }
    for (std::size_t l = 0; l < counts.size(); ++l)
        if (filled[l] != counts[l])
            throw std::runtime_error("load_dataset: sample count mismatch for snapshot " +
                                     std::to_string(l));
    ds.validate();
    return ds;
}

}  // namespace wcr
