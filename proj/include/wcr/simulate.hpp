#pragma once

// Euler forward simulation of the SDE with Gaussian and symmetric
// alpha-stable increments:
//   X_{l+1} = X_l + m(X_l) dt + sigma(X_l) sqrt(dt) eta + xi(X_l) dt^{1/alpha} zeta.
// Paths are independent; each path owns two RNG substreams (Gaussian and
// stable) derived from (seed, path index), so output does not depend on
// scheduling or thread count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "wcr/dataset.hpp"
#include "wcr/model.hpp"
#include "wcr/rng.hpp"
#include "wcr/stable.hpp"

namespace wcr {

struct GaussianInit {
    double mean = 0.0;
    double var = 0.2;
};

struct SimulateOptions {
    std::size_t n_paths = 10000;
    double dt_sim = 1e-3;
    std::vector<double> obs_times;  // absolute times, >= t0
    GaussianInit init;
    // When set, paths start from these states at t0 (one row per path) and
    // the Gaussian init is ignored.
    std::optional<Eigen::MatrixXd> init_states;
    double t0 = 0.0;
    StableSamplerConfig sampler;  // sampler.seed unused; the simulate seed rules
    std::uint64_t seed = 0;
    int threads = 1;
    double blowup_bound = 1e6;
};

namespace detail {

struct PathTask {
    const SdeModel* model;
    const SimulateOptions* opt;
    std::vector<std::size_t> obs_steps;
    std::size_t n_steps;
};

// Simulates one path, writing its row into each snapshot matrix.
inline void run_path(const PathTask& task, std::size_t path,
                     std::vector<Eigen::MatrixXd>& snapshots,
                     std::string& error, std::mutex& error_mu) {
    const auto& model = *task.model;
    const auto& opt = *task.opt;
    auto gauss_eng = make_engine(opt.seed, stream::kGaussian, path);
    auto stable_eng = make_engine(opt.seed, stream::kStable, path);
    auto init_eng = make_engine(opt.seed, stream::kInit, path);
    std::normal_distribution<double> normal(0.0, 1.0);

    const int d = model.dim;
    Eigen::VectorXd x(d);
    if (opt.init_states) {
        x = opt.init_states->row(static_cast<Eigen::Index>(path)).transpose();
    } else {
        const double init_std = std::sqrt(opt.init.var);
        for (int i = 0; i < d; ++i) x[i] = opt.init.mean + init_std * normal(init_eng);
    }

    const double dt = opt.dt_sim;
    const double sq_dt = std::sqrt(dt);
    const double levy_dt = std::pow(dt, 1.0 / model.alpha);
    std::size_t next_obs = 0;

    auto record = [&](std::size_t step) {
        while (next_obs < task.obs_steps.size() && task.obs_steps[next_obs] == step) {
            snapshots[next_obs].row(static_cast<Eigen::Index>(path)) = x.transpose();
            ++next_obs;
        }
    };

    record(0);
    for (std::size_t step = 0; step < task.n_steps; ++step) {
        Eigen::VectorXd m = model.drift_at(x);
        Eigen::VectorXd xn = x + dt * m;
        for (int i = 0; i < d; ++i) {
            double eta = normal(gauss_eng);
            double zeta = draw_standard_stable(opt.sampler, stable_eng);
            xn[i] += model.diffusion.sigma_at(x, i) * sq_dt * eta +
                     model.levy.xi_at(x, i, model.alpha) * levy_dt * zeta;
        }
        x = xn;
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(x[i]) || std::abs(x[i]) > opt.blowup_bound) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (error.empty())
                    error = "simulate: state blow-up on path " + std::to_string(path) +
                            " at t = " + std::to_string((step + 1) * dt) +
                            " (coordinate " + std::to_string(i + 1) + ")";
                return;
            }
        }
        record(step + 1);
    }
}

}  // namespace detail

inline SnapshotDataset simulate(const SdeModel& model, const SimulateOptions& opt) {
    model.validate();
    opt.sampler.validate();
    SimulateOptions local = opt;
    if (local.init_states) {
        if (local.init_states->cols() != model.dim)
            throw std::invalid_argument("simulate: init state dimension mismatch");
        local.n_paths = static_cast<std::size_t>(local.init_states->rows());
    }
    const SimulateOptions& o = local;
    if (o.n_paths < 1) throw std::invalid_argument("simulate: n_paths >= 1");
    if (!(o.dt_sim > 0.0)) throw std::invalid_argument("simulate: dt_sim > 0");
    if (!o.init_states && !(o.init.var > 0.0))
        throw std::invalid_argument("simulate: init var > 0");
    if (o.obs_times.empty()) throw std::invalid_argument("simulate: no obs_times");
    if (std::abs(o.sampler.alpha - model.alpha) > 1e-12)
        throw std::invalid_argument("simulate: sampler alpha != model alpha");

    detail::PathTask task;
    task.model = &model;
    task.opt = &o;
    for (double t : o.obs_times) {
        if (t < o.t0 - 1e-12)
            throw std::invalid_argument("simulate: obs time before t0");
        double steps = (t - o.t0) / o.dt_sim;
        auto idx = static_cast<std::size_t>(std::llround(steps));
        if (std::abs(steps - static_cast<double>(idx)) > 1e-6)
            throw std::invalid_argument("simulate: obs time " + std::to_string(t) +
                                        " is not a grid node of dt_sim");
        task.obs_steps.push_back(idx);
    }
    for (std::size_t l = 1; l < task.obs_steps.size(); ++l)
        if (task.obs_steps[l] <= task.obs_steps[l - 1])
            throw std::invalid_argument("simulate: obs_times must be strictly increasing");
    task.n_steps = task.obs_steps.back();

    std::vector<Eigen::MatrixXd> snapshots(
        o.obs_times.size(),
        Eigen::MatrixXd(static_cast<Eigen::Index>(o.n_paths), model.dim));

    std::string error;
    std::mutex error_mu;
    const int n_threads = std::max(1, o.threads);
    if (n_threads == 1) {
        for (std::size_t p = 0; p < o.n_paths && error.empty(); ++p)
            detail::run_path(task, p, snapshots, error, error_mu);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    std::size_t p = next.fetch_add(1);
                    if (p >= o.n_paths) return;
                    {
                        std::lock_guard<std::mutex> lk(error_mu);
                        if (!error.empty()) return;
                    }
                    detail::run_path(task, p, snapshots, error, error_mu);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    if (!error.empty()) throw std::runtime_error(error);

    SnapshotDataset ds;
    ds.dim = model.dim;
    ds.times = o.obs_times;
    ds.snapshots = std::move(snapshots);
    ds.alpha = model.alpha;
    ds.seed = o.seed;
    ds.validate();
    return ds;
}

}  // namespace wcr
