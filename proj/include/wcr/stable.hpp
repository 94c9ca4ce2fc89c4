#pragma once

// Symmetric alpha-stable random variate generation, S_alpha(1, 0, 0):
//   V ~ U(-pi/2, pi/2),  W = -ln S with S ~ U(0,1),
//   X = sin(alpha V)/cos(V)^{1/alpha} * (cos(V - alpha V)/W)^{(1-alpha)/alpha}.
// Optional bounding keeps V away from +-pi/2 or hard-clips the result.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "wcr/rng.hpp"
#include "wcr/specfun.hpp"

namespace wcr {

enum class BoundingMode { None, VPerturbation, Clip };

struct StableSamplerConfig {
    double alpha = 1.5;
    BoundingMode bounding = BoundingMode::None;
    double eps = 1e-3;     // V-perturbation margin, must be < pi/2
    double clip_radius = 10.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!FracLaplacianSpec::valid_alpha(alpha))
            throw std::invalid_argument(
                "StableSamplerConfig: alpha must lie in (0,1) U (1,2)");
        if (bounding == BoundingMode::VPerturbation && !(eps > 0.0 && eps < M_PI / 2))
            throw std::invalid_argument("StableSamplerConfig: eps in (0, pi/2)");
        if (bounding == BoundingMode::Clip && !(clip_radius > 0.0))
            throw std::invalid_argument("StableSamplerConfig: clip radius > 0");
    }
};

// One draw using the supplied engine; cfg.seed is ignored here.
inline double draw_standard_stable(const StableSamplerConfig& cfg,
                                   std::mt19937_64& eng) {
    const double a = cfg.alpha;
    double vmax = M_PI / 2;
    if (cfg.bounding == BoundingMode::VPerturbation) vmax -= cfg.eps;
    std::uniform_real_distribution<double> uv(-vmax, vmax);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    const double v = uv(eng);
    double s = us(eng);
    while (s <= 0.0) s = us(eng);
    const double w = -std::log(s);
    double x = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
               std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
    if (cfg.bounding == BoundingMode::Clip) {
        if (x > cfg.clip_radius) x = cfg.clip_radius;
        if (x < -cfg.clip_radius) x = -cfg.clip_radius;
    }
    return x;
}

inline std::vector<double> sample_standard_stable(const StableSamplerConfig& cfg,
                                                  std::size_t n) {
    cfg.validate();
    if (n < 1) throw std::invalid_argument("sample_standard_stable: n >= 1");
    auto eng = make_engine(cfg.seed, stream::kStable);
    std::vector<double> out(n);
    for (auto& x : out) x = draw_standard_stable(cfg, eng);
    return out;
}

}  // namespace wcr
