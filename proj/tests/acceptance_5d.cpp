// Acceptance criterion 8 (slow): 5d independent system, 30,000 samples,
// M = 600 kernels; MRE <= 0.25 and runtime <= 20 minutes.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <string>

#include "wcr/config.hpp"

TEST_CASE("criterion 8: 5d independent system", "[acceptance][slow]") {
    const auto t0 = std::chrono::steady_clock::now();
    auto cfg = wcr::load_experiment(std::string(WCR_SOURCE_DIR) +
                                    "/presets/paper-5d-ind.json");
    auto data = wcr::generate_data(cfg);
    auto report = wcr::run_fit(cfg, data);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    REQUIRE(report.mre.has_value());
    const bool ok = report.mre->total <= 0.25 && seconds <= 1200.0;
    std::printf("%s criterion 8: 5d independent: MRE %f <= 0.25, %.0f s <= 1200 s\n",
                ok ? "PASS" : "FAIL", report.mre->total, seconds);
    std::fflush(stdout);
    CHECK(report.mre->total <= 0.25);
    CHECK(seconds <= 1200.0);
}
