#include "fixtures.hpp"

#include "ringkam/resonant.hpp"

#include <doctest.h>

#include <cmath>

using namespace ringkam;
using ringkam::testing::ring_config;
using ringkam::testing::run_pipeline;

TEST_CASE("gauge phases") {
    const ModelConfig cfg = ring_config(2.0, 0.1, 8, 16);
    const double T = cfg.period();
    CHECK(gauge_phases(cfg, 0.0, 8).cwiseAbs().maxCoeff() == 0.0);
    CHECK(gauge_phases(cfg, T, 8).cwiseAbs().maxCoeff() < 1e-15);
    const VectorXd q = gauge_phases(cfg, T / 4.0, 8);
    for (int n = 0; n < 8; ++n) CHECK(q(n) == doctest::Approx((n % 2 == 0 ? -0.2 : 0.2) / kPi).epsilon(1e-14));
}

TEST_CASE("reference levels") {
    ModelConfig cfg = ring_config(2.0, 0.05, 8, 16);
    cfg.W.cos_coeffs = {0.25};
    CHECK(reference_level(cfg, 3) == doctest::Approx(9.0 + 1.0 + 0.25 + 0.2 / kPi));
}

TEST_CASE("residual off-diagonal part is the gauged coupling") {
    const ModelConfig cfg = ring_config(2.0, 0.05, 12, 32);
    const auto p = run_pipeline(cfg);
    for (int k : {0, 5, 13}) {
        const auto r = residual_perturbation(cfg, p.spectrum(), p.coupling, k);
        const VectorXd q = gauge_phases(cfg, cfg.time(k), 12);
        for (int n = 0; n < 12; ++n)
            for (int m = 0; m < 12; ++m)
                if (n != m)
                    CHECK(std::abs(r.matrix(n, m) - std::exp(kI * (q(n) - q(m))) * p.coupling(n, m, k)) < 1e-12);
        CHECK(r.hs_norm == doctest::Approx(r.matrix.norm()));
    }
}

TEST_CASE("decoupled slow drive leaves an O(1/n) diagonal") {
    const ModelConfig cfg = ring_config(1e-3, 0.0, 20, 8);
    const auto p = run_pipeline(cfg);
    const auto r = residual_perturbation(cfg, p.spectrum(), p.coupling, 3);
    CHECK(off_diagonal(r.matrix).cwiseAbs().maxCoeff() == 0.0);
    for (int n = 1; n < 20; ++n) CHECK(std::abs(r.matrix(n, n)) * n < 1e-3);
}

TEST_CASE("non-rational frequency is rejected") {
    const ModelConfig cfg = ring_config(std::sqrt(2.0), 0.05, 8, 16);
    const auto p = run_pipeline(cfg);
    const auto gen = moving_basis_generator(p.spectrum(), p.coupling);
    const auto pm = floquet_eigenphases(gen, 128);
    try {
        essential_spectrum_check(cfg, p.spectrum(), p.coupling, pm, 8);
        FAIL("expected NotResonant");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotResonant);
    }
}

TEST_CASE("eigenphases cluster on the predicted points at a rational frequency") {
    const ModelConfig cfg = ring_config(2.0, 0.05, 24, 64);
    const auto p = run_pipeline(cfg);
    const auto gen = moving_basis_generator(p.spectrum(), p.coupling);
    const auto pm = floquet_eigenphases(gen, 384);
    const auto rep = essential_spectrum_check(cfg, p.spectrum(), p.coupling, pm, 24);
    CHECK(rep.p == 2);
    CHECK(rep.q == 1);
    CHECK(rep.pass);
    CHECK(rep.decay_exponent < -0.5);
    CHECK(rep.decile_median.front() > rep.decile_median.back());
    CHECK(rep.hs_norm > 0.0);
}
