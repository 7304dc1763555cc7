// fixtures.hpp: Shared configurations and pipelines for the tests.

#pragma once

#include "ringkam/cell_spectrum.hpp"
#include "ringkam/sieve.hpp"

namespace ringkam::testing {

// 0.7 + 0.7 (sqrt 5 - 1) / 2: passes the surrogate sieve on [0.7, 1.4] for gamma <= 1e-2.
inline constexpr double kGoodOmega = 1.1326237921249263;

struct Pipeline {
    ModelConfig cfg;
    PhaseFixedBasis basis;
    CouplingTensor coupling;

    const BandSpectrum& spectrum() const { return basis.spectrum; }
};

Pipeline run_pipeline(const ModelConfig& cfg);

ModelConfig ring_config(double omega, double g, int n_bands, int n_time);

SieveConfig surrogate_sieve(const ModelConfig& cfg, double gamma);

}  // namespace ringkam::testing
