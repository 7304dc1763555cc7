#include "fixtures.hpp"

namespace ringkam::testing {

Pipeline run_pipeline(const ModelConfig& cfg) {
    auto spectrum = solve_band_spectrum(cfg, 1);
    auto basis = phase_fixed_eigenbasis(cfg, spectrum, 1);
    auto coupling = coupling_matrix(cfg, basis);
    return {cfg, std::move(basis), std::move(coupling)};
}

ModelConfig ring_config(double omega, double g, int n_bands, int n_time) {
    ModelConfig cfg;
    cfg.omega = omega;
    cfg.g = g;
    cfg.n_bands = n_bands;
    cfg.n_time = n_time;
    return cfg;
}

SieveConfig surrogate_sieve(const ModelConfig& cfg, double gamma) {
    SieveConfig s;
    s.gamma = gamma;
    s.energy = surrogate_energy(cfg);
    return s;
}

}  // namespace ringkam::testing
