// resonant.hpp: Analysis at resonant frequencies omega (L/pi)^2 in Q.
//
// The gauge G(t) = diag(e^{i g_n(t)}), g_n(t) = (4g/(L omega)) (-1)^{n+1} sin(omega t),
// removes the oscillating part of the large-n eigenvalues, leaving
//     G (D_t + h) G^{-1} - (D_t + e_n^ref) = O(1/n) delta_nm + e^{i(g_n - g_m)} A_nm,
//     e_n^ref = (n pi / L)^2 + omega / 2 + <W> + 4 g / L.
// The period map then clusters on the points exp(-i e_n^ref T).

#pragma once

#include "ringkam/dynamics.hpp"
#include "ringkam/sieve.hpp"

#include <vector>

namespace ringkam {

VectorXd gauge_phases(const ModelConfig& cfg, double t, int n_bands);

double reference_level(const ModelConfig& cfg, int n);

struct Residual {
    MatrixXcd matrix;
    double hs_norm = 0.0;
};

// Residual at grid time index k.
Residual residual_perturbation(const ModelConfig& cfg, const BandSpectrum& spectrum,
                               const CouplingTensor& coupling, int k, int n_bands = -1);

// sup over the time grid of the Hilbert-Schmidt norm.
double residual_hs_sup(const ModelConfig& cfg, const BandSpectrum& spectrum, const CouplingTensor& coupling,
                       int n_bands = -1);

struct ResonantReport {
    double omega = 0.0;
    long long p = 0;
    long long q = 1;
    VectorXcd predicted_phases;     // exp(-i e_n^ref T)
    VectorXcd computed_phases;      // eigenvalue assigned to band n
    VectorXd distance;              // |arg(computed_n / predicted_n)|
    std::vector<double> decile_centers;
    std::vector<double> decile_median;
    double decay_exponent = 0.0;    // slope of log decile median vs log band
    double residual_scale = 0.0;    // fitted C in |<R_nn>| ~ C / n
    double median_distance = 0.0;   // over bulk bands
    int median_band = 0;
    double hs_norm = 0.0;
    bool pass = false;
    int bulk_lo = 0;
    int bulk_hi = 0;
};

// Throws NotResonant when omega (L/pi)^2 is not detected as rational.
ResonantReport essential_spectrum_check(const ModelConfig& cfg, const BandSpectrum& spectrum,
                                        const CouplingTensor& coupling, const PeriodMap& period_map,
                                        int n_bands);

}  // namespace ringkam
