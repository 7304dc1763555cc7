// sieve.hpp: Diophantine exclusion of resonant driving frequencies.
//
// A frequency is excluded at level l when
//     |omega k + e_m(omega) - e_n(omega)| < gamma_l (k + n - m)^{-sigma},   gamma_l = gamma / l^mu,
// for some 1 <= k <= k_max, 0 <= m < n <= n_max. The left side is increasing in
// omega (slope >= k - |||e||| > 0), so each triple excludes one interval.

#pragma once

#include "ringkam/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ringkam {

struct SieveConfig {
    double omega_lo = 0.7;
    double omega_hi = 1.4;
    double gamma = 1e-3;
    double sigma = 3.0;
    double mu = 2.0;
    int levels = 1;
    int n_max = 20;
    int k_max = -1;   // < 0 selects n_max^2
    // e_n(omega); n >= 0.
    std::function<double(int, double)> energy;

    int effective_k_max() const noexcept { return k_max < 0 ? n_max * n_max : k_max; }
    void validate() const;
};

// e_n(omega) = (n pi / L)^2 + omega / 2 + <W> + 4 g / L with the cell data of cfg.
std::function<double(int, double)> surrogate_energy(const ModelConfig& cfg);

struct SieveInterval {
    double lo = 0.0;
    double hi = 0.0;
    int k = 0;
    int m = 0;
    int n = 0;
    int level = 1;

    double length() const noexcept { return hi - lo; }
};

struct SieveReport {
    std::vector<SieveInterval> excluded_intervals;   // union over levels, disjoint and sorted
    double total_measure = 0.0;
    std::vector<double> level_measure;               // measure of the level-l excluded set
    bool truncation_warning = false;
    std::vector<std::string> warnings;
};

SieveReport resonance_intervals(const SieveConfig& cfg);

struct NonresonanceVerdict {
    bool pass = true;
    std::optional<SieveInterval> witness;
    bool truncation_warning = false;
};

NonresonanceVerdict is_nonresonant(double omega, const SieveConfig& cfg);
NonresonanceVerdict is_nonresonant(double omega, const SieveReport& report);

// Largest |Delta (e_n - e_m) / Delta omega| over pairs n, m <= n_max on `samples` grid points.
double energy_lipschitz(const SieveConfig& cfg, int samples);

struct RationalClass {
    bool resonant = false;
    long long p = 0;
    long long q = 1;
    double x = 0.0;   // omega (L / pi)^2
};

// Resonant iff omega (L / pi)^2 = p / q with q <= 1e6 up to 1e-12. Throws
// AmbiguousNearRational if the next continued-fraction convergent also matches.
RationalClass classify_rational(double omega, double L);

}  // namespace ringkam
