// model_zoo.hpp: Abstract driven models H(t) = H_0 + W(t) with growing gaps
//     E_{n+1} - E_n = c n^alpha   (labels n >= 1),
// and a seeded random Hermitian perturbation W(t) = sum_{|d| <= H} W_d e^{i d omega t},
// |W_d(n, m)| = g <|n - m|>^{-tau}, W_{-d} = W_d^*.

#pragma once

#include "ringkam/dynamics.hpp"
#include "ringkam/floquet.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ringkam {

struct AbstractModel {
    double alpha = 1.0;
    double c = 2.0;
    double g = 0.02;
    double tau = 3.0;
    std::uint64_t seed = 0;
    int n_harmonics = 1;
    bool out_of_theory = false;   // alpha <= 0: gaps do not grow, exploratory only
    VectorXd energies;            // E_n for n = 1..n_levels stored at index n - 1
    std::vector<MatrixXcd> perturbation;   // W_d for d = 0..n_harmonics

    int n_levels() const noexcept { return static_cast<int>(energies.size()); }
    // Index distance <x> = sqrt(1 + x^2).
    double gap_certificate() const;   // min_n (E_{n+1} - E_n) / n^alpha
    std::function<double(int, double)> energy_model() const;
};

AbstractModel synthesize(double alpha, double c, double g, double tau, std::uint64_t seed, int n_levels,
                         int n_harmonics = 1, double e_offset = 0.0);

// Floquet matrix with entries delta (k1 omega + E_n) delta_{j1 k1} + W_{j1 - k1}(n, m).
FloquetMatrix abstract_floquet_matrix(const AbstractModel& model, double omega, int n_fourier);

DrivenGenerator abstract_generator(const AbstractModel& model, double omega);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit Mersenne twister draw.
double uniform53(std::uint64_t bits) noexcept;

struct SweepRow {
    double alpha = 0.0;
    double omega = 0.0;
    bool sieve_pass = false;
    bool bounded = false;
    double max_energy_ratio = 0.0;   // sup energy / max over the first 10 periods
    bool out_of_theory = false;
};

struct SweepConfig {
    double c = 2.0;
    double tau = 3.0;
    std::uint64_t seed = 1;
    int n_levels = 24;
    int n_periods = 1000;
    int steps_per_period = 0;
    double gamma = 1e-3;
    int initial_level = 0;   // storage index of the initial basis state
    double e_offset = 2.0;   // E_1 > 0 keeps the energy ratio meaningful
};

std::vector<SweepRow> alpha_sweep(const std::vector<double>& alphas, double g,
                                  const std::vector<double>& omega_samples, const SweepConfig& cfg,
                                  int threads = 1);

}  // namespace ringkam
