// model.hpp: Physical and numerical parameters of the driven ring cell.
//
// The cell Hamiltonian on (0, L) is
//     H(t) = -d^2/dx^2 + (omega / L) x + W(x)
// with the twisted point-interaction boundary conditions
//     e^{i omega t} psi'(L) - psi'(0) = 0,
//     g (e^{i omega t} psi(L) - psi(0)) = -psi'(0),
// which is periodic in t with period T = 2 pi / omega. g = 0 decouples the
// cell into the Neumann problem.

#pragma once

#include "ringkam/common.hpp"

#include <vector>

namespace ringkam {

// Smooth L-periodic background W(x) = a_0 + sum_j a_j cos(2 pi j x / L) + b_j sin(2 pi j x / L).
struct FourierPotential {
    std::vector<double> cos_coeffs;  // a_0, a_1, ...
    std::vector<double> sin_coeffs;  // b_1, b_2, ...

    double operator()(double x, double L) const noexcept;
    // Cell average; every non-constant harmonic integrates to zero.
    double mean() const noexcept { return cos_coeffs.empty() ? 0.0 : cos_coeffs.front(); }
    bool is_zero() const noexcept;
};

struct ModelConfig {
    double L = kPi;
    double omega = 1.0;
    double g = 0.05;
    FourierPotential W;
    int n_bands = 32;
    int n_time = 256;
    double tol_eig = 1e-11;
    double tol_unitary = 1e-8;

    double period() const noexcept { return 2.0 * kPi / omega; }
    // omega t_k, computed from k directly so that omega * T == 2 pi exactly on the grid.
    double phase(int k) const noexcept { return 2.0 * kPi * static_cast<double>(k) / n_time; }
    double time(int k) const noexcept { return period() * static_cast<double>(k) / n_time; }
    // Full cell potential (omega / L) x + W(x).
    double potential(double x) const noexcept { return omega / L * x + W(x, L); }

    // Throws Error(Validation) naming the violated invariant.
    void validate() const;
};

}  // namespace ringkam
