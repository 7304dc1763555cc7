// dynamics.hpp: Propagation of i dc/dt = h(t) c for a T-periodic Hermitian
// generator given by its Fourier series.
//
// For the cell problem c holds the coefficients in the moving eigenbasis psi_n(t)
// and h = diag(E_n(t)) + A(t). The integrator is the exponential midpoint rule
//     c <- exp(-i h(t_s + dt/2) dt) c
// with no renormalization; the norm defect is reported instead.

#pragma once

#include "ringkam/cell_spectrum.hpp"
#include "ringkam/kam.hpp"

#include <vector>

namespace ringkam {

struct DrivenGenerator {
    double omega = 1.0;
    int dim = 0;
    // h(t) = sum_i h_hat[i] e^{i harmonics[i] omega t}; a Nyquist harmonic enters as cos.
    std::vector<int> harmonics;
    std::vector<MatrixXcd> h_hat;
    std::vector<bool> nyquist;
    // Diagonal reference energies E_n(t) as Fourier rows (dim x n_coeff, columns by harmonic_of).
    MatrixXcd energy_hat;
    // true: energy = sum_n E_n(t) |c_n|^2 (moving eigenbasis);
    // false: energy = <c, h(t) c> (fixed basis of an abstract model).
    bool energy_is_diagonal = true;

    double period() const noexcept;
    MatrixXcd at(double t) const;
    VectorXd energies_at(double t) const;
};

// Generator on the lowest n_bands bands of a computed spectrum.
DrivenGenerator moving_basis_generator(const BandSpectrum& spectrum, const CouplingTensor& coupling,
                                       int n_bands = -1);

struct EvolutionConfig {
    int n_periods = 10;
    int steps_per_period = 0;          // 0 selects max(8 dim, 256)
    VectorXcd initial_state;           // normalized to 1e-12
    std::vector<double> tail_thresholds;
    int record_every = 1;              // record every this many steps
    double tol_unitary = 1e-8;

    int steps(int dim) const noexcept;
};

struct EnergyTrace {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<std::vector<double>> tails;   // tails[r][sample] = |chi(E > r) c|
    std::vector<double> unitarity_defect;     // |‖c‖ - 1|
    VectorXcd final_state;
    std::vector<VectorXcd> states;            // recorded when keep_states is set

    double max_energy(double t_lo, double t_hi) const;
};

// Throws UnitarityLoss if the norm defect exceeds tol_unitary.
EnergyTrace propagate(const EvolutionConfig& ecfg, const DrivenGenerator& gen, bool keep_states = false);

// Step propagators exp(-i h(t_mid) dt) for one period.
std::vector<MatrixXcd> step_propagators(const DrivenGenerator& gen, int steps_per_period);

struct PeriodMap {
    MatrixXcd monodromy;      // u(T, 0)
    VectorXcd eigenvalues;    // unit modulus up to the unitarity defect
    MatrixXcd eigenvectors;
    double unitarity_defect = 0.0;
};

PeriodMap floquet_eigenphases(const DrivenGenerator& gen, int steps_per_period, double tol_unitary = 1e-8);

// u(t, 0) = U_p(t) e^{-i G t} U_p(0)^{-1} from a converged KAM run.
struct FloquetDecomposition {
    double omega = 0.0;
    int n_bands = 0;
    VectorXd quasi_energies;           // e_m^inf for the (0, m) eigenvectors
    VectorXd mean_energies;            // <E_m> when built from a cell spectrum
    std::vector<double> sample_times;
    std::vector<MatrixXcd> Up;         // U_p(t_k) in moving-basis coordinates
    double toeplitz_defect = 0.0;
    double periodicity_defect = 0.0;   // |U_p(T) - U_p(0)|_max

    MatrixXcd Up_at(double t) const;
    MatrixXcd propagator(double t) const;

    // Fourier block of the (0, m) eigenvectors: coeffs[j1 + n_fourier](j2, m).
    int n_fourier = 0;
    std::vector<MatrixXcd> coeffs;
};

// Uses the n_bands lowest bands and the Fourier band |j1| <= n_fourier_inner of
// the KAM layout for the Toeplitz check. Throws FiberingDefect above 1e-5.
FloquetDecomposition build_floquet_decomposition(const KamReport& kam, int n_fourier_inner, int n_bands,
                                                 double omega, int n_samples);

}  // namespace ringkam
