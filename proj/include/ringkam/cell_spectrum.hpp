// cell_spectrum.hpp: Eigenproblem of the cell Hamiltonian H(t, omega, g).
//
// Eigenvalues are the zeros of a real secular function built from the two
// fundamental solutions u (u(0)=1, u'(0)=0) and v (v(0)=0, v'(0)=1) of
//     -psi'' + ((omega / L) x + W(x)) psi = E psi.
// Writing psi = a u + b v and imposing both boundary conditions gives a 2x2
// system whose determinant is e^{i omega t} times
//     F(E, t) = u'(L) + g (u(L) + v'(L) - 2 cos(omega t)),
// using the Wronskian u v' - u' v = 1. The fundamental solutions do not depend
// on t; only the cosine term does.

#pragma once

#include "ringkam/common.hpp"
#include "ringkam/model.hpp"

#include <span>
#include <vector>

namespace ringkam {

// Fundamental solutions and derivatives at x = L.
struct EndValues {
    double u = 0.0;
    double du = 0.0;
    double v = 0.0;
    double dv = 0.0;
};

// Adaptive Runge-Kutta-Fehlberg 7(8) shooting across the cell. The state is
// rescaled with kappa = sqrt(max(|E|, 1)) as (u, u'/kappa, kappa v, v') so all
// components stay O(1) at high energies.
class CellShooter {
public:
    explicit CellShooter(const ModelConfig& cfg, double rtol = 1e-10, double atol = 1e-12);

    EndValues shoot(double E) const;

    // Neumann Pruefer angle theta(L; E) with u = rho cos(theta), u'/kappa = -rho sin(theta).
    // The n-th Neumann eigenvalue (n >= 0) solves theta(L; E) = n pi.
    double pruefer_angle(double E) const;

    // Samples u and v at the sorted nodes in (0, L].
    void sample(double E, std::span<const double> nodes, std::vector<double>& u,
                std::vector<double>& v) const;

    const ModelConfig& config() const noexcept { return cfg_; }

private:
    ModelConfig cfg_;
    double rtol_;
    double atol_;
};

struct SecularContext {
    double phase = 0.0;  // omega t
    double g = 0.0;
    const CellShooter* shooter = nullptr;
};

SecularContext make_secular_context(const CellShooter& shooter, double phase);

// Real secular function whose zeros are the eigenvalues of H(t).
double secular_value(const SecularContext& ctx, double E);

// Four-term large-n model (n pi / L)^2 + omega/2 + <W> + (4g/L)(1 - (-1)^n cos(omega t)).
double asymptotic_model(const ModelConfig& cfg, int n, double t);

struct BandSpectrum {
    int n_bands = 0;
    int n_time = 0;
    double omega = 0.0;
    double g = 0.0;
    double period = 0.0;
    MatrixXd energies;             // (n_bands, n_time): E_n(t_k)
    VectorXd reference_energies;   // g = 0 eigenvalues E_n^0 (time independent)
    MatrixXcd traces0;             // psi_n(t_k; 0), filled by phase fixing
    MatrixXcd tracesL;             // psi_n(t_k; L)
    MatrixXd norm_data;            // |<psi_n^0, psi_n(t_k)>| of the normalized eigenfunction

    double time(int k) const noexcept { return period * k / n_time; }
    double energy(int n, int k) const { return energies(n, k); }
    // Time average <E_n> over the grid.
    double mean_energy(int n) const { return energies.row(n).mean(); }
};

// Eigenvalues of the decoupled (g = 0) cell, located by Pruefer-angle bisection.
VectorXd reference_energies(const CellShooter& shooter, int n_bands, double tol);

// E_n(t_k) for every band and grid time. One bracket per band, centered at
// E_n^0 + 4g/L with half-width min(gap/3, 1), serves every grid time.
BandSpectrum solve_band_spectrum(const ModelConfig& cfg, int threads = default_threads());

// Eigenfunction samples on a composite Gauss-Legendre grid over (0, L).
struct EigenfunctionStore {
    VectorXd nodes;
    VectorXd weights;
    MatrixXd reference;               // (n_nodes, n_bands): psi_n^0, real and normalized
    std::vector<MatrixXcd> samples;   // per band: (n_nodes, n_time) phase-fixed psi_n(t_k)

    cplx inner(int n, int kn, int m, int km) const;  // <psi_n(t_kn), psi_m(t_km)>
};

struct PhaseFixedBasis {
    BandSpectrum spectrum;  // traces populated
    EigenfunctionStore functions;
};

// Composite Gauss-Legendre nodes and weights with `panels` panels on (0, L).
void gauss_legendre_grid(double L, int panels, int order, VectorXd& nodes, VectorXd& weights);

// psi_n(t) = P_n(t) psi_n^0 / |P_n(t) psi_n^0|. Throws DegenerateProjection if the
// projection norm drops below 0.5.
PhaseFixedBasis phase_fixed_eigenbasis(const ModelConfig& cfg, const BandSpectrum& spectrum,
                                       int threads = default_threads());

struct CouplingTensor {
    int n_bands = 0;
    int n_time = 0;
    std::vector<MatrixXcd> A;   // per grid time: A(n, m) = <psi_n, D_t psi_m>(t_k)
    double symmetrization_defect = 0.0;  // max |A - A^*| before symmetrization

    cplx operator()(int n, int m, int k) const { return A[static_cast<std::size_t>(k)](n, m); }
};

// Off-diagonal entries from the boundary traces,
//     A_nm = omega g [e^{-i omega t} conj(psi_n(L)) psi_m(0) - e^{i omega t} conj(psi_n(0)) psi_m(L)] / (E_m - E_n),
// diagonal entries by FFT differentiation in t of the stored eigenfunctions.
CouplingTensor coupling_matrix(const ModelConfig& cfg, const PhaseFixedBasis& basis);

// Direct route: FFT time-derivative of the stored eigenfunctions for every pair.
CouplingTensor coupling_by_time_derivative(const ModelConfig& cfg, const PhaseFixedBasis& basis);

struct GapReport {
    double min_ratio = 0.0;   // min over n, k of (E_{n+1} - E_n) / (n + 1)
    int argmin_band = 0;
    int argmin_time = 0;
    bool pass = false;
};

GapReport verify_gap_growth(const BandSpectrum& spectrum, double tol_eig);

}  // namespace ringkam
