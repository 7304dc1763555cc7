// floquet.hpp: Matrix representation of K = D_t + H(t) in the basis
// phi_j(t, x) = e^{i omega t j1} psi_{j2}(t, x) / sqrt(T).
//
//     M_{(j1,n),(k1,m)} = delta_nm (k1 omega delta_{j1 k1} + E_n^(j1-k1)) + A_nm^(j1-k1)
//
// where f^(d) = (1/T) int_0^T e^{-i d omega t} f(t) dt. Entries depend on j1 - k1
// only (Toeplitz in the Fourier index) apart from the k1 omega diagonal.

#pragma once

#include "ringkam/cell_spectrum.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace ringkam {

// Guard band added on both truncation axes before the inner block is analyzed.
inline constexpr int kGuard = 4;

// Flattening idx = (j1 + n_fourier) * n_bands + j2, j1 in [-n_fourier, n_fourier].
struct FloquetLayout {
    int n_fourier = 0;
    int n_bands = 0;

    int dim() const noexcept { return (2 * n_fourier + 1) * n_bands; }
    int index(int j1, int j2) const noexcept { return (j1 + n_fourier) * n_bands + j2; }
    int j1(int idx) const noexcept { return idx / n_bands - n_fourier; }
    int j2(int idx) const noexcept { return idx % n_bands; }
    // l1 distance |j1 - k1| + |j2 - k2|.
    int distance(int a, int b) const noexcept;
    int max_distance() const noexcept { return 4 * n_fourier + n_bands - 1; }
};

struct FloquetMatrix {
    FloquetLayout layout;
    MatrixXcd entries;
    double omega = 0.0;
    double g = 0.0;
    VectorXd diag_model;               // omega j1 + <E_j2>
    double hermiticity_defect = 0.0;   // max |M - M^*| before symmetrization
    double symmetrization_correction = 0.0;

    int dim() const noexcept { return layout.dim(); }
};

// Builds M from FFT coefficients of the sampled E_n(t_k) and A(t_k) using the
// first n_bands bands (all bands if n_bands < 0). Throws AliasError if
// n_time < 4 n_fourier.
FloquetMatrix assemble(const BandSpectrum& spectrum, const CouplingTensor& coupling, int n_fourier,
                       int n_bands = -1);

// Sub-block with |j1| <= n_fourier and j2 < n_bands.
FloquetMatrix inner_block(const FloquetMatrix& M, int n_fourier, int n_bands);
std::vector<int> inner_indices(const FloquetLayout& outer, const FloquetLayout& inner);

struct DecayProfile {
    std::vector<double> sup;   // sup[d] = max |M_ij| over l1 distance d
    double exponent = 0.0;     // least-squares slope of log sup vs log d over d >= 1
};

DecayProfile decay_profile(const MatrixXcd& M, const FloquetLayout& layout);
inline DecayProfile decay_profile(const FloquetMatrix& M) { return decay_profile(M.entries, M.layout); }

// Least-squares slope of log y against log x over the positive entries.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Off-diagonal part.
MatrixXcd off_diagonal(const MatrixXcd& M);

// sum_d e^{|d| r} <|d|>^delta sup_{i - j = d} |M_ij| over index differences d in Z^2,
// <x> = sqrt(1 + x^2). With a second matrix at another frequency the
// Lipschitz seminorm sum_d (weight) sup |M1 - M2| / |omega1 - omega2| is added.
// Throws Overflow if the weighted sum is not finite.
struct FrequencyPair {
    const MatrixXcd* other = nullptr;
    double omega_step = 0.0;
};
double finite_norm(const MatrixXcd& M, const FloquetLayout& layout, double r, double delta,
                   std::optional<FrequencyPair> lipschitz = std::nullopt);

// Brute-force oracle: trapezoid quadrature of the defining integral on a finer
// time grid (spectrum and coupling sampled at that resolution).
MatrixXcd assemble_by_quadrature(const BandSpectrum& fine_spectrum, const CouplingTensor& fine_coupling,
                                 const FloquetLayout& layout);

// Rows "i,j,re,im" with a header line.
void write_csv(std::ostream& out, const MatrixXcd& M);

}  // namespace ringkam
