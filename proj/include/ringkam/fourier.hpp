// fourier.hpp: FFT helpers for periodic time series on the uniform grid t_k = k T / N.
//
// Every routine treats the ROWS of a matrix as independent time series (columns
// are grid times). Coefficients use the expansion f(t) = sum_d c_d e^{i d omega t},
// so c_d = (1/N) sum_k f(t_k) e^{-2 pi i d k / N}; column j of the coefficient
// matrix holds harmonic harmonic_of(j, N).

#pragma once

#include "ringkam/common.hpp"

namespace ringkam {

int harmonic_of(int column, int n) noexcept;
int column_of(int harmonic, int n) noexcept;

MatrixXcd fourier_coefficients(const MatrixXcd& rows);
MatrixXcd from_fourier_coefficients(const MatrixXcd& coeffs);

// Spectral derivative d/dt; the Nyquist harmonic is dropped.
MatrixXcd time_derivative(const MatrixXcd& rows, double omega);

// Trigonometric interpolant of one coefficient row at phase omega t.
// The Nyquist harmonic is split symmetrically so real data stays real.
cplx evaluate_series(const MatrixXcd& coeffs, Eigen::Index row, double phase);

}  // namespace ringkam
