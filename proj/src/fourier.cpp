#include "ringkam/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>

namespace ringkam {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

// Unnormalized DFT along each row. sign = FFTW_FORWARD (e^{-i}) or FFTW_BACKWARD.
MatrixXcd transform_rows(const MatrixXcd& x, int sign) {
    const int rows = static_cast<int>(x.rows());
    const int n = static_cast<int>(x.cols());
    MatrixXcd out(x.rows(), x.cols());
    if (rows == 0 || n == 0) return out;
    const auto total = static_cast<std::size_t>(rows) * static_cast<std::size_t>(n);
    FftwBuffer in(total), res(total);
    // Column-major storage: a row is a series with stride `rows`, consecutive rows at distance 1.
    std::memcpy(in.data, x.data(), sizeof(fftw_complex) * total);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_many_dft(1, &n, rows, in.data, nullptr, rows, 1, res.data, nullptr, rows, 1,
                                  sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    std::memcpy(out.data(), res.data, sizeof(fftw_complex) * total);
    return out;
}

}  // namespace

int harmonic_of(int column, int n) noexcept { return column <= n / 2 ? column : column - n; }

int column_of(int harmonic, int n) noexcept { return harmonic >= 0 ? harmonic : harmonic + n; }

MatrixXcd fourier_coefficients(const MatrixXcd& rows) {
    MatrixXcd c = transform_rows(rows, FFTW_FORWARD);
    c /= static_cast<double>(rows.cols());
    return c;
}

MatrixXcd from_fourier_coefficients(const MatrixXcd& coeffs) {
    return transform_rows(coeffs, FFTW_BACKWARD);
}

MatrixXcd time_derivative(const MatrixXcd& rows, double omega) {
    const int n = static_cast<int>(rows.cols());
    MatrixXcd c = fourier_coefficients(rows);
    for (int j = 0; j < n; ++j) {
        const int d = harmonic_of(j, n);
        const bool nyquist = (n % 2 == 0) && (j == n / 2);
        c.col(j) *= nyquist ? cplx{0.0, 0.0} : kI * omega * static_cast<double>(d);
    }
    return from_fourier_coefficients(c);
}

cplx evaluate_series(const MatrixXcd& coeffs, Eigen::Index row, double phase) {
    const int n = static_cast<int>(coeffs.cols());
    cplx sum{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
        const int d = harmonic_of(j, n);
        if (n % 2 == 0 && j == n / 2) {
            sum += coeffs(row, j) * std::cos(d * phase);
        } else {
            sum += coeffs(row, j) * std::polar(1.0, d * phase);
        }
    }
    return sum;
}

}  // namespace ringkam
