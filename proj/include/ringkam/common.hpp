// common.hpp: Shared numeric types, error kinds and a small deterministic parallel_for.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ringkam {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// ------------------------------------------------------------------ errors

enum class ErrorKind {
    Integrator,
    BracketCollision,
    RootNotFound,
    DegenerateProjection,
    GapTooSmall,
    AliasError,
    Overflow,
    AllResonant,
    SeriesDivergence,
    NotConverged,
    Resonant,
    UnitarityLoss,
    FiberingDefect,
    NotResonant,
    AmbiguousNearRational,
    Parse,
    Validation,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Analysis failures map to exit code 2 in the CLI, everything else to 1.
bool is_analysis_failure(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Small-divisor witness: k = j1 - k1 (Fourier distance), n and m are the band
// labels of the row and column entry, divisor = M_ii - M_jj.
struct ResonanceWitness {
    int k = 0;
    int n = 0;
    int m = 0;
    double divisor = 0.0;
};

class ResonanceError : public Error {
public:
    ResonanceError(ErrorKind kind, const std::string& message, ResonanceWitness witness)
        : Error(kind, message), witness_(witness) {}
    const ResonanceWitness& witness() const noexcept { return witness_; }

private:
    ResonanceWitness witness_;
};

// ------------------------------------------------------------- parallelism

// Runs fn(i) for i in [0, n). Each index must write only its own output slot,
// so results do not depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Process-wide default used by modules that parallelize internally.
int default_threads() noexcept;
void set_default_threads(int threads) noexcept;

}  // namespace ringkam
