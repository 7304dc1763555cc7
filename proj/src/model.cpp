#include "ringkam/model.hpp"

#include <cmath>
#include <string>

namespace ringkam {

double FourierPotential::operator()(double x, double L) const noexcept {
    double w = mean();
    const double base = 2.0 * kPi * x / L;
    for (std::size_t j = 1; j < cos_coeffs.size(); ++j) w += cos_coeffs[j] * std::cos(base * j);
    for (std::size_t j = 0; j < sin_coeffs.size(); ++j) w += sin_coeffs[j] * std::sin(base * (j + 1));
    return w;
}

bool FourierPotential::is_zero() const noexcept {
    for (double a : cos_coeffs)
        if (a != 0.0) return false;
    for (double b : sin_coeffs)
        if (b != 0.0) return false;
    return true;
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::Validation, what); };
    if (!(L > 0.0) || !std::isfinite(L)) fail("L > 0");
    if (!(omega > 0.0) || !std::isfinite(omega)) fail("omega > 0");
    if (!(g >= 0.0) || !std::isfinite(g)) fail("g >= 0");
    if (n_bands < 1) fail("n_bands >= 1");
    if (n_time < 2 || (n_time & (n_time - 1)) != 0) fail("n_time is a power of two");
    if (!(tol_eig > 0.0)) fail("tol_eig > 0");
    if (!(tol_unitary > 0.0)) fail("tol_unitary > 0");
    for (double a : W.cos_coeffs)
        if (!std::isfinite(a)) fail("W coefficients finite");
    for (double b : W.sin_coeffs)
        if (!std::isfinite(b)) fail("W coefficients finite");
}

}  // namespace ringkam
