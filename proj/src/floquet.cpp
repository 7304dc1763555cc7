#include "ringkam/floquet.hpp"

#include "ringkam/fourier.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <ostream>

namespace ringkam {

int FloquetLayout::distance(int a, int b) const noexcept {
    return std::abs(j1(a) - j1(b)) + std::abs(j2(a) - j2(b));
}

namespace {

double max_abs(const MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Coefficient of harmonic d from a row of FFT coefficients with n columns.
cplx harmonic(const MatrixXcd& coeffs, Eigen::Index row, int d) {
    const int n = static_cast<int>(coeffs.cols());
    return coeffs(row, column_of(d, n) % n);
}

}  // namespace

FloquetMatrix assemble(const BandSpectrum& spectrum, const CouplingTensor& coupling, int n_fourier,
                       int n_bands) {
    if (n_bands < 0) n_bands = spectrum.n_bands;
    if (n_bands > spectrum.n_bands || n_bands > coupling.n_bands)
        throw Error(ErrorKind::Validation, "requested more bands than computed");
    if (n_fourier < 0) throw Error(ErrorKind::Validation, "n_fourier >= 0");
    const int nt = spectrum.n_time;
    if (nt < 4 * n_fourier)
        throw Error(ErrorKind::AliasError, "n_time = " + std::to_string(nt) + " < 4 n_fourier = " +
                                               std::to_string(4 * n_fourier));

    FloquetMatrix out;
    out.layout = {n_fourier, n_bands};
    out.omega = spectrum.omega;
    out.g = spectrum.g;
    const int dim = out.layout.dim();

    // Row n * n_bands + m of `series` holds A_nm(t_k); energies are separate.
    MatrixXcd series(static_cast<Eigen::Index>(n_bands) * n_bands, nt);
    for (int k = 0; k < nt; ++k) {
        const MatrixXcd& A = coupling.A[static_cast<std::size_t>(k)];
        for (int n = 0; n < n_bands; ++n)
            for (int m = 0; m < n_bands; ++m) series(n * n_bands + m, k) = A(n, m);
    }
    const MatrixXcd a_hat = fourier_coefficients(series);
    const MatrixXcd e_hat = fourier_coefficients(spectrum.energies.topRows(n_bands).cast<cplx>());

    out.entries = MatrixXcd::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
        const int j1 = out.layout.j1(a), n = out.layout.j2(a);
        for (int b = 0; b < dim; ++b) {
            const int k1 = out.layout.j1(b), m = out.layout.j2(b);
            const int d = j1 - k1;
            cplx value = harmonic(a_hat, n * n_bands + m, d);
            if (n == m) {
                value += harmonic(e_hat, n, d);
                if (d == 0) value += k1 * spectrum.omega;
            }
            out.entries(a, b) = value;
        }
    }
    const MatrixXcd adj = out.entries.adjoint();
    out.hermiticity_defect = max_abs(out.entries - adj);
    MatrixXcd sym = 0.5 * (out.entries + adj);
    out.symmetrization_correction = max_abs(sym - out.entries);
    out.entries = std::move(sym);

    out.diag_model.resize(dim);
    for (int a = 0; a < dim; ++a)
        out.diag_model(a) = spectrum.omega * out.layout.j1(a) + spectrum.mean_energy(out.layout.j2(a));
    return out;
}

std::vector<int> inner_indices(const FloquetLayout& outer, const FloquetLayout& inner) {
    if (inner.n_fourier > outer.n_fourier || inner.n_bands > outer.n_bands)
        throw Error(ErrorKind::Validation, "inner block exceeds the assembled truncation");
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(inner.dim()));
    for (int j1 = -inner.n_fourier; j1 <= inner.n_fourier; ++j1)
        for (int j2 = 0; j2 < inner.n_bands; ++j2) idx.push_back(outer.index(j1, j2));
    return idx;
}

FloquetMatrix inner_block(const FloquetMatrix& M, int n_fourier, int n_bands) {
    FloquetMatrix out;
    out.layout = {n_fourier, n_bands};
    const auto idx = inner_indices(M.layout, out.layout);
    out.entries = M.entries(idx, idx);
    out.diag_model = M.diag_model(idx);
    out.omega = M.omega;
    out.g = M.g;
    out.hermiticity_defect = M.hermiticity_defect;
    out.symmetrization_correction = M.symmetrization_correction;
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 2) return 0.0;
    const double denom = count * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (count * sxy - sx * sy) / denom;
}

DecayProfile decay_profile(const MatrixXcd& M, const FloquetLayout& layout) {
    DecayProfile p;
    p.sup.assign(static_cast<std::size_t>(layout.max_distance()) + 1, 0.0);
    for (int a = 0; a < M.rows(); ++a)
        for (int b = 0; b < M.cols(); ++b) {
            auto& s = p.sup[static_cast<std::size_t>(layout.distance(a, b))];
            s = std::max(s, std::abs(M(a, b)));
        }
    std::vector<double> x, y;
    for (std::size_t d = 1; d < p.sup.size(); ++d) {
        x.push_back(static_cast<double>(d));
        y.push_back(p.sup[d]);
    }
    p.exponent = loglog_slope(x, y);
    return p;
}

MatrixXcd off_diagonal(const MatrixXcd& M) {
    MatrixXcd out = M;
    out.diagonal().setZero();
    return out;
}

double finite_norm(const MatrixXcd& M, const FloquetLayout& layout, double r, double delta,
                   std::optional<FrequencyPair> lipschitz) {
    if (r < 0.0) throw Error(ErrorKind::Validation, "decay rate r >= 0");
    // sup over entries sharing the difference vector (j1 - k1, j2 - k2).
    std::map<std::pair<int, int>, double> sup, sup_lip;
    const bool lip = lipschitz && lipschitz->other != nullptr;
    if (lip && (lipschitz->other->rows() != M.rows() || lipschitz->omega_step == 0.0))
        throw Error(ErrorKind::Validation, "Lipschitz term needs a same-size matrix and omega step");
    for (int a = 0; a < M.rows(); ++a)
        for (int b = 0; b < M.cols(); ++b) {
            const std::pair<int, int> d{layout.j1(a) - layout.j1(b), layout.j2(a) - layout.j2(b)};
            auto& s = sup[d];
            s = std::max(s, std::abs(M(a, b)));
            if (lip) {
                auto& t = sup_lip[d];
                t = std::max(t, std::abs(M(a, b) - (*lipschitz->other)(a, b)) /
                                    std::abs(lipschitz->omega_step));
            }
        }
    auto weighted = [&](const std::map<std::pair<int, int>, double>& table) {
        double total = 0.0;
        for (const auto& [d, value] : table) {
            if (value == 0.0) continue;
            const double len = std::abs(d.first) + std::abs(d.second);
            const double log_w = len * r + 0.5 * delta * std::log1p(len * len);
            total += std::exp(log_w + std::log(value));
        }
        return total;
    };
    double norm = weighted(sup);
    if (lip) norm += weighted(sup_lip);
    if (!std::isfinite(norm))
        throw Error(ErrorKind::Overflow, "weighted norm overflows at r = " + std::to_string(r));
    return norm;
}

MatrixXcd assemble_by_quadrature(const BandSpectrum& fine_spectrum, const CouplingTensor& fine_coupling,
                                 const FloquetLayout& layout) {
    const int dim = layout.dim();
    const int nt = fine_spectrum.n_time;
    const double omega = fine_spectrum.omega;
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
        const int j1 = layout.j1(a), n = layout.j2(a);
        for (int b = 0; b < dim; ++b) {
            const int k1 = layout.j1(b), m = layout.j2(b);
            const int d = j1 - k1;
            cplx sum{0.0, 0.0};
            for (int k = 0; k < nt; ++k) {
                const double phase = 2.0 * kPi * static_cast<double>(k) / nt;
                cplx f = fine_coupling(n, m, k);
                if (n == m) f += fine_spectrum.energies(n, k) + (d == 0 ? k1 * omega : 0.0);
                sum += std::polar(1.0, -d * phase) * f;
            }
            out(a, b) = sum / static_cast<double>(nt);
        }
    }
    return out;
}

void write_csv(std::ostream& out, const MatrixXcd& M) {
    out << "i,j,re,im\n";
    char buf[96];
    for (int j = 0; j < M.cols(); ++j)
        for (int i = 0; i < M.rows(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", i, j, M(i, j).real(), M(i, j).imag());
            out << buf;
        }
}

}  // namespace ringkam
