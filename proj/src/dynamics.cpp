#include "ringkam/dynamics.hpp"

#include "ringkam/fourier.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace ringkam {

namespace {
double max_abs(const MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
}  // namespace

double DrivenGenerator::period() const noexcept { return 2.0 * kPi / omega; }

MatrixXcd DrivenGenerator::at(double t) const {
    MatrixXcd h = MatrixXcd::Zero(dim, dim);
    const double phase = omega * t;
    for (std::size_t i = 0; i < h_hat.size(); ++i) {
        const double arg = harmonics[i] * phase;
        if (nyquist[i])
            h += std::cos(arg) * h_hat[i];
        else
            h += std::polar(1.0, arg) * h_hat[i];
    }
    return 0.5 * (h + h.adjoint());
}

VectorXd DrivenGenerator::energies_at(double t) const {
    VectorXd e(dim);
    for (int n = 0; n < dim; ++n) e(n) = evaluate_series(energy_hat, n, omega * t).real();
    return e;
}

DrivenGenerator moving_basis_generator(const BandSpectrum& spectrum, const CouplingTensor& coupling,
                                       int n_bands) {
    if (n_bands < 0) n_bands = spectrum.n_bands;
    if (n_bands > spectrum.n_bands || n_bands > coupling.n_bands)
        throw Error(ErrorKind::Validation, "requested more bands than computed");
    const int nt = spectrum.n_time;
    DrivenGenerator gen;
    gen.omega = spectrum.omega;
    gen.dim = n_bands;
    gen.energy_is_diagonal = true;
    gen.energy_hat = fourier_coefficients(spectrum.energies.topRows(n_bands).cast<cplx>());

    MatrixXcd series(static_cast<Eigen::Index>(n_bands) * n_bands, nt);
    for (int k = 0; k < nt; ++k) {
        const MatrixXcd& A = coupling.A[static_cast<std::size_t>(k)];
        for (int m = 0; m < n_bands; ++m)
            for (int n = 0; n < n_bands; ++n) {
                cplx v = A(n, m);
                if (n == m) v += spectrum.energies(n, k);
                series(m * n_bands + n, k) = v;
            }
    }
    const MatrixXcd hat = fourier_coefficients(series);
    for (int j = 0; j < nt; ++j) {
        MatrixXcd block(n_bands, n_bands);
        for (int m = 0; m < n_bands; ++m)
            for (int n = 0; n < n_bands; ++n) block(n, m) = hat(m * n_bands + n, j);
        if (max_abs(block) == 0.0) continue;
        gen.harmonics.push_back(harmonic_of(j, nt));
        gen.nyquist.push_back(nt % 2 == 0 && j == nt / 2);
        gen.h_hat.push_back(std::move(block));
    }
    return gen;
}

int EvolutionConfig::steps(int dim) const noexcept {
    return steps_per_period > 0 ? steps_per_period : std::max(8 * dim, 256);
}

double EnergyTrace::max_energy(double t_lo, double t_hi) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= t_lo && times[i] <= t_hi) best = std::max(best, energy[i]);
    return best;
}

std::vector<MatrixXcd> step_propagators(const DrivenGenerator& gen, int steps_per_period) {
    const double dt = gen.period() / steps_per_period;
    std::vector<MatrixXcd> steps(static_cast<std::size_t>(steps_per_period));
    for (int s = 0; s < steps_per_period; ++s) {
        const MatrixXcd h = gen.at((s + 0.5) * dt);
        steps[static_cast<std::size_t>(s)] = (cplx{0.0, -dt} * h).exp();
    }
    return steps;
}

EnergyTrace propagate(const EvolutionConfig& ecfg, const DrivenGenerator& gen, bool keep_states) {
    const int dim = gen.dim;
    if (ecfg.initial_state.size() != dim)
        throw Error(ErrorKind::Validation, "initial state has the wrong dimension");
    if (std::abs(ecfg.initial_state.norm() - 1.0) > 1e-12)
        throw Error(ErrorKind::Validation, "initial state normalized to 1e-12");
    if (ecfg.n_periods < 1) throw Error(ErrorKind::Validation, "n_periods >= 1");
    const int S = ecfg.steps(dim);
    if (S < 8 * dim) throw Error(ErrorKind::Validation, "steps_per_period >= 8 n_bands");
    const int stride = std::max(1, ecfg.record_every);
    const double T = gen.period();
    const double dt = T / S;
    const auto steps = step_propagators(gen, S);

    // Energy operator at the step boundaries of one period.
    std::vector<VectorXd> diag_energy(static_cast<std::size_t>(S));
    std::vector<MatrixXcd> full_energy;
    for (int s = 0; s < S; ++s) diag_energy[static_cast<std::size_t>(s)] = gen.energies_at(s * dt);
    if (!gen.energy_is_diagonal) {
        full_energy.resize(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) full_energy[static_cast<std::size_t>(s)] = gen.at(s * dt);
    }

    EnergyTrace trace;
    trace.tails.assign(ecfg.tail_thresholds.size(), {});
    VectorXcd c = ecfg.initial_state;
    auto record = [&](long long step) {
        const int s = static_cast<int>(step % S);
        const double t = (static_cast<double>(step / S) + static_cast<double>(s) / S) * T;
        const VectorXd& e = diag_energy[static_cast<std::size_t>(s)];
        const VectorXd pop = c.cwiseAbs2();
        double energy = gen.energy_is_diagonal
                            ? e.dot(pop)
                            : c.dot(full_energy[static_cast<std::size_t>(s)] * c).real();
        trace.times.push_back(t);
        trace.energy.push_back(energy);
        for (std::size_t r = 0; r < ecfg.tail_thresholds.size(); ++r) {
            double mass = 0.0;
            for (int n = 0; n < dim; ++n)
                if (e(n) > ecfg.tail_thresholds[r]) mass += pop(n);
            trace.tails[r].push_back(std::sqrt(mass));
        }
        const double defect = std::abs(c.norm() - 1.0);
        trace.unitarity_defect.push_back(defect);
        if (keep_states) trace.states.push_back(c);
        if (defect > ecfg.tol_unitary)
            throw Error(ErrorKind::UnitarityLoss,
                        "norm defect " + std::to_string(defect) + " at t = " + std::to_string(t));
    };

    const long long total = static_cast<long long>(ecfg.n_periods) * S;
    record(0);
    for (long long step = 0; step < total; ++step) {
        c = steps[static_cast<std::size_t>(step % S)] * c;
        if ((step + 1) % stride == 0 || step + 1 == total) record(step + 1);
    }
    trace.final_state = c;
    return trace;
}

PeriodMap floquet_eigenphases(const DrivenGenerator& gen, int steps_per_period, double tol_unitary) {
    const auto steps = step_propagators(gen, steps_per_period);
    PeriodMap out;
    out.monodromy = MatrixXcd::Identity(gen.dim, gen.dim);
    for (const auto& s : steps) out.monodromy = s * out.monodromy;
    const MatrixXcd I = MatrixXcd::Identity(gen.dim, gen.dim);
    out.unitarity_defect = max_abs(out.monodromy.adjoint() * out.monodromy - I);
    if (out.unitarity_defect > tol_unitary)
        throw Error(ErrorKind::UnitarityLoss,
                    "period map unitarity defect " + std::to_string(out.unitarity_defect));
    Eigen::ComplexEigenSolver<MatrixXcd> es(out.monodromy);
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    return out;
}

MatrixXcd FloquetDecomposition::Up_at(double t) const {
    MatrixXcd out = MatrixXcd::Zero(n_bands, n_bands);
    for (int j1 = -n_fourier; j1 <= n_fourier; ++j1)
        out += std::polar(1.0, omega * t * j1) * coeffs[static_cast<std::size_t>(j1 + n_fourier)];
    return out;
}

MatrixXcd FloquetDecomposition::propagator(double t) const {
    VectorXcd phases(n_bands);
    for (int m = 0; m < n_bands; ++m) phases(m) = std::polar(1.0, -quasi_energies(m) * t);
    const MatrixXcd U0 = Up_at(0.0);
    return Up_at(t) * phases.asDiagonal() * U0.partialPivLu().inverse();
}

FloquetDecomposition build_floquet_decomposition(const KamReport& kam, int n_fourier_inner, int n_bands,
                                                 double omega, int n_samples) {
    const FloquetLayout& layout = kam.layout;
    if (n_bands > layout.n_bands || n_fourier_inner > layout.n_fourier)
        throw Error(ErrorKind::Validation, "decomposition block exceeds the KAM truncation");
    FloquetDecomposition out;
    out.omega = omega;
    out.n_bands = n_bands;
    out.n_fourier = layout.n_fourier;

    // Column of U_inf^* carrying label (0, m).
    std::vector<int> column_of_label(static_cast<std::size_t>(layout.dim()));
    for (std::size_t c = 0; c < kam.label_of.size(); ++c)
        column_of_label[static_cast<std::size_t>(kam.label_of[c])] = static_cast<int>(c);

    out.quasi_energies.resize(n_bands);
    out.coeffs.assign(static_cast<std::size_t>(2 * layout.n_fourier + 1), MatrixXcd::Zero(n_bands, n_bands));
    for (int m = 0; m < n_bands; ++m) {
        const int col = column_of_label[static_cast<std::size_t>(layout.index(0, m))];
        out.quasi_energies(m) = kam.diagonal(col);
        for (int j1 = -layout.n_fourier; j1 <= layout.n_fourier; ++j1)
            for (int j2 = 0; j2 < n_bands; ++j2)
                out.coeffs[static_cast<std::size_t>(j1 + layout.n_fourier)](j2, m) =
                    kam.eigenvectors(layout.index(j1, j2), col);
    }

    // Toeplitz structure of U_inf on the inner block.
    const MatrixXcd& U = kam.U;
    for (int j1 = -n_fourier_inner; j1 < n_fourier_inner; ++j1)
        for (int k1 = -n_fourier_inner; k1 < n_fourier_inner; ++k1)
            for (int n = 0; n < n_bands; ++n)
                for (int m = 0; m < n_bands; ++m) {
                    const cplx a = U(layout.index(j1, n), layout.index(k1, m));
                    const cplx b = U(layout.index(j1 + 1, n), layout.index(k1 + 1, m));
                    out.toeplitz_defect = std::max(out.toeplitz_defect, std::abs(a - b));
                }
    if (out.toeplitz_defect > 1e-5)
        throw Error(ErrorKind::FiberingDefect,
                    "Toeplitz deviation of U_inf " + std::to_string(out.toeplitz_defect));

    const double T = 2.0 * kPi / omega;
    for (int k = 0; k < n_samples; ++k) {
        out.sample_times.push_back(T * k / n_samples);
        out.Up.push_back(out.Up_at(T * k / n_samples));
    }
    out.periodicity_defect = max_abs(out.Up_at(T) - out.Up_at(0.0));
    if (out.periodicity_defect > 1e-6)
        throw Error(ErrorKind::FiberingDefect, "U_p(T) differs from U_p(0)");
    return out;
}

}  // namespace ringkam
