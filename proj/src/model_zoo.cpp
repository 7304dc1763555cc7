#include "ringkam/model_zoo.hpp"

#include "ringkam/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ringkam {

double uniform53(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double AbstractModel::gap_certificate() const {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < n_levels(); ++i) {
        const double n = i + 1;
        best = std::min(best, (energies(i + 1) - energies(i)) / std::pow(n, alpha));
    }
    return best;
}

std::function<double(int, double)> AbstractModel::energy_model() const {
    VectorXd e = energies;
    return [e](int n, double) { return e(std::min<Eigen::Index>(n, e.size() - 1)); };
}

AbstractModel synthesize(double alpha, double c, double g, double tau, std::uint64_t seed, int n_levels,
                         int n_harmonics, double e_offset) {
    if (n_levels < 2) throw Error(ErrorKind::Validation, "n_levels >= 2");
    if (!(c > 0.0)) throw Error(ErrorKind::Validation, "gap constant c > 0");
    if (!(g >= 0.0)) throw Error(ErrorKind::Validation, "g >= 0");
    if (n_harmonics < 0) throw Error(ErrorKind::Validation, "n_harmonics >= 0");
    AbstractModel m;
    m.alpha = alpha;
    m.c = c;
    m.g = g;
    m.tau = tau;
    m.seed = seed;
    m.n_harmonics = n_harmonics;
    m.out_of_theory = alpha <= 0.0;
    m.energies.resize(n_levels);
    m.energies(0) = e_offset;
    for (int i = 1; i < n_levels; ++i) m.energies(i) = m.energies(i - 1) + c * std::pow(static_cast<double>(i), alpha);

    std::mt19937_64 rng(seed);
    auto phase = [&rng]() { return std::polar(1.0, 2.0 * kPi * uniform53(rng())); };
    for (int d = 0; d <= n_harmonics; ++d) {
        MatrixXcd W(n_levels, n_levels);
        for (int j = 0; j < n_levels; ++j)
            for (int i = 0; i < n_levels; ++i) {
                if (d == 0 && i > j) continue;
                const double x = std::abs(i - j);
                const double mag = g * std::pow(1.0 + x * x, -0.5 * tau);
                W(i, j) = mag * phase();
                if (d == 0) {
                    if (i == j) W(i, j) = W(i, j).real() >= 0.0 ? mag : -mag;
                    else W(j, i) = std::conj(W(i, j));
                }
            }
        m.perturbation.push_back(std::move(W));
    }
    return m;
}

FloquetMatrix abstract_floquet_matrix(const AbstractModel& model, double omega, int n_fourier) {
    FloquetMatrix F;
    F.layout = {n_fourier, model.n_levels()};
    F.omega = omega;
    F.g = model.g;
    const int dim = F.layout.dim();
    F.entries = MatrixXcd::Zero(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
            const int d = F.layout.j1(a) - F.layout.j1(b);
            const int n = F.layout.j2(a), m = F.layout.j2(b);
            cplx v{0.0, 0.0};
            if (std::abs(d) <= model.n_harmonics)
                v = d >= 0 ? model.perturbation[static_cast<std::size_t>(d)](n, m)
                           : std::conj(model.perturbation[static_cast<std::size_t>(-d)](m, n));
            if (d == 0 && n == m) v += model.energies(n) + F.layout.j1(b) * omega;
            F.entries(a, b) = v;
        }
    const MatrixXcd adj = F.entries.adjoint();
    F.hermiticity_defect = (F.entries - adj).cwiseAbs().maxCoeff();
    F.entries = 0.5 * (F.entries + adj);
    F.diag_model.resize(dim);
    for (int a = 0; a < dim; ++a) F.diag_model(a) = omega * F.layout.j1(a) + model.energies(F.layout.j2(a));
    return F;
}

DrivenGenerator abstract_generator(const AbstractModel& model, double omega) {
    DrivenGenerator gen;
    gen.omega = omega;
    gen.dim = model.n_levels();
    gen.energy_is_diagonal = false;
    gen.energy_hat = model.energies.cast<cplx>();   // time independent: one column
    for (int d = -model.n_harmonics; d <= model.n_harmonics; ++d) {
        MatrixXcd block = d >= 0 ? model.perturbation[static_cast<std::size_t>(d)]
                                 : MatrixXcd(model.perturbation[static_cast<std::size_t>(-d)].adjoint());
        if (d == 0) block.diagonal() += model.energies.cast<cplx>();
        gen.harmonics.push_back(d);
        gen.nyquist.push_back(false);
        gen.h_hat.push_back(std::move(block));
    }
    return gen;
}

std::vector<SweepRow> alpha_sweep(const std::vector<double>& alphas, double g,
                                  const std::vector<double>& omega_samples, const SweepConfig& cfg,
                                  int threads) {
    std::vector<SweepRow> rows(alphas.size() * omega_samples.size());
    parallel_for(rows.size(), threads, [&](std::size_t idx) {
        const double alpha = alphas[idx / omega_samples.size()];
        const double omega = omega_samples[idx % omega_samples.size()];
        const auto model = synthesize(alpha, cfg.c, g, cfg.tau, cfg.seed, cfg.n_levels, 1, cfg.e_offset);
        SweepRow row;
        row.alpha = alpha;
        row.omega = omega;
        row.out_of_theory = model.out_of_theory;
        SieveConfig sc;
        sc.omega_lo = 0.5 * omega;
        sc.omega_hi = 1.5 * omega;
        sc.gamma = cfg.gamma;
        sc.n_max = cfg.n_levels - 1;
        sc.energy = model.energy_model();
        row.sieve_pass = is_nonresonant(omega, sc).pass;

        const auto gen = abstract_generator(model, omega);
        EvolutionConfig ec;
        ec.n_periods = cfg.n_periods;
        ec.steps_per_period = cfg.steps_per_period;
        ec.initial_state = VectorXcd::Zero(model.n_levels());
        ec.initial_state(cfg.initial_level) = 1.0;
        const int S = ec.steps(model.n_levels());
        ec.record_every = std::max(1, S / 16);
        const auto trace = propagate(ec, gen);
        const double T = gen.period();
        const double early = trace.max_energy(0.0, 10.0 * T);
        const double all = *std::max_element(trace.energy.begin(), trace.energy.end());
        row.max_energy_ratio = all / early;
        row.bounded = row.max_energy_ratio <= 1.1;
        rows[idx] = row;
    });
    return rows;
}

}  // namespace ringkam
