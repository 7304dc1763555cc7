#include "ringkam/resonant.hpp"

#include <algorithm>
#include <cmath>

namespace ringkam {

VectorXd gauge_phases(const ModelConfig& cfg, double t, int n_bands) {
    VectorXd out(n_bands);
    const double amp = 4.0 * cfg.g / (cfg.L * cfg.omega) * std::sin(cfg.omega * t);
    for (int n = 0; n < n_bands; ++n) out(n) = (n % 2 == 0 ? -1.0 : 1.0) * amp;
    return out;
}

double reference_level(const ModelConfig& cfg, int n) {
    const double k = n * kPi / cfg.L;
    return k * k + 0.5 * cfg.omega + cfg.W.mean() + 4.0 * cfg.g / cfg.L;
}

Residual residual_perturbation(const ModelConfig& cfg, const BandSpectrum& spectrum,
                               const CouplingTensor& coupling, int k, int n_bands) {
    if (n_bands < 0) n_bands = spectrum.n_bands;
    const double t = spectrum.time(k);
    // Exact phases on the grid: sin(omega t_k) from the integer phase.
    const double phase = 2.0 * kPi * k / spectrum.n_time;
    VectorXd gn(n_bands);
    const double amp = 4.0 * cfg.g / (cfg.L * cfg.omega) * std::sin(phase);
    for (int n = 0; n < n_bands; ++n) gn(n) = (n % 2 == 0 ? -1.0 : 1.0) * amp;
    (void)t;
    Residual r;
    r.matrix.resize(n_bands, n_bands);
    const MatrixXcd& A = coupling.A[static_cast<std::size_t>(k)];
    for (int m = 0; m < n_bands; ++m)
        for (int n = 0; n < n_bands; ++n) {
            if (n == m) {
                const double sign = n % 2 == 0 ? 1.0 : -1.0;
                r.matrix(n, n) = spectrum.energies(n, k) + A(n, n) +
                                 4.0 * cfg.g / cfg.L * sign * std::cos(phase) - reference_level(cfg, n);
            } else {
                r.matrix(n, m) = std::polar(1.0, gn(n) - gn(m)) * A(n, m);
            }
        }
    r.hs_norm = r.matrix.norm();
    return r;
}

double residual_hs_sup(const ModelConfig& cfg, const BandSpectrum& spectrum, const CouplingTensor& coupling,
                       int n_bands) {
    double s = 0.0;
    for (int k = 0; k < spectrum.n_time; ++k)
        s = std::max(s, residual_perturbation(cfg, spectrum, coupling, k, n_bands).hs_norm);
    return s;
}

ResonantReport essential_spectrum_check(const ModelConfig& cfg, const BandSpectrum& spectrum,
                                        const CouplingTensor& coupling, const PeriodMap& period_map,
                                        int n_bands) {
    const auto cls = classify_rational(cfg.omega, cfg.L);
    if (!cls.resonant)
        throw Error(ErrorKind::NotResonant, "omega (L/pi)^2 = " + std::to_string(cls.x) +
                                                " is not detected as rational");
    ResonantReport rep;
    rep.omega = cfg.omega;
    rep.p = cls.p;
    rep.q = cls.q;
    const double T = cfg.period();
    rep.predicted_phases.resize(n_bands);
    for (int n = 0; n < n_bands; ++n) rep.predicted_phases(n) = std::polar(1.0, -reference_level(cfg, n) * T);

    // Assign eigenvectors of U(T) to bands by maximal overlap.
    const MatrixXd cost = -period_map.eigenvectors.cwiseAbs2();
    const auto band_to_vec = min_cost_assignment(cost);
    rep.computed_phases.resize(n_bands);
    rep.distance.resize(n_bands);
    for (int n = 0; n < n_bands; ++n) {
        rep.computed_phases(n) = period_map.eigenvalues(band_to_vec[static_cast<std::size_t>(n)]);
        rep.distance(n) = std::abs(std::arg(rep.computed_phases(n) / rep.predicted_phases(n)));
    }

    // Bulk excludes the lowest bands and the top quarter next to the truncation edge.
    rep.bulk_lo = std::max(2, n_bands / 10);
    rep.bulk_hi = std::max(rep.bulk_lo + 1, (3 * n_bands) / 4);

    // Period average of the residual diagonal; C fitted as the mean of n |<R_nn>|.
    VectorXd mean_diag = VectorXd::Zero(n_bands);
    for (int k = 0; k < spectrum.n_time; ++k)
        mean_diag += residual_perturbation(cfg, spectrum, coupling, k, n_bands).matrix.diagonal().real();
    mean_diag /= spectrum.n_time;
    double c_sum = 0.0;
    for (int n = rep.bulk_lo; n < rep.bulk_hi; ++n) c_sum += n * std::abs(mean_diag(n));
    rep.residual_scale = c_sum / (rep.bulk_hi - rep.bulk_lo);

    std::vector<std::pair<double, int>> bulk;
    for (int n = rep.bulk_lo; n < rep.bulk_hi; ++n) bulk.emplace_back(rep.distance(n), n);
    std::sort(bulk.begin(), bulk.end());
    rep.median_distance = bulk[bulk.size() / 2].first;
    rep.median_band = bulk[bulk.size() / 2].second;

    // Decile medians over all bands n >= 1.
    const int deciles = std::min(10, n_bands - 1);
    for (int d = 0; d < deciles; ++d) {
        const int lo = 1 + d * (n_bands - 1) / deciles;
        const int hi = 1 + (d + 1) * (n_bands - 1) / deciles;
        if (hi <= lo) continue;
        std::vector<double> v(rep.distance.data() + lo, rep.distance.data() + hi);
        std::sort(v.begin(), v.end());
        rep.decile_centers.push_back(0.5 * (lo + hi - 1));
        rep.decile_median.push_back(v[v.size() / 2]);
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < rep.decile_centers.size(); ++i)
        if (rep.decile_centers[i] >= rep.bulk_lo && rep.decile_centers[i] < rep.bulk_hi) {
            xs.push_back(rep.decile_centers[i]);
            ys.push_back(rep.decile_median[i]);
        }
    rep.decay_exponent = loglog_slope(xs, ys);
    rep.hs_norm = residual_hs_sup(cfg, spectrum, coupling, n_bands);
    rep.pass = rep.median_distance < 5.0 * T * rep.residual_scale / rep.median_band;
    return rep;
}

}  // namespace ringkam
