#include "ringkam/cell_spectrum.hpp"

#include "ringkam/fourier.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace ringkam {

namespace odeint = boost::numeric::odeint;

namespace {

using State4 = std::array<double, 4>;
using State1 = std::array<double, 1>;

double kappa_of(double E) noexcept { return std::sqrt(std::max(std::abs(E), 1.0)); }

struct FundamentalRhs {
    const ModelConfig* cfg;
    double E;
    double kappa;
    void operator()(const State4& s, State4& ds, double x) const {
        const double q = (cfg->potential(x) - E) / kappa;
        ds[0] = kappa * s[1];
        ds[1] = q * s[0];
        ds[2] = kappa * s[3];
        ds[3] = q * s[2];
    }
};

struct PrueferRhs {
    const ModelConfig* cfg;
    double E;
    double kappa;
    void operator()(const State1& s, State1& ds, double x) const {
        const double sn = std::sin(s[0]);
        const double cs = std::cos(s[0]);
        ds[0] = kappa * sn * sn + (E - cfg->potential(x)) / kappa * cs * cs;
    }
};

[[noreturn]] void integrator_failure(double E, double x, const std::string& why) {
    std::ostringstream os;
    os.precision(17);
    os << "ODE integration failed at E=" << E << ", x=" << x << ": " << why;
    throw Error(ErrorKind::Integrator, os.str());
}

template <class Rhs, class State>
void integrate_to(const Rhs& rhs, State& s, double x0, double x1, double atol, double rtol,
                  double E, double kappa) {
    odeint::runge_kutta_fehlberg78<State> stepper;
    const double dt = (x1 - x0) / (16.0 * kappa);
    try {
        odeint::integrate_adaptive(odeint::make_controlled(atol, rtol, stepper), rhs, s, x0, x1, dt);
    } catch (const std::exception& e) {
        integrator_failure(E, x1, e.what());
    }
    for (double c : s)
        if (!std::isfinite(c)) integrator_failure(E, x1, "non-finite state");
}

// Solves f(E) = 0 inside [lo, hi] where f(lo) and f(hi) differ in sign.
template <class F>
double refine_root(F&& f, double lo, double hi, double flo, double fhi, double tol) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t max_iter = 200;
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, max_iter);
    return 0.5 * (r.first + r.second);
}

}  // namespace

// ------------------------------------------------------------------ shooter

CellShooter::CellShooter(const ModelConfig& cfg, double rtol, double atol)
    : cfg_(cfg), rtol_(rtol), atol_(atol) {}

EndValues CellShooter::shoot(double E) const {
    const double kappa = kappa_of(E);
    State4 s{1.0, 0.0, 0.0, 1.0};
    integrate_to(FundamentalRhs{&cfg_, E, kappa}, s, 0.0, cfg_.L, atol_, rtol_, E, kappa);
    return {s[0], s[1] * kappa, s[2] / kappa, s[3]};
}

double CellShooter::pruefer_angle(double E) const {
    const double kappa = kappa_of(E);
    State1 s{0.0};
    integrate_to(PrueferRhs{&cfg_, E, kappa}, s, 0.0, cfg_.L, atol_, rtol_, E, kappa);
    return s[0];
}

void CellShooter::sample(double E, std::span<const double> nodes, std::vector<double>& u,
                         std::vector<double>& v) const {
    const double kappa = kappa_of(E);
    u.resize(nodes.size());
    v.resize(nodes.size());
    State4 s{1.0, 0.0, 0.0, 1.0};
    FundamentalRhs rhs{&cfg_, E, kappa};
    double x = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] > x) {
            integrate_to(rhs, s, x, nodes[i], atol_, rtol_, E, kappa);
            x = nodes[i];
        }
        u[i] = s[0];
        v[i] = s[2] / kappa;
    }
}

SecularContext make_secular_context(const CellShooter& shooter, double phase) {
    return {phase, shooter.config().g, &shooter};
}

double secular_value(const SecularContext& ctx, double E) {
    const EndValues ev = ctx.shooter->shoot(E);
    const double f = ev.du + ctx.g * (ev.u + ev.dv - 2.0 * std::cos(ctx.phase));
    if (!std::isfinite(f)) integrator_failure(E, ctx.shooter->config().L, "non-finite secular value");
    return f;
}

double asymptotic_model(const ModelConfig& cfg, int n, double t) {
    const double kn = n * kPi / cfg.L;
    const double parity = (n % 2 == 0) ? 1.0 : -1.0;
    return kn * kn + cfg.omega / 2.0 + cfg.W.mean() +
           4.0 * cfg.g / cfg.L * (1.0 - parity * std::cos(cfg.omega * t));
}

// ---------------------------------------------------------------- spectrum

VectorXd reference_energies(const CellShooter& shooter, int n_bands, double tol) {
    const ModelConfig& cfg = shooter.config();
    ModelConfig decoupled = cfg;
    decoupled.g = 0.0;
    VectorXd e(n_bands);
    for (int n = 0; n < n_bands; ++n) {
        const double target = n * kPi;
        auto f = [&](double E) { return shooter.pruefer_angle(E) - target; };
        const double center = asymptotic_model(decoupled, n, 0.0);
        double step = 1.0;
        double lo = center - step, hi = center + step;
        double flo = f(lo), fhi = f(hi);
        for (int it = 0; flo > 0.0 && it < 64; ++it) {
            hi = lo;
            fhi = flo;
            step *= 2.0;
            lo -= step;
            flo = f(lo);
        }
        for (int it = 0; fhi < 0.0 && it < 64; ++it) {
            lo = hi;
            flo = fhi;
            step *= 2.0;
            hi += step;
            fhi = f(hi);
        }
        if (flo > 0.0 || fhi < 0.0) {
            std::ostringstream os;
            os << "reference eigenvalue for band " << n << " not bracketed";
            throw Error(ErrorKind::RootNotFound, os.str());
        }
        e(n) = refine_root(f, lo, hi, flo, fhi, tol);
    }
    return e;
}

namespace {

constexpr int kBracketSubdivisions = 8;

// Secular function without its time-dependent term: F(E, t) = D(E) - 2 g cos(omega t).
double discriminant(const CellShooter& shooter, double E) {
    const EndValues ev = shooter.shoot(E);
    const double d = ev.du + shooter.config().g * (ev.u + ev.dv);
    if (!std::isfinite(d)) integrator_failure(E, shooter.config().L, "non-finite secular value");
    return d;
}

// Solves band n at every time index in [0, half]. The bracket is centered at
// E_n^0 + 4g/L, the time average of the coupling shift, with half-width
// min(gap/3, 1); it is sampled once and the sign pattern re-read per time.
void solve_band(const CellShooter& shooter, const ModelConfig& cfg, const VectorXd& e0, int n,
                int half, MatrixXd& energies) {
    double gap = e0(n + 1) - e0(n);
    if (n > 0) gap = std::min(gap, e0(n) - e0(n - 1));
    const double h = std::min(gap / 3.0, 1.0);
    const double center = e0(n) + 4.0 * cfg.g / cfg.L;
    std::array<double, kBracketSubdivisions + 1> xs{}, ds{};
    for (int i = 0; i <= kBracketSubdivisions; ++i) {
        xs[i] = center - h + 2.0 * h * i / kBracketSubdivisions;
        ds[i] = discriminant(shooter, xs[i]);
    }
    for (int k = 0; k <= half; ++k) {
        const double shift = 2.0 * cfg.g * std::cos(cfg.phase(k));
        int changes = 0;
        int where = -1;
        for (int i = 0; i < kBracketSubdivisions; ++i) {
            const double fa = ds[i] - shift, fb = ds[i + 1] - shift;
            if (fa == 0.0 && i > 0) continue;  // counted with the previous subinterval
            if (fa == 0.0 || fb == 0.0 || (fa < 0.0) != (fb < 0.0)) {
                ++changes;
                where = i;
            }
        }
        std::ostringstream os;
        os.precision(12);
        if (changes == 0) {
            os << "no secular sign change for band " << n << " at time index " << k << " in ["
               << center - h << ", " << center + h << "]";
            throw Error(ErrorKind::RootNotFound, os.str());
        }
        if (changes > 1) {
            os << changes << " secular roots in the bracket of band " << n << " at time index " << k
               << " (g too large or too few bands)";
            throw Error(ErrorKind::BracketCollision, os.str());
        }
        auto f = [&](double E) { return discriminant(shooter, E) - shift; };
        energies(n, k) = refine_root(f, xs[where], xs[where + 1], ds[where] - shift,
                                     ds[where + 1] - shift, cfg.tol_eig);
    }
}

}  // namespace

BandSpectrum solve_band_spectrum(const ModelConfig& cfg, int threads) {
    cfg.validate();
    const CellShooter shooter(cfg);
    BandSpectrum s;
    s.n_bands = cfg.n_bands;
    s.n_time = cfg.n_time;
    s.omega = cfg.omega;
    s.g = cfg.g;
    s.period = cfg.period();
    const VectorXd e0 = reference_energies(shooter, cfg.n_bands + 1, cfg.tol_eig);
    s.reference_energies = e0.head(cfg.n_bands);
    s.energies.resize(cfg.n_bands, cfg.n_time);

    // cos(omega t_k) = cos(omega t_{N-k}): only the first half of the grid is solved.
    const int half = cfg.n_time / 2;
    parallel_for(static_cast<std::size_t>(cfg.n_bands), threads, [&](std::size_t n) {
        solve_band(shooter, cfg, e0, static_cast<int>(n), half, s.energies);
    });
    for (int k = half + 1; k < cfg.n_time; ++k) s.energies.col(k) = s.energies.col(cfg.n_time - k);
    return s;
}

// ------------------------------------------------------------ eigenfunctions

void gauss_legendre_grid(double L, int panels, int order, VectorXd& nodes, VectorXd& weights) {
    // Golub-Welsch on the Jacobi matrix of the Legendre polynomials.
    MatrixXd J = MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
    const VectorXd x = es.eigenvalues();
    const VectorXd w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    nodes.resize(panels * order);
    weights.resize(panels * order);
    const double h = L / panels;
    for (int p = 0; p < panels; ++p) {
        for (int i = 0; i < order; ++i) {
            nodes(p * order + i) = h * (p + 0.5 * (x(i) + 1.0));
            weights(p * order + i) = 0.5 * h * w(i);
        }
    }
}

cplx EigenfunctionStore::inner(int n, int kn, int m, int km) const {
    const auto& a = samples[static_cast<std::size_t>(n)];
    const auto& b = samples[static_cast<std::size_t>(m)];
    return (a.col(kn).conjugate().array() * b.col(km).array() * weights.array()).sum();
}

namespace {

constexpr int kQuadratureOrder = 12;

}  // namespace

PhaseFixedBasis phase_fixed_eigenbasis(const ModelConfig& cfg, const BandSpectrum& spectrum,
                                       int threads) {
    cfg.validate();
    const CellShooter shooter(cfg);
    const int nb = spectrum.n_bands;
    const int nt = spectrum.n_time;
    PhaseFixedBasis out;
    out.spectrum = spectrum;
    EigenfunctionStore& store = out.functions;
    gauss_legendre_grid(cfg.L, nb + 4, kQuadratureOrder, store.nodes, store.weights);
    const auto nx = store.nodes.size();
    // Last sample point is x = L for the boundary values.
    std::vector<double> grid(store.nodes.data(), store.nodes.data() + nx);
    grid.push_back(cfg.L);

    store.reference.resize(static_cast<Eigen::Index>(nx), nb);
    parallel_for(static_cast<std::size_t>(nb), threads, [&](std::size_t ni) {
        const int n = static_cast<int>(ni);
        std::vector<double> u, v;
        shooter.sample(spectrum.reference_energies(n), grid, u, v);
        Eigen::Map<const VectorXd> uu(u.data(), static_cast<Eigen::Index>(nx));
        const double norm = std::sqrt((uu.array().square() * store.weights.array()).sum());
        store.reference.col(n) = uu / norm;
    });

    out.spectrum.traces0.resize(nb, nt);
    out.spectrum.tracesL.resize(nb, nt);
    out.spectrum.norm_data.resize(nb, nt);
    store.samples.assign(static_cast<std::size_t>(nb), MatrixXcd(static_cast<Eigen::Index>(nx), nt));

    const int half = nt / 2;
    const auto jobs = static_cast<std::size_t>(nb) * static_cast<std::size_t>(half + 1);
    parallel_for(jobs, threads, [&](std::size_t job) {
        const int n = static_cast<int>(job / static_cast<std::size_t>(half + 1));
        const int k = static_cast<int>(job % static_cast<std::size_t>(half + 1));
        const double E = spectrum.energies(n, k);
        std::vector<double> u, v;
        shooter.sample(E, grid, u, v);
        // Boundary values at x = L from the last sample; derivatives from a shot.
        const EndValues ev = shooter.shoot(E);
        const cplx z = std::polar(1.0, cfg.phase(k));
        const cplx r1a = z * ev.du, r1b = z * ev.dv - 1.0;
        const cplx r2a = cfg.g * (z * ev.u - 1.0), r2b = cfg.g * z * ev.v + 1.0;
        cplx a, b;
        if (std::norm(r1a) + std::norm(r1b) >= std::norm(r2a) + std::norm(r2b)) {
            a = r1b;
            b = -r1a;
        } else {
            a = r2b;
            b = -r2a;
        }
        VectorXcd psi(static_cast<Eigen::Index>(nx));
        for (std::size_t i = 0; i < static_cast<std::size_t>(nx); ++i) psi(static_cast<Eigen::Index>(i)) = a * u[i] + b * v[i];
        const double norm = std::sqrt((psi.array().abs2() * store.weights.array()).sum());
        psi /= norm;
        cplx t0 = a / norm;
        cplx tL = (a * ev.u + b * ev.v) / norm;
        const cplx overlap = (store.reference.col(n).array().cast<cplx>() * psi.array() *
                              store.weights.array().cast<cplx>())
                                 .sum();
        const double proj = std::abs(overlap);
        if (proj < 0.5) {
            std::ostringstream os;
            os << "projection of the reference eigenfunction onto band " << n << " at time index "
               << k << " has norm " << proj << " < 0.5";
            throw Error(ErrorKind::DegenerateProjection, os.str());
        }
        const cplx phase = std::conj(overlap) / proj;
        psi *= phase;
        t0 *= phase;
        tL *= phase;
        auto& S = store.samples[static_cast<std::size_t>(n)];
        S.col(k) = psi;
        out.spectrum.traces0(n, k) = t0;
        out.spectrum.tracesL(n, k) = tL;
        out.spectrum.norm_data(n, k) = proj;
        // H(T - t) is the complex conjugate of H(t): its phase-fixed eigenfunction is conj(psi).
        if (k > 0 && k < half) {
            S.col(nt - k) = psi.conjugate();
            out.spectrum.traces0(n, nt - k) = std::conj(t0);
            out.spectrum.tracesL(n, nt - k) = std::conj(tL);
            out.spectrum.norm_data(n, nt - k) = proj;
        }
    });
    return out;
}

// ----------------------------------------------------------------- coupling

namespace {

double symmetrize(std::vector<MatrixXcd>& A) {
    double defect = 0.0;
    for (auto& a : A) {
        defect = std::max(defect, (a - a.adjoint()).cwiseAbs().maxCoeff());
        const MatrixXcd h = 0.5 * (a + a.adjoint());
        a = h;
    }
    return defect;
}

}  // namespace

CouplingTensor coupling_matrix(const ModelConfig& cfg, const PhaseFixedBasis& basis) {
    const BandSpectrum& s = basis.spectrum;
    const int nb = s.n_bands;
    const int nt = s.n_time;
    CouplingTensor c;
    c.n_bands = nb;
    c.n_time = nt;
    c.A.assign(static_cast<std::size_t>(nt), MatrixXcd::Zero(nb, nb));
    if (cfg.g == 0.0) return c;

    for (int k = 0; k < nt; ++k) {
        const cplx z = std::polar(1.0, cfg.phase(k));
        auto& A = c.A[static_cast<std::size_t>(k)];
        for (int n = 0; n < nb; ++n) {
            for (int m = 0; m < nb; ++m) {
                if (n == m) continue;
                const double gap = s.energies(m, k) - s.energies(n, k);
                if (std::abs(gap) < 10.0 * cfg.tol_eig) {
                    std::ostringstream os;
                    os << "bands " << n << " and " << m << " closer than 10 tol_eig at time index " << k;
                    throw Error(ErrorKind::GapTooSmall, os.str());
                }
                const cplx num = std::conj(z) * std::conj(s.tracesL(n, k)) * s.traces0(m, k) -
                                 z * std::conj(s.traces0(n, k)) * s.tracesL(m, k);
                A(n, m) = cfg.omega * cfg.g * num / gap;
            }
        }
    }
    // Diagonal: <psi_n, -i d/dt psi_n> from the spectral time derivative.
    const auto& store = basis.functions;
    for (int n = 0; n < nb; ++n) {
        const auto& S = store.samples[static_cast<std::size_t>(n)];
        const MatrixXcd dS = time_derivative(S, cfg.omega);
        for (int k = 0; k < nt; ++k) {
            const cplx val = -kI * (S.col(k).conjugate().array() * dS.col(k).array() *
                                    store.weights.array().cast<cplx>())
                                       .sum();
            c.A[static_cast<std::size_t>(k)](n, n) = val;
        }
    }
    c.symmetrization_defect = symmetrize(c.A);
    return c;
}

CouplingTensor coupling_by_time_derivative(const ModelConfig& cfg, const PhaseFixedBasis& basis) {
    const BandSpectrum& s = basis.spectrum;
    const auto& store = basis.functions;
    const int nb = s.n_bands;
    const int nt = s.n_time;
    CouplingTensor c;
    c.n_bands = nb;
    c.n_time = nt;
    c.A.assign(static_cast<std::size_t>(nt), MatrixXcd::Zero(nb, nb));
    std::vector<MatrixXcd> deriv(static_cast<std::size_t>(nb));
    for (int m = 0; m < nb; ++m)
        deriv[static_cast<std::size_t>(m)] = time_derivative(store.samples[static_cast<std::size_t>(m)], cfg.omega);
    for (int k = 0; k < nt; ++k) {
        for (int n = 0; n < nb; ++n) {
            const auto& Sn = store.samples[static_cast<std::size_t>(n)];
            for (int m = 0; m < nb; ++m) {
                const auto& dSm = deriv[static_cast<std::size_t>(m)];
                c.A[static_cast<std::size_t>(k)](n, m) =
                    -kI * (Sn.col(k).conjugate().array() * dSm.col(k).array() *
                           store.weights.array().cast<cplx>())
                              .sum();
            }
        }
    }
    c.symmetrization_defect = symmetrize(c.A);
    return c;
}

GapReport verify_gap_growth(const BandSpectrum& spectrum, double tol_eig) {
    GapReport r;
    r.min_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k < spectrum.n_time; ++k) {
        for (int n = 0; n + 1 < spectrum.n_bands; ++n) {
            const double ratio = (spectrum.energies(n + 1, k) - spectrum.energies(n, k)) / (n + 1);
            if (ratio < r.min_ratio) {
                r.min_ratio = ratio;
                r.argmin_band = n;
                r.argmin_time = k;
            }
        }
    }
    r.pass = r.min_ratio > 10.0 * tol_eig;
    return r;
}

}  // namespace ringkam
