#include "ringkam/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ringkam {

void SieveConfig::validate() const {
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo))
        throw Error(ErrorKind::Validation, "0 < omega_lo < omega_hi");
    if (!(gamma > 0.0)) throw Error(ErrorKind::Validation, "gamma > 0");
    if (!(sigma > 0.0)) throw Error(ErrorKind::Validation, "sigma > 0");
    if (!(mu >= 0.0)) throw Error(ErrorKind::Validation, "mu >= 0");
    if (levels < 1) throw Error(ErrorKind::Validation, "levels >= 1");
    if (n_max < 1) throw Error(ErrorKind::Validation, "n_max >= 1");
    if (!energy) throw Error(ErrorKind::Validation, "sieve needs an energy model");
}

std::function<double(int, double)> surrogate_energy(const ModelConfig& cfg) {
    const double L = cfg.L, shift = cfg.W.mean() + 4.0 * cfg.g / cfg.L;
    return [L, shift](int n, double omega) {
        const double k = n * kPi / L;
        return k * k + 0.5 * omega + shift;
    };
}

namespace {

// Interval where |f| < bound for increasing f, clipped to the window.
std::optional<std::pair<double, double>> solve_band(const std::function<double(double)>& f,
                                                    double bound, double lo, double hi) {
    const double flo = f(lo), fhi = f(hi);
    if (flo >= bound || fhi <= -bound) return std::nullopt;
    auto crossing = [&](double level) {
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > 4 * std::numeric_limits<double>::epsilon() * b; ++it) {
            const double mid = 0.5 * (a + b);
            (f(mid) < level ? a : b) = mid;
        }
        return 0.5 * (a + b);
    };
    const double left = flo > -bound ? lo : crossing(-bound);
    const double right = fhi < bound ? hi : crossing(bound);
    if (!(right > left)) return std::nullopt;
    return std::make_pair(left, right);
}

std::vector<SieveInterval> merge(std::vector<SieveInterval> raw) {
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    std::vector<SieveInterval> out;
    // The witness of a merged interval is its widest constituent.
    double widest = 0.0;
    for (const auto& iv : raw) {
        if (!out.empty() && iv.lo <= out.back().hi) {
            auto& last = out.back();
            if (iv.length() > widest) {
                widest = iv.length();
                last.k = iv.k;
                last.m = iv.m;
                last.n = iv.n;
                last.level = iv.level;
            }
            last.hi = std::max(last.hi, iv.hi);
        } else {
            out.push_back(iv);
            widest = iv.length();
        }
    }
    return out;
}

double measure(const std::vector<SieveInterval>& ivs) {
    double total = 0.0;
    for (const auto& iv : ivs) total += iv.length();
    return total;
}

}  // namespace

SieveReport resonance_intervals(const SieveConfig& cfg) {
    cfg.validate();
    const int k_max = cfg.effective_k_max();
    SieveReport report;
    std::vector<SieveInterval> level_one;
    for (int level = 1; level <= cfg.levels; ++level) {
        const double gamma_l = cfg.gamma * std::pow(static_cast<double>(level), -cfg.mu);
        std::vector<SieveInterval> raw;
        for (int n = 1; n <= cfg.n_max; ++n)
            for (int m = 0; m < n; ++m)
                for (int k = 1; k <= k_max; ++k) {
                    auto f = [&](double w) { return w * k + cfg.energy(m, w) - cfg.energy(n, w); };
                    const double bound = gamma_l * std::pow(static_cast<double>(k + n - m), -cfg.sigma);
                    const auto hit = solve_band(f, bound, cfg.omega_lo, cfg.omega_hi);
                    if (!hit) continue;
                    raw.push_back({hit->first, hit->second, k, m, n, level});
                    if (k == k_max || n == cfg.n_max) report.truncation_warning = true;
                }
        auto merged = merge(std::move(raw));
        report.level_measure.push_back(measure(merged));
        if (level == 1) level_one = std::move(merged);
    }
    // gamma_l decreases with l, so the level sets are nested and the union is level 1.
    report.excluded_intervals = std::move(level_one);
    report.total_measure = measure(report.excluded_intervals);
    if (report.truncation_warning)
        report.warnings.push_back("TruncationWarning: a contributing triple touches k_max or n_max");
    return report;
}

NonresonanceVerdict is_nonresonant(double omega, const SieveReport& report) {
    NonresonanceVerdict v;
    v.truncation_warning = report.truncation_warning;
    for (const auto& iv : report.excluded_intervals)
        if (omega > iv.lo && omega < iv.hi) {
            v.pass = false;
            v.witness = iv;
            break;
        }
    return v;
}

NonresonanceVerdict is_nonresonant(double omega, const SieveConfig& cfg) {
    if (omega < cfg.omega_lo || omega > cfg.omega_hi)
        throw Error(ErrorKind::Validation, "omega outside the sieve window");
    return is_nonresonant(omega, resonance_intervals(cfg));
}

double energy_lipschitz(const SieveConfig& cfg, int samples) {
    cfg.validate();
    double worst = 0.0;
    const double h = (cfg.omega_hi - cfg.omega_lo) / std::max(samples - 1, 1);
    for (int s = 0; s + 1 < samples; ++s) {
        const double a = cfg.omega_lo + s * h, b = a + h;
        for (int n = 0; n <= cfg.n_max; ++n)
            for (int m = 0; m < n; ++m) {
                const double da = cfg.energy(n, a) - cfg.energy(m, a);
                const double db = cfg.energy(n, b) - cfg.energy(m, b);
                worst = std::max(worst, std::abs(db - da) / h);
            }
    }
    return worst;
}

RationalClass classify_rational(double omega, double L) {
    if (!(omega > 0.0) || !(L > 0.0)) throw Error(ErrorKind::Validation, "omega, L > 0");
    RationalClass out;
    const double x = omega * (L / kPi) * (L / kPi);
    out.x = x;
    constexpr long long q_max = 1000000;
    // p/q matches when it is within 1e-12 and also a best approximation far
    // better than the generic 1/q^2 of a continued fraction.
    auto matches = [x](long long p, long long q) {
        const double qd = static_cast<double>(q);
        return std::abs(x - static_cast<double>(p) / qd) <= 1e-12 * std::max(1.0, x) &&
               qd * std::abs(qd * x - static_cast<double>(p)) <= 1e-3;
    };
    long long p0 = 1, q0 = 0, p1 = static_cast<long long>(std::floor(x)), q1 = 1;
    double r = x - std::floor(x);
    std::optional<std::pair<long long, long long>> found;
    while (true) {
        if (matches(p1, q1)) {
            if (found) {
                if (found->first * q1 != p1 * found->second)
                    throw Error(ErrorKind::AmbiguousNearRational,
                                "successive convergents " + std::to_string(found->first) + "/" +
                                    std::to_string(found->second) + " and " + std::to_string(p1) +
                                    "/" + std::to_string(q1) + " both match");
                break;
            }
            found = std::make_pair(p1, q1);
        } else if (found) {
            break;
        }
        if (r < 1e-300) break;
        const double inv = 1.0 / r;
        if (!(inv < 1e18)) break;
        const auto a = static_cast<long long>(std::floor(inv));
        r = inv - std::floor(inv);
        const long long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > q_max) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    if (found) {
        out.resonant = true;
        out.p = found->first;
        out.q = found->second;
    }
    return out;
}

}  // namespace ringkam
