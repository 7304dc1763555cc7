#include "ringkam/kam.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ringkam {

namespace {

double max_abs(const MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double offdiag_max(const MatrixXcd& m) {
    double s = 0.0;
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i)
            if (i != j) s = std::max(s, std::abs(m(i, j)));
    return s;
}

double divisor_bound(double gamma, double sigma, int distance) {
    return gamma * std::pow(std::max(distance, 1), -sigma);
}

}  // namespace

MatrixXcd band_part(const MatrixXcd& M, const FloquetLayout& layout, int d) {
    MatrixXcd out = MatrixXcd::Zero(M.rows(), M.cols());
    for (int j = 0; j < M.cols(); ++j)
        for (int i = 0; i < M.rows(); ++i)
            if (layout.distance(i, j) == d) out(i, j) = M(i, j);
    return out;
}

MatrixXcd band_sum(const MatrixXcd& M, const FloquetLayout& layout, int n) {
    MatrixXcd out = MatrixXcd::Zero(M.rows(), M.cols());
    for (int j = 0; j < M.cols(); ++j)
        for (int i = 0; i < M.rows(); ++i)
            if (layout.distance(i, j) <= n) out(i, j) = M(i, j);
    return out;
}

ResonanceWitness interpret(const ResonanceHit& hit, const FloquetLayout& layout) {
    return {layout.j1(hit.i) - layout.j1(hit.j), layout.j2(hit.i), layout.j2(hit.j), hit.divisor};
}

GeneratorResult generator(const MatrixXcd& M, const FloquetLayout& layout, double gamma_n,
                          double sigma, double significance) {
    const int dim = static_cast<int>(M.rows());
    GeneratorResult out;
    out.W = MatrixXcd::Zero(dim, dim);
    out.divisor_floor = std::numeric_limits<double>::infinity();
    int active = 0;
    MatrixXcd target = MatrixXcd::Zero(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) {
            if (i == j) continue;
            const double magnitude = std::abs(M(i, j));
            if (magnitude <= significance) continue;
            ++active;
            const double divisor = M(i, i).real() - M(j, j).real();
            if (std::abs(divisor) < divisor_bound(gamma_n, sigma, layout.distance(i, j))) {
                if (i < j) out.hits.push_back({i, j, divisor, magnitude});
                continue;
            }
            out.W(i, j) = M(i, j) / divisor;
            target(i, j) = M(i, j);
            out.divisor_floor = std::min(out.divisor_floor, std::abs(divisor));
        }
    if (active > 0 && out.hits.size() * 2 == static_cast<std::size_t>(active))
        throw Error(ErrorKind::AllResonant, "every significant off-diagonal entry is resonance-blocked");
    const VectorXcd d = M.diagonal();
    const MatrixXcd commutator = out.W * d.asDiagonal() - d.asDiagonal() * out.W;
    out.residual = max_abs(commutator + target);
    return out;
}

MatrixXcd conjugate(const MatrixXcd& W, const MatrixXcd& M, Conjugation method) {
    if (method == Conjugation::Exponential) {
        const MatrixXcd E = W.exp();
        return E * M * E.adjoint();
    }
    const double stop = 1e-14 * std::max(1.0, max_abs(M));
    MatrixXcd sum = M;
    MatrixXcd term = M;
    double previous = max_abs(M);
    int growth = 0;
    for (int k = 1; k <= 200; ++k) {
        term = (W * term - term * W) / static_cast<double>(k);
        const double size = max_abs(term);
        sum += term;
        if (size < stop) return sum;
        growth = size > previous ? growth + 1 : 0;
        if (growth >= 3) throw Error(ErrorKind::SeriesDivergence, "Lie-Schwinger terms grow");
        previous = size;
    }
    throw Error(ErrorKind::SeriesDivergence, "Lie-Schwinger series did not terminate");
}

KamState kam_start(const MatrixXcd& M, const FloquetLayout& layout) {
    KamState s;
    s.M = band_sum(M, layout, 1);
    s.U = MatrixXcd::Identity(M.rows(), M.cols());
    s.offdiag_history.push_back(offdiag_max(s.M));
    return s;
}

void kam_step(KamState& state, const MatrixXcd& full_M, const FloquetLayout& layout,
              const KamSchedule& schedule, double gamma) {
    const double gamma_n = gamma * std::pow(static_cast<double>(state.step), -schedule.mu);
    auto gen = generator(state.M, layout, gamma_n, schedule.sigma, 0.01 * schedule.tol_offdiag);
    const double w_norm = max_abs(gen.W);
    if (w_norm >= schedule.max_generator)
        throw Error(ErrorKind::SeriesDivergence,
                    "generator norm " + std::to_string(w_norm) + " exceeds the series safety bound");
    state.divisor_floor = std::min(state.divisor_floor, gen.divisor_floor);
    state.hits.insert(state.hits.end(), gen.hits.begin(), gen.hits.end());
    state.w_history.push_back(w_norm);

    if (w_norm > 0.0) {
        state.M = conjugate(gen.W, state.M, schedule.method);
        state.U = gen.W.exp() * state.U;
    }
    double added = 0.0;
    if (state.included_band < layout.max_distance()) {
        ++state.included_band;
        const MatrixXcd D = band_part(full_M, layout, state.included_band);
        if (max_abs(D) > 0.0) {
            const MatrixXcd rotated = state.U * D * state.U.adjoint();
            added = offdiag_max(rotated);
            state.M += rotated;
        }
    }
    state.added_history.push_back(added);
    state.M = 0.5 * (state.M + state.M.adjoint()).eval();
    state.offdiag_history.push_back(offdiag_max(state.M));
    const MatrixXcd I = MatrixXcd::Identity(state.U.rows(), state.U.cols());
    state.unitarity_defect = std::max(state.unitarity_defect, max_abs(state.U.adjoint() * state.U - I));
    if (state.unitarity_defect > schedule.tol_unitary)
        throw Error(ErrorKind::UnitarityLoss,
                    "accumulated KAM unitary defect " + std::to_string(state.unitarity_defect));
    ++state.step;
}

std::vector<int> min_cost_assignment(const MatrixXd& cost) {
    // Shortest augmenting path (Jonker-Volgenant form), 1-based potentials.
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

double fit_contraction(const KamReport& report, int from_step, double floor) {
    double K = 0.0;
    const auto& om = report.offdiag_history;
    for (std::size_t n = static_cast<std::size_t>(std::max(from_step, 1)); n < om.size(); ++n) {
        // om[n - 1] = |OM_n| (steps are 1-based), om[n] = |OM_{n+1}|.
        const double prev = om[n - 1];
        if (prev <= floor || om[n] <= floor) continue;
        const double excess = om[n] - report.added_history[n - 1];
        if (excess > 0.0) K = std::max(K, excess / (prev * prev));
    }
    return K;
}

KamReport run(const FloquetMatrix& F, const KamSchedule& schedule) {
    const FloquetLayout& layout = F.layout;
    const MatrixXcd& M = F.entries;
    auto report = std::make_shared<KamReport>();
    report->layout = layout;
    const MatrixXcd OM = off_diagonal(M);
    report->gamma = schedule.gamma > 0.0 ? schedule.gamma
                                         : std::sqrt(finite_norm(OM, layout, 0.0, schedule.sigma));
    const auto profile = decay_profile(OM, layout);
    if (profile.exponent > -2.0)
        report->warnings.push_back("off-diagonal decay exponent " + std::to_string(profile.exponent) +
                                   " above -2");
    for (std::size_t d = 1; d < profile.sup.size(); ++d)
        if (profile.sup[d] > schedule.tol_offdiag) report->significant_band = static_cast<int>(d);

    KamState state = kam_start(M, layout);
    auto finish = [&]() {
        report->steps = state.step - 1;
        report->U = state.U;
        report->eigenvectors = state.U.adjoint();
        report->final_matrix = state.M;
        report->diagonal = state.M.diagonal().real();
        report->hits = state.hits;
        report->offdiag_history = state.offdiag_history;
        report->w_history = state.w_history;
        report->added_history = state.added_history;
        report->divisor_floor = state.divisor_floor;
        report->unitarity_defect = state.unitarity_defect;
        report->final_offdiag = state.offdiag_history.back();
        const int dim = static_cast<int>(M.rows());
        // cost(c, i) = -|<e_i, column c of U^*>|^2
        MatrixXd cost = -report->eigenvectors.cwiseAbs2().transpose();
        report->label_of = min_cost_assignment(cost);
        report->eigenvalues.resize(dim);
        for (int c = 0; c < dim; ++c) report->eigenvalues(report->label_of[c]) = report->diagonal(c);
        // Entries below 0.01 tol_offdiag are never rotated away; stay clear of that floor.
        report->contraction_K = fit_contraction(*report, report->significant_band,
                                                0.1 * schedule.tol_offdiag);
    };

    const int last_band = layout.max_distance();
    bool blocked = false;
    try {
        while (state.step <= schedule.max_steps) {
            if (state.included_band >= last_band && state.offdiag_history.back() < schedule.tol_offdiag)
                break;
            kam_step(state, M, layout, schedule, report->gamma);
        }
    } catch (const Error& e) {
        finish();
        // Everything left is blocked: classify below as a resonance.
        if (e.kind() != ErrorKind::AllResonant) throw KamError(e.kind(), e.what(), {}, report);
        blocked = true;
    }
    if (!blocked) finish();
    report->converged = state.included_band >= last_band && report->final_offdiag < schedule.tol_offdiag;
    if (report->converged) return *report;

    // Blocked entries that remain significant make the failure a resonance.
    const MatrixXcd& Mf = state.M;
    ResonanceHit worst{};
    for (int j = 0; j < Mf.cols(); ++j)
        for (int i = 0; i < j; ++i) {
            const double magnitude = std::abs(Mf(i, j));
            if (magnitude < schedule.tol_offdiag || magnitude <= worst.magnitude) continue;
            const double divisor = Mf(i, i).real() - Mf(j, j).real();
            const double gamma_last = report->gamma * std::pow(static_cast<double>(state.step), -schedule.mu);
            if (std::abs(divisor) < divisor_bound(gamma_last, schedule.sigma, layout.distance(i, j)))
                worst = {i, j, divisor, magnitude};
        }
    if (worst.magnitude > 0.0) {
        const auto w = interpret(worst, layout);
        throw KamError(ErrorKind::Resonant,
                       "small divisor at k=" + std::to_string(w.k) + " n=" + std::to_string(w.n) +
                           " m=" + std::to_string(w.m),
                       w, report);
    }
    throw KamError(ErrorKind::NotConverged,
                   "off-diagonal max " + std::to_string(report->final_offdiag) + " after " +
                       std::to_string(report->steps) + " steps",
                   {}, report);
}

}  // namespace ringkam
