#include "fixtures.hpp"

#include "ringkam/kam.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace ringkam;
using ringkam::testing::kGoodOmega;
using ringkam::testing::ring_config;
using ringkam::testing::run_pipeline;

namespace {

MatrixXcd random_hermitian(int n, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(nd(rng), nd(rng));
    return scale * (A + A.adjoint()) / 2.0;
}

FloquetMatrix synthetic(const MatrixXcd& entries, const FloquetLayout& layout) {
    FloquetMatrix M;
    M.layout = layout;
    M.entries = entries;
    M.omega = 1.0;
    return M;
}

}  // namespace

TEST_CASE("band parts partition the matrix") {
    FloquetLayout lay{1, 4};
    const MatrixXcd M = random_hermitian(lay.dim(), 3, 1.0);
    MatrixXcd sum = MatrixXcd::Zero(lay.dim(), lay.dim());
    for (int d = 0; d <= lay.max_distance(); ++d) {
        const MatrixXcd part = band_part(M, lay, d);
        for (int i = 0; i < lay.dim(); ++i)
            for (int j = 0; j < lay.dim(); ++j)
                if (lay.distance(i, j) != d) CHECK(part(i, j) == cplx(0.0));
        sum += part;
    }
    CHECK((sum - M).cwiseAbs().maxCoeff() == 0.0);
    CHECK((band_sum(M, lay, lay.max_distance()) - M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-level generator") {
    FloquetLayout lay{0, 2};
    const cplx eps(0.01, 0.02);
    MatrixXcd M(2, 2);
    M << 1.0, eps, std::conj(eps), 3.0;
    const auto g = generator(M, lay, 1e-3, 3.0);
    CHECK(std::abs(g.W(0, 1) - eps / (1.0 - 3.0)) < 1e-15);
    CHECK(std::abs(g.W(1, 0) - std::conj(eps) / 2.0) < 1e-15);
    CHECK((g.W + g.W.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(g.residual < 1e-15);
    CHECK(g.divisor_floor == doctest::Approx(2.0));
    // One rotation leaves a second-order remainder.
    const MatrixXcd next = conjugate(g.W, M, Conjugation::Exponential);
    CHECK(std::abs(next(0, 1)) < 2.0 * std::norm(eps));
    CHECK(std::abs(next(0, 1)) > 0.0);
}

TEST_CASE("diagonal input gives a zero generator") {
    FloquetLayout lay{1, 3};
    MatrixXcd M = MatrixXcd::Zero(9, 9);
    for (int i = 0; i < 9; ++i) M(i, i) = 0.37 * i * i;
    const auto g = generator(M, lay, 1e-3, 3.0);
    CHECK(g.W.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.hits.empty());
}

TEST_CASE("fully blocked input throws AllResonant") {
    FloquetLayout lay{0, 2};
    MatrixXcd M(2, 2);
    M << 1.0, 0.1, 0.1, 1.0 + 1e-9;
    try {
        generator(M, lay, 1.0, 3.0);
        FAIL("expected AllResonant");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AllResonant);
    }
}

TEST_CASE("series and exponential conjugation agree") {
    const int n = 12;
    MatrixXcd M = random_hermitian(n, 7, 0.05);
    for (int i = 0; i < n; ++i) M(i, i) += i;
    const auto g = generator(M, FloquetLayout{0, n}, 1e-6, 3.0);
    const MatrixXcd a = conjugate(g.W, M, Conjugation::Exponential);
    const MatrixXcd b = conjugate(g.W, M, Conjugation::LieSchwinger);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    // Spectrum is preserved.
    Eigen::SelfAdjointEigenSolver<MatrixXcd> ea(a), em(M);
    CHECK((ea.eigenvalues() - em.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("minimum-cost assignment matches brute force") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 6;
        MatrixXd cost(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) cost(i, j) = u(rng);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e300;
        do {
            double c = 0.0;
            for (int i = 0; i < n; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
            best = std::min(best, c);
        } while (std::next_permutation(perm.begin(), perm.end()));
        const auto assign = min_cost_assignment(cost);
        double c = 0.0;
        std::vector<int> seen(n, 0);
        for (int i = 0; i < n; ++i) {
            c += cost(i, assign[static_cast<std::size_t>(i)]);
            ++seen[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        CHECK(c == doctest::Approx(best).epsilon(1e-12));
        CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    }
}

TEST_CASE("KAM diagonalization agrees with a dense eigensolver") {
    const auto p = run_pipeline(ring_config(kGoodOmega, 0.02, 12, 32));
    const auto M = assemble(p.spectrum(), p.coupling, 2, 8);
    KamSchedule sch;
    sch.gamma = 1e-3;
    const auto rep = run(M, sch);
    CHECK(rep.converged);
    CHECK(rep.final_offdiag <= sch.tol_offdiag);
    CHECK(rep.unitarity_defect < 1e-10);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M.entries);
    VectorXd ours = rep.eigenvalues;
    std::sort(ours.data(), ours.data() + ours.size());
    CHECK((ours - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-7);
    // Eigenvector columns: M v = lambda v.
    for (int c = 0; c < M.dim(); ++c) {
        const VectorXcd v = rep.eigenvectors.col(c);
        const double lambda = rep.eigenvalues(rep.label_of[static_cast<std::size_t>(c)]);
        CHECK((M.entries * v - lambda * v).norm() < 1e-7);
    }
    const auto prof = decay_profile(rep.eigenvectors, M.layout);
    CHECK(prof.exponent <= -2.0);
    // Small coupling: labels stay attached to their unperturbed states.
    for (int c = 0; c < M.dim(); ++c) CHECK(rep.label_of[static_cast<std::size_t>(c)] == c);
}

TEST_CASE("persistent small divisor is reported as resonant with a witness") {
    FloquetLayout lay{0, 3};
    MatrixXcd E = MatrixXcd::Zero(3, 3);
    E(0, 0) = 0.0;
    E(1, 1) = 1.0;
    E(2, 2) = 1.0 + 1e-6;
    E(0, 1) = E(1, 0) = 0.05;
    E(1, 2) = E(2, 1) = 1e-3;
    KamSchedule sch;
    sch.gamma = 0.1;
    sch.max_steps = 30;
    try {
        run(synthetic(E, lay), sch);
        FAIL("expected a resonance");
    } catch (const KamError& e) {
        CHECK(e.kind() == ErrorKind::Resonant);
        CHECK(e.witness().k == 0);
        CHECK(std::min(e.witness().n, e.witness().m) == 1);
        CHECK(std::max(e.witness().n, e.witness().m) == 2);
        CHECK(std::abs(e.witness().divisor) < 1e-2);
        CHECK(!e.report().hits.empty());
    }
}

TEST_CASE("oversized generator is a series divergence") {
    FloquetLayout lay{0, 2};
    MatrixXcd E(2, 2);
    E << 0.0, 1.0, 1.0, 0.1;
    KamSchedule sch;
    sch.gamma = 1e-3;
    try {
        run(synthetic(E, lay), sch);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SeriesDivergence);
    }
}
