// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "fd_oracle.hpp"
#include "fixtures.hpp"

#include "ringkam/config.hpp"
#include "ringkam/dynamics.hpp"
#include "ringkam/floquet.hpp"
#include "ringkam/kam.hpp"
#include "ringkam/model_zoo.hpp"
#include "ringkam/resonant.hpp"
#include "ringkam/sieve.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace ringkam;
using ringkam::testing::kGoodOmega;
using ringkam::testing::Pipeline;
using ringkam::testing::ring_config;
using ringkam::testing::run_pipeline;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double time_limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit > 0.0 && secs > time_limit) {
        out.pass = false;
        out.detail += "; runtime above " + std::to_string(time_limit) + " s";
    }
    if (!out.pass) ++failures;
    std::printf("Criterion %d: %s %s (%s) [%.1f s]\n", id, out.pass ? "PASS" : "FAIL", name, out.detail.c_str(),
                secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class... Ts>
std::string cat(const Ts&... parts) {
    std::ostringstream ss;
    (ss << ... << parts);
    return ss.str();
}

ModelConfig asymptotic_config(int n_bands, int n_time) {
    ModelConfig cfg = ring_config(1.0, 0.05, n_bands, n_time);
    cfg.W.cos_coeffs = {0.0, 0.3};
    return cfg;
}

double max_rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// ---------------------------------------------------------------- criteria

Outcome neumann_limit() {
    const auto s = solve_band_spectrum(ring_config(1e-6, 0.0, 30, 4), 1);
    double err = 0.0;
    for (int n = 0; n < 30; ++n)
        for (int k = 0; k < 4; ++k) err = std::max(err, std::abs(s.energies(n, k) - n * n));
    return {err < 1e-6, fmt("max |E_n - n^2| = %.2e", err)};
}

Outcome asymptotics(const BandSpectrum& s, const ModelConfig& cfg) {
    std::vector<double> scaled(51, 0.0);
    for (int n = 10; n <= 50; ++n)
        for (int k = 0; k < s.n_time; ++k)
            scaled[static_cast<std::size_t>(n)] =
                std::max(scaled[static_cast<std::size_t>(n)],
                         (n + 1) * std::abs(s.energies(n, k) - asymptotic_model(cfg, n, s.time(k))));
    const double ref = scaled[10];
    const double worst = *std::max_element(scaled.begin() + 10, scaled.end());
    return {worst <= 3.0 * ref, cat(fmt("S(10) = %.3e", ref), fmt(", max S(n) = %.3e", worst),
                                    fmt(", S(50) = %.3e", scaled[50]))};
}

Outcome fd_oracle() {
    const ModelConfig cfg = asymptotic_config(21, 8);
    const auto s = solve_band_spectrum(cfg, 1);
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
        const auto fd = ringkam::testing::fd_eigenvalues_extrapolated(cfg, cfg.phase(k), 4000, 21);
        for (int n = 0; n <= 20; ++n)
            worst = std::max(worst, max_rel_diff(fd[static_cast<std::size_t>(n)], s.energies(n, k)));
    }
    return {worst < 1e-6, fmt("worst relative difference %.2e over n <= 20, 8 times, 4000/8000 intervals", worst)};
}

Outcome gap_growth(const BandSpectrum& s, const ModelConfig& cfg) {
    const auto gap = verify_gap_growth(s, cfg.tol_eig);
    return {gap.min_ratio > 10.0 * cfg.tol_eig,
            cat(fmt("min (E_{n+1} - E_n)/(n+1) = %.4f", gap.min_ratio), " at n = ", gap.argmin_band)};
}

Outcome coupling_decay() {
    std::vector<double> sup;
    std::string detail;
    for (double g : {0.02, 0.04, 0.08}) {
        const auto p = run_pipeline(ring_config(1.0, g, 21, 32));
        double s = 0.0;
        for (int k = 0; k < 32; ++k)
            for (int n = 0; n <= 20; ++n)
                for (int m = 0; m <= 20; ++m)
                    if (n != m) s = std::max(s, std::abs(n * n - m * m) * std::abs(p.coupling(n, m, k)) / g);
        sup.push_back(s);
        detail += fmt("%.4f ", s);
    }
    const double ratio = *std::max_element(sup.begin(), sup.end()) / *std::min_element(sup.begin(), sup.end());
    return {ratio <= 3.0, "sup |n^2-m^2||A|/g at g = 0.02, 0.04, 0.08: " + detail + fmt("(spread %.3f)", ratio)};
}

Outcome floquet_assembly() {
    const int nb = 40, nf = 8;
    const auto coarse = run_pipeline(ring_config(1.0, 0.05, nb, 32));
    const auto fine = run_pipeline(ring_config(1.0, 0.05, nb, 512));
    const auto M = assemble(coarse.spectrum(), coarse.coupling, nf);
    const auto Q = assemble_by_quadrature(fine.spectrum(), fine.coupling, M.layout);
    const double herm = (M.entries - M.entries.adjoint()).cwiseAbs().maxCoeff();
    const double diff = (M.entries - Q).cwiseAbs().maxCoeff();
    return {herm < 1e-10 && diff < 1e-9 && M.dim() <= 2000,
            cat("dim ", M.dim(), fmt(", Hermitian defect %.1e", herm), fmt(", vs 16x quadrature %.2e", diff))};
}

struct KamFixture {
    Pipeline pipe;
    FloquetMatrix M;
    KamReport report;
};

KamFixture kam_fixture(double g) {
    KamFixture f{run_pipeline(ring_config(kGoodOmega, g, 20, 32)), {}, {}};
    f.M = assemble(f.pipe.spectrum(), f.pipe.coupling, 2 + kGuard, 12 + kGuard);
    KamSchedule sch;
    sch.gamma = 1e-3;
    f.report = run(f.M, sch);
    return f;
}

Outcome kam_vs_dense(const KamFixture& f) {
    const auto verdict = is_nonresonant(kGoodOmega, ringkam::testing::surrogate_sieve(f.pipe.cfg, 1e-3));
    const auto& r = f.report;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(f.M.entries);
    VectorXd ours = r.eigenvalues;
    std::sort(ours.data(), ours.data() + ours.size());
    const int dim = f.M.dim();
    const int lo = dim / 5, hi = dim - dim / 5;
    double err = 0.0;
    for (int i = lo; i < hi; ++i) err = std::max(err, std::abs(ours(i) - es.eigenvalues()(i)));
    // Contraction inequality with the fitted K on every step past the significant bands.
    const double floor = 1e-9;
    int checked = 0;
    bool holds = std::isfinite(r.contraction_K);
    for (std::size_t n = static_cast<std::size_t>(std::max(r.significant_band, 1)); n < r.offdiag_history.size(); ++n) {
        const double prev = r.offdiag_history[n - 1], next = r.offdiag_history[n];
        if (prev <= floor || next <= floor) continue;
        ++checked;
        holds = holds && next <= r.contraction_K * prev * prev * (1.0 + 1e-12) + r.added_history[n - 1] + 1e-15;
    }
    const double K_all = fit_contraction(r, 1, floor);
    return {verdict.pass && r.converged && r.final_offdiag < 1e-8 && err < 1e-7 && holds,
            cat("sieve ", verdict.pass ? "pass" : "fail", ", dim ", dim, ", steps ", r.steps,
                fmt(", offdiag %.1e", r.final_offdiag), fmt(", inner-60%% eigenvalue error %.1e", err),
                fmt(", K = %.3g", r.contraction_K), " over ", checked, " steps past band ", r.significant_band,
                fmt(", K from step 1 = %.3g", K_all))};
}

Outcome eigenvector_decay(const KamFixture& f) {
    const auto prof = decay_profile(f.report.eigenvectors, f.M.layout);
    return {prof.exponent <= -2.0, fmt("fitted exponent %.2f", prof.exponent)};
}

Outcome sieve_scaling() {
    auto measure = [](double gamma) {
        SieveConfig s;
        s.gamma = gamma;
        s.energy = [](int n, double omega) { return static_cast<double>(n) * n + omega / 2.0; };
        return resonance_intervals(s).total_measure;
    };
    const double a = measure(1e-4), b = measure(1e-3);
    const double ratio = b / a;
    return {std::abs(ratio / 10.0 - 1.0) <= 0.25,
            cat(fmt("measure(1e-4) = %.4e", a), fmt(", measure(1e-3) = %.4e", b), fmt(", ratio %.3f", ratio))};
}

Outcome bounded_energy(const DrivenGenerator& gen, VectorXcd psi0, double tail_threshold, int n_periods,
                       const std::string& label) {
    EvolutionConfig ec;
    ec.n_periods = n_periods;
    ec.initial_state = std::move(psi0);
    ec.tail_thresholds = {tail_threshold};
    ec.record_every = 16;
    const auto tr = propagate(ec, gen);
    const double T = gen.period();
    const double early = tr.max_energy(0.0, 10.0 * T);
    const double all = tr.max_energy(0.0, n_periods * T);
    const double tail = *std::max_element(tr.tails[0].begin(), tr.tails[0].end());
    const double defect = *std::max_element(tr.unitarity_defect.begin(), tr.unitarity_defect.end());
    return {all <= 1.1 * early && tail < 0.01,
            cat(label, fmt("sup energy / early max = %.6f", all / early), fmt(", max tail %.2e", tail),
                fmt(", norm defect %.1e", defect))};
}

Outcome energy_boundedness() {
    const double omega = kGoodOmega;
    const auto pipe = run_pipeline(ring_config(omega, 0.05, 24, 64));
    const auto verdict = is_nonresonant(omega, ringkam::testing::surrogate_sieve(pipe.cfg, 1e-3));
    const int nb = 20;
    const auto gen = moving_basis_generator(pipe.spectrum(), pipe.coupling, nb);
    VectorXcd psi0 = VectorXcd::Zero(nb);
    psi0(1) = 1.0;
    auto out = bounded_energy(gen, psi0, pipe.spectrum().mean_energy(nb - 5), 1000,
                              "g = 0.05, band 1, 20 bands, 1000 periods: ");
    out.pass = out.pass && verdict.pass;
    return out;
}

Outcome factorization(const KamFixture& f2, const KamFixture& f4) {
    const int nb = 8;
    double err = 0.0;
    std::vector<double> C;
    for (const KamFixture* f : {&f2, &f4}) {
        const auto dec = build_floquet_decomposition(f->report, 2, nb, kGoodOmega, 16);
        const auto gen = moving_basis_generator(f->pipe.spectrum(), f->pipe.coupling, nb);
        EvolutionConfig ec;
        ec.n_periods = 10;
        ec.steps_per_period = 1024;
        ec.record_every = 128;
        for (int j = 0; j < 3; ++j) {
            ec.initial_state = VectorXcd::Zero(nb);
            ec.initial_state(j) = 1.0;
            const auto tr = propagate(ec, gen, true);
            for (std::size_t s = 0; s < tr.times.size(); ++s)
                err = std::max(err, (dec.propagator(tr.times[s]) * ec.initial_state - tr.states[s]).norm());
        }
        double sup = 0.0;
        for (int m = 0; m < nb; ++m)
            sup = std::max(sup, std::abs(dec.quasi_energies(m) - f->pipe.spectrum().mean_energy(m)));
        C.push_back(sup / f->pipe.cfg.g);
    }
    const double spread = std::max(C[0], C[1]) / std::min(C[0], C[1]);
    return {err < 1e-4 && spread <= 3.0,
            cat(fmt("state error %.2e over 10 periods", err), fmt(", sup|e - <E>|/g = %.4f", C[0]),
                fmt(" (g = 0.02), %.4f (g = 0.04)", C[1]))};
}

Outcome resonant_case() {
    const ModelConfig base = ring_config(2.0, 0.05, 20, 64);
    std::vector<ResonantReport> reps;
    for (int nb : {20, 40, 80}) {
        ModelConfig cfg = base;
        cfg.n_bands = nb;
        const auto p = run_pipeline(cfg);
        const auto gen = moving_basis_generator(p.spectrum(), p.coupling);
        const auto pm = floquet_eigenphases(gen, 16 * nb);
        reps.push_back(essential_spectrum_check(cfg, p.spectrum(), p.coupling, pm, nb));
    }
    const auto& r40 = reps[1];
    const auto& r80 = reps[2];
    // Per-band distances over the bulk of the smaller run.
    double stab = 0.0;
    for (int n = r40.bulk_lo; n < r40.bulk_hi; ++n)
        stab = std::max(stab, max_rel_diff(r40.distance(n), r80.distance(n)));
    bool decreasing = true;
    for (std::size_t i = 1; i < r80.decile_median.size(); ++i)
        decreasing = decreasing && r80.decile_median[i] <= r80.decile_median[i - 1] * 1.05;
    const double c1 = std::abs(reps[1].hs_norm - reps[0].hs_norm) / reps[1].hs_norm;
    const double c2 = std::abs(reps[2].hs_norm - reps[1].hs_norm) / reps[2].hs_norm;
    const bool pass = r40.pass && r80.pass && r80.decay_exponent <= -1.0 && decreasing && stab <= 0.10 &&
                      c1 < 0.10 && c2 < 0.05 && c2 <= c1;
    return {pass, cat("clustering ", r80.pass ? "pass" : "fail", fmt(", decile exponent %.2f", r80.decay_exponent),
                      decreasing ? ", deciles decreasing" : ", deciles not decreasing",
                      fmt(", distance change 40->80 %.2e", stab),
                      fmt(", HS %.5f", reps[0].hs_norm), fmt("/%.5f", reps[1].hs_norm), fmt("/%.5f", reps[2].hs_norm),
                      fmt(" (steps %.2e", c1), fmt(", %.2e)", c2))};
}

Outcome abstract_model() {
    const double omega = kGoodOmega;
    const auto model = synthesize(1.0, 2.0, 0.02, 3.0, 1, 24, 1, 2.0);
    KamSchedule sch;
    sch.gamma = 1e-3;
    const auto rep = run(abstract_floquet_matrix(model, omega, 6), sch);
    const auto gen = abstract_generator(model, omega);
    VectorXcd psi0 = VectorXcd::Zero(24);
    psi0(1) = 1.0;
    auto out = bounded_energy(gen, psi0, model.energies(24 - 5), 1000, "");
    out.pass = out.pass && rep.converged;
    out.detail = cat("KAM ", rep.converged ? "converged" : "failed", " in ", rep.steps, " steps (dim ",
                     rep.layout.dim(), "), ", out.detail);
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = "\"" RINGKAM_CLI "\" " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome reproducibility() {
    namespace fs = std::filesystem;
    const fs::path root = fs::current_path() / "acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "run.ini";
    std::ofstream(cfg) << "[model]\nomega = " << format_double(kGoodOmega)
                       << "\ng = 0.02\nn_bands = 20\nn_time = 32\n"
                          "[floquet]\nn_fourier = 2\nn_bands = 12\n"
                          "[kam]\ngamma = 1e-3\n"
                          "[evolve]\nn_periods = 10\nn_bands = 8\nsteps_per_period = 256\n"
                          "[resonant]\nn_bands = 12\n"
                          "[sweep]\nalphas = 1, 0.5\nomegas = "
                       << format_double(kGoodOmega) << "\nn_levels = 10\nn_periods = 50\n";
    int files = 0;
    std::string failed;
    for (const std::string sub : {"spectrum", "floquet", "kam", "sieve", "evolve", "resonant", "sweep"}) {
        const fs::path a = root / (sub + "_a"), b = root / (sub + "_b");
        std::string extra = sub == "resonant" ? " --override omega=2" : "";
        if (run_cli(sub + " --config " + cfg.string() + extra + " --out " + a.string()) != 0 ||
            run_cli("--from-manifest " + (a / "manifest.json").string() + " --out " + b.string()) != 0) {
            failed += sub + "(exit) ";
            continue;
        }
        for (const auto& entry : fs::directory_iterator(a)) {
            const auto name = entry.path().filename();
            if (name == "manifest.json") continue;
            ++files;
            if (!fs::exists(b / name) || slurp(entry.path()) != slurp(b / name)) failed += sub + "/" + name.string() + " ";
        }
    }
    return {failed.empty() && files > 0,
            cat(files, " output files over 7 subcommands", failed.empty() ? " identical" : ", differing: " + failed)};
}

}  // namespace

int main() {
    const ModelConfig cfg2 = asymptotic_config(51, 64);
    BandSpectrum spec2;
    criterion(1, "Neumann limit", 10.0, neumann_limit);
    criterion(2, "large-n eigenvalue asymptotics", 0.0, [&] {
        spec2 = solve_band_spectrum(cfg2, 1);
        return asymptotics(spec2, cfg2);
    });
    criterion(3, "finite-difference oracle", 120.0, fd_oracle);
    criterion(4, "gap growth", 0.0, [&] { return gap_growth(spec2, cfg2); });
    criterion(5, "coupling decay", 0.0, coupling_decay);
    criterion(6, "Floquet assembly", 60.0, floquet_assembly);

    KamFixture f2, f4;
    criterion(7, "KAM vs dense eigensolver", 0.0, [&] {
        f2 = kam_fixture(0.02);
        return kam_vs_dense(f2);
    });
    criterion(8, "eigenvector decay", 0.0, [&] { return eigenvector_decay(f2); });
    criterion(9, "sieve measure scaling", 0.0, sieve_scaling);
    criterion(10, "energy boundedness", 600.0, energy_boundedness);
    criterion(11, "factorization consistency", 0.0, [&] {
        f4 = kam_fixture(0.04);
        return factorization(f2, f4);
    });
    criterion(12, "resonant clustering", 0.0, resonant_case);
    criterion(13, "abstract growing-gap model", 0.0, abstract_model);
    criterion(14, "reproducibility from manifest", 0.0, reproducibility);

    std::printf("%d of 14 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
