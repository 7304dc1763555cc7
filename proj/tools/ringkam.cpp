// ringkam: Command-line front end.
//
//   ringkam <spectrum|floquet|kam|sieve|evolve|resonant|sweep> [--config PATH] [--out DIR]
//           [--threads N] [--seed N] [--override section.key=value ...]
//   ringkam --from-manifest DIR/manifest.json [--out DIR]
//
// Exit codes: 0 pass, 2 analysis failure (Resonant, NotConverged, AllResonant,
// NotResonant), 1 any other error. Errors leave only error.json behind.

#include "output.hpp"

#include "ringkam/config.hpp"
#include "ringkam/dynamics.hpp"
#include "ringkam/floquet.hpp"
#include "ringkam/kam.hpp"
#include "ringkam/model_zoo.hpp"
#include "ringkam/resonant.hpp"
#include "ringkam/sieve.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

#ifndef RINGKAM_VERSION
#define RINGKAM_VERSION "0.0.0"
#endif

namespace rk = ringkam;
using rk::cli::json;
using rk::cli::OutputSet;

namespace {

constexpr int kSchemaVersion = 1;

std::string csv_line(std::initializer_list<double> xs) {
    std::string s;
    bool first = true;
    for (double x : xs) {
        if (!first) s += ',';
        s += rk::format_double(x);
        first = false;
    }
    return s + "\n";
}

json witness_json(const rk::ResonanceWitness& w) {
    return {{"k", w.k}, {"n", w.n}, {"m", w.m}, {"divisor", w.divisor}};
}

json vec_json(const rk::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct CellData {
    rk::PhaseFixedBasis basis;
    rk::CouplingTensor coupling;
};

CellData cell_data(const rk::ModelConfig& m, int threads) {
    auto spectrum = rk::solve_band_spectrum(m, threads);
    auto basis = rk::phase_fixed_eigenbasis(m, spectrum, threads);
    auto coupling = rk::coupling_matrix(m, basis);
    return {std::move(basis), std::move(coupling)};
}

rk::SieveConfig sieve_config(const rk::RunConfig& cfg) {
    rk::SieveConfig s;
    s.omega_lo = cfg.sieve.omega_lo;
    s.omega_hi = cfg.sieve.omega_hi;
    s.gamma = cfg.sieve.gamma;
    s.sigma = cfg.sieve.sigma;
    s.mu = cfg.sieve.mu;
    s.levels = cfg.sieve.levels;
    s.n_max = cfg.sieve.n_max;
    s.k_max = cfg.sieve.k_max;
    if (cfg.sieve.energy == "quadratic")
        s.energy = [](int n, double w) { return static_cast<double>(n) * n + 0.5 * w; };
    else
        s.energy = rk::surrogate_energy(cfg.model);
    return s;
}

// ------------------------------------------------------------------ commands

int cmd_spectrum(const rk::RunConfig& cfg, int threads, OutputSet& out) {
    const auto& m = cfg.model;
    auto spectrum = rk::solve_band_spectrum(m, threads);
    auto basis = rk::phase_fixed_eigenbasis(m, spectrum, threads);
    const auto& s = basis.spectrum;
    std::string energies = "n,k,t,E\n", traces = "n,k,re_psi0,im_psi0,re_psiL,im_psiL\n";
    double asym = 0.0;
    for (int n = 0; n < s.n_bands; ++n)
        for (int k = 0; k < s.n_time; ++k) {
            energies += std::to_string(n) + "," + std::to_string(k) + "," +
                        csv_line({s.time(k), s.energies(n, k)});
            traces += std::to_string(n) + "," + std::to_string(k) + "," +
                      csv_line({s.traces0(n, k).real(), s.traces0(n, k).imag(), s.tracesL(n, k).real(),
                                s.tracesL(n, k).imag()});
            if (n >= 10)
                asym = std::max(asym, (n + 1) * std::abs(s.energies(n, k) - rk::asymptotic_model(m, n, s.time(k))));
        }
    const auto gap = rk::verify_gap_growth(s, m.tol_eig);
    out.add("energies.csv", energies);
    out.add("traces.csv", traces);
    out.add_json("spectrum_report.json",
                 {{"schema_version", kSchemaVersion},
                  {"n_bands", s.n_bands},
                  {"n_time", s.n_time},
                  {"reference_energies", vec_json(s.reference_energies)},
                  {"gap", {{"min_ratio", gap.min_ratio}, {"argmin_band", gap.argmin_band},
                           {"argmin_time", gap.argmin_time}, {"pass", gap.pass}}},
                  {"asymptotic_residual_sup_scaled", asym}});
    return 0;
}

int cmd_floquet(const rk::RunConfig& cfg, int threads, OutputSet& out) {
    const auto data = cell_data(cfg.model, threads);
    const int nf = cfg.floquet.n_fourier, nb = cfg.floquet_inner_bands();
    const auto full = rk::assemble(data.basis.spectrum, data.coupling, nf + rk::kGuard, nb + rk::kGuard);
    const auto M = rk::inner_block(full, nf, nb);
    const auto OM = rk::off_diagonal(M.entries);
    const auto profile = rk::decay_profile(OM, M.layout);
    std::ostringstream csv;
    rk::write_csv(csv, M.entries);
    out.add("floquet_matrix.csv", csv.str());
    out.add_json("floquet_report.json",
                 {{"schema_version", kSchemaVersion},
                  {"flattening", "idx = (j1 + n_fourier) * n_bands + j2"},
                  {"n_fourier", nf},
                  {"n_bands", nb},
                  {"dim", M.dim()},
                  {"guard", rk::kGuard},
                  {"hermiticity_defect", full.hermiticity_defect},
                  {"symmetrization_correction", full.symmetrization_correction},
                  {"coupling_symmetrization_defect", data.coupling.symmetrization_defect},
                  {"decay_profile", profile.sup},
                  {"decay_exponent", profile.exponent},
                  {"finite_norm_offdiag_r0_sigma", rk::finite_norm(OM, M.layout, 0.0, cfg.kam.sigma)},
                  {"diag_model", vec_json(M.diag_model)}});
    return 0;
}

json kam_json(const rk::KamReport& r) {
    json hits = json::array();
    for (const auto& h : r.hits) {
        const auto w = rk::interpret(h, r.layout);
        hits.push_back({{"i", h.i}, {"j", h.j}, {"k", w.k}, {"n", w.n}, {"m", w.m},
                        {"divisor", h.divisor}, {"magnitude", h.magnitude}});
    }
    return {{"schema_version", kSchemaVersion},
            {"converged", r.converged},
            {"steps", r.steps},
            {"gamma", r.gamma},
            {"n_fourier", r.layout.n_fourier},
            {"n_bands", r.layout.n_bands},
            {"eigenvalues", vec_json(r.eigenvalues)},
            {"final_offdiag", r.final_offdiag},
            {"divisor_floor", r.divisor_floor},
            {"unitarity_defect", r.unitarity_defect},
            {"significant_band", r.significant_band},
            {"contraction_K", r.contraction_K},
            {"resonance_hits", hits},
            {"warnings", r.warnings}};
}

std::string kam_norms_csv(const rk::KamReport& r) {
    std::string s = "step,offdiag,generator,added\n";
    for (std::size_t i = 0; i < r.w_history.size(); ++i)
        s += std::to_string(i + 1) + "," + csv_line({r.offdiag_history[i], r.w_history[i], r.added_history[i]});
    return s;
}

struct AnalysisFailure {
    rk::ErrorKind kind;
    std::string message;
    json detail;
};

int cmd_kam(const rk::RunConfig& cfg, int threads, OutputSet& out) {
    const double omega = cfg.model.omega;
    if (cfg.kam.check_sieve) {
        auto sc = sieve_config(cfg);
        if (omega <= sc.omega_lo || omega >= sc.omega_hi) {
            sc.omega_lo = 0.5 * omega;
            sc.omega_hi = 1.5 * omega;
        }
        const auto verdict = rk::is_nonresonant(omega, sc);
        if (!verdict.pass) {
            const auto& w = *verdict.witness;
            throw AnalysisFailure{rk::ErrorKind::Resonant,
                                  "omega lies in the excluded interval of (k, m, n) = (" + std::to_string(w.k) +
                                      ", " + std::to_string(w.m) + ", " + std::to_string(w.n) + ")",
                                  {{"witness", {{"k", w.k}, {"m", w.m}, {"n", w.n}}},
                                   {"interval", {w.lo, w.hi}},
                                   {"level", w.level}}};
        }
    }
    const auto data = cell_data(cfg.model, threads);
    const int nf = cfg.floquet.n_fourier, nb = cfg.floquet_inner_bands();
    const auto M = rk::assemble(data.basis.spectrum, data.coupling, nf + rk::kGuard, nb + rk::kGuard);
    try {
        const auto report = rk::run(M, cfg.kam_schedule());
        out.add_json("kam_report.json", kam_json(report));
        out.add("kam_norms.csv", kam_norms_csv(report));
    } catch (const rk::KamError& e) {
        json detail = {{"report", kam_json(e.report())}};
        if (e.kind() == rk::ErrorKind::Resonant) detail["witness"] = witness_json(e.witness());
        throw AnalysisFailure{e.kind(), e.what(), detail};
    }
    return 0;
}

int cmd_sieve(const rk::RunConfig& cfg, int, OutputSet& out) {
    const auto sc = sieve_config(cfg);
    const auto rep = rk::resonance_intervals(sc);
    std::string csv = "lo,hi,k,m,n,level\n";
    for (const auto& iv : rep.excluded_intervals)
        csv += rk::format_double(iv.lo) + "," + rk::format_double(iv.hi) + "," + std::to_string(iv.k) + "," +
               std::to_string(iv.m) + "," + std::to_string(iv.n) + "," + std::to_string(iv.level) + "\n";
    json j = {{"schema_version", kSchemaVersion},
              {"window", {sc.omega_lo, sc.omega_hi}},
              {"gamma", sc.gamma},
              {"sigma", sc.sigma},
              {"mu", sc.mu},
              {"k_max", sc.effective_k_max()},
              {"n_max", sc.n_max},
              {"interval_count", rep.excluded_intervals.size()},
              {"total_measure", rep.total_measure},
              {"level_measure", rep.level_measure},
              {"truncation_warning", rep.truncation_warning},
              {"lipschitz_constant", rk::energy_lipschitz(sc, 64)}};
    const double omega = cfg.model.omega;
    if (omega > sc.omega_lo && omega < sc.omega_hi) {
        const auto v = rk::is_nonresonant(omega, rep);
        json verdict = {{"omega", omega}, {"pass", v.pass}};
        if (v.witness) verdict["witness"] = {{"k", v.witness->k}, {"m", v.witness->m}, {"n", v.witness->n}};
        j["model_omega"] = verdict;
    }
    out.add("sieve_intervals.csv", csv);
    out.add_json("sieve_report.json", j);
    return 0;
}

int cmd_evolve(const rk::RunConfig& cfg, int threads, OutputSet& out) {
    const auto data = cell_data(cfg.model, threads);
    const int nb = cfg.evolve.n_bands > 0 ? cfg.evolve.n_bands : cfg.model.n_bands;
    const auto gen = rk::moving_basis_generator(data.basis.spectrum, data.coupling, nb);
    rk::EvolutionConfig ec;
    ec.n_periods = cfg.evolve.n_periods;
    ec.steps_per_period = cfg.evolve.steps_per_period;
    ec.initial_state = rk::VectorXcd::Zero(nb);
    ec.initial_state(cfg.evolve.initial_band) = 1.0;
    ec.tail_thresholds = cfg.evolve.tail_thresholds;
    if (ec.tail_thresholds.empty()) ec.tail_thresholds.push_back(data.basis.spectrum.mean_energy(std::max(0, nb - 5)));
    const int S = ec.steps(nb);
    ec.record_every = cfg.evolve.record_every > 0 ? cfg.evolve.record_every : std::max(1, S / 16);
    ec.tol_unitary = cfg.model.tol_unitary;
    const auto trace = rk::propagate(ec, gen);

    std::string csv = "t,energy";
    for (std::size_t r = 0; r < ec.tail_thresholds.size(); ++r) csv += ",tail_" + std::to_string(r);
    csv += ",defect\n";
    double max_tail = 0.0, max_defect = 0.0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        csv += rk::format_double(trace.times[i]) + "," + rk::format_double(trace.energy[i]);
        for (const auto& tail : trace.tails) {
            csv += "," + rk::format_double(tail[i]);
            max_tail = std::max(max_tail, tail[i]);
        }
        csv += "," + rk::format_double(trace.unitarity_defect[i]) + "\n";
        max_defect = std::max(max_defect, trace.unitarity_defect[i]);
    }
    const double T = gen.period();
    const double early = trace.max_energy(0.0, std::min(10, ec.n_periods) * T);
    const double all = *std::max_element(trace.energy.begin(), trace.energy.end());
    out.add("energy_trace.csv", csv);
    out.add_json("evolve_report.json", {{"schema_version", kSchemaVersion},
                                        {"n_bands", nb},
                                        {"steps_per_period", S},
                                        {"n_periods", ec.n_periods},
                                        {"tail_thresholds", ec.tail_thresholds},
                                        {"max_energy", all},
                                        {"max_energy_first_10_periods", early},
                                        {"energy_ratio", all / early},
                                        {"max_tail", max_tail},
                                        {"max_unitarity_defect", max_defect}});
    return 0;
}

int cmd_resonant(const rk::RunConfig& cfg, int threads, OutputSet& out) {
    const auto cls = rk::classify_rational(cfg.model.omega, cfg.model.L);
    if (!cls.resonant)
        throw AnalysisFailure{rk::ErrorKind::NotResonant, "omega (L/pi)^2 is not detected as rational",
                              {{"x", cls.x}}};
    const auto data = cell_data(cfg.model, threads);
    const int nb = cfg.resonant.n_bands > 0 ? cfg.resonant.n_bands : cfg.model.n_bands;
    const auto gen = rk::moving_basis_generator(data.basis.spectrum, data.coupling, nb);
    const int S = cfg.resonant.steps_per_period > 0 ? cfg.resonant.steps_per_period : std::max(16 * nb, 256);
    const auto pm = rk::floquet_eigenphases(gen, S, cfg.model.tol_unitary);
    const auto rep = rk::essential_spectrum_check(cfg.model, data.basis.spectrum, data.coupling, pm, nb);
    std::string csv = "n,predicted_arg,computed_arg,distance\n";
    for (int n = 0; n < nb; ++n)
        csv += std::to_string(n) + "," +
               csv_line({std::arg(rep.predicted_phases(n)), std::arg(rep.computed_phases(n)), rep.distance(n)});
    out.add("clustering.csv", csv);
    out.add_json("resonant_report.json", {{"schema_version", kSchemaVersion},
                                          {"omega", rep.omega},
                                          {"p", rep.p},
                                          {"q", rep.q},
                                          {"n_bands", nb},
                                          {"distance", vec_json(rep.distance)},
                                          {"decile_centers", rep.decile_centers},
                                          {"decile_median", rep.decile_median},
                                          {"decay_exponent", rep.decay_exponent},
                                          {"residual_scale", rep.residual_scale},
                                          {"median_distance", rep.median_distance},
                                          {"median_band", rep.median_band},
                                          {"hs_norm", rep.hs_norm},
                                          {"pass", rep.pass}});
    return 0;
}

int cmd_sweep(const rk::RunConfig& cfg, int threads, OutputSet& out) {
    rk::SweepConfig sc;
    sc.c = cfg.sweep.c;
    sc.tau = cfg.sweep.tau;
    sc.seed = cfg.sweep.seed;
    sc.n_levels = cfg.sweep.n_levels;
    sc.n_periods = cfg.sweep.n_periods;
    sc.gamma = cfg.sweep.gamma;
    const auto rows = rk::alpha_sweep(cfg.sweep.alphas, cfg.sweep.g, cfg.sweep.omegas, sc, threads);
    std::string csv = "alpha,omega,sieve_pass,bounded,max_energy_ratio,out_of_theory\n";
    for (const auto& r : rows)
        csv += rk::format_double(r.alpha) + "," + rk::format_double(r.omega) + "," + (r.sieve_pass ? "1" : "0") +
               "," + (r.bounded ? "1" : "0") + "," + rk::format_double(r.max_energy_ratio) + "," +
               (r.out_of_theory ? "1" : "0") + "\n";
    out.add("sweep.csv", csv);
    return 0;
}

using Command = int (*)(const rk::RunConfig&, int, OutputSet&);

std::optional<Command> command_for(const std::string& name) {
    if (name == "spectrum") return cmd_spectrum;
    if (name == "floquet") return cmd_floquet;
    if (name == "kam") return cmd_kam;
    if (name == "sieve") return cmd_sieve;
    if (name == "evolve") return cmd_evolve;
    if (name == "resonant") return cmd_resonant;
    if (name == "sweep") return cmd_sweep;
    return std::nullopt;
}

void write_error(const std::filesystem::path& dir, const std::string& kind, const std::string& message,
                 const json& detail) {
    json j = {{"schema_version", kSchemaVersion}, {"error", kind}, {"message", message}};
    if (!detail.is_null()) j["detail"] = detail;
    std::cerr << "ringkam: " << kind << ": " << message << "\n";
    try {
        std::filesystem::create_directories(dir);
        rk::cli::atomic_write(dir / "error.json", j.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "ringkam: could not write error.json: " << e.what() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven ring cell: spectra, Floquet matrices, KAM diagonalization and dynamics"};
    app.set_version_flag("--version", RINGKAM_VERSION);
    std::string config_path, out_dir, manifest_path;
    int threads = 1;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    app.add_option("--from-manifest", manifest_path, "Rerun the subcommand recorded in a manifest");
    const std::vector<std::string> names{"spectrum", "floquet", "kam", "sieve", "evolve", "resonant", "sweep"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name, "Run the " + name + " module");
        sub->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (default $RINGKAM_OUT or ./ringkam_out)");
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed for synthesized models");
        sub->add_option("--override", overrides, "section.key=value, repeatable");
    }
    app.add_option("--out", out_dir, "Output directory for --from-manifest");
    app.add_option("--threads", threads, "Worker threads for --from-manifest")->check(CLI::PositiveNumber);
    app.require_subcommand(0, 1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (out_dir.empty()) {
        const char* env = std::getenv("RINGKAM_OUT");
        out_dir = env != nullptr && *env != '\0' ? env : "ringkam_out";
    }
    const std::filesystem::path dir(out_dir);

    try {
        std::string subcommand, config_text;
        json inputs = json::object();
        if (!manifest_path.empty()) {
            if (!app.get_subcommands().empty())
                throw rk::Error(rk::ErrorKind::Validation, "--from-manifest takes no subcommand");
            const json manifest = json::parse(rk::cli::read_file(manifest_path));
            subcommand = manifest.at("subcommand").get<std::string>();
            config_text = manifest.at("config").get<std::string>();
            if (app.count("--threads") == 0) threads = manifest.value("threads", 1);
            inputs["manifest"] = {{"path", manifest_path}, {"sha256", rk::cli::sha256_hex(rk::cli::read_file(manifest_path))}};
        } else {
            if (app.get_subcommands().empty())
                throw rk::Error(rk::ErrorKind::Validation, "a subcommand is required");
            subcommand = app.get_subcommands().front()->get_name();
            if (!config_path.empty()) {
                config_text = rk::cli::read_file(config_path);
                inputs["config"] = {{"path", config_path}, {"sha256", rk::cli::sha256_hex(config_text)}};
            }
        }
        auto cfg = rk::parse_config(config_text);
        for (const auto& o : overrides) rk::apply_override(cfg, o);
        if (seed) rk::apply_override(cfg, "sweep.seed=" + std::to_string(*seed));
        rk::set_default_threads(threads);

        const auto command = command_for(subcommand);
        if (!command) throw rk::Error(rk::ErrorKind::Validation, "unknown subcommand " + subcommand);
        OutputSet out;
        int code = 0;
        try {
            code = (*command)(cfg, threads, out);
        } catch (const AnalysisFailure& f) {
            write_error(dir, std::string(rk::to_string(f.kind)), f.message, f.detail);
            return 2;
        }
        const std::string resolved = rk::serialize_config(cfg);
        json manifest = {{"schema_version", kSchemaVersion},
                         {"tool", "ringkam"},
                         {"tool_version", RINGKAM_VERSION},
                         {"subcommand", subcommand},
                         {"config", resolved},
                         {"threads", threads},
                         {"seed", cfg.sweep.seed},
                         {"inputs", inputs},
                         {"timestamp", rk::cli::utc_timestamp()}};
        out.commit(dir, manifest);
        return code;
    } catch (const rk::ResonanceError& e) {
        write_error(dir, std::string(rk::to_string(e.kind())), e.what(), {{"witness", witness_json(e.witness())}});
        return rk::is_analysis_failure(e.kind()) ? 2 : 1;
    } catch (const rk::Error& e) {
        write_error(dir, std::string(rk::to_string(e.kind())), e.what(), nullptr);
        return rk::is_analysis_failure(e.kind()) ? 2 : 1;
    } catch (const json::exception& e) {
        write_error(dir, "ParseError", std::string("manifest: ") + e.what(), nullptr);
        return 1;
    } catch (const std::exception& e) {
        write_error(dir, "Error", e.what(), nullptr);
        return 1;
    }
}
