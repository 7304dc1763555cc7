// config.hpp: Run configuration and its text format.
//
// Grammar: `[section]` headers, `key = value` lines, `#` starts a comment.
// Keys before the first header belong to [model]. Lists are comma separated.
// Unknown sections or keys, duplicates and malformed lines raise ParseError
// with the line number; invariant violations raise ValidationError.

#pragma once

#include "ringkam/kam.hpp"
#include "ringkam/model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ringkam {

struct FloquetSection {
    int n_fourier = 4;   // inner block; assembled with kGuard more on each axis
    int n_bands = 0;     // inner block; 0 selects model.n_bands - kGuard
};

struct KamSection {
    double gamma = 0.0;
    double mu = 2.0;
    double sigma = 3.0;
    int max_steps = 400;
    double tol_offdiag = 1e-8;
    std::string method = "exponential";   // exponential | lie_schwinger
    bool check_sieve = true;
};

struct SieveSection {
    double omega_lo = 0.7;
    double omega_hi = 1.4;
    double gamma = 1e-3;
    double sigma = 3.0;
    double mu = 2.0;
    int levels = 1;
    int n_max = 20;
    int k_max = -1;
    std::string energy = "surrogate";   // surrogate | quadratic (n^2 + omega / 2)
};

struct EvolveSection {
    int n_periods = 10;
    int steps_per_period = 0;
    int n_bands = 0;            // 0 selects model.n_bands
    int initial_band = 0;
    std::vector<double> tail_thresholds;   // empty selects <E_{n_bands - 5}>
    int record_every = 0;       // 0 selects steps_per_period / 16
};

struct ResonantSection {
    int n_bands = 0;            // 0 selects model.n_bands
    int steps_per_period = 0;
};

struct SweepSection {
    std::vector<double> alphas{1.0};
    std::vector<double> omegas{1.0};
    double g = 0.02;
    double c = 2.0;
    double tau = 3.0;
    std::uint64_t seed = 1;
    int n_levels = 24;
    int n_periods = 1000;
    double gamma = 1e-3;
};

struct RunConfig {
    ModelConfig model;
    FloquetSection floquet;
    KamSection kam;
    SieveSection sieve;
    EvolveSection evolve;
    ResonantSection resonant;
    SweepSection sweep;

    void validate() const;
    int floquet_inner_bands() const { return floquet.n_bands > 0 ? floquet.n_bands : model.n_bands - kGuard; }
    KamSchedule kam_schedule() const;
};

RunConfig parse_config(std::string_view text);

// Every key with its resolved value, doubles with 17 significant digits.
std::string serialize_config(const RunConfig& cfg);

// "section.key=value" or "key=value" (section model). Validates afterwards.
void apply_override(RunConfig& cfg, std::string_view assignment);

// 17 significant digits, shortest exponent form.
std::string format_double(double x);

}  // namespace ringkam
