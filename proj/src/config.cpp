#include "ringkam/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace ringkam {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view v) {
    v = trim(v);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
    return x;
}

long long to_integer(std::string_view v) {
    v = trim(v);
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("expected an integer, got '" + std::string(v) + "'");
    return x;
}

std::uint64_t to_unsigned(std::string_view v) {
    v = trim(v);
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
    return x;
}

int to_int(std::string_view v) {
    const long long x = to_integer(v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw std::invalid_argument("integer out of range");
    return static_cast<int>(x);
}

bool to_bool(std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> to_list(std::string_view v) {
    std::vector<double> out;
    v = trim(v);
    if (v.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = v.find(',', start);
        out.push_back(to_double(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string list_text(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_double(xs[i]);
    return s;
}

struct Field {
    const char* section;
    const char* key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define RK_DOUBLE(sec, member, name)                                                   \
    Field{sec, name, [](RunConfig& c, std::string_view v) { c.member = to_double(v); }, \
          [](const RunConfig& c) { return format_double(c.member); }}
#define RK_INT(sec, member, name)                                                   \
    Field{sec, name, [](RunConfig& c, std::string_view v) { c.member = to_int(v); }, \
          [](const RunConfig& c) { return std::to_string(c.member); }}
#define RK_LIST(sec, member, name)                                                   \
    Field{sec, name, [](RunConfig& c, std::string_view v) { c.member = to_list(v); }, \
          [](const RunConfig& c) { return list_text(c.member); }}
#define RK_WORD(sec, member, name)                                                            \
    Field{sec, name, [](RunConfig& c, std::string_view v) { c.member = std::string(trim(v)); }, \
          [](const RunConfig& c) { return c.member; }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        RK_DOUBLE("model", model.L, "L"),
        RK_DOUBLE("model", model.omega, "omega"),
        RK_DOUBLE("model", model.g, "g"),
        RK_LIST("model", model.W.cos_coeffs, "W_cos"),
        RK_LIST("model", model.W.sin_coeffs, "W_sin"),
        RK_INT("model", model.n_bands, "n_bands"),
        RK_INT("model", model.n_time, "n_time"),
        RK_DOUBLE("model", model.tol_eig, "tol_eig"),
        RK_DOUBLE("model", model.tol_unitary, "tol_unitary"),
        RK_INT("floquet", floquet.n_fourier, "n_fourier"),
        RK_INT("floquet", floquet.n_bands, "n_bands"),
        RK_DOUBLE("kam", kam.gamma, "gamma"),
        RK_DOUBLE("kam", kam.mu, "mu"),
        RK_DOUBLE("kam", kam.sigma, "sigma"),
        RK_INT("kam", kam.max_steps, "max_steps"),
        RK_DOUBLE("kam", kam.tol_offdiag, "tol_offdiag"),
        RK_WORD("kam", kam.method, "method"),
        Field{"kam", "check_sieve", [](RunConfig& c, std::string_view v) { c.kam.check_sieve = to_bool(v); },
              [](const RunConfig& c) { return std::string(c.kam.check_sieve ? "true" : "false"); }},
        RK_DOUBLE("sieve", sieve.omega_lo, "omega_lo"),
        RK_DOUBLE("sieve", sieve.omega_hi, "omega_hi"),
        RK_DOUBLE("sieve", sieve.gamma, "gamma"),
        RK_DOUBLE("sieve", sieve.sigma, "sigma"),
        RK_DOUBLE("sieve", sieve.mu, "mu"),
        RK_INT("sieve", sieve.levels, "levels"),
        RK_INT("sieve", sieve.n_max, "n_max"),
        RK_INT("sieve", sieve.k_max, "k_max"),
        RK_WORD("sieve", sieve.energy, "energy"),
        RK_INT("evolve", evolve.n_periods, "n_periods"),
        RK_INT("evolve", evolve.steps_per_period, "steps_per_period"),
        RK_INT("evolve", evolve.n_bands, "n_bands"),
        RK_INT("evolve", evolve.initial_band, "initial_band"),
        RK_LIST("evolve", evolve.tail_thresholds, "tail_thresholds"),
        RK_INT("evolve", evolve.record_every, "record_every"),
        RK_INT("resonant", resonant.n_bands, "n_bands"),
        RK_INT("resonant", resonant.steps_per_period, "steps_per_period"),
        RK_LIST("sweep", sweep.alphas, "alphas"),
        RK_LIST("sweep", sweep.omegas, "omegas"),
        RK_DOUBLE("sweep", sweep.g, "g"),
        RK_DOUBLE("sweep", sweep.c, "c"),
        RK_DOUBLE("sweep", sweep.tau, "tau"),
        Field{"sweep", "seed",
              [](RunConfig& c, std::string_view v) {
                  c.sweep.seed = to_unsigned(v);
              },
              [](const RunConfig& c) { return std::to_string(c.sweep.seed); }},
        RK_INT("sweep", sweep.n_levels, "n_levels"),
        RK_INT("sweep", sweep.n_periods, "n_periods"),
        RK_DOUBLE("sweep", sweep.gamma, "gamma"),
    };
    return table;
}

#undef RK_DOUBLE
#undef RK_INT
#undef RK_LIST
#undef RK_WORD

const Field* find_field(std::string_view section, std::string_view key) {
    for (const auto& f : fields())
        if (section == f.section && key == f.key) return &f;
    return nullptr;
}

bool known_section(std::string_view s) {
    for (const auto& f : fields())
        if (s == f.section) return true;
    return false;
}

}  // namespace

void RunConfig::validate() const {
    model.validate();
    auto fail = [](const std::string& what) { throw Error(ErrorKind::Validation, what); };
    if (floquet.n_fourier < 0) fail("floquet.n_fourier >= 0");
    if (floquet_inner_bands() < 1) fail("floquet inner bands >= 1");
    if (floquet_inner_bands() + kGuard > model.n_bands) fail("floquet.n_bands + guard <= model.n_bands");
    if (kam.method != "exponential" && kam.method != "lie_schwinger")
        fail("kam.method is exponential or lie_schwinger");
    if (kam.gamma < 0.0) fail("kam.gamma >= 0");
    if (!(kam.sigma > 0.0)) fail("kam.sigma > 0");
    if (kam.max_steps < 1) fail("kam.max_steps >= 1");
    if (!(kam.tol_offdiag > 0.0)) fail("kam.tol_offdiag > 0");
    if (!(sieve.omega_lo > 0.0) || !(sieve.omega_hi > sieve.omega_lo)) fail("0 < sieve.omega_lo < sieve.omega_hi");
    if (!(sieve.gamma > 0.0)) fail("sieve.gamma > 0");
    if (sieve.levels < 1) fail("sieve.levels >= 1");
    if (sieve.n_max < 1) fail("sieve.n_max >= 1");
    if (sieve.energy != "surrogate" && sieve.energy != "quadratic") fail("sieve.energy is surrogate or quadratic");
    if (evolve.n_periods < 1) fail("evolve.n_periods >= 1");
    const int eb = evolve.n_bands > 0 ? evolve.n_bands : model.n_bands;
    if (eb > model.n_bands) fail("evolve.n_bands <= model.n_bands");
    if (evolve.initial_band < 0 || evolve.initial_band >= eb) fail("0 <= evolve.initial_band < evolve bands");
    if (evolve.steps_per_period != 0 && evolve.steps_per_period < 8 * eb) fail("evolve.steps_per_period >= 8 n_bands");
    if (resonant.n_bands < 0 || resonant.n_bands > model.n_bands) fail("resonant.n_bands <= model.n_bands");
    if (sweep.alphas.empty() || sweep.omegas.empty()) fail("sweep needs alphas and omegas");
    for (double w : sweep.omegas)
        if (!(w > 0.0)) fail("sweep omegas > 0");
    if (!(sweep.g >= 0.0)) fail("sweep.g >= 0");
    if (!(sweep.c > 0.0)) fail("sweep.c > 0");
    if (sweep.n_levels < 2) fail("sweep.n_levels >= 2");
    if (sweep.n_periods < 10) fail("sweep.n_periods >= 10");
}

KamSchedule RunConfig::kam_schedule() const {
    KamSchedule s;
    s.gamma = kam.gamma;
    s.mu = kam.mu;
    s.sigma = kam.sigma;
    s.max_steps = kam.max_steps;
    s.tol_offdiag = kam.tol_offdiag;
    s.tol_unitary = model.tol_unitary;
    s.method = kam.method == "lie_schwinger" ? Conjugation::LieSchwinger : Conjugation::Exponential;
    return s;
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::string section = "model";
    std::set<std::pair<std::string, std::string>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    auto parse_error = [&](const std::string& what) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
    };
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') parse_error("unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_section(section)) parse_error("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) parse_error("expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const Field* f = find_field(section, key);
        if (f == nullptr) parse_error("unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert({section, key}).second) parse_error("duplicate key '" + key + "'");
        try {
            f->set(cfg, line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            parse_error(key + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        if (section != f.section) {
            if (!section.empty()) out << "\n";
            section = f.section;
            out << "[" << section << "]\n";
        }
        out << f.key << " = " << f.get(cfg) << "\n";
    }
    return out.str();
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Parse, "override needs key=value");
    std::string_view key = trim(assignment.substr(0, eq));
    std::string_view section = "model";
    if (const auto dot = key.find('.'); dot != std::string_view::npos) {
        section = key.substr(0, dot);
        key = key.substr(dot + 1);
    }
    const Field* f = find_field(section, key);
    if (f == nullptr) throw Error(ErrorKind::Parse, "unknown override key '" + std::string(assignment.substr(0, eq)) + "'");
    try {
        f->set(cfg, assignment.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
        throw Error(ErrorKind::Parse, std::string(key) + ": " + e.what());
    }
    cfg.validate();
}

}  // namespace ringkam
