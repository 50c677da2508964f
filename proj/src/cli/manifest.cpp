#include "dilution/cli/manifest.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace dl::cli {

namespace {

std::string join_errors(const std::vector<std::string>& errs) {
    std::string s = "invalid manifest:";
    for (auto& e : errs) s += "\n  " + e;
    return s;
}

std::string type_name(const json& v) {
    if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
    return v.type_name();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> errs)
    : std::runtime_error(join_errors(errs)), errors(std::move(errs)) {}

// ---------------------------------------------------------------- ObjectReader

ObjectReader::ObjectReader(const json& j, std::string path, std::vector<std::string>& errors)
    : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_null() && !j_.is_object()) {
        errors_.push_back(path_ + ": expected an object, got " + type_name(j_));
        valid_ = false;
    }
}

bool ObjectReader::has(const std::string& key) const { return valid_ && j_.is_object() && j_.contains(key); }

void ObjectReader::error(const std::string& key, const std::string& msg) {
    errors_.push_back(path_ + "." + key + ": " + msg);
}

json ObjectReader::raw(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    return j_.at(key);
}

std::optional<double> ObjectReader::optional_number(const std::string& key) {
    json v = raw(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) {
        error(key, "expected a number, got " + type_name(v));
        return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        error(key, "must be finite");
        return std::nullopt;
    }
    return d;
}

double ObjectReader::number(const std::string& key, double fallback) {
    return optional_number(key).value_or(fallback);
}

std::optional<long long> ObjectReader::optional_integer(const std::string& key) {
    json v = raw(key);
    if (v.is_null()) return std::nullopt;
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    error(key, "expected an integer, got " + type_name(v));
    return std::nullopt;
}

long long ObjectReader::integer(const std::string& key, long long fallback) {
    return optional_integer(key).value_or(fallback);
}

bool ObjectReader::boolean(const std::string& key, bool fallback) {
    json v = raw(key);
    if (v.is_null()) return fallback;
    if (!v.is_boolean()) {
        error(key, "expected a boolean, got " + type_name(v));
        return fallback;
    }
    return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback) {
    json v = raw(key);
    if (v.is_null()) return fallback;
    if (!v.is_string()) {
        error(key, "expected a string, got " + type_name(v));
        return fallback;
    }
    return v.get<std::string>();
}

std::string ObjectReader::choice(const std::string& key, const std::string& fallback,
                                 const std::vector<std::string>& allowed) {
    std::string s = string(key, fallback);
    for (auto& a : allowed)
        if (a == s) return s;
    std::string list;
    for (auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    error(key, "'" + s + "' is not one of {" + list + "}");
    return fallback;
}

std::vector<double> ObjectReader::number_list(const std::string& key, const std::vector<double>& fallback) {
    json v = raw(key);
    if (v.is_null()) return fallback;
    if (!v.is_array() || v.empty()) {
        error(key, "expected a non-empty array of numbers");
        return fallback;
    }
    std::vector<double> out;
    for (auto& e : v) {
        if (!e.is_number()) {
            error(key, "array entries must be numbers");
            return fallback;
        }
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<long long> ObjectReader::integer_list(const std::string& key, const std::vector<long long>& fallback) {
    json v = raw(key);
    if (v.is_null()) return fallback;
    if (!v.is_array() || v.empty()) {
        error(key, "expected a non-empty array of integers");
        return fallback;
    }
    std::vector<long long> out;
    for (auto& e : v) {
        if (!(e.is_number_integer() || e.is_number_unsigned())) {
            error(key, "array entries must be integers");
            return fallback;
        }
        out.push_back(e.get<long long>());
    }
    return out;
}

std::vector<std::string> ObjectReader::string_list(const std::string& key, const std::vector<std::string>& fallback,
                                                   const std::vector<std::string>& allowed) {
    json v = raw(key);
    if (v.is_null()) return fallback;
    if (!v.is_array() || v.empty()) {
        error(key, "expected a non-empty array of strings");
        return fallback;
    }
    std::vector<std::string> out;
    for (auto& e : v) {
        if (!e.is_string()) {
            error(key, "array entries must be strings");
            return fallback;
        }
        auto s = e.get<std::string>();
        bool found = allowed.empty();
        for (auto& a : allowed) found = found || a == s;
        if (!found) {
            error(key, "unknown entry '" + s + "'");
            return fallback;
        }
        out.push_back(s);
    }
    return out;
}

void ObjectReader::finish() {
    if (!valid_ || !j_.is_object()) return;
    for (auto& [k, v] : j_.items())
        if (!seen_.count(k)) errors_.push_back(path_ + "." + k + ": unknown key");
}

// ---------------------------------------------------------------- config

int lattice_size(const json& lattice) { return lattice.at("rows").get<int>() * lattice.at("cols").get<int>(); }

namespace {

json normalize_lattice(const json& raw, std::vector<std::string>& errors, const std::string& path) {
    ObjectReader r(raw, path, errors);
    json out;
    const long long rows = r.integer("rows", 3), cols = r.integer("cols", 4);
    const bool periodic = r.boolean("periodic", true);
    const auto hub = r.optional_integer("wheel_hub");
    r.finish();
    if (cols == 1) {
        if (rows < (periodic ? 3 : 2)) r.error("rows", "a chain needs at least " + std::string(periodic ? "3" : "2") + " sites");
    } else {
        const long long min = periodic ? 2 : 1;
        if (rows < min) r.error("rows", "must be >= " + std::to_string(min));
        if (cols < min) r.error("cols", "must be >= " + std::to_string(min));
    }
    if (rows * cols > 62) r.error("rows", "lattice larger than 62 sites");
    out["rows"] = rows;
    out["cols"] = cols;
    out["periodic"] = periodic;
    if (hub) {
        if (*hub < 0 || *hub >= rows * cols) r.error("wheel_hub", "site outside the lattice");
        out["wheel_hub"] = *hub;
    }
    return out;
}

const std::vector<std::string> kPresets = {"none", "depolarizing_1q", "single_pauli_X", "single_pauli_Y",
                                           "single_pauli_Z", "h1_1_two_qubit"};

json normalize_noise(const json& raw, double dt, std::vector<std::string>& errors, const std::string& path) {
    ObjectReader r(raw, path, errors);
    json out;
    const std::string preset = r.choice("preset", "depolarizing_1q", kPresets);
    out["preset"] = preset;
    if (preset == "h1_1_two_qubit") {
        if (r.has("epsilon")) r.error("epsilon", "not used by h1_1_two_qubit (set theta)");
        r.raw("epsilon");
        // gate exp(-i dt ZZ) = exp(i theta/2 ZZ) up to sign
        const double theta = r.number("theta", std::min(2.0 * dt, std::numbers::pi / 2));
        if (!(theta > 0.0) || theta > std::numbers::pi / 2 + 1e-12) r.error("theta", "must lie in (0, pi/2]");
        out["theta"] = theta;
    } else {
        if (r.has("theta")) r.error("theta", "only used by h1_1_two_qubit");
        r.raw("theta");
        const double eps = r.number("epsilon", preset == "none" ? 0.0 : 0.001);
        if (eps < 0.0) r.error("epsilon", "must be >= 0");
        if (eps > 1.0) r.error("epsilon", "must be <= 1");
        if (preset == "depolarizing_1q" && eps > 4.0 / 3.0) r.error("epsilon", "must be <= 4/3");
        out["epsilon"] = preset == "none" ? 0.0 : eps;
    }
    r.finish();
    return out;
}

}  // namespace

json normalize_observable(const json& raw, int n, std::vector<std::string>& errors, const std::string& path) {
    ObjectReader r(raw, path, errors);
    json out;
    const std::string kind = r.choice("kind", "sxk", {"sxk", "site", "parity", "magnetization"});
    out["kind"] = kind;
    if (kind == "sxk") {
        const long long k = r.integer("k", 1);
        if (k < 1 || k > n) r.error("k", "must lie in 1.." + std::to_string(n));
        out["k"] = k;
    } else if (kind == "site") {
        const long long site = r.integer("site", 0);
        if (site < 0 || site >= n) r.error("site", "outside 0.." + std::to_string(n - 1));
        out["site"] = site;
        out["pauli"] = r.choice("pauli", "X", {"X", "Y", "Z"});
    } else if (kind == "magnetization") {
        out["pauli"] = r.choice("pauli", "X", {"X", "Y", "Z"});
    }
    r.finish();
    return out;
}

json normalize_config(const json& raw, std::vector<std::string>& errors, const std::string& path) {
    ObjectReader r(raw, path, errors);
    json out;
    out["lattice"] = normalize_lattice(r.raw("lattice"), errors, path + ".lattice");
    int n = 12;
    if (out["lattice"]["rows"].get<long long>() * out["lattice"]["cols"].get<long long>() <= 62)
        n = lattice_size(out["lattice"]);

    const double dt = r.number("dt", 0.1);
    if (!(dt > 0.0)) r.error("dt", "must be > 0");
    out["dt"] = dt;

    const bool has_h = r.has("h");
    const double h = r.number("h", 1.0);
    json sched = r.raw("h_schedule");
    if (!sched.is_null()) {
        if (has_h) r.error("h", "give either h or h_schedule, not both");
        ObjectReader s(sched, path + ".h_schedule", errors);
        const std::string kind = s.choice("kind", "cosine", {"constant", "cosine"});
        const double amp = s.number("amplitude", 1.0);
        if (kind == "cosine") {
            const double period = s.number("period", 100.0);
            if (!(period > 0.0)) s.error("period", "must be > 0");
            out["h_schedule"] = {{"kind", "cosine"}, {"amplitude", amp}, {"period", period}};
        } else {
            out["h"] = amp;
        }
        s.finish();
    } else {
        out["h"] = h;
    }

    const long long steps = r.integer("steps", 100);
    if (steps < 0) r.error("steps", "must be >= 0");
    if (steps > 100000) r.error("steps", "must be <= 100000");
    out["steps"] = steps;

    out["noise"] = normalize_noise(r.raw("noise"), dt, errors, path + ".noise");
    out["observable"] = normalize_observable(r.raw("observable"), n, errors, path + ".observable");
    out["initial_state"] = r.choice("initial_state", "plus", {"plus", "zero", "y_plus"});

    const long long delta_t = r.integer("delta_t", 20);
    if (delta_t < 0 || delta_t % 2) r.error("delta_t", "must be a non-negative even integer");
    out["delta_t"] = delta_t;

    const long long seed = r.integer("seed", 0);
    if (seed < 0) r.error("seed", "must be >= 0");
    out["seed"] = seed;
    r.finish();
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------- building

LatticeGraph build_lattice(const json& lattice) {
    const int rows = lattice.at("rows").get<int>(), cols = lattice.at("cols").get<int>();
    const bool periodic = lattice.at("periodic").get<bool>();
    LatticeGraph g = cols == 1 ? build_chain(rows, periodic) : build_square_lattice(rows, cols, periodic);
    if (lattice.contains("wheel_hub")) g = build_wheel_spokes(g, lattice.at("wheel_hub").get<int>());
    return g;
}

ObservableSpec build_observable(const json& obs, int n) {
    const std::string kind = obs.at("kind").get<std::string>();
    if (kind == "sxk") return ObservableSpec::sxk(obs.at("k").get<int>());
    if (kind == "parity") return ObservableSpec::parity();
    const PauliKind p = pauli_from_char(obs.at("pauli").get<std::string>()[0]);
    if (kind == "site") return ObservableSpec::site_pauli(obs.at("site").get<int>(), p);
    PauliOperator o(n);
    for (int j = 0; j < n; ++j) o.add(PauliString::single(n, j, p), 1.0 / n);
    return ObservableSpec::custom_op(o, std::string("S") + static_cast<char>(std::tolower(pauli_char(p))));
}

BuiltConfig build_config(const json& config) {
    BuiltConfig b;
    b.circuit.graph = build_lattice(config.at("lattice"));
    b.circuit.dt = config.at("dt").get<double>();
    if (config.contains("h_schedule")) {
        auto& s = config.at("h_schedule");
        b.circuit.field = FieldSchedule::cosine(s.at("amplitude").get<double>(), s.at("period").get<double>());
    } else {
        b.circuit.field = FieldSchedule::constant(config.at("h").get<double>());
    }
    b.steps = config.at("steps").get<int>();
    b.circuit.num_steps = b.steps;
    auto& nz = config.at("noise");
    const std::string preset = nz.at("preset").get<std::string>();
    b.noise = build_noise_preset(preset, preset == "h1_1_two_qubit" ? nz.at("theta").get<double>()
                                                                    : nz.at("epsilon").get<double>());
    b.init = parse_initial_state(config.at("initial_state").get<std::string>());
    b.observable = build_observable(config.at("observable"), b.num_qubits());
    b.delta_t = config.at("delta_t").get<int>();
    b.seed = config.at("seed").get<std::uint64_t>();
    return b;
}

}  // namespace dl::cli
