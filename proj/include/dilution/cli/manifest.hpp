#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dilution/model.hpp"

namespace dl::cli {

using json = nlohmann::json;

struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> errs);
    std::vector<std::string> errors;
};

// Requested work exceeds an engine limit (N <= 12 dense density matrices, N <= 26 statevectors).
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Strict reader for one JSON object: every accessed key is recorded, and
// finish() reports the rest as unknown. Errors carry the dotted key path.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path, std::vector<std::string>& errors);

    bool ok() const { return valid_; }
    bool has(const std::string& key) const;
    const std::string& path() const { return path_; }
    std::vector<std::string>& errors() { return errors_; }
    void error(const std::string& key, const std::string& msg);

    double number(const std::string& key, double fallback);
    std::optional<double> optional_number(const std::string& key);
    long long integer(const std::string& key, long long fallback);
    std::optional<long long> optional_integer(const std::string& key);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key, const std::string& fallback);
    std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed);
    // Raw access; marks the key as seen. Null json if absent.
    json raw(const std::string& key);
    std::vector<double> number_list(const std::string& key, const std::vector<double>& fallback);
    std::vector<long long> integer_list(const std::string& key, const std::vector<long long>& fallback);
    std::vector<std::string> string_list(const std::string& key, const std::vector<std::string>& fallback,
                                         const std::vector<std::string>& allowed);

    void finish();

private:
    const json& j_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
    bool valid_ = true;
};

// Standard setup defaults: 3x4 periodic lattice, dt = 0.1, h = 1, 100 steps,
// depolarizing epsilon = 0.001, S_x, |+...+>, delta_t = 20.
json normalize_config(const json& raw, std::vector<std::string>& errors, const std::string& path = "config");
// Same, for a single observable object.
json normalize_observable(const json& raw, int n, std::vector<std::string>& errors, const std::string& path);

// 64-bit FNV-1a over the compact dump, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct BuiltConfig {
    TrotterCircuit circuit;
    NoiseChannel noise;
    InitialState init = InitialState::Plus;
    ObservableSpec observable;
    int steps = 0;
    int delta_t = 20;
    std::uint64_t seed = 0;
    int num_qubits() const { return circuit.num_qubits(); }
};

// Input must be normalized.
BuiltConfig build_config(const json& config);
ObservableSpec build_observable(const json& obs, int n);
LatticeGraph build_lattice(const json& lattice);
int lattice_size(const json& lattice);

}  // namespace dl::cli
