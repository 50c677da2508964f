#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dilution/kernels.hpp"
#include "dilution/model.hpp"
#include "dilution/pauli.hpp"

namespace dl {

inline constexpr int kMaxStatevectorQubits = 26;
inline constexpr int kMaxDensityQubits = 12;

struct StateVector {
    int n = 0;
    std::vector<cplx> amp;
    double norm_sq() const;
};

StateVector product_state(int n, InitialState s);
DenseOperator product_density(int n, InitialState s);

// Deterministic per-trajectory stream derived from (seed, index).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------- observables

// Evaluates a fixed list of observables; X-type observables share one
// pass over the state (all X-string expectations at once).
class ObservableSet {
public:
    ObservableSet(int n, std::vector<ObservableSpec> specs);
    int num_qubits() const { return n_; }
    const std::vector<ObservableSpec>& specs() const { return specs_; }
    std::vector<std::string> names() const;
    std::vector<double> evaluate(const StateVector& psi) const;
    std::vector<double> evaluate(const DenseOperator& rho) const;

private:
    std::vector<double> finish(const std::vector<double>& xexp,
                               const std::function<double(const PauliOperator&)>& generic) const;
    int n_;
    std::vector<ObservableSpec> specs_;
    std::vector<PauliOperator> ops_;
    std::vector<char> xtype_;
};

// <X_S> for every X string S (index = bit mask S).
std::vector<double> x_string_expectations(const StateVector& psi);
std::vector<double> x_string_expectations(const DenseOperator& rho);
// X-basis outcome distribution p(x), x bit j = 1 meaning outcome -1 on site j.
std::vector<double> x_basis_probabilities(const StateVector& psi);
std::vector<double> x_basis_probabilities(const DenseOperator& rho);
double expectation(const StateVector& psi, const PauliOperator& o);
double expectation(const DenseOperator& rho, const PauliOperator& o);
// Mean over k-subsets given all X-string expectations.
double sxk_from_x_strings(const std::vector<double>& xexp, int n, int k);

// ---------------------------------------------------------------- results

struct QuenchResult {
    std::string engine;
    std::string config_hash;
    std::vector<int> steps;
    std::vector<std::string> names;
    std::vector<std::vector<double>> value;   // [observable][step index]
    std::vector<std::vector<double>> stderr_;  // same shape, 0 for exact engines

    std::size_t index_of(const std::string& name) const;
    const std::vector<double>& series(const std::string& name) const { return value.at(index_of(name)); }
    std::string to_csv() const;
};

// ---------------------------------------------------------------- statevector

void apply_step(StateVector& psi, const TrotterCircuit& c, int step, const std::vector<cplx>& zz_phases);
// Calls visit(step, state) for step = 0..steps.
void evolve_statevector(const TrotterCircuit& c, InitialState init, int steps,
                        const std::function<void(int, const StateVector&)>& visit);
std::vector<StateVector> evolve_statevector(const TrotterCircuit& c, InitialState init, int steps);
QuenchResult run_statevector(const TrotterCircuit& c, InitialState init, int steps, const ObservableSet& obs);

// ---------------------------------------------------------------- density matrix

// One exact operation on a dense operator plus the insertion maps of the
// error locations that sit right after it.
struct DenseOp {
    enum class Kind { Layer, Diag, Two };
    Kind kind = Kind::Layer;
    std::vector<kernels::Super4> site_ops;  // Layer
    std::vector<char> site_active;
    std::vector<cplx> diag;  // Layer pre-diagonal or Diag phases
    int a = 0, b = 0;        // Two
    kernels::Super16 two{};
    // insertion maps: Layer -> per site (site_ins_active), Two -> two_ins
    std::vector<kernels::Super4> site_ins;
    std::vector<char> site_ins_active;
    bool has_two_ins = false;
    kernels::Super16 two_ins{};

    int num_locations() const;
};

class DensityEngine {
public:
    DensityEngine(const TrotterCircuit& c, const NoiseChannel& noise);
    const TrotterCircuit& circuit() const { return c_; }
    const NoiseChannel& noise() const { return noise_; }
    int locations_per_step() const;
    // Operations making up Trotter step `step` (1-based).
    std::vector<DenseOp> step_ops(int step) const;
    void step(DenseOperator& rho, int step) const;

    static void apply(const DenseOp& op, DenseOperator& m);
    // dst += sum over the op's locations of insertion(src)
    static void accumulate_insertions(const DenseOp& op, const DenseOperator& src, DenseOperator& dst);
    // Same, one location at a time (loc index in the op's location order).
    static void accumulate_insertion(const DenseOp& op, int loc, const DenseOperator& src, DenseOperator& dst);

private:
    TrotterCircuit c_;
    NoiseChannel noise_;
    std::vector<cplx> zz_;
};

void check_density_budget(int n);
QuenchResult run_density_matrix(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int steps,
                                const ObservableSet& obs);

// ---------------------------------------------------------------- trajectories

struct ErrorRecord {
    int step = 0;
    int location = 0;  // site, or edge index in application order
    std::uint8_t term = 0;
};

struct TrajectoryBatch {
    int num_trajectories = 0;
    std::uint64_t seed = 0;
    bool keep_records = false;
    std::vector<std::vector<ErrorRecord>> records;  // filled when keep_records
    std::vector<int> error_counts;
};

// Optional forced insertion of one Kraus term (randomized D1 estimation).
struct ForcedInsertion {
    int step = 1;
    int location = 0;
    int term = 0;
};

// Evolves one trajectory; returns per-step observable values [step][obs].
std::vector<std::vector<double>> run_single_trajectory(const TrotterCircuit& c, const NoiseChannel& noise,
                                                       InitialState init, int steps, const ObservableSet& obs,
                                                       std::mt19937_64& rng, std::vector<ErrorRecord>* records,
                                                       const std::optional<ForcedInsertion>& forced = std::nullopt);

QuenchResult evolve_trajectories(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int steps,
                                 const ObservableSet& obs, TrajectoryBatch& batch);

// ---------------------------------------------------------------- shots and metrics

std::vector<std::uint64_t> sample_bitstrings(const std::vector<double>& probs, int shots, std::mt19937_64& rng);
// outcomes[shot][site] in {+1, -1}
double estimate_sxk_from_samples(const std::vector<std::vector<int>>& outcomes, int k);
// all k = 0..N at once from bit-packed shots (bit 1 = outcome -1)
std::vector<double> estimate_all_sxk(const std::vector<std::uint64_t>& shots, int n);

std::vector<std::optional<double>> decay_rate(const std::vector<double>& noisy, const std::vector<double>& noiseless,
                                              const std::vector<int>& steps, double tol = 1e-9);
std::vector<std::optional<double>> normalized_difference(const std::vector<double>& noisy,
                                                         const std::vector<double>& noiseless,
                                                         const std::vector<int>& steps, double epsilon,
                                                         int window = 20);

}  // namespace dl
