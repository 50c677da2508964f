#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dilution/pauli.hpp"

namespace dl {

struct LatticeGraph {
    int num_sites = 0;
    std::vector<std::pair<int, int>> edges;
    // Sequential gate groups, each a list of indices into edges.
    std::vector<std::vector<int>> edge_colors;

    // Edges in application order (color groups first, else list order).
    std::vector<std::pair<int, int>> ordered_edges() const;
};

// Site index c * rows + r; bonds along a column of length rows are colored by
// parity of r + c, bonds between columns form the last group.
LatticeGraph build_square_lattice(int rows, int cols, bool periodic);
LatticeGraph build_chain(int n, bool periodic);
LatticeGraph build_wheel_spokes(const LatticeGraph& base, int hub);

struct FieldSchedule {
    enum class Kind { Constant, Cosine };
    Kind kind = Kind::Constant;
    double amplitude = 1.0;
    double period = 100.0;  // cosine: h(t) = amplitude * cos(4 pi t / period)

    static FieldSchedule constant(double h) { return {Kind::Constant, h, 0.0}; }
    static FieldSchedule cosine(double amplitude, double period) { return {Kind::Cosine, amplitude, period}; }
    double at(int step) const;
    bool is_constant() const { return kind == Kind::Constant; }
};

// One step: exp(-i dt Z_i Z_j) over ordered edges, then exp(-i dt h(t) X_j).
struct TrotterCircuit {
    LatticeGraph graph;
    double dt = 0.1;
    FieldSchedule field = FieldSchedule::constant(1.0);
    int num_steps = 0;

    int num_qubits() const { return graph.num_sites; }
    double h(int step) const { return field.at(step); }
    // exp(-i dt sum_edges z_i z_j) on computational basis states.
    std::vector<cplx> zz_layer_phases() const;
    // exp(-i dt z_i z_j) for one edge.
    std::vector<cplx> zz_gate_phases(int i, int j) const;
    double x_angle(int step) const { return dt * h(step); }
};

enum class InitialState { Plus, Zero, YPlus };
InitialState parse_initial_state(const std::string& s);
std::string to_string(InitialState s);
// Pauli kind whose strings have nonzero expectation in the product state.
PauliKind relevant_basis(InitialState s);

struct KrausTerm {
    double weight = 0.0;             // w_u; branch probability is epsilon * w_u
    std::array<PauliKind, 2> kinds{};  // second entry used for two-site terms
};

struct NoiseChannel {
    enum class Cadence { AfterStep, AfterGate };
    std::string name = "none";
    double epsilon = 0.0;
    double identity_c = 0.0;  // identity weight is 1 - identity_c * epsilon
    int arity = 1;
    std::vector<KrausTerm> terms;
    Cadence cadence = Cadence::AfterStep;
    std::vector<int> sites;  // arity 1 only; empty means every site

    bool is_trivial() const { return epsilon == 0.0 || terms.empty(); }
    double identity_weight() const { return 1.0 - identity_c * epsilon; }
    // Error locations per Trotter step for the given circuit.
    int locations_per_step(const TrotterCircuit& c) const;
    std::vector<int> active_sites(int n) const;
    NoiseChannel with_epsilon(double eps) const;
};

NoiseChannel noiseless();
NoiseChannel depolarizing_1q(double epsilon);
NoiseChannel single_pauli(PauliKind k, double epsilon);
// theta is the two-qubit gate angle in exp(i theta/2 ZZ).
NoiseChannel h1_1_two_qubit(double theta);
double h1_1_angle_factor(double theta);
// name in {single_pauli_X, depolarizing_1q, h1_1_two_qubit}; param is epsilon or theta.
NoiseChannel build_noise_preset(const std::string& name, double param);

struct ObservableSpec {
    enum class Kind { Sxk, Site, Parity, Custom };
    Kind kind = Kind::Sxk;
    int k = 1;
    int site = 0;
    PauliKind pauli = PauliKind::X;
    std::optional<PauliOperator> custom;
    std::string label;

    static ObservableSpec sxk(int k);
    static ObservableSpec site_pauli(int site, PauliKind p);
    static ObservableSpec parity();
    static ObservableSpec custom_op(const PauliOperator& o, std::string label);

    std::string name() const;
    PauliOperator to_pauli(int n) const;
    // Measurement basis when the observable is a product of one Pauli kind.
    std::optional<PauliKind> basis() const;
};

double binomial(int n, int k);

// H_X + H_ZZ - (i dt/2)[H_ZZ,H_X] + (dt^2/12)([H_X,[H_ZZ,H_X]] - [H_ZZ,[H_ZZ,H_X]])
PauliOperator floquet_hamiltonian_expansion(const TrotterCircuit& c, int order);

}  // namespace dl
