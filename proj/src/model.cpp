#include "dilution/model.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace dl {

std::vector<std::pair<int, int>> LatticeGraph::ordered_edges() const {
    if (edge_colors.empty()) return edges;
    std::vector<std::pair<int, int>> out;
    out.reserve(edges.size());
    for (auto& group : edge_colors)
        for (int e : group) out.push_back(edges.at(e));
    return out;
}

LatticeGraph build_square_lattice(int rows, int cols, bool periodic) {
    const int min = periodic ? 2 : 1;
    if (rows < min || cols < min) throw std::invalid_argument("lattice size below minimum");
    if (rows * cols > 62) throw std::invalid_argument("lattice too large");
    LatticeGraph g;
    g.num_sites = rows * cols;
    auto site = [&](int r, int c) { return c * rows + r; };
    std::vector<int> even, odd, cross;
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            if (r + 1 < rows || periodic) {
                ((r + c) % 2 == 0 ? even : odd).push_back(static_cast<int>(g.edges.size()));
                g.edges.emplace_back(site(r, c), site((r + 1) % rows, c));
            }
        }
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            if (c + 1 < cols || periodic) {
                cross.push_back(static_cast<int>(g.edges.size()));
                g.edges.emplace_back(site(r, c), site(r, (c + 1) % cols));
            }
    for (auto* grp : {&even, &odd, &cross})
        if (!grp->empty()) g.edge_colors.push_back(*grp);
    return g;
}

LatticeGraph build_chain(int n, bool periodic) {
    if (n < 2 || (periodic && n < 3)) throw std::invalid_argument("chain too short");
    if (n > 62) throw std::invalid_argument("chain too long");
    LatticeGraph g;
    g.num_sites = n;
    std::vector<int> even, odd;
    const int bonds = periodic ? n : n - 1;
    for (int j = 0; j < bonds; ++j) {
        (j % 2 == 0 ? even : odd).push_back(j);
        g.edges.emplace_back(j, (j + 1) % n);
    }
    g.edge_colors = {even, odd};
    if (odd.empty()) g.edge_colors.pop_back();
    return g;
}

LatticeGraph build_wheel_spokes(const LatticeGraph& base, int hub) {
    if (hub < 0 || hub >= base.num_sites) throw std::invalid_argument("invalid hub");
    LatticeGraph g = base;
    std::set<std::pair<int, int>> present;
    for (auto [a, b] : base.edges) present.insert({std::min(a, b), std::max(a, b)});
    if (g.edge_colors.empty()) {
        std::vector<int> all(g.edges.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        if (!all.empty()) g.edge_colors.push_back(all);
    }
    std::vector<int> spokes;
    for (int j = 0; j < base.num_sites; ++j) {
        if (j == hub || present.count({std::min(hub, j), std::max(hub, j)})) continue;
        spokes.push_back(static_cast<int>(g.edges.size()));
        g.edges.emplace_back(hub, j);
    }
    if (!spokes.empty()) g.edge_colors.push_back(spokes);
    return g;
}

double FieldSchedule::at(int step) const {
    if (kind == Kind::Constant) return amplitude;
    return amplitude * std::cos(4.0 * std::numbers::pi * step / period);
}

std::vector<cplx> TrotterCircuit::zz_layer_phases() const {
    const int n = num_qubits();
    const std::size_t d = std::size_t{1} << n;
    std::vector<cplx> ph(d);
    for (std::size_t a = 0; a < d; ++a) {
        int e = 0;
        for (auto [i, j] : graph.edges) e += (((a >> i) ^ (a >> j)) & 1) ? -1 : 1;
        ph[a] = std::polar(1.0, -dt * e);
    }
    return ph;
}

std::vector<cplx> TrotterCircuit::zz_gate_phases(int i, int j) const {
    const std::size_t d = std::size_t{1} << num_qubits();
    std::vector<cplx> ph(d);
    const cplx same = std::polar(1.0, -dt), diff = std::polar(1.0, dt);
    for (std::size_t a = 0; a < d; ++a) ph[a] = (((a >> i) ^ (a >> j)) & 1) ? diff : same;
    return ph;
}

InitialState parse_initial_state(const std::string& s) {
    if (s == "plus") return InitialState::Plus;
    if (s == "zero") return InitialState::Zero;
    if (s == "y_plus") return InitialState::YPlus;
    throw std::invalid_argument("unknown initial state '" + s + "'");
}

std::string to_string(InitialState s) {
    switch (s) {
        case InitialState::Plus: return "plus";
        case InitialState::Zero: return "zero";
        case InitialState::YPlus: return "y_plus";
    }
    return "?";
}

PauliKind relevant_basis(InitialState s) {
    switch (s) {
        case InitialState::Plus: return PauliKind::X;
        case InitialState::Zero: return PauliKind::Z;
        case InitialState::YPlus: return PauliKind::Y;
    }
    return PauliKind::X;
}

// ---------------------------------------------------------------- noise

int NoiseChannel::locations_per_step(const TrotterCircuit& c) const {
    if (terms.empty()) return 0;
    if (arity == 2) return static_cast<int>(c.graph.edges.size());
    return static_cast<int>(active_sites(c.num_qubits()).size());
}

std::vector<int> NoiseChannel::active_sites(int n) const {
    if (!sites.empty()) return sites;
    std::vector<int> all(n);
    for (int j = 0; j < n; ++j) all[j] = j;
    return all;
}

NoiseChannel NoiseChannel::with_epsilon(double eps) const {
    NoiseChannel c = *this;
    c.epsilon = eps;
    return c;
}

NoiseChannel noiseless() { return NoiseChannel{}; }

NoiseChannel depolarizing_1q(double epsilon) {
    if (epsilon < 0 || epsilon > 1) throw std::invalid_argument("epsilon outside [0, 1]");
    NoiseChannel c;
    c.name = "depolarizing_1q";
    c.epsilon = epsilon;
    c.identity_c = 0.75;
    for (PauliKind k : {PauliKind::X, PauliKind::Y, PauliKind::Z}) c.terms.push_back({0.25, {k, PauliKind::I}});
    return c;
}

NoiseChannel single_pauli(PauliKind k, double epsilon) {
    if (epsilon < 0 || epsilon > 1) throw std::invalid_argument("epsilon outside [0, 1]");
    if (k == PauliKind::I) throw std::invalid_argument("identity is not an error");
    NoiseChannel c;
    c.name = std::string("single_pauli_") + pauli_char(k);
    c.epsilon = epsilon;
    c.identity_c = 1.0;
    c.terms.push_back({1.0, {k, PauliKind::I}});
    return c;
}

double h1_1_angle_factor(double theta) {
    if (!(theta > 0.0) || theta > std::numbers::pi / 2 + 1e-12) throw std::invalid_argument("theta outside (0, pi/2]");
    return 0.418 * theta + 0.34;
}

NoiseChannel h1_1_two_qubit(double theta) {
    // Probabilities after exp(i pi/4 ZZ); XX, XY, YX, YY (4.7e-6) are dropped.
    static const std::pair<const char*, double> table[] = {
        {"IX", 0.000124}, {"IY", 0.000124}, {"IZ", 0.000327}, {"XI", 0.000114},
        {"XZ", 0.000114}, {"YI", 0.000114}, {"YZ", 0.000114}, {"ZI", 0.000221},
        {"ZX", 0.000124}, {"ZY", 0.000124}, {"ZZ", 0.000122},
    };
    const double f = h1_1_angle_factor(theta);
    double total = 0;
    for (auto& [lab, p] : table) total += p * f;
    NoiseChannel c;
    c.name = "h1_1_two_qubit";
    c.epsilon = total;
    c.identity_c = 1.0;
    c.arity = 2;
    c.cadence = NoiseChannel::Cadence::AfterGate;
    for (auto& [lab, p] : table)
        c.terms.push_back({p * f / total, {pauli_from_char(lab[0]), pauli_from_char(lab[1])}});
    return c;
}

NoiseChannel build_noise_preset(const std::string& name, double param) {
    if (name == "none") return noiseless();
    if (name == "single_pauli_X") return single_pauli(PauliKind::X, param);
    if (name == "single_pauli_Y") return single_pauli(PauliKind::Y, param);
    if (name == "single_pauli_Z") return single_pauli(PauliKind::Z, param);
    if (name == "depolarizing_1q") return depolarizing_1q(param);
    if (name == "h1_1_two_qubit") return h1_1_two_qubit(param);
    throw std::invalid_argument("unknown noise preset '" + name + "'");
}

// ---------------------------------------------------------------- observables

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

ObservableSpec ObservableSpec::sxk(int k) {
    if (k < 1) throw std::invalid_argument("S_x^(k) needs k >= 1");
    ObservableSpec o;
    o.kind = Kind::Sxk;
    o.k = k;
    return o;
}

ObservableSpec ObservableSpec::site_pauli(int site, PauliKind p) {
    ObservableSpec o;
    o.kind = Kind::Site;
    o.site = site;
    o.pauli = p;
    return o;
}

ObservableSpec ObservableSpec::parity() {
    ObservableSpec o;
    o.kind = Kind::Parity;
    return o;
}

ObservableSpec ObservableSpec::custom_op(const PauliOperator& op, std::string label) {
    ObservableSpec o;
    o.kind = Kind::Custom;
    o.custom = op;
    o.label = std::move(label);
    return o;
}

std::string ObservableSpec::name() const {
    switch (kind) {
        case Kind::Sxk: return "Sx" + std::to_string(k);
        case Kind::Site: return std::string(1, pauli_char(pauli)) + std::to_string(site);
        case Kind::Parity: return "parity";
        case Kind::Custom: return label.empty() ? "custom" : label;
    }
    return "?";
}

PauliOperator ObservableSpec::to_pauli(int n) const {
    PauliOperator o(n);
    switch (kind) {
        case Kind::Sxk: {
            if (k > n) throw std::invalid_argument("k exceeds qubit count");
            const double c = 1.0 / binomial(n, k);
            const std::uint64_t full = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
            // enumerate k-subsets by Gosper's hack
            std::uint64_t s = (1ULL << k) - 1;
            while (s <= full) {
                o.add(PauliKey{s, 0}, c);
                std::uint64_t lo = s & (~s + 1), r = s + lo;
                s = (((r ^ s) >> 2) / lo) | r;
            }
            break;
        }
        case Kind::Site:
            if (site < 0 || site >= n) throw std::invalid_argument("observable site out of range");
            o.add(PauliString::single(n, site, pauli), 1.0);
            break;
        case Kind::Parity: o.add(PauliKey{(1ULL << n) - 1, 0}, 1.0); break;
        case Kind::Custom:
            if (!custom || custom->num_qubits() != n) throw std::invalid_argument("custom observable size mismatch");
            return *custom;
    }
    return o;
}

std::optional<PauliKind> ObservableSpec::basis() const {
    switch (kind) {
        case Kind::Sxk:
        case Kind::Parity: return PauliKind::X;
        case Kind::Site: return pauli;
        case Kind::Custom: return std::nullopt;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- Floquet

PauliOperator floquet_hamiltonian_expansion(const TrotterCircuit& c, int order) {
    if (order < 0 || order > 2) throw std::invalid_argument("Floquet expansion order > 2 unsupported");
    if (!c.field.is_constant()) throw std::invalid_argument("Floquet expansion needs a constant field");
    const int n = c.num_qubits();
    const double h = c.field.amplitude;
    ComplexPauliSum hx(n), hzz(n);
    for (int j = 0; j < n; ++j) hx.add(PauliString::single(n, j, PauliKind::X), h);
    for (auto [i, j] : c.graph.edges) hzz.add(PauliString::hermitian(n, 0, (1ULL << i) | (1ULL << j)), 1.0);
    ComplexPauliSum hf = hx;
    hf += hzz;
    if (order >= 1) {
        // The step applies the ZZ layer first, i.e. U = e^{-i dt H_X} e^{-i dt H_ZZ}.
        ComplexPauliSum c1 = commutator(hzz, hx);
        hf += c1 * cplx(0.0, c.dt / 2.0);
        if (order >= 2) {
            ComplexPauliSum t = commutator(hx, c1);
            t += commutator(hzz, c1) * cplx(-1.0);
            hf += t * cplx(c.dt * c.dt / 12.0);
        }
    }
    return hf.to_hermitian(1e-12);
}

}  // namespace dl
