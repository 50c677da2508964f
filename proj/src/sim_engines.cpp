#include "dilution/sim_engines.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace dl {

namespace {

const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

int popc(std::uint64_t v) { return __builtin_popcountll(v); }

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool is_x_type(const ObservableSpec& s) {
    return s.kind == ObservableSpec::Kind::Sxk || s.kind == ObservableSpec::Kind::Parity ||
           (s.kind == ObservableSpec::Kind::Site && s.pauli == PauliKind::X);
}

void check_sv_budget(int n) {
    if (n > kMaxStatevectorQubits)
        throw std::length_error("statevector engine is limited to N <= 26 qubits (requested " + std::to_string(n) +
                                "); use the free-fermion Gaussian trajectories for large 1D chains");
}

kernels::Super4 kraus_map_1q(const NoiseChannel& noise) {
    double w[4] = {0, 0, 0, 0};
    for (auto& t : noise.terms) w[static_cast<int>(t.kinds[0])] += t.weight;
    return kernels::pauli_channel_super4(w[0], w[1], w[2], w[3]);
}

kernels::Super16 kraus_map_2q(const NoiseChannel& noise, double id_weight, double scale) {
    std::array<double, 16> w{};
    w[0] = id_weight;
    for (auto& t : noise.terms) w[static_cast<int>(t.kinds[0]) + 4 * static_cast<int>(t.kinds[1])] += scale * t.weight;
    return kernels::pauli_channel_super16(w);
}

PauliString term_string(int n, const KrausTerm& t, int a, int b) {
    PauliString p = PauliString::single(n, a, t.kinds[0]);
    if (b >= 0 && t.kinds[1] != PauliKind::I) p = multiply(p, PauliString::single(n, b, t.kinds[1]));
    return p;
}

void apply_pauli(StateVector& psi, const PauliString& p) {
    kernels::sv_apply_pauli(psi.amp.data(), psi.n, p.x, p.z, p.phase_factor());
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double StateVector::norm_sq() const {
    double s = 0;
    for (auto& a : amp) s += std::norm(a);
    return s;
}

StateVector product_state(int n, InitialState s) {
    check_sv_budget(n);
    if (n < 1) throw std::invalid_argument("qubit count must be positive");
    StateVector psi;
    psi.n = n;
    const std::size_t d = std::size_t{1} << n;
    psi.amp.assign(d, cplx{});
    const double a = std::pow(2.0, -0.5 * n);
    switch (s) {
        case InitialState::Zero: psi.amp[0] = 1.0; break;
        case InitialState::Plus:
            for (auto& v : psi.amp) v = a;
            break;
        case InitialState::YPlus:
            for (std::size_t i = 0; i < d; ++i) psi.amp[i] = a * kIPow[popc(i) & 3];
            break;
    }
    return psi;
}

DenseOperator product_density(int n, InitialState s) {
    check_density_budget(n);
    StateVector psi = product_state(n, s);
    DenseOperator rho(n);
    const std::size_t d = rho.dim();
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) rho(a, b) = psi.amp[a] * std::conj(psi.amp[b]);
    return rho;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed ^ (0xd1b54a32d192ed03ULL * (index + 1));
    std::seed_seq seq{splitmix64(x), splitmix64(x), splitmix64(x), splitmix64(x)};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------- observables

std::vector<double> x_basis_probabilities(const StateVector& psi) {
    std::vector<cplx> t = psi.amp;
    walsh_hadamard(t.data(), t.size());
    const double norm = 1.0 / static_cast<double>(t.size());
    std::vector<double> p(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) p[i] = std::norm(t[i]) * norm;
    return p;
}

std::vector<double> x_string_expectations(const StateVector& psi) {
    std::vector<double> g = x_basis_probabilities(psi);
    walsh_hadamard(g.data(), g.size());
    return g;
}

std::vector<double> x_string_expectations(const DenseOperator& rho) {
    auto s = kernels::xdiag_sums(rho.data(), rho.num_qubits());
    std::vector<double> g(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) g[i] = s[i].real();
    return g;
}

std::vector<double> x_basis_probabilities(const DenseOperator& rho) {
    std::vector<double> g = x_string_expectations(rho);
    walsh_hadamard(g.data(), g.size());
    const double norm = 1.0 / static_cast<double>(g.size());
    for (auto& v : g) v *= norm;
    return g;
}

double expectation(const StateVector& psi, const PauliOperator& o) {
    const std::size_t d = psi.amp.size();
    double total = 0;
    for (auto& [k, c] : o.terms()) {
        cplx acc{};
        for (std::size_t b = 0; b < d; ++b) {
            cplx v = std::conj(psi.amp[b ^ k.x]) * psi.amp[b];
            acc += (popc(k.z & b) & 1) ? -v : v;
        }
        total += c * (acc * kIPow[popc(k.x & k.z) & 3]).real();
    }
    return total;
}

double expectation(const DenseOperator& rho, const PauliOperator& o) {
    const std::size_t d = rho.dim();
    double total = 0;
    for (auto& [k, c] : o.terms()) {
        cplx acc{};
        for (std::size_t b = 0; b < d; ++b) {
            cplx v = rho(b, b ^ k.x);
            acc += (popc(k.z & b) & 1) ? -v : v;
        }
        total += c * (acc * kIPow[popc(k.x & k.z) & 3]).real();
    }
    return total;
}

double sxk_from_x_strings(const std::vector<double>& xexp, int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("k outside [0, N]");
    double s = 0;
    for (std::size_t m = 0; m < xexp.size(); ++m)
        if (popc(m) == k) s += xexp[m];
    return s / binomial(n, k);
}

ObservableSet::ObservableSet(int n, std::vector<ObservableSpec> specs) : n_(n), specs_(std::move(specs)) {
    for (auto& s : specs_) {
        xtype_.push_back(is_x_type(s));
        ops_.push_back(xtype_.back() ? PauliOperator(n) : s.to_pauli(n));
        if (s.kind == ObservableSpec::Kind::Sxk && s.k > n) throw std::invalid_argument("k exceeds qubit count");
        if (s.kind == ObservableSpec::Kind::Site && (s.site < 0 || s.site >= n))
            throw std::invalid_argument("observable site out of range");
    }
}

std::vector<std::string> ObservableSet::names() const {
    std::vector<std::string> out;
    for (auto& s : specs_) out.push_back(s.name());
    return out;
}

std::vector<double> ObservableSet::finish(const std::vector<double>& xexp,
                                          const std::function<double(const PauliOperator&)>& generic) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const auto& s = specs_[i];
        if (!xtype_[i]) {
            out.push_back(generic(ops_[i]));
            continue;
        }
        switch (s.kind) {
            case ObservableSpec::Kind::Sxk: out.push_back(sxk_from_x_strings(xexp, n_, s.k)); break;
            case ObservableSpec::Kind::Parity: out.push_back(xexp[(std::size_t{1} << n_) - 1]); break;
            default: out.push_back(xexp[std::size_t{1} << s.site]); break;
        }
    }
    return out;
}

std::vector<double> ObservableSet::evaluate(const StateVector& psi) const {
    bool any_x = false;
    for (char c : xtype_) any_x |= c != 0;
    std::vector<double> xexp = any_x ? x_string_expectations(psi) : std::vector<double>{};
    return finish(xexp, [&](const PauliOperator& o) { return expectation(psi, o); });
}

std::vector<double> ObservableSet::evaluate(const DenseOperator& rho) const {
    bool any_x = false;
    for (char c : xtype_) any_x |= c != 0;
    std::vector<double> xexp = any_x ? x_string_expectations(rho) : std::vector<double>{};
    return finish(xexp, [&](const PauliOperator& o) { return expectation(rho, o); });
}

// ---------------------------------------------------------------- results

std::size_t QuenchResult::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw std::out_of_range("no observable named " + name);
}

std::string QuenchResult::to_csv() const {
    std::string s = "# config_hash=" + config_hash + "\nstep,observable,value,stderr,engine\n";
    for (std::size_t t = 0; t < steps.size(); ++t)
        for (std::size_t o = 0; o < names.size(); ++o) {
            s += std::to_string(steps[t]) + ',' + names[o] + ',' + fmt_double(value[o][t]) + ',';
            s += fmt_double(stderr_.empty() ? 0.0 : stderr_[o][t]) + ',' + engine + '\n';
        }
    return s;
}

namespace {
QuenchResult make_result(const std::string& engine, const ObservableSet& obs, int steps) {
    QuenchResult r;
    r.engine = engine;
    r.names = obs.names();
    for (int t = 0; t <= steps; ++t) r.steps.push_back(t);
    r.value.assign(r.names.size(), std::vector<double>(steps + 1, 0.0));
    r.stderr_.assign(r.names.size(), std::vector<double>(steps + 1, 0.0));
    return r;
}
}  // namespace

// ---------------------------------------------------------------- statevector

void apply_step(StateVector& psi, const TrotterCircuit& c, int step, const std::vector<cplx>& zz_phases) {
    kernels::sv_apply_diag(psi.amp.data(), psi.n, zz_phases.data());
    std::vector<double> ang(psi.n, c.x_angle(step));
    kernels::sv_apply_rx_layer(psi.amp.data(), psi.n, ang);
}

void evolve_statevector(const TrotterCircuit& c, InitialState init, int steps,
                        const std::function<void(int, const StateVector&)>& visit) {
    if (steps < 0) throw std::invalid_argument("negative step count");
    StateVector psi = product_state(c.num_qubits(), init);
    auto zz = c.zz_layer_phases();
    visit(0, psi);
    for (int t = 1; t <= steps; ++t) {
        apply_step(psi, c, t, zz);
        visit(t, psi);
    }
}

std::vector<StateVector> evolve_statevector(const TrotterCircuit& c, InitialState init, int steps) {
    std::vector<StateVector> out;
    evolve_statevector(c, init, steps, [&](int, const StateVector& s) { out.push_back(s); });
    return out;
}

QuenchResult run_statevector(const TrotterCircuit& c, InitialState init, int steps, const ObservableSet& obs) {
    QuenchResult r = make_result("statevector", obs, steps);
    evolve_statevector(c, init, steps, [&](int t, const StateVector& psi) {
        auto v = obs.evaluate(psi);
        for (std::size_t o = 0; o < v.size(); ++o) r.value[o][t] = v[o];
    });
    return r;
}

// ---------------------------------------------------------------- density matrix

void check_density_budget(int n) {
    if (n > kMaxDensityQubits)
        throw std::length_error("density-matrix engine is limited to N <= 12 qubits (requested " + std::to_string(n) +
                                ")");
}

int DenseOp::num_locations() const {
    if (kind == Kind::Two) return has_two_ins ? 1 : 0;
    int c = 0;
    for (char a : site_ins_active) c += a != 0;
    return c;
}

DensityEngine::DensityEngine(const TrotterCircuit& c, const NoiseChannel& noise) : c_(c), noise_(noise) {
    check_density_budget(c.num_qubits());
    if (noise.arity == 2 && noise.cadence != NoiseChannel::Cadence::AfterGate)
        throw std::invalid_argument("two-site noise requires per-gate cadence");
    if (noise.arity == 1 && noise.cadence != NoiseChannel::Cadence::AfterStep)
        throw std::invalid_argument("single-site noise uses per-step cadence");
    zz_ = c.zz_layer_phases();
}

int DensityEngine::locations_per_step() const { return noise_.locations_per_step(c_); }

std::vector<DenseOp> DensityEngine::step_ops(int step) const {
    const int n = c_.num_qubits();
    const auto u = kernels::unitary_super4(kernels::rx(c_.x_angle(step)));
    const bool rot = c_.x_angle(step) != 0.0;
    std::vector<DenseOp> ops;
    if (noise_.arity == 1) {
        DenseOp op;
        op.kind = DenseOp::Kind::Layer;
        op.diag = zz_;
        op.site_ops.assign(n, u);
        op.site_active.assign(n, rot);
        op.site_ins.assign(n, kernels::identity_super4());
        op.site_ins_active.assign(n, 0);
        if (!noise_.terms.empty()) {
            const auto kmap = kraus_map_1q(noise_);
            kernels::Super4 chan = kernels::identity_super4();
            for (int i = 0; i < 16; ++i) chan[i] = noise_.identity_weight() * chan[i] + noise_.epsilon * kmap[i];
            for (int j : noise_.active_sites(n)) {
                if (j < 0 || j >= n) throw std::invalid_argument("noise site out of range");
                if (noise_.epsilon != 0.0) {
                    op.site_ops[j] = kernels::compose(chan, u);
                    op.site_active[j] = 1;
                }
                op.site_ins[j] = kmap;
                op.site_ins_active[j] = 1;
            }
        }
        ops.push_back(std::move(op));
        return ops;
    }
    const auto chan = kraus_map_2q(noise_, noise_.identity_weight(), noise_.epsilon);
    const auto kmap = kraus_map_2q(noise_, 0.0, 1.0);
    for (auto [i, j] : c_.graph.ordered_edges()) {
        DenseOp g;
        g.kind = DenseOp::Kind::Diag;
        g.diag = c_.zz_gate_phases(i, j);
        ops.push_back(std::move(g));
        DenseOp e;
        e.kind = DenseOp::Kind::Two;
        e.a = i, e.b = j;
        e.two = noise_.epsilon != 0.0 ? chan : kernels::identity_super16();
        e.has_two_ins = true;
        e.two_ins = kmap;
        ops.push_back(std::move(e));
    }
    DenseOp x;
    x.kind = DenseOp::Kind::Layer;
    x.site_ops.assign(n, u);
    x.site_active.assign(n, rot);
    x.site_ins.assign(n, kernels::identity_super4());
    x.site_ins_active.assign(n, 0);
    ops.push_back(std::move(x));
    return ops;
}

void DensityEngine::apply(const DenseOp& op, DenseOperator& m) {
    const int n = m.num_qubits();
    switch (op.kind) {
        case DenseOp::Kind::Layer: {
            kernels::LocalLayer l{op.site_ops, op.site_active, op.diag.empty() ? nullptr : op.diag.data(), nullptr};
            kernels::apply_layer(m.data(), n, l);
            break;
        }
        case DenseOp::Kind::Diag: kernels::apply_diag_conj(m.data(), n, op.diag.data()); break;
        case DenseOp::Kind::Two:
            if (op.two != kernels::identity_super16()) kernels::apply_super16(m.data(), n, op.a, op.b, op.two);
            break;
    }
}

void DensityEngine::accumulate_insertions(const DenseOp& op, const DenseOperator& src, DenseOperator& dst) {
    const int n = src.num_qubits();
    if (op.kind == DenseOp::Kind::Layer) {
        if (op.num_locations() == 0) return;
        kernels::LocalLayer l{op.site_ins, op.site_ins_active, nullptr, nullptr};
        kernels::accumulate_layer(src.data(), dst.data(), n, l);
    } else if (op.kind == DenseOp::Kind::Two && op.has_two_ins) {
        DenseOperator tmp = src;
        kernels::apply_super16(tmp.data(), n, op.a, op.b, op.two_ins);
        auto& d = dst.storage();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += tmp.data()[i];
    }
}

void DensityEngine::accumulate_insertion(const DenseOp& op, int loc, const DenseOperator& src, DenseOperator& dst) {
    if (op.kind != DenseOp::Kind::Layer) {
        if (loc != 0) throw std::out_of_range("location index");
        accumulate_insertions(op, src, dst);
        return;
    }
    int seen = 0;
    for (std::size_t j = 0; j < op.site_ins_active.size(); ++j) {
        if (!op.site_ins_active[j]) continue;
        if (seen++ != loc) continue;
        std::vector<char> only(op.site_ins_active.size(), 0);
        only[j] = 1;
        kernels::LocalLayer l{op.site_ins, only, nullptr, nullptr};
        kernels::accumulate_layer(src.data(), dst.data(), src.num_qubits(), l);
        return;
    }
    throw std::out_of_range("location index");
}

void DensityEngine::step(DenseOperator& rho, int step) const {
    for (const auto& op : step_ops(step)) apply(op, rho);
}

QuenchResult run_density_matrix(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int steps,
                                const ObservableSet& obs) {
    DensityEngine eng(c, noise);
    DenseOperator rho = product_density(c.num_qubits(), init);
    QuenchResult r = make_result("density_matrix", obs, steps);
    auto record = [&](int t) {
        auto v = obs.evaluate(rho);
        for (std::size_t o = 0; o < v.size(); ++o) r.value[o][t] = v[o];
    };
    record(0);
    for (int t = 1; t <= steps; ++t) {
        eng.step(rho, t);
        record(t);
    }
    return r;
}

// ---------------------------------------------------------------- trajectories

std::vector<std::vector<double>> run_single_trajectory(const TrotterCircuit& c, const NoiseChannel& noise,
                                                       InitialState init, int steps, const ObservableSet& obs,
                                                       std::mt19937_64& rng, std::vector<ErrorRecord>* records,
                                                       const std::optional<ForcedInsertion>& forced) {
    const int n = c.num_qubits();
    StateVector psi = product_state(n, init);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const bool per_gate = noise.arity == 2;
    const auto zz = per_gate ? std::vector<cplx>{} : c.zz_layer_phases();
    const auto sites = noise.active_sites(n);
    const auto edges = c.graph.ordered_edges();
    std::vector<std::vector<double>> out;
    out.push_back(obs.evaluate(psi));

    auto maybe_error = [&](int step, int loc, int a, int b) {
        if (noise.epsilon > 0.0 && !noise.terms.empty()) {
            double r = uni(rng), acc = 0.0;
            for (std::size_t u = 0; u < noise.terms.size(); ++u) {
                acc += noise.epsilon * noise.terms[u].weight;
                if (r < acc) {
                    apply_pauli(psi, term_string(n, noise.terms[u], a, b));
                    if (records) records->push_back({step, loc, static_cast<std::uint8_t>(u)});
                    break;
                }
            }
        }
        if (forced && forced->step == step && forced->location == loc)
            apply_pauli(psi, term_string(n, noise.terms.at(forced->term), a, b));
    };

    for (int t = 1; t <= steps; ++t) {
        if (!per_gate) {
            kernels::sv_apply_diag(psi.amp.data(), n, zz.data());
        } else {
            const cplx same = std::polar(1.0, -c.dt), diff = std::polar(1.0, c.dt);
            for (std::size_t e = 0; e < edges.size(); ++e) {
                auto [i, j] = edges[e];
                for (std::size_t a = 0; a < psi.amp.size(); ++a) psi.amp[a] *= (((a >> i) ^ (a >> j)) & 1) ? diff : same;
                maybe_error(t, static_cast<int>(e), i, j);
            }
        }
        std::vector<double> ang(n, c.x_angle(t));
        kernels::sv_apply_rx_layer(psi.amp.data(), n, ang);
        if (!per_gate)
            for (std::size_t l = 0; l < sites.size(); ++l) maybe_error(t, static_cast<int>(l), sites[l], -1);
        out.push_back(obs.evaluate(psi));
    }
    return out;
}

QuenchResult evolve_trajectories(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int steps,
                                 const ObservableSet& obs, TrajectoryBatch& batch) {
    check_sv_budget(c.num_qubits());
    if (batch.num_trajectories < 1) throw std::invalid_argument("need at least one trajectory");
    const int m = batch.num_trajectories;
    std::vector<std::vector<std::vector<double>>> per(m);
    std::vector<std::vector<ErrorRecord>> recs(m);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < m; ++i) {
        auto rng = make_stream(batch.seed, static_cast<std::uint64_t>(i));
        per[i] = run_single_trajectory(c, noise, init, steps, obs, rng, &recs[i]);
    }
    QuenchResult r = make_result("trajectories", obs, steps);
    const std::size_t no = r.names.size();
    for (int t = 0; t <= steps; ++t)
        for (std::size_t o = 0; o < no; ++o) {
            double s = 0;
            for (int i = 0; i < m; ++i) s += per[i][t][o];
            const double mean = s / m;
            double v = 0;
            for (int i = 0; i < m; ++i) v += (per[i][t][o] - mean) * (per[i][t][o] - mean);
            r.value[o][t] = mean;
            r.stderr_[o][t] = m > 1 ? std::sqrt(v / (m - 1) / m) : 0.0;
        }
    batch.error_counts.assign(m, 0);
    for (int i = 0; i < m; ++i) batch.error_counts[i] = static_cast<int>(recs[i].size());
    if (batch.keep_records)
        batch.records = std::move(recs);
    else
        batch.records.clear();
    return r;
}

// ---------------------------------------------------------------- shots and metrics

std::vector<std::uint64_t> sample_bitstrings(const std::vector<double>& probs, int shots, std::mt19937_64& rng) {
    std::vector<double> w(probs.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::max(0.0, probs[i]);
    std::discrete_distribution<std::uint64_t> dist(w.begin(), w.end());
    std::vector<std::uint64_t> out(shots);
    for (auto& s : out) s = dist(rng);
    return out;
}

namespace {
// e_k of N values with m entries equal to -1, for all k
std::vector<double> elementary_by_minus_count(int n, int m) {
    std::vector<double> poly(n + 1, 0.0);
    poly[0] = 1.0;
    for (int j = 0; j < n; ++j) {
        double x = j < m ? -1.0 : 1.0;
        for (int k = j + 1; k >= 1; --k) poly[k] += x * poly[k - 1];
    }
    return poly;
}
}  // namespace

double estimate_sxk_from_samples(const std::vector<std::vector<int>>& outcomes, int k) {
    if (outcomes.empty()) throw std::invalid_argument("no shots");
    const int n = static_cast<int>(outcomes[0].size());
    if (k < 0 || k > n) throw std::invalid_argument("k exceeds qubit count");
    double total = 0;
    for (auto& shot : outcomes) {
        if (static_cast<int>(shot.size()) != n) throw std::invalid_argument("ragged shots");
        std::vector<double> poly(n + 1, 0.0);
        poly[0] = 1.0;
        for (int j = 0; j < n; ++j) {
            if (shot[j] != 1 && shot[j] != -1) throw std::invalid_argument("outcomes must be +1 or -1");
            for (int q = j + 1; q >= 1; --q) poly[q] += shot[j] * poly[q - 1];
        }
        total += poly[k];
    }
    return total / static_cast<double>(outcomes.size()) / binomial(n, k);
}

std::vector<double> estimate_all_sxk(const std::vector<std::uint64_t>& shots, int n) {
    if (shots.empty()) throw std::invalid_argument("no shots");
    std::vector<std::vector<double>> table(n + 1);
    for (int m = 0; m <= n; ++m) table[m] = elementary_by_minus_count(n, m);
    std::vector<double> counts(n + 1, 0.0);
    for (auto s : shots) counts[popc(s)] += 1.0;
    std::vector<double> out(n + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        double acc = 0;
        for (int m = 0; m <= n; ++m) acc += counts[m] * table[m][k];
        out[k] = acc / static_cast<double>(shots.size()) / binomial(n, k);
    }
    return out;
}

std::vector<std::optional<double>> decay_rate(const std::vector<double>& noisy, const std::vector<double>& noiseless,
                                              const std::vector<int>& steps, double tol) {
    if (noisy.size() != noiseless.size() || noisy.size() != steps.size())
        throw std::invalid_argument("series are not aligned");
    std::vector<std::optional<double>> out(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i] <= 0 || std::abs(noiseless[i]) < tol) continue;
        const double ratio = noisy[i] / noiseless[i];
        if (!(ratio > 0.0)) continue;
        out[i] = -std::log(ratio) / steps[i];
    }
    return out;
}

std::vector<std::optional<double>> normalized_difference(const std::vector<double>& noisy,
                                                         const std::vector<double>& noiseless,
                                                         const std::vector<int>& steps, double epsilon, int window) {
    if (epsilon == 0.0) throw std::invalid_argument("normalized difference needs epsilon != 0");
    if (window < 0 || window % 2) throw std::invalid_argument("window must be even");
    if (noisy.size() != noiseless.size() || noisy.size() != steps.size())
        throw std::invalid_argument("series are not aligned");
    std::vector<std::optional<double>> out(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const int t = steps[i];
        if (t <= 0) continue;
        double num = 0, den = 0;
        for (std::size_t s = 0; s < steps.size(); ++s)
            if (std::abs(steps[s] - t) <= window / 2) {
                num += std::abs(noisy[s] - noiseless[s]);
                den += std::abs(noiseless[s]);
            }
        if (den <= 0.0) continue;
        out[i] = num / den / (epsilon * t);
    }
    return out;
}

}  // namespace dl
