#include "dilution/string_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "dilution/kernels.hpp"
#include "dilution/sim_engines.hpp"

namespace dl {

namespace {

int popc(std::uint64_t v) { return __builtin_popcountll(v); }

void check_dense(int n) {
    if (n > kMaxDensityQubits)
        throw std::length_error("dense operator analysis is limited to N <= 12 qubits (requested " +
                                std::to_string(n) + ")");
}

kernels::LocalLayer rx_layer(const TrotterCircuit& c, int k, double sign) {
    const int n = c.num_qubits();
    const double angle = c.x_angle(k);
    kernels::LocalLayer l;
    l.ops.assign(n, kernels::unitary_super4(kernels::rx(sign * angle)));
    l.active.assign(n, angle != 0.0);
    return l;
}

}  // namespace

void heisenberg_step(DenseOperator& a, const TrotterCircuit& c, int k) {
    auto zz = c.zz_layer_phases();
    for (auto& v : zz) v = std::conj(v);
    auto l = rx_layer(c, k, -1.0);
    l.post_diag = zz.data();
    kernels::apply_layer(a.data(), a.num_qubits(), l);
}

void schrodinger_step(DenseOperator& a, const TrotterCircuit& c, int k) {
    const auto zz = c.zz_layer_phases();
    auto l = rx_layer(c, k, 1.0);
    l.pre_diag = zz.data();
    kernels::apply_layer(a.data(), a.num_qubits(), l);
}

DenseOperator heisenberg_evolve(const PauliOperator& o, const TrotterCircuit& c, int s) {
    check_dense(c.num_qubits());
    if (o.num_qubits() != c.num_qubits()) throw std::invalid_argument("observable size does not match circuit");
    if (s < 0) throw std::invalid_argument("negative depth");
    DenseOperator a = from_pauli_coefficients(o);
    for (int k = s; k >= 1; --k) heisenberg_step(a, c, k);
    return a;
}

bool in_family(std::uint64_t x, std::uint64_t z, PauliKind basis) {
    switch (basis) {
        case PauliKind::X: return z == 0;
        case PauliKind::Y: return x == z;
        case PauliKind::Z: return x == 0;
        case PauliKind::I: return x == 0 && z == 0;
    }
    return false;
}

void project_relevant(DenseOperator& m, PauliKind basis) {
    const std::size_t d = m.dim();
    const double norm = 1.0 / static_cast<double>(d);
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    switch (basis) {
        case PauliKind::X:
#pragma omp parallel for schedule(static)
            for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(d); ++xi) {
                const std::size_t x = static_cast<std::size_t>(xi);
                cplx mean{};
                for (std::size_t b = 0; b < d; ++b) mean += m(b, b ^ x);
                mean *= norm;
                for (std::size_t b = 0; b < d; ++b) m(b, b ^ x) = mean;
            }
            break;
        case PauliKind::Z:
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t col = 0; col < d; ++col)
                    if (r != col) m(r, col) = 0.0;
            break;
        case PauliKind::Y:
#pragma omp parallel for schedule(static)
            for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(d); ++xi) {
                const std::size_t x = static_cast<std::size_t>(xi);
                cplx acc{};
                for (std::size_t b = 0; b < d; ++b) {
                    const cplx v = m(b, b ^ x);
                    acc += (popc(x & b) & 1) ? -v : v;
                }
                const int h = popc(x) & 3;
                const cplx coef = acc * ipow[h] * norm * ipow[h];
                // rows b and b^x pair up, so write into a fresh pass
                for (std::size_t b = 0; b < d; ++b) {
                    if ((b ^ x) < b) continue;
                    const std::size_t b2 = b ^ x;
                    const cplx v1 = (popc(x & b) & 1) ? -coef : coef;    // m(b^x, b)
                    const cplx v2 = (popc(x & b2) & 1) ? -coef : coef;   // m(b, b^x)
                    m(b2, b) = v1;
                    m(b, b2) = v2;
                }
            }
            break;
        case PauliKind::I: {
            const cplx tr = m.trace() * norm;
            for (auto& v : m.storage()) v = 0.0;
            for (std::size_t r = 0; r < d; ++r) m(r, r) = tr;
            break;
        }
    }
}

RelevantProjection project_relevant(const DenseOperator& o_t, const TrotterCircuit& c, int s, int t,
                                    PauliKind basis) {
    if (s > t) throw std::invalid_argument("project_relevant requires s <= t");
    if (s < 0) throw std::invalid_argument("negative depth");
    RelevantProjection r{o_t, basis, s, t};
    project_relevant(r.op, basis);
    for (int k = 1; k <= t - s; ++k) schrodinger_step(r.op, c, k);
    return r;
}

// ---------------------------------------------------------------- sums

StringSums string_sums(const DenseOperator& a, const DenseOperator* rel, const DenseOperator* state,
                       PauliKind basis, const PerturbationSpec* pert) {
    const int n = a.num_qubits();
    const std::size_t d = a.dim();
    const double dd = static_cast<double>(d);
    std::uint64_t smask = 0;
    double fx = 0, fy = 0, fz = 0;
    if (pert) {
        if (pert->sites.empty())
            smask = d - 1;
        else
            for (int j : pert->sites) {
                if (j < 0 || j >= n) throw std::invalid_argument("perturbation site out of range");
                smask |= std::uint64_t{1} << j;
            }
        // weight of the Kraus terms anticommuting with a local X, Y, Z
        fx = pert->w[1] + pert->w[2];
        fy = pert->w[0] + pert->w[2];
        fz = pert->w[0] + pert->w[1];
    }
    std::vector<double> inv3(n + 1);
    for (int l = 0; l <= n; ++l) inv3[l] = std::pow(3.0, -l);

    constexpr int kScalars = 12;
    const int F = kScalars + 2 * (n + 1);
    std::vector<double> part(d * F, 0.0);

#pragma omp parallel
    {
        std::vector<cplx> ca(d), cr(rel ? d : 0), cs(state ? d : 0);
#pragma omp for schedule(static)
        for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(d); ++xi) {
            const std::uint64_t x = static_cast<std::uint64_t>(xi);
            pauli_row_coefficients(a, x, ca.data());
            if (rel) pauli_row_coefficients(*rel, x, cr.data());
            if (state) pauli_row_coefficients(*state, x, cs.data());
            double* p = part.data() + x * F;
            double* ht = p + kScalars;
            double* hr = ht + (n + 1);
            for (std::uint64_t z = 0; z < d; ++z) {
                const int l = popc(x | z);
                const double c = ca[z].real();
                const double c2 = c * c;
                p[0] += c2;
                p[1] += l * c2;
                p[2] += c2 * inv3[l];
                p[3] += l * c2 * inv3[l];
                ht[l] += c2;
                if (in_family(x, z, basis)) hr[l] += c2;
                double dc = 0;
                if (pert) {
                    const int nx = popc(x & ~z & smask), ny = popc(x & z & smask), nz = popc(~x & z & smask);
                    dc = -2.0 * (nx * fx + ny * fy + nz * fz) * c;
                    p[9] += c * dc;
                }
                if (rel) {
                    const double r = cr[z].real();
                    p[4] += r * c;
                    p[5] += r * c * l;
                    p[6] += std::abs(r) * std::abs(c);
                    p[7] += std::abs(r) * std::abs(c) * l;
                    p[8] += r * dc;
                }
                if (state) {
                    const double e = cs[z].real() * dd;  // <P> = tr(rho P)
                    p[10] += c * e;
                    p[11] += dc * e;
                }
            }
        }
    }
    StringSums s;
    s.n = n;
    s.hist_total.assign(n + 1, 0.0);
    s.hist_relevant.assign(n + 1, 0.0);
    std::array<double, kScalars> acc{};
    for (std::size_t x = 0; x < d; ++x) {
        const double* p = part.data() + x * F;
        for (int i = 0; i < kScalars; ++i) acc[i] += p[i];
        for (int l = 0; l <= n; ++l) {
            s.hist_total[l] += p[kScalars + l];
            s.hist_relevant[l] += p[kScalars + n + 1 + l];
        }
    }
    s.cc = acc[0], s.lcc = acc[1], s.dil = acc[2], s.ldil = acc[3];
    s.rc = acc[4], s.lrc = acc[5], s.abs = acc[6], s.labs = acc[7];
    s.rdelta = acc[8], s.cdelta = acc[9], s.expect = acc[10], s.shift = acc[11];
    return s;
}

LengthHistogram length_histogram(const StringSums& s) {
    LengthHistogram h;
    h.total = s.hist_total;
    h.relevant = s.hist_relevant;
    h.diluted.resize(s.hist_total.size());
    for (std::size_t l = 0; l < h.diluted.size(); ++l) h.diluted[l] = s.hist_total[l] * std::pow(3.0, -double(l));
    for (auto* v : {&h.total, &h.relevant, &h.diluted}) {
        double t = 0;
        for (double e : *v) t += e;
        if (t > 0)
            for (double& e : *v) e /= t;
    }
    return h;
}

std::string LengthHistogram::to_csv() const {
    std::ostringstream o;
    o << "k,p_k_total,p_k_relevant,p_k_diluted\n";
    char buf[128];
    for (std::size_t k = 0; k < total.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k, total[k], relevant[k], diluted[k]);
        o << buf;
    }
    return o.str();
}

namespace {

std::string opt_str(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

std::string LengthSeries::to_csv() const {
    std::ostringstream o;
    o << "t,s,L,L_rel,L_abs,r,r_baseline,true_shift\n";
    char buf[64];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.17g", p.L);
        o << t << ',' << p.s << ',' << buf << ',' << opt_str(p.L_rel) << ',' << opt_str(p.L_abs) << ','
          << opt_str(p.r) << ',' << opt_str(p.r_baseline) << ',' << opt_str(p.true_shift) << '\n';
    }
    return o.str();
}

const LengthPoint& LengthSeries::at(int s) const {
    for (const auto& p : points)
        if (p.s == s) return p;
    throw std::out_of_range("depth not in sweep: " + std::to_string(s));
}

LengthSeries relevant_length_sweep(const PauliOperator& o, const TrotterCircuit& c, InitialState init, int t,
                                   const SweepOptions& opt) {
    const int n = c.num_qubits();
    check_dense(n);
    if (t < 0) throw std::invalid_argument("negative time");
    if (opt.stride < 1) throw std::invalid_argument("stride must be >= 1");
    const PauliKind basis = relevant_basis(init);
    const PerturbationSpec* pert = opt.perturbation ? &*opt.perturbation : nullptr;

    DenseOperator a = heisenberg_evolve(o, c, t);
    DenseOperator r = a;
    project_relevant(r, basis);
    DenseOperator rho = product_density(n, init);

    LengthSeries out;
    out.t = t;
    out.n = n;
    out.basis = basis;
    for (int s = t; s >= 0; --s) {
        if (s == t || s == 0 || (t - s) % opt.stride == 0) {
            const StringSums sums = string_sums(a, &r, &rho, basis, pert);
            if (s == t) out.L_dil_t = sums.dil > 0 ? sums.ldil / sums.dil : 0.0;
            LengthPoint p;
            p.s = s;
            p.L = sums.cc > 0 ? sums.lcc / sums.cc : 0.0;
            p.rel_denominator = sums.rc;
            const bool ok = std::abs(sums.rc) >= opt.denominator_tolerance * sums.cc;
            if (ok) p.L_rel = sums.lrc / sums.rc;
            if (sums.abs > opt.denominator_tolerance * sums.cc) p.L_abs = sums.labs / sums.abs;
            p.expectation = sums.expect;
            if (pert) {
                if (ok) p.r = sums.rdelta / sums.rc;
                if (sums.cc > 0) p.r_baseline = sums.cdelta / sums.cc;
                if (std::abs(sums.expect) > opt.denominator_tolerance) p.true_shift = sums.shift / sums.expect;
            }
            out.points.push_back(p);
        }
        if (s == 0) break;
        const int k = t - s + 1;
        schrodinger_step(a, c, k);
        schrodinger_step(r, c, k);
        schrodinger_step(rho, c, k);
    }
    std::reverse(out.points.begin(), out.points.end());
    return out;
}

std::vector<LengthTimePoint> length_vs_time(const PauliOperator& o, const TrotterCircuit& c, PauliKind basis,
                                            int steps, LengthHistogram* final_hist) {
    check_dense(c.num_qubits());
    DenseOperator a = from_pauli_coefficients(o);
    std::vector<LengthTimePoint> out;
    for (int t = 0; t <= steps; ++t) {
        if (t > 0) heisenberg_step(a, c, t);
        const StringSums s = string_sums(a, nullptr, nullptr, basis);
        LengthTimePoint p;
        p.t = t;
        p.L = s.cc > 0 ? s.lcc / s.cc : 0.0;
        double rw = 0, rl = 0;
        for (std::size_t l = 0; l < s.hist_relevant.size(); ++l) {
            rw += s.hist_relevant[l];
            rl += l * s.hist_relevant[l];
        }
        p.L_rel = rw > 0 ? rl / rw : 0.0;
        p.L_dil = s.dil > 0 ? s.ldil / s.dil : 0.0;
        out.push_back(p);
        if (t == steps && final_hist) *final_hist = length_histogram(s);
    }
    return out;
}

// ---------------------------------------------------------------- STE

double SteSeries::max_abs_residual() const {
    double m = 0;
    for (double r : residual) m = std::max(m, std::abs(r));
    return m;
}

SteSeries ste_residual(const PauliOperator& o, const TrotterCircuit& c, int steps) {
    const int n = c.num_qubits();
    check_dense(n);
    const auto& edges = c.graph.edges;
    if (edges.empty()) throw std::invalid_argument("STE needs at least one bond");
    const double ratio = static_cast<double>(edges.size()) / n;
    DenseOperator a = from_pauli_coefficients(o);
    SteSeries s;
    auto extract = [&] {
        double cx = 0, czz = 0;
        for (int j = 0; j < n; ++j) cx += pauli_coefficient(a, PauliKey{std::uint64_t{1} << j, 0}).real();
        for (auto [i, j] : edges)
            czz += pauli_coefficient(a, PauliKey{0, (std::uint64_t{1} << i) | (std::uint64_t{1} << j)}).real();
        s.c_x.push_back(cx / n);
        s.c_zz.push_back(czz / edges.size());
    };
    extract();
    // Heisenberg recursion O(t) = V_t^dagger O(t-1) V_t
    for (int t = 1; t <= steps; ++t) {
        heisenberg_step(a, c, t);
        extract();
    }
    // value of the conserved combination at t = 0 (h/N for O = S_x)
    const double h0 = c.field.at(1);
    const double k0 = s.c_x[0] * h0 + ratio * s.c_zz[0];
    for (int t = 0; t <= steps; ++t) s.residual.push_back(s.c_x[t] * h0 + ratio * s.c_zz[t] - k0);
    for (int t = 0; t < steps; ++t) {
        const double h = c.field.at(t + 1);
        s.step_residual.push_back((s.c_x[t + 1] * h + ratio * s.c_zz[t + 1]) - (s.c_x[t] * h + ratio * s.c_zz[t]));
    }
    return s;
}

// ---------------------------------------------------------------- toy models

PkModel toy_model_pk(double p1, int n) {
    if (p1 < 0.0 || p1 > 1.0) throw std::invalid_argument("p1 must lie in [0, 1]");
    if (n < 1) throw std::invalid_argument("N must be >= 1");
    PkModel m;
    m.n = n;
    m.p1 = p1;
    m.p.assign(n + 1, 0.0);
    const double four_n = std::pow(4.0, n);
    const double pref = (1.0 - p1) / (1.0 - 3.0 * n / four_n);
    for (int k = 0; k <= n; ++k)
        m.p[k] = k == 1 ? p1 : pref * std::pow(3.0, k) / four_n * binomial(n, k);
    double w = 0, wl = 0;
    for (int k = 0; k <= n; ++k) {
        m.sum += m.p[k];
        m.mean += k * m.p[k];
        w += m.p[k] * std::pow(3.0, -k);
        wl += k * m.p[k] * std::pow(3.0, -k);
    }
    m.diluted_mean = wl / w;
    return m;
}

InterferenceStats toy_model_interference(double p1, double q1, int n, int num_samples, std::mt19937_64& rng) {
    if (num_samples < 1) throw std::invalid_argument("need at least one sample");
    if (n > 30) throw std::invalid_argument("toy interference model supports N <= 30");
    const auto p = toy_model_pk(p1, n).p;
    const auto q = toy_model_pk(q1, n).p;
    InterferenceStats st;
    std::vector<double> mag(n + 1), count(n + 1);
    double an = 0, ad = 0;
    for (int k = 0; k <= n; ++k) {
        count[k] = std::pow(3.0, k) * binomial(n, k);
        // |c_P c_rel_P| for one string of length k
        mag[k] = std::sqrt(p[k] * q[k]) / count[k];
        an += k * std::sqrt(p[k] * q[k]);
        ad += std::sqrt(p[k] * q[k]);
    }
    st.l_abs = an / ad;
    st.samples.resize(num_samples);
    for (int i = 0; i < num_samples; ++i) {
        double num = 0, den = 0;
        // an exactly cancelling denominator leaves the ratio undefined; redraw
        for (int attempt = 0; den == 0.0 && attempt < 1000; ++attempt) {
            num = 0;
            for (int k = 0; k <= n; ++k) {
                if (mag[k] == 0.0) continue;
                const auto m = static_cast<long long>(std::llround(count[k]));
                std::binomial_distribution<long long> b(m, 0.5);
                const double signed_sum = mag[k] * static_cast<double>(2 * b(rng) - m);
                num += k * signed_sum;
                den += signed_sum;
            }
        }
        st.samples[i] = num / den;
    }
    std::vector<double> sorted = st.samples;
    std::sort(sorted.begin(), sorted.end());
    st.median = num_samples % 2 ? sorted[num_samples / 2]
                                : 0.5 * (sorted[num_samples / 2 - 1] + sorted[num_samples / 2]);
    double tot = 0;
    for (double v : st.samples) tot += v;
    st.mean = tot / num_samples;
    return st;
}

double predict_rho(const std::vector<double>& l_rel, int n, int t, double c) {
    if (n < 1 || t < 1) throw std::invalid_argument("predict_rho needs N, t >= 1");
    double s = 0;
    for (double v : l_rel) s += v;
    return c / (static_cast<double>(n) * t) * s;
}

// ---------------------------------------------------------------- correlator

PauliString bond_kraus(int n, int i, int j) {
    PauliString k = PauliString::single(n, i, PauliKind::Z);
    return multiply(k, PauliString::single(n, j, PauliKind::Y));
}

namespace {

void sv_step_inverse(StateVector& psi, const TrotterCircuit& c, int k, const std::vector<cplx>& zz_conj) {
    std::vector<double> ang(psi.n, -c.x_angle(k));
    kernels::sv_apply_rx_layer(psi.amp.data(), psi.n, ang);
    kernels::sv_apply_diag(psi.amp.data(), psi.n, zz_conj.data());
}

void sv_pauli(StateVector& psi, const PauliString& p) {
    kernels::sv_apply_pauli(psi.amp.data(), psi.n, p.x, p.z, p.phase_factor());
}

// U_{t*} U_t^dagger K U_t |init>, given U_t |init>
StateVector kicked_state(const TrotterCircuit& c, const StateVector& at_t, int t, int t_star, const PauliString& k,
                         const std::vector<cplx>& zz, const std::vector<cplx>& zz_conj) {
    StateVector psi = at_t;
    sv_pauli(psi, k);
    if (t <= t_star)
        for (int s = t + 1; s <= t_star; ++s) apply_step(psi, c, s, zz);
    else
        for (int s = t; s > t_star; --s) sv_step_inverse(psi, c, s, zz_conj);
    return psi;
}

StateVector apply_operator(const PauliOperator& o, const StateVector& psi) {
    StateVector out;
    out.n = psi.n;
    out.amp.assign(psi.amp.size(), 0.0);
    for (const auto& [key, coef] : o.terms()) {
        StateVector tmp = psi;
        PauliString p(psi.n, key.x, key.z, static_cast<std::uint8_t>(popc(key.x & key.z) & 3));
        sv_pauli(tmp, p);
        for (std::size_t i = 0; i < tmp.amp.size(); ++i) out.amp[i] += coef * tmp.amp[i];
    }
    return out;
}

cplx inner(const StateVector& a, const StateVector& b) {
    cplx s{};
    for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s;
}

struct Phases {
    std::vector<cplx> zz, zz_conj;
    explicit Phases(const TrotterCircuit& c) : zz(c.zz_layer_phases()), zz_conj(zz) {
        for (auto& v : zz_conj) v = std::conj(v);
    }
};

}  // namespace

cplx trotter_noise_correlator(const TrotterCircuit& c, const PauliOperator& o, int t_star, const PauliString& kq,
                              int s, const PauliString& kp, int t) {
    if (s < 0 || t < 0 || t_star < 0) throw std::invalid_argument("negative time");
    const Phases ph(c);
    auto evolved = [&](int steps) {
        StateVector psi = product_state(c.num_qubits(), InitialState::Plus);
        for (int k = 1; k <= steps; ++k) apply_step(psi, c, k, ph.zz);
        return psi;
    };
    const StateVector a = kicked_state(c, evolved(s), s, t_star, kq, ph.zz, ph.zz_conj);
    const StateVector b = kicked_state(c, evolved(t), t, t_star, kp, ph.zz, ph.zz_conj);
    return inner(a, apply_operator(o, b));
}

CorrelatorGrid correlator_time_grid(const TrotterCircuit& c, const PauliOperator& o, int t_star, const PauliString& k,
                                    int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    const Phases ph(c);
    std::vector<int> times;
    for (int t = 0; t <= t_star; t += stride) times.push_back(t);
    std::vector<StateVector> kicked(times.size()), ok(times.size());
    StateVector psi = product_state(c.num_qubits(), InitialState::Plus);
    int at = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        while (at < times[i]) apply_step(psi, c, ++at, ph.zz);
        kicked[i] = kicked_state(c, psi, at, t_star, k, ph.zz, ph.zz_conj);
        ok[i] = apply_operator(o, kicked[i]);
    }
    CorrelatorGrid g;
    g.row_index = times;
    g.col_index = times;
    g.value.assign(times.size(), std::vector<cplx>(times.size()));
    for (std::size_t r = 0; r < times.size(); ++r)
        for (std::size_t col = 0; col < times.size(); ++col) g.value[r][col] = inner(kicked[r], ok[col]);
    return g;
}

CorrelatorGrid correlator_bond_grid(const TrotterCircuit& c, const PauliOperator& o, int t_star, int s0) {
    const Phases ph(c);
    const int n = c.num_qubits();
    StateVector psi = product_state(n, InitialState::Plus);
    for (int k = 1; k <= s0; ++k) apply_step(psi, c, k, ph.zz);
    const auto& edges = c.graph.edges;
    std::vector<StateVector> kicked(edges.size()), ok(edges.size());
    for (std::size_t p = 0; p < edges.size(); ++p) {
        kicked[p] = kicked_state(c, psi, s0, t_star, bond_kraus(n, edges[p].first, edges[p].second), ph.zz,
                                 ph.zz_conj);
        ok[p] = apply_operator(o, kicked[p]);
    }
    CorrelatorGrid g;
    for (std::size_t p = 0; p < edges.size(); ++p) {
        g.row_index.push_back(static_cast<int>(p));
        g.col_index.push_back(static_cast<int>(p));
    }
    g.value.assign(edges.size(), std::vector<cplx>(edges.size()));
    for (std::size_t q = 0; q < edges.size(); ++q)
        for (std::size_t p = 0; p < edges.size(); ++p) g.value[q][p] = inner(kicked[q], ok[p]);
    return g;
}

std::string CorrelatorGrid::to_csv(const std::string& row_name, const std::string& col_name) const {
    std::ostringstream o;
    o << row_name << ',' << col_name << ",re,im\n";
    char buf[96];
    for (std::size_t r = 0; r < row_index.size(); ++r)
        for (std::size_t c = 0; c < col_index.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", row_index[r], col_index[c], value[r][c].real(),
                          value[r][c].imag());
            o << buf;
        }
    return o.str();
}

}  // namespace dl
