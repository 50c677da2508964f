#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dilution/model.hpp"
#include "dilution/pauli.hpp"

namespace dl {

// ---------------------------------------------------------------- Heisenberg frame

// A -> V_k^dagger A V_k for physical step k
void heisenberg_step(DenseOperator& a, const TrotterCircuit& c, int k);
// A -> V_k A V_k^dagger (undoes heisenberg_step; also the Schrodinger step)
void schrodinger_step(DenseOperator& a, const TrotterCircuit& c, int k);
// U_s^dagger O U_s with U_s = V_s ... V_1
DenseOperator heisenberg_evolve(const PauliOperator& o, const TrotterCircuit& c, int s);

// Keeps only the strings of the relevant family (X, Y or Z strings).
void project_relevant(DenseOperator& m, PauliKind basis);
bool in_family(std::uint64_t x, std::uint64_t z, PauliKind basis);

struct RelevantProjection {
    DenseOperator op;
    PauliKind basis = PauliKind::X;
    int s = 0, t = 0;
};
// O_rel(s;t) from O(t): project, then undo the last t - s Heisenberg layers
// (physical steps 1..t-s, O(t) being the depth-t operator of a t-step circuit).
RelevantProjection project_relevant(const DenseOperator& o_t, const TrotterCircuit& c, int s, int t,
                                    PauliKind basis);

// ---------------------------------------------------------------- length diagnostics

// Per-site Kraus weights (w_X, w_Y, w_Z) of a Pauli channel plus the sites it acts on.
struct PerturbationSpec {
    std::array<double, 3> w{0.25, 0.25, 0.25};
    std::vector<int> sites;  // empty: all sites
};

struct StringSums {
    int n = 0;
    double cc = 0, lcc = 0;      // sum |c|^2, sum l |c|^2
    double dil = 0, ldil = 0;    // same with 3^-l
    double rc = 0, lrc = 0;      // sum c_rel c, sum c_rel c l
    double abs = 0, labs = 0;    // sum |c_rel||c|, with l
    double rdelta = 0, cdelta = 0;  // sum c_rel dc, sum c dc
    double expect = 0, shift = 0;   // sum c <P>, sum dc <P>
    std::vector<double> hist_total, hist_relevant;  // sum |c|^2 per length
};

// Streams the Pauli coefficients of `a` (and optionally `rel`, `state`) one
// x-row at a time; O(4^N N) work, O(2^N) scratch per thread.
StringSums string_sums(const DenseOperator& a, const DenseOperator* rel, const DenseOperator* state,
                       PauliKind basis, const PerturbationSpec* pert = nullptr);

struct LengthHistogram {
    std::vector<double> total, relevant, diluted;  // each normalized to 1
    std::string to_csv() const;
};
LengthHistogram length_histogram(const StringSums& s);

struct LengthPoint {
    int s = 0;
    double L = 0;
    std::optional<double> L_rel, L_abs;
    double rel_denominator = 0;
    std::optional<double> r, r_baseline, true_shift;  // filled when a perturbation is given
    double expectation = 0;                          // <O(t)> recomputed at depth s
};

struct LengthSeries {
    int t = 0;
    int n = 0;
    PauliKind basis = PauliKind::X;
    std::vector<LengthPoint> points;  // s = t, t-1, ..., 0 reordered ascending
    double L_dil_t = 0;
    std::string to_csv() const;
    const LengthPoint& at(int s) const;
};

struct SweepOptions {
    int stride = 1;  // evaluate every stride-th depth (plus s = 0 and s = t)
    std::optional<PerturbationSpec> perturbation;
    double denominator_tolerance = 1e-10;
};

// Forward to depth t, then walk back with O(s), O_rel(s;t) and the state.
LengthSeries relevant_length_sweep(const PauliOperator& o, const TrotterCircuit& c, InitialState init, int t,
                                   const SweepOptions& opt = {});

struct LengthTimePoint {
    int t = 0;
    double L = 0, L_rel = 0, L_dil = 0;
};
// L(t), L_rel(t;t), L_dil(t) along one forward pass; histogram of the final operator.
std::vector<LengthTimePoint> length_vs_time(const PauliOperator& o, const TrotterCircuit& c, PauliKind basis,
                                            int steps, LengthHistogram* final_hist = nullptr);

// ---------------------------------------------------------------- string transfer equation

struct SteSeries {
    std::vector<double> c_x, c_zz;    // site / edge averages, per step 0..T
    std::vector<double> residual;     // c_X h + (|E|/N) c_ZZ minus its t = 0 value (h/N for S_x)
    std::vector<double> step_residual;  // stepwise form for time-dependent fields, index t -> (t, t+1)
    double max_abs_residual() const;
};
SteSeries ste_residual(const PauliOperator& o, const TrotterCircuit& c, int steps);

// ---------------------------------------------------------------- toy models

struct PkModel {
    int n = 0;
    double p1 = 0;
    std::vector<double> p;  // p_k, k = 0..N
    double sum = 0, mean = 0, diluted_mean = 0;
};
PkModel toy_model_pk(double p1, int n);

struct InterferenceStats {
    std::vector<double> samples;
    double median = 0, mean = 0;
    double l_abs = 0;  // sign-free length, deterministic
};
// Random-sign toy model sampled exactly: the signed sum over the 3^k C(N,k)
// strings of length k is drawn as 2 Binomial(M_k, 1/2) - M_k.
InterferenceStats toy_model_interference(double p1, double q1, int n, int num_samples, std::mt19937_64& rng);

double predict_rho(const std::vector<double>& l_rel_s1_to_t, int n, int t, double c = 8.0 / 3.0);

// ---------------------------------------------------------------- Trotter error / noise correlator

struct CorrelatorGrid {
    std::vector<int> row_index, col_index;  // s (or q) and t (or p)
    std::vector<std::vector<cplx>> value;   // [row][col]
    std::string to_csv(const std::string& row_name, const std::string& col_name) const;
};

// <+|K_q(s) O(t*) K_p(t)|+> with K(s) = U_s^dagger K U_s, statevector based.
cplx trotter_noise_correlator(const TrotterCircuit& c, const PauliOperator& o, int t_star, const PauliString& kq,
                              int s, const PauliString& kp, int t);
// (s, t) grid for one fixed Kraus string, s, t in [0, t_star].
CorrelatorGrid correlator_time_grid(const TrotterCircuit& c, const PauliOperator& o, int t_star, const PauliString& k,
                                    int stride = 1);
// (q, p) grid over bonds at s = t = s0, K_p = Z_i Y_j on bond p = (i, j).
CorrelatorGrid correlator_bond_grid(const TrotterCircuit& c, const PauliOperator& o, int t_star, int s0);
PauliString bond_kraus(int n, int i, int j);

}  // namespace dl
