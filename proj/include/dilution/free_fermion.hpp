#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dilution/pauli.hpp"

// 1D transverse-field Ising chain H = sum Z_j Z_{j+1} + h X_j (periodic) in
// the even fermion-parity sector, starting from |+...+>.
namespace dl::ff {

// ---------------------------------------------------------------- Floquet blocks

struct BlockAngles {
    double eps_plus = 0, eps_minus = 0;
    double theta = 0, phi = 0;
    double delta() const { return eps_plus - eps_minus; }
    double cos2() const;
    double sin2() const;
};

// 2x2 pair block on (|0>, a_k^dag a_-k^dag |0>) for U = exp(-i dt H_ZZ) exp(-i dt h H_X).
Eigen::Matrix2cd pair_block(double k, double h, double dt);
// Full 4x4 block: pair block plus the two singly occupied states.
Eigen::Matrix4cd floquet_block(double k, double h, double dt);
// dt > 0: from diagonalizing the pair block; dt == 0: continuum limit.
BlockAngles block_angles(double k, double h, double dt);
BlockAngles continuum_angles(double k, double h);

// 2(n + 1/2) pi / N, n = -N/2 .. N/2 - 1
std::vector<double> even_sector_momenta(int n);

struct FreeFermionModel {
    int n = 0;
    double h = 1.0;
    double dt = 0.0;                 // 0: continuum limit
    std::vector<double> momenta;     // full even sector
    std::vector<double> positive;    // k > 0
    std::vector<BlockAngles> angles;  // per positive momentum

    static FreeFermionModel make(int n, double h, double dt);
};

// <S_x> at physical time tau (tau = steps * dt for the Trotter circuit).
double analytic_magnetization(const FreeFermionModel& m, double tau);
std::vector<double> magnetization_series(const FreeFermionModel& m, int steps);
// N -> infinity by quadrature; dt == 0 uses the continuum angles.
double thermodynamic_magnetization(double h, double dt, double tau);
// Late-time plateau m(h, dt); closed form at dt == 0.
double plateau_magnetization(double h, double dt);

// ---------------------------------------------------------------- decay rates

// X noise: lambda = 4 (1 - m(h, dt)).
double x_noise_decay_rate(double h, double dt);

// <Sigma_1(t)> for X noise from the noiseless series sx[s], s = 0..T.
std::vector<double> x_noise_sigma1(const std::vector<double>& sx);

// N-periodic sawtooth -(4/3)(|j| + 1) on -N/2 < j <= N/2.
double sawtooth_phi(int j, int n);
double phi_hat(double k, int n);

struct DepolarizingRate {
    double lambda = 0;        // -1/2 sum_j phi(j) (|alpha_j|^2 + |beta_j|^2)
    double plateau = 0;       // alpha_0
    double sigma1_slope = 0;  // d<Sigma_1>/dtau with <S_x(0)> = 1, equals -2 lambda
    double decay_rate = 0;    // -sigma1_slope / plateau
};
// Continuum limit only; throws for dt != 0.
DepolarizingRate depolarizing_decay_rate(int n, double h, double dt = 0.0);

// ---------------------------------------------------------------- Majorana machinery

// eta_{2j} = (prod_{m<j} X_m) Z_j, eta_{2j+1} = (prod_{m<j} X_m) Y_j
PauliString majorana_string(int n, int a);
// sum_ab O_ab eta_a eta_b as a qubit operator.
ComplexPauliSum quadratic_majorana(const Eigen::MatrixXcd& o);
// X-noise map sum_j (X_j O X_j - O) on the coefficient matrix of a quadratic form.
Eigen::MatrixXcd x_noise_map(const Eigen::MatrixXcd& o);
// <0|O|0> of a quadratic form in the fermion vacuum |+...+>.
std::complex<double> vacuum_expectation(const Eigen::MatrixXcd& o);
// Coefficient matrix of S_x = (1/N) sum_j X_j.
Eigen::MatrixXcd sx_coefficients(int n);

// Correlation matrix Gamma_ab = (i/2) <[eta_a, eta_b]>; real antisymmetric.
Eigen::MatrixXd vacuum_correlation(int n);
// Gamma -> R Gamma R^T for one Trotter step (ZZ layer, then X layer).
void apply_trotter_step(Eigen::MatrixXd& g, int n, double h, double dt);
// X_j Gamma X_j
void apply_x_flip(Eigen::MatrixXd& g, int site);
double sx_from_correlation(const Eigen::MatrixXd& g);

// ---------------------------------------------------------------- noisy runs

struct FreeFermionRun {
    int n = 0;
    double h = 0, dt = 0, eta = 0;
    int trajectories = 0;  // 0 for the exact average
    std::vector<int> steps;
    std::vector<double> time, sx_noiseless, sx_noisy, sx_stderr, lambda_mes;
    double lambda_theory = 0;

    std::string to_csv() const;
    // Mean of lambda_mes over tau in [tau_lo, tau_hi].
    double late_time_lambda(double tau_lo, double tau_hi) const;
};

// Pure Gaussian trajectories with per-site flip probability eta * dt after every step.
FreeFermionRun gaussian_trajectories(int n, double h, double dt, double eta, int steps, int trajectories,
                                     std::uint64_t seed, int record_stride = 1);
// Trajectory average computed exactly: off-site correlations shrink by (1 - 2p)^2 per step.
FreeFermionRun averaged_correlation_run(int n, double h, double dt, double eta, int steps, int record_stride = 1);

// S_x read-out of the error sectors of the product X channel with per-site
// probability p: sectors[k][t] collects k insertions of (X . X - id), each
// acting after the background channel at its location. p = 0 gives
// <Sigma_k(t)>; k = 1 with p > 0 is the noisy-insertion Sigma_1.
std::vector<std::vector<double>> x_noise_sectors(int n, double h, double dt, int steps, double p, int max_order);

struct SectorEstimate {
    double mean = 0, stderr_ = 0;
    long long samples = 0;
};
// Monte-Carlo <Sigma_order(T)>: uniform subsets of `order` distinct
// (step, site) locations, one linear insertion pass per subset.
SectorEstimate sectorized_sigma_mc(int n, double h, double dt, int steps, int order, long long samples,
                                   std::uint64_t seed);

// ---------------------------------------------------------------- depolarizing transfer matrix

struct TransferMatrixModel {
    int n = 0;
    double h = 0;
    std::vector<double> momenta;   // positive momenta
    Eigen::MatrixXd hamiltonian;   // block diagonal, 3x3 per k, ordering (A, B, C)
    Eigen::MatrixXd noise;         // diagonal in (A, B, C)
    Eigen::VectorXd x0;            // A_k = 2/N so that <S_x(0)> = 1

    Eigen::MatrixXd generator(double eta) const { return hamiltonian + eta * noise; }
    double sx(const Eigen::VectorXd& x) const;
};
TransferMatrixModel build_transfer_matrix(int n, double h);
// <S_x(tau)> at the requested times by exact matrix exponentials.
std::vector<double> transfer_magnetization(const TransferMatrixModel& m, double eta, const std::vector<double>& times);
// -Re(mu)/eta of the eigenvalue with the largest contribution to <S_x>.
double transfer_decay_rate(const TransferMatrixModel& m, double eta);
// (A, B, C)(s) = E (A, B, C)(0) for the noiseless block, as displayed in closed form.
Eigen::Matrix3d noiseless_block_evolution(double theta, double delta_eps, double s);

}  // namespace dl::ff
