#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "ff_oracles.hpp"
#include "oracles.hpp"

#include "dilution/free_fermion.hpp"
#include "dilution/model.hpp"
#include "dilution/sigma.hpp"
#include "dilution/sim_engines.hpp"

using namespace dl;
using namespace dl::ff;
using namespace oracle;

namespace {

const double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("Floquet blocks: unitarity, continuum limit, h = 0 oracle") {
    for (double k : even_sector_momenta(10)) {
        const auto u = floquet_block(k, 1.3, 0.2);
        CHECK((u.adjoint() * u - Eigen::Matrix4cd::Identity()).norm() < 1e-12);
    }
    const double k = kPi / 2;
    const auto a = block_angles(k, 1.5, 0.0);
    CHECK(a.cos2() == doctest::Approx(1.5 / std::sqrt(3.25)).epsilon(1e-12));
    CHECK(a.cos2() == doctest::Approx(0.8320502943).epsilon(1e-9));

    double worst_eps = 0, worst_c2 = 0, worst_phi = 0;
    for (double kk : even_sector_momenta(16)) {
        if (kk <= 0) continue;
        const auto d = block_angles(kk, 1.5, 1e-4);
        const auto c = continuum_angles(kk, 1.5);
        worst_eps = std::max({worst_eps, std::abs(d.eps_plus - c.eps_plus), std::abs(d.eps_minus - c.eps_minus)});
        worst_c2 = std::max(worst_c2, std::abs(d.cos2() - c.cos2()));
        worst_phi = std::max(worst_phi, std::abs(std::remainder(d.phi, 2 * kPi)));
    }
    CHECK(worst_eps < 1e-6);
    CHECK(worst_c2 < 1e-3);
    CHECK(worst_phi < 1e-3);

    // h = 0: the pair block is the bare ZZ rotation
    Eigen::Matrix2cd z;
    z << 0.0, -2.0 * 0.3 * std::sin(0.7), 2.0 * 0.3 * std::sin(0.7), std::complex<double>(0, -4.0 * 0.3 * std::cos(0.7));
    CHECK((pair_block(0.7, 0.0, 0.3) - z.exp()).norm() < 1e-13);
}

TEST_CASE("analytic magnetization matches the statevector engine on a chain") {
    TrotterCircuit c;
    c.graph = build_chain(8, true);
    c.dt = 0.01;
    c.field = FieldSchedule::constant(1.5);
    ObservableSet obs(8, {ObservableSpec::sxk(1)});
    const auto q = run_statevector(c, InitialState::Plus, 100, obs);
    const auto m = FreeFermionModel::make(8, 1.5, 0.01);
    double worst = 0;
    for (std::size_t i = 0; i < q.steps.size(); ++i)
        worst = std::max(worst, std::abs(q.value[0][i] - analytic_magnetization(m, q.steps[i] * 0.01)));
    CHECK(worst < 1e-8);
    CHECK(analytic_magnetization(m, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Gaussian correlation evolution matches the Floquet formula") {
    const int n = 12;
    const auto m = FreeFermionModel::make(n, 0.7, 0.15);
    Eigen::MatrixXd g = vacuum_correlation(n);
    double worst = 0;
    for (int t = 1; t <= 60; ++t) {
        apply_trotter_step(g, n, 0.7, 0.15);
        worst = std::max(worst, std::abs(sx_from_correlation(g) - analytic_magnetization(m, t * 0.15)));
    }
    CHECK(worst < 1e-10);
    // pure Gaussian state: Gamma^2 = -1
    CHECK((g * g + Eigen::MatrixXd::Identity(2 * n, 2 * n)).norm() < 1e-10);
    CHECK((g + g.transpose()).norm() < 1e-12);
    apply_x_flip(g, 3);
    CHECK((g * g + Eigen::MatrixXd::Identity(2 * n, 2 * n)).norm() < 1e-10);

    const auto r0 = gaussian_trajectories(n, 0.7, 0.15, 0.0, 40, 3, 7);
    for (std::size_t i = 0; i < r0.steps.size(); ++i) CHECK(std::abs(r0.sx_noisy[i] - r0.sx_noiseless[i]) < 1e-8);
}

TEST_CASE("plateau, decay rates and thermodynamic limit") {
    CHECK(plateau_magnetization(2.0, 0.0) == doctest::Approx(0.875));
    CHECK(x_noise_decay_rate(0.5, 0.0) == doctest::Approx(2.0));
    CHECK(x_noise_decay_rate(1.0, 0.0) == doctest::Approx(2.0));
    CHECK(x_noise_decay_rate(1.5, 0.0) == doctest::Approx(2.0 / 2.25));
    CHECK(x_noise_decay_rate(2.0, 0.0) == doctest::Approx(0.5));
    // quadrature over Floquet angles approaches the closed form as dt -> 0
    for (double h : {0.5, 1.5, 2.0}) CHECK(plateau_magnetization(h, 1e-3) == doctest::Approx(plateau_magnetization(h, 0.0)).epsilon(1e-4));
    CHECK(thermodynamic_magnetization(1.5, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-10));

    // equilibration tail ~ t^{-3/2}: envelope of |<S_x> - m| on log-spaced windows
    const double m = plateau_magnetization(1.5, 0.0);
    std::vector<double> lx, ly;
    for (double lo = 10.0; lo < 100.0; lo *= 1.3) {
        double peak = 0;
        for (double t = lo; t < lo * 1.3; t += 0.05) peak = std::max(peak, std::abs(thermodynamic_magnetization(1.5, 0.0, t) - m));
        lx.push_back(std::log(lo));
        ly.push_back(std::log(peak));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    const double slope = sxy / sxx;
    CHECK(slope > -1.8);
    CHECK(slope < -1.2);
}

TEST_CASE("Majorana operators and the X-noise map against the qubit channel") {
    const int n = 4;
    // {eta_a, eta_b} = 2 delta_ab
    for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) {
            const auto ea = oracle::kron_pauli(majorana_string(n, a));
            const auto eb = oracle::kron_pauli(majorana_string(n, b));
            const auto ab = oracle::matmul(ea, eb), ba = oracle::matmul(eb, ea);
            double worst = 0;
            for (std::size_t i = 0; i < ab.dim(); ++i)
                for (std::size_t j = 0; j < ab.dim(); ++j) {
                    const cplx want = (a == b && i == j) ? 2.0 : 0.0;
                    worst = std::max(worst, std::abs(ab(i, j) + ba(i, j) - want));
                }
            CHECK(worst < 1e-14);
        }
    // S_x and the vacuum value
    const auto sx = dense_of(quadratic_majorana(sx_coefficients(n)));
    const auto plus = product_density(n, InitialState::Plus);
    CHECK(hs_inner(sx, plus).real() == doctest::Approx(1.0));

    std::mt19937_64 rng(11);
    for (int nn : {4, 6, 8}) {
        // generic quadratic forms, boundary-crossing terms included
        const auto o = hermitian_quadratic(nn, rng, false);
        const auto lhs = x_channel_dense(dense_of(quadratic_majorana(o)));
        const auto rhs = dense_of(quadratic_majorana(x_noise_map(o)));
        CHECK(oracle::max_diff(lhs, rhs) < 1e-10);

        // translation-invariant forms: N(O) = -4 O + 4 <O> S_x
        const auto ti = hermitian_quadratic(nn, rng, true);
        const auto od = dense_of(quadratic_majorana(ti));
        const cplx vac = vacuum_expectation(ti);
        CHECK(std::abs(vac - hs_inner(od, product_density(nn, InitialState::Plus))) < 1e-10);
        const auto mapped = x_channel_dense(od);
        const auto sxn = dense_of(quadratic_majorana(sx_coefficients(nn)));
        DenseOperator want(nn);
        for (std::size_t i = 0; i < want.storage().size(); ++i)
            want.data()[i] = -4.0 * od.data()[i] + 4.0 * vac * sxn.data()[i];
        CHECK(oracle::max_diff(mapped, want) < 1e-10);
    }
}

TEST_CASE("depolarizing rule: string lengths of c_i^dag c_j and the boundary pair") {
    const int n = 6;
    auto hop = [&](int i, int j) {
        Eigen::MatrixXcd o = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
        const cplx I(0, 1);
        // c^dag_i c_j = (eta_2i + i eta_2i+1)(eta_2j - i eta_2j+1) / 4
        o(2 * i, 2 * j) += 0.25;
        o(2 * i, 2 * j + 1) += -0.25 * I;
        o(2 * i + 1, 2 * j) += 0.25 * I;
        o(2 * i + 1, 2 * j + 1) += 0.25;
        return quadratic_majorana(o);
    };
    ComplexPauliSum parity(n);
    parity.add(PauliString::hermitian(n, (1ULL << n) - 1, 0), 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto hij = hop(i, j);
            // depolarizing N_oi multiplies a string by -(4/3) * weight; pairs further apart
            // than N/2 take the short way round once folded by the parity (+1 in this sector)
            const auto folded = product(parity, hij);
            const auto& terms = (j - i <= n / 2) ? hij.terms() : folded.terms();
            for (const auto& [k, c] : terms)
                if (std::abs(c) > 1e-14) CHECK(-(4.0 / 3.0) * key_weight(k) == doctest::Approx(sawtooth_phi(j - i, n)));
        }
    // the boundary pair spans the whole chain at qubit level
    const auto boundary = hop(0, n - 1);
    for (const auto& [k, c] : boundary.terms())
        if (std::abs(c) > 1e-14) CHECK(key_weight(k) == n);
}

TEST_CASE("X-noise sectors: closed form, density-matrix sigma engine, trajectories") {
    // noiseless sector 1 equals the closed-form convolution
    {
        const int n = 16, T = 80;
        const double h = 1.5, dt = 0.1;
        const auto sec = x_noise_sectors(n, h, dt, T, 0.0, 1);
        const auto cf = x_noise_sigma1(magnetization_series(FreeFermionModel::make(n, h, dt), T));
        double worst = 0;
        for (int t = 0; t <= T; ++t) worst = std::max(worst, std::abs(sec[1][t] - cf[t]));
        CHECK(worst < 1e-9);
    }
    // sectors against the generic sigma machinery on a 6-site periodic chain
    {
        const int n = 6, T = 12;
        const double h = 0.8, dt = 0.2, eps = 0.01;
        TrotterCircuit c;
        c.graph = build_chain(n, true);
        c.dt = dt;
        c.field = FieldSchedule::constant(h);
        ObservableSet obs(n, {ObservableSpec::sxk(1)});
        SigmaOptions clean;
        clean.noisy_insertions = false;
        clean.with_d2 = true;
        clean.d2_budget = 1000;
        const auto s_clean = measure_sigma_series(c, single_pauli(PauliKind::X, eps), InitialState::Plus, T, obs, clean);
        const auto s_noisy = measure_sigma_series(c, single_pauli(PauliKind::X, eps), InitialState::Plus, T, obs, {});
        const auto sec0 = x_noise_sectors(n, h, dt, T, 0.0, 2);
        const auto secp = x_noise_sectors(n, h, dt, T, eps, 1);
        for (int t = 0; t <= T; ++t) {
            const auto& rc = s_clean.reports[0][t];
            const auto& rn = s_noisy.reports[0][t];
            CHECK(rc.Sigma1 == doctest::Approx(sec0[1][t]).epsilon(1e-9));
            CHECK(*rc.Sigma2 == doctest::Approx(sec0[2][t]).epsilon(1e-9));
            CHECK(rn.D0 == doctest::Approx(secp[0][t]).epsilon(1e-10));
            CHECK(rn.Sigma1 == doctest::Approx(secp[1][t]).epsilon(1e-9));
        }
        // averaged correlation run equals the exact density matrix
        const auto avg = averaged_correlation_run(n, h, dt, eps / dt, T);
        for (int t = 0; t <= T; ++t) CHECK(avg.sx_noisy[t] == doctest::Approx(s_noisy.reports[0][t].D0).epsilon(1e-10));
    }
    // trajectory mean agrees with the exact average
    {
        const auto traj = gaussian_trajectories(20, 1.5, 0.05, 0.1, 200, 400, 3, 20);
        const auto avg = averaged_correlation_run(20, 1.5, 0.05, 0.1, 200, 20);
        for (std::size_t i = 1; i < traj.steps.size(); ++i)
            CHECK(std::abs(traj.sx_noisy[i] - avg.sx_noisy[i]) < 4.5 * traj.sx_stderr[i] + 1e-12);
        // bit-identical reruns
        const auto again = gaussian_trajectories(20, 1.5, 0.05, 0.1, 200, 400, 3, 20);
        CHECK(again.to_csv() == traj.to_csv());
    }
}

TEST_CASE("sectorized Monte Carlo reproduces exact sectors") {
    const int n = 10, T = 30;
    const double h = 1.5, dt = 0.1;
    const auto exact = x_noise_sectors(n, h, dt, T, 0.0, 3);
    for (int order : {1, 2, 3}) {
        const auto mc = sectorized_sigma_mc(n, h, dt, T, order, 6000, 100 + order);
        INFO("order " << order << " mc " << mc.mean << " +- " << mc.stderr_ << " exact " << exact[order][T]);
        CHECK(std::abs(mc.mean - exact[order][T]) < 4.5 * mc.stderr_);
    }
}

TEST_CASE("Sigma_n asymptotics (-lambda t)^n / n!") {
    // sampled where eta * lambda * tau ~ 1 for the standard eta = 0.1, averaged over a window
    const int n = 100;
    const double h = 1.5, dt = 0.05, eta = 0.1;
    const double lam = x_noise_decay_rate(h, 0.0);
    const double tau_c = 1.0 / (eta * lam);
    const int T = static_cast<int>(1.25 * tau_c / dt) + 1;
    const auto sec = x_noise_sectors(n, h, dt, T, 0.0, 3);
    for (int k = 1; k <= 3; ++k) {
        double acc = 0;
        int cnt = 0;
        for (int t = 1; t <= T; ++t) {
            const double tau = t * dt;
            if (tau < 0.75 * tau_c || tau > 1.25 * tau_c) continue;
            const double pred = std::pow(-lam * tau, k) / std::tgamma(k + 1.0);
            acc += std::pow(dt, k) * sec[k][t] / sec[0][t] / pred;
            ++cnt;
        }
        INFO("order " << k << " mean ratio " << acc / cnt);
        CHECK(std::abs(acc / cnt - 1.0) < 0.2);
    }
}

TEST_CASE("depolarizing transfer matrix") {
    // eta = 0 reproduces the continuum magnetization
    const int n = 32;
    const auto tm = build_transfer_matrix(n, 1.5);
    const auto model = FreeFermionModel::make(n, 1.5, 0.0);
    std::vector<double> times{0.0, 0.5, 1.0, 2.5, 7.0, 15.0};
    const auto sx = transfer_magnetization(tm, 0.0, times);
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(sx[i] - analytic_magnetization(model, times[i])) < 1e-8);
    // eta = 0 conserves |x|
    const Eigen::VectorXd x5 = (tm.generator(0.0) * 5.0).exp() * tm.x0;
    CHECK(x5.norm() == doctest::Approx(tm.x0.norm()).epsilon(1e-10));

    // closed-form noiseless block; it runs with the C sign opposite to the generator
    const Eigen::Matrix3d d = Eigen::Vector3d(1, 1, -1).asDiagonal();
    for (std::size_t i = 0; i < tm.momenta.size(); i += 3) {
        const auto a = continuum_angles(tm.momenta[i], 1.5);
        const Eigen::Matrix3d blk = tm.hamiltonian.block<3, 3>(3 * i, 3 * i);
        for (double s : {0.3, 1.7, 4.0}) {
            const Eigen::Matrix3d ode = d * (blk * s).exp() * d;
            CHECK((ode - noiseless_block_evolution(a.theta, a.delta(), s)).norm() < 1e-8);
        }
    }

    // phi_hat is the exact finite sum; lambda is O(N^0)
    for (double h : {0.5, 1.5}) {
        const double l64 = depolarizing_decay_rate(64, h).lambda;
        const double l128 = depolarizing_decay_rate(128, h).lambda;
        CHECK(l128 / l64 > 0.8);
        CHECK(l128 / l64 < 1.2);
    }
    CHECK_THROWS_AS(depolarizing_decay_rate(64, 1.5, 0.1), std::invalid_argument);

    // eigenvalue decay rate vs the first-order formula
    const auto tm64 = build_transfer_matrix(64, 1.5);
    const double eig_rate = transfer_decay_rate(tm64, 0.01);
    const auto dr = depolarizing_decay_rate(64, 1.5);
    INFO("eigen " << eig_rate << " formula " << dr.decay_rate);
    CHECK(std::abs(eig_rate / dr.decay_rate - 1.0) < 0.05);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(FreeFermionModel::make(7, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_trajectories(8, 1.0, 0.1, -0.1, 10, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_trajectories(8, 1.0, 0.0, 0.1, 10, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(sectorized_sigma_mc(4, 1.0, 0.1, 1, 5, 10, 1), std::invalid_argument);
}
