#include <cmath>
#include <random>

#include "dilution/sim_engines.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dl;

TEST_CASE("initial values") {
    TrotterCircuit c{build_chain(5, true), 0.1, FieldSchedule::constant(1.0), 0};
    ObservableSet obs(5, {ObservableSpec::sxk(1), ObservableSpec::sxk(3), ObservableSpec::parity()});
    auto r = run_statevector(c, InitialState::Plus, 0, obs);
    for (auto& v : r.value) CHECK(v[0] == doctest::Approx(1.0));
    auto psi = product_state(3, InitialState::YPlus);
    PauliOperator y(3);
    y.add(PauliString::parse("YIY"), 1.0);
    CHECK(expectation(psi, y) == doctest::Approx(1.0));
    CHECK_THROWS_AS(product_state(27, InitialState::Plus), std::length_error);
}

TEST_CASE("global parity is conserved on the 5x4 lattice") {
    TrotterCircuit c{build_square_lattice(5, 4, true), 0.15, FieldSchedule::constant(3.0), 4};
    ObservableSet obs(20, {ObservableSpec::parity()});
    auto r = run_statevector(c, InitialState::Plus, 4, obs);
    for (double v : r.value[0]) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("density matrix without noise equals statevector") {
    for (auto init : {InitialState::Plus, InitialState::Zero, InitialState::YPlus}) {
        TrotterCircuit c{build_square_lattice(2, 3, true), 0.2, FieldSchedule::cosine(1.3, 50), 6};
        PauliOperator zsum(6);
        for (int j = 0; j < 6; ++j) zsum.add(PauliString::single(6, j, PauliKind::Z), 1.0 / 6);
        ObservableSet obs(6, {ObservableSpec::sxk(1), ObservableSpec::sxk(2), ObservableSpec::parity(),
                              ObservableSpec::site_pauli(2, PauliKind::Y), ObservableSpec::custom_op(zsum, "Sz")});
        auto sv = run_statevector(c, init, 6, obs);
        auto dm = run_density_matrix(c, noiseless(), init, 6, obs);
        auto dm0 = run_density_matrix(c, depolarizing_1q(0.0), init, 6, obs);
        for (std::size_t o = 0; o < obs.specs().size(); ++o)
            for (int t = 0; t <= 6; ++t) {
                CHECK(std::abs(sv.value[o][t] - dm.value[o][t]) < 1e-10);
                CHECK(std::abs(sv.value[o][t] - dm0.value[o][t]) < 1e-10);
            }
    }
}

TEST_CASE("depolarizing on an idle qubit shrinks X by 1 - eps") {
    LatticeGraph g;
    g.num_sites = 1;
    TrotterCircuit c{g, 0.1, FieldSchedule::constant(0.0), 1};
    ObservableSet obs(1, {ObservableSpec::site_pauli(0, PauliKind::X)});
    auto r = run_density_matrix(c, depolarizing_1q(0.03), InitialState::Plus, 1, obs);
    CHECK(r.value[0][1] == doctest::Approx(0.97).epsilon(1e-14));
}

TEST_CASE("statevector norm drift") {
    TrotterCircuit c{build_chain(10, true), 0.1, FieldSchedule::constant(1.0), 100};
    double worst = 0;
    evolve_statevector(c, InitialState::Plus, 100,
                       [&](int, const StateVector& s) { worst = std::max(worst, std::abs(s.norm_sq() - 1.0)); });
    CHECK(worst < 1e-8);
}

TEST_CASE("trajectories agree with density matrix") {
    TrotterCircuit c{build_chain(8, true), 0.1, FieldSchedule::constant(1.0), 15};
    ObservableSet obs(8, {ObservableSpec::sxk(1), ObservableSpec::sxk(2)});
    auto noise = depolarizing_1q(0.002);
    auto dm = run_density_matrix(c, noise, InitialState::Plus, 15, obs);
    TrajectoryBatch b{2000, 42};
    auto tr = evolve_trajectories(c, noise, InitialState::Plus, 15, obs, b);
    for (std::size_t o = 0; o < 2; ++o)
        for (int t = 0; t <= 15; ++t) CHECK(std::abs(tr.value[o][t] - dm.value[o][t]) <= 3 * tr.stderr_[o][t] + 1e-12);

    TrajectoryBatch b2{2000, 42};
    auto tr2 = evolve_trajectories(c, noise, InitialState::Plus, 15, obs, b2);
    CHECK(tr.to_csv() == tr2.to_csv());

    TrajectoryBatch clean{5, 1};
    auto sv = run_statevector(c, InitialState::Plus, 15, obs);
    auto tr0 = evolve_trajectories(c, depolarizing_1q(0.0), InitialState::Plus, 15, obs, clean);
    for (int t = 0; t <= 15; ++t) {
        CHECK(std::abs(tr0.value[0][t] - sv.value[0][t]) < 1e-12);
        CHECK(tr0.stderr_[0][t] < 1e-12);
    }
}

TEST_CASE("per-gate two-qubit noise: trajectories vs density matrix") {
    TrotterCircuit c{build_square_lattice(2, 2, true), 0.15, FieldSchedule::constant(3.0), 6};
    auto noise = h1_1_two_qubit(0.3);
    noise.epsilon = 0.05;  // amplified for a visible signal
    ObservableSet obs(4, {ObservableSpec::sxk(1), ObservableSpec::parity()});
    auto dm = run_density_matrix(c, noise, InitialState::Plus, 6, obs);
    TrajectoryBatch b{3000, 7};
    auto tr = evolve_trajectories(c, noise, InitialState::Plus, 6, obs, b);
    for (std::size_t o = 0; o < 2; ++o)
        for (int t = 0; t <= 6; ++t) CHECK(std::abs(tr.value[o][t] - dm.value[o][t]) <= 3 * tr.stderr_[o][t] + 1e-12);
    CHECK(dm.value[1][6] < 0.99);
}

TEST_CASE("parity signal loss is monotone under depolarizing noise") {
    TrotterCircuit c{build_square_lattice(2, 3, true), 0.1, FieldSchedule::constant(1.0), 20};
    ObservableSet obs(6, {ObservableSpec::parity()});
    auto noisy = run_density_matrix(c, depolarizing_1q(0.01), InitialState::Plus, 20, obs);
    for (int t = 1; t <= 20; ++t) {
        CHECK(noisy.value[0][t] <= noisy.value[0][t - 1] + 1e-12);
        CHECK(noisy.value[0][t] == doctest::Approx(std::pow(0.99, 6 * t)).epsilon(1e-10));
    }
}

TEST_CASE("S_x^(k) from shots") {
    std::vector<std::vector<int>> all_plus(5, std::vector<int>(4, 1));
    for (int k = 1; k <= 4; ++k) CHECK(estimate_sxk_from_samples(all_plus, k) == doctest::Approx(1.0));
    std::vector<std::vector<int>> one{{1, -1}};
    CHECK(estimate_sxk_from_samples(one, 1) == doctest::Approx(0.0));
    CHECK(estimate_sxk_from_samples(one, 2) == doctest::Approx(-1.0));
    CHECK_THROWS(estimate_sxk_from_samples(one, 3));

    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.3);
    std::vector<std::vector<int>> shots(200, std::vector<int>(6));
    std::vector<std::uint64_t> packed;
    for (auto& s : shots) {
        std::uint64_t b = 0;
        for (int j = 0; j < 6; ++j) {
            s[j] = coin(rng) ? -1 : 1;
            if (s[j] < 0) b |= 1ULL << j;
        }
        packed.push_back(b);
    }
    double brute = 0;
    for (auto& s : shots)
        for (int a = 0; a < 6; ++a)
            for (int b = a + 1; b < 6; ++b)
                for (int c = b + 1; c < 6; ++c) brute += s[a] * s[b] * s[c];
    brute /= 200.0 * 20.0;
    CHECK(std::abs(estimate_sxk_from_samples(shots, 3) - brute) < 1e-12);
    CHECK(std::abs(estimate_all_sxk(packed, 6)[3] - brute) < 1e-12);
}

TEST_CASE("shot sampling is consistent with exact values") {
    TrotterCircuit c{build_chain(6, true), 0.1, FieldSchedule::constant(1.0), 10};
    auto states = evolve_statevector(c, InitialState::Plus, 10);
    auto p = x_basis_probabilities(states.back());
    std::mt19937_64 rng(9);
    auto shots = sample_bitstrings(p, 20000, rng);
    auto est = estimate_all_sxk(shots, 6);
    auto xexp = x_string_expectations(states.back());
    CHECK(std::abs(est[1] - sxk_from_x_strings(xexp, 6, 1)) < 0.02);
    CHECK(std::abs(est[2] - sxk_from_x_strings(xexp, 6, 2)) < 0.03);
}

TEST_CASE("decay rate and normalized difference") {
    std::vector<int> steps;
    std::vector<double> clean, noisy, same;
    for (int t = 0; t <= 40; ++t) {
        steps.push_back(t);
        double v = std::cos(0.3 * t) + 0.2;
        clean.push_back(v);
        noisy.push_back(std::exp(-0.07 * t) * v);
    }
    auto lam = decay_rate(noisy, clean, steps);
    CHECK_FALSE(lam[0].has_value());
    for (int t = 1; t <= 40; ++t)
        if (lam[t]) CHECK(*lam[t] == doctest::Approx(0.07));
    auto zero = decay_rate(clean, clean, steps);
    CHECK(*zero[5] == doctest::Approx(0.0));
    std::vector<double> crossing{1.0, 0.5, 0.0, -0.5};
    auto flagged = decay_rate(crossing, crossing, {0, 1, 2, 3});
    CHECK_FALSE(flagged[2].has_value());

    std::vector<double> flat(41, 0.8), lin(41);
    const double eps = 1e-3, lambda = 2.0;
    for (int t = 0; t <= 40; ++t) lin[t] = (1 - eps * lambda * t) * 0.8;
    auto d = normalized_difference(lin, flat, steps, eps, 20);
    CHECK(*d[20] == doctest::Approx(lambda).epsilon(1e-9));
    CHECK(*normalized_difference(flat, flat, steps, eps)[10] == 0.0);
    auto wide = normalized_difference(lin, flat, steps, eps, 200);
    CHECK(wide[40].has_value());
    CHECK_THROWS(normalized_difference(lin, flat, steps, 0.0));
}
