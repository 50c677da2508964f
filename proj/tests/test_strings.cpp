#include <cmath>

#include "dilution/sigma.hpp"
#include "dilution/sim_engines.hpp"
#include "dilution/string_analysis.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dl;

namespace {

PauliOperator sx(int n) {
    return ObservableSpec::sxk(1).to_pauli(n);
}

PauliOperator single(int n, int j, PauliKind k) {
    PauliOperator o(n);
    o.add(PauliString::single(n, j, k), 1.0);
    return o;
}

// Pi via coefficient masking of the full transform
DenseOperator mask_oracle(const DenseOperator& m, PauliKind basis) {
    auto c = pauli_transform(m);
    const int n = m.num_qubits();
    const std::size_t d = m.dim();
    for (std::size_t x = 0; x < d; ++x)
        for (std::size_t z = 0; z < d; ++z)
            if (!in_family(x, z, basis)) c[(x << n) | z] = 0.0;
    return inverse_pauli_transform(c, n);
}

}  // namespace

TEST_CASE("heisenberg evolution basics") {
    TrotterCircuit c{build_chain(2, false), 0.13, FieldSchedule::constant(0.0), 1};
    auto o = heisenberg_evolve(single(2, 0, PauliKind::X), c, 0);
    CHECK(oracle::max_diff(o, from_pauli_coefficients(single(2, 0, PauliKind::X))) < 1e-15);
    auto e = heisenberg_evolve(single(2, 0, PauliKind::X), c, 1);
    CHECK(pauli_coefficient(e, {1, 0}).real() == doctest::Approx(std::cos(2 * 0.13)));
    // Y0 Z1 has x = 1, z = 3; magnitude sin(2dt), sign fixed by V^dagger O V
    CHECK(std::abs(pauli_coefficient(e, {1, 3}).real()) == doctest::Approx(std::sin(2 * 0.13)));

    LatticeGraph g;
    g.num_sites = 1;
    TrotterCircuit xonly{g, 0.2, FieldSchedule::constant(1.0), 1};
    auto x = heisenberg_evolve(single(1, 0, PauliKind::X), xonly, 5);
    CHECK(oracle::max_diff(x, from_pauli_coefficients(single(1, 0, PauliKind::X))) < 1e-14);

    TrotterCircuit sq{build_square_lattice(2, 3, true), 0.1, FieldSchedule::cosine(1.0, 100), 20};
    const double f0 = from_pauli_coefficients(sx(6)).frobenius_sq();
    DenseOperator a = from_pauli_coefficients(sx(6));
    for (int k = 1; k <= 20; ++k) {
        heisenberg_step(a, sq, k);
        CHECK(std::abs(a.frobenius_sq() - f0) < 1e-10 * f0);
    }
    schrodinger_step(a, sq, 20);
    heisenberg_step(a, sq, 20);
    CHECK(std::abs(a.frobenius_sq() - f0) < 1e-10 * f0);
}

TEST_CASE("relevant projection") {
    std::mt19937_64 rng(3);
    auto a = oracle::random_matrix(3, rng, true);
    auto b = oracle::random_matrix(3, rng, true);
    // direct 2^N average over X^n rho X^n
    DenseOperator avg(3);
    for (std::uint64_t nbits = 0; nbits < 8; ++nbits) {
        auto p = oracle::kron_pauli(PauliString(3, nbits, 0, 0));
        auto t = oracle::matmul(oracle::matmul(p, a), p);
        for (std::size_t i = 0; i < avg.storage().size(); ++i) avg.data()[i] += t.data()[i] / 8.0;
    }
    DenseOperator pa = a;
    project_relevant(pa, PauliKind::X);
    CHECK(oracle::max_diff(pa, avg) < 1e-12);
    for (auto basis : {PauliKind::X, PauliKind::Y, PauliKind::Z}) {
        DenseOperator p1 = a, p2, pb = b;
        project_relevant(p1, basis);
        CHECK(oracle::max_diff(p1, mask_oracle(a, basis)) < 1e-12);
        p2 = p1;
        project_relevant(p2, basis);
        CHECK(oracle::max_diff(p1, p2) < 1e-12);
        project_relevant(pb, basis);
        DenseOperator rest = b;
        for (std::size_t i = 0; i < rest.storage().size(); ++i) rest.data()[i] -= pb.data()[i];
        CHECK(std::abs(hs_inner(p1, rest)) < 1e-12);
    }
    DenseOperator y = from_pauli_coefficients(single(3, 1, PauliKind::Y));
    project_relevant(y, PauliKind::X);
    CHECK(y.frobenius_sq() < 1e-28);
    DenseOperator xs = from_pauli_coefficients(sx(3)), xs2 = xs;
    project_relevant(xs2, PauliKind::X);
    CHECK(oracle::max_diff(xs, xs2) < 1e-15);

    // back-evolved relevant part is orthogonal to back-evolved Y/Z strings
    TrotterCircuit c{build_chain(3, true), 0.2, FieldSchedule::constant(1.0), 4};
    auto ot = heisenberg_evolve(sx(3), c, 4);
    auto rel = project_relevant(ot, c, 2, 4, PauliKind::X);
    DenseOperator w = from_pauli_coefficients(single(3, 0, PauliKind::Z));
    for (int k = 1; k <= 2; ++k) schrodinger_step(w, c, k);
    CHECK(std::abs(hs_inner(rel.op, w)) < 1e-12);
    CHECK_THROWS_AS(project_relevant(ot, c, 5, 4, PauliKind::X), std::invalid_argument);
}

TEST_CASE("length diagnostics on simple operators") {
    auto s = string_sums(from_pauli_coefficients(sx(4)), nullptr, nullptr, PauliKind::X);
    CHECK(s.lcc / s.cc == doctest::Approx(1.0));
    CHECK(s.ldil / s.dil == doctest::Approx(1.0));
    TrotterCircuit c{build_chain(4, true), 0.1, FieldSchedule::constant(1.0), 0};
    auto sw = relevant_length_sweep(sx(4), c, InitialState::Plus, 0);
    REQUIRE(sw.points.size() == 1);
    CHECK(sw.points[0].L == doctest::Approx(1.0));
    CHECK(*sw.points[0].L_rel == doctest::Approx(1.0));
    CHECK(*sw.points[0].L_abs == doctest::Approx(1.0));
    CHECK(sw.L_dil_t == doctest::Approx(1.0));

    // equal weight on every string (identity included)
    const int n = 4;
    std::vector<cplx> coef(std::size_t{1} << (2 * n), 1.0);
    auto u = inverse_pauli_transform(coef, n);
    auto su = string_sums(u, nullptr, nullptr, PauliKind::X);
    CHECK(su.lcc / su.cc == doctest::Approx(3.0 * n / 4.0));
    auto h = length_histogram(su);
    for (int k = 0; k <= n; ++k)
        CHECK(h.total[k] == doctest::Approx(binomial(n, k) * std::pow(3.0, k) / std::pow(4.0, n)));
}

TEST_CASE("sweep reproduces the expectation value at every depth") {
    for (auto init : {InitialState::Plus, InitialState::YPlus}) {
        TrotterCircuit c{build_square_lattice(2, 3, true), 0.15, FieldSchedule::cosine(1.2, 16), 8};
        auto o = sx(6);
        SweepOptions opt;
        opt.perturbation = PerturbationSpec{};
        auto sw = relevant_length_sweep(o, c, init, 8, opt);
        ObservableSet obs(6, {ObservableSpec::sxk(1)});
        const double exact = run_statevector(c, init, 8, obs).value[0][8];
        REQUIRE(sw.points.size() == 9);
        const double den = sw.points.back().rel_denominator;
        for (const auto& p : sw.points) {
            CHECK(std::abs(p.expectation - exact) < 1e-8);
            CHECK(std::abs(p.rel_denominator - den) < 1e-10);
            // uniform depolarizing with w = 1/4: dc_P = -l_P c_P
            REQUIRE(p.r);
            CHECK(*p.r == doctest::Approx(-*p.L_rel).epsilon(1e-9));
        }
    }
}

TEST_CASE("true shifts add up to Sigma_1") {
    TrotterCircuit c{build_square_lattice(2, 3, true), 0.1, FieldSchedule::constant(1.0), 10};
    SweepOptions opt;
    opt.perturbation = PerturbationSpec{};
    auto sw = relevant_length_sweep(sx(6), c, InitialState::Plus, 10, opt);
    double total = 0;
    for (int s = 0; s < 10; ++s) total += *sw.at(s).true_shift;
    ObservableSet obs(6, {ObservableSpec::sxk(1)});
    SigmaOptions so;
    so.noisy_insertions = false;
    auto rep = measure_sigma_series(c, depolarizing_1q(0.001), InitialState::Plus, 10, obs, so).reports[0][10];
    CHECK(total * rep.Sigma0 == doctest::Approx(rep.Sigma1).epsilon(1e-9));

    // a perturbation that commutes with every relevant string does nothing
    SweepOptions xo;
    xo.perturbation = PerturbationSpec{{1.0, 0.0, 0.0}, {}};
    LatticeGraph g;
    g.num_sites = 3;
    TrotterCircuit idle{g, 0.1, FieldSchedule::constant(1.0), 3};
    auto sx3 = relevant_length_sweep(sx(3), idle, InitialState::Plus, 3, xo);
    for (const auto& p : sx3.points) CHECK(std::abs(*p.r) < 1e-14);
}

TEST_CASE("string transfer equation residual") {
    auto run = [](double dt) {
        TrotterCircuit c{build_square_lattice(2, 3, true), dt, FieldSchedule::constant(1.0), 40};
        return ste_residual(sx(6), c, 40);
    };
    auto a = run(0.05), b = run(0.1);
    CHECK(a.c_x[0] == doctest::Approx(1.0 / 6));
    CHECK(a.residual[0] == 0.0);
    CHECK(a.max_abs_residual() > 0.0);
    const double slope = std::log(b.max_abs_residual() / a.max_abs_residual()) / std::log(2.0);
    CHECK(slope > 0.7);
    CHECK(slope < 1.3);
    TrotterCircuit td{build_square_lattice(2, 3, true), 0.05, FieldSchedule::cosine(1.0, 100), 40};
    auto r = ste_residual(sx(6), td, 40);
    for (double v : r.step_residual) CHECK(std::abs(v) < 0.05 * 0.05 * 10);
}

TEST_CASE("toy string-length models") {
    for (int n : {4, 16, 20}) {
        for (double p1 : {1.0, 1.0 / n, 3.0 * n / std::pow(4.0, n), 0.3}) {
            auto m = toy_model_pk(p1, n);
            CHECK(std::abs(m.sum - 1.0) < 1e-12);
        }
    }
    auto one = toy_model_pk(1.0, 8);
    CHECK(one.mean == doctest::Approx(1.0));
    CHECK(one.diluted_mean == doctest::Approx(1.0));
    for (int n : {16, 20}) {
        CHECK(toy_model_pk(1.0 / n, n).diluted_mean < 1.5);
        CHECK(toy_model_pk(3.0 * n / std::pow(4.0, n), n).diluted_mean == doctest::Approx(n / 2.0).epsilon(0.01));
        CHECK(toy_model_pk(1.0 / n, n).mean == doctest::Approx((1 - 1.0 / n) * 3 * n / 4.0).epsilon(0.02));
    }
    std::mt19937_64 rng(9);
    auto det = toy_model_interference(1.0, 1.0, 16, 50, rng);
    for (double v : det.samples) CHECK(v == doctest::Approx(1.0));
    auto lo = toy_model_interference(1.0 / 16, 1.0 / 16, 16, 2000, rng);
    CHECK(lo.median < 3.0);
    auto hi = toy_model_interference(3.0 * 16 / std::pow(4.0, 16), 1.0 / 16, 16, 2000, rng);
    CHECK(hi.median > 4.0);
    CHECK(predict_rho(std::vector<double>(10, 0.0), 12, 10) == 0.0);
    CHECK(predict_rho(std::vector<double>(10, 2.5), 12, 10, 2.0) == doctest::Approx(2.0 * 2.5 / 12));
}

TEST_CASE("Trotter-noise correlator against dense products") {
    TrotterCircuit c{build_square_lattice(2, 2, true), 0.3, FieldSchedule::constant(1.0), 6};
    const int n = 4, tstar = 6;
    auto o = single(n, 1, PauliKind::X);
    auto k0 = bond_kraus(n, 0, 1);
    auto k1 = bond_kraus(n, 2, 3);
    auto dense_k = [&](const PauliString& k, int s) {
        PauliOperator po(n);
        po.add(k, 1.0);
        return heisenberg_evolve(po, c, s);
    };
    const auto ot = heisenberg_evolve(o, c, tstar);
    const auto plus = product_state(n, InitialState::Plus);
    auto sandwich = [&](const DenseOperator& m) {
        cplx acc{};
        for (std::size_t i = 0; i < m.dim(); ++i)
            for (std::size_t j = 0; j < m.dim(); ++j) acc += std::conj(plus.amp[i]) * m(i, j) * plus.amp[j];
        return acc;
    };
    for (auto [s, t] : {std::pair{2, 2}, std::pair{1, 4}, std::pair{5, 0}}) {
        auto m = oracle::matmul(oracle::matmul(dense_k(k1, s), ot), dense_k(k0, t));
        auto v = trotter_noise_correlator(c, o, tstar, k1, s, k0, t);
        CHECK(std::abs(v - sandwich(m)) < 1e-10);
    }
    auto g = correlator_time_grid(c, o, tstar, k0);
    CHECK(std::abs(g.value[3][2] - trotter_noise_correlator(c, o, tstar, k0, 3, k0, 2)) < 1e-12);
    // diagonal entries are expectation values
    for (std::size_t i = 0; i < g.value.size(); ++i) CHECK(std::abs(g.value[i][i].imag()) < 1e-12);
    auto bg = correlator_bond_grid(c, o, tstar, 3);
    CHECK(bg.value.size() == c.graph.edges.size());
    auto [i1, j1] = c.graph.edges[1];
    auto [i2, j2] = c.graph.edges[2];
    CHECK(std::abs(bg.value[1][2] -
                   trotter_noise_correlator(c, o, tstar, bond_kraus(n, i1, j1), 3, bond_kraus(n, i2, j2), 3)) < 1e-12);
}
