#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace dl;

TEST_CASE("single-qubit products") {
    auto x = PauliString::parse("X"), z = PauliString::parse("Z"), y = PauliString::parse("Y");
    auto xz = multiply(x, z);
    CHECK(xz.x == 1);
    CHECK(xz.z == 1);
    CHECK(xz.label() == "-iY");
    CHECK(multiply(y, y).label() == "I");
    CHECK(multiply(PauliString::parse("XZ"), PauliString::parse("ZX")).label() == "YY");
    auto p = PauliString::parse("XYZI");
    CHECK(multiply(p, PauliString::identity(4)) == p);
}

TEST_CASE("group laws on random strings") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint64_t> bits(0, 63);
    std::uniform_int_distribution<int> ph(0, 3);
    for (int i = 0; i < 500; ++i) {
        PauliString a(6, bits(rng), bits(rng), ph(rng)), b(6, bits(rng), bits(rng), ph(rng)),
            c(6, bits(rng), bits(rng), ph(rng));
        CHECK(multiply(multiply(a, b), c) == multiply(a, multiply(b, c)));
        CHECK(commutes(a, b) == commutes(b, a));
        auto sq = multiply(a, a);
        CHECK(sq.x == 0);
        CHECK(sq.z == 0);
        CHECK(sq.phase % 2 == 0);
        auto h = PauliString::hermitian(6, a.x, a.z);
        CHECK(multiply(h, h) == PauliString::identity(6));
        CHECK(commutes(a, PauliString::identity(6)));
    }
}

TEST_CASE("commutation examples and matrices agree") {
    CHECK(commutes(PauliString::parse("XX"), PauliString::parse("ZZ")));
    CHECK_FALSE(commutes(PauliString::parse("X"), PauliString::parse("Z")));
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::uint64_t> bits(0, 7);
    for (int i = 0; i < 50; ++i) {
        auto a = PauliString::hermitian(3, bits(rng), bits(rng));
        auto b = PauliString::hermitian(3, bits(rng), bits(rng));
        auto ma = oracle::kron_pauli(a), mb = oracle::kron_pauli(b);
        auto ab = oracle::matmul(ma, mb), ba = oracle::matmul(mb, ma);
        double diff = 0;
        for (std::size_t k = 0; k < ab.storage().size(); ++k) diff = std::max(diff, std::abs(ab.data()[k] - ba.data()[k]));
        CHECK((diff < 1e-12) == commutes(a, b));
        // product phase matches matrix product
        auto prod = multiply(a, b);
        auto mp = oracle::kron_pauli(PauliString::hermitian(3, prod.x, prod.z));
        int rel = ((prod.phase - __builtin_popcountll(prod.x & prod.z)) % 4 + 4) % 4;
        const cplx f[4] = {1, cplx(0, 1), -1, cplx(0, -1)};
        for (auto& v : mp.storage()) v *= f[rel];
        CHECK(oracle::max_diff(mp, ab) < 1e-12);
    }
}

TEST_CASE("noise commutator weight") {
    auto p = PauliString::parse("XX");
    CHECK(noise_commutator_weight(p, PauliKind::Z, {0, 1}) == 2);
    CHECK(noise_commutator_weight(PauliString::parse("XIXI"), PauliKind::X, {0, 1, 2, 3}) == 0);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint64_t> bits(0, 31);
    for (int i = 0; i < 100; ++i) {
        auto q = PauliString::hermitian(5, bits(rng), bits(rng));
        int total = 0;
        for (PauliKind k : {PauliKind::X, PauliKind::Y, PauliKind::Z})
            total += noise_commutator_weight(q, k, {0, 1, 2, 3, 4});
        // (1/3) sum_K (-2 alpha_K) = -(4/3) l_P
        CHECK(-2.0 * total / 3.0 == doctest::Approx(-4.0 * q.weight() / 3.0));
        CHECK(total == 2 * q.weight());
    }
}

TEST_CASE("transform small cases") {
    auto c = to_pauli_coefficients(DenseOperator::identity(1));
    CHECK(c.size() == 1);
    CHECK(c.coeff({0, 0}) == doctest::Approx(1.0));
    auto x1 = oracle::kron_pauli(PauliString::parse("XI"));
    auto cx = to_pauli_coefficients(x1);
    CHECK(cx.size() == 1);
    CHECK(cx.coeff({1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("transform matches naive traces") {
    std::mt19937_64 rng(4);
    auto m = oracle::random_matrix(3, rng, false);
    auto c = pauli_transform(m);
    for (std::uint64_t x = 0; x < 8; ++x)
        for (std::uint64_t z = 0; z < 8; ++z) {
            auto pm = oracle::kron_pauli(PauliString::hermitian(3, x, z));
            cplx tr = oracle::matmul(pm, m).trace() / 8.0;
            CHECK(std::abs(tr - c[(x << 3) | z]) < 1e-12);
        }
    auto h = oracle::random_matrix(3, rng, true);
    auto ch = pauli_transform(h);
    for (auto v : ch) CHECK(std::abs(v.imag()) < 1e-12);
}

TEST_CASE("round trip and Parseval") {
    std::mt19937_64 rng(5);
    for (int n = 1; n <= 6; ++n) {
        auto m = oracle::random_matrix(n, rng, true);
        auto op = to_pauli_coefficients(m, 0.0);
        auto back = from_pauli_coefficients(op);
        CHECK(oracle::max_diff(m, back) < 1e-10);
        double dim = static_cast<double>(m.dim());
        CHECK(op.frobenius_weight() == doctest::Approx(m.frobenius_sq() / dim).epsilon(1e-10));
        auto g = oracle::random_matrix(n, rng, false);
        auto cg = pauli_transform(g);
        CHECK(oracle::max_diff(inverse_pauli_transform(cg, n), g) < 1e-10);
        double s = 0;
        for (auto v : cg) s += std::norm(v);
        CHECK(s == doctest::Approx(g.frobenius_sq() / dim).epsilon(1e-10));
    }
}

TEST_CASE("weight histogram") {
    PauliOperator sx(4);
    for (int j = 0; j < 4; ++j) sx.add(PauliString::single(4, j, PauliKind::X), 0.25);
    auto p = weight_histogram(sx);
    CHECK(p[1] == doctest::Approx(0.25));
    CHECK(p[0] == 0.0);
    CHECK(p[2] == 0.0);
    PauliOperator one(5);
    one.add(PauliString::parse("XYZII"), 1.0);
    CHECK(weight_histogram(one)[3] == doctest::Approx(1.0));
    CHECK(histogram_csv(p).rfind("k,p_k\n", 0) == 0);
}

TEST_CASE("mismatched sizes and pruning") {
    CHECK_THROWS(multiply(PauliString::parse("X"), PauliString::parse("XX")));
    CHECK_THROWS(commutes(PauliString::parse("X"), PauliString::parse("XX")));
    PauliOperator o(2);
    o.add(PauliString::parse("XI"), 1e-15);
    CHECK(o.size() == 0);
    // non-Hermitian string in a real operator
    CHECK_THROWS(o.add(PauliString(2, 1, 0, 1), 1.0));
    // -Y folds into a negative coefficient
    o.add(PauliString(1 + 1, 1, 1, 3), 1.0);
    CHECK(o.coeff({1, 1}) == doctest::Approx(-1.0));
}
