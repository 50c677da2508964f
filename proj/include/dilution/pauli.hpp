#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dl {

using cplx = std::complex<double>;

enum class PauliKind : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(PauliKind k);
PauliKind pauli_from_char(char c);

// Operator i^phase * X^x * Z^z. Hermitian strings with Y factors carry
// phase = popcount(x & z) mod 4 (see hermitian()).
struct PauliString {
    int n = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    std::uint8_t phase = 0;

    PauliString() = default;
    PauliString(int n_, std::uint64_t x_, std::uint64_t z_, std::uint8_t phase_ = 0);

    // Hermitian string with the given per-site factors.
    static PauliString hermitian(int n, std::uint64_t x, std::uint64_t z);
    static PauliString identity(int n);
    static PauliString single(int n, int site, PauliKind k);
    // "XIZY" reads site 0 first.
    static PauliString parse(const std::string& label);

    PauliKind at(int site) const;
    int weight() const;
    bool is_hermitian_form() const;
    std::string label() const;
    // complex factor i^phase
    cplx phase_factor() const;

    bool operator==(const PauliString& o) const = default;
};

PauliString multiply(const PauliString& a, const PauliString& b);
bool commutes(const PauliString& a, const PauliString& b);

// Number of listed sites where K anticommutes with P's local factor.
int noise_commutator_weight(const PauliString& p, PauliKind k, const std::vector<int>& sites);

// Key of a Hermitian string; coefficients live in PauliOperator.
struct PauliKey {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    auto operator<=>(const PauliKey&) const = default;
};

inline int key_weight(const PauliKey& k) { return __builtin_popcountll(k.x | k.z); }

class PauliOperator {
public:
    explicit PauliOperator(int n = 1, double prune = 1e-14);

    int num_qubits() const { return n_; }
    double prune_threshold() const { return prune_; }
    const std::map<PauliKey, double>& terms() const { return terms_; }

    // Accepts any string; the phase must make it Hermitian up to a real sign.
    void add(const PauliString& p, double c);
    void add(const PauliKey& k, double c);
    double coeff(const PauliKey& k) const;
    double frobenius_weight() const;
    std::size_t size() const { return terms_.size(); }
    void prune();

    PauliOperator& operator+=(const PauliOperator& o);
    PauliOperator operator*(double s) const;

private:
    int n_;
    double prune_;
    std::map<PauliKey, double> terms_;
};

// Complex-coefficient sum over Hermitian strings; used for commutators.
class ComplexPauliSum {
public:
    explicit ComplexPauliSum(int n = 1) : n_(n) {}
    static ComplexPauliSum from(const PauliOperator& o);
    int num_qubits() const { return n_; }
    const std::map<PauliKey, cplx>& terms() const { return terms_; }
    void add(const PauliString& p, cplx c);
    ComplexPauliSum& operator+=(const ComplexPauliSum& o);
    ComplexPauliSum operator*(cplx s) const;
    // Real part; throws if any imaginary part exceeds tol.
    PauliOperator to_hermitian(double tol = 1e-12) const;

private:
    int n_;
    std::map<PauliKey, cplx> terms_;
};

ComplexPauliSum product(const ComplexPauliSum& a, const ComplexPauliSum& b);
ComplexPauliSum commutator(const ComplexPauliSum& a, const ComplexPauliSum& b);

// Row-major 2^N x 2^N complex matrix.
class DenseOperator {
public:
    DenseOperator() = default;
    explicit DenseOperator(int n);
    static DenseOperator identity(int n);
    static DenseOperator from_pauli(const PauliOperator& o);

    int num_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * dim() + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * dim() + c]; }
    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    std::vector<cplx>& storage() { return data_; }
    const std::vector<cplx>& storage() const { return data_; }

    cplx trace() const;
    double frobenius_sq() const;

private:
    int n_ = 0;
    std::vector<cplx> data_;
};

// tr(A^dagger B)
cplx hs_inner(const DenseOperator& a, const DenseOperator& b);

// Full complex coefficient array c[(x << N) | z] = 2^-N tr(P_{x,z} M), with
// P_{x,z} the Hermitian string. O(4^N N).
std::vector<cplx> pauli_transform(const DenseOperator& m);
DenseOperator inverse_pauli_transform(const std::vector<cplx>& c, int n);
// One x-row of the transform: out[z] = c_{x,z}, len 2^N. Scratch-free streaming use.
void pauli_row_coefficients(const DenseOperator& m, std::uint64_t x, cplx* out);
cplx pauli_coefficient(const DenseOperator& m, const PauliKey& k);

PauliOperator to_pauli_coefficients(const DenseOperator& m, double prune = 1e-14);
DenseOperator from_pauli_coefficients(const PauliOperator& o);

// In-place unnormalized Walsh-Hadamard transform, size must be a power of two.
void walsh_hadamard(cplx* v, std::size_t len);
void walsh_hadamard(double* v, std::size_t len);

std::vector<double> weight_histogram(const PauliOperator& o);
std::string histogram_csv(const std::vector<double>& p);

}  // namespace dl
