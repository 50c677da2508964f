#include "dilution/pauli.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dl {

namespace {

int popc(std::uint64_t v) { return __builtin_popcountll(v); }

void check_n(int n) {
    if (n < 1 || n > 63) throw std::invalid_argument("qubit count out of range");
}

void check_same(const PauliString& a, const PauliString& b) {
    if (a.n != b.n) throw std::invalid_argument("mismatched qubit counts");
}

// sign s with i^phase X^x Z^z = s * (Hermitian string)
double hermitian_sign(std::uint64_t x, std::uint64_t z, int phase) {
    int rel = ((phase - popc(x & z)) % 4 + 4) % 4;
    if (rel == 0) return 1.0;
    if (rel == 2) return -1.0;
    throw std::invalid_argument("non-Hermitian Pauli string in real operator");
}

const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

char pauli_char(PauliKind k) { return "IXYZ"[static_cast<int>(k)]; }

PauliKind pauli_from_char(char c) {
    switch (c) {
        case 'I': return PauliKind::I;
        case 'X': return PauliKind::X;
        case 'Y': return PauliKind::Y;
        case 'Z': return PauliKind::Z;
        default: throw std::invalid_argument(std::string("bad Pauli label ") + c);
    }
}

PauliString::PauliString(int n_, std::uint64_t x_, std::uint64_t z_, std::uint8_t phase_)
    : n(n_), x(x_), z(z_), phase(static_cast<std::uint8_t>(phase_ & 3)) {
    check_n(n);
    std::uint64_t mask = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
    if ((x & ~mask) || (z & ~mask)) throw std::invalid_argument("Pauli bits outside qubit range");
}

PauliString PauliString::hermitian(int n, std::uint64_t x, std::uint64_t z) {
    return PauliString(n, x, z, static_cast<std::uint8_t>(popc(x & z) & 3));
}

PauliString PauliString::identity(int n) { return PauliString(n, 0, 0, 0); }

PauliString PauliString::single(int n, int site, PauliKind k) {
    if (site < 0 || site >= n) throw std::invalid_argument("site out of range");
    std::uint64_t b = 1ULL << site;
    std::uint64_t x = (k == PauliKind::X || k == PauliKind::Y) ? b : 0;
    std::uint64_t z = (k == PauliKind::Z || k == PauliKind::Y) ? b : 0;
    return hermitian(n, x, z);
}

PauliString PauliString::parse(const std::string& label) {
    int n = static_cast<int>(label.size());
    std::uint64_t x = 0, z = 0;
    for (int j = 0; j < n; ++j) {
        PauliKind k = pauli_from_char(label[j]);
        if (k == PauliKind::X || k == PauliKind::Y) x |= 1ULL << j;
        if (k == PauliKind::Z || k == PauliKind::Y) z |= 1ULL << j;
    }
    return hermitian(n, x, z);
}

PauliKind PauliString::at(int site) const {
    int xb = (x >> site) & 1, zb = (z >> site) & 1;
    if (xb && zb) return PauliKind::Y;
    if (xb) return PauliKind::X;
    if (zb) return PauliKind::Z;
    return PauliKind::I;
}

int PauliString::weight() const { return popc(x | z); }

bool PauliString::is_hermitian_form() const { return phase == (popc(x & z) & 3); }

std::string PauliString::label() const {
    std::string s;
    int rel = ((phase - popc(x & z)) % 4 + 4) % 4;
    static const char* pre[4] = {"", "i", "-", "-i"};
    s += pre[rel];
    for (int j = 0; j < n; ++j) s += pauli_char(at(j));
    return s;
}

cplx PauliString::phase_factor() const { return kIPow[phase & 3]; }

PauliString multiply(const PauliString& a, const PauliString& b) {
    check_same(a, b);
    int ph = a.phase + b.phase + 2 * popc(a.z & b.x);
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, static_cast<std::uint8_t>(ph & 3));
}

bool commutes(const PauliString& a, const PauliString& b) {
    check_same(a, b);
    return ((popc(a.x & b.z) + popc(a.z & b.x)) & 1) == 0;
}

int noise_commutator_weight(const PauliString& p, PauliKind k, const std::vector<int>& sites) {
    int alpha = 0;
    for (int j : sites) {
        PauliKind f = p.at(j);
        if (f != PauliKind::I && k != PauliKind::I && f != k) ++alpha;
    }
    return alpha;
}

// ---------------------------------------------------------------- PauliOperator

PauliOperator::PauliOperator(int n, double prune) : n_(n), prune_(prune) { check_n(n); }

void PauliOperator::add(const PauliString& p, double c) {
    if (p.n != n_) throw std::invalid_argument("mismatched qubit counts");
    add(PauliKey{p.x, p.z}, c * hermitian_sign(p.x, p.z, p.phase));
}

void PauliOperator::add(const PauliKey& k, double c) {
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) < prune_) terms_.erase(it);
}

double PauliOperator::coeff(const PauliKey& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? 0.0 : it->second;
}

double PauliOperator::frobenius_weight() const {
    double s = 0;
    for (auto& [k, c] : terms_) s += c * c;
    return s;
}

void PauliOperator::prune() {
    std::erase_if(terms_, [&](auto& kv) { return std::abs(kv.second) < prune_; });
}

PauliOperator& PauliOperator::operator+=(const PauliOperator& o) {
    if (o.n_ != n_) throw std::invalid_argument("mismatched qubit counts");
    for (auto& [k, c] : o.terms_) add(k, c);
    return *this;
}

PauliOperator PauliOperator::operator*(double s) const {
    PauliOperator r(n_, prune_);
    for (auto& [k, c] : terms_) r.add(k, c * s);
    return r;
}

// ---------------------------------------------------------------- ComplexPauliSum

ComplexPauliSum ComplexPauliSum::from(const PauliOperator& o) {
    ComplexPauliSum s(o.num_qubits());
    for (auto& [k, c] : o.terms()) s.terms_[k] += c;
    return s;
}

void ComplexPauliSum::add(const PauliString& p, cplx c) {
    if (p.n != n_) throw std::invalid_argument("mismatched qubit counts");
    int rel = ((p.phase - popc(p.x & p.z)) % 4 + 4) % 4;
    terms_[PauliKey{p.x, p.z}] += c * kIPow[rel];
}

ComplexPauliSum& ComplexPauliSum::operator+=(const ComplexPauliSum& o) {
    for (auto& [k, c] : o.terms_) terms_[k] += c;
    return *this;
}

ComplexPauliSum ComplexPauliSum::operator*(cplx s) const {
    ComplexPauliSum r(n_);
    for (auto& [k, c] : terms_) r.terms_[k] = c * s;
    return r;
}

PauliOperator ComplexPauliSum::to_hermitian(double tol) const {
    PauliOperator o(n_);
    for (auto& [k, c] : terms_) {
        if (std::abs(c.imag()) > tol) throw std::runtime_error("operator is not Hermitian");
        o.add(k, c.real());
    }
    return o;
}

ComplexPauliSum product(const ComplexPauliSum& a, const ComplexPauliSum& b) {
    ComplexPauliSum r(a.num_qubits());
    for (auto& [ka, ca] : a.terms()) {
        PauliString pa = PauliString::hermitian(a.num_qubits(), ka.x, ka.z);
        for (auto& [kb, cb] : b.terms()) {
            PauliString pb = PauliString::hermitian(b.num_qubits(), kb.x, kb.z);
            r.add(multiply(pa, pb), ca * cb);
        }
    }
    return r;
}

ComplexPauliSum commutator(const ComplexPauliSum& a, const ComplexPauliSum& b) {
    ComplexPauliSum r = product(a, b);
    r += product(b, a) * cplx(-1.0);
    ComplexPauliSum clean(a.num_qubits());
    for (auto& [k, c] : r.terms())
        if (std::abs(c) > 1e-15) clean.add(PauliString::hermitian(a.num_qubits(), k.x, k.z), c);
    return clean;
}

// ---------------------------------------------------------------- DenseOperator

DenseOperator::DenseOperator(int n) : n_(n) {
    check_n(n);
    if (n > 15) throw std::invalid_argument("dense operator too large");
    data_.assign(dim() * dim(), cplx{});
}

DenseOperator DenseOperator::identity(int n) {
    DenseOperator m(n);
    for (std::size_t i = 0; i < m.dim(); ++i) m(i, i) = 1.0;
    return m;
}

DenseOperator DenseOperator::from_pauli(const PauliOperator& o) { return from_pauli_coefficients(o); }

cplx DenseOperator::trace() const {
    cplx t{};
    for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
    return t;
}

double DenseOperator::frobenius_sq() const {
    double s = 0;
    for (auto& v : data_) s += std::norm(v);
    return s;
}

cplx hs_inner(const DenseOperator& a, const DenseOperator& b) {
    if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("mismatched qubit counts");
    cplx s{};
    const std::size_t len = a.storage().size();
    for (std::size_t i = 0; i < len; ++i) s += std::conj(a.data()[i]) * b.data()[i];
    return s;
}

// ---------------------------------------------------------------- transforms

template <class T>
static void wht_impl(T* v, std::size_t len) {
    if (len == 0 || (len & (len - 1))) throw std::invalid_argument("length not a power of two");
    for (std::size_t h = 1; h < len; h <<= 1)
        for (std::size_t i = 0; i < len; i += 2 * h)
            for (std::size_t j = i; j < i + h; ++j) {
                T a = v[j], b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
}

void walsh_hadamard(cplx* v, std::size_t len) { wht_impl(v, len); }
void walsh_hadamard(double* v, std::size_t len) { wht_impl(v, len); }

// tr(P M) = i^h sum_b (-1)^{z.b} M[b][b^x], h = popcount(x & z)
std::vector<cplx> pauli_transform(const DenseOperator& m) {
    const int n = m.num_qubits();
    const std::size_t d = m.dim();
    std::vector<cplx> out(d * d);
    const double norm = 1.0 / static_cast<double>(d);
#pragma omp parallel for schedule(static)
    for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(d); ++xi) {
        const std::size_t x = static_cast<std::size_t>(xi);
        cplx* v = out.data() + (x << n);
        for (std::size_t b = 0; b < d; ++b) v[b] = m(b, b ^ x);
        wht_impl(v, d);
        for (std::size_t z = 0; z < d; ++z) v[z] *= kIPow[popc(x & z) & 3] * norm;
    }
    return out;
}

void pauli_row_coefficients(const DenseOperator& m, std::uint64_t x, cplx* out) {
    const std::size_t d = m.dim();
    const double norm = 1.0 / static_cast<double>(d);
    for (std::size_t b = 0; b < d; ++b) out[b] = m(b, b ^ x);
    wht_impl(out, d);
    for (std::size_t z = 0; z < d; ++z) out[z] *= kIPow[popc(x & z) & 3] * norm;
}

cplx pauli_coefficient(const DenseOperator& m, const PauliKey& k) {
    const std::size_t d = m.dim();
    cplx acc{};
    for (std::size_t b = 0; b < d; ++b) {
        const cplx v = m(b, b ^ k.x);
        acc += (popc(k.z & b) & 1) ? -v : v;
    }
    return acc * kIPow[popc(k.x & k.z) & 3] / static_cast<double>(d);
}

// M[b^x][b] = sum_z c_{x,z} i^h (-1)^{z.b}
DenseOperator inverse_pauli_transform(const std::vector<cplx>& c, int n) {
    DenseOperator m(n);
    const std::size_t d = m.dim();
    if (c.size() != d * d) throw std::invalid_argument("coefficient array has wrong size");
#pragma omp parallel for schedule(static)
    for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(d); ++xi) {
        const std::size_t x = static_cast<std::size_t>(xi);
        std::vector<cplx> v(d);
        for (std::size_t z = 0; z < d; ++z) v[z] = c[(x << n) | z] * kIPow[popc(x & z) & 3];
        wht_impl(v.data(), d);
        for (std::size_t b = 0; b < d; ++b) m(b ^ x, b) = v[b];
    }
    return m;
}

PauliOperator to_pauli_coefficients(const DenseOperator& m, double prune) {
    const int n = m.num_qubits();
    auto c = pauli_transform(m);
    PauliOperator o(n, prune);
    const std::size_t d = m.dim();
    for (std::size_t x = 0; x < d; ++x)
        for (std::size_t z = 0; z < d; ++z) {
            double v = c[(x << n) | z].real();
            if (std::abs(v) >= prune) o.add(PauliKey{x, z}, v);
        }
    return o;
}

DenseOperator from_pauli_coefficients(const PauliOperator& o) {
    const int n = o.num_qubits();
    if (n > 15) throw std::invalid_argument("dense operator too large");
    DenseOperator m(n);
    const std::size_t d = m.dim();
    for (auto& [k, c] : o.terms()) {
        cplx f = c * kIPow[popc(k.x & k.z) & 3];
        for (std::size_t b = 0; b < d; ++b) {
            double s = (popc(k.z & b) & 1) ? -1.0 : 1.0;
            m(b ^ k.x, b) += f * s;
        }
    }
    return m;
}

std::vector<double> weight_histogram(const PauliOperator& o) {
    std::vector<double> p(o.num_qubits() + 1, 0.0);
    for (auto& [k, c] : o.terms()) p[key_weight(k)] += c * c;
    return p;
}

std::string histogram_csv(const std::vector<double>& p) {
    std::ostringstream os;
    os.precision(17);
    os << "k,p_k\n";
    for (std::size_t k = 0; k < p.size(); ++k) os << k << ',' << p[k] << '\n';
    return os.str();
}

}  // namespace dl
