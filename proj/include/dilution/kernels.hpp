#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace dl::kernels {

using cplx = std::complex<double>;

// Linear map on a 2x2 block (m00, m01, m10, m11), row-major 4x4.
using Super4 = std::array<cplx, 16>;
// Linear map on the 4x4 block of two sites; index (xa + 2 xb) * 4 + (ya + 2 yb).
using Super16 = std::array<cplx, 256>;
using Mat2 = std::array<cplx, 4>;
using Mat4 = std::array<cplx, 16>;

Super4 identity_super4();
Super4 unitary_super4(const Mat2& u);  // M -> u M u^dagger
// M -> wI M + wX XMX + wY YMY + wZ ZMZ
Super4 pauli_channel_super4(double w_i, double w_x, double w_y, double w_z);
Super4 compose(const Super4& outer, const Super4& inner);
Super4 adjoint(const Super4& s);  // Hilbert-Schmidt adjoint
Super4 inverse(const Super4& s);
bool is_identity(const Super4& s, double tol = 0.0);

Super16 identity_super16();
Super16 unitary_super16(const Mat4& u);
// Sum over two-site Pauli strings p (index pa + 4 pb, kinds I,X,Y,Z) of w[p] P M P.
Super16 pauli_channel_super16(const std::array<double, 16>& w);
Super16 compose(const Super16& outer, const Super16& inner);
Super16 adjoint(const Super16& s);

Mat2 pauli_mat2(int kind);
Mat2 rx(double angle);  // exp(-i angle X)

// One fused pass set: optional pre diagonal conjugation, per-site maps on
// all active sites, optional post diagonal conjugation.
// diag conjugation: M[a][b] *= d[a] * conj(d[b]).
struct LocalLayer {
    std::vector<Super4> ops;   // size n (unused entries ignored)
    std::vector<char> active;  // size n
    const cplx* pre_diag = nullptr;
    const cplx* post_diag = nullptr;
};

// Cache-blocked, OpenMP parallel over row blocks.
void apply_layer(cplx* m, int n, const LocalLayer& layer);
// dst += sum over active j of ops[j](src); diagonals ignored.
void accumulate_layer(const cplx* src, cplx* dst, int n, const LocalLayer& layer);
void apply_diag_conj(cplx* m, int n, const cplx* d);
void apply_super16(cplx* m, int n, int site_a, int site_b, const Super16& s);
// sum_{a,b} with a ^ b = x of m[a][b], for every x (x-diagonal sums)
std::vector<cplx> xdiag_sums(const cplx* m, int n);

// Statevector kernels.
void sv_apply_diag(cplx* psi, int n, const cplx* d);
void sv_apply_1q(cplx* psi, int n, int site, const Mat2& u);
void sv_apply_rx_layer(cplx* psi, int n, const std::vector<double>& angles);
void sv_apply_pauli(cplx* psi, int n, std::uint64_t x, std::uint64_t z, cplx phase);

// Straightforward serial versions kept as test and benchmark references.
namespace reference {
void apply_layer(cplx* m, int n, const LocalLayer& layer);
void accumulate_layer(const cplx* src, cplx* dst, int n, const LocalLayer& layer);
void apply_super16(cplx* m, int n, int site_a, int site_b, const Super16& s);
void sv_apply_1q(cplx* psi, int n, int site, const Mat2& u);
void sv_apply_rx_layer(cplx* psi, int n, const std::vector<double>& angles);
}  // namespace reference

int max_threads();
void set_threads(int t);

}  // namespace dl::kernels
