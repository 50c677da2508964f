#include "dilution/kernels.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dl::kernels {

namespace {

using idx_t = std::int64_t;

const Mat2 kPauli[4] = {
    Mat2{1, 0, 0, 1},
    Mat2{0, 1, 1, 0},
    Mat2{0, cplx(0, -1), cplx(0, 1), 0},
    Mat2{1, 0, 0, -1},
};

struct SplitS4 {
    double re[16], im[16];
    explicit SplitS4(const Super4& s) {
        for (int i = 0; i < 16; ++i) re[i] = s[i].real(), im[i] = s[i].imag();
    }
};

inline void mv4(const SplitS4& s, double* p0, double* p1, double* p2, double* p3) {
    const double xr[4] = {p0[0], p1[0], p2[0], p3[0]};
    const double xi[4] = {p0[1], p1[1], p2[1], p3[1]};
    double yr[4], yi[4];
    for (int r = 0; r < 4; ++r) {
        double ar = 0, ai = 0;
        for (int c = 0; c < 4; ++c) {
            ar += s.re[4 * r + c] * xr[c] - s.im[4 * r + c] * xi[c];
            ai += s.re[4 * r + c] * xi[c] + s.im[4 * r + c] * xr[c];
        }
        yr[r] = ar, yi[r] = ai;
    }
    p0[0] = yr[0], p0[1] = yi[0];
    p1[0] = yr[1], p1[1] = yi[1];
    p2[0] = yr[2], p2[1] = yi[2];
    p3[0] = yr[3], p3[1] = yi[3];
}

inline void mv4_acc(const SplitS4& s, const double* q0, const double* q1, const double* q2,
                    const double* q3, double* p0, double* p1, double* p2, double* p3) {
    const double xr[4] = {q0[0], q1[0], q2[0], q3[0]};
    const double xi[4] = {q0[1], q1[1], q2[1], q3[1]};
    double* out[4] = {p0, p1, p2, p3};
    for (int r = 0; r < 4; ++r) {
        double ar = 0, ai = 0;
        for (int c = 0; c < 4; ++c) {
            ar += s.re[4 * r + c] * xr[c] - s.im[4 * r + c] * xi[c];
            ai += s.re[4 * r + c] * xi[c] + s.im[4 * r + c] * xr[c];
        }
        out[r][0] += ar, out[r][1] += ai;
    }
}

inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }
inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }

// Pauli transfer form restricted to I, X scalings and a real Y/Z block.
// Covers X rotations composed with Pauli channels (and their adjoints,
// inverses, and insertion maps).
struct PtmXForm {
    bool ok = false;
    double pI = 0, pX = 0, r00 = 0, r01 = 0, r10 = 0, r11 = 0;
};

PtmXForm classify(const Super4& s) {
    // T_PQ = 1/2 tr(P S(Q)) with c_P = tr(P M) and M = 1/2 sum_P c_P P
    static const Mat2 basis[4] = {Mat2{1, 0, 0, 1}, Mat2{0, 1, 1, 0}, Mat2{0, cplx(0, -1), cplx(0, 1), 0},
                                  Mat2{1, 0, 0, -1}};
    double t[4][4];
    double scale = 0;
    for (int q = 0; q < 4; ++q) {
        cplx out[4]{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) out[r] += s[4 * r + c] * basis[q][c];
        for (int p = 0; p < 4; ++p) {
            // tr(P out) with out row-major 2x2
            cplx tr = basis[p][0] * out[0] + basis[p][1] * out[2] + basis[p][2] * out[1] + basis[p][3] * out[3];
            tr *= 0.5;
            if (std::abs(tr.imag()) > 1e-13 * (1 + std::abs(tr.real()))) return {};
            t[p][q] = tr.real();
            scale = std::max(scale, std::abs(tr.real()));
        }
    }
    const double tol = 1e-15 * (1 + scale);
    const int off[][2] = {{0, 1}, {1, 0}, {0, 2}, {0, 3}, {2, 0}, {3, 0}, {1, 2}, {1, 3}, {2, 1}, {3, 1}};
    for (auto& o : off)
        if (std::abs(t[o[0]][o[1]]) > tol) return {};
    PtmXForm f;
    f.ok = true;
    f.pI = t[0][0], f.pX = t[1][1];
    f.r00 = t[2][2], f.r01 = t[2][3], f.r10 = t[3][2], f.r11 = t[3][3];
    return f;
}

// Coefficients with the 1/2 reconstruction folded in.
struct FastCoef {
    double hI, hX, h00, h01, h10, h11;
    explicit FastCoef(const PtmXForm& f)
        : hI(0.5 * f.pI), hX(0.5 * f.pX), h00(0.5 * f.r00), h01(0.5 * f.r01), h10(0.5 * f.r10), h11(0.5 * f.r11) {}
};

// One 2x2 block (a = m00, b = m01, c = m10, e = m11), as re/im pairs.
// cI = a + e, cZ = a - e, cX = b + c, cYt = b - c, cY = i cYt.
// m00 = hI cI + (i h10 cYt + h11 cZ)   m11 = hI cI - (...)
// m01 = hX cX + h00 cYt - i h01 cZ    m10 = hX cX - h00 cYt + i h01 cZ
template <bool Acc>
inline void fast_block(const FastCoef& k, const double* a, const double* b, const double* c, const double* e,
                       double* oa, double* ob, double* oc, double* oe) {
    const double cIr = a[0] + e[0], cIi = a[1] + e[1];
    const double cZr = a[0] - e[0], cZi = a[1] - e[1];
    const double cXr = b[0] + c[0], cXi = b[1] + c[1];
    const double cYr = b[0] - c[0], cYi = b[1] - c[1];
    const double iIr = k.hI * cIr, iIi = k.hI * cIi;
    const double zr = -k.h10 * cYi + k.h11 * cZr, zi = k.h10 * cYr + k.h11 * cZi;
    const double xr = k.hX * cXr, xi = k.hX * cXi;
    const double yr = k.h00 * cYr + k.h01 * cZi, yi = k.h00 * cYi - k.h01 * cZr;
    if constexpr (Acc) {
        oa[0] += iIr + zr, oa[1] += iIi + zi;
        oe[0] += iIr - zr, oe[1] += iIi - zi;
        ob[0] += xr + yr, ob[1] += xi + yi;
        oc[0] += xr - yr, oc[1] += xi - yi;
    } else {
        oa[0] = iIr + zr, oa[1] = iIi + zi;
        oe[0] = iIr - zr, oe[1] = iIi - zi;
        ob[0] = xr + yr, ob[1] = xi + yi;
        oc[0] = xr - yr, oc[1] = xi - yi;
    }
}

template <bool Acc>
inline void fast_rows(const FastCoef& k, const cplx* q0, const cplx* q1, cplx* r0, cplx* r1, std::size_t d,
                      std::size_t bit) {
    for (std::size_t hi = 0; hi < d; hi += 2 * bit) {
#pragma GCC ivdep
        for (std::size_t b = hi; b < hi + bit; ++b)
            fast_block<Acc>(k, dp(q0 + b), dp(q0 + b + bit), dp(q1 + b), dp(q1 + b + bit), dp(r0 + b),
                            dp(r0 + b + bit), dp(r1 + b), dp(r1 + b + bit));
    }
}

struct SiteOp {
    SplitS4 generic;
    PtmXForm form;
    explicit SiteOp(const Super4& s) : generic(s), form(classify(s)) {}
};

int group_bits(int n) {
    // keep 2^g rows of 16 * 2^n bytes within about 2 MiB (L2)
    int g = 21 - 4 - n;
    if (g < 1) g = 1;
    if (g > n) g = n;
    return g;
}

inline void scale_row(cplx* row, std::size_t d, cplx da, const cplx* diag) {
    for (std::size_t b = 0; b < d; ++b) row[b] *= da * std::conj(diag[b]);
}

struct Group {
    int j0, g;
    bool active;
};

std::vector<Group> make_groups(int n, const LocalLayer& layer) {
    std::vector<Group> gs;
    int g = group_bits(n);
    for (int j0 = 0; j0 < n; j0 += g) {
        int gg = std::min(g, n - j0);
        bool act = false;
        for (int j = j0; j < j0 + gg; ++j) act |= layer.active[j] != 0;
        gs.push_back({j0, gg, act});
    }
    return gs;
}

// rows[s] = pointer of row a0 | (s << j0)
template <class F>
void for_each_row_block(int n, int j0, int g, F&& f) {
    const idx_t blocks = idx_t{1} << (n - g);
    const std::uint64_t lo_mask = (std::uint64_t{1} << j0) - 1;
#pragma omp parallel
    {
        std::vector<std::uint64_t> rows(std::size_t{1} << g);
#pragma omp for schedule(static)
        for (idx_t idx = 0; idx < blocks; ++idx) {
            std::uint64_t u = static_cast<std::uint64_t>(idx);
            std::uint64_t a0 = ((u & ~lo_mask) << g) | (u & lo_mask);
            for (std::size_t s = 0; s < rows.size(); ++s) rows[s] = a0 | (s << j0);
            f(rows);
        }
    }
}

void check_layer(int n, const LocalLayer& layer) {
    if (n < 1 || n > 15) throw std::invalid_argument("dense kernel qubit count out of range");
    if (static_cast<int>(layer.ops.size()) != n || static_cast<int>(layer.active.size()) != n)
        throw std::invalid_argument("layer size mismatch");
}

}  // namespace

// ---------------------------------------------------------------- superops

Super4 identity_super4() {
    Super4 s{};
    for (int i = 0; i < 4; ++i) s[5 * i] = 1.0;
    return s;
}

Super4 unitary_super4(const Mat2& u) {
    Super4 s{};
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) s[(2 * x + y) * 4 + 2 * p + q] = u[2 * x + p] * std::conj(u[2 * y + q]);
    return s;
}

Super4 pauli_channel_super4(double w_i, double w_x, double w_y, double w_z) {
    const double w[4] = {w_i, w_x, w_y, w_z};
    Super4 s{};
    for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0) continue;
        Super4 u = unitary_super4(kPauli[k]);
        for (int i = 0; i < 16; ++i) s[i] += w[k] * u[i];
    }
    return s;
}

Super4 compose(const Super4& outer, const Super4& inner) {
    Super4 r{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) r[4 * i + j] += outer[4 * i + k] * inner[4 * k + j];
    return r;
}

Super4 adjoint(const Super4& s) {
    Super4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[4 * i + j] = std::conj(s[4 * j + i]);
    return r;
}

Super4 inverse(const Super4& s) {
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = s[4 * i + j];
    Eigen::FullPivLU<Eigen::Matrix4cd> lu(m);
    if (!lu.isInvertible()) throw std::runtime_error("superoperator is singular");
    Eigen::Matrix4cd inv = lu.inverse();
    Super4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[4 * i + j] = inv(i, j);
    return r;
}

bool is_identity(const Super4& s, double tol) {
    Super4 id = identity_super4();
    for (int i = 0; i < 16; ++i)
        if (std::abs(s[i] - id[i]) > tol) return false;
    return true;
}

Super16 identity_super16() {
    Super16 s{};
    for (int i = 0; i < 16; ++i) s[17 * i] = 1.0;
    return s;
}

Super16 unitary_super16(const Mat4& u) {
    Super16 s{};
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) s[(4 * x + y) * 16 + 4 * p + q] = u[4 * x + p] * std::conj(u[4 * y + q]);
    return s;
}

Super16 pauli_channel_super16(const std::array<double, 16>& w) {
    Super16 s{};
    for (int pa = 0; pa < 4; ++pa)
        for (int pb = 0; pb < 4; ++pb) {
            double wt = w[pa + 4 * pb];
            if (wt == 0.0) continue;
            Mat4 u{};
            // basis index xa + 2 xb
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c)
                    u[4 * r + c] = kPauli[pa][2 * (r & 1) + (c & 1)] * kPauli[pb][2 * (r >> 1) + (c >> 1)];
            Super16 us = unitary_super16(u);
            for (int i = 0; i < 256; ++i) s[i] += wt * us[i];
        }
    return s;
}

Super16 compose(const Super16& outer, const Super16& inner) {
    Super16 r{};
    for (int i = 0; i < 16; ++i)
        for (int k = 0; k < 16; ++k) {
            cplx o = outer[16 * i + k];
            if (o == cplx{}) continue;
            for (int j = 0; j < 16; ++j) r[16 * i + j] += o * inner[16 * k + j];
        }
    return r;
}

Super16 adjoint(const Super16& s) {
    Super16 r;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) r[16 * i + j] = std::conj(s[16 * j + i]);
    return r;
}

Mat2 pauli_mat2(int kind) { return kPauli[kind & 3]; }

Mat2 rx(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return Mat2{c, cplx(0, -s), cplx(0, -s), c};
}

// ---------------------------------------------------------------- dense kernels

void apply_layer(cplx* m, int n, const LocalLayer& layer) {
    check_layer(n, layer);
    const std::size_t d = std::size_t{1} << n;
    auto groups = make_groups(n, layer);
    int first = -1, last = -1;
    for (int i = 0; i < static_cast<int>(groups.size()); ++i)
        if (groups[i].active) {
            if (first < 0) first = i;
            last = i;
        }
    if (first < 0) {
        if (layer.pre_diag) apply_diag_conj(m, n, layer.pre_diag);
        if (layer.post_diag) apply_diag_conj(m, n, layer.post_diag);
        return;
    }
    std::vector<SiteOp> split;
    split.reserve(n);
    for (int j = 0; j < n; ++j) split.emplace_back(layer.ops[j]);

    for (int gi = first; gi <= last; ++gi) {
        const Group grp = groups[gi];
        if (!grp.active) continue;
        const bool do_pre = (gi == first) && layer.pre_diag;
        const bool do_post = (gi == last) && layer.post_diag;
        for_each_row_block(n, grp.j0, grp.g, [&](const std::vector<std::uint64_t>& rows) {
            const std::size_t nr = rows.size();
            if (do_pre)
                for (std::size_t s = 0; s < nr; ++s) scale_row(m + rows[s] * d, d, layer.pre_diag[rows[s]], layer.pre_diag);
            for (int j = grp.j0; j < grp.j0 + grp.g; ++j) {
                if (!layer.active[j]) continue;
                const std::size_t lbit = std::size_t{1} << (j - grp.j0);
                const std::size_t bit = std::size_t{1} << j;
                const SiteOp& S = split[j];
                const FastCoef fk(S.form);
                for (std::size_t s = 0; s < nr; ++s) {
                    if (s & lbit) continue;
                    cplx* r0 = m + rows[s] * d;
                    cplx* r1 = m + rows[s | lbit] * d;
                    if (S.form.ok) {
                        fast_rows<false>(fk, r0, r1, r0, r1, d, bit);
                        continue;
                    }
                    for (std::size_t hi = 0; hi < d; hi += 2 * bit)
                        for (std::size_t b = hi; b < hi + bit; ++b)
                            mv4(S.generic, dp(r0 + b), dp(r0 + b + bit), dp(r1 + b), dp(r1 + b + bit));
                }
            }
            if (do_post)
                for (std::size_t s = 0; s < nr; ++s) scale_row(m + rows[s] * d, d, layer.post_diag[rows[s]], layer.post_diag);
        });
    }
}

void accumulate_layer(const cplx* src, cplx* dst, int n, const LocalLayer& layer) {
    check_layer(n, layer);
    const std::size_t d = std::size_t{1} << n;
    auto groups = make_groups(n, layer);
    std::vector<SiteOp> split;
    split.reserve(n);
    for (int j = 0; j < n; ++j) split.emplace_back(layer.ops[j]);
    for (const Group& grp : groups) {
        if (!grp.active) continue;
        for_each_row_block(n, grp.j0, grp.g, [&](const std::vector<std::uint64_t>& rows) {
            const std::size_t nr = rows.size();
            for (int j = grp.j0; j < grp.j0 + grp.g; ++j) {
                if (!layer.active[j]) continue;
                const std::size_t lbit = std::size_t{1} << (j - grp.j0);
                const std::size_t bit = std::size_t{1} << j;
                const SiteOp& S = split[j];
                const FastCoef fk(S.form);
                for (std::size_t s = 0; s < nr; ++s) {
                    if (s & lbit) continue;
                    const cplx* q0 = src + rows[s] * d;
                    const cplx* q1 = src + rows[s | lbit] * d;
                    cplx* r0 = dst + rows[s] * d;
                    cplx* r1 = dst + rows[s | lbit] * d;
                    if (S.form.ok) {
                        fast_rows<true>(fk, q0, q1, r0, r1, d, bit);
                        continue;
                    }
                    for (std::size_t hi = 0; hi < d; hi += 2 * bit)
                        for (std::size_t b = hi; b < hi + bit; ++b)
                            mv4_acc(S.generic, dp(q0 + b), dp(q0 + b + bit), dp(q1 + b), dp(q1 + b + bit), dp(r0 + b),
                                    dp(r0 + b + bit), dp(r1 + b), dp(r1 + b + bit));
                }
            }
        });
    }
}

void apply_diag_conj(cplx* m, int n, const cplx* diag) {
    const std::size_t d = std::size_t{1} << n;
#pragma omp parallel for schedule(static)
    for (idx_t a = 0; a < static_cast<idx_t>(d); ++a) scale_row(m + a * d, d, diag[a], diag);
}

void apply_super16(cplx* m, int n, int site_a, int site_b, const Super16& s) {
    if (site_a == site_b) throw std::invalid_argument("two-site map needs distinct sites");
    const std::size_t d = std::size_t{1} << n;
    const std::size_t ba = std::size_t{1} << site_a, bb = std::size_t{1} << site_b;
    const std::size_t mask = ba | bb;
    const std::size_t off[4] = {0, ba, bb, ba | bb};
#pragma omp parallel for schedule(static)
    for (idx_t ai = 0; ai < static_cast<idx_t>(d); ++ai) {
        const std::size_t a = static_cast<std::size_t>(ai);
        if (a & mask) continue;
        cplx in[16], out[16];
        for (std::size_t b = 0; b < d; ++b) {
            if (b & mask) continue;
            for (int x = 0; x < 4; ++x)
                for (int y = 0; y < 4; ++y) in[4 * x + y] = m[(a | off[x]) * d + (b | off[y])];
            for (int i = 0; i < 16; ++i) {
                cplx acc{};
                for (int j = 0; j < 16; ++j) acc += s[16 * i + j] * in[j];
                out[i] = acc;
            }
            for (int x = 0; x < 4; ++x)
                for (int y = 0; y < 4; ++y) m[(a | off[x]) * d + (b | off[y])] = out[4 * x + y];
        }
    }
}

std::vector<cplx> xdiag_sums(const cplx* m, int n) {
    const std::size_t d = std::size_t{1} << n;
    constexpr int kChunks = 16;
    std::vector<std::vector<cplx>> part(kChunks, std::vector<cplx>(d));
    const std::size_t per = (d + kChunks - 1) / kChunks;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < kChunks; ++c) {
        auto& acc = part[c];
        for (std::size_t a = c * per; a < std::min(d, (c + 1) * per); ++a) {
            const cplx* row = m + a * d;
            for (std::size_t b = 0; b < d; ++b) acc[a ^ b] += row[b];
        }
    }
    std::vector<cplx> out(d);
    for (int c = 0; c < kChunks; ++c)
        for (std::size_t x = 0; x < d; ++x) out[x] += part[c][x];
    return out;
}

// ---------------------------------------------------------------- statevector

void sv_apply_diag(cplx* psi, int n, const cplx* diag) {
    const idx_t d = idx_t{1} << n;
#pragma omp parallel for schedule(static)
    for (idx_t a = 0; a < d; ++a) psi[a] *= diag[a];
}

void sv_apply_1q(cplx* psi, int n, int site, const Mat2& u) {
    const std::size_t bit = std::size_t{1} << site;
    const idx_t half = idx_t{1} << (n - 1);
#pragma omp parallel for schedule(static)
    for (idx_t i = 0; i < half; ++i) {
        std::size_t ui = static_cast<std::size_t>(i);
        std::size_t a = ((ui & ~(bit - 1)) << 1) | (ui & (bit - 1));
        cplx v0 = psi[a], v1 = psi[a | bit];
        psi[a] = u[0] * v0 + u[1] * v1;
        psi[a | bit] = u[2] * v0 + u[3] * v1;
    }
}

void sv_apply_rx_layer(cplx* psi, int n, const std::vector<double>& angles) {
    for (int j = 0; j < n; ++j)
        if (angles[j] != 0.0) sv_apply_1q(psi, n, j, rx(angles[j]));
}

void sv_apply_pauli(cplx* psi, int n, std::uint64_t x, std::uint64_t z, cplx phase) {
    const std::size_t d = std::size_t{1} << n;
    // |a> -> phase (-1)^{z.a} |a ^ x>
    if (x == 0) {
        for (std::size_t a = 0; a < d; ++a) psi[a] *= (__builtin_popcountll(z & a) & 1) ? -phase : phase;
        return;
    }
    const std::size_t top = std::size_t{1} << (63 - __builtin_clzll(x));
    for (std::size_t a = 0; a < d; ++a) {
        if (a & top) continue;
        std::size_t b = a ^ x;
        cplx va = psi[a], vb = psi[b];
        cplx fa = (__builtin_popcountll(z & a) & 1) ? -phase : phase;
        cplx fb = (__builtin_popcountll(z & b) & 1) ? -phase : phase;
        psi[b] = fa * va;
        psi[a] = fb * vb;
    }
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int t) {
#ifdef _OPENMP
    if (t > 0) omp_set_num_threads(t);
#else
    (void)t;
#endif
}

}  // namespace dl::kernels
