#include "dilution/kernels.hpp"

#include <stdexcept>

namespace dl::kernels::reference {

namespace {
void diag(cplx* m, std::size_t d, const cplx* dg) {
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) m[a * d + b] *= dg[a] * std::conj(dg[b]);
}

void site_map(const cplx* src, cplx* dst, std::size_t d, int j, const Super4& s, bool accumulate) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t a = 0; a < d; ++a) {
        if (a & bit) continue;
        for (std::size_t b = 0; b < d; ++b) {
            if (b & bit) continue;
            const std::size_t idx[4] = {a * d + b, a * d + (b | bit), (a | bit) * d + b, (a | bit) * d + (b | bit)};
            cplx in[4];
            for (int k = 0; k < 4; ++k) in[k] = src[idx[k]];
            for (int r = 0; r < 4; ++r) {
                cplx acc{};
                for (int c = 0; c < 4; ++c) acc += s[4 * r + c] * in[c];
                if (accumulate)
                    dst[idx[r]] += acc;
                else
                    dst[idx[r]] = acc;
            }
        }
    }
}
}  // namespace

void apply_layer(cplx* m, int n, const LocalLayer& layer) {
    const std::size_t d = std::size_t{1} << n;
    if (layer.pre_diag) diag(m, d, layer.pre_diag);
    for (int j = 0; j < n; ++j)
        if (layer.active[j]) site_map(m, m, d, j, layer.ops[j], false);
    if (layer.post_diag) diag(m, d, layer.post_diag);
}

void accumulate_layer(const cplx* src, cplx* dst, int n, const LocalLayer& layer) {
    const std::size_t d = std::size_t{1} << n;
    for (int j = 0; j < n; ++j)
        if (layer.active[j]) site_map(src, dst, d, j, layer.ops[j], true);
}

void apply_super16(cplx* m, int n, int site_a, int site_b, const Super16& s) {
    const std::size_t d = std::size_t{1} << n;
    const std::size_t ba = std::size_t{1} << site_a, bb = std::size_t{1} << site_b;
    std::vector<cplx> out(d * d);
    // out[a][b] = sum over (a', b') differing only on the two sites
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            int x = ((a & ba) ? 1 : 0) + ((a & bb) ? 2 : 0);
            int y = ((b & ba) ? 1 : 0) + ((b & bb) ? 2 : 0);
            std::size_t a0 = a & ~(ba | bb), b0 = b & ~(ba | bb);
            cplx acc{};
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) {
                    std::size_t ap = a0 | ((p & 1) ? ba : 0) | ((p & 2) ? bb : 0);
                    std::size_t bq = b0 | ((q & 1) ? ba : 0) | ((q & 2) ? bb : 0);
                    acc += s[(4 * x + y) * 16 + 4 * p + q] * m[ap * d + bq];
                }
            out[a * d + b] = acc;
        }
    std::copy(out.begin(), out.end(), m);
}

void sv_apply_1q(cplx* psi, int n, int site, const Mat2& u) {
    const std::size_t d = std::size_t{1} << n, bit = std::size_t{1} << site;
    for (std::size_t a = 0; a < d; ++a) {
        if (a & bit) continue;
        cplx v0 = psi[a], v1 = psi[a | bit];
        psi[a] = u[0] * v0 + u[1] * v1;
        psi[a | bit] = u[2] * v0 + u[3] * v1;
    }
}

void sv_apply_rx_layer(cplx* psi, int n, const std::vector<double>& angles) {
    for (int j = 0; j < n; ++j)
        if (angles[j] != 0.0) sv_apply_1q(psi, n, j, rx(angles[j]));
}

}  // namespace dl::kernels::reference
