#include "dilution/free_fermion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "dilution/model.hpp"
#include "dilution/sim_engines.hpp"

namespace dl::ff {

namespace {

constexpr double kPi = std::numbers::pi;
const std::complex<double> kI(0.0, 1.0);

void check_chain(int n) {
    if (n < 2 || n % 2) throw std::invalid_argument("chain length must be even and >= 2");
}

double quad_0_pi(const std::function<double(double)>& f) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, kPi, 18, 1e-12) / kPi;
}

}  // namespace

double BlockAngles::cos2() const { return std::cos(2.0 * theta); }
double BlockAngles::sin2() const { return std::sin(2.0 * theta); }

Eigen::Matrix2cd pair_block(double k, double h, double dt) {
    Eigen::Matrix2cd z;
    z << 0.0, -2.0 * dt * std::sin(k), 2.0 * dt * std::sin(k), -4.0 * kI * dt * std::cos(k);
    Eigen::Matrix2cd field = Eigen::Matrix2cd::Zero();
    field(0, 0) = std::exp(-2.0 * kI * dt * h);
    field(1, 1) = std::exp(2.0 * kI * dt * h);
    return z.exp() * field;
}

Eigen::Matrix4cd floquet_block(double k, double h, double dt) {
    Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
    u.topLeftCorner<2, 2>() = pair_block(k, h, dt);
    u(2, 2) = u(3, 3) = std::exp(-2.0 * kI * dt * std::cos(k));
    return u;
}

BlockAngles continuum_angles(double k, double h) {
    const double r = std::sqrt(std::max(0.0, 1.0 + h * h - 2.0 * h * std::cos(k)));
    BlockAngles a;
    a.eps_plus = 2.0 * std::cos(k) + 2.0 * r;
    a.eps_minus = 2.0 * std::cos(k) - 2.0 * r;
    const double c2 = r > 0 ? (h - std::cos(k)) / r : 1.0;
    const double s2 = r > 0 ? std::sin(k) / r : 0.0;
    a.theta = 0.5 * std::atan2(s2, c2);
    a.phi = 0.0;
    return a;
}

BlockAngles block_angles(double k, double h, double dt) {
    if (dt == 0.0) return continuum_angles(k, h);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(pair_block(k, h, dt));
    const auto& ev = es.eigenvalues();
    if (std::abs(ev(0) - ev(1)) < 1e-12) return continuum_angles(k, h);
    double e0 = -std::arg(ev(0)) / dt, e1 = -std::arg(ev(1)) / dt;
    int plus = e0 >= e1 ? 0 : 1;
    Eigen::Vector2cd v = es.eigenvectors().col(plus).normalized();
    if (std::abs(v(0)) > 0) v *= std::conj(v(0)) / std::abs(v(0));
    BlockAngles a;
    a.eps_plus = std::max(e0, e1);
    a.eps_minus = std::min(e0, e1);
    a.theta = std::acos(std::clamp(std::abs(v(0)), 0.0, 1.0));
    a.phi = std::sin(a.theta) > 1e-14 ? std::arg(v(1) / kI) : 0.0;
    return a;
}

std::vector<double> even_sector_momenta(int n) {
    check_chain(n);
    std::vector<double> k;
    for (int m = -n / 2; m < n / 2; ++m) k.push_back(2.0 * (m + 0.5) * kPi / n);
    return k;
}

FreeFermionModel FreeFermionModel::make(int n, double h, double dt) {
    if (h < 0) throw std::invalid_argument("field must be >= 0");
    if (dt < 0) throw std::invalid_argument("dt must be >= 0");
    FreeFermionModel m;
    m.n = n;
    m.h = h;
    m.dt = dt;
    m.momenta = even_sector_momenta(n);
    for (double k : m.momenta)
        if (k > 0) {
            m.positive.push_back(k);
            m.angles.push_back(block_angles(k, h, dt));
        }
    return m;
}

double analytic_magnetization(const FreeFermionModel& m, double tau) {
    double s = 0;
    for (const auto& a : m.angles) {
        const double c = a.cos2();
        s += c * c + (1.0 - c * c) * std::cos(tau * a.delta());
    }
    return 2.0 * s / m.n;
}

std::vector<double> magnetization_series(const FreeFermionModel& m, int steps) {
    if (m.dt <= 0) throw std::invalid_argument("magnetization_series needs dt > 0");
    std::vector<double> out(steps + 1);
    for (int t = 0; t <= steps; ++t) out[t] = analytic_magnetization(m, t * m.dt);
    return out;
}

double thermodynamic_magnetization(double h, double dt, double tau) {
    return quad_0_pi([&](double k) {
        const BlockAngles a = block_angles(k, h, dt);
        const double c = a.cos2();
        return c * c + (1.0 - c * c) * std::cos(tau * a.delta());
    });
}

double plateau_magnetization(double h, double dt) {
    if (dt == 0.0) return h <= 1.0 ? 0.5 : 1.0 - 1.0 / (2.0 * h * h);
    return quad_0_pi([&](double k) {
        const double c = block_angles(k, h, dt).cos2();
        return c * c;
    });
}

double x_noise_decay_rate(double h, double dt) { return 4.0 * (1.0 - plateau_magnetization(h, dt)); }

std::vector<double> x_noise_sigma1(const std::vector<double>& sx) {
    std::vector<double> out(sx.size(), 0.0);
    for (std::size_t t = 1; t < sx.size(); ++t) {
        double conv = 0;
        for (std::size_t s = 1; s <= t; ++s) conv += sx[s] * sx[t - s];
        out[t] = -4.0 * static_cast<double>(t) * sx[t] + 4.0 * conv;
    }
    return out;
}

double sawtooth_phi(int j, int n) {
    int r = ((j % n) + n) % n;
    if (r > n / 2) r -= n;
    return -(4.0 / 3.0) * (std::abs(r) + 1);
}

// k on the 2 pi / N grid, where the sine part cancels
double phi_hat(double k, int n) {
    double s = 0;
    for (int j = 1; j <= n; ++j) s += std::cos(j * k) * sawtooth_phi(j, n);
    return s / n;
}

DepolarizingRate depolarizing_decay_rate(int n, double h, double dt) {
    if (dt != 0.0) throw std::invalid_argument("depolarizing decay rate is defined in the dt -> 0 limit only");
    const auto ks = even_sector_momenta(n);
    std::vector<double> c2(ks.size()), s2(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const BlockAngles a = continuum_angles(ks[i], h);
        c2[i] = a.cos2();
        s2[i] = a.sin2();
    }
    DepolarizingRate r;
    for (int j = -n / 2 + 1; j <= n / 2; ++j) {
        std::complex<double> al = 0, be = 0;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const auto e = std::exp(kI * (j * ks[i]));
            al += c2[i] * c2[i] * e;
            be += c2[i] * s2[i] * e;
        }
        al /= n;
        be /= n;
        if (j == 0) r.plateau = al.real();
        r.lambda += -0.5 * sawtooth_phi(j, n) * (std::norm(al) + std::norm(be));
    }
    r.sigma1_slope = -2.0 * r.lambda;
    r.decay_rate = r.plateau > 0 ? -r.sigma1_slope / r.plateau : std::numeric_limits<double>::quiet_NaN();
    return r;
}

// ---------------------------------------------------------------- Majorana machinery

PauliString majorana_string(int n, int a) {
    if (a < 0 || a >= 2 * n) throw std::out_of_range("Majorana index out of range");
    const int j = a / 2;
    std::uint64_t x = (j > 0) ? ((1ULL << j) - 1) : 0;
    std::uint64_t z = 1ULL << j;
    if (a % 2) x |= 1ULL << j;
    return PauliString::hermitian(n, x, z);
}

ComplexPauliSum quadratic_majorana(const Eigen::MatrixXcd& o) {
    const int n = static_cast<int>(o.rows()) / 2;
    ComplexPauliSum out(n);
    std::vector<PauliString> eta;
    for (int a = 0; a < 2 * n; ++a) eta.push_back(majorana_string(n, a));
    for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b)
            if (o(a, b) != 0.0) out.add(multiply(eta[a], eta[b]), o(a, b));
    return out;
}

Eigen::MatrixXcd x_noise_map(const Eigen::MatrixXcd& o) {
    Eigen::MatrixXcd out = -4.0 * o;
    for (Eigen::Index a = 0; a < o.rows(); ++a)
        for (Eigen::Index b = 0; b < o.cols(); ++b)
            if (a / 2 == b / 2) out(a, b) = 0.0;
    return out;
}

std::complex<double> vacuum_expectation(const Eigen::MatrixXcd& o) {
    std::complex<double> v = o.trace();
    for (Eigen::Index j = 0; 2 * j + 1 < o.rows(); ++j) v += -kI * o(2 * j, 2 * j + 1) + kI * o(2 * j + 1, 2 * j);
    return v;
}

Eigen::MatrixXcd sx_coefficients(int n) {
    Eigen::MatrixXcd o = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        o(2 * j, 2 * j + 1) = kI / (2.0 * n);
        o(2 * j + 1, 2 * j) = -kI / (2.0 * n);
    }
    return o;
}

Eigen::MatrixXd vacuum_correlation(int n) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        g(2 * j, 2 * j + 1) = 1.0;
        g(2 * j + 1, 2 * j) = -1.0;
    }
    return g;
}

namespace {

// g -> g R^T for R = product of commuting pair rotations [[c, sg s], [-sg s, c]]
void rotate_columns(Eigen::MatrixXd& g, int n, double h, double dt) {
    const double cz = std::cos(2.0 * dt), sz = std::sin(2.0 * dt);
    const double cx = std::cos(2.0 * dt * h), sx = std::sin(2.0 * dt * h);
    const Eigen::Index m = g.rows();
    auto rot = [&](int a, int b, double c, double s) {
        double* ca = g.col(a).data();
        double* cb = g.col(b).data();
        for (Eigen::Index r = 0; r < m; ++r) {
            const double u = ca[r], v = cb[r];
            ca[r] = c * u + s * v;
            cb[r] = -s * u + c * v;
        }
    };
    // ZZ bonds couple eta_{2j+1}, eta_{2j+2}; the boundary bond carries the antiperiodic sign
    for (int j = 0; j + 1 < n; ++j) rot(2 * j + 1, 2 * j + 2, cz, sz);
    rot(2 * n - 1, 0, cz, -sz);
    for (int j = 0; j < n; ++j) rot(2 * j, 2 * j + 1, cx, sx);
}

// per touched site the entry is multiplied by a + b x; sector k collects x^k
void cross_site_update(std::vector<Eigen::MatrixXd>& g, double a, double b) {
    const Eigen::Index m = g[0].rows();
    for (std::size_t k = g.size(); k-- > 0;)
        for (Eigen::Index c = 0; c < m; ++c)
            for (Eigen::Index r = 0; r < m; ++r) {
                if (r / 2 == c / 2) continue;
                double v = a * a * g[k](r, c);
                if (k >= 1) v += 2.0 * a * b * g[k - 1](r, c);
                if (k >= 2) v += b * b * g[k - 2](r, c);
                g[k](r, c) = v;
            }
}

// x (X_j . X_j - id) at one site: entries with exactly one index on the site pick up -2, the rest vanish
void insertion(Eigen::MatrixXd& g, int site) {
    const Eigen::Index m = g.rows();
    for (Eigen::Index c = 0; c < m; ++c)
        for (Eigen::Index r = 0; r < m; ++r) {
            const bool rin = r / 2 == site, cin = c / 2 == site;
            g(r, c) = (rin != cin) ? -2.0 * g(r, c) : 0.0;
        }
}

double lambda_from_ratio(double noisy, double noiseless, double eta, double tau) {
    if (!(noisy > 0) || !(noiseless > 0) || eta <= 0 || tau <= 0) return std::numeric_limits<double>::quiet_NaN();
    return -std::log(noisy / noiseless) / (eta * tau);
}

void check_run(int n, double h, double dt, double eta, int steps, int stride) {
    check_chain(n);
    if (h < 0) throw std::invalid_argument("field must be >= 0");
    if (dt <= 0) throw std::invalid_argument("dt must be > 0");
    if (eta < 0) throw std::invalid_argument("eta must be >= 0");
    if (eta * dt > 1) throw std::invalid_argument("eta * dt must be <= 1");
    if (steps < 0) throw std::invalid_argument("negative step count");
    if (stride < 1) throw std::invalid_argument("record stride must be >= 1");
}

FreeFermionRun make_run_frame(int n, double h, double dt, double eta, int steps, int stride) {
    FreeFermionRun r;
    r.n = n;
    r.h = h;
    r.dt = dt;
    r.eta = eta;
    r.lambda_theory = x_noise_decay_rate(h, dt);
    const auto model = FreeFermionModel::make(n, h, dt);
    for (int t = 0; t <= steps; ++t)
        if (t % stride == 0 || t == steps) {
            r.steps.push_back(t);
            r.time.push_back(t * dt);
            r.sx_noiseless.push_back(analytic_magnetization(model, t * dt));
        }
    return r;
}

}  // namespace

void apply_trotter_step(Eigen::MatrixXd& g, int n, double h, double dt) {
    rotate_columns(g, n, h, dt);
    g.transposeInPlace();
    rotate_columns(g, n, h, dt);
    g.transposeInPlace();
}

void apply_x_flip(Eigen::MatrixXd& g, int site) {
    g.row(2 * site) *= -1.0;
    g.row(2 * site + 1) *= -1.0;
    g.col(2 * site) *= -1.0;
    g.col(2 * site + 1) *= -1.0;
}

double sx_from_correlation(const Eigen::MatrixXd& g) {
    const Eigen::Index n = g.rows() / 2;
    double s = 0;
    for (Eigen::Index j = 0; j < n; ++j) s += g(2 * j, 2 * j + 1);
    return s / static_cast<double>(n);
}

// ---------------------------------------------------------------- noisy runs

std::string FreeFermionRun::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "t,Sx_noiseless,Sx_noisy,lambda_mes,lambda_theory\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        os << time[i] << ',' << sx_noiseless[i] << ',' << sx_noisy[i] << ',';
        if (std::isfinite(lambda_mes[i])) os << lambda_mes[i];
        os << ',' << lambda_theory << '\n';
    }
    return os.str();
}

double FreeFermionRun::late_time_lambda(double tau_lo, double tau_hi) const {
    double s = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < time.size(); ++i)
        if (time[i] >= tau_lo - 1e-12 && time[i] <= tau_hi + 1e-12 && std::isfinite(lambda_mes[i])) {
            s += lambda_mes[i];
            ++cnt;
        }
    if (cnt == 0) throw std::domain_error("no finite lambda_mes values in the window");
    return s / cnt;
}

FreeFermionRun gaussian_trajectories(int n, double h, double dt, double eta, int steps, int trajectories,
                                     std::uint64_t seed, int record_stride) {
    check_run(n, h, dt, eta, steps, record_stride);
    if (trajectories < 1) throw std::invalid_argument("need at least one trajectory");
    FreeFermionRun r = make_run_frame(n, h, dt, eta, steps, record_stride);
    r.trajectories = trajectories;
    const double p = eta * dt;
    const std::size_t nrec = r.steps.size();
    std::vector<double> vals(static_cast<std::size_t>(trajectories) * nrec);
#pragma omp parallel for schedule(dynamic, 4)
    for (int tr = 0; tr < trajectories; ++tr) {
        auto rng = make_stream(seed, static_cast<std::uint64_t>(tr));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Eigen::MatrixXd g = vacuum_correlation(n);
        double* out = vals.data() + static_cast<std::size_t>(tr) * nrec;
        std::size_t rec = 0;
        out[rec++] = sx_from_correlation(g);
        for (int t = 1; t <= steps; ++t) {
            apply_trotter_step(g, n, h, dt);
            for (int j = 0; j < n; ++j)
                if (u(rng) < p) apply_x_flip(g, j);
            if (rec < nrec && r.steps[rec] == t) out[rec++] = sx_from_correlation(g);
        }
    }
    r.sx_noisy.assign(nrec, 0.0);
    r.sx_stderr.assign(nrec, 0.0);
    r.lambda_mes.assign(nrec, 0.0);
    for (std::size_t i = 0; i < nrec; ++i) {
        double s = 0;
        for (int tr = 0; tr < trajectories; ++tr) s += vals[tr * nrec + i];
        const double mean = s / trajectories;
        double v = 0;
        for (int tr = 0; tr < trajectories; ++tr) v += (vals[tr * nrec + i] - mean) * (vals[tr * nrec + i] - mean);
        r.sx_noisy[i] = mean;
        r.sx_stderr[i] = trajectories > 1 ? std::sqrt(v / (trajectories - 1) / trajectories) : 0.0;
        r.lambda_mes[i] = lambda_from_ratio(mean, r.sx_noiseless[i], eta, r.time[i]);
    }
    return r;
}

FreeFermionRun averaged_correlation_run(int n, double h, double dt, double eta, int steps, int record_stride) {
    check_run(n, h, dt, eta, steps, record_stride);
    FreeFermionRun r = make_run_frame(n, h, dt, eta, steps, record_stride);
    const double f = (1.0 - 2.0 * eta * dt) * (1.0 - 2.0 * eta * dt);
    Eigen::MatrixXd g = vacuum_correlation(n);
    std::size_t rec = 0;
    for (int t = 0; t <= steps; ++t) {
        if (t > 0) {
            apply_trotter_step(g, n, h, dt);
            for (Eigen::Index c = 0; c < g.cols(); ++c)
                for (Eigen::Index rr = 0; rr < g.rows(); ++rr)
                    if (rr / 2 != c / 2) g(rr, c) *= f;
        }
        if (rec < r.steps.size() && r.steps[rec] == t) {
            const double v = sx_from_correlation(g);
            r.sx_noisy.push_back(v);
            r.sx_stderr.push_back(0.0);
            r.lambda_mes.push_back(lambda_from_ratio(v, r.sx_noiseless[rec], eta, r.time[rec]));
            ++rec;
        }
    }
    return r;
}

std::vector<std::vector<double>> x_noise_sectors(int n, double h, double dt, int steps, double p, int max_order) {
    check_run(n, h, dt, 0.0, steps, 1);
    if (p < 0 || p > 1) throw std::invalid_argument("flip probability must lie in [0, 1]");
    if (max_order < 0) throw std::invalid_argument("negative sector order");
    std::vector<Eigen::MatrixXd> g(max_order + 1, Eigen::MatrixXd::Zero(2 * n, 2 * n));
    g[0] = vacuum_correlation(n);
    std::vector<std::vector<double>> out(max_order + 1, std::vector<double>(steps + 1, 0.0));
    out[0][0] = 1.0;
    for (int t = 1; t <= steps; ++t) {
        for (auto& m : g) apply_trotter_step(m, n, h, dt);
        cross_site_update(g, 1.0 - 2.0 * p, -2.0 * (1.0 - 2.0 * p));
        for (int k = 0; k <= max_order; ++k) out[k][t] = sx_from_correlation(g[k]);
    }
    return out;
}

SectorEstimate sectorized_sigma_mc(int n, double h, double dt, int steps, int order, long long samples,
                                   std::uint64_t seed) {
    check_run(n, h, dt, 0.0, steps, 1);
    if (order < 1) throw std::invalid_argument("sector order must be >= 1");
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    const long long L = static_cast<long long>(n) * steps;
    if (order > L) throw std::invalid_argument("more insertions than error locations");
    const double scale = binomial(static_cast<int>(L), order);
    std::vector<double> vals(samples);
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < samples; ++i) {
        auto rng = make_stream(seed, static_cast<std::uint64_t>(i));
        std::uniform_int_distribution<long long> pick(0, L - 1);
        std::vector<long long> loc;
        while (static_cast<int>(loc.size()) < order) {
            const long long v = pick(rng);
            if (std::find(loc.begin(), loc.end(), v) == loc.end()) loc.push_back(v);
        }
        std::sort(loc.begin(), loc.end());
        Eigen::MatrixXd g = vacuum_correlation(n);
        std::size_t next = 0;
        for (int t = 1; t <= steps; ++t) {
            apply_trotter_step(g, n, h, dt);
            while (next < loc.size() && loc[next] / n + 1 == t) insertion(g, static_cast<int>(loc[next++] % n));
        }
        vals[i] = scale * sx_from_correlation(g);
    }
    SectorEstimate e;
    e.samples = samples;
    double s = 0;
    for (double v : vals) s += v;
    e.mean = s / samples;
    double var = 0;
    for (double v : vals) var += (v - e.mean) * (v - e.mean);
    e.stderr_ = samples > 1 ? std::sqrt(var / (samples - 1) / samples) : 0.0;
    return e;
}

// ---------------------------------------------------------------- depolarizing transfer matrix

double TransferMatrixModel::sx(const Eigen::VectorXd& x) const {
    double s = 0;
    for (Eigen::Index i = 0; i < x.size(); i += 3) s += x(i);
    return s;
}

TransferMatrixModel build_transfer_matrix(int n, double h) {
    check_chain(n);
    TransferMatrixModel m;
    m.n = n;
    m.h = h;
    for (double k : even_sector_momenta(n))
        if (k > 0) m.momenta.push_back(k);
    const Eigen::Index nk = static_cast<Eigen::Index>(m.momenta.size());
    m.hamiltonian = Eigen::MatrixXd::Zero(3 * nk, 3 * nk);
    m.noise = Eigen::MatrixXd::Zero(3 * nk, 3 * nk);
    m.x0 = Eigen::VectorXd::Zero(3 * nk);
    for (Eigen::Index i = 0; i < nk; ++i) {
        const BlockAngles a = continuum_angles(m.momenta[i], h);
        const double c = a.cos2(), s = a.sin2(), d = a.delta();
        Eigen::Matrix3d blk;
        blk << 0, 0, s, 0, 0, -c, -s, c, 0;
        m.hamiltonian.block<3, 3>(3 * i, 3 * i) = d * blk;
        m.x0(3 * i) = 2.0 / n;
        for (Eigen::Index q = 0; q < nk; ++q) {
            const double pm = phi_hat(m.momenta[i] - m.momenta[q], n);
            const double pp = phi_hat(m.momenta[i] + m.momenta[q], n);
            m.noise(3 * i, 3 * q) = pm + pp;
            m.noise(3 * i + 1, 3 * q + 1) = pm - pp;
            m.noise(3 * i + 2, 3 * q + 2) = pm - pp;
        }
    }
    return m;
}

std::vector<double> transfer_magnetization(const TransferMatrixModel& m, double eta, const std::vector<double>& times) {
    if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0))
        throw std::invalid_argument("times must be sorted and non-negative");
    const Eigen::MatrixXd gen = m.generator(eta);
    std::vector<double> out;
    Eigen::VectorXd x = m.x0;
    double now = 0, last_step = -1;
    Eigen::MatrixXd prop;
    for (double t : times) {
        const double step = t - now;
        if (step > 0) {
            if (std::abs(step - last_step) > 1e-14) {
                prop = (gen * step).exp();
                last_step = step;
            }
            x = prop * x;
            now = t;
        }
        out.push_back(m.sx(x));
    }
    return out;
}

double transfer_decay_rate(const TransferMatrixModel& m, double eta) {
    if (eta <= 0) throw std::invalid_argument("decay rate needs eta > 0");
    Eigen::EigenSolver<Eigen::MatrixXd> es(m.generator(eta));
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::MatrixXcd w = v.inverse();
    const Eigen::VectorXcd coef = w * m.x0.cast<std::complex<double>>();
    Eigen::Index best = 0;
    double best_w = -1;
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
        std::complex<double> read = 0;
        for (Eigen::Index r = 0; r < v.rows(); r += 3) read += v(r, i);
        const double wt = std::abs(read * coef(i));
        if (wt > best_w) {
            best_w = wt;
            best = i;
        }
    }
    return -es.eigenvalues()(best).real() / eta;
}

Eigen::Matrix3d noiseless_block_evolution(double theta, double delta_eps, double s) {
    const double c2 = std::cos(2 * theta), s2 = std::sin(2 * theta), s4 = std::sin(4 * theta);
    const double cs = std::cos(s * delta_eps), sn = std::sin(s * delta_eps);
    const double half = std::sin(0.5 * s * delta_eps);
    Eigen::Matrix3d e;
    e << c2 * c2 + s2 * s2 * cs, s4 * half * half, -s2 * sn,
         s4 * half * half, s2 * s2 + c2 * c2 * cs, c2 * sn,
         s2 * sn, -c2 * sn, cs;
    return e;
}

}  // namespace dl::ff
