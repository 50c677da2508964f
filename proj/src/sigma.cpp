#include "dilution/sigma.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dl {

nlohmann::json SigmaReport::to_json() const {
    nlohmann::json j;
    j["observable"] = observable;
    j["D0"] = D0;
    j["D1"] = D1;
    if (D2) j["D2"] = *D2;
    j["Sigma0"] = Sigma0;
    j["Sigma1"] = Sigma1;
    if (Sigma2) j["Sigma2"] = *Sigma2;
    j["epsilon"] = epsilon;
    j["identity_c"] = identity_c;
    j["N_loc"] = n_loc;
    j["T"] = T;
    j["ratio"] = ratio;
    j["rho"] = rho;
    j["lin"] = lin;
    j["exp"] = exp ? nlohmann::json(*exp) : nlohmann::json(nullptr);
    j["noisy_insertions"] = noisy_insertions;
    j["D0_stderr"] = D0_stderr;
    j["D1_stderr"] = D1_stderr;
    return j;
}

double sigma1_from_sectors(double d0, double d1, double c, long long locations) {
    return d1 - c * static_cast<double>(locations) * d0;
}

double sigma2_from_sectors(double d0, double d1, double d2, double c, long long locations) {
    const double L = static_cast<double>(locations);
    return d2 - c * (L - 1.0) * d1 + c * c * 0.5 * L * (L - 1.0) * d0;
}

const SigmaReport& SigmaSeries::at(const std::string& name, int t) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return reports[i].at(t);
    throw std::out_of_range("unknown observable: " + name);
}

namespace {

SigmaReport make_report(const std::string& name, int t, const NoiseChannel& noise, int n_loc, double d0, double d1,
                        std::optional<double> d2, const SigmaOptions& opt) {
    SigmaReport r;
    r.observable = name;
    r.T = t;
    r.epsilon = noise.epsilon;
    r.identity_c = noise.identity_c;
    r.n_loc = n_loc;
    r.noisy_insertions = opt.noisy_insertions;
    r.D0 = d0;
    r.D1 = d1;
    r.Sigma0 = d0;
    const long long L = r.total_locations();
    r.Sigma1 = sigma1_from_sectors(d0, d1, noise.identity_c, L);
    if (d2) {
        r.D2 = d2;
        r.Sigma2 = sigma2_from_sectors(d0, d1, *d2, noise.identity_c, L);
    }
    r.ratio = d0 != 0.0 ? r.Sigma1 / d0 : 0.0;
    r.rho = (d0 != 0.0 && L > 0) ? -r.Sigma1 / (d0 * static_cast<double>(L)) : 0.0;
    r.lin = mitigate_LIN(d0, r.Sigma1, noise.epsilon);
    r.exp = mitigate_EXP(d0, r.Sigma1, noise.epsilon, opt.observable_scale, opt.exp_tolerance);
    return r;
}

}  // namespace

SigmaSeries measure_sigma_series(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int steps,
                                 const ObservableSet& obs, const SigmaOptions& opt) {
    if (steps < 0) throw std::invalid_argument("negative step count");
    if (noise.terms.empty()) throw std::invalid_argument("sigma expansion needs a channel with Kraus terms");
    const NoiseChannel run_noise = opt.noisy_insertions ? noise : noise.with_epsilon(0.0);
    DensityEngine eng(c, run_noise);
    const int n_loc = eng.locations_per_step();
    if (opt.with_d2) {
        const long long L = static_cast<long long>(n_loc) * steps;
        if (L > opt.d2_budget)
            throw std::length_error("D2 budget exceeded: N_loc*T = " + std::to_string(L) + " > " +
                                    std::to_string(opt.d2_budget));
    }

    const int n = c.num_qubits();
    DenseOperator r0 = product_density(n, init);
    DenseOperator r1(n), r2;
    if (opt.with_d2) r2 = DenseOperator(n);

    SigmaSeries out;
    out.names = obs.names();
    out.reports.assign(out.names.size(), {});
    // reports carry the nominal epsilon even for noiseless insertions
    auto record = [&](int t) {
        auto v0 = obs.evaluate(r0);
        auto v1 = t > 0 ? obs.evaluate(r1) : std::vector<double>(v0.size(), 0.0);
        std::vector<double> v2;
        if (opt.with_d2) v2 = t > 0 ? obs.evaluate(r2) : std::vector<double>(v0.size(), 0.0);
        for (std::size_t o = 0; o < v0.size(); ++o)
            out.reports[o].push_back(make_report(out.names[o], t, noise, n_loc, v0[o], v1[o],
                                                 opt.with_d2 ? std::optional<double>(v2[o]) : std::nullopt, opt));
    };
    record(0);
    bool r1_live = false;
    for (int t = 1; t <= steps; ++t) {
        for (const auto& op : eng.step_ops(t)) {
            if (opt.with_d2) {
                DensityEngine::apply(op, r2);
                DensityEngine::apply(op, r1);
                DensityEngine::apply(op, r0);
                // pairs of distinct locations, each once: r2 sees r1 before location j is added to it
                for (int l = 0; l < op.num_locations(); ++l) {
                    DensityEngine::accumulate_insertion(op, l, r1, r2);
                    DensityEngine::accumulate_insertion(op, l, r0, r1);
                }
            } else {
                if (r1_live) DensityEngine::apply(op, r1);
                DensityEngine::apply(op, r0);
                DensityEngine::accumulate_insertions(op, r0, r1);
                r1_live = r1_live || op.num_locations() > 0;
            }
        }
        record(t);
    }
    return out;
}

double measure_D1(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int T,
                  const ObservableSpec& o, bool noisy_insertions) {
    SigmaOptions opt;
    opt.noisy_insertions = noisy_insertions;
    ObservableSet obs(c.num_qubits(), {o});
    return measure_sigma_series(c, noise, init, T, obs, opt).reports[0].at(T).D1;
}

double measure_D2(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int T,
                  const ObservableSpec& o, long long budget, bool noisy_insertions) {
    SigmaOptions opt;
    opt.noisy_insertions = noisy_insertions;
    opt.with_d2 = true;
    opt.d2_budget = budget;
    ObservableSet obs(c.num_qubits(), {o});
    return *measure_sigma_series(c, noise, init, T, obs, opt).reports[0].at(T).D2;
}

double mitigate_LIN(double d0_noisy, double sigma1_noisy, double epsilon) {
    return d0_noisy - epsilon * sigma1_noisy;
}

std::optional<double> mitigate_EXP(double d0_noisy, double sigma1_noisy, double epsilon, double scale,
                                   double tolerance) {
    if (sigma1_noisy == 0.0 || epsilon == 0.0) return d0_noisy;
    if (std::abs(d0_noisy) < tolerance * scale) return std::nullopt;
    return d0_noisy * std::exp(-epsilon * sigma1_noisy / d0_noisy);
}

ShotAllocation variance_and_shots(const VarianceInputs& in, MitigationMethod m) {
    if (in.sigma0 <= 0.0 || in.sigma1 <= 0.0) throw std::invalid_argument("sigma0 and sigma1 must be positive");
    const double ne = in.n_gate * in.epsilon;
    if (ne <= 0.0) throw std::invalid_argument("N_gate * epsilon must be positive");
    if (in.s0 <= 0.0 || in.s1 <= 0.0) throw std::invalid_argument("shot counts must be positive");
    ShotAllocation a;
    const double b1 = in.sigma1 * in.sigma1 / in.s1 * ne * ne;
    if (m == MitigationMethod::Lin) {
        const double f = 1.0 + ne;
        a.variance = in.sigma0 * in.sigma0 / in.s0 * f * f + b1;
        a.beta = in.sigma0 / in.sigma1 * f / ne;
    } else {
        const double f = 1.0 + in.epsilon * in.d1_over_d0;
        a.variance = (in.sigma0 * in.sigma0 / in.s0 * f * f + b1) * std::exp(-2.0 * in.epsilon * in.sigma1_over_d0);
        a.beta = in.sigma0 / in.sigma1 * std::abs(f) / ne;
    }
    return a;
}

InsertionSampler::InsertionSampler(int T, int locations, std::vector<double> weights)
    : T_(T), locations_(locations), bits_(0), weights_(std::move(weights)) {
    if (T < 1) throw std::invalid_argument("T must be >= 1");
    if (locations < 1) throw std::invalid_argument("need at least one error location");
    if (weights_.empty()) throw std::invalid_argument("need at least one Kraus term");
    while ((1LL << bits_) < T) ++bits_;
    wsum_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (wsum_ <= 0.0) throw std::invalid_argument("Kraus weights must sum to a positive value");
}

std::optional<ErrorInsertion> InsertionSampler::draw(std::mt19937_64& rng) const {
    std::uint64_t word = 0;
    if (bits_ > 0) word = rng() >> (64 - bits_);
    std::uniform_int_distribution<int> loc(0, locations_ - 1);
    std::discrete_distribution<int> term(weights_.begin(), weights_.end());
    // location and term are drawn even for rejected shots so the stream layout is fixed
    const int l = loc(rng);
    const int u = term(rng);
    if (word >= static_cast<std::uint64_t>(T_)) return std::nullopt;
    return ErrorInsertion{static_cast<int>(word) + 1, l, u, weights_[u]};
}

double InsertionSampler::rejection_probability() const {
    return 1.0 - static_cast<double>(T_) / static_cast<double>(1LL << bits_);
}

double InsertionSampler::scale() const { return static_cast<double>(locations_) * T_ * wsum_; }

InsertionSampler randomized_insertion_schedule(int T, const NoiseChannel& noise, const TrotterCircuit& c) {
    std::vector<double> w;
    for (const auto& k : noise.terms) w.push_back(k.weight);
    return InsertionSampler(T, noise.locations_per_step(c), std::move(w));
}

RandomizedD1 estimate_D1_randomized(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int T,
                                    const ObservableSet& obs, long long draws, std::uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("need at least one draw");
    const InsertionSampler sampler = randomized_insertion_schedule(T, noise, c);
    const std::size_t no = obs.specs().size();
    std::vector<std::vector<double>> val(draws);
    std::vector<char> ok(draws, 0);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < draws; ++i) {
        auto rng = make_stream(seed, static_cast<std::uint64_t>(i));
        auto ins = sampler.draw(rng);
        if (!ins) continue;
        ok[i] = 1;
        ForcedInsertion f{ins->step, ins->location, ins->term};
        auto series = run_single_trajectory(c, noise, init, T, obs, rng, nullptr, f);
        val[i] = std::move(series.at(T));
    }
    RandomizedD1 r;
    r.mean.assign(no, 0.0);
    r.stderr_.assign(no, 0.0);
    for (long long i = 0; i < draws; ++i) (ok[i] ? r.accepted : r.rejected)++;
    if (r.accepted == 0) return r;
    const double s = sampler.scale();
    for (std::size_t o = 0; o < no; ++o) {
        double sum = 0;
        for (long long i = 0; i < draws; ++i)
            if (ok[i]) sum += val[i][o] * s;
        const double mean = sum / r.accepted;
        double v = 0;
        for (long long i = 0; i < draws; ++i)
            if (ok[i]) v += (val[i][o] * s - mean) * (val[i][o] * s - mean);
        r.mean[o] = mean;
        r.stderr_[o] = r.accepted > 1 ? std::sqrt(v / (r.accepted - 1) / r.accepted) : 0.0;
    }
    return r;
}

}  // namespace dl
