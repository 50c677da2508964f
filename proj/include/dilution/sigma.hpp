#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "dilution/model.hpp"
#include "dilution/sim_engines.hpp"

namespace dl {

// One Kraus term inserted by hand at (step, location).
struct ErrorInsertion {
    int step = 1;      // 1..T
    int location = 0;  // site, or edge index in application order
    int term = 0;
    double weight = 1.0;
};

struct SigmaReport {
    std::string observable;
    int T = 0;
    double epsilon = 0.0;
    double identity_c = 1.0;
    int n_loc = 0;  // error locations per step
    bool noisy_insertions = true;
    double D0 = 0.0, D1 = 0.0;
    std::optional<double> D2;
    double Sigma0 = 0.0, Sigma1 = 0.0;
    std::optional<double> Sigma2;
    double D0_stderr = 0.0, D1_stderr = 0.0;
    double ratio = 0.0;  // Sigma1 / Sigma0
    double rho = 0.0;    // -Sigma1 / (Sigma0 * N_loc * T)
    double lin = 0.0;
    std::optional<double> exp;

    long long total_locations() const { return static_cast<long long>(n_loc) * T; }
    nlohmann::json to_json() const;
};

// Sigma_1 = D1 - c L D0, Sigma_2 = D2 - c (L-1) D1 + c^2 C(L,2) D0, with L = N_loc T.
double sigma1_from_sectors(double d0, double d1, double c, long long locations);
double sigma2_from_sectors(double d0, double d1, double d2, double c, long long locations);

struct SigmaOptions {
    bool noisy_insertions = true;  // insert into the noisy circuit (what mitigation needs)
    bool with_d2 = false;
    long long d2_budget = 0;       // max N_loc*T allowed for D2; 0 forbids it
    double exp_tolerance = 1e-6;
    double observable_scale = 1.0;
};

// reports[obs][t] for t = 0..steps, all from one exact density-matrix sweep.
struct SigmaSeries {
    std::vector<std::string> names;
    std::vector<std::vector<SigmaReport>> reports;
    const SigmaReport& at(const std::string& name, int t) const;
};

// Exact D0, D1 (and D2) by propagating the error-count sectors alongside the state.
SigmaSeries measure_sigma_series(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int steps,
                                 const ObservableSet& obs, const SigmaOptions& opt = {});
double measure_D1(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int T,
                  const ObservableSpec& o, bool noisy_insertions = true);
double measure_D2(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int T,
                  const ObservableSpec& o, long long budget, bool noisy_insertions = true);

double mitigate_LIN(double d0_noisy, double sigma1_noisy, double epsilon);
// nullopt when |D0| < tolerance * scale
std::optional<double> mitigate_EXP(double d0_noisy, double sigma1_noisy, double epsilon, double scale = 1.0,
                                   double tolerance = 1e-6);

enum class MitigationMethod { Lin, Exp };

struct VarianceInputs {
    double sigma0 = 1.0;  // std of a D0 shot
    double sigma1 = 1.0;  // std of a D1/N_gate shot
    double epsilon = 0.0;
    double n_gate = 0.0;  // error locations in the whole circuit
    double s0 = 1.0, s1 = 1.0;
    double d1_over_d0 = 0.0;      // EXP only
    double sigma1_over_d0 = 0.0;  // EXP only
};

struct ShotAllocation {
    double variance = 0.0;
    double beta = 0.0;  // optimal S0/S1
};

ShotAllocation variance_and_shots(const VarianceInputs& in, MitigationMethod m);

// Draws (s, location, term) for randomized D1 estimation. s is drawn as a
// ceil(log2 T)-bit word; words >= T are rejected.
class InsertionSampler {
public:
    InsertionSampler(int T, int locations, std::vector<double> weights);
    std::optional<ErrorInsertion> draw(std::mt19937_64& rng) const;
    double rejection_probability() const;
    // N_loc * T * sum(w): multiplies one accepted shot into a D1 estimate
    double scale() const;
    int bits() const { return bits_; }

private:
    int T_, locations_, bits_;
    std::vector<double> weights_;
    double wsum_;
};

InsertionSampler randomized_insertion_schedule(int T, const NoiseChannel& noise, const TrotterCircuit& c);

struct RandomizedD1 {
    std::vector<double> mean;    // per observable
    std::vector<double> stderr_;
    long long accepted = 0;
    long long rejected = 0;
};

// Trajectory estimate of D1 at step T (noisy insertions), `draws` shots including rejected ones.
RandomizedD1 estimate_D1_randomized(const TrotterCircuit& c, const NoiseChannel& noise, InitialState init, int T,
                                    const ObservableSet& obs, long long draws, std::uint64_t seed);

}  // namespace dl
