#include "dilution/cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "dilution/free_fermion.hpp"
#include "dilution/sigma.hpp"
#include "dilution/sim_engines.hpp"
#include "dilution/string_analysis.hpp"

namespace dl::cli {

namespace fs = std::filesystem;

const std::vector<ExperimentInfo>& experiment_catalog() {
    static const std::vector<ExperimentInfo> list = {
        {"quench", "noiseless vs noisy S_x^(k) / parity quench, decay rates and Delta O(t)",
         "quench.csv, metrics.csv (decay rates, Delta O), gate_order.csv"},
        {"sigma", "exact D0, D1, D2 and Sigma_1, Sigma_2 sectors with LIN / EXP estimates", "sigma.csv"},
        {"mitigate", "LIN and EXP mitigation against exact values for several error rates",
         "mitigate.csv"},
        {"string-length", "string length histograms, L(t), L_rel(s;t), L_abs(s;t), STE residual, compare panels",
         "histogram_*, length_time_*, relevant_*, ste_*, compare_*.csv"},
        {"validity-sweep", "Delta O(t) and L_rel(s;t) for standard, time-dependent, central connectivity, "
                           "Y initial state and large Trotter step variants",
         "delta_o_<variant>.csv, lengths_<variant>.csv"},
        {"free-fermion", "1D chain Gaussian trajectories, lambda_mes vs analytic rates, EXP/LIN on free fermions, "
                         "depolarizing transfer matrix",
         "ff_N*_h*_eta*.csv, ff_mitigation_*.csv, depolarizing.csv"},
        {"correspondence", "Trotter-error / noise correlator <+|K_q(s) O(t*) K_p(t)|+> grids",
         "correlator_time.csv, correlator_bond.csv"},
        {"toy-model", "string-length toy model p_k and random-sign interference model", "toy_pk.csv, toy_interference.csv"},
    };
    return list;
}

namespace {

// ---------------------------------------------------------------- params

std::vector<std::pair<int, int>> read_sizes(ObjectReader& r, const std::string& key,
                                            std::vector<std::pair<int, int>> fallback) {
    json v = r.raw(key);
    if (v.is_null()) return fallback;
    std::vector<std::pair<int, int>> out;
    bool ok = v.is_array() && !v.empty();
    if (ok)
        for (auto& e : v) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
                ok = false;
                break;
            }
            const int rows = e[0].get<int>(), cols = e[1].get<int>();
            if (rows < 1 || cols < 1 || rows * cols > 62 || (cols == 1 && rows < 3) || (cols > 1 && rows < 2)) {
                r.error(key, "size [" + std::to_string(rows) + ", " + std::to_string(cols) + "] is not buildable");
                return fallback;
            }
            out.emplace_back(rows, cols);
        }
    if (!ok) {
        r.error(key, "expected a non-empty array of [rows, cols] pairs");
        return fallback;
    }
    return out;
}

json sizes_json(const std::vector<std::pair<int, int>>& s) {
    json a = json::array();
    for (auto [r, c] : s) a.push_back({r, c});
    return a;
}

json observables_param(ObjectReader& r, const json& config, int n) {
    json v = r.raw("observables");
    if (v.is_null()) return json::array({config.at("observable")});
    if (!v.is_array() || v.empty()) {
        r.error("observables", "expected a non-empty array of observable objects");
        return json::array({config.at("observable")});
    }
    json out = json::array();
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(normalize_observable(v[i], n, r.errors(), r.path() + ".observables[" + std::to_string(i) + "]"));
    return out;
}

const std::vector<std::string> kVariants = {"standard", "time-dependent", "central-connectivity", "y-initial-state",
                                            "large-trotter-step"};

json normalize_params(const std::string& id, const json& raw, const json& config, std::vector<std::string>& errors,
                      const std::optional<std::string>& mitigate_override) {
    ObjectReader r(raw, "params", errors);
    json p = json::object();
    const int n = config.at("lattice").at("rows").get<int>() * config.at("lattice").at("cols").get<int>();
    const int steps = config.at("steps").get<int>();
    auto mitigate = [&] {
        std::string m = r.choice("mitigate", "both", {"lin", "exp", "both"});
        if (mitigate_override) m = *mitigate_override;
        p["mitigate"] = m;
    };

    if (id == "quench") {
        p["engine"] = r.choice("engine", "auto", {"auto", "statevector", "density", "trajectories"});
        const long long tr = r.integer("trajectories", 1000);
        if (tr < 1) r.error("trajectories", "must be >= 1");
        p["trajectories"] = tr;
        p["observables"] = observables_param(r, config, n);
        auto win = r.integer_list("decay_window", {std::max(1, steps / 3), std::max(1, steps)});
        if (win.size() != 2 || win[0] < 1 || win[1] < win[0]) r.error("decay_window", "expected [lo, hi] with 1 <= lo <= hi");
        p["decay_window"] = win;
    } else if (id == "sigma") {
        p["observables"] = observables_param(r, config, n);
        p["with_d2"] = r.boolean("with_d2", false);
        p["noisy_insertions"] = r.boolean("noisy_insertions", true);
        mitigate();
    } else if (id == "mitigate") {
        p["observables"] = observables_param(r, config, n);
        const bool h1 = config.at("noise").at("preset") == "h1_1_two_qubit";
        std::vector<double> fallback;
        if (!h1) fallback = {config.at("noise").at("epsilon").get<double>()};
        auto eps = r.number_list("epsilons", fallback);
        if (h1 && r.has("epsilons")) r.error("epsilons", "not available with the h1_1_two_qubit preset");
        for (double e : eps)
            if (e < 0.0 || e > 1.0) r.error("epsilons", "entries must lie in [0, 1]");
        p["epsilons"] = eps;
        mitigate();
    } else if (id == "string-length") {
        const auto& lat = config.at("lattice");
        p["sizes"] = sizes_json(read_sizes(r, "sizes", {{lat.at("rows").get<int>(), lat.at("cols").get<int>()}}));
        const long long t = r.integer("t", steps);
        if (t < 1) r.error("t", "must be >= 1");
        p["t"] = t;
        const long long stride = r.integer("stride", 1);
        if (stride < 1) r.error("stride", "must be >= 1");
        p["stride"] = stride;
        p["panels"] = r.string_list("panels", {"histogram", "length_time", "relevant"},
                                    {"histogram", "length_time", "relevant", "ste", "compare"});
        if (auto site = r.optional_integer("perturbation_site")) {
            if (*site < 0) r.error("perturbation_site", "must be >= 0");
            p["perturbation_site"] = *site;
        }
        auto ct = r.integer_list("compare_times", {10, 20, 30});
        for (auto c : ct)
            if (c < 1) r.error("compare_times", "entries must be >= 1");
        p["compare_times"] = ct;
    } else if (id == "validity-sweep") {
        p["variants"] = r.string_list("variants", kVariants, kVariants);
        p["sizes"] = sizes_json(read_sizes(r, "sizes", {{2, 3}, {2, 4}, {2, 5}, {3, 4}}));
        p["engine"] = r.choice("engine", "density", {"density", "trajectories"});
        const long long tr = r.integer("trajectories", 1000);
        if (tr < 1) r.error("trajectories", "must be >= 1");
        p["trajectories"] = tr;
        p["lengths"] = r.boolean("lengths", false);
        const long long stride = r.integer("length_stride", 5);
        if (stride < 1) r.error("length_stride", "must be >= 1");
        p["length_stride"] = stride;
        const double ldt = r.number("large_dt", 1.0);
        if (!(ldt > 0.0)) r.error("large_dt", "must be > 0");
        p["large_dt"] = ldt;
    } else if (id == "free-fermion") {
        auto sizes = r.integer_list("sizes", {100});
        for (auto s : sizes)
            if (s < 4 || s % 2 || s > 4096) r.error("sizes", "chain lengths must be even and in [4, 4096]");
        p["sizes"] = sizes;
        auto fields = r.number_list("fields", {1.5});
        for (double h : fields)
            if (h < 0.0) r.error("fields", "entries must be >= 0");
        p["fields"] = fields;
        auto etas = r.number_list("etas", {0.1});
        for (double e : etas)
            if (e < 0.0) r.error("etas", "entries must be >= 0");
        p["etas"] = etas;
        const double dt = r.number("dt", 0.05);
        if (!(dt > 0.0)) r.error("dt", "must be > 0");
        p["dt"] = dt;
        const double tau = r.number("tau", 30.0);
        if (!(tau > 0.0)) r.error("tau", "must be > 0");
        p["tau"] = tau;
        for (double e : etas)
            if (e * dt > 0.5) r.error("etas", "eta * dt must be <= 1/2");
        const long long tr = r.integer("trajectories", 1000);
        if (tr < 0) r.error("trajectories", "must be >= 0 (0 = exact average)");
        p["trajectories"] = tr;
        const long long stride = r.integer("stride", 1);
        if (stride < 1) r.error("stride", "must be >= 1");
        p["stride"] = stride;
        auto win = r.number_list("lambda_window", {tau / 3.0, tau});
        if (win.size() != 2 || win[0] > win[1]) r.error("lambda_window", "expected [lo, hi]");
        p["lambda_window"] = win;
        p["mitigation"] = r.boolean("mitigation", false);
        p["depolarizing"] = r.boolean("depolarizing", false);
    } else if (id == "correspondence") {
        const long long t_star = r.integer("t_star", 30);
        if (t_star < 1) r.error("t_star", "must be >= 1");
        p["t_star"] = t_star;
        const long long s0 = r.integer("s0", t_star / 2);
        if (s0 < 0 || s0 > t_star) r.error("s0", "must lie in [0, t_star]");
        p["s0"] = s0;
        const long long site = r.integer("site", n / 2);
        if (site < 0 || site >= n) r.error("site", "outside the lattice");
        p["site"] = site;
        auto ks = r.integer_list("kraus_sites", {0, 1});
        if (ks.size() != 2 || ks[0] == ks[1] || ks[0] < 0 || ks[1] < 0 || ks[0] >= n || ks[1] >= n)
            r.error("kraus_sites", "expected two distinct sites of the lattice");
        p["kraus_sites"] = ks;
        const long long stride = r.integer("stride", 1);
        if (stride < 1) r.error("stride", "must be >= 1");
        p["stride"] = stride;
        p["diagonal_band"] = r.integer("diagonal_band", 5);
    } else if (id == "toy-model") {
        auto sizes = r.integer_list("sizes", {16, 20});
        for (auto s : sizes)
            if (s < 2 || s > 60) r.error("sizes", "entries must lie in [2, 60]");
        p["sizes"] = sizes;
        const long long samples = r.integer("samples", 2000);
        if (samples < 1) r.error("samples", "must be >= 1");
        p["samples"] = samples;
        p["regimes"] = r.string_list("regimes", {"inverse_n", "scrambled"}, {"inverse_n", "scrambled"});
    }
    r.finish();
    return p;
}

// ---------------------------------------------------------------- output

std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }
std::string tag(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

class Writer {
public:
    Writer(std::string dir, std::string hash, std::string experiment)
        : dir_(std::move(dir)), hash_(std::move(hash)), experiment_(std::move(experiment)) {
        fs::create_directories(dir_);
    }
    // body must start with the column header line
    void csv(const std::string& name, const std::string& body) {
        write(name, "# config_hash=" + hash_ + "\n# experiment=" + experiment_ + "\n" + body);
    }
    void write(const std::string& name, const std::string& content) {
        std::ofstream f(fs::path(dir_) / name, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir_) / name).string());
        f << content;
        files_.push_back(name);
    }
    const std::vector<std::string>& files() const { return files_; }

private:
    std::string dir_, hash_, experiment_;
    std::vector<std::string> files_;
};

// Strips the header comment that QuenchResult-style writers add.
std::string strip_comment(const std::string& s) {
    std::size_t pos = 0;
    while (pos < s.size() && s[pos] == '#') pos = s.find('\n', pos) + 1;
    return s.substr(pos);
}

void log(const std::string& id, const std::string& msg) { std::clog << "[" << id << "] " << msg << std::endl; }

// ---------------------------------------------------------------- budgets

void require_density(int n, const std::string& what) {
    if (n > kMaxDensityQubits)
        throw BudgetError(what + " needs N <= " + std::to_string(kMaxDensityQubits) +
                          " (dense density matrices), got N = " + std::to_string(n) +
                          "; statevector and trajectory engines allow N <= " + std::to_string(kMaxStatevectorQubits));
}
void require_statevector(int n, const std::string& what) {
    if (n > kMaxStatevectorQubits)
        throw BudgetError(what + " needs N <= " + std::to_string(kMaxStatevectorQubits) +
                          " (statevectors), got N = " + std::to_string(n) + "; density matrices allow N <= " +
                          std::to_string(kMaxDensityQubits));
}

struct Context {
    const json& manifest;
    const json& config;
    const json& params;
    BuiltConfig built;
    Writer& out;
    json results = json::object();
    std::string id;
};

std::vector<ObservableSpec> observables(const Context& ctx) {
    std::vector<ObservableSpec> specs;
    for (auto& o : ctx.params.at("observables")) specs.push_back(build_observable(o, ctx.built.num_qubits()));
    return specs;
}


json opt_json(const std::optional<double>& v) { return v && std::isfinite(*v) ? json(*v) : json(nullptr); }

BuiltConfig with_lattice(const json& config, int rows, int cols) {
    json c = config;
    c["lattice"]["rows"] = rows;
    c["lattice"]["cols"] = cols;
    c["lattice"].erase("wheel_hub");
    if (config.at("observable").at("kind") == "sxk") c["observable"]["k"] = std::min(c["observable"]["k"].get<int>(), rows * cols);
    if (config.at("observable").at("kind") == "site") c["observable"]["site"] = std::min(c["observable"]["site"].get<int>(), rows * cols - 1);
    if (config.at("lattice").contains("wheel_hub")) c["lattice"]["wheel_hub"] = 0;
    return build_config(c);
}

// ---------------------------------------------------------------- quench

void run_quench(Context& ctx) {
    auto& b = ctx.built;
    const int n = b.num_qubits();
    std::string engine = ctx.params.at("engine");
    if (engine == "auto") engine = n <= kMaxDensityQubits ? "density" : "trajectories";
    require_statevector(n, "quench");
    if (engine == "density") require_density(n, "quench with the density-matrix engine");

    ObservableSet obs(n, observables(ctx));
    log(ctx.id, "noiseless statevector run, N = " + std::to_string(n));
    QuenchResult clean = run_statevector(b.circuit, b.init, b.steps, obs);
    QuenchResult noisy;
    log(ctx.id, "noisy " + engine + " run");
    if (engine == "statevector") {
        if (!b.noise.is_trivial()) throw BudgetError("the statevector engine is noiseless; use density or trajectories");
        noisy = clean;
    } else if (engine == "density") {
        noisy = run_density_matrix(b.circuit, b.noise, b.init, b.steps, obs);
    } else {
        TrajectoryBatch batch;
        batch.num_trajectories = ctx.params.at("trajectories").get<int>();
        batch.seed = b.seed;
        noisy = evolve_trajectories(b.circuit, b.noise, b.init, b.steps, obs, batch);
    }

    std::ostringstream q;
    q << "step,observable,value,stderr,engine\n";
    for (auto* r : {&clean, &noisy})
        for (std::size_t o = 0; o < r->names.size(); ++o)
            for (std::size_t i = 0; i < r->steps.size(); ++i)
                q << r->steps[i] << ',' << r->names[o] << ',' << num(r->value[o][i]) << ','
                  << num(r->stderr_.empty() ? 0.0 : r->stderr_[o][i]) << ',' << (r == &clean ? "statevector" : engine)
                  << '\n';
    ctx.out.csv("quench.csv", q.str());

    const double eps = b.noise.epsilon;
    const int lo = ctx.params.at("decay_window")[0], hi = ctx.params.at("decay_window")[1];
    std::ostringstream m;
    m << "step,observable,noiseless,noisy,decay_rate,cumulated_decay_rate,delta_o\n";
    json per = json::object();
    for (std::size_t o = 0; o < clean.names.size(); ++o) {
        auto& c = clean.value[o];
        auto& v = noisy.value[o];
        auto rate = decay_rate(v, c, clean.steps);
        // cumulated values: sum_{s <= t} <O(s)>
        std::vector<double> cc(c.size()), cv(v.size());
        std::partial_sum(c.begin(), c.end(), cc.begin());
        std::partial_sum(v.begin(), v.end(), cv.begin());
        auto cum = decay_rate(cv, cc, clean.steps);
        std::vector<std::optional<double>> delta(c.size());
        if (eps > 0.0) delta = normalized_difference(v, c, clean.steps, eps, b.delta_t);
        double rsum = 0;
        int rcount = 0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            m << clean.steps[i] << ',' << clean.names[o] << ',' << num(c[i]) << ',' << num(v[i]) << ',' << num(rate[i])
              << ',' << num(cum[i]) << ',' << num(delta[i]) << '\n';
            if (clean.steps[i] >= lo && clean.steps[i] <= hi && rate[i]) {
                rsum += *rate[i];
                ++rcount;
            }
        }
        per[clean.names[o]] = {{"final_noiseless", c.back()},
                               {"final_noisy", v.back()},
                               {"mean_decay_rate", rcount ? json(rsum / rcount) : json(nullptr)},
                               {"final_delta_o", opt_json(delta.back())}};
    }
    ctx.out.csv("metrics.csv", m.str());

    std::ostringstream e;
    e << "order,group,i,j\n";
    int k = 0;
    const auto& g = b.circuit.graph;
    if (g.edge_colors.empty()) {
        for (auto [i, j] : g.edges) e << k++ << ",0," << i << ',' << j << '\n';
    } else {
        for (std::size_t grp = 0; grp < g.edge_colors.size(); ++grp)
            for (int idx : g.edge_colors[grp]) e << k++ << ',' << grp << ',' << g.edges[idx].first << ',' << g.edges[idx].second << '\n';
    }
    ctx.out.csv("gate_order.csv", e.str());
    ctx.results = {{"engine", engine}, {"num_qubits", n}, {"epsilon", eps}, {"observables", per}};
}

// ---------------------------------------------------------------- sigma / mitigate

void run_sigma(Context& ctx) {
    auto& b = ctx.built;
    const int n = b.num_qubits();
    require_density(n, "sigma");
    ObservableSet obs(n, observables(ctx));
    SigmaOptions opt;
    opt.noisy_insertions = ctx.params.at("noisy_insertions");
    opt.with_d2 = ctx.params.at("with_d2");
    opt.d2_budget = opt.with_d2 ? static_cast<long long>(b.noise.locations_per_step(b.circuit)) * b.steps : 0;
    log(ctx.id, "density-matrix sector sweep, N = " + std::to_string(n));
    auto series = measure_sigma_series(b.circuit, b.noise, b.init, b.steps, obs, opt);
    const std::string mit = ctx.params.at("mitigate");
    const bool lin = mit != "exp", ex = mit != "lin";

    std::ostringstream s;
    s << "t,observable,D0,D1,D2,Sigma0,Sigma1,Sigma2,ratio,rho";
    if (lin) s << ",lin";
    if (ex) s << ",exp";
    s << '\n';
    json finals = json::object();
    for (std::size_t o = 0; o < series.names.size(); ++o) {
        for (auto& r : series.reports[o]) {
            s << r.T << ',' << series.names[o] << ',' << num(r.D0) << ',' << num(r.D1) << ',' << num(r.D2) << ','
              << num(r.Sigma0) << ',' << num(r.Sigma1) << ',' << num(r.Sigma2) << ',' << num(r.ratio) << ','
              << num(r.rho);
            if (lin) s << ',' << num(r.lin);
            if (ex) s << ',' << num(r.exp);
            s << '\n';
        }
        json j = series.reports[o].back().to_json();
        if (!lin) j.erase("lin");
        if (!ex) j.erase("exp");
        finals[series.names[o]] = j;
    }
    ctx.out.csv("sigma.csv", s.str());
    ctx.results = {{"final", finals}, {"mitigate", mit}};
}

void run_mitigate(Context& ctx) {
    auto& b = ctx.built;
    const int n = b.num_qubits();
    require_density(n, "mitigate");
    ObservableSet obs(n, observables(ctx));
    auto exact = run_statevector(b.circuit, b.init, b.steps, obs);
    const std::string mit = ctx.params.at("mitigate");
    const bool lin = mit != "exp", ex = mit != "lin";
    std::ostringstream s;
    s << "epsilon,t,observable,mean_errors,exact,noisy";
    if (lin) s << ",lin";
    if (ex) s << ",exp";
    s << '\n';
    json per = json::array();
    for (double eps : ctx.params.at("epsilons")) {
        NoiseChannel noise = b.noise.with_epsilon(eps);
        log(ctx.id, "epsilon = " + tag(eps));
        auto series = measure_sigma_series(b.circuit, noise, b.init, b.steps, obs, {});
        for (std::size_t o = 0; o < series.names.size(); ++o) {
            double err_noisy = 0, err_lin = 0, err_exp = 0;
            for (auto& r : series.reports[o]) {
                const double x = exact.value[o][r.T];
                s << num(eps) << ',' << r.T << ',' << series.names[o] << ','
                  << num(eps * static_cast<double>(r.total_locations())) << ',' << num(x) << ',' << num(r.D0);
                if (lin) s << ',' << num(r.lin);
                if (ex) s << ',' << num(r.exp);
                s << '\n';
                err_noisy = std::max(err_noisy, std::abs(r.D0 - x));
                err_lin = std::max(err_lin, std::abs(r.lin - x));
                if (r.exp) err_exp = std::max(err_exp, std::abs(*r.exp - x));
            }
            json j = {{"epsilon", eps}, {"observable", series.names[o]}, {"max_abs_error_noisy", err_noisy}};
            if (lin) j["max_abs_error_lin"] = err_lin;
            if (ex) j["max_abs_error_exp"] = err_exp;
            per.push_back(j);
        }
    }
    ctx.out.csv("mitigate.csv", s.str());
    ctx.results = {{"runs", per}, {"mitigate", mit}};
}

// ---------------------------------------------------------------- string length

void run_string_length(Context& ctx) {
    const int t = ctx.params.at("t");
    const int stride = ctx.params.at("stride");
    std::vector<std::string> panels = ctx.params.at("panels");
    auto want = [&](const std::string& p) { return std::find(panels.begin(), panels.end(), p) != panels.end(); };
    json per = json::object();
    for (auto& sz : ctx.params.at("sizes")) {
        BuiltConfig b = with_lattice(ctx.config, sz[0], sz[1]);
        const int n = b.num_qubits();
        require_density(n, "string-length");
        b.circuit.num_steps = t;
        const PauliOperator o = b.observable.to_pauli(n);
        const PauliKind basis = relevant_basis(b.init);
        const std::string sfx = "_N" + std::to_string(n) + ".csv";
        json res = {{"rows", sz[0]}, {"cols", sz[1]}};
        log(ctx.id, "N = " + std::to_string(n));

        if (want("histogram") || want("length_time")) {
            LengthHistogram hist;
            auto lt = length_vs_time(o, b.circuit, basis, t, &hist);
            if (want("histogram")) ctx.out.csv("histogram" + sfx, hist.to_csv());
            if (want("length_time")) {
                std::ostringstream s;
                s << "t,L,L_rel,L_dil\n";
                for (auto& p : lt) s << p.t << ',' << num(p.L) << ',' << num(p.L_rel) << ',' << num(p.L_dil) << '\n';
                ctx.out.csv("length_time" + sfx, s.str());
                res["L_final"] = lt.back().L;
                res["L_rel_final"] = lt.back().L_rel;
                res["L_dil_final"] = lt.back().L_dil;
            }
        }
        if (want("relevant")) {
            SweepOptions opt;
            opt.stride = stride;
            if (ctx.params.contains("perturbation_site")) {
                const int site = ctx.params.at("perturbation_site");
                if (site >= n) throw BudgetError("perturbation_site outside the N = " + std::to_string(n) + " lattice");
                opt.perturbation = PerturbationSpec{{0.25, 0.25, 0.25}, {site}};
            }
            auto sweep = relevant_length_sweep(o, b.circuit, b.init, t, opt);
            ctx.out.csv("relevant" + sfx, sweep.to_csv());
            double lrel_max = 0, late = 0;
            int late_count = 0;
            std::optional<double> labs_mid;
            for (auto& p : sweep.points) {
                if (p.s < t && p.L_rel) lrel_max = std::max(lrel_max, *p.L_rel);
                if (p.s >= t / 2) {
                    late += p.L;
                    ++late_count;
                }
                if (p.s <= t / 2 && p.L_abs) labs_mid = p.L_abs;
            }
            res["max_L_rel"] = lrel_max;
            res["late_L_over_3N4"] = late / late_count / (0.75 * n);
            res["L_abs_mid"] = opt_json(labs_mid);
        }
        if (want("ste")) {
            auto ste = ste_residual(o, b.circuit, t);
            std::ostringstream s;
            s << "t,c_x,c_zz,residual,step_residual\n";
            for (std::size_t i = 0; i < ste.c_x.size(); ++i)
                s << i << ',' << num(ste.c_x[i]) << ',' << num(ste.c_zz[i]) << ',' << num(ste.residual[i]) << ','
                  << num(i < ste.step_residual.size() ? ste.step_residual[i] : NAN) << '\n';
            ctx.out.csv("ste" + sfx, s.str());
            res["ste_max_abs_residual"] = ste.max_abs_residual();
        }
        if (want("compare")) {
            std::vector<long long> times = ctx.params.at("compare_times");
            const int tmax = static_cast<int>(*std::max_element(times.begin(), times.end()));
            b.circuit.num_steps = tmax;
            ObservableSet obs(n, {b.observable});
            SigmaOptions sopt;
            sopt.noisy_insertions = false;
            auto sig = measure_sigma_series(b.circuit, b.noise.with_epsilon(b.noise.epsilon > 0 ? b.noise.epsilon : 1e-3),
                                            b.init, tmax, obs, sopt);
            std::ostringstream s;
            s << "t,cum_sigma1_over_cum_sigma0,minus43_sum_L_rel,minus43_sum_L\n";
            for (long long tt : times) {
                SweepOptions opt;
                auto sweep = relevant_length_sweep(o, b.circuit, b.init, static_cast<int>(tt), opt);
                double srel = 0, sl = 0, c1 = 0, c0 = 0;
                for (auto& p : sweep.points)
                    if (p.s >= 1) {
                        srel += p.L_rel.value_or(0.0);
                        sl += p.L;
                    }
                for (int u = 1; u <= tt; ++u) {
                    c1 += sig.reports[0][u].Sigma1;
                    c0 += sig.reports[0][u].Sigma0;
                }
                s << tt << ',' << num(c0 != 0 ? c1 / c0 : NAN) << ',' << num(-4.0 / 3.0 * srel) << ','
                  << num(-4.0 / 3.0 * sl) << '\n';
            }
            ctx.out.csv("compare" + sfx, s.str());
        }
        per[std::to_string(n)] = res;
    }
    ctx.results = {{"sizes", per}, {"t", t}};
}

// ---------------------------------------------------------------- validity sweep

json variant_config(const json& base, const std::string& v, double large_dt) {
    json c = base;
    if (v == "time-dependent") {
        const double amp = base.contains("h") ? base.at("h").get<double>() : base.at("h_schedule").at("amplitude").get<double>();
        c.erase("h");
        c["h_schedule"] = {{"kind", "cosine"}, {"amplitude", amp}, {"period", 100.0}};
    } else if (v == "central-connectivity") {
        c["lattice"]["wheel_hub"] = 0;
    } else if (v == "y-initial-state") {
        c["initial_state"] = "y_plus";
    } else if (v == "large-trotter-step") {
        c["dt"] = large_dt;
    }
    return c;
}

void run_validity_sweep(Context& ctx) {
    const std::string engine = ctx.params.at("engine");
    const bool lengths = ctx.params.at("lengths");
    json per = json::object();
    for (auto& v : ctx.params.at("variants")) {
        const std::string variant = v;
        json cfg = variant_config(ctx.config, variant, ctx.params.at("large_dt"));
        std::ostringstream d, l;
        d << "N,t,delta_o\n";
        l << "N,s,L_rel\n";
        json vr = json::object();
        for (auto& sz : ctx.params.at("sizes")) {
            BuiltConfig b = with_lattice(cfg, sz[0], sz[1]);
            const int n = b.num_qubits();
            if (engine == "density") require_density(n, "validity-sweep with the density-matrix engine");
            require_statevector(n, "validity-sweep");
            log(ctx.id, variant + ", N = " + std::to_string(n));
            ObservableSet obs(n, {b.observable});
            auto clean = run_statevector(b.circuit, b.init, b.steps, obs);
            QuenchResult noisy;
            if (engine == "density") {
                noisy = run_density_matrix(b.circuit, b.noise, b.init, b.steps, obs);
            } else {
                TrajectoryBatch batch;
                batch.num_trajectories = ctx.params.at("trajectories").get<int>();
                batch.seed = b.seed;
                noisy = evolve_trajectories(b.circuit, b.noise, b.init, b.steps, obs, batch);
            }
            auto delta = normalized_difference(noisy.value[0], clean.value[0], clean.steps, b.noise.epsilon, b.delta_t);
            for (std::size_t i = 0; i < delta.size(); ++i) d << n << ',' << clean.steps[i] << ',' << num(delta[i]) << '\n';
            json r = {{"final_delta_o", opt_json(delta.back())}};
            if (lengths) {
                SweepOptions opt;
                opt.stride = ctx.params.at("length_stride");
                require_density(n, "relevant-length panels");
                auto sweep = relevant_length_sweep(b.observable.to_pauli(n), b.circuit, b.init, b.steps, opt);
                double mx = 0;
                for (auto& p : sweep.points) {
                    l << n << ',' << p.s << ',' << num(p.L_rel) << '\n';
                    if (p.s < b.steps && p.L_rel) mx = std::max(mx, *p.L_rel);
                }
                r["max_L_rel"] = mx;
            }
            vr[std::to_string(n)] = r;
        }
        ctx.out.csv("delta_o_" + variant + ".csv", d.str());
        if (lengths) ctx.out.csv("lengths_" + variant + ".csv", l.str());
        per[variant] = vr;
    }
    ctx.results = {{"variants", per}, {"engine", engine}};
}

// ---------------------------------------------------------------- free fermion

void run_free_fermion(Context& ctx) {
    const double dt = ctx.params.at("dt"), tau = ctx.params.at("tau");
    const int steps = static_cast<int>(std::lround(tau / dt));
    const int trajectories = ctx.params.at("trajectories"), stride = ctx.params.at("stride");
    const double wlo = ctx.params.at("lambda_window")[0], whi = ctx.params.at("lambda_window")[1];
    const bool mitigation = ctx.params.at("mitigation");
    json runs = json::array();
    std::uint64_t index = 0;
    for (int n : ctx.params.at("sizes"))
        for (double h : ctx.params.at("fields"))
            for (double eta : ctx.params.at("etas")) {
                log(ctx.id, "N = " + std::to_string(n) + ", h = " + tag(h) + ", eta = " + tag(eta));
                const std::uint64_t seed = ctx.built.seed + 0x9E3779B97F4A7C15ULL * ++index;
                ff::FreeFermionRun run = trajectories > 0
                                             ? ff::gaussian_trajectories(n, h, dt, eta, steps, trajectories, seed, stride)
                                             : ff::averaged_correlation_run(n, h, dt, eta, steps, stride);
                const std::string key = "N" + std::to_string(n) + "_h" + tag(h) + "_eta" + tag(eta);
                ctx.out.csv("ff_" + key + ".csv", strip_comment(run.to_csv()));
                json r = {{"n", n},
                          {"h", h},
                          {"eta", eta},
                          {"lambda_theory", run.lambda_theory},
                          {"lambda_late", opt_json(run.late_time_lambda(wlo, whi))}};
                if (mitigation) {
                    // exact trajectory average plus the noisy-insertion Sigma_1 of the same channel
                    const double p = eta * dt;
                    auto avg = trajectories > 0 ? ff::averaged_correlation_run(n, h, dt, eta, steps, stride) : run;
                    auto sec = ff::x_noise_sectors(n, h, dt, steps, p, 1);
                    std::ostringstream s;
                    s << "t,lambda_t,exact,noisy,lin,exp\n";
                    double worst_lin = 0, worst_exp = 0;
                    for (std::size_t i = 0; i < avg.steps.size(); ++i) {
                        const int st = avg.steps[i];
                        const double exact = avg.sx_noiseless[i], noisy = avg.sx_noisy[i];
                        const double lin = mitigate_LIN(noisy, sec[1][st], p);
                        auto ex = mitigate_EXP(noisy, sec[1][st], p);
                        const double lt = run.lambda_theory * eta * avg.time[i];
                        s << num(avg.time[i]) << ',' << num(lt) << ',' << num(exact) << ',' << num(noisy) << ','
                          << num(lin) << ',' << num(ex) << '\n';
                        if (lt >= 1.0 && lt <= 3.0) {
                            worst_lin = std::max(worst_lin, std::abs(lin - exact) / std::abs(exact));
                            if (ex) worst_exp = std::max(worst_exp, std::abs(*ex - exact) / std::abs(exact));
                        }
                    }
                    ctx.out.csv("ff_mitigation_" + key + ".csv", s.str());
                    r["max_rel_error_lin_lt_1_3"] = worst_lin;
                    r["max_rel_error_exp_lt_1_3"] = worst_exp;
                }
                runs.push_back(r);
            }
    ctx.results = {{"runs", runs}, {"steps", steps}};

    if (ctx.params.at("depolarizing")) {
        std::ostringstream s;
        s << "N,h,lambda,plateau,sigma1_slope,decay_rate,transfer_decay_rate_eta\n";
        json dep = json::array();
        for (int n : ctx.params.at("sizes"))
            for (double h : ctx.params.at("fields")) {
                auto rate = ff::depolarizing_decay_rate(n, h);
                auto tm = ff::build_transfer_matrix(n, h);
                const double eta = ctx.params.at("etas")[0];
                const double td = eta > 0 ? ff::transfer_decay_rate(tm, eta) : NAN;
                s << n << ',' << num(h) << ',' << num(rate.lambda) << ',' << num(rate.plateau) << ','
                  << num(rate.sigma1_slope) << ',' << num(rate.decay_rate) << ',' << num(td) << '\n';
                dep.push_back({{"n", n}, {"h", h}, {"lambda", rate.lambda}, {"decay_rate", rate.decay_rate},
                               {"transfer_decay_rate", opt_json(td)}});
            }
        ctx.out.csv("depolarizing.csv", s.str());
        ctx.results["depolarizing"] = dep;
    }
}

// ---------------------------------------------------------------- correspondence

double median(std::vector<double> v) {
    if (v.empty()) return NAN;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

void run_correspondence(Context& ctx) {
    auto& b = ctx.built;
    const int n = b.num_qubits();
    require_statevector(n, "correspondence");
    const int t_star = ctx.params.at("t_star"), s0 = ctx.params.at("s0"), stride = ctx.params.at("stride");
    const int band = ctx.params.at("diagonal_band");
    b.circuit.num_steps = t_star;
    PauliOperator o(n);
    o.add(PauliString::single(n, ctx.params.at("site").get<int>(), PauliKind::X), 1.0);
    const PauliString k = bond_kraus(n, ctx.params.at("kraus_sites")[0], ctx.params.at("kraus_sites")[1]);
    log(ctx.id, "time grid");
    auto tg = correlator_time_grid(b.circuit, o, t_star, k, stride);
    ctx.out.csv("correlator_time.csv", tg.to_csv("s", "t"));
    log(ctx.id, "bond grid");
    auto bg = correlator_bond_grid(b.circuit, o, t_star, s0);
    ctx.out.csv("correlator_bond.csv", bg.to_csv("q", "p"));

    std::vector<double> tdiag, toff, bdiag, boff;
    for (std::size_t r = 0; r < tg.row_index.size(); ++r)
        for (std::size_t c = 0; c < tg.col_index.size(); ++c) {
            const double a = std::abs(tg.value[r][c].real());
            const int gap = std::abs(tg.row_index[r] - tg.col_index[c]);
            if (gap == 0) tdiag.push_back(a);
            else if (gap > band) toff.push_back(a);
        }
    for (std::size_t r = 0; r < bg.row_index.size(); ++r)
        for (std::size_t c = 0; c < bg.col_index.size(); ++c)
            (bg.row_index[r] == bg.col_index[c] ? bdiag : boff).push_back(std::abs(bg.value[r][c].real()));
    ctx.results = {{"time_grid", {{"median_diagonal", median(tdiag)}, {"median_off_diagonal", median(toff)}}},
                   {"bond_grid", {{"median_diagonal", median(bdiag)}, {"median_off_diagonal", median(boff)}}}};
}

// ---------------------------------------------------------------- toy models

void run_toy_model(Context& ctx) {
    std::ostringstream pk, in;
    pk << "N,regime,p1,k,p_k\n";
    in << "N,regime,sample,value\n";
    json res = json::array();
    std::uint64_t index = 0;
    for (int n : ctx.params.at("sizes"))
        for (auto& rg : ctx.params.at("regimes")) {
            const std::string regime = rg;
            const double p1 = regime == "inverse_n" ? 1.0 / n : 3.0 * n / std::pow(4.0, n);
            auto m = toy_model_pk(p1, n);
            for (int k = 0; k <= n; ++k) pk << n << ',' << regime << ',' << num(p1) << ',' << k << ',' << num(m.p[k]) << '\n';
            auto rng = make_stream(ctx.built.seed, index++);
            auto st = toy_model_interference(p1, 1.0 / n, n, ctx.params.at("samples"), rng);
            for (std::size_t i = 0; i < st.samples.size(); ++i)
                in << n << ',' << regime << ',' << i << ',' << num(st.samples[i]) << '\n';
            res.push_back({{"n", n},        {"regime", regime},         {"p1", p1},
                           {"sum", m.sum},  {"mean", m.mean},           {"diluted_mean", m.diluted_mean},
                           {"median", st.median}, {"interference_mean", st.mean}, {"l_abs", st.l_abs}});
        }
    ctx.out.csv("toy_pk.csv", pk.str());
    ctx.out.csv("toy_interference.csv", in.str());
    ctx.results = {{"models", res}};
}

}  // namespace

// ---------------------------------------------------------------- entry points

json validate_manifest(const json& raw, const Overrides& ov) {
    std::vector<std::string> errors;
    if (!raw.is_object()) throw ValidationError({"manifest: expected a JSON object"});
    ObjectReader r(raw, "manifest", errors);
    std::vector<std::string> ids;
    for (auto& e : experiment_catalog()) ids.push_back(e.id);
    if (!r.has("experiment")) errors.push_back("manifest.experiment: required");
    const std::string id = r.choice("experiment", "quench", ids);
    json config_raw = r.raw("config");
    const auto top_seed = r.optional_integer("seed");
    json params_raw = r.raw("params");
    std::string output = r.string("output", "out/" + id);
    r.finish();

    json config = normalize_config(config_raw, errors);
    if (top_seed) {
        if (config_raw.is_object() && config_raw.contains("seed") && config["seed"].get<long long>() != *top_seed)
            errors.push_back("manifest.seed: conflicts with config.seed");
        if (*top_seed < 0) errors.push_back("manifest.seed: must be >= 0");
        config["seed"] = *top_seed;
    }
    if (ov.seed) config["seed"] = *ov.seed;
    if (ov.mitigate && *ov.mitigate != "lin" && *ov.mitigate != "exp" && *ov.mitigate != "both")
        errors.push_back("--mitigate: expected lin, exp or both");
    if (ov.out) output = *ov.out;

    json params;
    if (errors.empty()) params = normalize_params(id, params_raw, config, errors, ov.mitigate);
    if (ov.mitigate && errors.empty() && !params.contains("mitigate"))
        errors.push_back("--mitigate: experiment '" + id + "' has no mitigation step");
    if (!errors.empty()) throw ValidationError(errors);
    return {{"experiment", id}, {"config", config}, {"params", params}, {"output", output}};
}

std::string manifest_hash(const json& normalized) {
    json h = normalized;
    h.erase("output");
    return fnv1a_hex(h.dump());
}

ArtifactSet run_manifest(const json& m) {
    const std::string id = m.at("experiment");
    ArtifactSet a;
    a.dir = m.at("output");
    a.hash = manifest_hash(m);
    Writer out(a.dir, a.hash, id);
    Context ctx{m, m.at("config"), m.at("params"), build_config(m.at("config")), out, json::object(), id};
    if (id == "quench") run_quench(ctx);
    else if (id == "sigma") run_sigma(ctx);
    else if (id == "mitigate") run_mitigate(ctx);
    else if (id == "string-length") run_string_length(ctx);
    else if (id == "validity-sweep") run_validity_sweep(ctx);
    else if (id == "free-fermion") run_free_fermion(ctx);
    else if (id == "correspondence") run_correspondence(ctx);
    else if (id == "toy-model") run_toy_model(ctx);
    else throw std::invalid_argument("unknown experiment " + id);

    json manifest = m;
    manifest.erase("output");
    a.summary = {{"experiment", id}, {"config_hash", a.hash}, {"manifest", manifest}, {"results", ctx.results}};
    a.files = out.files();
    a.summary["files"] = a.files;
    out.write("summary.json", a.summary.dump(2) + "\n");
    a.files.push_back("summary.json");
    return a;
}

}  // namespace dl::cli
