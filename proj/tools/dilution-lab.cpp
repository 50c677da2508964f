#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dilution/cli/experiments.hpp"
#include "dilution/kernels.hpp"

namespace {

using dl::cli::json;

json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

int thread_count(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("DILUTION_LAB_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t > 0) return t;
        } catch (const std::exception&) {
        }
        std::cerr << "ignoring DILUTION_LAB_THREADS='" << env << "'\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dilution-lab: desk-scale Trotter noise dilution experiments"};
    app.require_subcommand(1);

    std::string manifest_path, out_dir, mitigate;
    long long seed = -1;
    int threads = 0;
    auto* run = app.add_subcommand("run", "run a manifest and write CSV + summary.json");
    run->add_option("manifest", manifest_path, "manifest JSON")->required();
    run->add_option("--out", out_dir, "output directory (overrides manifest.output)");
    run->add_option("--seed", seed, "seed (overrides config.seed)")->check(CLI::NonNegativeNumber);
    run->add_option("--threads", threads, "OpenMP threads (fallback: DILUTION_LAB_THREADS)")->check(CLI::PositiveNumber);
    run->add_option("--mitigate", mitigate, "lin, exp or both")->check(CLI::IsMember({"lin", "exp", "both"}));

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a manifest and print it with defaults filled in");
    validate->add_option("manifest", validate_path, "manifest JSON")->required();

    auto* list = app.add_subcommand("list-experiments", "list experiment ids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (auto& e : dl::cli::experiment_catalog())
                std::cout << e.id << "\n    " << e.description << "\n    writes: " << e.outputs << "\n";
            return 0;
        }
        if (*validate) {
            auto m = dl::cli::validate_manifest(read_json(validate_path));
            std::cout << m.dump(2) << "\nconfig_hash " << dl::cli::manifest_hash(m) << "\n";
            return 0;
        }
        dl::cli::Overrides ov;
        if (!out_dir.empty()) ov.out = out_dir;
        if (seed >= 0) ov.seed = seed;
        if (!mitigate.empty()) ov.mitigate = mitigate;
        auto m = dl::cli::validate_manifest(read_json(manifest_path), ov);
        if (int t = thread_count(threads); t > 0) dl::kernels::set_threads(t);
        auto a = dl::cli::run_manifest(m);
        std::cout << "wrote " << a.files.size() << " files to " << a.dir << " (config_hash " << a.hash << ")\n";
        for (auto& f : a.files) std::cout << "  " << f << "\n";
        return 0;
    } catch (const dl::cli::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const dl::cli::BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
