#pragma once

#include <string>
#include <vector>

#include "fraclab/inequality.hpp"

namespace fraclab {

/// Declarative sweep configuration; JSON config file keys map 1:1 onto
/// these fields and CLI flags override them.
struct ExperimentConfig {
    std::string command;
    std::string domain = "unit_square";
    nlohmann::json domain_params = nlohmann::json::object();
    int dim = 2;

    std::vector<double> deltas{0.5};
    std::vector<double> ps{2.0};
    std::vector<double> qs{0.0};  // 0 = Sobolev-critical
    std::vector<double> taus{0.5};
    std::vector<double> kappas{1.0};
    std::vector<int> levels{6};  // grid levels, h = 2^-level
    std::vector<std::string> fixtures{"linear"};
    std::uint64_t seed = 1;
    std::size_t family_count = 1;

    int max_level = 7;   // whitney/chains resolution
    double chain_q = 4.0;
    int m_max = 6;       // counterexample
    double outer_radius = 0.625;
    bool control = false;
    int counterexample_level = 8;
    int cap_budget = 200;
    double k_radius = 0.15;
    int exhaustion_levels = 5;

    std::string out_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    void merge_json(const nlohmann::json& j);
};

struct RunResult {
    int exit_code = 0;  // nonzero iff an assertion-tier check failed
    std::vector<InequalityReport> reports;
    nlohmann::json summary;
    std::vector<std::string> skipped;  // skipped combos with reasons
};

/// Executes one subcommand; writes results.csv, results.json and any
/// decomposition dumps under cfg.out_dir.
RunResult run(const ExperimentConfig& cfg);

}  // namespace fraclab
