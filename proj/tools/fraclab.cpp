#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fraclab/experiment.hpp"

namespace {

/// Accepts "1/64", "0.015625" or a bare level exponent as "2^-6".
int parse_h_to_level(const std::string& text) {
    double h;
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const double num = std::stod(text.substr(0, slash));
        const double den = std::stod(text.substr(slash + 1));
        h = num / den;
    } else {
        h = std::stod(text);
    }
    if (h <= 0 || h > 1) throw CLI::ValidationError("--h must lie in (0, 1]");
    const double lvl = -std::log2(h);
    if (std::abs(lvl - std::round(lvl)) > 1e-9)
        throw CLI::ValidationError("--h must be a power of two (the lattice is dyadic)");
    return static_cast<int>(std::lround(lvl));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclab: fractional Sobolev-Poincare / Hardy inequality laboratory"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // frees -h/--h for the grid spacing

    fraclab::ExperimentConfig cfg;
    std::string config_path;
    std::vector<std::string> h_list;
    int threads = 0;

    app.add_option("--config", config_path, "JSON config file (CLI flags override its keys)");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--domain", cfg.domain, "gallery domain name");
    app.add_option("--dim", cfg.dim, "ambient dimension (2 or 3)");
    app.add_option("--seed", cfg.seed, "rng seed for fixture families");
    app.add_option("--threads", threads, "worker count (also honors FRACLAB_THREADS)");
    app.add_option("--window-size", [&cfg](const std::vector<std::string>& v) {
        cfg.domain_params["window_size"] = std::stod(v.front());
        return true;
    }, "window size for the unbounded gallery members");

    auto add_params = [&](CLI::App* sub, bool with_fixtures) {
        sub->set_help_flag("--help", "print help");
        sub->add_option("--delta", cfg.deltas, "smoothness parameters");
        sub->add_option("--p", cfg.ps, "integrability exponents");
        sub->add_option("--q", cfg.qs, "target exponents (0 = critical np/(n-delta p))");
        sub->add_option("--tau", cfg.taus, "visibility parameters");
        sub->add_option("--kappa", cfg.kappas, "dilation parameters");
        sub->add_option("--h", h_list, "grid spacings (powers of two, e.g. 1/64)");
        if (with_fixtures) {
            sub->add_option("--fixtures", cfg.fixtures,
                            "fixture families: linear radial_bump log_bump two_level random_smooth");
            sub->add_option("--family-count", cfg.family_count, "members per random_smooth family");
        }
    };

    auto* whitney = app.add_subcommand("whitney", "Whitney decomposition and its invariants");
    whitney->add_option("--max-level", cfg.max_level, "finest dyadic level");

    auto* chains = app.add_subcommand("chains", "chain decomposition and Lemma-style properties");
    chains->add_option("--max-level", cfg.max_level, "finest dyadic level");
    chains->add_option("--chain-q", cfg.chain_q, "exponent in the shadow sum");

    auto* capacity = app.add_subcommand("capacity", "(delta,p)-capacity of a disc by projected descent");
    add_params(capacity, false);
    capacity->add_option("--k-radius", cfg.k_radius, "disc radius of the compact set");
    capacity->add_option("--budget", cfg.cap_budget, "iteration budget");

    auto* sp = app.add_subcommand("check-sp", "strong Sobolev-Poincare sweep");
    add_params(sp, true);
    auto* weak = app.add_subcommand("check-weak", "weak Sobolev-Poincare sweep");
    add_params(weak, true);
    auto* hardy = app.add_subcommand("check-hardy", "fractional Hardy sweep");
    add_params(hardy, true);
    auto* mazya = app.add_subcommand("check-mazya", "Maz'ya capacity criterion (necessary direction)");
    add_params(mazya, false);
    mazya->add_option("--k-radius", cfg.k_radius, "disc radius");
    mazya->add_option("--budget", cfg.cap_budget, "capacity iteration budget");
    auto* wsum = app.add_subcommand("check-whitney-sum", "Whitney-localized capacity sum");
    add_params(wsum, false);
    wsum->add_option("--k-radius", cfg.k_radius, "disc radius");
    wsum->add_option("--budget", cfg.cap_budget, "capacity iteration budget");

    auto* cx = app.add_subcommand("counterexample", "log-bump Hardy failure witness on the slit plane");
    cx->add_option("--m-max", cfg.m_max, "deepest inner radius 2^-m");
    cx->add_option("--delta", cfg.deltas, "delta (witness mode requires delta = 1/p)");
    cx->add_option("--p", cfg.ps, "p (q = p)");
    cx->add_option("--r-outer", cfg.outer_radius, "outer truncation radius R");
    cx->add_option("--resolution-level", cfg.counterexample_level, "grid level (h = 2^-level)");
    cx->add_flag("--control", cfg.control, "control mode: allow delta != 1/p, no growth gate");

    auto* assouad = app.add_subcommand("assouad", "boundary Assouad estimates and corollary conditions");
    add_params(assouad, false);

    auto* exhaustion = app.add_subcommand("exhaustion", "nested-window exhaustion study");
    add_params(exhaustion, false);
    exhaustion->add_option("--levels", cfg.exhaustion_levels, "number of nested windows");

    for (auto* sub : {whitney, chains, capacity, sp, weak, hardy, mazya, wsum, cx, assouad, exhaustion})
        sub->fallthrough(true);  // global flags may follow the subcommand

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) setenv("FRACLAB_THREADS", std::to_string(threads).c_str(), 1);
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw std::runtime_error("cannot open config " + config_path);
            nlohmann::json j;
            is >> j;
            fraclab::ExperimentConfig file_cfg = fraclab::ExperimentConfig::from_json(j);
            // CLI flags already parsed into cfg override file keys: merge
            // file first, then re-apply the parsed CLI values that differ
            // from defaults by re-parsing is overkill; instead file keys
            // fill only fields the CLI left at their defaults.
            fraclab::ExperimentConfig defaults;
            auto pick = [](auto& dst, const auto& cli_v, const auto& def_v, const auto& file_v) {
                dst = (cli_v == def_v) ? file_v : cli_v;
            };
            fraclab::ExperimentConfig merged = file_cfg;
            pick(merged.domain, cfg.domain, defaults.domain, file_cfg.domain);
            pick(merged.dim, cfg.dim, defaults.dim, file_cfg.dim);
            pick(merged.deltas, cfg.deltas, defaults.deltas, file_cfg.deltas);
            pick(merged.ps, cfg.ps, defaults.ps, file_cfg.ps);
            pick(merged.qs, cfg.qs, defaults.qs, file_cfg.qs);
            pick(merged.taus, cfg.taus, defaults.taus, file_cfg.taus);
            pick(merged.kappas, cfg.kappas, defaults.kappas, file_cfg.kappas);
            pick(merged.fixtures, cfg.fixtures, defaults.fixtures, file_cfg.fixtures);
            pick(merged.seed, cfg.seed, defaults.seed, file_cfg.seed);
            pick(merged.family_count, cfg.family_count, defaults.family_count, file_cfg.family_count);
            pick(merged.max_level, cfg.max_level, defaults.max_level, file_cfg.max_level);
            pick(merged.chain_q, cfg.chain_q, defaults.chain_q, file_cfg.chain_q);
            pick(merged.m_max, cfg.m_max, defaults.m_max, file_cfg.m_max);
            pick(merged.outer_radius, cfg.outer_radius, defaults.outer_radius, file_cfg.outer_radius);
            pick(merged.control, cfg.control, defaults.control, file_cfg.control);
            pick(merged.counterexample_level, cfg.counterexample_level, defaults.counterexample_level,
                 file_cfg.counterexample_level);
            pick(merged.cap_budget, cfg.cap_budget, defaults.cap_budget, file_cfg.cap_budget);
            pick(merged.k_radius, cfg.k_radius, defaults.k_radius, file_cfg.k_radius);
            pick(merged.exhaustion_levels, cfg.exhaustion_levels, defaults.exhaustion_levels,
                 file_cfg.exhaustion_levels);
            pick(merged.out_dir, cfg.out_dir, defaults.out_dir, file_cfg.out_dir);
            pick(merged.domain_params, cfg.domain_params, defaults.domain_params, file_cfg.domain_params);
            cfg = merged;
        }
        if (!h_list.empty()) {
            cfg.levels.clear();
            for (const auto& s : h_list) cfg.levels.push_back(parse_h_to_level(s));
        }
        for (auto* sub : {whitney, chains, capacity, sp, weak, hardy, mazya, wsum, cx, assouad, exhaustion})
            if (sub->parsed()) cfg.command = sub->get_name();

        const auto res = fraclab::run(cfg);
        std::cout << res.summary.dump(2) << "\n";
        for (const auto& s : res.skipped) std::cerr << "skip: " << s << "\n";
        return res.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
