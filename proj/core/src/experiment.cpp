#include "fraclab/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fraclab/assouad.hpp"
#include "fraclab/john.hpp"

namespace fraclab {

namespace {

namespace fs = std::filesystem;

template <typename T>
void read_list(const nlohmann::json& j, const char* key, std::vector<T>& out) {
    if (!j.contains(key)) return;
    out.clear();
    if (j.at(key).is_array())
        for (const auto& v : j.at(key)) out.push_back(v.get<T>());
    else
        out.push_back(j.at(key).get<T>());
}

struct Task {
    std::string fixture_name;
    std::uint64_t seed;
    FracParams params;
    int level;
};

/// Expands the (fixture x parameter) grid, logging combos that violate
/// module preconditions instead of running them.
std::vector<Task> expand_tasks(const ExperimentConfig& cfg, int dim, std::vector<std::string>& skipped,
                               bool need_hardy_range) {
    std::vector<Task> tasks;
    for (const auto& fx : cfg.fixtures) {
        const std::size_t members = fx == "random_smooth" ? cfg.family_count : 1;
        for (std::size_t fi = 0; fi < members; ++fi)
            for (double delta : cfg.deltas)
                for (double p : cfg.ps)
                    for (double qv : cfg.qs)
                        for (double tau : cfg.taus)
                            for (double kappa : cfg.kappas)
                                for (int level : cfg.levels) {
                                    FracParams P;
                                    P.delta = delta;
                                    P.p = p;
                                    P.tau = tau;
                                    P.kappa = kappa;
                                    if (qv > 0.0) P.q_free = qv;
                                    char tag[160];
                                    std::snprintf(tag, sizeof tag, "%s#%zu delta=%g p=%g q=%g tau=%g level=%d",
                                                  fx.c_str(), fi, delta, p, qv, tau, level);
                                    if (!P.q_free && p >= dim / delta) {
                                        skipped.push_back(std::string(tag) + " : skipped (p >= n/delta)");
                                        continue;
                                    }
                                    if (need_hardy_range) {
                                        const double q = P.q(dim);
                                        const double gap = 1.0 / p - 1.0 / q;
                                        if (gap < -1e-12 || gap > delta / dim + 1e-12) {
                                            skipped.push_back(std::string(tag) +
                                                              " : skipped (hardy range 0 <= 1/p-1/q <= delta/n)");
                                            continue;
                                        }
                                    }
                                    tasks.push_back({fx, cfg.seed + fi, P, level});
                                }
    }
    return tasks;
}

/// Disc-shaped compact set around the window center.
template <int N>
CompactSet<N> disc_compact_set(std::shared_ptr<const Domain<N>> dom, int level, double radius,
                               std::optional<Vec<N>> center = std::nullopt) {
    auto probe = GridFunction<N>::zeros(dom, level);
    const Vec<N> c = center.value_or(dom->window.center());
    return CompactSet<N>::from_predicate(probe, [c, radius](const Vec<N>& x) { return dist<N>(x, c) <= radius; });
}

template <int N>
int run_whitney(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain, cfg.domain_params);
    const auto fam = whitney_decompose<N>(dom, cfg.max_level);
    int violations = 0;
    for (std::size_t i = 0; i < fam.cubes.size(); ++i) {
        const double diam = fam.cubes[i].diam();
        if (!(diam <= fam.dist[i] + 1e-12 && fam.dist[i] <= 4.0 * diam + 1e-12)) ++violations;
    }
    const double uncovered = uncovered_measure(fam);
    const int overlap = star_overlap_max(fam);
    res.summary["cubes"] = fam.cubes.size();
    res.summary["unresolved"] = fam.unresolved.size();
    res.summary["violations"] = violations;
    res.summary["uncovered_measure"] = uncovered;
    res.summary["star_overlap_max"] = overlap;
    std::ofstream os(fs::path(cfg.out_dir) / "whitney.jsonl");
    write_jsonl(fam, os);
    return (violations == 0 && uncovered <= std::ldexp(1.0, -12)) ? 0 : 1;
}

template <int N>
int run_chains(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain, cfg.domain_params);
    auto fam = std::make_shared<WhitneyFamily<N>>(whitney_decompose<N>(dom, cfg.max_level));
    const auto C = build_chains<N>(fam, cfg.chain_q);
    const auto rep = verify_chain_properties(C, cfg.chain_q);
    res.summary["rho"] = C.rho;
    res.summary["per_level_max"] = C.per_level_max;
    res.summary["sigma_measured"] = rep.sigma_measured;
    res.summary["sigma_completed"] = rep.sigma_completed;
    res.summary["center"] = {{"level", fam->cubes[C.center].level}, {"index", fam->cubes[C.center].index}};
    // chains as JSON adjacency paths
    std::ofstream os(fs::path(cfg.out_dir) / "chains.jsonl");
    for (std::size_t qid = 0; qid < fam->size(); ++qid) {
        nlohmann::json j;
        j["cube"] = {{"level", fam->cubes[qid].level}, {"index", fam->cubes[qid].index}};
        nlohmann::json path = nlohmann::json::array();
        for (std::size_t r : C.chain_of(qid)) path.push_back({{"level", fam->cubes[r].level}, {"index", fam->cubes[r].index}});
        j["chain"] = path;
        os << j.dump() << "\n";
    }
    return 0;
}

template <int N>
int run_capacity(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain, cfg.domain_params);
    const int level = cfg.levels.front();
    const auto K = disc_compact_set<N>(dom, level, cfg.k_radius);
    FracParams P;
    P.delta = cfg.deltas.front();
    P.p = cfg.ps.front();
    P.tau = cfg.taus.front();
    CapacityProblem<N> prob{dom, GridSpec<N>::make(*dom, level), K, P, 0};
    const auto cap = capacity_estimate(prob, cfg.cap_budget);
    res.summary["value_upper"] = cap.value_upper;
    res.summary["converged"] = cap.converged;
    res.summary["k_cells"] = K.cells.size();
    res.summary["iterations"] = cap.trace.size();
    cap.minimizer.write_binary((fs::path(cfg.out_dir) / "capacity_minimizer.bin").string());
    nlohmann::json tr = nlohmann::json::array();
    for (double v : cap.trace) tr.push_back(v);
    res.summary["trace"] = tr;
    return 0;
}

template <int N>
int run_checks(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain, cfg.domain_params);
    const bool hardy = cfg.command == "check-hardy";
    auto tasks = expand_tasks(cfg, N, res.skipped, hardy);
    res.reports.resize(tasks.size());
    std::vector<int> bad(tasks.size(), 0);
    parallel_for_blocks(tasks.size(), [&](std::size_t t) {
        const Task& task = tasks[t];
        auto u = fixture<N>(dom, task.level, task.fixture_name, task.seed);
        InequalityReport rep;
        if (cfg.command == "check-sp") {
            rep = check_sobolev_poincare(u, task.params);
        } else if (cfg.command == "check-weak") {
            rep = check_weak_sobolev_poincare(u, task.params);
            // assertion tier: Chebyshev and the embedding sandwich
            const auto strong = check_sobolev_poincare(u, task.params);
            if (rep.lhs > strong.lhs * (1.0 + 1e-12)) bad[t] = 1;
            if (rep.extra.contains("a_lower") &&
                rep.extra["a_lower"].get<double>() > rep.extra["a_upper"].get<double>() * (1.0 + 1e-12))
                bad[t] = 1;
        } else if (cfg.command == "check-hardy") {
            rep = check_hardy(u, task.params);
        } else {
            throw std::invalid_argument("run_checks: unknown command " + cfg.command);
        }
        rep.fixture = task.fixture_name + "#" + std::to_string(task.seed - cfg.seed);
        res.reports[t] = std::move(rep);
    });
    // refinement traces: reports sharing (fixture, params) across grid
    // levels carry the same (h, ratio) list, coarse to fine
    if (cfg.levels.size() > 1) {
        std::map<std::string, std::vector<std::pair<double, double>>> traces;
        auto key = [](const InequalityReport& r) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s|%g|%g|%g|%g", r.fixture.c_str(), r.delta, r.p, r.q, r.tau);
            return std::string(buf);
        };
        for (const auto& r : res.reports) traces[key(r)].push_back({r.h, r.ratio});
        for (auto& [k, tr] : traces)
            std::sort(tr.begin(), tr.end(), [](auto a, auto b) { return a.first > b.first; });
        for (auto& r : res.reports) r.refinement_trace = traces[key(r)];
    }
    for (int b : bad)
        if (b) return 1;
    return 0;
}

template <int N>
int run_mazya(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain, cfg.domain_params);
    const int level = cfg.levels.front();
    FracParams P;
    P.delta = cfg.deltas.front();
    P.p = cfg.ps.front();
    P.tau = cfg.taus.front();
    if (cfg.qs.front() > 0.0) P.q_free = cfg.qs.front();
    const auto K = disc_compact_set<N>(dom, level, cfg.k_radius);
    auto mz = check_mazya_criterion<N>(dom, K, P, cfg.cap_budget);
    mz.report.fixture = "disc";
    res.summary["capacity_upper"] = mz.capacity_upper;
    res.reports.push_back(std::move(mz.report));
    return 0;
}

template <int N>
int run_whitney_sum(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain, cfg.domain_params);
    const int level = cfg.levels.front();
    FracParams P;
    P.delta = cfg.deltas.front();
    P.p = cfg.ps.front();
    P.tau = cfg.taus.front();
    if (cfg.qs.front() > 0.0) P.q_free = cfg.qs.front();
    const auto K = disc_compact_set<N>(dom, level, cfg.k_radius);
    const auto ws = check_whitney_capacity_sum<N>(dom, K, P, cfg.cap_budget);
    res.summary["sum_term"] = ws.sum_term;
    res.summary["cap_total"] = ws.cap_total;
    res.summary["N_measured"] = ws.N_measured;
    res.summary["pieces"] = ws.per_cube_cap.size();
    InequalityReport rep;
    rep.name = "whitney_capacity_sum";
    rep.domain_name = dom->name;
    rep.fixture = "disc";
    rep.fill_params(P, N);
    rep.h = std::ldexp(1.0, -level);
    rep.lhs = ws.sum_term;
    rep.rhs = ws.cap_total;
    rep.ratio = ws.N_measured;
    res.reports.push_back(std::move(rep));
    return 0;
}

int run_counterexample(const ExperimentConfig& cfg, RunResult& res) {
    FracParams P;
    P.delta = cfg.deltas.front();
    P.p = cfg.ps.front();
    P.q_free = P.p;  // (delta, p, p)-Hardy family
    const auto r = counterexample_sequence(cfg.m_max, P, cfg.counterexample_level, cfg.outer_radius, cfg.control);
    res.reports = r.reports;
    res.summary["ratios"] = r.ratios;
    res.summary["growth"] = r.growth;
    res.summary["increasing"] = r.increasing;
    if (cfg.control) return 0;  // control runs are informational
    return (r.increasing && r.growth >= 3.0) ? 0 : 1;
}

template <int N>
int run_assouad(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain, cfg.domain_params);
    FracParams P;
    P.delta = cfg.deltas.front();
    P.p = cfg.ps.front();
    P.tau = cfg.taus.front();
    const auto pts = dom->boundary_sample(8192);
    const auto prof = covering_profile<N>(pts);
    prof.write_csv((fs::path(cfg.out_dir) / "covering_profile.csv").string());
    const auto cond = corollary_conditions<N>(*dom, P);
    res.summary["lambda_upper"] = prof.slope_max;
    res.summary["lambda_lower"] = prof.slope_min;
    res.summary["residual"] = prof.residual;
    res.summary["threshold"] = cond.threshold;
    res.summary["A"] = to_string(cond.A);
    res.summary["B"] = to_string(cond.B);
    return 0;
}

template <int N>
int run_exhaustion(const ExperimentConfig& cfg, RunResult& res) {
    auto dom = make_domain<N>(cfg.domain.empty() ? "cone" : cfg.domain, cfg.domain_params);
    const int level = cfg.levels.front();
    FracParams P;
    P.delta = cfg.deltas.front();
    P.p = cfg.ps.front();
    P.tau = cfg.taus.front();
    // bump supported well inside the smallest nested window
    const Vec<N> c = dom->window.center();
    double r0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) r0 = std::min(r0, dom->window.side(i));
    r0 *= 0.35 * std::ldexp(1.0, -(cfg.exhaustion_levels - 1));
    auto u = GridFunction<N>::sample(dom, level, [c, r0](const Vec<N>& x) {
        const double t = dist<N>(x, c) / r0;
        const double s = std::max(0.0, 1.0 - t * t);
        return s * s;
    });
    const auto rep = exhaustion_study(u, P, cfg.exhaustion_levels);
    res.summary["means"] = rep.means;
    res.summary["window_measures"] = rep.window_measures;
    res.summary["holder_bounds"] = rep.holder_bounds;
    res.summary["holder_ok"] = rep.holder_ok;
    res.summary["means_decreasing"] = rep.means_decreasing;
    res.summary["ratio_zero_shift"] = rep.ratio_zero_shift;
    res.summary["ratio_inf_shift"] = rep.ratio_inf_shift;
    return rep.holder_ok ? 0 : 1;
}

template <int N>
int dispatch(const ExperimentConfig& cfg, RunResult& res) {
    if (cfg.command == "whitney") return run_whitney<N>(cfg, res);
    if (cfg.command == "chains") return run_chains<N>(cfg, res);
    if (cfg.command == "capacity") return run_capacity<N>(cfg, res);
    if (cfg.command == "check-sp" || cfg.command == "check-weak" || cfg.command == "check-hardy")
        return run_checks<N>(cfg, res);
    if (cfg.command == "check-mazya") return run_mazya<N>(cfg, res);
    if (cfg.command == "check-whitney-sum") return run_whitney_sum<N>(cfg, res);
    if (cfg.command == "assouad") return run_assouad<N>(cfg, res);
    if (cfg.command == "exhaustion") return run_exhaustion<N>(cfg, res);
    if (cfg.command == "counterexample") {
        if constexpr (N == 2) return run_counterexample(cfg, res);
        throw std::invalid_argument("counterexample: n = 2 only");
    }
    throw std::invalid_argument("run: unknown command '" + cfg.command + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.merge_json(j);
    return cfg;
}

void ExperimentConfig::merge_json(const nlohmann::json& j) {
    if (j.contains("command")) command = j.at("command").get<std::string>();
    if (j.contains("domain")) {
        if (j.at("domain").is_object()) {
            domain = j.at("domain").at("name").get<std::string>();
            if (j.at("domain").contains("params")) domain_params = j.at("domain").at("params");
        } else {
            domain = j.at("domain").get<std::string>();
        }
    }
    if (j.contains("domain_params")) domain_params = j.at("domain_params");
    if (j.contains("dim")) dim = j.at("dim").get<int>();
    read_list(j, "delta", deltas);
    read_list(j, "p", ps);
    read_list(j, "q", qs);
    read_list(j, "tau", taus);
    read_list(j, "kappa", kappas);
    read_list(j, "level", levels);
    read_list(j, "fixtures", fixtures);
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("family_count")) family_count = j.at("family_count").get<std::size_t>();
    if (j.contains("max_level")) max_level = j.at("max_level").get<int>();
    if (j.contains("chain_q")) chain_q = j.at("chain_q").get<double>();
    if (j.contains("m_max")) m_max = j.at("m_max").get<int>();
    if (j.contains("outer_radius")) outer_radius = j.at("outer_radius").get<double>();
    if (j.contains("control")) control = j.at("control").get<bool>();
    if (j.contains("counterexample_level")) counterexample_level = j.at("counterexample_level").get<int>();
    if (j.contains("cap_budget")) cap_budget = j.at("cap_budget").get<int>();
    if (j.contains("k_radius")) k_radius = j.at("k_radius").get<double>();
    if (j.contains("exhaustion_levels")) exhaustion_levels = j.at("exhaustion_levels").get<int>();
    if (j.contains("out")) out_dir = j.at("out").get<std::string>();
}

RunResult run(const ExperimentConfig& cfg) {
    RunResult res;
    fs::create_directories(cfg.out_dir);
    int code;
    if (cfg.dim == 2)
        code = dispatch<2>(cfg, res);
    else if (cfg.dim == 3)
        code = dispatch<3>(cfg, res);
    else
        throw std::invalid_argument("run: dim must be 2 or 3");
    res.exit_code = code;
    write_reports_csv(res.reports, (fs::path(cfg.out_dir) / "results.csv").string());
    write_reports_json(res.reports, (fs::path(cfg.out_dir) / "results.json").string());
    if (!res.skipped.empty()) {
        nlohmann::json sk = nlohmann::json::array();
        for (const auto& s : res.skipped) sk.push_back(s);
        res.summary["skipped"] = sk;
    }
    res.summary["command"] = cfg.command;
    res.summary["exit_code"] = res.exit_code;
    std::ofstream os(fs::path(cfg.out_dir) / "summary.json");
    os << res.summary.dump(2) << "\n";
    return res;
}

}  // namespace fraclab
