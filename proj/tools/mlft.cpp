// Command-line surface for the multi-level regression laboratory.
//
// Subcommands: generate, run, estimate, budget, sweep, growth, verify.
// Every command is driven by a plain-text config file; outputs embed the
// config hash and reruns with identical inputs are byte-identical apart
// from wall-clock lines in report.txt.
//
// Exit codes: 2 config error, 3 solver failure, 4 training divergence,
// 5 ill-conditioned kernel, 6 infeasible budget.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mlft/budget.hpp"
#include "mlft/config.hpp"
#include "mlft/dataset.hpp"
#include "mlft/estimate.hpp"
#include "mlft/hash.hpp"
#include "mlft/net_io.hpp"
#include "mlft/ntk.hpp"
#include "mlft/train.hpp"

namespace fs = std::filesystem;
using namespace mlft;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    long long seed_override = -1;
    int threads = 0;
};

ExperimentConfig load(const GlobalArgs& g) {
    if (g.config_path.empty()) throw ConfigError("missing --config");
    ExperimentConfig cfg = load_config(g.config_path);
    if (g.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed_override);
    if (g.threads > 0) cfg.threads = g.threads;
    return cfg;
}

/// Exclusive lock on the output directory for the lifetime of the command.
class OutputLock {
  public:
    explicit OutputLock(const std::string& dir) : path_(dir + "/.lock") {
        fs::create_directories(dir);
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f) throw ConfigError("output directory is locked: " + path_);
        std::fclose(f);
    }
    ~OutputLock() { std::remove(path_.c_str()); }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

  private:
    std::string path_;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << text;
}

std::string g17(double x) {
    char b[64];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "validation") return Split::validation;
    if (s == "test") return Split::test;
    throw ConfigError("unknown split '" + s + "'");
}

std::vector<long> parse_counts(const std::string& s) {
    std::vector<long> out;
    for (const std::string& tok : detail::split_on(s, ','))
        out.push_back(detail::to_long(tok, "--counts"));
    return out;
}

// ---------------------------------------------------------------------------

int cmd_generate(const GlobalArgs& g, int level, int count, const std::string& split_s,
                 bool paired) {
    const ExperimentConfig cfg = load(g);
    const Split split = parse_split(split_s);
    OutputLock lock(g.out_dir);
    SampleSet s =
        generate_samples(cfg.hierarchy, level, count, cfg.seed, split, paired, cfg.threads);
    const std::string name = std::string(problem_name(cfg.hierarchy.problem)) + "_l" +
                             std::to_string(level) + "_" + split_name(split) + ".ds";
    const std::string path = g.out_dir + "/" + name;
    write_sampleset(path, s, "# config " + cfg.hash + "\n" + cfg.raw);
    double cost = cfg.hierarchy.level(level).cost * count;
    if (paired) cost += cfg.hierarchy.level(level - 1).cost * count;
    std::cout << "generated " << count << " samples level " << level << " split " << split_s
              << " seed " << cfg.seed << " cost " << g17(cost) << " file " << path << "\n";
    return 0;
}

int cmd_run(const GlobalArgs& g, const std::string& pipeline, const std::string& counts_s,
            int level, long count, double ratio, double budget_T) {
    const ExperimentConfig cfg = load(g);
    OutputLock lock(g.out_dir);
    const PipelineConfig pc = cfg.pipeline();
    RunReport rep;
    if (pipeline == "single") {
        if (level < 1 || count < 1) throw ConfigError("run single needs --level and --count");
        rep = train_single_level(pc, level, count);
    } else {
        std::vector<long> counts;
        if (!counts_s.empty()) {
            counts = parse_counts(counts_s);
        } else if (ratio >= 0.0) {
            const double T = budget_T > 0 ? budget_T : cfg.budget_T;
            if (!(T > 0)) throw ConfigError("run with --ratio needs --budget or budget.T");
            if (cfg.hierarchy.L() != 2) throw ConfigError("--ratio requires a two-level hierarchy");
            const auto [m1, m2] =
                ratio_to_counts(ratio, T, cfg.hierarchy.level(1).cost, cfg.hierarchy.level(2).cost);
            counts = {m1, m2};
        } else {
            throw ConfigError("run needs --counts or --ratio");
        }
        if (pipeline == "mlft") rep = run_mlft(pc, counts);
        else if (pipeline == "ml2mc") rep = run_ml2mc(pc, counts);
        else throw ConfigError("unknown pipeline '" + pipeline + "'");
    }
    write_report(g.out_dir, rep, cfg.hash);
    write_text(g.out_dir + "/config.cfg", cfg.raw);
    std::cout << "pipeline " << rep.pipeline << " g " << g17(rep.g) << " g_test "
              << g17(rep.g_test) << " report " << g.out_dir << "/report.txt\n";
    return 0;
}

TrialRecord trial_from_report(const RunReport& rep, const std::vector<long>& counts) {
    TrialRecord tr;
    tr.m.assign(counts.begin(), counts.end());
    tr.g = rep.g_levels;
    tr.gap = rep.gaps;
    return tr;
}

int cmd_estimate(const GlobalArgs& g, const std::string& method_arg,
                 const std::string& pipeline) {
    const ExperimentConfig cfg = load(g);
    OutputLock lock(g.out_dir);
    const std::string method = method_arg.empty() ? cfg.est_method : method_arg;
    const PipelineConfig pc = cfg.pipeline();
    const Hierarchy& h = cfg.hierarchy;
    const int L = h.L();
    std::vector<double> costs;
    for (int l = 1; l <= L; ++l) costs.push_back(h.level(l).cost);
    std::vector<long> anchor = cfg.anchor;
    if (anchor.empty()) {
        anchor.assign(L, 0);
        for (int l = 0; l < L; ++l) anchor[l] = std::max<long>(8, 64 >> (2 * l));
    }
    if (static_cast<int>(anchor.size()) != L)
        throw ConfigError("estimator.anchor length must equal the level count");

    EstimatorModel model;
    std::string extra;
    if (method == "heuristic") {
        RunReport rep = (pipeline == "ml2mc") ? run_ml2mc(pc, anchor) : run_mlft(pc, anchor);
        const TrialRecord tr = trial_from_report(rep, anchor);
        model = (pipeline == "ml2mc") ? fit_heuristic_ml2mc(tr, costs)
                                      : fit_heuristic_mlft(tr, costs);
    } else if (method == "lsq") {
        if (cfg.lsq_trials.empty()) throw ConfigError("lsq estimation needs estimator.trials");
        std::vector<TrialRecord> trials;
        for (std::size_t i = 0; i < cfg.lsq_trials.size(); ++i) {
            PipelineConfig pci = pc;
            pci.seed = mix_seed({cfg.seed, 0x6c7371747269ULL, static_cast<std::uint64_t>(i)});
            RunReport rep = (pipeline == "ml2mc") ? run_ml2mc(pci, cfg.lsq_trials[i])
                                                  : run_mlft(pci, cfg.lsq_trials[i]);
            trials.push_back(trial_from_report(rep, cfg.lsq_trials[i]));
        }
        model = fit_least_squares(trials,
                                  pipeline == "ml2mc" ? EstimatorModel::Kind::ml2mc_apost
                                                      : EstimatorModel::Kind::mlft_apost,
                                  cfg.seed);
        model.t = costs;
    } else if (method == "apriori") {
        // Instrumented MLFT run: c_1 at initialization, (c_l, d_l) at the
        // state entering level l, R from the validation probes at init.
        GramPolicy policy;
        policy.cap = cfg.gram_cap;
        NetworkState net = build_network(cfg.net, mix_seed({cfg.seed, 0x6e6574696e6974ULL, 0}));
        OptimizerState opt = OptimizerState::make(cfg.opt, net.layout.total);
        const SampleSet probe =
            generate_samples(h, L, cfg.val_m, cfg.seed, Split::validation, L >= 2, cfg.threads);
        std::vector<const Field*> probe_v;
        for (const Field& f : probe.v) probe_v.push_back(&f);
        model.kind = EstimatorModel::Kind::mlft_apriori;
        model.L = L;
        model.t = costs;
        model.R = estimate_R(net, probe_v);
        double jitter_max = 0.0;
        for (int l = 1; l <= L; ++l) {
            const SampleSet train = generate_samples(h, l, static_cast<int>(anchor[l - 1]),
                                                     cfg.seed, Split::train, false, cfg.threads);
            if (l == 1) {
                model.c.push_back(coeff_c1(net, train, policy, cfg.threads));
            } else {
                const int cap_m = std::min<long>(anchor[l - 1], policy.cap);
                const SampleSet paired = generate_samples(h, l, static_cast<int>(cap_m), cfg.seed,
                                                          Split::train, true, cfg.threads);
                const auto [cl, dl] = coeff_cl_dl(net, paired, policy, cfg.threads);
                model.c.push_back(cl);
                model.d.push_back(dl);
            }
            FitOptions fo;
            fo.iters = cfg.iters;
            fo.batch = cfg.batch;
            fo.seed = mix_seed({cfg.seed, 0x6669747365656400ULL, static_cast<std::uint64_t>(l)});
            fo.log_interval = cfg.log_interval;
            fo.threads = cfg.threads;
            fit(net, opt, train, fo);
        }
        model.provenance = "empirical-kernel coefficients at anchor counts";
        extra = "# gram cap " + std::to_string(policy.cap) + ", max jitter " + g17(jitter_max) + "\n";
    } else {
        throw ConfigError("unknown estimator method '" + method + "'");
    }
    const std::string path = g.out_dir + "/estimator.txt";
    write_text(path, "# config " + cfg.hash + "\n" + extra + estimator_to_text(model));
    std::cout << "estimator " << estimator_kind_name(model.kind) << " written to " << path << "\n";
    return 0;
}

int cmd_budget(const GlobalArgs& g, const std::string& est_path, double T_arg) {
    std::string cfg_hash;
    double T = T_arg;
    if (!g.config_path.empty()) {
        const ExperimentConfig cfg = load(g);
        cfg_hash = cfg.hash;
        if (!(T > 0)) T = cfg.budget_T;
    }
    if (!(T > 0)) throw ConfigError("budget needs --T or budget.T in the config");
    // refuse to mix artifacts from different configs
    {
        std::ifstream is(est_path);
        if (!is) throw ConfigError("cannot open estimator file " + est_path);
        std::string first;
        std::getline(is, first);
        if (!cfg_hash.empty() && first.rfind("# config ", 0) == 0 &&
            first.substr(9) != cfg_hash)
            throw ConfigError("estimator file was produced under a different config");
    }
    const EstimatorModel model = load_estimator(est_path);
    OutputLock lock(g.out_dir);
    const BudgetSolution sol = (model.kind == EstimatorModel::Kind::ml2mc_apost)
                                   ? optimize_ml2mc(model, T)
                                   : optimize_mlft(model, T);
    std::string csv = budget_report_csv(model, sol);
    if (!cfg_hash.empty()) csv = "#config=" + cfg_hash + "\n" + csv;
    write_text(g.out_dir + "/budget.csv", csv);
    std::cout << "budget T " << g17(T) << " counts";
    for (long m : sol.m_rounded) std::cout << " " << m;
    std::cout << " ghat " << g17(sol.ghat_rounded) << " file " << g.out_dir << "/budget.csv\n";
    return 0;
}

int cmd_sweep(const GlobalArgs& g, double T_arg, int reps_arg, const std::string& est_path) {
    const ExperimentConfig cfg = load(g);
    OutputLock lock(g.out_dir);
    const double T = T_arg > 0 ? T_arg : cfg.budget_T;
    if (!(T > 0)) throw ConfigError("sweep needs --T or budget.T");
    const int reps = reps_arg > 0 ? reps_arg : cfg.sweep_reps;
    std::vector<double> r_grid = cfg.r_grid;
    if (r_grid.empty()) r_grid = {0.0, 0.25, 0.5, 0.75, 1.0};

    std::vector<SweepRow> rows = sweep_ratio(cfg.pipeline(), T, r_grid, reps);
    int argmin = -1;
    if (!est_path.empty()) {
        const EstimatorModel model = load_estimator(est_path);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].m1 < 1 || rows[i].m2 < 1) continue;  // estimator needs both levels
            rows[i].ghat = eval_ghat(model, {static_cast<double>(rows[i].m1),
                                             static_cast<double>(rows[i].m2)});
            if (rows[i].ghat < best) {
                best = rows[i].ghat;
                argmin = static_cast<int>(i);
            }
        }
    }
    std::ostringstream os;
    os << "#config=" << cfg.hash << "\n";
    os << "r,m1,m2,g_median,q25,q75,ghat,estimator_opt\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << g17(rows[i].r) << "," << rows[i].m1 << "," << rows[i].m2 << ","
           << g17(rows[i].g_median) << "," << g17(rows[i].q25) << "," << g17(rows[i].q75) << ",";
        if (!std::isnan(rows[i].ghat)) os << g17(rows[i].ghat);
        os << "," << (static_cast<int>(i) == argmin ? 1 : 0) << "\n";
    }
    write_text(g.out_dir + "/sweep.csv", os.str());
    std::cout << "sweep rows " << rows.size() << " file " << g.out_dir << "/sweep.csv\n";
    return 0;
}

// log-log least-squares slope of y against x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

int cmd_growth(const GlobalArgs& g) {
    const ExperimentConfig cfg = load(g);
    OutputLock lock(g.out_dir);
    const Hierarchy& h = cfg.hierarchy;
    if (h.L() < 2) throw ConfigError("growth needs at least two levels");
    if (cfg.growth_m.size() < 2) throw ConfigError("growth.m needs at least two counts");
    const int reps = cfg.growth_reps;
    const long m1_anchor = cfg.anchor.empty() ? 32 : cfg.anchor[0];

    std::vector<double> ms, c1_med, ratio_med;
    for (long m : cfg.growth_m) {
        std::vector<double> c1s, ratios;
        for (int rep = 0; rep < reps; ++rep) {
            const std::uint64_t seed = mix_seed({cfg.seed, 0x67726f777468ULL,
                                                 static_cast<std::uint64_t>(rep)});
            GramPolicy policy;
            policy.cap = static_cast<int>(m);
            NetworkState net = build_network(cfg.net, mix_seed({seed, 0x6e6574696e6974ULL, 0}));
            const SampleSet s1 = generate_samples(h, 1, static_cast<int>(m), seed, Split::train,
                                                  false, cfg.threads);
            c1s.push_back(coeff_c1(net, s1, policy, cfg.threads));

            // state entering level 2: fit level 1 at the anchor count
            OptimizerState opt = OptimizerState::make(cfg.opt, net.layout.total);
            const SampleSet train1 = generate_samples(h, 1, static_cast<int>(m1_anchor), seed,
                                                      Split::train, false, cfg.threads);
            FitOptions fo;
            fo.iters = cfg.iters;
            fo.batch = cfg.batch;
            fo.seed = mix_seed({seed, 0x6669747365656400ULL, 1});
            fo.log_interval = cfg.log_interval;
            fo.threads = cfg.threads;
            fit(net, opt, train1, fo);
            const SampleSet s2 =
                generate_samples(h, 2, static_cast<int>(m), seed, Split::train, true, cfg.threads);
            const auto [c2, d2] = coeff_cl_dl(net, s2, policy, cfg.threads);
            ratios.push_back(d2 / (c2 * c2));
        }
        std::sort(c1s.begin(), c1s.end());
        std::sort(ratios.begin(), ratios.end());
        ms.push_back(static_cast<double>(m));
        c1_med.push_back(c1s[c1s.size() / 2]);
        ratio_med.push_back(ratios[ratios.size() / 2]);
    }
    const double slope_c1 = loglog_slope(ms, c1_med);
    const double slope_ratio = loglog_slope(ms, ratio_med);

    std::ostringstream os;
    os << "#config=" << cfg.hash << "\n";
    os << "# reference slopes from the source experiments: 0.30588 (c_1), 0.40594 (d_2/c_2^2)\n";
    os << "m,c1_median,d2_over_c2sq_median\n";
    for (std::size_t i = 0; i < ms.size(); ++i)
        os << static_cast<long>(ms[i]) << "," << g17(c1_med[i]) << "," << g17(ratio_med[i]) << "\n";
    os << "slope_c1," << g17(slope_c1) << ",\n";
    os << "slope_d2_over_c2sq," << g17(slope_ratio) << ",\n";
    write_text(g.out_dir + "/growth.csv", os.str());
    std::cout << "growth slopes c1 " << g17(slope_c1) << " d2/c2^2 " << g17(slope_ratio)
              << " file " << g.out_dir << "/growth.csv\n";
    return 0;
}

int cmd_verify(const GlobalArgs& g) {
    const ExperimentConfig cfg = load(g);
    const Hierarchy& h = cfg.hierarchy;
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    h.validate();
    check("hierarchy consistent", true);

    // sample determinism and split disjointness
    const SampleSet a = generate_samples(h, 1, 2, cfg.seed, Split::train, false);
    const SampleSet b = generate_samples(h, 1, 2, cfg.seed, Split::train, false);
    bool same = true;
    for (int i = 0; i < 2; ++i) same = same && a.v[i].a == b.v[i].a && a.u[i].a == b.u[i].a;
    check("generation deterministic", same);
    const SampleSet c = generate_samples(h, 1, 2, cfg.seed, Split::validation, false);
    check("splits disjoint", c.v[0].a != a.v[0].a);

    // telescoping identity on one fine sample
    if (h.L() >= 2) {
        const SampleSet fine =
            generate_samples(h, h.L(), 1, cfg.seed, Split::test, false);
        Field sum = apply_level(h, 1, uncenter_parameter(h, fine.v[0]));
        for (int l = 2; l <= h.L(); ++l) {
            const Field fl = apply_level(h, l, uncenter_parameter(h, fine.v[0]));
            const Field fp = apply_level(h, l - 1, uncenter_parameter(h, fine.v[0]));
            for (std::size_t j = 0; j < sum.a.size(); ++j) sum.a[j] += fl.a[j] - fp.a[j];
        }
        double err = 0.0;
        for (std::size_t j = 0; j < sum.a.size(); ++j)
            err = std::max(err, std::abs(sum.a[j] - fine.u[0].a[j]));
        check("telescoping identity", err <= 1e-12);
    }

    // network round-trip and output scale
    NetworkState net = build_network(cfg.net, cfg.seed);
    const std::string tmp = g.out_dir + "/.verify.net";
    fs::create_directories(g.out_dir);
    save_checkpoint(tmp, net);
    const auto loaded = load_checkpoint(tmp);
    check("checkpoint round-trip", loaded.first.params == net.params);
    std::remove(tmp.c_str());

    const SampleSet probe = generate_samples(h, h.L(), 1, cfg.seed, Split::test, false);
    const Field out = forward(net, probe.v[0]);
    check("forward finite", finite(out));

    // one optimizer step moves parameters deterministically
    OptimizerState opt = OptimizerState::make(cfg.opt, net.layout.total);
    std::vector<const Field*> vs{&probe.v[0]}, us{&probe.u[0]};
    std::vector<double> grad;
    const double loss = loss_and_grads(net, vs, us, grad);
    check("loss finite", std::isfinite(loss));
    opt_step(opt, net, grad);
    check("optimizer step applied", hash_doubles(net.params) != hash_doubles(loaded.first.params));

    if (failures > 0) throw Error("verify: " + std::to_string(failures) + " check(s) failed");
    std::cout << "all checks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-level regression laboratory"};
    app.require_subcommand(1);
    GlobalArgs g;
    app.add_option("--config", g.config_path, "experiment config file")->envname("MLFT_CONFIG");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--seed", g.seed_override, "override the config seed");
    app.add_option("--threads", g.threads, "worker thread count");

    auto* sc_gen = app.add_subcommand("generate", "generate and store a sample set");
    int gen_level = 1, gen_count = 1;
    std::string gen_split = "train";
    bool gen_paired = false;
    sc_gen->add_option("--level", gen_level, "hierarchy level")->required();
    sc_gen->add_option("--count", gen_count, "sample count")->required();
    sc_gen->add_option("--split", gen_split, "train|validation|test");
    sc_gen->add_flag("--paired", gen_paired, "store paired previous-level targets");

    auto* sc_run = app.add_subcommand("run", "train a pipeline and write a report");
    std::string run_pipeline = "mlft", run_counts;
    int run_level = 0;
    long run_count = 0;
    double run_ratio = -1.0, run_budget = 0.0;
    sc_run->add_option("--pipeline", run_pipeline, "single|mlft|ml2mc");
    sc_run->add_option("--counts", run_counts, "per-level counts, comma separated");
    sc_run->add_option("--level", run_level, "level for the single pipeline");
    sc_run->add_option("--count", run_count, "count for the single pipeline");
    sc_run->add_option("--ratio", run_ratio, "coarse-to-total cost ratio (two levels)");
    sc_run->add_option("--budget", run_budget, "budget T used with --ratio");

    auto* sc_est = app.add_subcommand("estimate", "fit an error estimator");
    std::string est_method, est_pipeline = "mlft";
    sc_est->add_option("--method", est_method, "apriori|heuristic|lsq");
    sc_est->add_option("--pipeline", est_pipeline, "mlft|ml2mc");

    auto* sc_budget = app.add_subcommand("budget", "optimal counts under a budget");
    std::string budget_est;
    double budget_T = 0.0;
    sc_budget->add_option("--estimator", budget_est, "estimator file")->required();
    sc_budget->add_option("--T", budget_T, "total budget");

    auto* sc_sweep = app.add_subcommand("sweep", "coarse-to-total ratio sweep");
    double sweep_T = 0.0;
    int sweep_reps = 0;
    std::string sweep_est;
    sc_sweep->add_option("--T", sweep_T, "total budget");
    sc_sweep->add_option("--reps", sweep_reps, "repetitions per ratio");
    sc_sweep->add_option("--estimator", sweep_est, "estimator file for the overlay");

    auto* sc_growth = app.add_subcommand("growth", "coefficient growth diagnostic");
    auto* sc_verify = app.add_subcommand("verify", "run the invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc_gen->parsed()) return cmd_generate(g, gen_level, gen_count, gen_split, gen_paired);
        if (sc_run->parsed())
            return cmd_run(g, run_pipeline, run_counts, run_level, run_count, run_ratio, run_budget);
        if (sc_est->parsed()) return cmd_estimate(g, est_method, est_pipeline);
        if (sc_budget->parsed()) return cmd_budget(g, budget_est, budget_T);
        if (sc_sweep->parsed()) return cmd_sweep(g, sweep_T, sweep_reps, sweep_est);
        if (sc_growth->parsed()) return cmd_growth(g);
        if (sc_verify->parsed()) return cmd_verify(g);
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return 3;
    } catch (const TrainingError& e) {
        std::cerr << "error: training: " << e.what() << "\n";
        return 4;
    } catch (const KernelError& e) {
        std::cerr << "error: kernel: " << e.what() << "\n";
        return 5;
    } catch (const BudgetError& e) {
        std::cerr << "error: budget: " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
