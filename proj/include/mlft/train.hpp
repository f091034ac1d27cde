#pragma once

/// Training pipelines: single-level regression, multi-level fine-tuning
/// (one network, one optimizer, state never reset between levels), and
/// ML2MC (independent networks fitting the telescoping gaps, summed at
/// prediction time).  Also the error metrics, the coarse-to-total ratio
/// sweep, and run-report serialization.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "mlft/budget.hpp"
#include "mlft/core.hpp"
#include "mlft/estimate.hpp"
#include "mlft/hash.hpp"
#include "mlft/levels.hpp"
#include "mlft/net.hpp"
#include "mlft/net_io.hpp"

namespace mlft {

struct PipelineConfig {
    Hierarchy hierarchy;
    NetworkSpec net;
    OptimizerSpec opt;
    int iters_per_level = 2000;
    int batch = 32;
    int log_interval = 50;
    int val_m = 16;   // per-level validation split size
    int test_m = 32;  // finest-level test split size
    std::uint64_t seed = 0;
    int threads = 1;
};

struct EvalResult {
    double g_test = 0.0, g_train = 0.0, g = 0.0;
    bool clamped = false;
};

/// g_test = mean vec2 error on the test split; g_train likewise on the
/// training split; g = g_test - g_train when a training set is given
/// (clamped at zero), else the pure testing error.
inline EvalResult evaluate(const std::function<Field(const Field&)>& predict,
                           const SampleSet& test, const SampleSet* train = nullptr) {
    if (test.count() == 0) throw ConfigError("evaluate: empty test set");
    auto mean_err = [&](const SampleSet& s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.count(); ++i) {
            const Field p = predict(s.v[i]);
            double e2 = 0.0;
            for (std::size_t j = 0; j < p.a.size(); ++j) {
                const double r = s.u[i].a[j] - p.a[j];
                e2 += r * r;
            }
            acc += std::sqrt(e2);
        }
        return acc / static_cast<double>(s.count());
    };
    EvalResult r;
    r.g_test = mean_err(test);
    if (train) {
        r.g_train = mean_err(*train);
        r.g = r.g_test - r.g_train;
        if (r.g < 0.0) {
            r.g = 0.0;
            r.clamped = true;
        }
    } else {
        r.g = r.g_test;
    }
    return r;
}

struct RunReport {
    std::string pipeline;     // single | mlft | ml2mc
    int single_level = 0;     // set for the single pipeline
    std::vector<long> counts; // M_1..M_L (zeros for unused levels)
    std::vector<LossCurve> curves;
    double g_test = 0.0, g_train = 0.0, g = 0.0;
    double e_level = std::nan("");  // distance of the trained level to the finest, single only
    bool g_clamped = false;
    std::vector<double> g_levels;  // per-level validation g_l (train term subtracted)
    std::vector<double> gaps;      // validation gap estimates eh_2..eh_L
    double threshold = std::nan("");  // level-L train-MSE threshold (gap-derived)
    long iters_to_threshold = -1;
    std::vector<std::uint64_t> level_entry_hash, level_exit_hash;  // parameter continuity
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> notes;
};

namespace detail {

constexpr std::uint64_t kNetStream = 0x6e6574696e6974ULL;
constexpr std::uint64_t kFitStream = 0x6669747365656400ULL;

inline double mean_vec2_gap(const SampleSet& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.count(); ++i) {
        double e2 = 0.0;
        for (std::size_t j = 0; j < s.u[i].a.size(); ++j) {
            const double r = s.u[i].a[j] - s.u_prev[i].a[j];
            e2 += r * r;
        }
        acc += std::sqrt(e2);
    }
    return acc / static_cast<double>(s.count());
}

// Train-MSE threshold separating the two finest levels: a quarter of the
// mean squared grid norm of (f_L - f_{L-1}) on the level-L validation split.
// Derived purely from data, so both pipelines race toward the same bar.
inline double gap_threshold(const SampleSet& val_L) {
    const double hw = std::pow(val_L.grid.h(), val_L.grid.dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < val_L.count(); ++i) {
        double e2 = 0.0;
        for (std::size_t j = 0; j < val_L.u[i].a.size(); ++j) {
            const double r = val_L.u[i].a[j] - val_L.u_prev[i].a[j];
            e2 += r * r;
        }
        acc += hw * e2;
    }
    return 0.25 * acc / static_cast<double>(val_L.count());
}

inline long first_below(const LossCurve& c, double threshold) {
    for (std::size_t i = 0; i < c.iteration.size(); ++i)
        if (c.train_mse[i] <= threshold) return c.iteration[i];
    return -1;
}

// Validation g_l with the level's training error subtracted and clamped.
inline double level_g(const std::function<Field(const Field&)>& predict, const SampleSet& val,
                      const SampleSet& train, const std::vector<Field>& val_targets,
                      const std::vector<Field>& train_targets, RunReport& rep) {
    auto mean_err = [&](const SampleSet& s, const std::vector<Field>& targets) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.count(); ++i) {
            const Field p = predict(s.v[i]);
            double e2 = 0.0;
            for (std::size_t j = 0; j < p.a.size(); ++j) {
                const double r = targets[i].a[j] - p.a[j];
                e2 += r * r;
            }
            acc += std::sqrt(e2);
        }
        return acc / static_cast<double>(s.count());
    };
    double g = mean_err(val, val_targets) - mean_err(train, train_targets);
    if (g < 0.0) {
        g = 0.0;
        rep.notes.push_back("level g clamped to 0 (training error exceeded validation error)");
    }
    return g;
}

inline std::vector<Field> gap_targets(const SampleSet& s) {
    std::vector<Field> t;
    t.reserve(s.count());
    for (std::size_t i = 0; i < s.count(); ++i) {
        Field g = s.u[i];
        for (std::size_t j = 0; j < g.a.size(); ++j) g.a[j] -= s.u_prev[i].a[j];
        t.push_back(std::move(g));
    }
    return t;
}

}  // namespace detail

/// Fresh network trained at one level; error metrics against the finest
/// test split (with the training term subtracted only when the trained
/// level is the finest).
inline RunReport train_single_level(const PipelineConfig& cfg, int level, long m) {
    const auto t0 = std::chrono::steady_clock::now();
    if (m < 1) throw ConfigError("single: sample count must be >= 1");
    const Hierarchy& h = cfg.hierarchy;
    const int L = h.L();
    RunReport rep;
    rep.pipeline = "single";
    rep.single_level = level;
    rep.seed = cfg.seed;
    rep.counts.assign(L, 0);
    rep.counts[level - 1] = m;

    const SampleSet test = generate_samples(h, L, cfg.test_m, cfg.seed, Split::test, false, cfg.threads);
    const SampleSet train =
        generate_samples(h, level, static_cast<int>(m), cfg.seed, Split::train, false, cfg.threads);

    NetworkState net = build_network(cfg.net, mix_seed({cfg.seed, detail::kNetStream, 0}));
    OptimizerState opt = OptimizerState::make(cfg.opt, net.layout.total);
    FitOptions fo;
    fo.iters = cfg.iters_per_level;
    fo.batch = cfg.batch;
    fo.seed = mix_seed({cfg.seed, detail::kFitStream, static_cast<std::uint64_t>(level)});
    fo.log_interval = cfg.log_interval;
    fo.eval = &test;
    fo.threads = cfg.threads;
    rep.level_entry_hash.push_back(hash_doubles(net.params));
    rep.curves.push_back(fit(net, opt, train, fo));
    rep.level_exit_hash.push_back(hash_doubles(net.params));

    auto predict = [&](const Field& v) { return forward(net, v); };
    const EvalResult ev = evaluate(predict, test, level == L ? &train : nullptr);
    rep.g_test = ev.g_test;
    rep.g_train = ev.g_train;
    rep.g = ev.g;
    rep.g_clamped = ev.clamped;
    if (level < L) {
        // distance of the trained level's solver to the finest on the test split
        double acc = 0.0;
        for (std::size_t i = 0; i < test.count(); ++i) {
            const Field ul = apply_level(h, level, uncenter_parameter(h, test.v[i]));
            double e2 = 0.0;
            for (std::size_t j = 0; j < ul.a.size(); ++j) {
                const double r = test.u[i].a[j] - ul.a[j];
                e2 += r * r;
            }
            acc += std::sqrt(e2);
        }
        rep.e_level = acc / static_cast<double>(test.count());
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// One network, one optimizer, fitted level by level on fresh samples;
/// parameters and optimizer state carry over untouched between levels.
inline RunReport run_mlft(const PipelineConfig& cfg, const std::vector<long>& counts) {
    const auto t0 = std::chrono::steady_clock::now();
    const Hierarchy& h = cfg.hierarchy;
    const int L = h.L();
    if (static_cast<int>(counts.size()) != L) throw ConfigError("mlft: counts length mismatch");
    for (long c : counts)
        if (c < 1) throw ConfigError("mlft: counts must be positive");
    RunReport rep;
    rep.pipeline = "mlft";
    rep.seed = cfg.seed;
    rep.counts = counts;

    const SampleSet test = generate_samples(h, L, cfg.test_m, cfg.seed, Split::test, false, cfg.threads);
    NetworkState net = build_network(cfg.net, mix_seed({cfg.seed, detail::kNetStream, 0}));
    OptimizerState opt = OptimizerState::make(cfg.opt, net.layout.total);
    auto predict = [&](const Field& v) { return forward(net, v); };

    SampleSet train_L;
    for (int l = 1; l <= L; ++l) {
        const SampleSet train = generate_samples(h, l, static_cast<int>(counts[l - 1]), cfg.seed,
                                                 Split::train, false, cfg.threads);
        const SampleSet val =
            generate_samples(h, l, cfg.val_m, cfg.seed, Split::validation, l >= 2, cfg.threads);
        FitOptions fo;
        fo.iters = cfg.iters_per_level;
        fo.batch = cfg.batch;
        fo.seed = mix_seed({cfg.seed, detail::kFitStream, static_cast<std::uint64_t>(l)});
        fo.log_interval = cfg.log_interval;
        fo.eval = &test;
        fo.threads = cfg.threads;
        rep.level_entry_hash.push_back(hash_doubles(net.params));
        try {
            rep.curves.push_back(fit(net, opt, train, fo));
        } catch (const TrainingError& e) {
            throw TrainingError("level " + std::to_string(l) + ": " + e.what());
        }
        rep.level_exit_hash.push_back(hash_doubles(net.params));
        rep.g_levels.push_back(detail::level_g(predict, val, train, val.u, train.u, rep));
        if (l >= 2) {
            rep.gaps.push_back(detail::mean_vec2_gap(val));
            if (l == L) {
                rep.threshold = detail::gap_threshold(val);
                rep.iters_to_threshold = detail::first_below(rep.curves.back(), rep.threshold);
            }
        }
        if (l == L) train_L = train;
    }

    const EvalResult ev = evaluate(predict, test, &train_L);
    rep.g_test = ev.g_test;
    rep.g_train = ev.g_train;
    rep.g = ev.g;
    rep.g_clamped = ev.clamped;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// L independently seeded networks: net 1 fits level 1, net l fits the gap
/// f_l - f_{l-1} from paired samples; the predictor is the sum.
inline RunReport run_ml2mc(const PipelineConfig& cfg, const std::vector<long>& counts) {
    const auto t0 = std::chrono::steady_clock::now();
    const Hierarchy& h = cfg.hierarchy;
    const int L = h.L();
    if (static_cast<int>(counts.size()) != L) throw ConfigError("ml2mc: counts length mismatch");
    for (long c : counts)
        if (c < 1) throw ConfigError("ml2mc: counts must be positive");
    RunReport rep;
    rep.pipeline = "ml2mc";
    rep.seed = cfg.seed;
    rep.counts = counts;

    const SampleSet test = generate_samples(h, L, cfg.test_m, cfg.seed, Split::test, false, cfg.threads);
    std::vector<NetworkState> nets;
    nets.reserve(L);
    for (int l = 1; l <= L; ++l) {
        const SampleSet train = generate_samples(h, l, static_cast<int>(counts[l - 1]), cfg.seed,
                                                 Split::train, l >= 2, cfg.threads);
        const SampleSet val =
            generate_samples(h, l, cfg.val_m, cfg.seed, Split::validation, l >= 2, cfg.threads);
        NetworkState net =
            build_network(cfg.net, mix_seed({cfg.seed, detail::kNetStream, static_cast<std::uint64_t>(l)}));
        OptimizerState opt = OptimizerState::make(cfg.opt, net.layout.total);

        SampleSet fit_train = train;  // gap targets for l >= 2
        SampleSet fit_val = val;
        if (l >= 2) {
            fit_train.u = detail::gap_targets(train);
            fit_train.u_prev.clear();
            fit_val.u = detail::gap_targets(val);
            fit_val.u_prev.clear();
        }
        FitOptions fo;
        fo.iters = cfg.iters_per_level;
        fo.batch = cfg.batch;
        fo.seed = mix_seed({cfg.seed, detail::kFitStream, static_cast<std::uint64_t>(l)});
        fo.log_interval = cfg.log_interval;
        fo.eval = &fit_val;
        fo.threads = cfg.threads;
        rep.level_entry_hash.push_back(hash_doubles(net.params));
        try {
            rep.curves.push_back(fit(net, opt, fit_train, fo));
        } catch (const TrainingError& e) {
            throw TrainingError("network " + std::to_string(l) + ": " + e.what());
        }
        rep.level_exit_hash.push_back(hash_doubles(net.params));
        auto predict_one = [&](const Field& v) { return forward(net, v); };
        rep.g_levels.push_back(
            detail::level_g(predict_one, val, train, fit_val.u, fit_train.u, rep));
        if (l >= 2) {
            rep.gaps.push_back(detail::mean_vec2_gap(val));
            if (l == L) {
                rep.threshold = detail::gap_threshold(val);
                rep.iters_to_threshold = detail::first_below(rep.curves.back(), rep.threshold);
            }
        }
        nets.push_back(std::move(net));
    }

    auto predict_sum = [&](const Field& v) {
        Field out = forward(nets[0], v);
        for (int l = 1; l < L; ++l) {
            const Field part = forward(nets[l], v);
            for (std::size_t j = 0; j < out.a.size(); ++j) out.a[j] += part.a[j];
        }
        return out;
    };
    const EvalResult ev = evaluate(predict_sum, test, nullptr);  // testing-only form
    rep.g_test = ev.g_test;
    rep.g_train = 0.0;
    rep.g = ev.g;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// ratio sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double r = 0.0;
    long m1 = 0, m2 = 0;
    double g_median = 0.0, q25 = 0.0, q75 = 0.0;
    double ghat = std::nan("");  // estimator overlay, filled by the caller
};

namespace detail {

inline double sorted_quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace detail

/// For each ratio r: counts via the cost split, endpoint ratios run the
/// single-level pipeline, interior ratios run MLFT; repeated over derived
/// seeds, medians and quartiles reported.
inline std::vector<SweepRow> sweep_ratio(const PipelineConfig& cfg, double T,
                                         const std::vector<double>& r_grid, int reps) {
    const Hierarchy& h = cfg.hierarchy;
    if (h.L() != 2) throw ConfigError("sweep: requires a two-level hierarchy");
    if (reps < 1) throw ConfigError("sweep: repetitions must be >= 1");
    const double t1 = h.level(1).cost, t2 = h.level(2).cost;
    std::vector<SweepRow> rows;
    for (double r : r_grid) {
        const auto [m1, m2] = ratio_to_counts(r, T, t1, t2);
        SweepRow row;
        row.r = r;
        row.m1 = m1;
        row.m2 = m2;
        std::vector<double> gs;
        for (int rep = 0; rep < reps; ++rep) {
            PipelineConfig c = cfg;
            c.seed = mix_seed({cfg.seed, 0x72657073ULL, static_cast<std::uint64_t>(rep)});
            RunReport out;
            if (m1 == 0) out = train_single_level(c, 2, m2);
            else if (m2 == 0) out = train_single_level(c, 1, m1);
            else out = run_mlft(c, {m1, m2});
            gs.push_back(out.g);
        }
        row.g_median = detail::sorted_quantile(gs, 0.5);
        row.q25 = detail::sorted_quantile(gs, 0.25);
        row.q75 = detail::sorted_quantile(gs, 0.75);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string g17s(double x) {
    char b[64];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

}  // namespace detail

/// Writes report.txt (human summary, includes wall-clock), per-level
/// loss_curve_l<k>.csv, and metrics.csv (machine-readable, wall-clock free
/// so reruns are byte-identical).
inline void write_report(const std::string& dir, const RunReport& rep,
                         const std::string& config_hash) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream os(dir + "/report.txt");
        os << "pipeline " << rep.pipeline << "\n";
        os << "config " << config_hash << "\n";
        os << "seed " << rep.seed << "\n";
        if (rep.single_level > 0) os << "level " << rep.single_level << "\n";
        os << "counts";
        for (long c : rep.counts) os << " " << c;
        os << "\n";
        os << "g_test " << detail::g17s(rep.g_test) << "\n";
        os << "g_train " << detail::g17s(rep.g_train) << "\n";
        os << "g " << detail::g17s(rep.g) << "\n";
        if (!std::isnan(rep.e_level)) os << "e_level " << detail::g17s(rep.e_level) << "\n";
        for (std::size_t l = 0; l < rep.g_levels.size(); ++l)
            os << "g_level_" << (l + 1) << " " << detail::g17s(rep.g_levels[l]) << "\n";
        for (std::size_t l = 0; l < rep.gaps.size(); ++l)
            os << "gap_" << (l + 2) << " " << detail::g17s(rep.gaps[l]) << "\n";
        if (!std::isnan(rep.threshold)) {
            os << "threshold " << detail::g17s(rep.threshold) << "\n";
            os << "iters_to_threshold " << rep.iters_to_threshold << "\n";
        }
        for (std::size_t l = 0; l < rep.level_entry_hash.size(); ++l)
            os << "params_l" << (l + 1) << " " << hash_hex(rep.level_entry_hash[l]) << " -> "
               << hash_hex(rep.level_exit_hash[l]) << "\n";
        for (const std::string& n : rep.notes) os << "note " << n << "\n";
        os << "wall_seconds " << detail::g17s(rep.wall_seconds) << "\n";
    }
    for (std::size_t k = 0; k < rep.curves.size(); ++k) {
        std::ofstream os(dir + "/loss_curve_l" + std::to_string(k + 1) + ".csv");
        os << "#config=" << config_hash << "\n";
        os << "iteration,train_mse,test_mse\n";
        const LossCurve& c = rep.curves[k];
        for (std::size_t i = 0; i < c.iteration.size(); ++i)
            os << c.iteration[i] << "," << detail::g17s(c.train_mse[i]) << ","
               << detail::g17s(c.test_mse[i]) << "\n";
    }
    {
        std::ofstream os(dir + "/metrics.csv");
        os << "#config=" << config_hash << "\n";
        os << "key,value\n";
        os << "pipeline," << rep.pipeline << "\n";
        os << "seed," << rep.seed << "\n";
        for (std::size_t l = 0; l < rep.counts.size(); ++l)
            os << "m" << (l + 1) << "," << rep.counts[l] << "\n";
        os << "g_test," << detail::g17s(rep.g_test) << "\n";
        os << "g_train," << detail::g17s(rep.g_train) << "\n";
        os << "g," << detail::g17s(rep.g) << "\n";
        if (!std::isnan(rep.e_level)) os << "e_level," << detail::g17s(rep.e_level) << "\n";
        for (std::size_t l = 0; l < rep.g_levels.size(); ++l)
            os << "g_level_" << (l + 1) << "," << detail::g17s(rep.g_levels[l]) << "\n";
        for (std::size_t l = 0; l < rep.gaps.size(); ++l)
            os << "gap_" << (l + 2) << "," << detail::g17s(rep.gaps[l]) << "\n";
        if (!std::isnan(rep.threshold)) {
            os << "threshold," << detail::g17s(rep.threshold) << "\n";
            os << "iters_to_threshold," << rep.iters_to_threshold << "\n";
        }
        for (std::size_t l = 0; l < rep.level_entry_hash.size(); ++l)
            os << "params_l" << (l + 1) << "," << hash_hex(rep.level_entry_hash[l]) << ":"
               << hash_hex(rep.level_exit_hash[l]) << "\n";
    }
}

}  // namespace mlft
