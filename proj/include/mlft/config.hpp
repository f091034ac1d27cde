#pragma once

/// Plain-text experiment configuration: one `key value` pair per line,
/// `#` comments, keys namespaced by dots.  The raw file is retained verbatim
/// (it is copied into report directories) and its FNV hash stamps every
/// output so artifacts from different configurations cannot be mixed
/// silently.  Unknown keys are errors.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mlft/hash.hpp"
#include "mlft/train.hpp"

namespace mlft {

struct ExperimentConfig {
    std::string raw;   // file contents, verbatim
    std::string hash;  // hex FNV-1a of raw

    Hierarchy hierarchy;
    NetworkSpec net;
    OptimizerSpec opt;
    int iters = 2000;
    int batch = 32;
    int log_interval = 50;
    int val_m = 16;
    int test_m = 32;
    std::uint64_t seed = 1;
    int threads = 1;

    std::string est_method = "heuristic";  // apriori | heuristic | lsq
    std::vector<long> anchor;              // anchor-trial counts M_1..M_L
    std::vector<std::vector<long>> lsq_trials;
    int gram_cap = 16;

    double budget_T = 0.0;
    std::vector<double> r_grid;
    int sweep_reps = 5;
    std::vector<long> growth_m;
    int growth_reps = 3;

    PipelineConfig pipeline() const {
        PipelineConfig p;
        p.hierarchy = hierarchy;
        p.net = net;
        p.opt = opt;
        p.iters_per_level = iters;
        p.batch = batch;
        p.log_interval = log_interval;
        p.val_m = val_m;
        p.test_m = test_m;
        p.seed = seed;
        p.threads = threads;
        return p;
    }
};

namespace detail {

inline std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline long to_long(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer '" + s + "' for " + key);
    }
}

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number '" + s + "' for " + key);
    }
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.raw = text;
    cfg.hash = hash_hex(hash_string(text));
    Hierarchy& h = cfg.hierarchy;
    bool saw_problem = false;
    int shared_depth = 4, shared_channels = 32, shared_window = 7;
    std::vector<int> branch_ns;

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hashpos = line.find('#');
        if (hashpos != std::string::npos) line.erase(hashpos);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string value;
        std::getline(ls, value);
        const std::size_t b = value.find_first_not_of(" \t");
        value = (b == std::string::npos) ? std::string() : value.substr(b);
        const std::size_t e = value.find_last_not_of(" \t\r");
        if (e != std::string::npos) value.erase(e + 1);
        if (value.empty())
            throw ConfigError("config: missing value for '" + key + "' on line " +
                              std::to_string(lineno));
        auto ld = [&] { return detail::to_double(value, key); };
        auto li = [&] { return detail::to_long(value, key); };

        if (key == "problem") {
            if (value == "nls") h.problem = Problem::nls;
            else if (value == "burgers") h.problem = Problem::burgers;
            else if (value == "elliptic") h.problem = Problem::elliptic;
            else throw ConfigError("config: unknown problem '" + value + "'");
            h.dim = (h.problem == Problem::elliptic) ? 2 : 1;
            saw_problem = true;
        } else if (key == "levels") {
            h.levels.resize(static_cast<std::size_t>(li()));
            for (std::size_t i = 0; i < h.levels.size(); ++i)
                h.levels[i].index = static_cast<int>(i) + 1;
        } else if (key.rfind("level.", 0) == 0) {
            const std::vector<std::string> parts = detail::split_on(key, '.');
            if (parts.size() != 3) throw ConfigError("config: bad level key '" + key + "'");
            const long idx = detail::to_long(parts[1], key);
            if (idx < 1 || idx > static_cast<long>(h.levels.size()))
                throw ConfigError("config: level index out of range in '" + key + "'");
            if (parts[2] == "n") h.levels[idx - 1].n = static_cast<int>(li());
            else if (parts[2] == "cost") h.levels[idx - 1].cost = ld();
            else throw ConfigError("config: unknown level field '" + key + "'");
        } else if (key == "restriction") {
            if (value == "fourier") h.transfer.restriction = Restriction::fourier;
            else if (value == "average") h.transfer.restriction = Restriction::average;
            else throw ConfigError("config: unknown restriction '" + value + "'");
        } else if (key == "interpolation") {
            if (value == "cubic") h.transfer.interpolation = Interpolation::cubic;
            else if (value == "linear") h.transfer.interpolation = Interpolation::linear;
            else throw ConfigError("config: unknown interpolation '" + value + "'");
        } else if (key == "nls.beta") h.params.nls.beta = ld();
        else if (key == "nls.tau") h.params.nls.tau = ld();
        else if (key == "nls.tol") h.params.nls.tol = ld();
        else if (key == "nls.max_iters") h.params.nls.max_iters = static_cast<int>(li());
        else if (key == "nls.k_terms") h.params.nls_dist.k_terms = static_cast<int>(li());
        else if (key == "nls.alpha") h.params.nls_dist.alpha = ld();
        else if (key == "nls.amp_lo") h.params.nls_dist.amp_lo = ld();
        else if (key == "nls.amp_hi") h.params.nls_dist.amp_hi = ld();
        else if (key == "nls.omega_lo") h.params.nls_dist.omega_lo = ld();
        else if (key == "nls.omega_hi") h.params.nls_dist.omega_hi = ld();
        else if (key == "nls.inv_sigma_lo") h.params.nls_dist.inv_sigma_lo = ld();
        else if (key == "nls.inv_sigma_hi") h.params.nls_dist.inv_sigma_hi = ld();
        else if (key == "burgers.kappa") h.params.burgers.kappa = ld();
        else if (key == "burgers.t_term") h.params.burgers.t_term = ld();
        else if (key == "burgers.dt_factor") h.params.burgers.dt_factor = ld();
        else if (key == "burgers.k_steps") h.params.burgers.k_steps = static_cast<int>(li());
        else if (key == "elliptic.k_terms") h.params.elliptic.k_terms = static_cast<int>(li());
        else if (key == "elliptic.c_shift") h.params.elliptic.c_shift = ld();
        else if (key == "elliptic.amp_sigma") h.params.elliptic.amp_sigma = ld();
        else if (key == "net.branches") {
            branch_ns.clear();
            for (const std::string& tok : detail::split_on(value, ','))
                branch_ns.push_back(static_cast<int>(detail::to_long(tok, key)));
        } else if (key == "net.depth") shared_depth = static_cast<int>(li());
        else if (key == "net.channels") shared_channels = static_cast<int>(li());
        else if (key == "net.conv_window") shared_window = static_cast<int>(li());
        else if (key == "net.transfer_window") cfg.net.transfer_window = static_cast<int>(li());
        else if (key == "net.gamma") cfg.net.gamma = ld();
        else if (key == "opt.kind") {
            if (value == "momentum") cfg.opt.kind = OptimizerSpec::Kind::momentum;
            else if (value == "adam") cfg.opt.kind = OptimizerSpec::Kind::adam;
            else throw ConfigError("config: unknown optimizer '" + value + "'");
        } else if (key == "opt.lr") cfg.opt.lr = ld();
        else if (key == "opt.mu") cfg.opt.mu = ld();
        else if (key == "opt.beta1") cfg.opt.beta1 = ld();
        else if (key == "opt.beta2") cfg.opt.beta2 = ld();
        else if (key == "opt.eps") cfg.opt.eps = ld();
        else if (key == "train.iters") cfg.iters = static_cast<int>(li());
        else if (key == "train.batch") cfg.batch = static_cast<int>(li());
        else if (key == "train.log_interval") cfg.log_interval = static_cast<int>(li());
        else if (key == "train.val_m") cfg.val_m = static_cast<int>(li());
        else if (key == "train.test_m") cfg.test_m = static_cast<int>(li());
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(li());
        else if (key == "threads") cfg.threads = static_cast<int>(li());
        else if (key == "estimator.method") {
            if (value != "apriori" && value != "heuristic" && value != "lsq")
                throw ConfigError("config: unknown estimator method '" + value + "'");
            cfg.est_method = value;
        } else if (key == "estimator.anchor") {
            cfg.anchor.clear();
            for (const std::string& tok : detail::split_on(value, ','))
                cfg.anchor.push_back(detail::to_long(tok, key));
        } else if (key == "estimator.trials") {
            cfg.lsq_trials.clear();
            for (const std::string& grp : detail::split_on(value, ';')) {
                std::vector<long> counts;
                for (const std::string& tok : detail::split_on(grp, ','))
                    counts.push_back(detail::to_long(tok, key));
                cfg.lsq_trials.push_back(std::move(counts));
            }
        } else if (key == "estimator.cap") cfg.gram_cap = static_cast<int>(li());
        else if (key == "budget.T") cfg.budget_T = ld();
        else if (key == "sweep.r") {
            cfg.r_grid.clear();
            for (const std::string& tok : detail::split_on(value, ','))
                cfg.r_grid.push_back(detail::to_double(tok, key));
        } else if (key == "sweep.reps") cfg.sweep_reps = static_cast<int>(li());
        else if (key == "growth.m") {
            cfg.growth_m.clear();
            for (const std::string& tok : detail::split_on(value, ','))
                cfg.growth_m.push_back(detail::to_long(tok, key));
        } else if (key == "growth.reps") cfg.growth_reps = static_cast<int>(li());
        else throw ConfigError("config: unknown key '" + key + "' on line " + std::to_string(lineno));
    }

    if (!saw_problem) throw ConfigError("config: missing 'problem'");
    if (h.levels.empty()) throw ConfigError("config: missing 'levels'");
    for (const LevelSpec& lv : h.levels)
        if (lv.n <= 0) throw ConfigError("config: level.<i>.n missing");
    h.validate();

    cfg.net.dim = h.dim;
    cfg.net.n_input = h.finest().n;
    if (branch_ns.empty()) branch_ns = {h.finest().n};
    cfg.net.branches.clear();
    for (int ns : branch_ns) {
        BranchSpec b;
        b.n_sub = ns;
        b.depth = shared_depth;
        b.channels = shared_channels;
        b.conv_window = shared_window;
        cfg.net.branches.push_back(b);
    }
    cfg.net.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace mlft
