#pragma once

/// MLFTNET1 checkpoints: a text header describing the architecture and
/// optimizer, then raw little-endian f64 blocks for parameters and optimizer
/// slots.  Save/load round-trips bit-exactly so resumed runs continue the
/// exact same trajectory.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "mlft/net.hpp"

namespace mlft {

namespace detail {

inline std::string fmt_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_doubles(std::ostream& os, const std::vector<double>& a) {
    if (!a.empty())
        os.write(reinterpret_cast<const char*>(a.data()),
                 static_cast<std::streamsize>(a.size() * sizeof(double)));
}

inline void read_doubles(std::istream& is, std::vector<double>& a, std::size_t count,
                         const char* what) {
    a.resize(count);
    if (count == 0) return;
    is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double))
        throw ConfigError(std::string("checkpoint: truncated ") + what);
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const NetworkState& net,
                            const OptimizerState* opt = nullptr) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("checkpoint: cannot open " + path + " for writing");
    os << "MLFTNET1\n";
    os << "dim " << net.spec.dim << "\n";
    os << "n_input " << net.spec.n_input << "\n";
    os << "transfer_window " << net.spec.transfer_window << "\n";
    os << "gamma " << detail::fmt_g17(net.spec.gamma) << "\n";
    os << "branches " << net.spec.branches.size() << "\n";
    for (const BranchSpec& b : net.spec.branches)
        os << "branch " << b.n_sub << " " << b.depth << " " << b.channels << " " << b.conv_window
           << "\n";
    if (opt) {
        if (opt->spec.kind == OptimizerSpec::Kind::momentum)
            os << "opt momentum " << detail::fmt_g17(opt->spec.lr) << " "
               << detail::fmt_g17(opt->spec.mu) << "\n";
        else
            os << "opt adam " << detail::fmt_g17(opt->spec.lr) << " "
               << detail::fmt_g17(opt->spec.beta1) << " " << detail::fmt_g17(opt->spec.beta2) << " "
               << detail::fmt_g17(opt->spec.eps) << "\n";
        os << "steps " << opt->step_count << "\n";
    } else {
        os << "opt none\n";
    }
    os << "params " << net.params.size() << "\n";
    detail::write_doubles(os, net.params);
    if (opt) {
        detail::write_doubles(os, opt->slot1);
        detail::write_doubles(os, opt->slot2);
    }
    if (!os) throw ConfigError("checkpoint: write failed for " + path);
}

inline std::pair<NetworkState, OptimizerState> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("checkpoint: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "MLFTNET1")
        throw ConfigError("checkpoint: bad magic in " + path);

    NetworkSpec spec;
    spec.branches.clear();
    OptimizerSpec ospec;
    bool have_opt = false;
    long steps = 0;
    std::size_t nparams = 0;
    std::size_t want_branches = 0;
    bool saw_params = false;
    while (!saw_params && std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dim") ls >> spec.dim;
        else if (key == "n_input") ls >> spec.n_input;
        else if (key == "transfer_window") ls >> spec.transfer_window;
        else if (key == "gamma") ls >> spec.gamma;
        else if (key == "branches") ls >> want_branches;
        else if (key == "branch") {
            BranchSpec b;
            ls >> b.n_sub >> b.depth >> b.channels >> b.conv_window;
            spec.branches.push_back(b);
        } else if (key == "opt") {
            std::string kind;
            ls >> kind;
            if (kind == "momentum") {
                ospec.kind = OptimizerSpec::Kind::momentum;
                ls >> ospec.lr >> ospec.mu;
                have_opt = true;
            } else if (kind == "adam") {
                ospec.kind = OptimizerSpec::Kind::adam;
                ls >> ospec.lr >> ospec.beta1 >> ospec.beta2 >> ospec.eps;
                have_opt = true;
            } else if (kind != "none") {
                throw ConfigError("checkpoint: unknown optimizer '" + kind + "'");
            }
        } else if (key == "steps") {
            ls >> steps;
        } else if (key == "params") {
            ls >> nparams;
            saw_params = true;
        } else {
            throw ConfigError("checkpoint: unknown header key '" + key + "'");
        }
        if (ls.fail()) throw ConfigError("checkpoint: malformed header line '" + line + "'");
    }
    if (!saw_params) throw ConfigError("checkpoint: missing params line in " + path);
    if (spec.branches.size() != want_branches)
        throw ConfigError("checkpoint: branch count mismatch in " + path);

    NetworkState net;
    net.spec = spec;
    net.layout = build_layout(spec);
    if (net.layout.total != nparams)
        throw ConfigError("checkpoint: parameter count does not match architecture");
    detail::read_doubles(is, net.params, nparams, "parameters");

    OptimizerState opt;
    if (have_opt) {
        opt = OptimizerState::make(ospec, nparams);
        opt.step_count = steps;
        detail::read_doubles(is, opt.slot1, nparams, "optimizer slot");
        if (ospec.kind == OptimizerSpec::Kind::adam)
            detail::read_doubles(is, opt.slot2, nparams, "optimizer slot");
    }
    return {std::move(net), std::move(opt)};
}

}  // namespace mlft
