#pragma once

/// Dataset persistence.  Format MLFTDS1: one ASCII header line
///   MLFTDS1 dim=<d> n=<N> level=<l> count=<M> split=<s> seed=<u64> paired=<0|1>
/// followed by raw little-endian 64-bit floats, per sample v then u (then
/// u_prev when paired), row-major.  A sidecar text file (<path>.txt) repeats
/// the header plus the generating configuration for auditability.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "mlft/core.hpp"
#include "mlft/levels.hpp"

namespace mlft {

namespace detail {

inline void write_f64_block(std::ostream& os, const std::vector<double>& a) {
    // x86-64 doubles are little-endian IEEE-754 already
    os.write(reinterpret_cast<const char*>(a.data()),
             static_cast<std::streamsize>(a.size() * sizeof(double)));
}

inline void read_f64_block(std::istream& is, std::vector<double>& a) {
    is.read(reinterpret_cast<char*>(a.data()),
            static_cast<std::streamsize>(a.size() * sizeof(double)));
    if (!is) throw ConfigError("dataset: truncated value block");
}

}  // namespace detail

inline std::string dataset_header(const SampleSet& s) {
    std::ostringstream os;
    os << "MLFTDS1 dim=" << s.grid.dim << " n=" << s.grid.n << " level=" << s.level
       << " count=" << s.count() << " split=" << split_name(s.split) << " seed=" << s.seed
       << " paired=" << (s.paired ? 1 : 0);
    return os.str();
}

inline void write_sampleset(const std::string& path, const SampleSet& s,
                            const std::string& sidecar_config = "") {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("dataset: cannot open " + path + " for writing");
    os << dataset_header(s) << "\n";
    for (std::size_t i = 0; i < s.count(); ++i) {
        detail::write_f64_block(os, s.v[i].a);
        detail::write_f64_block(os, s.u[i].a);
        if (s.paired) detail::write_f64_block(os, s.u_prev[i].a);
    }
    if (!os) throw ConfigError("dataset: write failed for " + path);

    std::ofstream sc(path + ".txt");
    sc << dataset_header(s) << "\n";
    if (!sidecar_config.empty()) sc << sidecar_config << "\n";
}

inline SampleSet read_sampleset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("dataset: cannot open " + path);
    std::string header;
    std::getline(is, header);
    std::istringstream hs(header);
    std::string magic;
    hs >> magic;
    if (magic != "MLFTDS1") throw ConfigError("dataset: bad magic in " + path);

    int dim = 0, n = 0, level = 0;
    long long count = -1;
    std::string split = "train";
    std::uint64_t seed = 0;
    int paired = 0;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ConfigError("dataset: malformed header token " + tok);
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "dim") dim = std::stoi(val);
        else if (key == "n") n = std::stoi(val);
        else if (key == "level") level = std::stoi(val);
        else if (key == "count") count = std::stoll(val);
        else if (key == "split") split = val;
        else if (key == "seed") seed = std::stoull(val);
        else if (key == "paired") paired = std::stoi(val);
        else throw ConfigError("dataset: unknown header key " + key);
    }
    if (count < 0 || n <= 0 || (dim != 1 && dim != 2))
        throw ConfigError("dataset: incomplete header in " + path);

    SampleSet s;
    s.grid = Grid(dim, n);
    s.level = level;
    s.seed = seed;
    s.paired = paired != 0;
    if (split == "train") s.split = Split::train;
    else if (split == "validation") s.split = Split::validation;
    else if (split == "test") s.split = Split::test;
    else throw ConfigError("dataset: unknown split " + split);

    s.v.assign(count, Field(s.grid));
    s.u.assign(count, Field(s.grid));
    if (s.paired) s.u_prev.assign(count, Field(s.grid));
    for (long long i = 0; i < count; ++i) {
        detail::read_f64_block(is, s.v[i].a);
        detail::read_f64_block(is, s.u[i].a);
        if (s.paired) detail::read_f64_block(is, s.u_prev[i].a);
    }
    return s;
}

}  // namespace mlft
