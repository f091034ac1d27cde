#pragma once

/// Level hierarchies and the composed level-l solver
///   f_l = interpolate . F_l . restrict
/// acting entirely on finest-grid fields (identity transfers at l = L).
/// Sample generation sub-seeds every sample from (master seed, split, level,
/// index) so the result is independent of generation order or thread count.

#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

#include "mlft/core.hpp"
#include "mlft/rng.hpp"
#include "mlft/solvers.hpp"
#include "mlft/transfer.hpp"

namespace mlft {

struct LevelSpec {
    int index = 1;   // 1-based level number
    int n = 0;       // nodes per axis
    double cost = 1; // declared per-sample generation cost t_l
};

struct ProblemParams {
    NlsParams nls;
    NlsPotentialDist nls_dist;
    BurgersParams burgers;
    EllipticParams elliptic;
};

struct Hierarchy {
    Problem problem = Problem::nls;
    int dim = 1;
    std::vector<LevelSpec> levels;  // ascending resolution, each n divides the finest
    TransferKind transfer;
    ProblemParams params;

    int L() const { return static_cast<int>(levels.size()); }
    const LevelSpec& level(int l) const { return levels.at(static_cast<std::size_t>(l) - 1); }
    const LevelSpec& finest() const { return levels.back(); }
    Grid finest_grid() const { return Grid(dim, finest().n); }

    void validate() const {
        if (levels.empty()) throw ConfigError("hierarchy: no levels");
        const int expect_dim = (problem == Problem::elliptic) ? 2 : 1;
        if (dim != expect_dim) throw ConfigError("hierarchy: dimension does not match problem");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (levels[i].index != static_cast<int>(i) + 1)
                throw ConfigError("hierarchy: level indices must be 1..L in order");
            if (finest().n % levels[i].n != 0)
                throw ConfigError("hierarchy: level n must divide finest n");
            if (i > 0) {
                if (levels[i].n <= levels[i - 1].n)
                    throw ConfigError("hierarchy: level resolutions must strictly increase");
                if (levels[i].cost <= levels[i - 1].cost)
                    throw ConfigError("hierarchy: level costs must strictly increase");
            }
            if (levels[i].cost <= 0) throw ConfigError("hierarchy: costs must be positive");
        }
    }
};

/// Draw one parameter sample (potential / initial datum) on the finest grid.
inline Field sample_parameter(const Hierarchy& h, std::uint64_t seed) {
    switch (h.problem) {
        case Problem::nls: return sample_nls_potential(h.params.nls_dist, h.finest_grid(), seed);
        case Problem::burgers:
            return sample_burgers_initial(h.params.burgers.k_steps, h.finest_grid(), seed);
        default: return sample_elliptic_potential(h.params.elliptic, h.finest_grid(), seed);
    }
}

/// Run the problem's solver at one level's resolution.
inline Field run_level_solver(const Hierarchy& h, const Field& v_level) {
    switch (h.problem) {
        case Problem::nls: return solve_nls(v_level, h.params.nls);
        case Problem::burgers: return solve_burgers(v_level, h.params.burgers);
        default: return solve_diag_inverse(v_level);
    }
}

/// Centered f_l(v): restrict the finest-grid parameter to level l, solve,
/// interpolate back, center.  Level L never touches the transfer operators.
inline Field apply_level(const Hierarchy& h, int l, const Field& v_fine) {
    const LevelSpec& lv = h.level(l);
    Field u_fine(h.finest_grid());
    if (lv.n == h.finest().n) {
        u_fine = run_level_solver(h, v_fine);
    } else {
        Field v_l = restrict_field(v_fine, h.transfer.restriction, lv.n);
        Field u_l = run_level_solver(h, v_l);
        u_fine = interpolate_field(u_l, h.transfer.interpolation, h.finest().n);
    }
    return center_sample(h.problem, lv.n, v_fine, u_fine, h.params.elliptic.c_shift).second;
}

/// Centered version of the parameter itself (v - C for elliptic, v otherwise).
inline Field center_parameter(const Hierarchy& h, const Field& v_fine) {
    return center_sample(h.problem, h.finest().n, v_fine, Field(h.finest_grid()),
                         h.params.elliptic.c_shift)
        .first;
}

/// Inverse of center_parameter, so solvers can be re-applied to stored samples.
inline Field uncenter_parameter(const Hierarchy& h, const Field& v_centered) {
    Field v = v_centered;
    if (h.problem == Problem::elliptic)
        for (double& x : v.a) x += h.params.elliptic.c_shift;
    return v;
}

struct SampleSet {
    Problem problem = Problem::nls;
    int level = 1;
    Grid grid;  // finest grid, shared by all fields
    Split split = Split::train;
    std::uint64_t seed = 0;
    bool paired = false;
    std::vector<Field> v, u, u_prev;  // u_prev filled only when paired

    std::size_t count() const { return v.size(); }
};

inline std::uint64_t sample_seed(std::uint64_t master, Split split, int level, std::uint64_t index) {
    return mix_seed({master, static_cast<std::uint64_t>(split), static_cast<std::uint64_t>(level), index});
}

/// Generate m centered samples at one level; schedule-independent by
/// construction (per-sample seeds, preallocated slots).
inline SampleSet generate_samples(const Hierarchy& h, int level, int m, std::uint64_t master_seed,
                                  Split split, bool paired, int threads = 1) {
    if (m < 1) throw ConfigError("generate: sample count must be >= 1");
    if (paired && level < 2) throw ConfigError("generate: paired requires level >= 2");
    h.validate();

    SampleSet set;
    set.problem = h.problem;
    set.level = level;
    set.grid = h.finest_grid();
    set.split = split;
    set.seed = master_seed;
    set.paired = paired;
    set.v.resize(m);
    set.u.resize(m);
    if (paired) set.u_prev.resize(m);

    std::exception_ptr failure;
    std::mutex failure_mtx;
    auto worker = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            try {
                const std::uint64_t si = sample_seed(master_seed, split, level, i);
                Field v_raw = sample_parameter(h, si);
                set.u[i] = apply_level(h, level, v_raw);
                if (paired) set.u_prev[i] = apply_level(h, level - 1, v_raw);
                set.v[i] = center_parameter(h, v_raw);
            } catch (const SolverError& e) {
                std::lock_guard<std::mutex> lock(failure_mtx);
                if (!failure)
                    failure = std::make_exception_ptr(
                        SolverError("sample " + std::to_string(i) + ": " + e.what()));
                return;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mtx);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (threads <= 1) {
        worker(0, m);
    } else {
        std::vector<std::thread> pool;
        const int nt = std::min(threads, m);
        for (int t = 0; t < nt; ++t) {
            const int b = m * t / nt, e = m * (t + 1) / nt;
            pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return set;
}

/// Total declared generation cost sum m_l * t_l.
inline double cost_of(const std::vector<LevelSpec>& levels, const std::vector<double>& m) {
    if (levels.size() != m.size()) throw ConfigError("cost_of: length mismatch");
    double c = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) c += m[i] * levels[i].cost;
    return c;
}

}  // namespace mlft
