#pragma once

/// Budget distribution: choose per-level sample counts minimizing the
/// estimated generalization error under a fixed generation budget
/// sum_l t_l M_l <= T.
///
/// The MLFT estimators expand into sum_k w_k / sqrt(prod_{l=k..L} M_l); with
/// M_l = exp(x_l) both that objective and the budget constraint are convex,
/// so the continuous optimum comes from an inner gradient solve per Lagrange
/// multiplier plus bisection on the multiplier.  ML2MC has the closed form
/// M_l proportional to (a_l/t_l)^(2/3).

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mlft/core.hpp"
#include "mlft/estimate.hpp"

namespace mlft {

struct BudgetSolution {
    std::vector<double> m_continuous;
    std::vector<long> m_rounded;
    double ghat_continuous = 0.0;
    double ghat_rounded = 0.0;
    double budget = 0.0;
    double slack = 0.0;  // T - spend of the rounded allocation
    long iterations = 0;
    double multiplier = 0.0;
};

namespace detail {

// Suffix weights w_k of the nested expansion: ghat_L = sum_k w_k * q_k with
// q_k = 1/sqrt(M_k ... M_L), built by the level recursion so zero
// coefficients stay exact.
inline std::vector<double> suffix_weights(const EstimatorModel& m) {
    std::vector<double> u;  // u[k-1] multiplies q_k for the current level
    if (m.kind == EstimatorModel::Kind::mlft_apost) {
        u = {m.a[0]};
        for (int l = 2; l <= m.L; ++l) {
            const double al = m.a[l - 1];
            for (double& w : u) w *= al;
            u.push_back(al * m.b[l - 2]);
        }
    } else if (m.kind == EstimatorModel::Kind::mlft_apriori) {
        u = {2.0 * m.R * m.c[0]};
        for (int l = 2; l <= m.L; ++l) {
            const double cl = m.c[l - 1], dl = m.d[l - 2];
            double ratio = 0.0;
            if (dl != 0.0) {
                if (cl == 0.0) throw ConfigError("budget: degenerate level (c_l = 0, d_l > 0)");
                ratio = dl / cl;
            }
            for (double& w : u) w *= 2.0 * m.R * ratio;
            u.push_back(2.0 * m.R * cl);
        }
    } else {
        throw ConfigError("budget: ml2mc model passed to the mlft optimizer");
    }
    // reorder so w[k-1] multiplies q_k = 1/sqrt(M_k...M_L): recursion above
    // already appends level-l direct terms in order; u[k-1] is q_k's weight.
    return u;
}

inline void check_budget_inputs(const EstimatorModel& m, double T) {
    if (static_cast<int>(m.t.size()) != m.L) throw ConfigError("budget: model has no cost vector");
    double base = 0.0;
    for (double t : m.t) {
        if (!(t > 0)) throw ConfigError("budget: costs must be positive");
        base += t;
    }
    if (!(T >= base)) throw BudgetError("budget: infeasible (cannot afford one sample per level)");
}

inline std::vector<double> counts_to_double(const std::vector<long>& m) {
    return std::vector<double>(m.begin(), m.end());
}

// Floor-then-greedy rounding shared by the continuous optimizers.
inline void round_solution(const EstimatorModel& model, double T, BudgetSolution& sol) {
    const int L = model.L;
    sol.m_rounded.resize(L);
    for (int l = 0; l < L; ++l)
        sol.m_rounded[l] = std::max(1L, static_cast<long>(std::floor(sol.m_continuous[l])));
    auto spend = [&] {
        double s = 0.0;
        for (int l = 0; l < L; ++l) s += model.t[l] * static_cast<double>(sol.m_rounded[l]);
        return s;
    };
    // flooring can still exceed T when minimum counts force levels up to 1
    while (spend() > T) {
        int pick = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int l = 0; l < L; ++l) {
            if (sol.m_rounded[l] <= 1) continue;
            std::vector<long> trial = sol.m_rounded;
            --trial[l];
            const double worsen = eval_ghat(model, counts_to_double(trial)) / model.t[l];
            if (worsen < best) {
                best = worsen;
                pick = l;
            }
        }
        if (pick < 0) break;  // all levels at the minimum; pre guarantees this is affordable
        --sol.m_rounded[pick];
    }
    for (;;) {
        const double remaining = T - spend();
        int pick = -1;
        double best_gain = 0.0;
        const double cur = eval_ghat(model, counts_to_double(sol.m_rounded));
        for (int l = 0; l < L; ++l) {
            if (model.t[l] > remaining) continue;
            std::vector<long> trial = sol.m_rounded;
            ++trial[l];
            const double gain = (cur - eval_ghat(model, counts_to_double(trial))) / model.t[l];
            if (gain > best_gain) {
                best_gain = gain;
                pick = l;
            }
        }
        if (pick < 0) break;
        ++sol.m_rounded[pick];
    }
    sol.ghat_rounded = eval_ghat(model, counts_to_double(sol.m_rounded));
    sol.slack = T - spend();
}

}  // namespace detail

/// Continuous convex solve plus rounding for the MLFT estimator forms.
inline BudgetSolution optimize_mlft(const EstimatorModel& model, double T) {
    detail::check_budget_inputs(model, T);
    const int L = model.L;
    const std::vector<double> w = detail::suffix_weights(model);

    // objective F(x) = sum_k w_k exp(-(x_k+..+x_L)/2) in x_l = log M_l
    auto F = [&](const std::vector<double>& x, std::vector<double>* grad) {
        double f = 0.0;
        if (grad) grad->assign(L, 0.0);
        double suffix = 0.0;
        std::vector<double> e(L);
        for (int k = L; k >= 1; --k) {
            suffix += x[k - 1];
            e[k - 1] = suffix;
        }
        for (int k = 1; k <= L; ++k) {
            const double term = w[k - 1] * std::exp(-0.5 * e[k - 1]);
            f += term;
            if (grad)
                for (int l = k; l <= L; ++l) (*grad)[l - 1] -= 0.5 * term;
        }
        return f;
    };

    long iters = 0;
    // inner solve: minimize F(x) + lam * sum t_l exp(x_l); adaptive GD to get
    // near the optimum, then Newton with the analytic Hessian so stationarity
    // holds to machine precision (the KKT check downstream needs ~1e-12)
    auto inner = [&](double lam, std::vector<double> x) {
        auto G = [&](const std::vector<double>& xx, std::vector<double>* grad) {
            double v = F(xx, grad);
            for (int l = 0; l < L; ++l) {
                const double p = lam * model.t[l] * std::exp(xx[l]);
                v += p;
                if (grad) (*grad)[l] += p;
            }
            return v;
        };
        double step = 0.5;
        std::vector<double> grad;
        double val = G(x, &grad);
        for (int it = 0; it < 20000; ++it) {
            ++iters;
            std::vector<double> cand(L);
            double cv = std::numeric_limits<double>::infinity();
            int halvings = 0;
            while (halvings < 60) {
                for (int l = 0; l < L; ++l) cand[l] = x[l] - step * grad[l];
                cv = G(cand, nullptr);
                if (cv <= val) break;
                step *= 0.5;
                ++halvings;
            }
            if (cv > val) break;
            const double drop = val - cv;
            x = cand;
            val = G(x, &grad);
            step = std::min(step * 1.5, 4.0);
            if (drop <= 1e-12 * std::max(1.0, std::abs(val))) break;
        }
        // Newton polish.  With prefix sums S_l = sum_{k<=l} w_k e^{-e_k/2},
        // hess F = S_{min(l,j)} / 4 and the penalty adds lam t_l e^{x_l} on
        // the diagonal, an SPD system solvable by plain elimination.
        for (int nt = 0; nt < 50; ++nt) {
            ++iters;
            val = G(x, &grad);
            double gnorm = 0.0;
            for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
            if (gnorm <= 1e-14 * std::max(1.0, std::abs(val))) break;
            std::vector<double> suffix(L), term(L), S(L);
            double e = 0.0;
            for (int k = L; k >= 1; --k) {
                e += x[k - 1];
                suffix[k - 1] = e;
            }
            double run = 0.0;
            for (int k = 0; k < L; ++k) {
                term[k] = w[k] * std::exp(-0.5 * suffix[k]);
                run += term[k];
                S[k] = run;
            }
            std::vector<double> H(L * L);
            for (int l = 0; l < L; ++l)
                for (int j = 0; j < L; ++j) H[l * L + j] = 0.25 * S[std::min(l, j)];
            for (int l = 0; l < L; ++l) H[l * L + l] += lam * model.t[l] * std::exp(x[l]);
            std::vector<double> rhs = grad;
            for (int col = 0; col < L; ++col) {  // elimination with partial pivoting
                int piv = col;
                for (int r = col + 1; r < L; ++r)
                    if (std::abs(H[r * L + col]) > std::abs(H[piv * L + col])) piv = r;
                for (int c = 0; c < L; ++c) std::swap(H[col * L + c], H[piv * L + c]);
                std::swap(rhs[col], rhs[piv]);
                for (int r = col + 1; r < L; ++r) {
                    const double f = H[r * L + col] / H[col * L + col];
                    for (int c = col; c < L; ++c) H[r * L + c] -= f * H[col * L + c];
                    rhs[r] -= f * rhs[col];
                }
            }
            std::vector<double> dx(L);
            for (int r = L - 1; r >= 0; --r) {
                double s = rhs[r];
                for (int c = r + 1; c < L; ++c) s -= H[r * L + c] * dx[c];
                dx[r] = s / H[r * L + r];
            }
            double scale = 1.0;  // backtrack if the full step overshoots
            for (int half = 0; half < 40; ++half) {
                std::vector<double> cand(L);
                for (int l = 0; l < L; ++l) cand[l] = x[l] - scale * dx[l];
                if (G(cand, nullptr) <= val) {
                    x = cand;
                    break;
                }
                scale *= 0.5;
            }
        }
        return x;
    };
    auto spend_at = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (int l = 0; l < L; ++l) s += model.t[l] * std::exp(x[l]);
        return s;
    };

    std::vector<double> x0(L);
    for (int l = 0; l < L; ++l) x0[l] = std::log(T / (L * model.t[l]));  // equal cost shares
    double lo = 0.0, hi = 1.0;
    std::vector<double> x = inner(hi, x0);
    while (spend_at(x) > T) {
        lo = hi;
        hi *= 4.0;
        x = inner(hi, x);
        if (hi > 1e30) throw BudgetError("budget: multiplier search failed");
    }
    // shrink lo until the bracket straddles T (lam -> 0 spends unboundedly)
    if (lo == 0.0) {
        lo = hi / 4.0;
        std::vector<double> xl = inner(lo, x);
        while (spend_at(xl) < T) {
            hi = lo;
            lo /= 4.0;
            xl = inner(lo, xl);
            if (lo < 1e-30) break;
        }
        x = xl;
    }
    double lam = hi;
    for (int it = 0; it < 80; ++it) {
        lam = 0.5 * (lo + hi);
        x = inner(lam, x);
        const double s = spend_at(x);
        if (std::abs(s - T) <= 1e-13 * T) break;
        if (s > T) lo = lam;  // spend decreases in lam
        else hi = lam;
        if ((hi - lo) <= 1e-13 * hi) break;
    }

    // Newton on the full KKT system grad F + lam t.exp(x) = 0,
    // sum t exp(x) = T: bisection noise limits the multiplier to ~1e-9, the
    // quadratic polish takes stationarity and feasibility to machine epsilon.
    {
        const int n = L + 1;
        std::vector<double> z(n);
        for (int l = 0; l < L; ++l) z[l] = x[l];
        z[L] = lam;
        auto residual = [&](const std::vector<double>& zz, std::vector<double>& r) {
            std::vector<double> g;
            F(std::vector<double>(zz.begin(), zz.begin() + L), &g);
            double spend = 0.0;
            r.assign(n, 0.0);
            for (int l = 0; l < L; ++l) {
                const double c = model.t[l] * std::exp(zz[l]);
                r[l] = g[l] + zz[L] * c;
                spend += c;
            }
            r[L] = spend - T;
            double m = 0.0;
            for (double v : r) m = std::max(m, std::abs(v));
            return m;
        };
        std::vector<double> r;
        double rn = residual(z, r);
        for (int nt = 0; nt < 60 && rn > 1e-15 * std::max(1.0, T); ++nt) {
            ++iters;
            std::vector<double> suffix(L), S(L);
            double e = 0.0;
            for (int k = L; k >= 1; --k) {
                e += z[k - 1];
                suffix[k - 1] = e;
            }
            double run = 0.0;
            for (int k = 0; k < L; ++k) {
                run += w[k] * std::exp(-0.5 * suffix[k]);
                S[k] = run;
            }
            std::vector<double> J(n * n, 0.0);
            for (int l = 0; l < L; ++l) {
                for (int j = 0; j < L; ++j) J[l * n + j] = 0.25 * S[std::min(l, j)];
                const double c = model.t[l] * std::exp(z[l]);
                J[l * n + l] += z[L] * c;
                J[l * n + L] = c;
                J[L * n + l] = c;
            }
            std::vector<double> rhs = r, dz(n);
            for (int col = 0; col < n; ++col) {
                int piv = col;
                for (int q = col + 1; q < n; ++q)
                    if (std::abs(J[q * n + col]) > std::abs(J[piv * n + col])) piv = q;
                for (int c = 0; c < n; ++c) std::swap(J[col * n + c], J[piv * n + c]);
                std::swap(rhs[col], rhs[piv]);
                for (int q = col + 1; q < n; ++q) {
                    const double f = J[q * n + col] / J[col * n + col];
                    for (int c = col; c < n; ++c) J[q * n + c] -= f * J[col * n + c];
                    rhs[q] -= f * rhs[col];
                }
            }
            for (int q = n - 1; q >= 0; --q) {
                double s = rhs[q];
                for (int c = q + 1; c < n; ++c) s -= J[q * n + c] * dz[c];
                dz[q] = s / J[q * n + q];
            }
            double scale = 1.0;
            bool moved = false;
            for (int half = 0; half < 40; ++half) {
                std::vector<double> cand(n);
                for (int k = 0; k < n; ++k) cand[k] = z[k] - scale * dz[k];
                std::vector<double> rc;
                const double rcn = residual(cand, rc);
                if (rcn < rn) {
                    z = cand;
                    r = rc;
                    rn = rcn;
                    moved = true;
                    break;
                }
                scale *= 0.5;
            }
            if (!moved) break;
        }
        for (int l = 0; l < L; ++l) x[l] = z[l];
        lam = z[L];
    }

    BudgetSolution sol;
    sol.budget = T;
    sol.multiplier = lam;
    sol.iterations = iters;
    sol.m_continuous.resize(L);
    double s = 0.0;
    for (int l = 0; l < L; ++l) {
        sol.m_continuous[l] = std::exp(x[l]);
        s += model.t[l] * sol.m_continuous[l];
    }
    for (int l = 0; l < L; ++l) sol.m_continuous[l] *= T / s;  // land exactly on the budget
    sol.ghat_continuous = eval_ghat(model, sol.m_continuous);
    detail::round_solution(model, T, sol);
    return sol;
}

/// ML2MC closed form M_l = s (a_l/t_l)^(2/3) with s fixing the budget.
inline BudgetSolution optimize_ml2mc(const EstimatorModel& model, double T) {
    if (model.kind != EstimatorModel::Kind::ml2mc_apost)
        throw ConfigError("budget: optimize_ml2mc needs an ml2mc model");
    detail::check_budget_inputs(model, T);
    const int L = model.L;
    BudgetSolution sol;
    sol.budget = T;
    sol.m_continuous.assign(L, 0.0);
    double denom = 0.0;
    for (int l = 0; l < L; ++l) {
        sol.m_continuous[l] = std::pow(model.a[l] / model.t[l], 2.0 / 3.0);
        denom += model.t[l] * sol.m_continuous[l];
    }
    if (denom == 0.0) {  // all-zero coefficients: any allocation is optimal
        for (int l = 0; l < L; ++l) sol.m_continuous[l] = T / (L * model.t[l]);
    } else {
        for (int l = 0; l < L; ++l) sol.m_continuous[l] *= T / denom;
    }
    for (int l = 0; l < L; ++l)
        if (model.a[l] > 0) {
            // KKT stationarity a_l M_l^{-3/2} = 2 lam t_l
            sol.multiplier = model.a[l] * std::pow(sol.m_continuous[l], -1.5) / (2.0 * model.t[l]);
            break;
        }
    sol.ghat_continuous = eval_ghat(model, sol.m_continuous);
    detail::round_solution(model, T, sol);
    return sol;
}

/// Frontier-exhaustive oracle for small L: enumerates integer allocations
/// (topping up the last level, which is always optimal for a monotone
/// estimator) and returns the best.
inline BudgetSolution optimize_bruteforce(const EstimatorModel& model, double T,
                                          int grid_density = 4096) {
    detail::check_budget_inputs(model, T);
    const int L = model.L;
    if (L > 3) throw ConfigError("budget: brute force limited to L <= 3");
    BudgetSolution sol;
    sol.budget = T;
    std::vector<long> best;
    double best_g = std::numeric_limits<double>::infinity();
    auto consider = [&](std::vector<long> m) {
        double spend = 0.0;
        for (int l = 0; l < L; ++l) spend += model.t[l] * static_cast<double>(m[l]);
        if (spend > T) return;
        const double g = eval_ghat(model, detail::counts_to_double(m));
        if (g < best_g) {
            best_g = g;
            best = std::move(m);
        }
    };
    auto axis_values = [&](double cap) {
        std::vector<long> vals;
        const long hi = std::max(1L, static_cast<long>(std::floor(cap)));
        const long stride = std::max(1L, (hi - 1) / std::max(1, grid_density - 1));
        for (long v = 1; v <= hi; v += stride) vals.push_back(v);
        if (vals.back() != hi) vals.push_back(hi);
        return vals;
    };
    if (L == 1) {
        consider({static_cast<long>(std::floor(T / model.t[0]))});
    } else if (L == 2) {
        for (long m1 : axis_values((T - model.t[1]) / model.t[0]))
            consider({m1, static_cast<long>(std::floor((T - model.t[0] * m1) / model.t[1]))});
    } else {
        for (long m1 : axis_values((T - model.t[1] - model.t[2]) / model.t[0])) {
            const double rem = T - model.t[0] * m1 - model.t[2];
            for (long m2 : axis_values(rem / model.t[1]))
                consider({m1, m2,
                          static_cast<long>(std::floor((T - model.t[0] * m1 - model.t[1] * m2) /
                                                       model.t[2]))});
        }
    }
    if (best.empty()) throw BudgetError("budget: no feasible integer allocation");
    sol.m_rounded = best;
    sol.m_continuous = detail::counts_to_double(best);
    sol.ghat_continuous = best_g;
    sol.ghat_rounded = best_g;
    double spend = 0.0;
    for (int l = 0; l < L; ++l) spend += model.t[l] * static_cast<double>(best[l]);
    sol.slack = T - spend;
    return sol;
}

/// Two-level coarse-to-total cost ratio r = M_1 t_1 / T mapped to counts.
inline std::pair<long, long> ratio_to_counts(double r, double T, double t1, double t2) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("ratio_to_counts: r must lie in [0,1]");
    return {static_cast<long>(std::floor(r * T / t1)),
            static_cast<long>(std::floor((1.0 - r) * T / t2))};
}

/// CSV report mirroring the work-table layout: per-level rows then summary rows.
inline std::string budget_report_csv(const EstimatorModel& model, const BudgetSolution& sol) {
    auto g17 = [](double x) {
        char b[64];
        std::snprintf(b, sizeof b, "%.17g", x);
        return std::string(b);
    };
    std::ostringstream os;
    os << "level,t,m_continuous,m_rounded,cost_share\n";
    for (int l = 0; l < model.L; ++l) {
        const double share = model.t[l] * static_cast<double>(sol.m_rounded[l]) / sol.budget;
        os << (l + 1) << "," << g17(model.t[l]) << "," << g17(sol.m_continuous[l]) << ","
           << sol.m_rounded[l] << "," << g17(share) << "\n";
    }
    os << "ghat_continuous," << g17(sol.ghat_continuous) << ",,,\n";
    os << "ghat_rounded," << g17(sol.ghat_rounded) << ",,,\n";
    os << "budget," << g17(sol.budget) << ",,,\n";
    os << "slack," << g17(sol.slack) << ",,,\n";
    return os.str();
}

}  // namespace mlft
