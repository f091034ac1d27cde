#pragma once

/// Generalization-error estimators giving the predicted error ghat_L as a
/// function of per-level sample counts, in three shapes: the a priori MLFT
/// form built from kernel coefficients (R, c_l, d_l), the a posteriori MLFT
/// form (a_l, b_l), and the ML2MC sum form (a_l).  Coefficients come either
/// from the kernel module, from a single measured trial (heuristic fit), or
/// from several trials via least squares on log ghat_L.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mlft/core.hpp"
#include "mlft/rng.hpp"

namespace mlft {

struct EstimatorModel {
    enum class Kind { mlft_apriori, mlft_apost, ml2mc_apost } kind = Kind::mlft_apost;
    int L = 1;
    double R = 0.0;              // a priori only
    std::vector<double> c, d;    // a priori: c_1..c_L, d_2..d_L
    std::vector<double> a, b;    // a posteriori: a_1..a_L, b_2..b_L (ml2mc: a only)
    std::vector<double> t;       // per-level generation costs t_1..t_L
    double fit_residual = 0.0;   // least-squares objective at the returned model
    bool converged = true;
    std::string provenance;

    int coeff_count() const {
        switch (kind) {
            case Kind::mlft_apriori: return 2 * L;      // R, c_1..c_L, d_2..d_L
            case Kind::mlft_apost: return 2 * L - 1;    // a_1..a_L, b_2..b_L
            default: return L;                          // a_1..a_L
        }
    }
};

/// Measured quantities from one training run: counts, per-level validation
/// errors, and validation estimates of the level gaps E||f_l - f_{l-1}||.
struct TrialRecord {
    std::vector<double> m;    // M_1..M_L
    std::vector<double> g;    // g_1..g_L
    std::vector<double> gap;  // eh_2..eh_L (size L-1)

    int L() const { return static_cast<int>(m.size()); }
};

/// Evaluate ghat_L at the given (possibly fractional) counts.
inline double eval_ghat(const EstimatorModel& model, const std::vector<double>& m) {
    if (static_cast<int>(m.size()) != model.L) throw ConfigError("eval_ghat: count length mismatch");
    for (double v : m)
        if (!(v > 0)) throw ConfigError("eval_ghat: counts must be positive");
    switch (model.kind) {
        case EstimatorModel::Kind::mlft_apriori: {
            double g = 2.0 * model.R * model.c[0] / std::sqrt(m[0]);
            for (int l = 2; l <= model.L; ++l) {
                const double cl = model.c[l - 1], dl = model.d[l - 2];
                double carry = 0.0;
                if (dl != 0.0) {
                    if (cl == 0.0)
                        throw ConfigError("eval_ghat: degenerate level (c_l = 0 with d_l > 0)");
                    carry = dl * g / cl;
                }
                g = (2.0 * model.R / std::sqrt(m[l - 1])) * (cl + carry);
            }
            return g;
        }
        case EstimatorModel::Kind::mlft_apost: {
            double g = model.a[0] / std::sqrt(m[0]);
            for (int l = 2; l <= model.L; ++l)
                g = (model.a[l - 1] / std::sqrt(m[l - 1])) * (model.b[l - 2] + g);
            return g;
        }
        default: {
            double g = 0.0;
            for (int l = 0; l < model.L; ++l) g += model.a[l] / std::sqrt(m[l]);
            return g;
        }
    }
}

/// One-trial a posteriori fit: b_l is the measured gap, a_l solves
/// g_l = ghat_l level by level, so the model reproduces the trial exactly.
inline EstimatorModel fit_heuristic_mlft(const TrialRecord& trial,
                                         const std::vector<double>& costs = {}) {
    const int L = trial.L();
    if (L < 1 || static_cast<int>(trial.g.size()) != L ||
        static_cast<int>(trial.gap.size()) != L - 1)
        throw ConfigError("fit_heuristic_mlft: incomplete trial");
    EstimatorModel mod;
    mod.kind = EstimatorModel::Kind::mlft_apost;
    mod.L = L;
    mod.t = costs;
    mod.a.resize(L);
    mod.b.assign(trial.gap.begin(), trial.gap.end());
    mod.a[0] = trial.g[0] * std::sqrt(trial.m[0]);
    double ghat = trial.g[0];
    for (int l = 2; l <= L; ++l) {
        const double denom = mod.b[l - 2] + ghat;
        if (denom == 0.0) throw ConfigError("fit_heuristic_mlft: degenerate trial (b_l + ghat = 0)");
        mod.a[l - 1] = trial.g[l - 1] * std::sqrt(trial.m[l - 1]) / denom;
        ghat = trial.g[l - 1];
    }
    mod.provenance = "heuristic single-trial fit";
    return mod;
}

/// Per-level ML2MC fit: a_l = g_l sqrt(M_l) independently.
inline EstimatorModel fit_heuristic_ml2mc(const TrialRecord& trial,
                                          const std::vector<double>& costs = {}) {
    const int L = trial.L();
    if (L < 1 || static_cast<int>(trial.g.size()) != L)
        throw ConfigError("fit_heuristic_ml2mc: incomplete trial");
    EstimatorModel mod;
    mod.kind = EstimatorModel::Kind::ml2mc_apost;
    mod.L = L;
    mod.t = costs;
    mod.a.resize(L);
    for (int l = 0; l < L; ++l) mod.a[l] = trial.g[l] * std::sqrt(trial.m[l]);
    mod.provenance = "heuristic per-level fit";
    return mod;
}

namespace detail {

// ghat_L and its gradient w.r.t. the packed coefficient vector, by forward
// tangent propagation through the level recursion.
inline double ghat_with_grad(EstimatorModel::Kind kind, int L, const std::vector<double>& th,
                             const std::vector<double>& m, std::vector<double>& grad) {
    const int n = static_cast<int>(th.size());
    grad.assign(n, 0.0);
    std::vector<double> dg(n, 0.0);
    double g = 0.0;
    if (kind == EstimatorModel::Kind::ml2mc_apost) {
        for (int l = 0; l < L; ++l) {
            g += th[l] / std::sqrt(m[l]);
            dg[l] = 1.0 / std::sqrt(m[l]);
        }
        grad = dg;
        return g;
    }
    if (kind == EstimatorModel::Kind::mlft_apost) {
        // packing: a_1..a_L, b_2..b_L
        g = th[0] / std::sqrt(m[0]);
        dg[0] = 1.0 / std::sqrt(m[0]);
        for (int l = 2; l <= L; ++l) {
            const double al = th[l - 1], bl = th[L + l - 2];
            const double s = 1.0 / std::sqrt(m[l - 1]);
            std::vector<double> nd(n, 0.0);
            for (int k = 0; k < n; ++k) nd[k] = al * s * dg[k];
            nd[l - 1] += s * (bl + g);
            nd[L + l - 2] += al * s;
            g = al * s * (bl + g);
            dg = nd;
        }
        grad = dg;
        return g;
    }
    // a priori packing: R, c_1..c_L, d_2..d_L
    const double R = th[0];
    g = 2.0 * R * th[1] / std::sqrt(m[0]);
    dg[0] = 2.0 * th[1] / std::sqrt(m[0]);
    dg[1] = 2.0 * R / std::sqrt(m[0]);
    for (int l = 2; l <= L; ++l) {
        const double cl = th[l], dl = th[L + l - 1];
        const double s = 2.0 * R / std::sqrt(m[l - 1]);
        const double val = s * (cl + dl * g / cl);
        std::vector<double> nd(n, 0.0);
        for (int k = 0; k < n; ++k) nd[k] = s * (dl / cl) * dg[k];
        nd[0] += val / R;
        nd[l] += s * (1.0 - dl * g / (cl * cl));
        nd[L + l - 1] += s * g / cl;
        g = val;
        dg = nd;
    }
    grad = dg;
    return g;
}

}  // namespace detail

/// Fit coefficients to several trials by minimizing the mean squared error
/// between log g_L and log ghat_L, with log-parameterized gradient descent
/// and seeded multi-start.  Needs at least as many trials as coefficients.
inline EstimatorModel fit_least_squares(const std::vector<TrialRecord>& trials,
                                        EstimatorModel::Kind kind, std::uint64_t seed = 0,
                                        int starts = 8, int steps = 5000) {
    if (trials.empty()) throw ConfigError("fit_least_squares: no trials");
    const int L = trials[0].L();
    for (const TrialRecord& tr : trials) {
        if (tr.L() != L) throw ConfigError("fit_least_squares: inconsistent level counts");
        if (!(tr.g.back() > 0)) throw ConfigError("fit_least_squares: non-positive g_L");
    }
    EstimatorModel probe;
    probe.kind = kind;
    probe.L = L;
    const int n = probe.coeff_count();
    if (static_cast<int>(trials.size()) < n)
        throw ConfigError("fit_least_squares: underdetermined (fewer trials than coefficients)");

    // objective and gradient in phi = log theta
    auto objective = [&](const std::vector<double>& phi, std::vector<double>* gradout) {
        std::vector<double> th(n);
        for (int k = 0; k < n; ++k) th[k] = std::exp(phi[k]);
        double J = 0.0;
        if (gradout) gradout->assign(n, 0.0);
        std::vector<double> gg;
        for (const TrialRecord& tr : trials) {
            const double ghat = detail::ghat_with_grad(kind, L, th, tr.m, gg);
            const double r = std::log(ghat) - std::log(tr.g.back());
            J += r * r;
            if (gradout)
                for (int k = 0; k < n; ++k) (*gradout)[k] += 2.0 * r * (gg[k] / ghat) * th[k];
        }
        return J / static_cast<double>(trials.size());
    };

    Rng rng(mix_seed({seed, 0x6c7371ULL}));
    std::vector<double> best_phi;
    double best_J = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
        std::vector<double> phi(n);
        for (int k = 0; k < n; ++k) phi[k] = 2.0 * rng.normal();
        double step = 1e-2;
        std::vector<double> grad;
        double J = objective(phi, &grad);
        for (int it = 0; it < steps; ++it) {
            std::vector<double> cand(n);
            double Jc = std::numeric_limits<double>::infinity();
            int halvings = 0;
            while (halvings < 60) {
                for (int k = 0; k < n; ++k) cand[k] = phi[k] - step * grad[k];
                Jc = objective(cand, nullptr);
                if (Jc <= J) break;
                step *= 0.5;
                ++halvings;
            }
            if (Jc > J) break;  // stationary at floating precision
            phi = cand;
            J = objective(phi, &grad);
            step = std::min(step * 1.2, 1.0);
            if (J < 1e-30) break;
        }
        if (J < best_J) {
            best_J = J;
            best_phi = phi;
        }
    }

    EstimatorModel mod;
    mod.kind = kind;
    mod.L = L;
    mod.fit_residual = best_J;
    mod.converged = best_J < 1e-10;
    std::vector<double> th(n);
    for (int k = 0; k < n; ++k) th[k] = std::exp(best_phi[k]);
    if (kind == EstimatorModel::Kind::ml2mc_apost) {
        mod.a.assign(th.begin(), th.end());
    } else if (kind == EstimatorModel::Kind::mlft_apost) {
        mod.a.assign(th.begin(), th.begin() + L);
        mod.b.assign(th.begin() + L, th.end());
    } else {
        mod.R = th[0];
        mod.c.assign(th.begin() + 1, th.begin() + 1 + L);
        mod.d.assign(th.begin() + 1 + L, th.end());
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "least-squares fit over %zu trials, seed %llu", trials.size(),
                  static_cast<unsigned long long>(seed));
    mod.provenance = buf;
    return mod;
}

// ---------------------------------------------------------------------------
// text serialization
// ---------------------------------------------------------------------------

inline const char* estimator_kind_name(EstimatorModel::Kind k) {
    switch (k) {
        case EstimatorModel::Kind::mlft_apriori: return "mlft_apriori";
        case EstimatorModel::Kind::mlft_apost: return "mlft_apost";
        default: return "ml2mc_apost";
    }
}

inline std::string estimator_to_text(const EstimatorModel& m) {
    auto g17 = [](double x) {
        char b[64];
        std::snprintf(b, sizeof b, "%.17g", x);
        return std::string(b);
    };
    std::ostringstream os;
    os << "estimator " << estimator_kind_name(m.kind) << "\n";
    os << "levels " << m.L << "\n";
    auto row = [&](const char* key, const std::vector<double>& v) {
        if (v.empty()) return;
        os << key;
        for (double x : v) os << " " << g17(x);
        os << "\n";
    };
    if (m.kind == EstimatorModel::Kind::mlft_apriori) {
        os << "R " << g17(m.R) << "\n";
        row("c", m.c);
        row("d", m.d);
    } else {
        row("a", m.a);
        row("b", m.b);
    }
    row("t", m.t);
    os << "residual " << g17(m.fit_residual) << "\n";
    os << "converged " << (m.converged ? 1 : 0) << "\n";
    if (!m.provenance.empty()) os << "provenance " << m.provenance << "\n";
    return os.str();
}

inline EstimatorModel estimator_from_text(std::istream& is) {
    EstimatorModel m;
    bool saw_kind = false;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        auto rest = [&](std::vector<double>& v) {
            v.clear();
            double x;
            while (ls >> x) v.push_back(x);
        };
        if (key == "estimator") {
            std::string k;
            ls >> k;
            if (k == "mlft_apriori") m.kind = EstimatorModel::Kind::mlft_apriori;
            else if (k == "mlft_apost") m.kind = EstimatorModel::Kind::mlft_apost;
            else if (k == "ml2mc_apost") m.kind = EstimatorModel::Kind::ml2mc_apost;
            else throw ConfigError("estimator: unknown kind '" + k + "'");
            saw_kind = true;
        } else if (key == "levels") ls >> m.L;
        else if (key == "R") ls >> m.R;
        else if (key == "c") rest(m.c);
        else if (key == "d") rest(m.d);
        else if (key == "a") rest(m.a);
        else if (key == "b") rest(m.b);
        else if (key == "t") rest(m.t);
        else if (key == "residual") ls >> m.fit_residual;
        else if (key == "converged") { int c = 1; ls >> c; m.converged = c != 0; }
        else if (key == "provenance") {
            std::getline(ls, m.provenance);
            m.provenance.erase(0, m.provenance.find_first_not_of(' '));
        }
        else throw ConfigError("estimator: unknown key '" + key + "'");
    }
    if (!saw_kind || m.L < 1) throw ConfigError("estimator: missing kind or levels");
    return m;
}

inline EstimatorModel load_estimator(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("estimator: cannot open " + path);
    return estimator_from_text(is);
}

}  // namespace mlft
