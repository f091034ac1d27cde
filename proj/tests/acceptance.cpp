// Acceptance driver: one self-contained check per numbered criterion, each
// reported as a single [PASS]/[FAIL] line.  Criteria 6, 7, 9, and 10 read the
// shipped desk configurations and write their artifacts under the output
// directory so the slow experiments can be inspected (and reused by the
// determinism check) afterwards.
//
// Usage: acceptance [N ...] [--configs DIR] [--out DIR] [--bin PATH]
// With no numbers, all ten criteria run in order.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mlft/budget.hpp"
#include "mlft/config.hpp"
#include "mlft/estimate.hpp"
#include "mlft/levels.hpp"
#include "mlft/net.hpp"
#include "mlft/ntk.hpp"
#include "mlft/solvers.hpp"
#include "mlft/train.hpp"
#include "mlft/transfer.hpp"
#include "oracles.hpp"

using namespace mlft;
namespace fs = std::filesystem;

namespace {

struct Ctx {
    std::string configs = "configs";
    std::string out = "acceptance_out";
    std::string bin;  // CLI binary, used by criterion 10
};

struct Reporter {
    bool ok = true;

    // Detail line; every reported quantity also carries its bound.
    void check(bool cond, const std::string& what) {
        std::printf("    %s %s\n", cond ? "ok  " : "FAIL", what.c_str());
        ok = ok && cond;
    }
    void note(const std::string& what) { std::printf("    ...  %s\n", what.c_str()); }
};

std::string fmt(const char* f, ...) {
    char b[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(b, sizeof b, f, ap);
    va_end(ap);
    return b;
}

Field random_field(Grid g, std::uint64_t seed) {
    Field f(g);
    Rng rng(seed);
    for (double& x : f.a) x = rng.normal();
    return f;
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// ---------------------------------------------------------------------------
// 1: solver correctness
// ---------------------------------------------------------------------------

bool criterion1(const Ctx&) {
    Reporter r;
    {  // NLS: flat potential fixes the constant state
        const Field u = solve_nls(Field(Grid{1, 64}), NlsParams{});
        double worst = 0.0;
        for (double x : u.a) worst = std::max(worst, std::abs(x - 1.0));
        r.check(worst <= 1e-8, fmt("nls flat potential: max|u-1| = %.3g (<= 1e-8)", worst));
    }
    {  // NLS: linear deep well against a dense eigensolve
        const int n = 16;
        Field v{Grid{1, n}};
        for (int i = 0; i < n; ++i) {
            const double d = periodic_dist(i / static_cast<double>(n), 0.5);
            v.a[i] = -25.0 * std::exp(-d * d / (2.0 * 0.1 * 0.1));
        }
        std::vector<double> a = oracle::laplace_1d(n, 1.0 / n);
        for (int i = 0; i < n; ++i) a[i * n + i] += v.a[i];
        const oracle::EigResult eig = oracle::jacobi_eig(a, n);
        std::vector<double> ref(n);
        double nrm2 = 0.0, mean = 0.0;
        for (int i = 0; i < n; ++i) {
            ref[i] = eig.vectors[i * n + 0];
            nrm2 += ref[i] * ref[i];
            mean += ref[i];
        }
        const double sc = (mean >= 0 ? 1.0 : -1.0) / std::sqrt(nrm2 / n);
        for (double& x : ref) x *= sc;
        NlsParams p;
        p.beta = 0.0;
        p.tau = 1e-7;  // fixed point drifts at O(tau); this leaves a 4x margin
        p.tol = 1e-13;
        p.max_iters = 20000000;
        const Field u = solve_nls(v, p);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(u.a[i] - ref[i]));
        r.check(err < 1e-6, fmt("nls deep well vs dense eigensolve: max err = %.3g (< 1e-6)", err));
    }
    {  // NLS: unit discrete mass on a sampled potential
        Grid g{1, 64};
        NlsParams p;
        p.tau = 1e-2;
        const Field u = solve_nls(sample_nls_potential(NlsPotentialDist{}, g, 42), p);
        double mass = 0.0;
        for (double x : u.a) mass += x * x;
        mass *= g.h();
        r.check(std::abs(mass - 1.0) <= 1e-8,
                fmt("nls mass: |h sum u^2 - 1| = %.3g (<= 1e-8)", std::abs(mass - 1.0)));
    }
    {  // Burgers: constant data is an exact fixed point
        const Field u = solve_burgers(Field(Grid{1, 64}, 0.75), BurgersParams{});
        bool exact = true;
        for (double x : u.a) exact = exact && x == 0.75;
        r.check(exact, "burgers constant data: fixed point exact to the bit");
    }
    {  // Burgers: mass conservation
        BurgersParams p;
        p.k_steps = 32;
        const Field v = sample_burgers_initial(p.k_steps, Grid{1, 128}, 9);
        const Field u = solve_burgers(v, p);
        const double drift = std::abs(field_mean(u) - field_mean(v));
        r.check(drift <= 1e-12, fmt("burgers mass drift = %.3g (<= 1e-12)", drift));
    }
    {  // Burgers: first-order self-convergence toward a fine reference
        BurgersParams p;
        p.k_steps = 32;
        const Field ref = solve_burgers(sample_burgers_initial(p.k_steps, Grid{1, 512}, 77), p);
        double err[2];
        int idx = 0;
        for (int n : {64, 128}) {
            const Field u = solve_burgers(sample_burgers_initial(p.k_steps, Grid{1, n}, 77), p);
            err[idx++] = grid_l2(u - restrict_field(ref, Restriction::average, n));
        }
        const double ratio = err[0] / err[1];
        r.check(ratio > 1.5 && ratio < 2.6,
                fmt("burgers self-convergence ratio = %.3f (in [1.5, 2.6])", ratio));
    }
    {  // Elliptic: constant potential matches the spectral-mean constant
        double worst = 0.0;
        for (int n : {2, 4, 8, 16}) {
            const double c = elliptic_center_constant(n, 100.0);
            const Field diag = solve_diag_inverse(Field(Grid{2, n}, 100.0));
            for (double x : diag.a) worst = std::max(worst, std::abs(x - c));
        }
        r.check(worst <= 1e-10,
                fmt("elliptic constant potential vs closed form: max err = %.3g (<= 1e-10)", worst));
    }
    {  // Elliptic: diagonal against a dense inverse
        double worst = 0.0;
        for (int n : {2, 4, 8}) {
            const std::size_t N = static_cast<std::size_t>(n) * n;
            const Field v = sample_elliptic_potential(EllipticParams{}, Grid{2, n}, 21);
            auto op = [&](const std::vector<double>& x) {
                std::vector<double> y(N, 0.0);
                const double ih2 = static_cast<double>(n) * n;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const std::size_t q = static_cast<std::size_t>(i) * n + j;
                        const double nb = x[((i + 1) % n) * n + j] + x[((i - 1 + n) % n) * n + j] +
                                          x[i * n + (j + 1) % n] + x[i * n + (j - 1 + n) % n];
                        y[q] = (4.0 * x[q] - nb) * ih2 + v.a[q] * x[q];
                    }
                return y;
            };
            const auto inv = oracle::gauss_jordan_inverse(oracle::dense_from_op(N, N, op), N);
            const Field diag = solve_diag_inverse(v);
            for (std::size_t q = 0; q < N; ++q)
                worst = std::max(worst, std::abs(diag.a[q] - inv[q * N + q]));
        }
        r.check(worst <= 1e-10, fmt("elliptic diagonal vs dense inverse: max err = %.3g (<= 1e-10)", worst));
    }
    return r.ok;
}

// ---------------------------------------------------------------------------
// 2: kernel suite
// ---------------------------------------------------------------------------

NetworkSpec kernel_spec32() {
    NetworkSpec s;
    s.dim = 1;
    s.n_input = 32;
    BranchSpec a;
    a.n_sub = 16;
    a.depth = 4;
    a.channels = 8;
    a.conv_window = 3;
    BranchSpec b = a;
    b.n_sub = 32;
    b.conv_window = 5;
    s.branches = {a, b};
    s.transfer_window = 3;
    s.gamma = 0.3;
    return s;
}

bool criterion2(const Ctx&) {
    Reporter r;
    const NetworkSpec spec = kernel_spec32();
    const NetworkState net = build_network(spec, 101);
    const int n = spec.n_input, m = 8;
    std::vector<Field> vs_store, us_store;
    for (int i = 0; i < m; ++i) {
        vs_store.push_back(random_field(Grid{1, n}, 200 + i));
        us_store.push_back(random_field(Grid{1, n}, 300 + i));
    }
    std::vector<const Field*> vs, us;
    for (int i = 0; i < m; ++i) {
        vs.push_back(&vs_store[i]);
        us.push_back(&us_store[i]);
    }

    {  // kernel-block symmetry
        const KernelBlock Kaa = empirical_ntk(net, vs_store[0], vs_store[0]);
        double scale = 0.0;
        for (double x : Kaa.values) scale = std::max(scale, std::abs(x));
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(Kaa.at(i, j) - Kaa.at(j, i)));
        const KernelBlock Kab = empirical_ntk(net, vs_store[0], vs_store[1]);
        const KernelBlock Kba = empirical_ntk(net, vs_store[1], vs_store[0]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(Kab.at(i, j) - Kba.at(j, i)));
        r.check(worst <= 1e-10 * scale,
                fmt("gram symmetry: max asymmetry = %.3g (<= 1e-10 * scale %.3g)", worst, scale));
    }

    GramPolicy policy;
    policy.cap = m;
    const GramMatrix G = build_gram(net, vs, policy);
    {  // factorable after the jitter ladder, quadratic forms nonnegative
        bool good = std::isfinite(G.jitter) && G.jitter >= 0.0;
        for (int t = 0; t < 5; ++t) {
            std::vector<double> w(G.dim());
            Rng rng(700 + t);
            for (double& x : w) x = rng.normal();
            const double q = ginv_norm(G, w);  // NaN if the factorization broke down
            good = good && std::isfinite(q) && q >= 0.0;
        }
        r.check(good, fmt("gram PSD after jitter %.3g: factorization and norms finite", G.jitter));
    }
    {  // ridgeless interpolation at the training points
        double worst = 0.0;
        for (int k = 0; k < m; ++k) {
            const Field pred = ridgeless_predict(net, G, vs, us, vs_store[k]);
            for (int i = 0; i < n; ++i)
                worst = std::max(worst, std::abs(pred.a[i] - us_store[k].a[i]) /
                                            std::max(1.0, std::abs(us_store[k].a[i])));
        }
        r.check(worst <= 1e-8, fmt("ridgeless interpolation: max rel err = %.3g (<= 1e-8)", worst));
    }
    {  // RKHS-norm identity alpha^T G alpha = w^T G^{-1} w
        const std::size_t N = G.dim();
        std::vector<double> w(N);
        Rng rng(999);
        for (double& x : w) x = rng.normal();
        const std::vector<double> alpha = gram_solve(G, w);
        std::vector<double> shifted = G.a;
        for (std::size_t i = 0; i < N; ++i) shifted[i * N + i] += G.jitter;
        const auto ga = oracle::matvec(shifted, alpha, N);
        double lhs = 0.0;
        for (std::size_t i = 0; i < N; ++i) lhs += alpha[i] * ga[i];
        const double rhs = ginv_norm(G, w) * ginv_norm(G, w);
        const double rel = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
        r.check(rel <= 1e-10, fmt("rkhs norm identity: rel mismatch = %.3g (<= 1e-10)", rel));
    }
    {  // affine toy network against the closed-form kernel
        NetworkSpec toy;
        toy.dim = 1;
        toy.n_input = 4;
        BranchSpec b;
        b.n_sub = 4;
        b.depth = 3;
        b.channels = 1;
        b.conv_window = 1;
        toy.branches = {b};
        toy.transfer_window = 1;
        toy.gamma = 0.25;
        NetworkState tnet = build_network(toy, 1);
        tnet.params = {1.0, 2.0, 1.0, 0.0, 1.0, 0.0};
        Field v(Grid{1, 4}), w(Grid{1, 4});
        v.a = {0.3, -0.4, 0.1, 0.9};
        w.a = {-0.2, 0.5, 0.7, -0.8};
        const KernelBlock K = empirical_ntk(tnet, v, w);
        const double g2 = toy.gamma * toy.gamma;
        double worst = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double expect =
                    g2 * (v.a[i] * w.a[j] + 2.0 * (v.a[i] + 2.0) * (w.a[j] + 2.0) + 3.0);
                worst = std::max(worst, std::abs(K.at(i, j) - expect));
            }
        r.check(worst <= 1e-12, fmt("affine toy kernel vs closed form: max err = %.3g (<= 1e-12)", worst));
    }
    return r.ok;
}

// ---------------------------------------------------------------------------
// 3: gradient exactness
// ---------------------------------------------------------------------------

bool criterion3(const Ctx&) {
    Reporter r;
    auto run_check = [](const NetworkSpec& spec, std::uint64_t seed) {
        NetworkState net = build_network(spec, seed);
        const Field x = random_field(Grid{spec.dim, spec.n_input}, seed + 1);
        Field target = random_field(Grid{spec.dim, spec.n_input}, seed + 2);
        std::vector<const Field*> vs{&x}, us{&target};
        std::vector<double> grad;
        loss_and_grads(net, vs, us, grad);
        Rng rng(seed + 3);
        double worst = 0.0;
        for (int checked = 0; checked < 25; ++checked) {
            const std::size_t p =
                static_cast<std::size_t>(rng.uniform() * static_cast<double>(net.layout.total));
            const double orig = net.params[p];
            const double eps = 1e-6 * std::max(1.0, std::abs(orig));
            std::vector<double> dummy;
            net.params[p] = orig + eps;
            const double lp = loss_and_grads(net, vs, us, dummy);
            net.params[p] = orig - eps;
            const double lm = loss_and_grads(net, vs, us, dummy);
            net.params[p] = orig;
            const double fd = (lp - lm) / (2.0 * eps);
            worst = std::max(worst, std::abs(fd - grad[p]) /
                                        std::max(1e-8, std::abs(fd) + std::abs(grad[p])));
        }
        return worst;
    };
    {
        NetworkSpec spec;
        spec.dim = 1;
        spec.n_input = 12;
        BranchSpec a;
        a.n_sub = 4;
        a.depth = 4;
        a.channels = 3;
        a.conv_window = 3;
        BranchSpec b = a;
        b.n_sub = 6;
        b.depth = 3;
        spec.branches = {a, b};
        spec.gamma = 0.3;
        const double worst = run_check(spec, 11);
        r.check(worst < 1e-5, fmt("1-d branches, 25 params: worst rel err = %.3g (< 1e-5)", worst));
    }
    {
        NetworkSpec spec;
        spec.dim = 2;
        spec.n_input = 8;
        BranchSpec a;
        a.n_sub = 4;
        a.depth = 4;
        a.channels = 2;
        a.conv_window = 3;
        spec.branches = {a};
        spec.gamma = 0.3;
        const double worst = run_check(spec, 13);
        r.check(worst < 1e-5, fmt("2-d branch, 25 params: worst rel err = %.3g (< 1e-5)", worst));
    }
    return r.ok;
}

// ---------------------------------------------------------------------------
// 4: budget optimizer
// ---------------------------------------------------------------------------

// Gradient of ghat with respect to the count vector, from the suffix-weight
// expansion ghat = sum_k w_k / sqrt(M_k..M_L).
std::vector<double> ghat_count_grad(const EstimatorModel& m, const std::vector<double>& counts) {
    const std::vector<double> w = detail::suffix_weights(m);
    const int L = m.L;
    std::vector<double> grad(L, 0.0);
    for (int k = 1; k <= L; ++k) {
        double q = 1.0;
        for (int l = k; l <= L; ++l) q /= std::sqrt(counts[l - 1]);
        for (int l = k; l <= L; ++l) grad[l - 1] += w[k - 1] * q * (-0.5 / counts[l - 1]);
    }
    return grad;
}

EstimatorModel random_model(Rng& rng, int L, EstimatorModel::Kind kind) {
    EstimatorModel m;
    m.kind = kind;
    m.L = L;
    for (int l = 0; l < L; ++l) {
        m.a.push_back(std::exp(rng.uniform(-1.0, 2.0)));
        m.t.push_back(l == 0 ? 1.0 : m.t[l - 1] * std::exp(rng.uniform(0.5, 2.5)));
    }
    if (kind == EstimatorModel::Kind::mlft_apost)
        for (int l = 1; l < L; ++l) m.b.push_back(std::exp(rng.uniform(-1.5, 1.0)));
    else
        m.b.clear();
    return m;
}

bool criterion4(const Ctx&) {
    Reporter r;
    Rng rng(4242);
    double worst_gap = 0.0, worst_kkt = 0.0, worst_ml2mc = 0.0;
    bool feasible = true;
    auto run_instance = [&](int L) {
        const EstimatorModel m = random_model(rng, L, EstimatorModel::Kind::mlft_apost);
        const double T = m.t.back() * rng.uniform(4.0, 12.0);
        const BudgetSolution sol = optimize_mlft(m, T);
        const BudgetSolution ref = optimize_bruteforce(m, T);
        worst_gap = std::max(worst_gap, sol.ghat_rounded / ref.ghat_rounded - 1.0);

        // KKT stationarity in the count variables: grad + nu * t = 0
        const std::vector<double> gr = ghat_count_grad(m, sol.m_continuous);
        double scale = 0.0;
        for (int l = 0; l < L; ++l) scale = std::max(scale, std::abs(gr[l]));
        for (int l = 0; l < L; ++l)
            worst_kkt = std::max(worst_kkt, std::abs(gr[l] + sol.multiplier * m.t[l]) / scale);

        double spend = 0.0;
        for (int l = 0; l < L; ++l) {
            feasible = feasible && sol.m_rounded[l] >= 1;
            spend += m.t[l] * static_cast<double>(sol.m_rounded[l]);
        }
        feasible = feasible && spend <= T * (1.0 + 1e-12);

        const EstimatorModel z = random_model(rng, L, EstimatorModel::Kind::ml2mc_apost);
        const double Tz = z.t.back() * rng.uniform(4.0, 12.0);
        const BudgetSolution zsol = optimize_ml2mc(z, Tz);
        const BudgetSolution zref = optimize_bruteforce(z, Tz);
        worst_ml2mc = std::max(worst_ml2mc, zsol.ghat_rounded / zref.ghat_rounded - 1.0);
        double zspend = 0.0;
        for (int l = 0; l < L; ++l) {
            feasible = feasible && zsol.m_rounded[l] >= 1;
            zspend += z.t[l] * static_cast<double>(zsol.m_rounded[l]);
        }
        feasible = feasible && zspend <= Tz * (1.0 + 1e-12);
    };
    for (int i = 0; i < 10; ++i) run_instance(2);
    for (int i = 0; i < 3; ++i) run_instance(3);
    r.check(worst_gap <= 0.01,
            fmt("mlft solve vs brute force: worst excess = %.3g (<= 1%%)", worst_gap));
    r.check(worst_ml2mc <= 0.01,
            fmt("ml2mc closed form vs brute force: worst excess = %.3g (<= 1%%)", worst_ml2mc));
    r.check(worst_kkt <= 1e-8, fmt("kkt stationarity: worst residual = %.3g (<= 1e-8)", worst_kkt));
    r.check(feasible, "rounded allocations feasible (counts >= 1, spend <= T)");
    return r.ok;
}

// ---------------------------------------------------------------------------
// 5: estimator algebra
// ---------------------------------------------------------------------------

// Trial whose per-level errors are generated by the model itself, so a
// least-squares fit can reach a zero objective.
TrialRecord exact_trial(const EstimatorModel& m, const std::vector<double>& counts) {
    TrialRecord tr;
    tr.m = counts;
    for (int l = 1; l <= m.L; ++l) {
        EstimatorModel prefix = m;
        prefix.L = l;
        prefix.a.assign(m.a.begin(), m.a.begin() + l);
        prefix.b.assign(m.b.begin(), m.b.begin() + std::max(0, l - 1));
        tr.g.push_back(eval_ghat(prefix, std::vector<double>(counts.begin(), counts.begin() + l)));
    }
    for (int l = 2; l <= m.L; ++l) tr.gap.push_back(m.b[l - 2]);
    return tr;
}

bool criterion5(const Ctx&) {
    Reporter r;
    {  // heuristic fits reproduce their trial exactly
        EstimatorModel truth;
        truth.kind = EstimatorModel::Kind::mlft_apost;
        truth.L = 3;
        truth.a = {1.4, 0.8, 0.5};
        truth.b = {0.45, 0.3};
        const TrialRecord tr = exact_trial(truth, {64.0, 25.0, 9.0});
        const EstimatorModel fit = fit_heuristic_mlft(tr);
        double worst = std::abs(eval_ghat(fit, tr.m) - tr.g.back());
        // the ml2mc round trip reproduces each per-level error
        TrialRecord tz;
        tz.m = {49.0, 16.0};
        tz.g = {0.6, 0.2};
        const EstimatorModel fz = fit_heuristic_ml2mc(tz);
        for (int l = 0; l < 2; ++l)
            worst = std::max(worst, std::abs(fz.a[l] / std::sqrt(tz.m[l]) - tz.g[l]));
        r.check(worst <= 1e-12, fmt("heuristic round trip: worst err = %.3g (<= 1e-12)", worst));
    }
    {  // least squares drives the objective to zero on synthetic data
        EstimatorModel truth;
        truth.kind = EstimatorModel::Kind::mlft_apost;
        truth.L = 2;
        truth.a = {1.5, 0.7};
        truth.b = {0.4};
        std::vector<TrialRecord> trials;
        for (auto counts : {std::vector<double>{4, 4}, {16, 4}, {4, 16}, {64, 16}, {16, 64}})
            trials.push_back(exact_trial(truth, counts));
        const EstimatorModel fit =
            fit_least_squares(trials, EstimatorModel::Kind::mlft_apost, 77);
        r.check(fit.fit_residual < 1e-12,
                fmt("least-squares objective = %.3g (< 1e-12)", fit.fit_residual));
    }
    {  // structural agreement between the a priori and a posteriori forms
        Rng rng(515253);
        double worst = 0.0;
        for (int rep = 0; rep < 40; ++rep) {
            const int L = 2 + static_cast<int>(rng.uniform() * 2.0);
            EstimatorModel ap;
            ap.kind = EstimatorModel::Kind::mlft_apriori;
            ap.L = L;
            ap.R = std::exp(rng.uniform(-0.5, 1.0));
            for (int l = 0; l < L; ++l) ap.c.push_back(std::exp(rng.uniform(-1.0, 1.0)));
            for (int l = 1; l < L; ++l) ap.d.push_back(std::exp(rng.uniform(-1.5, 0.5)));
            EstimatorModel po;
            po.kind = EstimatorModel::Kind::mlft_apost;
            po.L = L;
            po.a.push_back(2.0 * ap.R * ap.c[0]);
            for (int l = 2; l <= L; ++l) {
                po.a.push_back(2.0 * ap.R * ap.d[l - 2] / ap.c[l - 1]);
                po.b.push_back(ap.c[l - 1] * ap.c[l - 1] / ap.d[l - 2]);
            }
            std::vector<double> counts;
            for (int l = 0; l < L; ++l) counts.push_back(std::exp(rng.uniform(1.0, 5.0)));
            const double ga = eval_ghat(ap, counts), gp = eval_ghat(po, counts);
            worst = std::max(worst, std::abs(ga - gp) / std::max(1.0, std::abs(ga)));
        }
        r.check(worst <= 1e-12, fmt("structural identity: worst rel err = %.3g (<= 1e-12)", worst));
    }
    {  // ghat decreases when any count increases
        Rng rng(99107);
        bool mono = true;
        for (int rep = 0; rep < 100; ++rep) {
            const int L = 2 + static_cast<int>(rng.uniform() * 2.0);
            const auto kind = rep % 2 ? EstimatorModel::Kind::mlft_apost
                                      : EstimatorModel::Kind::ml2mc_apost;
            const EstimatorModel m = random_model(rng, L, kind);
            std::vector<double> counts;
            for (int l = 0; l < L; ++l) counts.push_back(std::exp(rng.uniform(1.0, 4.0)));
            const double base = eval_ghat(m, counts);
            for (int l = 0; l < L; ++l) {
                std::vector<double> up = counts;
                up[l] *= 4.0;
                mono = mono && eval_ghat(m, up) < base;
            }
        }
        r.check(mono, "monotonicity: ghat strictly decreases in every count (100 models)");
    }
    return r.ok;
}

// ---------------------------------------------------------------------------
// 6: desk-scale ratio sweep
// ---------------------------------------------------------------------------

// The sweep in-line rather than through sweep_ratio so every individual run
// can be archived; the seed schedule matches sweep_ratio exactly.
bool criterion6(const Ctx& ctx) {
    Reporter r;
    const ExperimentConfig cfg = load_config(ctx.configs + "/nls_desk.cfg");
    const Hierarchy& h = cfg.hierarchy;
    r.check(h.problem == Problem::nls && h.L() == 2 && h.level(1).n == 16 && h.level(2).n == 64,
            "configuration pins grids 16 and 64");
    r.check(h.level(2).cost == 16.0 * h.level(1).cost, "configuration pins t2 = 16 t1");
    r.check(cfg.iters == 2000 && cfg.sweep_reps == 5, "configuration pins 2000 iters, 5 seeds");
    const double T = cfg.budget_T;
    r.check(T == 16.0 * h.level(2).cost, "configuration pins T = 16 t2");
    if (!r.ok) return false;

    const double t1 = h.level(1).cost, t2 = h.level(2).cost;
    const std::vector<double> ratios = {0.0, 0.5, 1.0};
    const std::vector<std::pair<long, long>> want = {{0, 16}, {128, 8}, {256, 0}};
    std::map<double, std::vector<double>> gs;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        const auto [m1, m2] = ratio_to_counts(ratios[k], T, t1, t2);
        if (m1 != want[k].first || m2 != want[k].second) {
            r.check(false, fmt("ratio %.1f mapped to counts (%ld, %ld)", ratios[k], m1, m2));
            return false;
        }
    }
    for (int rep = 0; rep < cfg.sweep_reps; ++rep) {
        PipelineConfig pc = cfg.pipeline();
        pc.seed = mix_seed({cfg.seed, 0x72657073ULL, static_cast<std::uint64_t>(rep)});
        for (std::size_t k = 0; k < ratios.size(); ++k) {
            const auto [m1, m2] = ratio_to_counts(ratios[k], T, t1, t2);
            RunReport out;
            if (m1 == 0) out = train_single_level(pc, 2, m2);
            else if (m2 == 0) out = train_single_level(pc, 1, m1);
            else out = run_mlft(pc, {m1, m2});
            const std::string dir = fmt("%s/criterion6/r%03d_rep%d", ctx.out.c_str(),
                                        static_cast<int>(ratios[k] * 100), rep);
            write_report(dir, out, cfg.hash);
            gs[ratios[k]].push_back(out.g);
        }
    }
    const double g0 = median_of(gs[0.0]), gh = median_of(gs[0.5]), g1 = median_of(gs[1.0]);
    {
        std::ofstream os(ctx.out + "/criterion6/summary.csv");
        os << "#config=" << cfg.hash << "\n";
        os << "r,median_g\n0," << g0 << "\n0.5," << gh << "\n1," << g1 << "\n";
    }
    r.note(fmt("median g: r=0 -> %.4f, r=1/2 -> %.4f, r=1 -> %.4f", g0, gh, g1));
    r.check(gh < g0, fmt("median g at r=1/2 (%.4f) < median at r=0 (%.4f)", gh, g0));
    r.check(gh < g1, fmt("median g at r=1/2 (%.4f) < median at r=1 (%.4f)", gh, g1));
    return r.ok;
}

// ---------------------------------------------------------------------------
// 7: allocation comparison
// ---------------------------------------------------------------------------

bool criterion7(const Ctx& ctx) {
    Reporter r;
    const ExperimentConfig cfg = load_config(ctx.configs + "/burgers_desk.cfg");
    const Hierarchy& h = cfg.hierarchy;
    r.check(h.problem == Problem::burgers && h.L() == 2 && h.level(1).n == 32 &&
                h.level(2).n == 128,
            "configuration pins grids 32 and 128");
    r.check(h.level(2).cost == 64.0 * h.level(1).cost, "configuration pins t2 = 64 t1");
    const double T = cfg.budget_T;
    r.check(T == 8.0 * h.level(2).cost, "configuration pins T = 8 t2");
    r.check(cfg.anchor.size() == 2, "configuration carries a two-level anchor trial");
    if (!r.ok) return false;

    const std::vector<double> costs = {h.level(1).cost, h.level(2).cost};
    const std::vector<long> anchor(cfg.anchor.begin(), cfg.anchor.end());
    const long sentinel = cfg.iters + 1;  // "never reached" outranks any real count
    std::vector<double> it_mlft, it_ml2mc, err_mlft, err_ml2mc;
    for (int rep = 0; rep < cfg.sweep_reps; ++rep) {
        PipelineConfig pc = cfg.pipeline();
        pc.seed = mix_seed({cfg.seed, 0x72657073ULL, static_cast<std::uint64_t>(rep)});
        const std::string base = fmt("%s/criterion7/rep%d", ctx.out.c_str(), rep);

        const RunReport ma = run_mlft(pc, anchor);
        write_report(base + "/mlft_anchor", ma, cfg.hash);
        TrialRecord tm;
        for (long c : anchor) tm.m.push_back(static_cast<double>(c));
        tm.g = ma.g_levels;
        tm.gap = ma.gaps;
        const EstimatorModel em = fit_heuristic_mlft(tm, costs);
        BudgetSolution sm = optimize_mlft(em, T);
        std::vector<long> cm = sm.m_rounded;
        for (long& c : cm) c = std::max(c, 1L);

        const RunReport za = run_ml2mc(pc, anchor);
        write_report(base + "/ml2mc_anchor", za, cfg.hash);
        TrialRecord tz;
        tz.m = tm.m;
        tz.g = za.g_levels;
        const EstimatorModel ez = fit_heuristic_ml2mc(tz, costs);
        BudgetSolution sz = optimize_ml2mc(ez, T);
        std::vector<long> cz = sz.m_rounded;
        for (long& c : cz) c = std::max(c, 1L);

        const RunReport mf = run_mlft(pc, cm);
        write_report(base + "/mlft_final", mf, cfg.hash);
        const RunReport zf = run_ml2mc(pc, cz);
        write_report(base + "/ml2mc_final", zf, cfg.hash);

        it_mlft.push_back(static_cast<double>(mf.iters_to_threshold < 0 ? sentinel
                                                                        : mf.iters_to_threshold));
        it_ml2mc.push_back(static_cast<double>(zf.iters_to_threshold < 0 ? sentinel
                                                                         : zf.iters_to_threshold));
        err_mlft.push_back(mf.g_test);
        err_ml2mc.push_back(zf.g_test);
        r.note(fmt("rep %d: mlft counts (%ld, %ld) iters %ld err %.4f | ml2mc counts (%ld, %ld) "
                   "iters %ld err %.4f",
                   rep, cm[0], cm[1], mf.iters_to_threshold, mf.g_test, cz[0], cz[1],
                   zf.iters_to_threshold, zf.g_test));
    }
    const double im = median_of(it_mlft), iz = median_of(it_ml2mc);
    const double em_med = median_of(err_mlft), ez_med = median_of(err_ml2mc);
    {
        std::ofstream os(ctx.out + "/criterion7/summary.csv");
        os << "#config=" << cfg.hash << "\n";
        os << "pipeline,median_iters_to_threshold,median_test_error\n";
        os << "mlft," << im << "," << em_med << "\n";
        os << "ml2mc," << iz << "," << ez_med << "\n";
    }
    // test errors are reported for the record, deliberately not asserted
    r.note(fmt("median test error: mlft %.4f vs ml2mc %.4f (reported only)", em_med, ez_med));
    r.check(im <= iz,
            fmt("median level-2 iterations to threshold: mlft %.0f <= ml2mc %.0f", im, iz));
    return r.ok;
}

// ---------------------------------------------------------------------------
// 8: telescoping identity
// ---------------------------------------------------------------------------

bool criterion8(const Ctx&) {
    Reporter r;
    auto check_problem = [&](const char* name, Hierarchy h) {
        h.validate();
        const int L = h.L();
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 2; ++s) {
            const Field v = sample_parameter(h, 1000 + s);
            std::vector<Field> u;
            for (int l = 1; l <= L; ++l) u.push_back(apply_level(h, l, v));
            Field sum = u[0];
            for (int l = 2; l <= L; ++l)
                for (std::size_t i = 0; i < sum.a.size(); ++i)
                    sum.a[i] += u[l - 1].a[i] - u[l - 2].a[i];
            for (std::size_t i = 0; i < sum.a.size(); ++i)
                worst = std::max(worst, std::abs(sum.a[i] - u[L - 1].a[i]));
        }
        // paired generation must hand ml2mc exactly the telescoping targets
        const SampleSet s2 = generate_samples(h, 2, 2, 31, Split::train, true);
        for (int i = 0; i < 2; ++i) {
            const Field v = sample_parameter(h, sample_seed(31, Split::train, 2, i));
            const Field prev = apply_level(h, 1, v);
            for (std::size_t j = 0; j < prev.a.size(); ++j)
                worst = std::max(worst, std::abs(s2.u_prev[i].a[j] - prev.a[j]));
        }
        r.check(worst <= 1e-12, fmt("%s: worst telescoping defect = %.3g (<= 1e-12)", name, worst));
    };
    {
        Hierarchy h;
        h.problem = Problem::nls;
        h.dim = 1;
        h.levels = {{1, 8, 1.0}, {2, 16, 4.0}, {3, 32, 16.0}};
        h.params.nls.tau = 1e-3;
        check_problem("nls", h);
    }
    {
        Hierarchy h;
        h.problem = Problem::burgers;
        h.dim = 1;
        h.levels = {{1, 32, 1.0}, {2, 64, 8.0}, {3, 128, 64.0}};
        h.params.burgers.k_steps = 32;
        check_problem("burgers", h);
    }
    {
        Hierarchy h;
        h.problem = Problem::elliptic;
        h.dim = 2;
        h.levels = {{1, 4, 1.0}, {2, 8, 8.0}, {3, 16, 64.0}};
        check_problem("elliptic", h);
    }
    return r.ok;
}

// ---------------------------------------------------------------------------
// 9: determinism
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string drop_wall_line(const std::string& text) {
    std::istringstream is(text);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line))
        if (line.rfind("wall_seconds", 0) != 0) os << line << "\n";
    return os.str();
}

bool criterion9(const Ctx& ctx) {
    Reporter r;
    const ExperimentConfig cfg = load_config(ctx.configs + "/nls_desk.cfg");
    PipelineConfig pc = cfg.pipeline();
    pc.seed = mix_seed({cfg.seed, 0x72657073ULL, 0});  // rep 0 of the sweep schedule

    // r = 0, rep 0 of criterion 6; reuse its artifacts when present
    const std::string base = ctx.out + "/criterion6/r000_rep0";
    if (!fs::exists(base + "/metrics.csv")) {
        r.note("criterion 6 artifacts absent; producing the baseline run here");
        write_report(base, train_single_level(pc, 2, 16), cfg.hash);
    }
    const std::string rerun = ctx.out + "/criterion9/rerun";
    write_report(rerun, train_single_level(pc, 2, 16), cfg.hash);

    const bool metrics_same = slurp(base + "/metrics.csv") == slurp(rerun + "/metrics.csv");
    r.check(metrics_same, "metrics.csv byte-identical across reruns");
    const bool curve_same =
        slurp(base + "/loss_curve_l1.csv") == slurp(rerun + "/loss_curve_l1.csv");
    r.check(curve_same, "loss_curve_l1.csv byte-identical across reruns");
    const bool report_same = drop_wall_line(slurp(base + "/report.txt")) ==
                             drop_wall_line(slurp(rerun + "/report.txt"));
    r.check(report_same, "report.txt identical apart from wall_seconds");
    return r.ok;
}

// ---------------------------------------------------------------------------
// 10: growth diagnostic
// ---------------------------------------------------------------------------

bool criterion10(const Ctx& ctx) {
    Reporter r;
    if (ctx.bin.empty()) {
        r.check(false, "no CLI binary supplied (--bin)");
        return false;
    }
    const std::string out = ctx.out + "/criterion10";
    fs::create_directories(out);
    const std::string cmd = "\"" + ctx.bin + "\" growth --config \"" + ctx.configs +
                            "/nls_growth.cfg\" --out \"" + out + "\" > \"" + out + "/stdout.txt\"";
    const int rc = std::system(cmd.c_str());
    r.check(rc == 0, fmt("growth command exit status = %d", rc));
    if (rc != 0) return false;

    const std::string csv = slurp(out + "/growth.csv");
    double slope_c1 = std::nan(""), slope_ratio = std::nan("");
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("slope_c1,", 0) == 0) slope_c1 = std::atof(line.c_str() + 9);
        if (line.rfind("slope_d2_over_c2sq,", 0) == 0)
            slope_ratio = std::atof(line.c_str() + 19);
    }
    r.check(std::isfinite(slope_c1) && std::isfinite(slope_ratio),
            fmt("slopes finite: c1 %.5f, d2/c2^2 %.5f", slope_c1, slope_ratio));
    r.check(csv.find("0.30588") != std::string::npos && csv.find("0.40594") != std::string::npos,
            "reference slopes 0.30588 / 0.40594 recorded in the report");
    r.note("reference slopes are recorded only; no agreement is asserted");
    r.check(slope_c1 < 0.5, fmt("c1 slope %.5f < 0.5", slope_c1));
    return r.ok;
}

}  // namespace

int main(int argc, char** argv) {
    Ctx ctx;
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--configs" && i + 1 < argc) ctx.configs = argv[++i];
        else if (a == "--out" && i + 1 < argc) ctx.out = argv[++i];
        else if (a == "--bin" && i + 1 < argc) ctx.bin = argv[++i];
        else if (!a.empty() && a[0] != '-') selected.push_back(std::atoi(a.c_str()));
        else {
            std::fprintf(stderr, "usage: acceptance [N ...] [--configs DIR] [--out DIR] [--bin PATH]\n");
            return 2;
        }
    }
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    struct Entry {
        int id;
        const char* label;
        bool (*fn)(const Ctx&);
    };
    const Entry entries[] = {
        {1, "solver correctness", criterion1},
        {2, "kernel suite", criterion2},
        {3, "gradient exactness", criterion3},
        {4, "budget optimizer", criterion4},
        {5, "estimator algebra", criterion5},
        {6, "desk-scale ratio sweep", criterion6},
        {7, "allocation comparison", criterion7},
        {8, "telescoping identity", criterion8},
        {9, "determinism", criterion9},
        {10, "growth diagnostic", criterion10},
    };

    int failures = 0;
    for (int id : selected) {
        const Entry* e = nullptr;
        for (const Entry& cand : entries)
            if (cand.id == id) e = &cand;
        if (!e) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        std::printf("criterion %d: %s\n", e->id, e->label);
        bool ok = false;
        try {
            ok = e->fn(ctx);
        } catch (const std::exception& ex) {
            std::printf("    FAIL unhandled error: %s\n", ex.what());
        }
        std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", e->id, e->label);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
