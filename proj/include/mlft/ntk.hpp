#pragma once

/// Empirical neural tangent kernel: Jacobian-product kernel blocks, stacked
/// block Gram matrices with a jitter ladder, G-inverse weighted norms, and the
/// generalization-estimator coefficients R, c_1, c_l, d_l.
///
/// The kernel is always the finite-width empirical one, evaluated at whatever
/// network state is passed in (initialization for c_1, the state entering
/// level l for c_l and d_l).

#include <thread>
#include <vector>

#include "mlft/core.hpp"
#include "mlft/levels.hpp"
#include "mlft/linalg.hpp"
#include "mlft/net.hpp"

namespace mlft {

struct KernelBlock {
    int n_out = 0;
    std::vector<double> values;  // row-major n_out x n_out

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_out + j]; }
};

/// Full Jacobian of NN(v): n_out rows of length P, one reverse pass per row
/// seeded with a unit output co-vector.
inline std::vector<double> network_jacobian(const NetworkState& net, const Field& v) {
    const std::size_t n_out = net.spec.n_out();
    const std::size_t P = net.layout.total;
    std::vector<double> J(n_out * P, 0.0);
    ForwardTrace tr;
    forward_trace(net, v, tr);
    std::vector<double> cograd(n_out, 0.0);
    std::vector<double> row(P);
    for (std::size_t i = 0; i < n_out; ++i) {
        cograd[i] = 1.0;
        std::fill(row.begin(), row.end(), 0.0);
        backward(net, tr, cograd, row);
        cograd[i] = 0.0;
        std::copy(row.begin(), row.end(), J.begin() + i * P);
    }
    return J;
}

inline KernelBlock empirical_ntk(const NetworkState& net, const Field& v, const Field& v2) {
    const std::size_t n_out = net.spec.n_out();
    const std::size_t P = net.layout.total;
    const std::vector<double> Ja = network_jacobian(net, v);
    const std::vector<double> Jb = (&v == &v2) ? Ja : network_jacobian(net, v2);
    KernelBlock K;
    K.n_out = static_cast<int>(n_out);
    K.values.assign(n_out * n_out, 0.0);
    for (std::size_t i = 0; i < n_out; ++i)
        for (std::size_t j = 0; j < n_out; ++j) {
            const double* a = Ja.data() + i * P;
            const double* b = Jb.data() + j * P;
            double s = 0.0;
            for (std::size_t p = 0; p < P; ++p) s += a[p] * b[p];
            K.values[i * n_out + j] = s;
        }
    return K;
}

struct GramPolicy {
    int cap = 16;  // max samples entering a Gram, mirroring memory-bound practice
    std::vector<double> ladder = {0.0, 1e-10, 1e-8, 1e-6};  // relative to mean diagonal
};

struct GramMatrix {
    int m = 0;
    int n_out = 0;
    std::vector<double> a;     // raw Gram, row-major (m*n_out)^2
    std::vector<double> chol;  // lower factor of a + jitter*I
    double jitter = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(m) * n_out; }
};

/// Assemble the m x m block Gram over the given parameter fields and factor
/// it, walking the jitter ladder until Cholesky succeeds.
inline GramMatrix build_gram(const NetworkState& net, const std::vector<const Field*>& params,
                             const GramPolicy& policy = {}, int threads = 1) {
    const int m = static_cast<int>(params.size());
    if (m < 1) throw ConfigError("gram: need at least one sample");
    if (m > policy.cap) throw ConfigError("gram: sample count exceeds cap");
    const std::size_t n_out = net.spec.n_out();
    const std::size_t P = net.layout.total;

    std::vector<std::vector<double>> J(m);
    {
        const int nt = std::max(1, std::min(threads, m));
        auto worker = [&](int lo, int hi) {
            for (int i = lo; i < hi; ++i) J[i] = network_jacobian(net, *params[i]);
        };
        if (nt == 1) {
            worker(0, m);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < nt; ++t) pool.emplace_back(worker, m * t / nt, m * (t + 1) / nt);
            for (auto& th : pool) th.join();
        }
    }

    GramMatrix G;
    G.m = m;
    G.n_out = static_cast<int>(n_out);
    const std::size_t N = G.dim();
    G.a.assign(N * N, 0.0);
    for (int bi = 0; bi < m; ++bi)
        for (int bj = bi; bj < m; ++bj)
            for (std::size_t i = 0; i < n_out; ++i) {
                const std::size_t jlo = (bi == bj) ? i : 0;  // upper triangle, mirrored below
                for (std::size_t j = jlo; j < n_out; ++j) {
                    const double* a = J[bi].data() + i * P;
                    const double* b = J[bj].data() + j * P;
                    double s = 0.0;
                    for (std::size_t p = 0; p < P; ++p) s += a[p] * b[p];
                    const std::size_t r = bi * n_out + i, c = bj * n_out + j;
                    G.a[r * N + c] = s;
                    G.a[c * N + r] = s;
                }
            }

    double trace = 0.0;
    for (std::size_t i = 0; i < N; ++i) trace += G.a[i * N + i];
    const double unit = trace / static_cast<double>(N);
    for (double lam : policy.ladder) {
        const double jit = lam * unit;
        G.chol = G.a;
        for (std::size_t i = 0; i < N; ++i) G.chol[i * N + i] += jit;
        if (cholesky_lower(G.chol, N)) {
            G.jitter = jit;
            return G;
        }
    }
    throw KernelError("gram: Cholesky failed at every jitter level");
}

/// sqrt(w^T G^{-1} w) evaluated as the norm of one forward triangular solve.
inline double ginv_norm(const GramMatrix& G, const std::vector<double>& w) {
    if (w.size() != G.dim()) throw ConfigError("ginv_norm: length mismatch");
    const std::vector<double> y = forward_solve(G.chol, G.dim(), w);
    return std::sqrt(dot(y, y));
}

/// G^{-1} w via both triangular solves (used for d_l and the surrogate).
inline std::vector<double> gram_solve(const GramMatrix& G, const std::vector<double>& w) {
    if (w.size() != G.dim()) throw ConfigError("gram_solve: length mismatch");
    return backward_solve(G.chol, G.dim(), forward_solve(G.chol, G.dim(), w));
}

/// R = max over the probe fields of sqrt(||Theta(v,v)||_2), a finite-probe
/// lower surrogate for the supremum over the parameter distribution.
inline double estimate_R(const NetworkState& net, const std::vector<const Field*>& probe,
                         double rel_tol = 1e-8) {
    if (probe.empty()) throw ConfigError("estimate_R: empty probe set");
    double best = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const KernelBlock K = empirical_ntk(net, *probe[i], *probe[i]);
        const double lam =
            power_iteration_sym(K.values, static_cast<std::size_t>(K.n_out), rel_tol,
                                mix_seed({0x52657374ULL, static_cast<std::uint64_t>(i)}));
        if (lam > best) best = lam;
    }
    return std::sqrt(best);
}

namespace detail {

inline std::vector<const Field*> capped_fields(const std::vector<Field>& fs, int cap) {
    std::vector<const Field*> out;
    const int m = std::min<int>(cap, static_cast<int>(fs.size()));
    out.reserve(m);
    for (int i = 0; i < m; ++i) out.push_back(&fs[i]);
    return out;
}

}  // namespace detail

/// c_1 = || u - NN(v) ||_{G^{-1}} over the level-1 samples (first cap of
/// them), with the Gram built at the passed (initialization) state.
inline double coeff_c1(const NetworkState& net, const SampleSet& s1,
                       const GramPolicy& policy = {}, int threads = 1) {
    if (s1.count() == 0) throw ConfigError("coeff_c1: empty sample set");
    const std::vector<const Field*> vs = detail::capped_fields(s1.v, policy.cap);
    const GramMatrix G = build_gram(net, vs, policy, threads);
    std::vector<double> w;
    w.reserve(G.dim());
    for (std::size_t m = 0; m < vs.size(); ++m) {
        const Field pred = forward(net, *vs[m]);
        for (std::size_t i = 0; i < pred.a.size(); ++i) w.push_back(s1.u[m].a[i] - pred.a[i]);
    }
    return ginv_norm(G, w);
}

/// c_l = || u^l - u^{l-1} ||_{G^{-1}} and d_l = m * max_m vec2 of the m-th
/// block of G^{-1}(u^l - u^{l-1}); requires paired samples.
inline std::pair<double, double> coeff_cl_dl(const NetworkState& net, const SampleSet& sl,
                                             const GramPolicy& policy = {}, int threads = 1) {
    if (!sl.paired) throw ConfigError("coeff_cl_dl: paired samples required");
    if (sl.count() == 0) throw ConfigError("coeff_cl_dl: empty sample set");
    const std::vector<const Field*> vs = detail::capped_fields(sl.v, policy.cap);
    const GramMatrix G = build_gram(net, vs, policy, threads);
    std::vector<double> w;
    w.reserve(G.dim());
    for (std::size_t m = 0; m < vs.size(); ++m)
        for (std::size_t i = 0; i < sl.u[m].a.size(); ++i)
            w.push_back(sl.u[m].a[i] - sl.u_prev[m].a[i]);
    const double cl = ginv_norm(G, w);
    const std::vector<double> gw = gram_solve(G, w);
    double worst = 0.0;
    for (int m = 0; m < G.m; ++m) {
        double s = 0.0;
        for (int i = 0; i < G.n_out; ++i) {
            const double x = gw[static_cast<std::size_t>(m) * G.n_out + i];
            s += x * x;
        }
        worst = std::max(worst, std::sqrt(s));
    }
    return {cl, static_cast<double>(G.m) * worst};
}

/// Kernel-regime surrogate predictor: f(v) = NN0(v) + sum_m Theta(v, v_m) a_m
/// with a = G^{-1}(u - NN0(v)).  Interpolates the training data when the NTK
/// stays constant; exposed for oracle tests of that regime.
inline Field ridgeless_predict(const NetworkState& net, const GramMatrix& G,
                               const std::vector<const Field*>& train_v,
                               const std::vector<const Field*>& train_u, const Field& query) {
    if (static_cast<int>(train_v.size()) != G.m) throw ConfigError("ridgeless: sample mismatch");
    std::vector<double> r;
    r.reserve(G.dim());
    for (int m = 0; m < G.m; ++m) {
        const Field pred = forward(net, *train_v[m]);
        for (std::size_t i = 0; i < pred.a.size(); ++i) r.push_back(train_u[m]->a[i] - pred.a[i]);
    }
    const std::vector<double> alpha = gram_solve(G, r);
    Field out = forward(net, query);
    for (int m = 0; m < G.m; ++m) {
        const KernelBlock K = empirical_ntk(net, query, *train_v[m]);
        for (int i = 0; i < K.n_out; ++i) {
            double s = 0.0;
            for (int j = 0; j < K.n_out; ++j)
                s += K.at(i, j) * alpha[static_cast<std::size_t>(m) * K.n_out + j];
            out.a[static_cast<std::size_t>(i)] += s;
        }
    }
    return out;
}

}  // namespace mlft
