#pragma once

/// From-scratch MNN-H network engine.
///
/// Each branch runs: LCR (learnable restriction, manually initialized from the
/// block-average stencil) down to an n_sub grid, (depth-2) periodic
/// convolutions with bias and ReLU, then LCI (learnable interpolation,
/// initialized from the linear-interpolation stencil) back up to the input
/// grid.  Branch outputs are summed and multiplied by the output scale gamma.
///
/// NTK-style parameterization: every layer applies a fixed normalization so
/// weights stay ~N(0,1) at init and the initialization realizes
/// restriction/interpolation composed with unit-variance random channel maps;
/// per-node branch output variance at init is O(1) independent of the channel
/// count.  interior conv: 1/sqrt(C*window^dim); LCR: sqrt(D^dim/C) against
/// weights sqrt(C/D^dim)*W_c*R_dw; LCI: sqrt(D^dim)/C against
/// sqrt(C/D^dim)*W_c*I_dw.
///
/// All passes are exact reverse-mode; gradients reduce over a batch in
/// sample-index order so results are independent of thread count.

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "mlft/core.hpp"
#include "mlft/levels.hpp"
#include "mlft/rng.hpp"

namespace mlft {

struct BranchSpec {
    int n_sub = 8;
    int depth = 4;  // LCR + (depth-2) interior convs + LCI
    int channels = 32;
    int conv_window = 7;
};

struct NetworkSpec {
    int dim = 1;
    int n_input = 64;  // nodes per axis of the finest grid
    std::vector<BranchSpec> branches;
    int transfer_window = 3;
    double gamma = 3.0e-4;

    void validate() const {
        if (dim != 1 && dim != 2) throw ConfigError("net: dim must be 1 or 2");
        if (branches.empty()) throw ConfigError("net: no branches");
        if (transfer_window < 1 || transfer_window % 2 == 0)
            throw ConfigError("net: transfer_window must be odd and positive");
        if (!(gamma > 0)) throw ConfigError("net: gamma must be positive");
        for (const BranchSpec& b : branches) {
            if (b.n_sub < 1 || n_input % b.n_sub != 0)
                throw ConfigError("net: branch n_sub must divide n_input");
            if (b.depth < 3) throw ConfigError("net: branch depth must be >= 3");
            if (b.channels < 1) throw ConfigError("net: channels must be >= 1");
            if (b.conv_window < 1 || b.conv_window % 2 == 0 || b.conv_window > b.n_sub)
                throw ConfigError("net: conv_window must be odd and <= n_sub");
            if (transfer_window > b.n_sub)
                throw ConfigError("net: transfer_window must be <= n_sub");
            if (n_input / b.n_sub > 1 && transfer_window < 3)
                throw ConfigError("net: transfer_window must be >= 3 when n_sub < n_input");
        }
    }

    std::size_t n_out() const {
        return dim == 1 ? static_cast<std::size_t>(n_input)
                        : static_cast<std::size_t>(n_input) * n_input;
    }
};

enum class LayerKind { lcr, conv, lci };

struct LayerLayout {
    LayerKind kind = LayerKind::conv;
    int c_in = 0, c_out = 0;
    int win = 1;       // taps per axis
    double scale = 1;  // fixed normalization applied to the convolution sum
    std::size_t w_off = 0, w_size = 0, b_off = 0, b_size = 0;
    std::vector<double> stencil;  // preset R or I, [blocks][win^dim]; empty for conv
};

struct BranchLayout {
    int ns = 0;      // n_sub
    int D = 0;       // n_input / n_sub per axis
    int blocks = 0;  // D^dim
    int C = 0;
    std::vector<LayerLayout> layers;
};

struct NetworkLayout {
    std::vector<BranchLayout> branches;
    std::size_t total = 0;
};

inline NetworkLayout build_layout(const NetworkSpec& spec) {
    spec.validate();
    NetworkLayout lay;
    std::size_t off = 0;
    const int tw = spec.transfer_window;
    for (const BranchSpec& b : spec.branches) {
        BranchLayout bl;
        bl.ns = b.n_sub;
        bl.D = spec.n_input / b.n_sub;
        bl.blocks = spec.dim == 1 ? bl.D : bl.D * bl.D;
        bl.C = b.channels;
        auto push = [&](LayerKind kind, int ci, int co, int win, double scale) {
            LayerLayout L;
            L.kind = kind;
            L.c_in = ci;
            L.c_out = co;
            L.win = win;
            L.scale = scale;
            const int taps = spec.dim == 1 ? win : win * win;
            L.w_off = off;
            L.w_size = static_cast<std::size_t>(co) * ci * taps;
            off += L.w_size;
            L.b_off = off;
            L.b_size = static_cast<std::size_t>(co);
            off += L.b_size;
            bl.layers.push_back(std::move(L));
        };
        const double C = b.channels, B = bl.blocks;
        push(LayerKind::lcr, bl.blocks, b.channels, tw, std::sqrt(B / C));
        const int taps = spec.dim == 1 ? b.conv_window : b.conv_window * b.conv_window;
        for (int k = 0; k < b.depth - 2; ++k)
            push(LayerKind::conv, b.channels, b.channels, b.conv_window, 1.0 / std::sqrt(C * taps));
        push(LayerKind::lci, b.channels, bl.blocks, tw, std::sqrt(B) / C);

        // preset stencils (block average / linear interpolation)
        const int wt_taps = spec.dim == 1 ? tw : tw * tw;
        const int Wt = (tw - 1) / 2;
        LayerLayout& lcr = bl.layers.front();
        lcr.stencil.assign(static_cast<std::size_t>(bl.blocks) * wt_taps, 0.0);
        LayerLayout& lci = bl.layers.back();
        lci.stencil.assign(static_cast<std::size_t>(bl.blocks) * wt_taps, 0.0);
        if (spec.dim == 1) {
            for (int d = 0; d < bl.D; ++d) {
                lcr.stencil[static_cast<std::size_t>(d) * tw + Wt] = 1.0 / bl.D;
                const double t = static_cast<double>(d) / bl.D;
                lci.stencil[static_cast<std::size_t>(d) * tw + Wt] = 1.0 - t;
                if (d > 0) lci.stencil[static_cast<std::size_t>(d) * tw + Wt + 1] = t;
            }
        } else {
            for (int dx = 0; dx < bl.D; ++dx)
                for (int dy = 0; dy < bl.D; ++dy) {
                    const std::size_t blk = static_cast<std::size_t>(dx) * bl.D + dy;
                    lcr.stencil[blk * wt_taps + static_cast<std::size_t>(Wt) * tw + Wt] =
                        1.0 / (static_cast<double>(bl.D) * bl.D);
                    const double tx = static_cast<double>(dx) / bl.D, ty = static_cast<double>(dy) / bl.D;
                    auto set = [&](int wx, int wy, double val) {
                        if (val != 0.0)
                            lci.stencil[blk * wt_taps + static_cast<std::size_t>(wx) * tw + wy] = val;
                    };
                    set(Wt, Wt, (1 - tx) * (1 - ty));
                    if (dy > 0) set(Wt, Wt + 1, (1 - tx) * ty);
                    if (dx > 0) set(Wt + 1, Wt, tx * (1 - ty));
                    if (dx > 0 && dy > 0) set(Wt + 1, Wt + 1, tx * ty);
                }
        }
        lay.branches.push_back(std::move(bl));
    }
    lay.total = off;
    return lay;
}

struct NetworkState {
    NetworkSpec spec;
    NetworkLayout layout;
    std::vector<double> params;
};

/// Seeded initialization per the manual LCR/LCI formulas; interior conv
/// weights and all biases are i.i.d. N(0,1).  Draw order is part of the
/// determinism contract: per branch, per layer, weights then biases.
inline NetworkState build_network(const NetworkSpec& spec, std::uint64_t seed) {
    NetworkState net;
    net.spec = spec;
    net.layout = build_layout(spec);
    net.params.assign(net.layout.total, 0.0);
    Rng rng(seed);
    for (const BranchLayout& bl : net.layout.branches) {
        for (const LayerLayout& L : bl.layers) {
            const int taps = static_cast<int>(L.w_size / (static_cast<std::size_t>(L.c_in) * L.c_out));
            if (L.kind == LayerKind::conv) {
                for (std::size_t i = 0; i < L.w_size; ++i) net.params[L.w_off + i] = rng.normal();
            } else if (L.kind == LayerKind::lcr) {
                const double mag = std::sqrt(static_cast<double>(bl.C) / bl.blocks);
                for (int c = 0; c < L.c_out; ++c) {
                    const double wc = rng.normal();
                    for (int d = 0; d < L.c_in; ++d)
                        for (int w = 0; w < taps; ++w)
                            net.params[L.w_off + (static_cast<std::size_t>(c) * L.c_in + d) * taps + w] =
                                mag * wc * L.stencil[static_cast<std::size_t>(d) * taps + w];
                }
            } else {  // lci: one W_c per input channel, shared across output blocks
                const double mag = std::sqrt(static_cast<double>(bl.C) / bl.blocks);
                for (int c = 0; c < L.c_in; ++c) {
                    const double wc = rng.normal();
                    for (int d = 0; d < L.c_out; ++d)
                        for (int w = 0; w < taps; ++w)
                            net.params[L.w_off + (static_cast<std::size_t>(d) * L.c_in + c) * taps + w] =
                                mag * wc * L.stencil[static_cast<std::size_t>(d) * taps + w];
                }
            }
            for (std::size_t i = 0; i < L.b_size; ++i) net.params[L.b_off + i] = rng.normal();
        }
    }
    return net;
}

// ---------------------------------------------------------------------------
// forward / backward kernels
// ---------------------------------------------------------------------------

namespace detail {

// Periodic halo padding: rows of length s become s + 2*halo.
inline void pad_rows_1d(const double* src, double* dst, int rows, int s, int halo) {
    const int sp = s + 2 * halo;
    for (int r = 0; r < rows; ++r) {
        const double* a = src + static_cast<std::size_t>(r) * s;
        double* p = dst + static_cast<std::size_t>(r) * sp;
        for (int j = 0; j < sp; ++j) p[j] = a[((j - halo) % s + s) % s];
    }
}

inline void conv_fwd_1d(double* out, const double* pad, const double* w, const double* bias,
                        double scale, int c_out, int c_in, int s, int win) {
    const int sp = s + win - 1;
    for (int co = 0; co < c_out; ++co) {
        double* o = out + static_cast<std::size_t>(co) * s;
        const double b = bias[co];
        for (int i = 0; i < s; ++i) o[i] = b;
        for (int ci = 0; ci < c_in; ++ci) {
            const double* p = pad + static_cast<std::size_t>(ci) * sp;
            const double* wr = w + (static_cast<std::size_t>(co) * c_in + ci) * win;
            for (int t = 0; t < win; ++t) {
                const double wv = scale * wr[t];
                const double* pt = p + t;
                for (int i = 0; i < s; ++i) o[i] += wv * pt[i];
            }
        }
    }
}

// gin accumulates the transpose convolution of the padded output cograd.
inline void conv_bwd_input_1d(double* gin, const double* gpad, const double* w, double scale,
                              int c_out, int c_in, int s, int win) {
    const int sp = s + win - 1;
    for (int ci = 0; ci < c_in; ++ci) {
        double* g = gin + static_cast<std::size_t>(ci) * s;
        for (int co = 0; co < c_out; ++co) {
            const double* p = gpad + static_cast<std::size_t>(co) * sp;
            const double* wr = w + (static_cast<std::size_t>(co) * c_in + ci) * win;
            for (int t = 0; t < win; ++t) {
                const double wv = scale * wr[t];
                const double* pt = p + (win - 1 - t);
                for (int i = 0; i < s; ++i) g[i] += wv * pt[i];
            }
        }
    }
}

inline void conv_bwd_params_1d(double* gw, double* gb, const double* gout, const double* inpad,
                               double scale, int c_out, int c_in, int s, int win) {
    const int sp = s + win - 1;
    for (int co = 0; co < c_out; ++co) {
        const double* g = gout + static_cast<std::size_t>(co) * s;
        double bs = 0.0;
        for (int i = 0; i < s; ++i) bs += g[i];
        gb[co] += bs;
        for (int ci = 0; ci < c_in; ++ci) {
            const double* p = inpad + static_cast<std::size_t>(ci) * sp;
            double* wr = gw + (static_cast<std::size_t>(co) * c_in + ci) * win;
            for (int t = 0; t < win; ++t) {
                const double* pt = p + t;
                double acc = 0.0;
                for (int i = 0; i < s; ++i) acc += g[i] * pt[i];
                wr[t] += scale * acc;
            }
        }
    }
}

// 2-D versions: planes of s x s padded to (s+2h) x (s+2h), row-major.
inline void pad_planes_2d(const double* src, double* dst, int planes, int s, int halo) {
    const int sp = s + 2 * halo;
    for (int r = 0; r < planes; ++r) {
        const double* a = src + static_cast<std::size_t>(r) * s * s;
        double* p = dst + static_cast<std::size_t>(r) * sp * sp;
        for (int i = 0; i < sp; ++i) {
            const int si = ((i - halo) % s + s) % s;
            for (int j = 0; j < sp; ++j) p[static_cast<std::size_t>(i) * sp + j] =
                a[static_cast<std::size_t>(si) * s + ((j - halo) % s + s) % s];
        }
    }
}

inline void conv_fwd_2d(double* out, const double* pad, const double* w, const double* bias,
                        double scale, int c_out, int c_in, int s, int win) {
    const int sp = s + win - 1;
    for (int co = 0; co < c_out; ++co) {
        double* o = out + static_cast<std::size_t>(co) * s * s;
        const double b = bias[co];
        for (int i = 0; i < s * s; ++i) o[i] = b;
        for (int ci = 0; ci < c_in; ++ci) {
            const double* p = pad + static_cast<std::size_t>(ci) * sp * sp;
            const double* wr = w + (static_cast<std::size_t>(co) * c_in + ci) * win * win;
            for (int tx = 0; tx < win; ++tx)
                for (int ty = 0; ty < win; ++ty) {
                    const double wv = scale * wr[static_cast<std::size_t>(tx) * win + ty];
                    for (int i = 0; i < s; ++i) {
                        const double* pr = p + static_cast<std::size_t>(i + tx) * sp + ty;
                        double* orow = o + static_cast<std::size_t>(i) * s;
                        for (int j = 0; j < s; ++j) orow[j] += wv * pr[j];
                    }
                }
        }
    }
}

inline void conv_bwd_input_2d(double* gin, const double* gpad, const double* w, double scale,
                              int c_out, int c_in, int s, int win) {
    const int sp = s + win - 1;
    for (int ci = 0; ci < c_in; ++ci) {
        double* g = gin + static_cast<std::size_t>(ci) * s * s;
        for (int co = 0; co < c_out; ++co) {
            const double* p = gpad + static_cast<std::size_t>(co) * sp * sp;
            const double* wr = w + (static_cast<std::size_t>(co) * c_in + ci) * win * win;
            for (int tx = 0; tx < win; ++tx)
                for (int ty = 0; ty < win; ++ty) {
                    const double wv = scale * wr[static_cast<std::size_t>(tx) * win + ty];
                    for (int i = 0; i < s; ++i) {
                        const double* pr =
                            p + static_cast<std::size_t>(i + win - 1 - tx) * sp + (win - 1 - ty);
                        double* grow = g + static_cast<std::size_t>(i) * s;
                        for (int j = 0; j < s; ++j) grow[j] += wv * pr[j];
                    }
                }
        }
    }
}

inline void conv_bwd_params_2d(double* gw, double* gb, const double* gout, const double* inpad,
                               double scale, int c_out, int c_in, int s, int win) {
    const int sp = s + win - 1;
    for (int co = 0; co < c_out; ++co) {
        const double* g = gout + static_cast<std::size_t>(co) * s * s;
        double bs = 0.0;
        for (int i = 0; i < s * s; ++i) bs += g[i];
        gb[co] += bs;
        for (int ci = 0; ci < c_in; ++ci) {
            const double* p = inpad + static_cast<std::size_t>(ci) * sp * sp;
            double* wr = gw + (static_cast<std::size_t>(co) * c_in + ci) * win * win;
            for (int tx = 0; tx < win; ++tx)
                for (int ty = 0; ty < win; ++ty) {
                    double acc = 0.0;
                    for (int i = 0; i < s; ++i) {
                        const double* pr = p + static_cast<std::size_t>(i + tx) * sp + ty;
                        const double* grow = g + static_cast<std::size_t>(i) * s;
                        for (int j = 0; j < s; ++j) acc += grow[j] * pr[j];
                    }
                    wr[static_cast<std::size_t>(tx) * win + ty] += scale * acc;
                }
        }
    }
}

}  // namespace detail

/// Forward-pass scratch retained for reverse mode: per layer, the padded
/// input and the (post-ReLU for interior convs) output.
struct LayerTrace {
    std::vector<double> in_padded;
    std::vector<double> out;
};
struct BranchTrace {
    std::vector<LayerTrace> layers;
};
struct ForwardTrace {
    std::vector<BranchTrace> branches;
};

namespace detail {

// Gather the input field into block-channel rows: 1-D xb[d][i] = x[i*D+d];
// 2-D xb[dx*D+dy][ix*ns+iy] = x[(ix*D+dx)*n + (iy*D+dy)].
inline void field_to_blocks(const NetworkSpec& spec, const BranchLayout& bl, const double* x,
                            double* xb) {
    if (spec.dim == 1) {
        for (int d = 0; d < bl.D; ++d)
            for (int i = 0; i < bl.ns; ++i)
                xb[static_cast<std::size_t>(d) * bl.ns + i] = x[static_cast<std::size_t>(i) * bl.D + d];
    } else {
        const int n = spec.n_input;
        for (int dx = 0; dx < bl.D; ++dx)
            for (int dy = 0; dy < bl.D; ++dy) {
                double* row = xb + (static_cast<std::size_t>(dx) * bl.D + dy) *
                                       (static_cast<std::size_t>(bl.ns) * bl.ns);
                for (int ix = 0; ix < bl.ns; ++ix)
                    for (int iy = 0; iy < bl.ns; ++iy)
                        row[static_cast<std::size_t>(ix) * bl.ns + iy] =
                            x[static_cast<std::size_t>(ix * bl.D + dx) * n + (iy * bl.D + dy)];
            }
    }
}

// Scatter block-channel rows back onto the field (accumulating).
inline void blocks_to_field(const NetworkSpec& spec, const BranchLayout& bl, const double* yb,
                            double* y) {
    if (spec.dim == 1) {
        for (int d = 0; d < bl.D; ++d)
            for (int i = 0; i < bl.ns; ++i)
                y[static_cast<std::size_t>(i) * bl.D + d] += yb[static_cast<std::size_t>(d) * bl.ns + i];
    } else {
        const int n = spec.n_input;
        for (int dx = 0; dx < bl.D; ++dx)
            for (int dy = 0; dy < bl.D; ++dy) {
                const double* row = yb + (static_cast<std::size_t>(dx) * bl.D + dy) *
                                             (static_cast<std::size_t>(bl.ns) * bl.ns);
                for (int ix = 0; ix < bl.ns; ++ix)
                    for (int iy = 0; iy < bl.ns; ++iy)
                        y[static_cast<std::size_t>(ix * bl.D + dx) * n + (iy * bl.D + dy)] +=
                            row[static_cast<std::size_t>(ix) * bl.ns + iy];
            }
    }
}

inline std::size_t spatial(const NetworkSpec& spec, int s) {
    return spec.dim == 1 ? static_cast<std::size_t>(s) : static_cast<std::size_t>(s) * s;
}
inline std::size_t padded(const NetworkSpec& spec, int s, int win) {
    const int sp = s + win - 1;
    return spec.dim == 1 ? static_cast<std::size_t>(sp) : static_cast<std::size_t>(sp) * sp;
}

}  // namespace detail

/// Forward pass filling a trace for reverse mode.
inline Field forward_trace(const NetworkState& net, const Field& v, ForwardTrace& tr) {
    const NetworkSpec& spec = net.spec;
    if (v.grid.dim != spec.dim || v.grid.n != spec.n_input)
        throw ConfigError("net: input field shape mismatch");
    tr.branches.resize(net.layout.branches.size());
    Field out(v.grid, 0.0);
    std::vector<double> xb;
    for (std::size_t b = 0; b < net.layout.branches.size(); ++b) {
        const BranchLayout& bl = net.layout.branches[b];
        BranchTrace& bt = tr.branches[b];
        bt.layers.resize(bl.layers.size());
        const std::size_t S = detail::spatial(spec, bl.ns);
        xb.assign(static_cast<std::size_t>(bl.blocks) * S, 0.0);
        detail::field_to_blocks(spec, bl, v.a.data(), xb.data());

        const double* cur = xb.data();
        int cur_rows = bl.blocks;
        for (std::size_t li = 0; li < bl.layers.size(); ++li) {
            const LayerLayout& L = bl.layers[li];
            LayerTrace& lt = bt.layers[li];
            const int halo = (L.win - 1) / 2;
            lt.in_padded.assign(static_cast<std::size_t>(cur_rows) * detail::padded(spec, bl.ns, L.win), 0.0);
            if (spec.dim == 1)
                detail::pad_rows_1d(cur, lt.in_padded.data(), cur_rows, bl.ns, halo);
            else
                detail::pad_planes_2d(cur, lt.in_padded.data(), cur_rows, bl.ns, halo);
            lt.out.assign(static_cast<std::size_t>(L.c_out) * S, 0.0);
            if (spec.dim == 1)
                detail::conv_fwd_1d(lt.out.data(), lt.in_padded.data(), net.params.data() + L.w_off,
                                    net.params.data() + L.b_off, L.scale, L.c_out, L.c_in, bl.ns, L.win);
            else
                detail::conv_fwd_2d(lt.out.data(), lt.in_padded.data(), net.params.data() + L.w_off,
                                    net.params.data() + L.b_off, L.scale, L.c_out, L.c_in, bl.ns, L.win);
            if (L.kind == LayerKind::conv)
                for (double& x : lt.out)
                    if (x < 0.0) x = 0.0;
            cur = lt.out.data();
            cur_rows = L.c_out;
        }
        detail::blocks_to_field(spec, bl, cur, out.a.data());
    }
    for (double& x : out.a) x *= spec.gamma;
    return out;
}

inline Field forward(const NetworkState& net, const Field& v) {
    ForwardTrace tr;
    return forward_trace(net, v, tr);
}

/// Reverse pass: accumulate d(cograd . NN(v))/d(params) into grad.
inline void backward(const NetworkState& net, const ForwardTrace& tr,
                     const std::vector<double>& cograd, std::vector<double>& grad) {
    const NetworkSpec& spec = net.spec;
    if (grad.size() != net.layout.total) throw ConfigError("net: gradient buffer size mismatch");
    std::vector<double> gb_rows, gpad, gin;
    for (std::size_t b = 0; b < net.layout.branches.size(); ++b) {
        const BranchLayout& bl = net.layout.branches[b];
        const BranchTrace& bt = tr.branches[b];
        const std::size_t S = detail::spatial(spec, bl.ns);

        // cograd on the branch output blocks, including the gamma factor
        gb_rows.assign(static_cast<std::size_t>(bl.blocks) * S, 0.0);
        if (spec.dim == 1) {
            for (int d = 0; d < bl.D; ++d)
                for (int i = 0; i < bl.ns; ++i)
                    gb_rows[static_cast<std::size_t>(d) * bl.ns + i] =
                        spec.gamma * cograd[static_cast<std::size_t>(i) * bl.D + d];
        } else {
            const int n = spec.n_input;
            for (int dx = 0; dx < bl.D; ++dx)
                for (int dy = 0; dy < bl.D; ++dy) {
                    double* row = gb_rows.data() + (static_cast<std::size_t>(dx) * bl.D + dy) * S;
                    for (int ix = 0; ix < bl.ns; ++ix)
                        for (int iy = 0; iy < bl.ns; ++iy)
                            row[static_cast<std::size_t>(ix) * bl.ns + iy] =
                                spec.gamma *
                                cograd[static_cast<std::size_t>(ix * bl.D + dx) * n + (iy * bl.D + dy)];
                }
        }

        std::vector<double> gout = std::move(gb_rows);
        for (std::size_t li = bl.layers.size(); li-- > 0;) {
            const LayerLayout& L = bl.layers[li];
            const LayerTrace& lt = bt.layers[li];
            if (L.kind == LayerKind::conv)  // ReLU mask: out > 0 iff pre-activation > 0
                for (std::size_t i = 0; i < gout.size(); ++i)
                    if (lt.out[i] <= 0.0) gout[i] = 0.0;
            if (spec.dim == 1)
                detail::conv_bwd_params_1d(grad.data() + L.w_off, grad.data() + L.b_off, gout.data(),
                                           lt.in_padded.data(), L.scale, L.c_out, L.c_in, bl.ns, L.win);
            else
                detail::conv_bwd_params_2d(grad.data() + L.w_off, grad.data() + L.b_off, gout.data(),
                                           lt.in_padded.data(), L.scale, L.c_out, L.c_in, bl.ns, L.win);
            if (li == 0) break;  // input gradient of LCR is never needed
            const int halo = (L.win - 1) / 2;
            gpad.assign(static_cast<std::size_t>(L.c_out) * detail::padded(spec, bl.ns, L.win), 0.0);
            if (spec.dim == 1)
                detail::pad_rows_1d(gout.data(), gpad.data(), L.c_out, bl.ns, halo);
            else
                detail::pad_planes_2d(gout.data(), gpad.data(), L.c_out, bl.ns, halo);
            gin.assign(static_cast<std::size_t>(L.c_in) * S, 0.0);
            if (spec.dim == 1)
                detail::conv_bwd_input_1d(gin.data(), gpad.data(), net.params.data() + L.w_off, L.scale,
                                          L.c_out, L.c_in, bl.ns, L.win);
            else
                detail::conv_bwd_input_2d(gin.data(), gpad.data(), net.params.data() + L.w_off, L.scale,
                                          L.c_out, L.c_in, bl.ns, L.win);
            gout = std::move(gin);
        }
    }
}

/// MSE loss (1/B) * sum grid_l2(u - NN(v))^2 and its exact gradient.
inline double loss_and_grads(const NetworkState& net, const std::vector<const Field*>& vs,
                             const std::vector<const Field*>& us, std::vector<double>& grad) {
    if (vs.empty() || vs.size() != us.size()) throw ConfigError("net: bad batch");
    const double B = static_cast<double>(vs.size());
    const double hw = std::pow(1.0 / net.spec.n_input, net.spec.dim);  // h^dim
    grad.assign(net.layout.total, 0.0);
    double loss = 0.0;
    ForwardTrace tr;
    std::vector<double> cograd(net.spec.n_out());
    for (std::size_t m = 0; m < vs.size(); ++m) {
        Field pred = forward_trace(net, *vs[m], tr);
        double l = 0.0;
        for (std::size_t i = 0; i < pred.a.size(); ++i) {
            const double r = pred.a[i] - us[m]->a[i];
            l += r * r;
            cograd[i] = 2.0 * hw * r / B;
        }
        loss += hw * l / B;
        backward(net, tr, cograd, grad);
    }
    return loss;
}

// ---------------------------------------------------------------------------
// optimizers
// ---------------------------------------------------------------------------

struct OptimizerSpec {
    enum class Kind { momentum, adam } kind = Kind::momentum;
    double lr = 10.0;
    double mu = 0.975;                              // momentum coefficient
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // adam
};

struct OptimizerState {
    OptimizerSpec spec;
    std::vector<double> slot1, slot2;  // momentum / first moment; adam second moment
    long step_count = 0;

    static OptimizerState make(const OptimizerSpec& s, std::size_t nparams) {
        OptimizerState o;
        o.spec = s;
        o.slot1.assign(nparams, 0.0);
        if (s.kind == OptimizerSpec::Kind::adam) o.slot2.assign(nparams, 0.0);
        return o;
    }
};

inline void opt_step(OptimizerState& opt, NetworkState& net, const std::vector<double>& grad) {
    if (grad.size() != net.params.size() || opt.slot1.size() != grad.size())
        throw ConfigError("opt: shape mismatch");
    ++opt.step_count;
    if (opt.spec.kind == OptimizerSpec::Kind::momentum) {
        const double lr = opt.spec.lr, mu = opt.spec.mu;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            opt.slot1[i] = mu * opt.slot1[i] + grad[i];
            net.params[i] -= lr * opt.slot1[i];
        }
    } else {
        const double b1 = opt.spec.beta1, b2 = opt.spec.beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(opt.step_count));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(opt.step_count));
        for (std::size_t i = 0; i < grad.size(); ++i) {
            opt.slot1[i] = b1 * opt.slot1[i] + (1.0 - b1) * grad[i];
            opt.slot2[i] = b2 * opt.slot2[i] + (1.0 - b2) * grad[i] * grad[i];
            const double mhat = opt.slot1[i] / c1;
            const double vhat = opt.slot2[i] / c2;
            net.params[i] -= opt.spec.lr * mhat / (std::sqrt(vhat) + opt.spec.eps);
        }
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct LossCurve {
    std::vector<long> iteration;
    std::vector<double> train_mse, test_mse;  // test entries NaN when no eval set
};

struct FitOptions {
    int iters = 2000;
    int batch = 32;
    std::uint64_t seed = 0;
    int log_interval = 50;
    const SampleSet* eval = nullptr;  // finest-level targets for the test column
    bool eval_use_prev = false;       // unused, reserved
    int threads = 1;
};

namespace detail {

inline double full_mse(const NetworkState& net, const std::vector<Field>& vs,
                       const std::vector<Field>& us) {
    const double hw = std::pow(1.0 / net.spec.n_input, net.spec.dim);
    double s = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        Field p = forward(net, vs[i]);
        double l = 0.0;
        for (std::size_t j = 0; j < p.a.size(); ++j) {
            const double r = p.a[j] - us[i].a[j];
            l += r * r;
        }
        s += hw * l;
    }
    return s / static_cast<double>(vs.size());
}

}  // namespace detail

/// Mini-batch training: uniformly shuffled batches of size min(batch, M),
/// reshuffled each epoch (remainder dropped), deterministic from the seed.
/// Never reinitializes parameters or optimizer state.
inline LossCurve fit(NetworkState& net, OptimizerState& opt, const SampleSet& train,
                     const FitOptions& o) {
    const int M = static_cast<int>(train.count());
    if (M < 1) throw ConfigError("fit: empty training set");
    const int B = std::min(o.batch, M);
    Rng rng(mix_seed({o.seed, 0x66697453687566ULL}));  // dedicated shuffle stream

    std::vector<int> order(M);
    for (int i = 0; i < M; ++i) order[i] = i;
    auto reshuffle = [&] {
        for (int i = M - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform() * (i + 1));
            std::swap(order[i], order[j]);
        }
    };
    reshuffle();
    int pos = 0;

    LossCurve curve;
    auto log_point = [&](long it) {
        curve.iteration.push_back(it);
        curve.train_mse.push_back(detail::full_mse(net, train.v, train.u));
        curve.test_mse.push_back(o.eval ? detail::full_mse(net, o.eval->v, o.eval->u)
                                        : std::nan(""));
    };
    log_point(0);

    std::vector<const Field*> bv(B), bu(B);
    std::vector<double> grad;
    // per-sample buffers reduced in index order keep results thread-count-invariant
    std::vector<std::vector<double>> sample_grads;
    const int threads = std::max(1, o.threads);
    if (threads > 1) sample_grads.assign(B, std::vector<double>(net.layout.total, 0.0));

    for (int it = 1; it <= o.iters; ++it) {
        if (pos + B > M) {
            reshuffle();
            pos = 0;
        }
        for (int k = 0; k < B; ++k) {
            bv[k] = &train.v[order[pos + k]];
            bu[k] = &train.u[order[pos + k]];
        }
        pos += B;

        double loss;
        if (threads == 1) {
            loss = loss_and_grads(net, bv, bu, grad);
        } else {
            const double hw = std::pow(1.0 / net.spec.n_input, net.spec.dim);
            std::vector<double> losses(B, 0.0);
            auto worker = [&](int lo, int hi) {
                ForwardTrace tr;
                std::vector<double> cograd(net.spec.n_out());
                for (int k = lo; k < hi; ++k) {
                    std::fill(sample_grads[k].begin(), sample_grads[k].end(), 0.0);
                    Field pred = forward_trace(net, *bv[k], tr);
                    double l = 0.0;
                    for (std::size_t i = 0; i < pred.a.size(); ++i) {
                        const double r = pred.a[i] - bu[k]->a[i];
                        l += r * r;
                        cograd[i] = 2.0 * hw * r / B;
                    }
                    losses[k] = hw * l / B;
                    backward(net, tr, cograd, sample_grads[k]);
                }
            };
            std::vector<std::thread> pool;
            const int nt = std::min(threads, B);
            for (int t = 0; t < nt; ++t)
                pool.emplace_back(worker, B * t / nt, B * (t + 1) / nt);
            for (auto& th : pool) th.join();
            grad.assign(net.layout.total, 0.0);
            loss = 0.0;
            for (int k = 0; k < B; ++k) {  // fixed reduction order
                loss += losses[k];
                for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += sample_grads[k][i];
            }
        }
        if (!std::isfinite(loss))
            throw TrainingError("fit: loss diverged at iteration " + std::to_string(it));
        opt_step(opt, net, grad);
        if (it % o.log_interval == 0 || it == o.iters) log_point(it);
    }
    return curve;
}

}  // namespace mlft
