/*
 *  Copyright 2026 The fabnet Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include "fabnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "fabnet/errors.hpp"

namespace fabnet::ops {

namespace {

Tape& tape_of(const Var& a)
{
    if (!a.valid()) {
        throw GraphError("use of an unbound Var");
    }
    return a.tape();
}

Tape& common_tape(const Var& a, const Var& b)
{
    Tape& t = tape_of(a);
    if (&tape_of(b) != &t) {
        throw GraphError("operands live on different tapes");
    }
    return t;
}

bool is_channel_vector(const Shape4& s, const Shape4& like)
{
    return s.batch == like.batch && s.height == 1 && s.width == 1 && s.channels == like.channels;
}

struct ConvGeometry {
    std::size_t N, H, W, cin, cout, K;
    std::ptrdiff_t pad;

    std::size_t patch() const { return K * K * cin; }

    bool inside(std::ptrdiff_t h, std::ptrdiff_t w) const
    {
        return h >= 0 && w >= 0 && h < static_cast<std::ptrdiff_t>(H) && w < static_cast<std::ptrdiff_t>(W);
    }

    // Copies the zero-padded receptive field of output pixel (n,oh,ow) into
    // `patch`, laid out like one kernel row: (kh, kw, cin).
    void gather(const Tensor& in, std::size_t n, std::size_t oh, std::size_t ow, double* patch) const
    {
        for (std::size_t kh = 0; kh < K; ++kh) {
            const auto ih = static_cast<std::ptrdiff_t>(oh + kh) - pad;
            for (std::size_t kw = 0; kw < K; ++kw) {
                const auto iw = static_cast<std::ptrdiff_t>(ow + kw) - pad;
                double* dst = patch + (kh * K + kw) * cin;
                if (!inside(ih, iw)) {
                    std::fill_n(dst, cin, 0.0);
                    continue;
                }
                const double* src = in.data() + in.shape().index(n, static_cast<std::size_t>(ih),
                                                                  static_cast<std::size_t>(iw), 0);
                std::copy_n(src, cin, dst);
            }
        }
    }

    // Adds `patch` back onto the in-bounds positions of the field.
    void scatter(const double* patch, std::size_t n, std::size_t oh, std::size_t ow, Tensor& out) const
    {
        for (std::size_t kh = 0; kh < K; ++kh) {
            const auto ih = static_cast<std::ptrdiff_t>(oh + kh) - pad;
            for (std::size_t kw = 0; kw < K; ++kw) {
                const auto iw = static_cast<std::ptrdiff_t>(ow + kw) - pad;
                if (!inside(ih, iw)) {
                    continue;
                }
                double* dst = out.data() + out.shape().index(n, static_cast<std::size_t>(ih),
                                                             static_cast<std::size_t>(iw), 0);
                const double* src = patch + (kh * K + kw) * cin;
                for (std::size_t c = 0; c < cin; ++c) {
                    dst[c] += src[c];
                }
            }
        }
    }
};

} // namespace

double sigmoid(double x) noexcept
{
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Var add(const Var& a, const Var& b)
{
    Tape& t = common_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.shape() != bv.shape()) {
        throw ShapeError("add: shape mismatch " + av.shape().str() + " vs " + bv.shape().str());
    }
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = av[i] + bv[i];
    }
    return t.record(std::move(out), {a.id(), b.id()},
                    [](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
                        for (Tensor* slot : grads) {
                            if (slot == nullptr) {
                                continue;
                            }
                            for (std::size_t i = 0; i < g.size(); ++i) {
                                (*slot)[i] += g[i];
                            }
                        }
                    });
}

Var mul(const Var& a, const Var& b)
{
    Tape& t = common_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const NodeId aid = a.id();
    const NodeId bid = b.id();

    if (av.shape() == bv.shape()) {
        Tensor out(av.shape());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = av[i] * bv[i];
        }
        return t.record(std::move(out), {aid, bid},
                        [aid, bid](const Tape& tape, const Tensor& g, std::span<Tensor* const> grads) {
                            const Tensor& x = tape.value(aid);
                            const Tensor& y = tape.value(bid);
                            if (grads[0] != nullptr) {
                                for (std::size_t i = 0; i < g.size(); ++i) {
                                    (*grads[0])[i] += g[i] * y[i];
                                }
                            }
                            if (grads[1] != nullptr) {
                                for (std::size_t i = 0; i < g.size(); ++i) {
                                    (*grads[1])[i] += g[i] * x[i];
                                }
                            }
                        });
    }

    if (!is_channel_vector(bv.shape(), av.shape())) {
        throw ShapeError("mul: cannot broadcast " + bv.shape().str() + " over " + av.shape().str());
    }

    const Shape4 s = av.shape();
    const std::size_t spatial = s.height * s.width;
    const std::size_t C = s.channels;
    Tensor out(s);
    for (std::size_t n = 0; n < s.batch; ++n) {
        const double* gate = bv.data() + n * C;
        for (std::size_t p = 0; p < spatial; ++p) {
            const std::size_t base = (n * spatial + p) * C;
            for (std::size_t c = 0; c < C; ++c) {
                out[base + c] = av[base + c] * gate[c];
            }
        }
    }
    return t.record(std::move(out), {aid, bid},
                    [aid, bid, s, spatial, C](const Tape& tape, const Tensor& g, std::span<Tensor* const> grads) {
                        const Tensor& x = tape.value(aid);
                        const Tensor& gate = tape.value(bid);
                        for (std::size_t n = 0; n < s.batch; ++n) {
                            for (std::size_t p = 0; p < spatial; ++p) {
                                const std::size_t base = (n * spatial + p) * C;
                                for (std::size_t c = 0; c < C; ++c) {
                                    if (grads[0] != nullptr) {
                                        (*grads[0])[base + c] += g[base + c] * gate[n * C + c];
                                    }
                                    if (grads[1] != nullptr) {
                                        (*grads[1])[n * C + c] += g[base + c] * x[base + c];
                                    }
                                }
                            }
                        }
                    });
}

Var mean_spatial(const Var& x)
{
    Tape& t = tape_of(x);
    const Tensor& xv = x.value();
    const Shape4 s = xv.shape();
    const std::size_t spatial = s.height * s.width;
    const double inv = 1.0 / static_cast<double>(spatial);

    Tensor out(Shape4{s.batch, 1, 1, s.channels});
    for (std::size_t n = 0; n < s.batch; ++n) {
        double* acc = out.data() + n * s.channels;
        for (std::size_t p = 0; p < spatial; ++p) {
            const double* row = xv.data() + (n * spatial + p) * s.channels;
            for (std::size_t c = 0; c < s.channels; ++c) {
                acc[c] += row[c];
            }
        }
        for (std::size_t c = 0; c < s.channels; ++c) {
            acc[c] *= inv;
        }
    }
    return t.record(std::move(out), {x.id()},
                    [s, spatial, inv](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
                        Tensor& gx = *grads[0];
                        for (std::size_t n = 0; n < s.batch; ++n) {
                            for (std::size_t p = 0; p < spatial; ++p) {
                                double* row = gx.data() + (n * spatial + p) * s.channels;
                                for (std::size_t c = 0; c < s.channels; ++c) {
                                    row[c] += g[n * s.channels + c] * inv;
                                }
                            }
                        }
                    });
}

Var dense(const Var& x, const Var& weight, const Var& bias)
{
    Tape& t = common_tape(x, weight);
    common_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& wv = weight.value();
    const Tensor& bv = bias.value();
    const Shape4 xs = xv.shape();
    const Shape4 ws = wv.shape();
    if (xs.height != 1 || xs.width != 1) {
        throw ShapeError("dense: input must be (N,1,1,D), got " + xs.str());
    }
    if (ws.batch != 1 || ws.height != 1 || ws.channels != xs.channels) {
        throw ShapeError(fmt::format("dense: weight {} does not match input width {}", ws.str(), xs.channels));
    }
    const std::size_t N = xs.batch;
    const std::size_t din = xs.channels;
    const std::size_t dout = ws.width;
    if (bv.shape() != Shape4{1, 1, 1, dout}) {
        throw ShapeError(fmt::format("dense: bias {} does not match output width {}", bv.shape().str(), dout));
    }

    Tensor out(Shape4{N, 1, 1, dout});
    for (std::size_t n = 0; n < N; ++n) {
        const double* in = xv.data() + n * din;
        for (std::size_t e = 0; e < dout; ++e) {
            const double* w = wv.data() + e * din;
            double acc = 0.0;
            for (std::size_t d = 0; d < din; ++d) {
                acc += w[d] * in[d];
            }
            out[n * dout + e] = acc + bv[e];
        }
    }

    const NodeId xid = x.id();
    const NodeId wid = weight.id();
    return t.record(std::move(out), {xid, wid, bias.id()},
                    [xid, wid, N, din, dout](const Tape& tape, const Tensor& g, std::span<Tensor* const> grads) {
                        const Tensor& in = tape.value(xid);
                        const Tensor& w = tape.value(wid);
                        for (std::size_t n = 0; n < N; ++n) {
                            for (std::size_t e = 0; e < dout; ++e) {
                                const double ge = g[n * dout + e];
                                if (grads[0] != nullptr) {
                                    for (std::size_t d = 0; d < din; ++d) {
                                        (*grads[0])[n * din + d] += ge * w[e * din + d];
                                    }
                                }
                                if (grads[1] != nullptr) {
                                    for (std::size_t d = 0; d < din; ++d) {
                                        (*grads[1])[e * din + d] += ge * in[n * din + d];
                                    }
                                }
                                if (grads[2] != nullptr) {
                                    (*grads[2])[e] += ge;
                                }
                            }
                        }
                    });
}

Var relu(const Var& x)
{
    Tape& t = tape_of(x);
    const Tensor& xv = x.value();
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
    }
    const NodeId xid = x.id();
    return t.record(std::move(out), {xid}, [xid](const Tape& tape, const Tensor& g, std::span<Tensor* const> grads) {
        const Tensor& in = tape.value(xid);
        Tensor& gx = *grads[0];
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (in[i] > 0.0) {
                gx[i] += g[i];
            }
        }
    });
}

Var sigmoid(const Var& x)
{
    Tape& t = tape_of(x);
    const Tensor& xv = x.value();
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sigmoid(xv[i]);
    }
    const NodeId self = t.size();
    return t.record(std::move(out), {x.id()},
                    [self](const Tape& tape, const Tensor& g, std::span<Tensor* const> grads) {
                        const Tensor& y = tape.value(self);
                        Tensor& gx = *grads[0];
                        for (std::size_t i = 0; i < g.size(); ++i) {
                            gx[i] += g[i] * y[i] * (1.0 - y[i]);
                        }
                    });
}

Var conv2d(const Var& x, const Var& kernel, const Var& bias)
{
    Tape& t = common_tape(x, kernel);
    common_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& kv = kernel.value();
    const Tensor& bv = bias.value();
    const Shape4 xs = xv.shape();
    const Shape4 ks = kv.shape();
    if (ks.channels != xs.channels) {
        throw ShapeError(fmt::format("conv2d: kernel {} expects {} input channels, input has {}", ks.str(),
                                     ks.channels, xs.channels));
    }
    if (ks.height != ks.width || ks.height % 2 == 0) {
        throw ShapeError("conv2d: kernel must be square with odd size, got " + ks.str());
    }
    if (bv.shape() != Shape4{1, 1, 1, ks.batch}) {
        throw ShapeError(fmt::format("conv2d: bias {} does not match {} output channels", bv.shape().str(), ks.batch));
    }

    const ConvGeometry geo{xs.batch,  xs.height, xs.width, xs.channels, ks.batch, ks.height,
                           static_cast<std::ptrdiff_t>(ks.height / 2)};
    const std::size_t P = geo.patch();

    Tensor out(Shape4{geo.N, geo.H, geo.W, geo.cout});
    std::vector<double> patch(P);
    for (std::size_t n = 0; n < geo.N; ++n) {
        for (std::size_t oh = 0; oh < geo.H; ++oh) {
            for (std::size_t ow = 0; ow < geo.W; ++ow) {
                geo.gather(xv, n, oh, ow, patch.data());
                double* o = out.data() + out.shape().index(n, oh, ow, 0);
                for (std::size_t co = 0; co < geo.cout; ++co) {
                    const double* w = kv.data() + co * P;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < P; ++i) {
                        acc += w[i] * patch[i];
                    }
                    o[co] = acc + bv[co];
                }
            }
        }
    }

    const NodeId xid = x.id();
    const NodeId kid = kernel.id();
    return t.record(
        std::move(out), {xid, kid, bias.id()},
        [geo, xid, kid](const Tape& tape, const Tensor& g, std::span<Tensor* const> grads) {
            const Tensor& in = tape.value(xid);
            const Tensor& k = tape.value(kid);
            const std::size_t P = geo.patch();
            std::vector<double> patch(P);
            std::vector<double> dpatch(P);
            for (std::size_t n = 0; n < geo.N; ++n) {
                for (std::size_t oh = 0; oh < geo.H; ++oh) {
                    for (std::size_t ow = 0; ow < geo.W; ++ow) {
                        const double* go = g.data() + g.shape().index(n, oh, ow, 0);
                        if (grads[1] != nullptr) {
                            geo.gather(in, n, oh, ow, patch.data());
                        }
                        std::fill(dpatch.begin(), dpatch.end(), 0.0);
                        for (std::size_t co = 0; co < geo.cout; ++co) {
                            const double gv = go[co];
                            if (grads[2] != nullptr) {
                                (*grads[2])[co] += gv;
                            }
                            if (grads[1] != nullptr) {
                                double* gw = grads[1]->data() + co * P;
                                for (std::size_t i = 0; i < P; ++i) {
                                    gw[i] += gv * patch[i];
                                }
                            }
                            if (grads[0] != nullptr) {
                                const double* w = k.data() + co * P;
                                for (std::size_t i = 0; i < P; ++i) {
                                    dpatch[i] += gv * w[i];
                                }
                            }
                        }
                        if (grads[0] != nullptr) {
                            geo.scatter(dpatch.data(), n, oh, ow, *grads[0]);
                        }
                    }
                }
            }
        });
}

Var maxpool2x2(const Var& x)
{
    Tape& t = tape_of(x);
    const Tensor& xv = x.value();
    const Shape4 s = xv.shape();
    if (s.height % 2 != 0 || s.width % 2 != 0) {
        throw ShapeError("maxpool2x2: height and width must be even, got " + s.str());
    }
    const Shape4 os{s.batch, s.height / 2, s.width / 2, s.channels};
    Tensor out(os);
    auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());

    for (std::size_t n = 0; n < os.batch; ++n) {
        for (std::size_t oh = 0; oh < os.height; ++oh) {
            for (std::size_t ow = 0; ow < os.width; ++ow) {
                for (std::size_t c = 0; c < os.channels; ++c) {
                    std::size_t best = s.index(n, 2 * oh, 2 * ow, c);
                    for (std::size_t dh = 0; dh < 2; ++dh) {
                        for (std::size_t dw = 0; dw < 2; ++dw) {
                            const std::size_t idx = s.index(n, 2 * oh + dh, 2 * ow + dw, c);
                            if (xv[idx] > xv[best]) {
                                best = idx;
                            }
                        }
                    }
                    const std::size_t o = os.index(n, oh, ow, c);
                    out[o] = xv[best];
                    (*argmax)[o] = best;
                }
            }
        }
    }
    return t.record(std::move(out), {x.id()},
                    [argmax](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
                        Tensor& gx = *grads[0];
                        for (std::size_t o = 0; o < g.size(); ++o) {
                            gx[(*argmax)[o]] += g[o];
                        }
                    });
}

Var sum(const Var& x)
{
    Tape& t = tape_of(x);
    double acc = 0.0;
    for (const double v : x.value().values()) {
        acc += v;
    }
    return t.record(Tensor::scalar(acc), {x.id()}, [](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
        for (double& v : grads[0]->values()) {
            v += g[0];
        }
    });
}

Tensor softmax(const Tensor& logits)
{
    const Shape4 s = logits.shape();
    if (s.height != 1 || s.width != 1) {
        throw ShapeError("softmax: logits must be (N,1,1,K), got " + s.str());
    }
    Tensor out(s);
    const std::size_t K = s.channels;
    for (std::size_t n = 0; n < s.batch; ++n) {
        const double* z = logits.data() + n * K;
        double* p = out.data() + n * K;
        const double zmax = *std::max_element(z, z + K);
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            p[k] = std::exp(z[k] - zmax);
            total += p[k];
        }
        for (std::size_t k = 0; k < K; ++k) {
            p[k] /= total;
        }
    }
    return out;
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels)
{
    Tape& t = tape_of(logits);
    const Tensor& z = logits.value();
    const Shape4 s = z.shape();
    if (s.height != 1 || s.width != 1) {
        throw ShapeError("softmax_cross_entropy: logits must be (N,1,1,K), got " + s.str());
    }
    if (labels.size() != s.batch) {
        throw ShapeError(fmt::format("softmax_cross_entropy: {} labels for a batch of {}", labels.size(), s.batch));
    }
    const std::size_t N = s.batch;
    const std::size_t K = s.channels;
    for (const int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= K) {
            throw ValueError(fmt::format("label {} outside [0,{})", label, K));
        }
    }

    double loss = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const double* row = z.data() + n * K;
        const double zmax = *std::max_element(row, row + K);
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            total += std::exp(row[k] - zmax);
        }
        loss += zmax + std::log(total) - row[static_cast<std::size_t>(labels[n])];
    }
    loss /= static_cast<double>(N);

    const NodeId zid = logits.id();
    std::vector<int> targets(labels.begin(), labels.end());
    return t.record(Tensor::scalar(loss), {zid},
                    [zid, targets = std::move(targets), N, K](const Tape& tape, const Tensor& g,
                                                              std::span<Tensor* const> grads) {
                        const Tensor p = softmax(tape.value(zid));
                        const double scale = g[0] / static_cast<double>(N);
                        Tensor& gz = *grads[0];
                        for (std::size_t n = 0; n < N; ++n) {
                            for (std::size_t k = 0; k < K; ++k) {
                                const double onehot = static_cast<std::size_t>(targets[n]) == k ? 1.0 : 0.0;
                                gz[n * K + k] += (p[n * K + k] - onehot) * scale;
                            }
                        }
                    });
}

} // namespace fabnet::ops
