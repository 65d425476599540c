#ifndef GWAD_OPS_HPP
#define GWAD_OPS_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "gwad/tensor.hpp"

namespace gwad::nn {

namespace detail {

// C[M,N] += A[M,K] * B[K,N]
template <typename T>
void gemm_acc(const T* __restrict a, const T* __restrict b, T* __restrict c,
              int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;
            const T* brow = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[M,N] += A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt_acc(const T* __restrict a, const T* __restrict b, T* __restrict c,
                 int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const T* brow = b + static_cast<std::size_t>(j) * k;
            T acc = T(0);
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// x[C,H,W] -> cols[C*k*k, oh*ow] with zero padding.
template <typename T>
void im2col(const T* x, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, T* cols) {
    for (int ch = 0; ch < c; ++ch) {
        for (int u = 0; u < k; ++u) {
            for (int v = 0; v < k; ++v) {
                T* row = cols + (static_cast<std::size_t>((ch * k + u) * k + v)) *
                                    (static_cast<std::size_t>(oh) * ow);
                for (int oi = 0; oi < oh; ++oi) {
                    const int ii = oi * stride + u - pad;
                    T* dst = row + static_cast<std::size_t>(oi) * ow;
                    if (ii < 0 || ii >= h) {
                        for (int oj = 0; oj < ow; ++oj) dst[oj] = T(0);
                        continue;
                    }
                    const T* src = x + (static_cast<std::size_t>(ch) * h + ii) * w;
                    for (int oj = 0; oj < ow; ++oj) {
                        const int jj = oj * stride + v - pad;
                        dst[oj] = (jj >= 0 && jj < w) ? src[jj] : T(0);
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add cols back into x[C,H,W].
template <typename T>
void col2im_acc(const T* cols, int c, int h, int w, int k, int stride, int pad,
                int oh, int ow, T* x) {
    for (int ch = 0; ch < c; ++ch) {
        for (int u = 0; u < k; ++u) {
            for (int v = 0; v < k; ++v) {
                const T* row = cols + (static_cast<std::size_t>((ch * k + u) * k + v)) *
                                          (static_cast<std::size_t>(oh) * ow);
                for (int oi = 0; oi < oh; ++oi) {
                    const int ii = oi * stride + u - pad;
                    if (ii < 0 || ii >= h) continue;
                    T* dst = x + (static_cast<std::size_t>(ch) * h + ii) * w;
                    const T* src = row + static_cast<std::size_t>(oi) * ow;
                    for (int oj = 0; oj < ow; ++oj) {
                        const int jj = oj * stride + v - pad;
                        if (jj >= 0 && jj < w) dst[jj] += src[oj];
                    }
                }
            }
        }
    }
}

inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

}  // namespace detail

// ---- caches -----------------------------------------------------------

template <typename T>
struct Conv2dCache {
    TensorT<T> input, weights;
    int stride = 1, padding = 0;
    bool valid = false;
};

template <typename T>
struct ConvTranspose2dCache {
    TensorT<T> input, weights;
    int stride = 1, padding = 0, output_padding = 0;
    bool valid = false;
};

template <typename T>
struct DenseCache {
    TensorT<T> input, weights;
    bool valid = false;
};

template <typename T>
struct LeakyReluCache {
    TensorT<T> input;
    T negative_slope = T(0.2);
    bool valid = false;
};

template <typename T>
struct SigmoidCache {
    TensorT<T> output;
    bool valid = false;
};

// ---- conv2d ------------------------------------------------------------

template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& input, const TensorT<T>& weights,
                          const TensorT<T>& bias, int stride, int padding,
                          Conv2dCache<T>* cache = nullptr) {
    if (input.rank() != 4 || weights.rank() != 4)
        throw ShapeMismatch("conv2d: input and weights must be rank 4");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int f = weights.dim(0), k = weights.dim(2);
    if (weights.dim(1) != c)
        throw ShapeMismatch("conv2d: weight channels " + std::to_string(weights.dim(1)) +
                            " != input channels " + std::to_string(c));
    if (weights.dim(3) != k) throw ShapeMismatch("conv2d: kernel must be square");
    require_shape(bias, {f}, "conv2d bias");
    const int oh = detail::conv_out_dim(h, k, stride, padding);
    const int ow = detail::conv_out_dim(w, k, stride, padding);
    if (oh < 1 || ow < 1) throw ShapeMismatch("conv2d: output dims collapse to zero");

    TensorT<T> out({n, f, oh, ow});
    const int ckk = c * k * k;
    std::vector<T> cols(static_cast<std::size_t>(ckk) * oh * ow);
    for (int ni = 0; ni < n; ++ni) {
        const T* x = input.data() + static_cast<std::size_t>(ni) * c * h * w;
        T* y = out.data() + static_cast<std::size_t>(ni) * f * oh * ow;
        detail::im2col(x, c, h, w, k, stride, padding, oh, ow, cols.data());
        for (int fi = 0; fi < f; ++fi) {
            const T b = bias.values[static_cast<std::size_t>(fi)];
            T* row = y + static_cast<std::size_t>(fi) * oh * ow;
            for (int j = 0; j < oh * ow; ++j) row[j] = b;
        }
        detail::gemm_acc(weights.data(), cols.data(), y, f, ckk, oh * ow);
    }
    if (cache) {
        cache->input = input;
        cache->weights = weights;
        cache->stride = stride;
        cache->padding = padding;
        cache->valid = true;
    }
    return out;
}

template <typename T>
void conv2d_backward(const TensorT<T>& upstream, const Conv2dCache<T>& cache,
                     TensorT<T>& grad_input, TensorT<T>& grad_weights,
                     TensorT<T>& grad_bias) {
    if (!cache.valid) throw MissingCache("conv2d_backward: no forward cache");
    const auto& input = cache.input;
    const auto& weights = cache.weights;
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int f = weights.dim(0), k = weights.dim(2);
    const int oh = detail::conv_out_dim(h, k, cache.stride, cache.padding);
    const int ow = detail::conv_out_dim(w, k, cache.stride, cache.padding);
    require_shape(upstream, {n, f, oh, ow}, "conv2d upstream");

    grad_input = TensorT<T>({n, c, h, w});
    grad_weights = TensorT<T>(weights.shape);
    grad_bias = TensorT<T>({f});

    const int ckk = c * k * k;
    std::vector<T> cols(static_cast<std::size_t>(ckk) * oh * ow);
    std::vector<T> gcols(static_cast<std::size_t>(ckk) * oh * ow);
    std::vector<T> wt(static_cast<std::size_t>(ckk) * f);
    for (int fi = 0; fi < f; ++fi)
        for (int p = 0; p < ckk; ++p)
            wt[static_cast<std::size_t>(p) * f + fi] =
                weights.values[static_cast<std::size_t>(fi) * ckk + p];

    for (int ni = 0; ni < n; ++ni) {
        const T* x = input.data() + static_cast<std::size_t>(ni) * c * h * w;
        const T* up = upstream.data() + static_cast<std::size_t>(ni) * f * oh * ow;

        for (int fi = 0; fi < f; ++fi) {
            T acc = T(0);
            const T* row = up + static_cast<std::size_t>(fi) * oh * ow;
            for (int j = 0; j < oh * ow; ++j) acc += row[j];
            grad_bias.values[static_cast<std::size_t>(fi)] += acc;
        }

        detail::im2col(x, c, h, w, k, cache.stride, cache.padding, oh, ow, cols.data());
        detail::gemm_nt_acc(up, cols.data(), grad_weights.data(), f, oh * ow, ckk);

        std::fill(gcols.begin(), gcols.end(), T(0));
        detail::gemm_acc(wt.data(), up, gcols.data(), ckk, f, oh * ow);
        T* gx = grad_input.data() + static_cast<std::size_t>(ni) * c * h * w;
        detail::col2im_acc(gcols.data(), c, h, w, k, cache.stride, cache.padding, oh, ow, gx);
    }
}

// ---- transposed conv2d ---------------------------------------------------
//
// Weight layout matches the paired conv2d: [in_channels, out_channels, k, k];
// forward is the exact adjoint of conv2d_forward with those weights.

template <typename T>
TensorT<T> conv_transpose2d_forward(const TensorT<T>& input, const TensorT<T>& weights,
                                    const TensorT<T>& bias, int stride, int padding,
                                    int output_padding,
                                    ConvTranspose2dCache<T>* cache = nullptr) {
    if (input.rank() != 4 || weights.rank() != 4)
        throw ShapeMismatch("conv_transpose2d: input and weights must be rank 4");
    const int n = input.dim(0), f = input.dim(1), ih = input.dim(2), iw = input.dim(3);
    const int c = weights.dim(1), k = weights.dim(2);
    if (weights.dim(0) != f)
        throw ShapeMismatch("conv_transpose2d: weight in-channels " +
                            std::to_string(weights.dim(0)) + " != input channels " +
                            std::to_string(f));
    require_shape(bias, {c}, "conv_transpose2d bias");
    if (output_padding < 0 || (output_padding >= stride && output_padding != 0))
        throw ShapeMismatch("conv_transpose2d: output_padding must be in [0, stride)");
    const int oh = (ih - 1) * stride - 2 * padding + k + output_padding;
    const int ow = (iw - 1) * stride - 2 * padding + k + output_padding;
    if (oh < 1 || ow < 1) throw ShapeMismatch("conv_transpose2d: output dims collapse to zero");

    TensorT<T> out({n, c, oh, ow});
    const int ckk = c * k * k;
    std::vector<T> gcols(static_cast<std::size_t>(ckk) * ih * iw);
    std::vector<T> wt(static_cast<std::size_t>(ckk) * f);
    for (int fi = 0; fi < f; ++fi)
        for (int p = 0; p < ckk; ++p)
            wt[static_cast<std::size_t>(p) * f + fi] =
                weights.values[static_cast<std::size_t>(fi) * ckk + p];

    for (int ni = 0; ni < n; ++ni) {
        const T* x = input.data() + static_cast<std::size_t>(ni) * f * ih * iw;
        T* y = out.data() + static_cast<std::size_t>(ni) * c * oh * ow;
        for (int ci = 0; ci < c; ++ci) {
            const T b = bias.values[static_cast<std::size_t>(ci)];
            T* row = y + static_cast<std::size_t>(ci) * oh * ow;
            for (int j = 0; j < oh * ow; ++j) row[j] = b;
        }
        std::fill(gcols.begin(), gcols.end(), T(0));
        detail::gemm_acc(wt.data(), x, gcols.data(), ckk, f, ih * iw);
        detail::col2im_acc(gcols.data(), c, oh, ow, k, stride, padding, ih, iw, y);
    }
    if (cache) {
        cache->input = input;
        cache->weights = weights;
        cache->stride = stride;
        cache->padding = padding;
        cache->output_padding = output_padding;
        cache->valid = true;
    }
    return out;
}

template <typename T>
void conv_transpose2d_backward(const TensorT<T>& upstream,
                               const ConvTranspose2dCache<T>& cache,
                               TensorT<T>& grad_input, TensorT<T>& grad_weights,
                               TensorT<T>& grad_bias) {
    if (!cache.valid) throw MissingCache("conv_transpose2d_backward: no forward cache");
    const auto& input = cache.input;
    const auto& weights = cache.weights;
    const int n = input.dim(0), f = input.dim(1), ih = input.dim(2), iw = input.dim(3);
    const int c = weights.dim(1), k = weights.dim(2);
    const int oh = (ih - 1) * cache.stride - 2 * cache.padding + k + cache.output_padding;
    const int ow = (iw - 1) * cache.stride - 2 * cache.padding + k + cache.output_padding;
    require_shape(upstream, {n, c, oh, ow}, "conv_transpose2d upstream");

    grad_input = TensorT<T>({n, f, ih, iw});
    grad_weights = TensorT<T>(weights.shape);
    grad_bias = TensorT<T>({c});

    const int ckk = c * k * k;
    std::vector<T> cols(static_cast<std::size_t>(ckk) * ih * iw);
    for (int ni = 0; ni < n; ++ni) {
        const T* x = input.data() + static_cast<std::size_t>(ni) * f * ih * iw;
        const T* up = upstream.data() + static_cast<std::size_t>(ni) * c * oh * ow;

        for (int ci = 0; ci < c; ++ci) {
            T acc = T(0);
            const T* row = up + static_cast<std::size_t>(ci) * oh * ow;
            for (int j = 0; j < oh * ow; ++j) acc += row[j];
            grad_bias.values[static_cast<std::size_t>(ci)] += acc;
        }

        // grad wrt input = conv2d(upstream) with the shared weights.
        detail::im2col(up, c, oh, ow, k, cache.stride, cache.padding, ih, iw, cols.data());
        T* gx = grad_input.data() + static_cast<std::size_t>(ni) * f * ih * iw;
        detail::gemm_acc(weights.data(), cols.data(), gx, f, ckk, ih * iw);

        // grad wrt weights: input plays the conv upstream role.
        detail::gemm_nt_acc(x, cols.data(), grad_weights.data(), f, ih * iw, ckk);
    }
}

// ---- dense ---------------------------------------------------------------

template <typename T>
TensorT<T> dense_forward(const TensorT<T>& input, const TensorT<T>& weights,
                         const TensorT<T>& bias, DenseCache<T>* cache = nullptr) {
    if (input.rank() != 2 || weights.rank() != 2)
        throw ShapeMismatch("dense: input and weights must be rank 2");
    const int n = input.dim(0), d = input.dim(1);
    if (weights.dim(0) != d)
        throw ShapeMismatch("dense: weight rows " + std::to_string(weights.dim(0)) +
                            " != input features " + std::to_string(d));
    const int k = weights.dim(1);
    require_shape(bias, {k}, "dense bias");

    TensorT<T> out({n, k});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            out.values[static_cast<std::size_t>(i) * k + j] = bias.values[static_cast<std::size_t>(j)];
    detail::gemm_acc(input.data(), weights.data(), out.data(), n, d, k);
    if (cache) {
        cache->input = input;
        cache->weights = weights;
        cache->valid = true;
    }
    return out;
}

template <typename T>
void dense_backward(const TensorT<T>& upstream, const DenseCache<T>& cache,
                    TensorT<T>& grad_input, TensorT<T>& grad_weights,
                    TensorT<T>& grad_bias) {
    if (!cache.valid) throw MissingCache("dense_backward: no forward cache");
    const int n = cache.input.dim(0), d = cache.input.dim(1);
    const int k = cache.weights.dim(1);
    require_shape(upstream, {n, k}, "dense upstream");

    grad_input = TensorT<T>({n, d});
    grad_weights = TensorT<T>({d, k});
    grad_bias = TensorT<T>({k});

    detail::gemm_nt_acc(upstream.data(), cache.weights.data(), grad_input.data(), n, k, d);

    // gw[d,k] += x^T * up: accumulate row by row.
    for (int i = 0; i < n; ++i) {
        const T* xrow = cache.input.data() + static_cast<std::size_t>(i) * d;
        const T* urow = upstream.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < d; ++p) {
            const T xv = xrow[p];
            if (xv == T(0)) continue;
            T* grow = grad_weights.data() + static_cast<std::size_t>(p) * k;
            for (int j = 0; j < k; ++j) grow[j] += xv * urow[j];
        }
        for (int j = 0; j < k; ++j) grad_bias.values[static_cast<std::size_t>(j)] += urow[j];
    }
}

// ---- activations -----------------------------------------------------------

template <typename T>
TensorT<T> leaky_relu_forward(const TensorT<T>& input, T negative_slope,
                              LeakyReluCache<T>* cache = nullptr) {
    TensorT<T> out;
    out.shape = input.shape;
    out.values.resize(input.values.size());
    for (std::size_t i = 0; i < input.values.size(); ++i) {
        const T x = input.values[i];
        out.values[i] = x > T(0) ? x : negative_slope * x;
    }
    if (cache) {
        cache->input = input;
        cache->negative_slope = negative_slope;
        cache->valid = true;
    }
    return out;
}

template <typename T>
TensorT<T> leaky_relu_backward(const TensorT<T>& upstream, const LeakyReluCache<T>& cache) {
    if (!cache.valid) throw MissingCache("leaky_relu_backward: no forward cache");
    if (upstream.shape != cache.input.shape)
        throw ShapeMismatch("leaky_relu upstream shape mismatch");
    TensorT<T> out;
    out.shape = upstream.shape;
    out.values.resize(upstream.values.size());
    for (std::size_t i = 0; i < upstream.values.size(); ++i) {
        // Subgradient at exactly zero is taken on the negative branch.
        const T m = cache.input.values[i] > T(0) ? T(1) : cache.negative_slope;
        out.values[i] = upstream.values[i] * m;
    }
    return out;
}

template <typename T>
TensorT<T> sigmoid_forward(const TensorT<T>& input, SigmoidCache<T>* cache = nullptr) {
    TensorT<T> out;
    out.shape = input.shape;
    out.values.resize(input.values.size());
    for (std::size_t i = 0; i < input.values.size(); ++i)
        out.values[i] = T(1) / (T(1) + std::exp(-input.values[i]));
    if (cache) {
        cache->output = out;
        cache->valid = true;
    }
    return out;
}

template <typename T>
TensorT<T> sigmoid_backward(const TensorT<T>& upstream, const SigmoidCache<T>& cache) {
    if (!cache.valid) throw MissingCache("sigmoid_backward: no forward cache");
    if (upstream.shape != cache.output.shape)
        throw ShapeMismatch("sigmoid upstream shape mismatch");
    TensorT<T> out;
    out.shape = upstream.shape;
    out.values.resize(upstream.values.size());
    for (std::size_t i = 0; i < upstream.values.size(); ++i) {
        const T s = cache.output.values[i];
        out.values[i] = upstream.values[i] * s * (T(1) - s);
    }
    return out;
}

}  // namespace gwad::nn

#endif  // GWAD_OPS_HPP
