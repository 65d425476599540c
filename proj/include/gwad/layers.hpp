#ifndef GWAD_LAYERS_HPP
#define GWAD_LAYERS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gwad/ops.hpp"
#include "gwad/rng.hpp"
#include "gwad/tensor.hpp"

namespace gwad::nn {

enum class LayerKind {
    Conv2d,
    ConvTranspose2d,
    Dense,
    LeakyRelu,
    Sigmoid,
    Flatten,
    Reshape,
};

struct LayerSpec {
    LayerKind kind = LayerKind::Conv2d;
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 3;
    int stride = 1;
    int padding = 0;
    int output_padding = 0;
    double negative_slope = 0.2;
    std::array<int, 3> reshape_to{0, 0, 0};  // [C,H,W], batch dim implied

    static LayerSpec conv2d(int in_ch, int out_ch, int stride, int padding) {
        LayerSpec s;
        s.kind = LayerKind::Conv2d;
        s.in_channels = in_ch;
        s.out_channels = out_ch;
        s.stride = stride;
        s.padding = padding;
        return s;
    }
    static LayerSpec conv_transpose2d(int in_ch, int out_ch, int stride, int padding,
                                      int output_padding) {
        LayerSpec s;
        s.kind = LayerKind::ConvTranspose2d;
        s.in_channels = in_ch;
        s.out_channels = out_ch;
        s.stride = stride;
        s.padding = padding;
        s.output_padding = output_padding;
        return s;
    }
    static LayerSpec dense(int in_features, int out_features) {
        LayerSpec s;
        s.kind = LayerKind::Dense;
        s.in_channels = in_features;
        s.out_channels = out_features;
        return s;
    }
    static LayerSpec leaky_relu(double slope = 0.2) {
        LayerSpec s;
        s.kind = LayerKind::LeakyRelu;
        s.negative_slope = slope;
        return s;
    }
    static LayerSpec sigmoid() {
        LayerSpec s;
        s.kind = LayerKind::Sigmoid;
        return s;
    }
    static LayerSpec flatten() {
        LayerSpec s;
        s.kind = LayerKind::Flatten;
        return s;
    }
    static LayerSpec reshape(int c, int h, int w) {
        LayerSpec s;
        s.kind = LayerKind::Reshape;
        s.reshape_to = {c, h, w};
        return s;
    }

    bool has_params() const {
        return kind == LayerKind::Conv2d || kind == LayerKind::ConvTranspose2d ||
               kind == LayerKind::Dense;
    }
};

struct ShapeOnlyCache {
    std::vector<int> in_shape;
    bool valid = false;
};

template <typename T>
using LayerCache = std::variant<std::monostate, Conv2dCache<T>, ConvTranspose2dCache<T>,
                                DenseCache<T>, LeakyReluCache<T>, SigmoidCache<T>,
                                ShapeOnlyCache>;

// An ordered layer pipeline with its parameters. Weight layouts:
// Conv2d [out,in,k,k], ConvTranspose2d [in,out,k,k], Dense [in,out].
template <typename T>
struct StackT {
    std::vector<LayerSpec> specs;
    std::vector<TensorT<T>> weights;  // parallel to specs; empty where unused
    std::vector<TensorT<T>> biases;

    std::size_t size() const { return specs.size(); }
};

template <typename T>
struct StackCacheT {
    std::vector<LayerCache<T>> layers;
};

namespace detail {

inline std::vector<int> weight_shape(const LayerSpec& s) {
    switch (s.kind) {
        case LayerKind::Conv2d:
            return {s.out_channels, s.in_channels, s.kernel, s.kernel};
        case LayerKind::ConvTranspose2d:
            return {s.in_channels, s.out_channels, s.kernel, s.kernel};
        case LayerKind::Dense:
            return {s.in_channels, s.out_channels};
        default:
            return {};
    }
}

inline int fan_in(const LayerSpec& s) {
    switch (s.kind) {
        case LayerKind::Conv2d:
        case LayerKind::ConvTranspose2d:
            return s.in_channels * s.kernel * s.kernel;
        case LayerKind::Dense:
            return s.in_channels;
        default:
            return 0;
    }
}

}  // namespace detail

// He-uniform fan-in weights, zero biases. Consumes the stream in declared
// layer order, so one seeded Rng reproduces a whole model.
template <typename T>
void init_parameters(StackT<T>& stack, Rng& rng) {
    stack.weights.assign(stack.specs.size(), TensorT<T>{});
    stack.biases.assign(stack.specs.size(), TensorT<T>{});
    for (std::size_t i = 0; i < stack.specs.size(); ++i) {
        const LayerSpec& s = stack.specs[i];
        if (!s.has_params()) continue;
        TensorT<T> w(detail::weight_shape(s));
        const double bound = std::sqrt(6.0 / detail::fan_in(s));
        for (auto& v : w.values) v = static_cast<T>(rng.uniform(-bound, bound));
        stack.weights[i] = std::move(w);
        stack.biases[i] = TensorT<T>({s.out_channels});
    }
}

template <typename T>
StackT<T> make_stack(std::vector<LayerSpec> specs, Rng& rng) {
    StackT<T> stack;
    stack.specs = std::move(specs);
    init_parameters(stack, rng);
    return stack;
}

template <typename T>
TensorT<T> stack_forward(const StackT<T>& stack, const TensorT<T>& input,
                         StackCacheT<T>* cache = nullptr) {
    if (cache) cache->layers.assign(stack.size(), LayerCache<T>{});
    TensorT<T> x = input;
    for (std::size_t i = 0; i < stack.size(); ++i) {
        const LayerSpec& s = stack.specs[i];
        switch (s.kind) {
            case LayerKind::Conv2d: {
                Conv2dCache<T> c;
                x = conv2d_forward(x, stack.weights[i], stack.biases[i], s.stride, s.padding,
                                   cache ? &c : nullptr);
                if (cache) (*cache).layers[i] = std::move(c);
                break;
            }
            case LayerKind::ConvTranspose2d: {
                ConvTranspose2dCache<T> c;
                x = conv_transpose2d_forward(x, stack.weights[i], stack.biases[i], s.stride,
                                             s.padding, s.output_padding, cache ? &c : nullptr);
                if (cache) (*cache).layers[i] = std::move(c);
                break;
            }
            case LayerKind::Dense: {
                DenseCache<T> c;
                x = dense_forward(x, stack.weights[i], stack.biases[i], cache ? &c : nullptr);
                if (cache) (*cache).layers[i] = std::move(c);
                break;
            }
            case LayerKind::LeakyRelu: {
                LeakyReluCache<T> c;
                x = leaky_relu_forward(x, static_cast<T>(s.negative_slope),
                                       cache ? &c : nullptr);
                if (cache) (*cache).layers[i] = std::move(c);
                break;
            }
            case LayerKind::Sigmoid: {
                SigmoidCache<T> c;
                x = sigmoid_forward(x, cache ? &c : nullptr);
                if (cache) (*cache).layers[i] = std::move(c);
                break;
            }
            case LayerKind::Flatten: {
                ShapeOnlyCache c{x.shape, true};
                const int n = x.dim(0);
                const int rest = static_cast<int>(x.numel() / n);
                x.shape = {n, rest};
                if (cache) (*cache).layers[i] = std::move(c);
                break;
            }
            case LayerKind::Reshape: {
                ShapeOnlyCache c{x.shape, true};
                const int n = x.dim(0);
                const auto& r = s.reshape_to;
                if (static_cast<std::int64_t>(n) * r[0] * r[1] * r[2] != x.numel())
                    throw ShapeMismatch("reshape: element count mismatch");
                x.shape = {n, r[0], r[1], r[2]};
                if (cache) (*cache).layers[i] = std::move(c);
                break;
            }
        }
    }
    return x;
}

// Accumulates parameter gradients into weights[i].grad / biases[i].grad and
// returns the gradient with respect to the stack input.
template <typename T>
TensorT<T> stack_backward(StackT<T>& stack, const TensorT<T>& upstream,
                          StackCacheT<T>& cache) {
    if (cache.layers.size() != stack.size())
        throw MissingCache("stack_backward: cache does not match stack");
    TensorT<T> g = upstream;
    for (std::size_t idx = stack.size(); idx-- > 0;) {
        const LayerSpec& s = stack.specs[idx];
        switch (s.kind) {
            case LayerKind::Conv2d: {
                auto* c = std::get_if<Conv2dCache<T>>(&cache.layers[idx]);
                if (!c) throw MissingCache("conv2d_backward: no forward cache");
                TensorT<T> gx, gw, gb;
                conv2d_backward(g, *c, gx, gw, gb);
                stack.weights[idx].ensure_grad();
                stack.biases[idx].ensure_grad();
                for (std::size_t k = 0; k < gw.values.size(); ++k)
                    stack.weights[idx].grad[k] += gw.values[k];
                for (std::size_t k = 0; k < gb.values.size(); ++k)
                    stack.biases[idx].grad[k] += gb.values[k];
                g = std::move(gx);
                break;
            }
            case LayerKind::ConvTranspose2d: {
                auto* c = std::get_if<ConvTranspose2dCache<T>>(&cache.layers[idx]);
                if (!c) throw MissingCache("conv_transpose2d_backward: no forward cache");
                TensorT<T> gx, gw, gb;
                conv_transpose2d_backward(g, *c, gx, gw, gb);
                stack.weights[idx].ensure_grad();
                stack.biases[idx].ensure_grad();
                for (std::size_t k = 0; k < gw.values.size(); ++k)
                    stack.weights[idx].grad[k] += gw.values[k];
                for (std::size_t k = 0; k < gb.values.size(); ++k)
                    stack.biases[idx].grad[k] += gb.values[k];
                g = std::move(gx);
                break;
            }
            case LayerKind::Dense: {
                auto* c = std::get_if<DenseCache<T>>(&cache.layers[idx]);
                if (!c) throw MissingCache("dense_backward: no forward cache");
                TensorT<T> gx, gw, gb;
                dense_backward(g, *c, gx, gw, gb);
                stack.weights[idx].ensure_grad();
                stack.biases[idx].ensure_grad();
                for (std::size_t k = 0; k < gw.values.size(); ++k)
                    stack.weights[idx].grad[k] += gw.values[k];
                for (std::size_t k = 0; k < gb.values.size(); ++k)
                    stack.biases[idx].grad[k] += gb.values[k];
                g = std::move(gx);
                break;
            }
            case LayerKind::LeakyRelu: {
                auto* c = std::get_if<LeakyReluCache<T>>(&cache.layers[idx]);
                if (!c) throw MissingCache("leaky_relu_backward: no forward cache");
                g = leaky_relu_backward(g, *c);
                break;
            }
            case LayerKind::Sigmoid: {
                auto* c = std::get_if<SigmoidCache<T>>(&cache.layers[idx]);
                if (!c) throw MissingCache("sigmoid_backward: no forward cache");
                g = sigmoid_backward(g, *c);
                break;
            }
            case LayerKind::Flatten:
            case LayerKind::Reshape: {
                auto* c = std::get_if<ShapeOnlyCache>(&cache.layers[idx]);
                if (!c || !c->valid) throw MissingCache("reshape backward: no forward cache");
                g.shape = c->in_shape;
                break;
            }
        }
    }
    return g;
}

}  // namespace gwad::nn

#endif  // GWAD_LAYERS_HPP
