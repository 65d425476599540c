#ifndef GWAD_VAE_HPP
#define GWAD_VAE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwad/adam.hpp"
#include "gwad/layers.hpp"
#include "gwad/rng.hpp"
#include "gwad/tensor.hpp"

namespace gwad::vae {

struct EmptyDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteLoss : std::runtime_error {
    int epoch = -1;
    int batch = -1;
    NonFiniteLoss(int epoch_idx, int batch_idx)
        : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch_idx) +
                             ", batch " + std::to_string(batch_idx)),
          epoch(epoch_idx),
          batch(batch_idx) {}
};

constexpr double kLogvarClamp = 10.0;

// Convolutional one-class VAE: five stride-2 conv blocks down to a
// 256 x (S/32) x (S/32) feature map, two dense heads for the Gaussian
// posterior, and a mirrored transposed-conv decoder ending in a sigmoid.
template <typename T>
struct VaeModelT {
    nn::StackT<T> encoder;
    nn::TensorT<T> mu_w, mu_b, logvar_w, logvar_b;
    nn::StackT<T> decoder;
    int latent_dim = 2;
    int image_size = 64;

    int feature_dim() const {
        const int s = image_size / 32;
        return 256 * s * s;
    }

    std::vector<std::pair<std::string, nn::TensorT<T>*>> named_parameters() {
        std::vector<std::pair<std::string, nn::TensorT<T>*>> out;
        auto add_stack = [&out](const char* prefix, nn::StackT<T>& stack) {
            for (std::size_t i = 0; i < stack.size(); ++i) {
                if (!stack.specs[i].has_params()) continue;
                const std::string base = std::string(prefix) + "." + std::to_string(i);
                out.emplace_back(base + ".weight", &stack.weights[i]);
                out.emplace_back(base + ".bias", &stack.biases[i]);
            }
        };
        add_stack("encoder", encoder);
        out.emplace_back("mu_head.weight", &mu_w);
        out.emplace_back("mu_head.bias", &mu_b);
        out.emplace_back("logvar_head.weight", &logvar_w);
        out.emplace_back("logvar_head.bias", &logvar_b);
        add_stack("decoder", decoder);
        return out;
    }

    void ensure_grads() {
        for (auto& [name, t] : named_parameters()) t->ensure_grad();
    }
    void zero_grad() {
        for (auto& [name, t] : named_parameters()) t->zero_grad();
    }

    template <typename U>
    VaeModelT<U> cast() const {
        VaeModelT<U> out;
        out.latent_dim = latent_dim;
        out.image_size = image_size;
        out.encoder.specs = encoder.specs;
        out.decoder.specs = decoder.specs;
        auto conv_stack = [](const nn::StackT<T>& src, nn::StackT<U>& dst) {
            dst.weights.clear();
            dst.biases.clear();
            for (const auto& w : src.weights) dst.weights.push_back(w.template cast<U>());
            for (const auto& b : src.biases) dst.biases.push_back(b.template cast<U>());
        };
        conv_stack(encoder, out.encoder);
        conv_stack(decoder, out.decoder);
        out.mu_w = mu_w.template cast<U>();
        out.mu_b = mu_b.template cast<U>();
        out.logvar_w = logvar_w.template cast<U>();
        out.logvar_b = logvar_b.template cast<U>();
        return out;
    }
};

using VaeModel = VaeModelT<float>;

template <typename T>
VaeModelT<T> create_model(std::uint64_t seed, int latent_dim = 2, int image_size = 64) {
    if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
    if (image_size < 32 || image_size % 32 != 0)
        throw std::invalid_argument("image_size must be a positive multiple of 32");

    using nn::LayerSpec;
    VaeModelT<T> m;
    m.latent_dim = latent_dim;
    m.image_size = image_size;
    const int s = image_size / 32;
    const int feat = 256 * s * s;

    Rng rng(seed);
    m.encoder = nn::make_stack<T>(
        {LayerSpec::conv2d(1, 16, 2, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv2d(16, 32, 2, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv2d(32, 64, 2, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv2d(64, 128, 2, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv2d(128, 256, 2, 1), LayerSpec::leaky_relu(), LayerSpec::flatten()},
        rng);

    const double head_bound = std::sqrt(6.0 / feat);
    m.mu_w = nn::TensorT<T>({feat, latent_dim});
    for (auto& v : m.mu_w.values) v = static_cast<T>(rng.uniform(-head_bound, head_bound));
    m.mu_b = nn::TensorT<T>({latent_dim});
    m.logvar_w = nn::TensorT<T>({feat, latent_dim});
    for (auto& v : m.logvar_w.values) v = static_cast<T>(rng.uniform(-head_bound, head_bound));
    m.logvar_b = nn::TensorT<T>({latent_dim});

    m.decoder = nn::make_stack<T>(
        {LayerSpec::dense(latent_dim, feat), LayerSpec::leaky_relu(),
         LayerSpec::reshape(256, s, s),
         LayerSpec::conv_transpose2d(256, 128, 2, 1, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv_transpose2d(128, 64, 2, 1, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv_transpose2d(64, 32, 2, 1, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv_transpose2d(32, 16, 2, 1, 1), LayerSpec::leaky_relu(),
         LayerSpec::conv_transpose2d(16, 1, 2, 1, 1), LayerSpec::sigmoid()},
        rng);
    return m;
}

inline VaeModel create_model(std::uint64_t seed, int latent_dim = 2, int image_size = 64) {
    return create_model<float>(seed, latent_dim, image_size);
}

// ---- core operations -------------------------------------------------------

template <typename T>
std::pair<nn::TensorT<T>, nn::TensorT<T>> encode(const VaeModelT<T>& model,
                                                 const nn::TensorT<T>& x) {
    const int n = x.dim(0);
    nn::require_shape(x, {n, 1, model.image_size, model.image_size}, "encode input");
    nn::TensorT<T> feat = nn::stack_forward(model.encoder, x);
    nn::TensorT<T> mu = nn::dense_forward(feat, model.mu_w, model.mu_b);
    nn::TensorT<T> logvar = nn::dense_forward(feat, model.logvar_w, model.logvar_b);
    for (auto& v : logvar.values)
        v = std::min(static_cast<T>(kLogvarClamp), std::max(static_cast<T>(-kLogvarClamp), v));
    return {std::move(mu), std::move(logvar)};
}

template <typename T>
nn::TensorT<T> reparameterize(const nn::TensorT<T>& mu, const nn::TensorT<T>& logvar,
                              const nn::TensorT<T>& noise) {
    if (mu.shape != logvar.shape || mu.shape != noise.shape)
        throw nn::ShapeMismatch("reparameterize: mu/logvar/noise shapes differ");
    nn::TensorT<T> z;
    z.shape = mu.shape;
    z.values.resize(mu.values.size());
    for (std::size_t i = 0; i < mu.values.size(); ++i)
        z.values[i] = mu.values[i] + std::exp(T(0.5) * logvar.values[i]) * noise.values[i];
    return z;
}

template <typename T>
nn::TensorT<T> decode(const VaeModelT<T>& model, const nn::TensorT<T>& z) {
    const int n = z.dim(0);
    nn::require_shape(z, {n, model.latent_dim}, "decode input");
    return nn::stack_forward(model.decoder, z);
}

// Per sample: 0.5 * sum_d (exp(lv) + mu^2 - 1 - lv), against the N(0,I) prior.
template <typename T>
nn::TensorT<T> kl_divergence(const nn::TensorT<T>& mu, const nn::TensorT<T>& logvar) {
    if (mu.shape != logvar.shape)
        throw nn::ShapeMismatch("kl_divergence: mu/logvar shapes differ");
    const int n = mu.dim(0), d = mu.dim(1);
    nn::TensorT<T> out({n});
    for (int i = 0; i < n; ++i) {
        T acc = T(0);
        for (int j = 0; j < d; ++j) {
            const T m = mu.values[static_cast<std::size_t>(i) * d + j];
            const T lv = logvar.values[static_cast<std::size_t>(i) * d + j];
            acc += std::exp(lv) + m * m - T(1) - lv;
        }
        out.values[static_cast<std::size_t>(i)] = T(0.5) * acc;
    }
    return out;
}

// Per sample: mean over all pixels of (x - x_hat)^2.
template <typename T>
nn::TensorT<T> reconstruction_error(const nn::TensorT<T>& x, const nn::TensorT<T>& x_hat) {
    if (x.shape != x_hat.shape)
        throw nn::ShapeMismatch("reconstruction_error: shapes differ");
    const int n = x.dim(0);
    const std::size_t per = x.values.size() / static_cast<std::size_t>(n);
    nn::TensorT<T> out({n});
    for (int i = 0; i < n; ++i) {
        T acc = T(0);
        const T* a = x.data() + static_cast<std::size_t>(i) * per;
        const T* b = x_hat.data() + static_cast<std::size_t>(i) * per;
        for (std::size_t p = 0; p < per; ++p) {
            const T d = a[p] - b[p];
            acc += d * d;
        }
        out.values[static_cast<std::size_t>(i)] = acc / static_cast<T>(per);
    }
    return out;
}

struct LossBreakdown {
    double reconstruction = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

template <typename T>
struct LossResultT {
    LossBreakdown batch;                  // batch means; total = reconstruction + kl
    std::vector<double> sample_rec;       // per-sample pixel-mean MSE
    std::vector<double> sample_kl;        // per-sample summed KL
};

// Forward pass of the full objective; with want_grads the parameter
// gradients of the batch-mean total loss are accumulated into .grad slots.
template <typename T>
LossResultT<T> loss(VaeModelT<T>& model, const nn::TensorT<T>& x,
                    const nn::TensorT<T>& noise, bool want_grads) {
    const int n = x.dim(0);
    nn::require_shape(x, {n, 1, model.image_size, model.image_size}, "loss input");
    nn::require_shape(noise, {n, model.latent_dim}, "loss noise");

    nn::StackCacheT<T> enc_cache, dec_cache;
    nn::DenseCache<T> mu_cache, lv_cache;

    nn::TensorT<T> feat =
        nn::stack_forward(model.encoder, x, want_grads ? &enc_cache : nullptr);
    nn::TensorT<T> mu =
        nn::dense_forward(feat, model.mu_w, model.mu_b, want_grads ? &mu_cache : nullptr);
    nn::TensorT<T> lv_raw =
        nn::dense_forward(feat, model.logvar_w, model.logvar_b, want_grads ? &lv_cache : nullptr);

    nn::TensorT<T> lv = lv_raw;
    for (auto& v : lv.values)
        v = std::min(static_cast<T>(kLogvarClamp), std::max(static_cast<T>(-kLogvarClamp), v));

    nn::TensorT<T> z = reparameterize(mu, lv, noise);
    nn::TensorT<T> x_hat =
        nn::stack_forward(model.decoder, z, want_grads ? &dec_cache : nullptr);

    nn::TensorT<T> rec = reconstruction_error(x, x_hat);
    nn::TensorT<T> kl = kl_divergence(mu, lv);

    LossResultT<T> result;
    result.sample_rec.resize(static_cast<std::size_t>(n));
    result.sample_kl.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        result.sample_rec[static_cast<std::size_t>(i)] = rec.values[static_cast<std::size_t>(i)];
        result.sample_kl[static_cast<std::size_t>(i)] = kl.values[static_cast<std::size_t>(i)];
        result.batch.reconstruction += rec.values[static_cast<std::size_t>(i)];
        result.batch.kl += kl.values[static_cast<std::size_t>(i)];
    }
    result.batch.reconstruction /= n;
    result.batch.kl /= n;
    result.batch.total = result.batch.reconstruction + result.batch.kl;

    if (!want_grads) return result;

    model.ensure_grads();
    const std::size_t per = x.values.size() / static_cast<std::size_t>(n);

    // d total / d x_hat = 2 (x_hat - x) / (n * pixels)
    nn::TensorT<T> gx_hat;
    gx_hat.shape = x_hat.shape;
    gx_hat.values.resize(x_hat.values.size());
    const T rec_scale = T(2) / (static_cast<T>(n) * static_cast<T>(per));
    for (std::size_t i = 0; i < x_hat.values.size(); ++i)
        gx_hat.values[i] = rec_scale * (x_hat.values[i] - x.values[i]);

    nn::TensorT<T> gz = nn::stack_backward(model.decoder, gx_hat, dec_cache);

    // Reparameterization plus the KL terms, batch-mean scaled.
    nn::TensorT<T> gmu, glv;
    gmu.shape = glv.shape = mu.shape;
    gmu.values.resize(mu.values.size());
    glv.values.resize(mu.values.size());
    const T inv_n = T(1) / static_cast<T>(n);
    for (std::size_t i = 0; i < mu.values.size(); ++i) {
        const T sigma_half = std::exp(T(0.5) * lv.values[i]);
        gmu.values[i] = gz.values[i] + inv_n * mu.values[i];
        T g = gz.values[i] * T(0.5) * sigma_half * noise.values[i] +
              inv_n * T(0.5) * (std::exp(lv.values[i]) - T(1));
        // Clamp gate: no gradient where the raw logvar was clipped.
        if (lv_raw.values[i] <= static_cast<T>(-kLogvarClamp) ||
            lv_raw.values[i] >= static_cast<T>(kLogvarClamp))
            g = T(0);
        glv.values[i] = g;
    }

    nn::TensorT<T> gfeat_mu, gw, gb;
    nn::dense_backward(gmu, mu_cache, gfeat_mu, gw, gb);
    for (std::size_t k = 0; k < gw.values.size(); ++k) model.mu_w.grad[k] += gw.values[k];
    for (std::size_t k = 0; k < gb.values.size(); ++k) model.mu_b.grad[k] += gb.values[k];

    nn::TensorT<T> gfeat_lv;
    nn::dense_backward(glv, lv_cache, gfeat_lv, gw, gb);
    for (std::size_t k = 0; k < gw.values.size(); ++k) model.logvar_w.grad[k] += gw.values[k];
    for (std::size_t k = 0; k < gb.values.size(); ++k) model.logvar_b.grad[k] += gb.values[k];

    for (std::size_t k = 0; k < gfeat_mu.values.size(); ++k)
        gfeat_mu.values[k] += gfeat_lv.values[k];

    nn::stack_backward(model.encoder, gfeat_mu, enc_cache);
    return result;
}

// ---- training and inference -------------------------------------------------

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    float lr = 1e-3f;
    std::uint64_t seed = 1;
};

struct EpochStats {
    double reconstruction = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

// Shuffled minibatch Adam training on baseline scalograms (each [1,S,S]).
// Throws EmptyDataset / NonFiniteLoss. Single-threaded and reproducible:
// one Rng(seed) drives shuffling and reparameterization noise.
std::vector<EpochStats> train(VaeModel& model, const std::vector<nn::Tensor>& images,
                              const TrainConfig& cfg);

// Per-sample total error (pixel-mean MSE + summed KL) from one stochastic
// pass. Noise is drawn per sample in dataset order from Rng(noise_seed), so
// the result is independent of batch_size.
std::vector<double> collect_errors(const VaeModel& model, const std::vector<nn::Tensor>& images,
                                   std::uint64_t noise_seed, int batch_size = 32);

// Deterministic latent means, one row of latent_dim values per sample.
std::vector<std::vector<double>> latent_mu(const VaeModel& model,
                                           const std::vector<nn::Tensor>& images,
                                           int batch_size = 32);

}  // namespace gwad::vae

#endif  // GWAD_VAE_HPP
