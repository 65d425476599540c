#include "gwad/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gwad::vae {

namespace {

// Gather images[idx] for idx in batch into one [B,1,S,S] tensor.
nn::Tensor gather_batch(const std::vector<nn::Tensor>& images,
                        const std::vector<std::size_t>& order, std::size_t begin,
                        std::size_t end, int image_size) {
    const int b = static_cast<int>(end - begin);
    nn::Tensor x({b, 1, image_size, image_size});
    const std::size_t per = static_cast<std::size_t>(image_size) * image_size;
    for (std::size_t i = begin; i < end; ++i) {
        const nn::Tensor& img = images[order[i]];
        nn::require_shape(img, {1, image_size, image_size}, "training image");
        std::copy(img.values.begin(), img.values.end(),
                  x.values.begin() + static_cast<std::ptrdiff_t>((i - begin) * per));
    }
    return x;
}

}  // namespace

std::vector<EpochStats> train(VaeModel& model, const std::vector<nn::Tensor>& images,
                              const TrainConfig& cfg) {
    if (images.empty()) throw EmptyDataset("train: dataset is empty");
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");

    std::vector<EpochStats> history;
    if (cfg.epochs == 0) return history;

    auto named = model.named_parameters();
    std::vector<nn::Tensor*> params;
    params.reserve(named.size());
    for (auto& [name, t] : named) {
        t->ensure_grad();
        params.push_back(t);
    }
    nn::AdamState adam;
    adam.cfg.lr = cfg.lr;
    adam.init(params);

    Rng rng(cfg.seed);
    const std::size_t n = images.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        EpochStats stats;
        int batch_idx = 0;
        for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, begin + static_cast<std::size_t>(cfg.batch_size));
            const int b = static_cast<int>(end - begin);

            nn::Tensor x = gather_batch(images, order, begin, end, model.image_size);
            nn::Tensor noise({b, model.latent_dim});
            for (auto& v : noise.values) v = static_cast<float>(rng.gaussian());

            model.zero_grad();
            LossResultT<float> res = loss(model, x, noise, /*want_grads=*/true);
            if (!std::isfinite(res.batch.total))
                throw NonFiniteLoss(epoch, batch_idx);
            nn::adam_step(params, adam);

            stats.reconstruction += res.batch.reconstruction * b;
            stats.kl += res.batch.kl * b;
            stats.total += res.batch.total * b;
            ++batch_idx;
        }
        stats.reconstruction /= static_cast<double>(n);
        stats.kl /= static_cast<double>(n);
        stats.total /= static_cast<double>(n);
        history.push_back(stats);
    }
    return history;
}

std::vector<double> collect_errors(const VaeModel& model, const std::vector<nn::Tensor>& images,
                                   std::uint64_t noise_seed, int batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    const std::size_t n = images.size();
    const int d = model.latent_dim;

    // Per-sample noise drawn up front in dataset order: batching cannot
    // change which noise a sample sees.
    std::vector<float> noise_all(n * static_cast<std::size_t>(d));
    Rng rng(noise_seed);
    for (auto& v : noise_all) v = static_cast<float>(rng.gaussian());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<double> errors(n, 0.0);
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(n, begin + static_cast<std::size_t>(batch_size));
        const int b = static_cast<int>(end - begin);
        nn::Tensor x = gather_batch(images, order, begin, end, model.image_size);
        nn::Tensor noise({b, d});
        std::copy(noise_all.begin() + static_cast<std::ptrdiff_t>(begin * d),
                  noise_all.begin() + static_cast<std::ptrdiff_t>(end * d),
                  noise.values.begin());
        auto [mu, logvar] = encode(model, x);
        nn::Tensor z = reparameterize(mu, logvar, noise);
        nn::Tensor x_hat = decode(model, z);
        nn::Tensor rec = reconstruction_error(x, x_hat);
        nn::Tensor kl = kl_divergence(mu, logvar);
        for (std::size_t i = begin; i < end; ++i)
            errors[i] = static_cast<double>(rec.values[i - begin]) +
                        static_cast<double>(kl.values[i - begin]);
    }
    return errors;
}

std::vector<std::vector<double>> latent_mu(const VaeModel& model,
                                           const std::vector<nn::Tensor>& images,
                                           int batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    const std::size_t n = images.size();
    const int d = model.latent_dim;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<std::vector<double>> out(n);
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(n, begin + static_cast<std::size_t>(batch_size));
        nn::Tensor x = gather_batch(images, order, begin, end, model.image_size);
        auto [mu, logvar] = encode(model, x);
        for (std::size_t i = begin; i < end; ++i) {
            out[i].resize(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j)
                out[i][static_cast<std::size_t>(j)] =
                    mu.values[(i - begin) * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
        }
    }
    return out;
}

}  // namespace gwad::vae
