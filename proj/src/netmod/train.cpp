#include "bbarena/netmod/train.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"

namespace bbarena::netmod {

LrSchedule parse_schedule(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "constant") return LrSchedule::Constant;
    if (lower == "cyclic") return LrSchedule::Cyclic;
    throw ContractViolation("unknown schedule '" + std::string(text) + "'");
}

void TrainConfig::validate(std::size_t dataset_size) const {
    require(learning_rate > 0.0 && std::isfinite(learning_rate),
            "TrainConfig: learning_rate must be positive");
    require(epochs >= 1, "TrainConfig: epochs must be at least 1");
    require(batch_size >= 1 && batch_size <= dataset_size,
            "TrainConfig: batch_size must lie in [1, N]");
    require(augment_sigma >= 0.0 && std::isfinite(augment_sigma),
            "TrainConfig: augment_sigma must be nonnegative");
}

double TrainConfig::rate_at(std::size_t step, std::size_t total_steps) const {
    if (schedule == LrSchedule::Constant || total_steps <= 1) return learning_rate;
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps - 1);
    const double triangle = 1.0 - std::fabs(2.0 * frac - 1.0);
    return learning_rate * (0.1 + 0.9 * triangle);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    return order;
}

TrainReport train(MlpModel model, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate(data.size());
    require(data.dim() == model.input_dim(), "train: dataset dimension does not match model input");
    require(data.num_classes() <= model.num_classes(),
            "train: dataset has more classes than model outputs");

    RngStream order_rng(cfg.seed, RngStream::stream_key({0x7EA1ull, 1}));
    RngStream noise_rng(cfg.seed, RngStream::stream_key({0x7EA1ull, 2}));
    const auto& k = kernels::active();

    const std::size_t n = data.size();
    const std::size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = batches_per_epoch * cfg.epochs;

    Gradients grads(model);
    std::vector<double> noisy(data.dim());
    TrainReport report{model, 0.0, {}};
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffled_indices(n, order_rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            grads.zero();
            double batch_loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = order[b];
                std::span<const double> x = data.input(idx).span();
                if (cfg.augment_sigma > 0.0) {
                    noise_rng.fill_normal(noisy);
                    k.add_scaled(x.data(), cfg.augment_sigma, noisy.data(), noisy.data(),
                                 noisy.size());
                    x = noisy;
                }
                batch_loss += loss_and_gradient(model, x, data.label(idx), grads);
            }
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "train: non-finite loss at epoch " << epoch << ", batch starting at "
                    << start << " (lr=" << cfg.rate_at(step, total_steps)
                    << ", gradient norm=" << grads.norm() << ")";
                throw TrainingDiverged(msg.str());
            }
            epoch_loss += batch_loss;
            const double rate = cfg.rate_at(step, total_steps) / static_cast<double>(stop - start);
            auto& layers = model.layers();
            for (std::size_t l = 0; l < layers.size(); ++l) {
                k.axpy(-rate, grads.weights[l].data(), layers[l].weights.data(),
                       layers[l].weights.size());
                k.axpy(-rate, grads.bias[l].data(), layers[l].bias.data(), layers[l].bias.size());
            }
            ++step;
        }
        report.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
    }

    report.train_accuracy = accuracy(model, data);
    report.model = std::move(model);
    return report;
}

TrainReport gf_finetune(const MlpModel& model, const Dataset& data, const TrainConfig& cfg) {
    require(cfg.augment_sigma > 0.0, "gf_finetune: augment_sigma must be positive");
    return train(model, data, cfg);
}

double accuracy(const MlpModel& model, const Dataset& data, double noise_sigma, RngStream& rng) {
    require(noise_sigma >= 0.0, "accuracy: noise_sigma must be nonnegative");
    require(data.dim() == model.input_dim(), "accuracy: dataset dimension does not match model");
    std::size_t correct = 0;
    std::vector<double> noisy(data.dim());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::span<const double> x = data.input(i).span();
        if (noise_sigma > 0.0) {
            rng.fill_normal(noisy);
            for (std::size_t j = 0; j < noisy.size(); ++j) noisy[j] = x[j] + noise_sigma * noisy[j];
            x = noisy;
        }
        if (predict(model, x) == data.label(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double accuracy(const MlpModel& model, const Dataset& data) {
    RngStream unused(0, 0);
    return accuracy(model, data, 0.0, unused);
}

Dataset make_blobs(std::size_t d, std::size_t num_classes, std::size_t n, double separation,
                   std::uint64_t seed, const BlobOptions& options) {
    require(d >= 2, "make_blobs: d must be at least 2");
    require(num_classes >= 2, "make_blobs: K must be at least 2");
    require(n >= num_classes, "make_blobs: N must be at least K");
    require(separation >= 0.0, "make_blobs: separation must be nonnegative");
    require(options.fine_dims < d, "make_blobs: fine_dims must leave at least one coarse dimension");
    require(options.center_margin >= 0.0 && options.center_margin < 0.5,
            "make_blobs: center_margin must lie in [0, 0.5)");

    const std::size_t coarse = d - options.fine_dims;
    const double side = 1.0 - 2.0 * options.center_margin;
    // Largest achievable distance: opposite corners of the center box plus the
    // fine coordinates at opposite signs.
    const double diameter = std::sqrt(static_cast<double>(coarse) * side * side +
                                      static_cast<double>(options.fine_dims) * 4.0 *
                                          options.fine_offset * options.fine_offset);
    if (separation > diameter) {
        std::ostringstream msg;
        msg << "make_blobs: separation " << separation << " infeasible for d=" << d
            << " (max center distance " << diameter << ")";
        throw ContractViolation(msg.str());
    }

    RngStream center_rng(seed, RngStream::stream_key({0xB10Bull, 1}));
    RngStream sample_rng(seed, RngStream::stream_key({0xB10Bull, 2}));

    constexpr int kMaxAttempts = 10000;
    std::vector<std::vector<double>> centers;
    for (std::size_t c = 0; c < num_classes; ++c) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            std::vector<double> candidate(d);
            for (std::size_t j = 0; j < coarse; ++j)
                candidate[j] = options.center_margin + side * center_rng.uniform();
            for (std::size_t j = coarse; j < d; ++j)
                candidate[j] = 0.5 + options.fine_offset * center_rng.sign();
            placed = std::all_of(centers.begin(), centers.end(), [&](const auto& other) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += (candidate[j] - other[j]) * (candidate[j] - other[j]);
                return std::sqrt(s) >= separation;
            });
            if (placed) centers.push_back(std::move(candidate));
        }
        if (!placed) {
            std::ostringstream msg;
            msg << "make_blobs: could not place " << num_classes << " centers " << separation
                << " apart in d=" << d;
            throw ContractViolation(msg.str());
        }
    }

    std::vector<Vector> inputs;
    std::vector<std::size_t> labels;
    inputs.reserve(n);
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % num_classes;
        std::vector<double> x(d);
        for (std::size_t j = 0; j < d; ++j) {
            const double spread = j < coarse ? options.spread : options.fine_spread;
            x[j] = std::min(1.0, std::max(0.0, centers[label][j] + spread * sample_rng.normal()));
        }
        inputs.emplace_back(std::move(x));
        labels.push_back(label);
    }
    std::ostringstream name;
    name << "blobs_d" << d << "_k" << num_classes << "_n" << n << "_s" << seed;
    return Dataset(name.str(), std::move(inputs), std::move(labels), num_classes);
}

}  // namespace bbarena::netmod
