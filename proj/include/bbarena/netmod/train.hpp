#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "bbarena/netmod/model.hpp"
#include "bbarena/numkit/rng.hpp"

namespace bbarena::netmod {

enum class LrSchedule { Constant, Cyclic };

LrSchedule parse_schedule(std::string_view text);

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    /// Gaussian augmentation scale in input units; 0 disables augmentation.
    double augment_sigma = 0.0;
    std::uint64_t seed = 0;
    LrSchedule schedule = LrSchedule::Constant;

    /// Throws ContractViolation unless lr > 0, epochs >= 1,
    /// 1 <= batch_size <= dataset_size and augment_sigma >= 0.
    void validate(std::size_t dataset_size) const;
    /// Learning rate for optimizer step `step` out of `total_steps`. The cyclic
    /// schedule is a single triangle from lr/10 up to lr at mid-training and back.
    double rate_at(std::size_t step, std::size_t total_steps) const;
};

struct TrainReport {
    MlpModel model;
    double train_accuracy = 0.0;
    std::vector<double> epoch_losses;
};

/// Mini-batch gradient descent on softmax cross-entropy. With augment_sigma > 0
/// every sample of every batch gets fresh augment_sigma * N(0, I) noise before
/// the forward pass. Deterministic given cfg.seed.
TrainReport train(MlpModel model, const Dataset& data, const TrainConfig& cfg);

/// Gaussian-augmentation fine-tuning of an already trained model; requires
/// cfg.augment_sigma > 0.
TrainReport gf_finetune(const MlpModel& model, const Dataset& data, const TrainConfig& cfg);

/// Fraction of samples classified correctly when each input is perturbed once by
/// noise_sigma * N(0, I). noise_sigma = 0 is plain accuracy and draws nothing.
double accuracy(const MlpModel& model, const Dataset& data, double noise_sigma, RngStream& rng);
double accuracy(const MlpModel& model, const Dataset& data);

struct BlobOptions {
    /// Per-coordinate standard deviation inside a cluster.
    double spread = 0.1;
    /// Center coordinates are drawn uniformly from [margin, 1 - margin].
    double center_margin = 0.15;
    /// Trailing coordinates with tiny in-cluster spread whose class centers sit
    /// at 0.5 +/- fine_offset. They separate the classes perfectly on clean data
    /// but are swamped by input noise of a few hundredths.
    std::size_t fine_dims = 0;
    double fine_offset = 0.01;
    double fine_spread = 0.002;
};

/// K Gaussian clusters in [0,1]^d whose centers are pairwise at least
/// `separation` apart (Euclidean). Labels cycle 0, 1, ..., K-1 so every class
/// gets floor(N/K) or ceil(N/K) samples. Coordinates are clamped to [0, 1].
Dataset make_blobs(std::size_t d, std::size_t num_classes, std::size_t n, double separation,
                   std::uint64_t seed, const BlobOptions& options = {});

/// Deterministic shuffle of indices [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng);

}  // namespace bbarena::netmod
