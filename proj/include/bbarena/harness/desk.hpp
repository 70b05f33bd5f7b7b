#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "bbarena/netmod/train.hpp"

namespace bbarena::harness {

/// The shipped desk-scale target: Gaussian blobs in [0,1]^64 with four
/// classes and a 64-32-32-4 rectifier MLP trained on them.
struct DeskTarget {
    std::size_t d = 64;
    std::size_t num_classes = 4;
    std::size_t samples = 4096;
    double separation = 0.0;
    netmod::BlobOptions blobs{.spread = 0.05, .center_margin = 0.40};
    std::vector<std::size_t> hidden{32, 32};
    netmod::TrainConfig train{.learning_rate = 0.05, .epochs = 30, .batch_size = 64, .seed = 1};
    std::uint64_t seed = 1;
};

struct DeskFiles {
    std::filesystem::path dataset;  // <dir>/blobs.csv
    std::filesystem::path model;    // <dir>/mlp.model
    double train_accuracy = 0.0;
};

/// Generates the dataset, trains the model and writes both under `dir`.
/// Deterministic: the same target always yields byte-identical files.
DeskFiles prepare_desk(const std::filesystem::path& dir, const DeskTarget& target = {});

}  // namespace bbarena::harness
