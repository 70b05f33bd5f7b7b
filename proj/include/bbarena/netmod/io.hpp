#pragma once

#include <filesystem>
#include <iosfwd>

#include "bbarena/netmod/model.hpp"

namespace bbarena::netmod {

// Model file: "MODELv1", then the space-separated layer dims, then for each
// layer one line of row-major weights and one line of biases. Values are
// written with 17 significant digits so load(save(m)) is exact.
void write_model(std::ostream& out, const MlpModel& model);
MlpModel read_model(std::istream& in);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

// Dataset CSV: header "label,f0,...,f{d-1}", one row per sample. The class
// count is max(label) + 1 unless num_classes is given.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, std::string name, std::size_t num_classes = 0);
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset_csv(const std::filesystem::path& path, std::size_t num_classes = 0);

}  // namespace bbarena::netmod
