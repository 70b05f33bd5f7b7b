#include "bbarena/harness/desk.hpp"

#include "bbarena/netmod/io.hpp"

namespace bbarena::harness {

DeskFiles prepare_desk(const std::filesystem::path& dir, const DeskTarget& target) {
    std::filesystem::create_directories(dir);
    const netmod::Dataset data = netmod::make_blobs(target.d, target.num_classes, target.samples,
                                                    target.separation, target.seed, target.blobs);
    std::vector<std::size_t> dims{target.d};
    dims.insert(dims.end(), target.hidden.begin(), target.hidden.end());
    dims.push_back(target.num_classes);
    const netmod::TrainReport report =
        netmod::train(netmod::MlpModel::random(dims, target.seed), data, target.train);

    DeskFiles files{dir / "blobs.csv", dir / "mlp.model", report.train_accuracy};
    netmod::save_dataset_csv(data, files.dataset);
    netmod::save_model(report.model, files.model);
    return files;
}

}  // namespace bbarena::harness
