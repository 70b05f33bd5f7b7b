#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bbarena/numkit/vector.hpp"

namespace bbarena::netmod {

/// Labelled inputs with coordinates in [0, 1]; all inputs share one dimension
/// and shape metadata.
class Dataset {
public:
    Dataset(std::string name, std::vector<Vector> inputs, std::vector<std::size_t> labels,
            std::size_t num_classes);

    const std::string& name() const { return name_; }
    std::size_t size() const { return inputs_.size(); }
    std::size_t dim() const { return inputs_.front().size(); }
    std::size_t num_classes() const { return num_classes_; }

    const Vector& input(std::size_t i) const { return inputs_[i]; }
    std::size_t label(std::size_t i) const { return labels_[i]; }
    const std::vector<Vector>& inputs() const { return inputs_; }
    const std::vector<std::size_t>& labels() const { return labels_; }

    Dataset subset(std::span<const std::size_t> indices, std::string name) const;

private:
    std::string name_;
    std::vector<Vector> inputs_;
    std::vector<std::size_t> labels_;
    std::size_t num_classes_;
};

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;  // outputs x inputs, row-major
    std::vector<double> bias;     // outputs
};

/// Feedforward classifier: rectifier on hidden layers, identity on the output
/// layer (logits).
class MlpModel {
public:
    /// All-zero parameters for layer_dims = [d, h1, ..., K].
    explicit MlpModel(std::vector<std::size_t> layer_dims);
    /// He-normal weights, zero biases.
    static MlpModel random(std::vector<std::size_t> layer_dims, std::uint64_t seed);
    /// Takes ownership of explicit parameters; shapes are validated.
    static MlpModel from_layers(std::vector<DenseLayer> layers);

    const std::vector<std::size_t>& layer_dims() const { return dims_; }
    std::size_t input_dim() const { return dims_.front(); }
    std::size_t num_classes() const { return dims_.back(); }
    std::size_t parameter_count() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> forward(const Vector& x) const { return forward(x.span()); }

private:
    std::vector<std::size_t> dims_;
    std::vector<DenseLayer> layers_;
};

/// Index of the largest logit; ties go to the lowest index.
std::size_t argmax(std::span<const double> logits);
std::size_t predict(const MlpModel& model, std::span<const double> x);

/// Parameter gradients with the same layout as the model's layers.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    explicit Gradients(const MlpModel& model);
    void zero();
    void scale(double factor);
    double norm() const;
};

/// Softmax cross-entropy of one sample; adds d(loss)/d(params) into `accum`.
double loss_and_gradient(const MlpModel& model, std::span<const double> x, std::size_t label,
                         Gradients& accum);
double cross_entropy(const MlpModel& model, std::span<const double> x, std::size_t label);

}  // namespace bbarena::netmod
