#include "bbarena/netmod/model.hpp"

#include <algorithm>
#include <cmath>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"
#include "bbarena/numkit/rng.hpp"

namespace bbarena::netmod {

Dataset::Dataset(std::string name, std::vector<Vector> inputs, std::vector<std::size_t> labels,
                 std::size_t num_classes)
    : name_(std::move(name)),
      inputs_(std::move(inputs)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
    require(!inputs_.empty(), "Dataset: at least one sample required");
    require(inputs_.size() == labels_.size(), "Dataset: inputs and labels differ in length");
    require(num_classes_ >= 1, "Dataset: at least one class required");
    const std::size_t d = inputs_.front().size();
    const auto& shape = inputs_.front().shape();
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        require(inputs_[i].size() == d && inputs_[i].shape() == shape,
                "Dataset: sample " + std::to_string(i) + " has inconsistent dimension or shape");
        require(labels_[i] < num_classes_,
                "Dataset: label " + std::to_string(labels_[i]) + " out of range");
    }
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string name) const {
    std::vector<Vector> inputs;
    std::vector<std::size_t> labels;
    inputs.reserve(indices.size());
    labels.reserve(indices.size());
    for (std::size_t i : indices) {
        require(i < size(), "Dataset::subset: index out of range");
        inputs.push_back(inputs_[i]);
        labels.push_back(labels_[i]);
    }
    return Dataset(std::move(name), std::move(inputs), std::move(labels), num_classes_);
}

MlpModel::MlpModel(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
    require(dims_.size() >= 2, "MlpModel: need at least input and output dimensions");
    for (std::size_t n : dims_) require(n >= 1, "MlpModel: layer dimensions must be positive");
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        DenseLayer layer;
        layer.inputs = dims_[l];
        layer.outputs = dims_[l + 1];
        layer.weights.assign(layer.inputs * layer.outputs, 0.0);
        layer.bias.assign(layer.outputs, 0.0);
        layers_.push_back(std::move(layer));
    }
}

MlpModel MlpModel::random(std::vector<std::size_t> layer_dims, std::uint64_t seed) {
    MlpModel model(std::move(layer_dims));
    RngStream rng(seed, RngStream::stream_key({0x1A17ull}));
    for (DenseLayer& layer : model.layers_) {
        const double scale = std::sqrt(2.0 / static_cast<double>(layer.inputs));
        for (double& w : layer.weights) w = scale * rng.normal();
    }
    return model;
}

MlpModel MlpModel::from_layers(std::vector<DenseLayer> layers) {
    require(!layers.empty(), "MlpModel: at least one layer required");
    std::vector<std::size_t> dims{layers.front().inputs};
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const DenseLayer& layer = layers[l];
        require(layer.inputs == dims.back(),
                "MlpModel: layer " + std::to_string(l) + " input size does not match previous layer");
        require(layer.weights.size() == layer.inputs * layer.outputs &&
                    layer.bias.size() == layer.outputs,
                "MlpModel: layer " + std::to_string(l) + " parameter shape mismatch");
        dims.push_back(layer.outputs);
    }
    MlpModel model(dims);
    model.layers_ = std::move(layers);
    return model;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& layer : layers_) n += layer.weights.size() + layer.bias.size();
    return n;
}

std::vector<double> MlpModel::forward(std::span<const double> x) const {
    require(x.size() == input_dim(), "MlpModel::forward: expected input of dimension " +
                                         std::to_string(input_dim()) + ", got " +
                                         std::to_string(x.size()));
    const auto& k = kernels::active();
    std::vector<double> current(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const DenseLayer& layer = layers_[l];
        next.resize(layer.outputs);
        k.matvec_bias(layer.weights.data(), current.data(), layer.bias.data(), next.data(),
                      layer.outputs, layer.inputs);
        if (l + 1 < layers_.size()) k.relu(next.data(), next.size());
        current.swap(next);
    }
    return current;
}

std::size_t argmax(std::span<const double> logits) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j)
        if (logits[j] > logits[best]) best = j;
    return best;
}

std::size_t predict(const MlpModel& model, std::span<const double> x) {
    return argmax(model.forward(x));
}

Gradients::Gradients(const MlpModel& model) {
    for (const DenseLayer& layer : model.layers()) {
        weights.emplace_back(layer.weights.size(), 0.0);
        bias.emplace_back(layer.bias.size(), 0.0);
    }
}

void Gradients::zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::scale(double factor) {
    for (auto& w : weights)
        for (double& v : w) v *= factor;
    for (auto& b : bias)
        for (double& v : b) v *= factor;
}

double Gradients::norm() const {
    double s = 0.0;
    for (const auto& w : weights) s += kernels::sum_squares(w);
    for (const auto& b : bias) s += kernels::sum_squares(b);
    return std::sqrt(s);
}

namespace {

// Softmax probabilities and -log p[label], stable for large logits.
double softmax_cross_entropy(std::span<const double> logits, std::size_t label,
                             std::vector<double>& probs) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    probs.resize(logits.size());
    double total = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        probs[j] = std::exp(logits[j] - peak);
        total += probs[j];
    }
    for (double& p : probs) p /= total;
    return -(logits[label] - peak - std::log(total));
}

}  // namespace

double cross_entropy(const MlpModel& model, std::span<const double> x, std::size_t label) {
    require(label < model.num_classes(), "cross_entropy: label out of range");
    std::vector<double> probs;
    const std::vector<double> logits = model.forward(x);
    return softmax_cross_entropy(logits, label, probs);
}

double loss_and_gradient(const MlpModel& model, std::span<const double> x, std::size_t label,
                         Gradients& accum) {
    require(x.size() == model.input_dim(), "loss_and_gradient: input dimension mismatch");
    require(label < model.num_classes(), "loss_and_gradient: label out of range");
    const auto& k = kernels::active();
    const auto& layers = model.layers();
    const std::size_t depth = layers.size();

    // activations[l] is the input of layer l; pre[l] its pre-activation output.
    std::vector<std::vector<double>> activations(depth + 1);
    std::vector<std::vector<double>> pre(depth);
    activations[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < depth; ++l) {
        const DenseLayer& layer = layers[l];
        pre[l].resize(layer.outputs);
        k.matvec_bias(layer.weights.data(), activations[l].data(), layer.bias.data(),
                      pre[l].data(), layer.outputs, layer.inputs);
        activations[l + 1] = pre[l];
        if (l + 1 < depth) k.relu(activations[l + 1].data(), layer.outputs);
    }

    std::vector<double> delta;
    const double loss = softmax_cross_entropy(activations[depth], label, delta);
    delta[label] -= 1.0;

    std::vector<double> back;
    for (std::size_t l = depth; l-- > 0;) {
        const DenseLayer& layer = layers[l];
        for (std::size_t r = 0; r < layer.outputs; ++r) {
            accum.bias[l][r] += delta[r];
            k.axpy(delta[r], activations[l].data(), accum.weights[l].data() + r * layer.inputs,
                   layer.inputs);
        }
        if (l == 0) break;
        back.resize(layer.inputs);
        k.matvec_transposed(layer.weights.data(), delta.data(), back.data(), layer.outputs,
                            layer.inputs);
        for (std::size_t i = 0; i < layer.inputs; ++i)
            if (!(pre[l - 1][i] > 0.0)) back[i] = 0.0;
        delta.swap(back);
    }
    return loss;
}

}  // namespace bbarena::netmod
