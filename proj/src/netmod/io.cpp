#include "bbarena/netmod/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "bbarena/numkit/error.hpp"

namespace bbarena::netmod {

namespace {

void write_values(std::ostream& out, const std::vector<double>& values) {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        out << buf;
    }
    out << '\n';
}

std::vector<double> parse_doubles(const std::string& line, char sep, const std::string& where) {
    std::vector<double> values;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && (*p == sep || *p == ' ' || *p == '\r' || *p == '\t')) ++p;
        if (p >= end) break;
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{}) throw std::runtime_error(where + ": malformed number");
        values.push_back(v);
        p = next;
        if (p < end && *p != sep && *p != ' ' && *p != '\r' && *p != '\t')
            throw std::runtime_error(where + ": unexpected character '" + std::string(1, *p) + "'");
    }
    return values;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

void write_model(std::ostream& out, const MlpModel& model) {
    out << "MODELv1\n";
    const auto& dims = model.layer_dims();
    for (std::size_t i = 0; i < dims.size(); ++i) out << (i ? " " : "") << dims[i];
    out << '\n';
    for (const DenseLayer& layer : model.layers()) {
        write_values(out, layer.weights);
        write_values(out, layer.bias);
    }
}

MlpModel read_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || (line != "MODELv1" && line != "MODELv1\r"))
        throw std::runtime_error("model file: missing MODELv1 header");
    if (!std::getline(in, line)) throw std::runtime_error("model file: missing layer dims");
    std::vector<std::size_t> dims;
    {
        std::istringstream ss(line);
        std::size_t v;
        while (ss >> v) dims.push_back(v);
    }
    if (dims.size() < 2) throw std::runtime_error("model file: need at least two layer dims");
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.inputs = dims[l];
        layer.outputs = dims[l + 1];
        const std::string where = "model file layer " + std::to_string(l);
        if (!std::getline(in, line)) throw std::runtime_error(where + ": missing weights");
        layer.weights = parse_doubles(line, ' ', where);
        if (!std::getline(in, line)) throw std::runtime_error(where + ": missing biases");
        layer.bias = parse_doubles(line, ' ', where);
        if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs)
            throw std::runtime_error(where + ": parameter count does not match dims");
        layers.push_back(std::move(layer));
    }
    return MlpModel::from_layers(std::move(layers));
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    write_model(out, model);
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return read_model(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    out << "label";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.label(i);
        for (double v : data.input(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in, std::string name, std::size_t num_classes) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("label", 0) != 0)
        throw std::runtime_error("dataset csv: header must start with 'label'");
    const std::size_t d = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (d == 0) throw std::runtime_error("dataset csv: no feature columns");
    std::vector<Vector> inputs;
    std::vector<std::size_t> labels;
    std::size_t max_label = 0;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::string where = "dataset csv row " + std::to_string(row);
        std::vector<double> values = parse_doubles(line, ',', where);
        if (values.size() != d + 1)
            throw std::runtime_error(where + ": expected " + std::to_string(d + 1) + " fields");
        const double label = values.front();
        if (label < 0 || label != std::floor(label))
            throw std::runtime_error(where + ": label must be a nonnegative integer");
        for (std::size_t j = 1; j < values.size(); ++j)
            if (!(values[j] >= 0.0 && values[j] <= 1.0))
                throw std::runtime_error(where + ": feature outside [0, 1]");
        labels.push_back(static_cast<std::size_t>(label));
        max_label = std::max(max_label, labels.back());
        inputs.emplace_back(std::vector<double>(values.begin() + 1, values.end()));
    }
    if (inputs.empty()) throw std::runtime_error("dataset csv: no samples");
    if (num_classes == 0) num_classes = max_label + 1;
    return Dataset(std::move(name), std::move(inputs), std::move(labels), num_classes);
}

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    write_dataset_csv(out, data);
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Dataset load_dataset_csv(const std::filesystem::path& path, std::size_t num_classes) {
    std::ifstream in = open_input(path);
    return read_dataset_csv(in, path.stem().string(), num_classes);
}

}  // namespace bbarena::netmod
