#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace bbarena {

/// Image layout metadata for a flattened input, stored HWC (channels fastest).
struct ImageShape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;

    std::size_t size() const { return height * width * channels; }
    std::size_t index(std::size_t row, std::size_t col, std::size_t ch) const {
        return (row * width + col) * channels + ch;
    }
    bool operator==(const ImageShape&) const = default;
};

/// A flattened input point of dimension d > 0.
class Vector {
public:
    explicit Vector(std::vector<double> values, std::optional<ImageShape> shape = std::nullopt);
    Vector(std::initializer_list<double> values);

    static Vector zeros(std::size_t dim, std::optional<ImageShape> shape = std::nullopt);
    static Vector filled(std::size_t dim, double value);

    std::size_t size() const { return values_.size(); }
    const std::optional<ImageShape>& shape() const { return shape_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    std::span<const double> span() const { return values_; }
    std::span<double> span() { return values_; }
    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }
    const std::vector<double>& values() const { return values_; }

    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

    /// Same shape metadata, new values (dimension must match).
    Vector with_values(std::vector<double> values) const;

    bool operator==(const Vector& other) const = default;

private:
    std::vector<double> values_;
    std::optional<ImageShape> shape_;
};

/// a + scale * b, keeping a's shape metadata.
Vector add_scaled(const Vector& a, double scale, std::span<const double> b);
/// a - b.
Vector difference(const Vector& a, const Vector& b);

}  // namespace bbarena
