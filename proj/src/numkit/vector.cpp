#include "bbarena/numkit/vector.hpp"

#include <string>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"

namespace bbarena {

Vector::Vector(std::vector<double> values, std::optional<ImageShape> shape)
    : values_(std::move(values)), shape_(shape) {
    require(!values_.empty(), "Vector: dimension must be positive");
    if (shape_) {
        require(shape_->size() == values_.size(),
                "Vector: shape " + std::to_string(shape_->height) + "x" +
                    std::to_string(shape_->width) + "x" + std::to_string(shape_->channels) +
                    " does not match dimension " + std::to_string(values_.size()));
    }
}

Vector::Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

Vector Vector::zeros(std::size_t dim, std::optional<ImageShape> shape) {
    return Vector(std::vector<double>(dim, 0.0), shape);
}

Vector Vector::filled(std::size_t dim, double value) { return Vector(std::vector<double>(dim, value)); }

Vector Vector::with_values(std::vector<double> values) const {
    require(values.size() == values_.size(), "Vector::with_values: dimension mismatch");
    return Vector(std::move(values), shape_);
}

Vector add_scaled(const Vector& a, double scale, std::span<const double> b) {
    require(a.size() == b.size(), "add_scaled: dimension mismatch");
    Vector out = a;
    kernels::active().add_scaled(a.data(), scale, b.data(), out.data(), a.size());
    return out;
}

Vector difference(const Vector& a, const Vector& b) { return add_scaled(a, -1.0, b.span()); }

}  // namespace bbarena
