#include "bbarena/numkit/ball.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"

namespace bbarena {

std::string_view to_string(NormKind kind) { return kind == NormKind::L2 ? "l2" : "linf"; }

NormKind parse_norm_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "l2") return NormKind::L2;
    if (lower == "linf" || lower == "inf" || lower == "l_inf") return NormKind::LINF;
    throw ContractViolation("unknown norm '" + std::string(text) + "' (expected l2 or linf)");
}

double norm(std::span<const double> x, NormKind kind) {
    if (kind == NormKind::L2) return std::sqrt(kernels::sum_squares(x));
    return kernels::max_abs(x);
}

Vector clamp01(Vector x) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::min(1.0, std::max(0.0, x[i]));
    return x;
}

NormBall::NormBall(Vector center, double radius, NormKind kind)
    : center_(std::move(center)), radius_(radius), kind_(kind) {
    require(radius > 0.0 && std::isfinite(radius), "NormBall: radius must be positive");
    lower_.resize(center_.size());
    upper_.resize(center_.size());
    for (std::size_t i = 0; i < center_.size(); ++i) {
        lower_[i] = center_[i] - radius_;
        upper_[i] = center_[i] + radius_;
    }
}

void NormBall::check_dimension(const Vector& x) const {
    require(x.size() == center_.size(),
            "NormBall: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                std::to_string(center_.size()) + ")");
}

double NormBall::distance_from_center(const Vector& x) const {
    check_dimension(x);
    std::vector<double> diff(x.size());
    kernels::active().add_scaled(x.data(), -1.0, center_.data(), diff.data(), x.size());
    return norm(diff, kind_);
}

Vector NormBall::project(const Vector& x) const {
    check_dimension(x);
    Vector out = x;
    if (kind_ == NormKind::LINF) {
        kernels::active().clamp_between(out.data(), lower_.data(), upper_.data(), out.size());
        return out;
    }
    std::vector<double> diff(x.size());
    kernels::active().add_scaled(x.data(), -1.0, center_.data(), diff.data(), x.size());
    const double dist = std::sqrt(kernels::sum_squares(diff));
    if (dist <= radius_ || dist == 0.0) return out;
    kernels::active().add_scaled(center_.data(), radius_ / dist, diff.data(), out.data(), out.size());
    return out;
}

Vector NormBall::project_clamped(const Vector& x) const { return clamp01(project(x)); }

bool NormBall::contains(const Vector& x, double tolerance) const {
    return distance_from_center(x) <= radius_ + tolerance;
}

}  // namespace bbarena
