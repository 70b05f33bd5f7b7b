#pragma once

#include <string_view>

#include "bbarena/numkit/vector.hpp"

namespace bbarena {

enum class NormKind { L2, LINF };

std::string_view to_string(NormKind kind);
/// Accepts "l2"/"L2" and "linf"/"LINF"/"inf".
NormKind parse_norm_kind(std::string_view text);

double norm(std::span<const double> x, NormKind kind);
inline double norm(const Vector& x, NormKind kind) { return norm(x.span(), kind); }

/// Every coordinate mapped to min(1, max(0, value)).
Vector clamp01(Vector x);

/// Closed ball {x' : ||x' - center||_p <= radius}.
class NormBall {
public:
    NormBall(Vector center, double radius, NormKind kind);

    const Vector& center() const { return center_; }
    double radius() const { return radius_; }
    NormKind kind() const { return kind_; }

    /// Nearest point of the ball in the ball's own norm. Points inside are
    /// returned unchanged; an L2 projection at the center is a no-op.
    Vector project(const Vector& x) const;
    /// clamp01(project(x)): the feasible set of every attack iterate.
    Vector project_clamped(const Vector& x) const;

    bool contains(const Vector& x, double tolerance = 1e-9) const;
    double distance_from_center(const Vector& x) const;

private:
    void check_dimension(const Vector& x) const;

    Vector center_;
    double radius_;
    NormKind kind_;
    std::vector<double> lower_;  // center - radius, used by the LINF clamp
    std::vector<double> upper_;
};

}  // namespace bbarena
