#ifndef NFISAC_GEOMETRY_HPP
#define NFISAC_GEOMETRY_HPP

#include "nfisac/core.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace nfisac {

// Planar antenna array: element positions (metres), unit radiation normal and
// the arithmetic centre of the elements. Immutable after construction.
class ArrayGeometry {
public:
    ArrayGeometry(std::vector<Vec3> elements, const Vec3& normal) : elements_(std::move(elements)) {
        if (elements_.empty()) throw GeometryError("array must have at least one element");
        const double n = normal.norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw GeometryError("array normal must be a finite non-zero vector");
        normal_ = normal / n;
        center_ = Vec3::Zero();
        for (const auto& e : elements_) {
            if (!e.allFinite()) throw GeometryError("element position is not finite");
            center_ += e;
        }
        center_ /= static_cast<double>(elements_.size());
    }

    std::size_t size() const noexcept { return elements_.size(); }
    const std::vector<Vec3>& elements() const noexcept { return elements_; }
    const Vec3& element(std::size_t i) const { return elements_.at(i); }
    const Vec3& normal() const noexcept { return normal_; }
    const Vec3& center() const noexcept { return center_; }

    // Max pairwise element distance; 0 for a single element.
    double aperture() const {
        double best = 0.0;
        for (std::size_t i = 0; i < elements_.size(); ++i)
            for (std::size_t j = i + 1; j < elements_.size(); ++j)
                best = std::max(best, (elements_[i] - elements_[j]).norm());
        return best;
    }

private:
    std::vector<Vec3> elements_;
    Vec3 normal_;
    Vec3 center_;
};

/// Uniform planar array of rows x cols elements.
///
/// The column axis u is `in_plane_axis` projected onto the plane orthogonal to
/// `normal`; the row axis is v = normal x u. Elements are stored row-major:
/// index = row * cols + col, at center + (col - (cols-1)/2) d u + (row - (rows-1)/2) d v.
/// With normal (0,0,1) and in_plane_axis (1,0,0) columns run along x and rows along y.
inline ArrayGeometry build_upa(int rows, int cols, double spacing, const Vec3& center, const Vec3& normal,
                               const Vec3& in_plane_axis) {
    if (rows < 1 || cols < 1) throw GeometryError("UPA needs rows, cols >= 1");
    if (!(spacing > 0.0)) throw GeometryError("UPA spacing must be positive");
    const double nn = normal.norm();
    const double an = in_plane_axis.norm();
    if (!(nn > 0.0) || !(an > 0.0)) throw GeometryError("UPA normal and in-plane axis must be non-zero");
    const Vec3 n = normal / nn;
    const Vec3 a = in_plane_axis / an;
    if (a.cross(n).norm() < 1e-12) throw GeometryError("UPA in-plane axis is parallel to the normal");

    const Vec3 u = (a - a.dot(n) * n).normalized();
    const Vec3 v = n.cross(u);
    std::vector<Vec3> elements;
    elements.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double du = (c - 0.5 * (cols - 1)) * spacing;
            const double dv = (r - 0.5 * (rows - 1)) * spacing;
            elements.emplace_back(center + du * u + dv * v);
        }
    }
    return ArrayGeometry(std::move(elements), n);
}

// Near-field boundary 2 D^2 / lambda.
inline double rayleigh_distance(double aperture, double wavelength) {
    if (!(wavelength > 0.0)) throw ArgumentError("wavelength must be positive");
    if (aperture < 0.0) throw ArgumentError("aperture must be non-negative");
    return 2.0 * aperture * aperture / wavelength;
}

// Cosine of the angle between p and w, clamped to [-1, 1].
inline double cos_angle(const Vec3& p, const Vec3& w) {
    const double np = p.norm();
    const double nw = w.norm();
    if (!(np > 0.0) || !(nw > 0.0)) throw ArgumentError("angle_between: zero vector");
    return std::clamp(p.dot(w) / (np * nw), -1.0, 1.0);
}

inline double angle_between(const Vec3& p, const Vec3& w) { return std::acos(cos_angle(p, w)); }

}  // namespace nfisac

#endif  // NFISAC_GEOMETRY_HPP
