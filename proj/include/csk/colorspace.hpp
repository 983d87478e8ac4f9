#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace csk {

// Linear RGB emission/reception triple with every channel in [0, 1].
struct RgbIntensity {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    RgbIntensity() = default;
    RgbIntensity(double r_, double g_, double b_) : r(r_), g(g_), b(b_) {
        if (!(r >= 0.0 && r <= 1.0 && g >= 0.0 && g <= 1.0 && b >= 0.0 && b <= 1.0))
            throw std::invalid_argument("RgbIntensity: channel outside [0, 1]");
    }

    static RgbIntensity from_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
    Eigen::Vector3d vec() const { return {r, g, b}; }

    bool operator==(const RgbIntensity& o) const { return r == o.r && g == o.g && b == o.b; }
};

// Point on the CIE 1931 (x, y) plane.
struct ChromaticityPoint {
    double x = 0.0;
    double y = 0.0;

    ChromaticityPoint() = default;
    ChromaticityPoint(double x_, double y_) : x(x_), y(y_) {
        if (!std::isfinite(x) || !std::isfinite(y))
            throw std::invalid_argument("ChromaticityPoint: non-finite coordinate");
    }

    Eigen::Vector2d vec() const { return {x, y}; }

    bool operator==(const ChromaticityPoint& o) const { return x == o.x && y == o.y; }
};

// Top two rows of the sRGB-primaries RGB -> XYZ matrix; this is the (x, y)
// conversion the demodulation pipeline applies to raw sensor triples.
inline const Eigen::Matrix<double, 2, 3>& rgb_to_xy_matrix() {
    static const Eigen::Matrix<double, 2, 3> m = [] {
        Eigen::Matrix<double, 2, 3> t;
        t << 0.4124, 0.3576, 0.1805,
             0.2126, 0.7152, 0.0722;
        return t;
    }();
    return m;
}

// Full 3x3 RGB -> XYZ tristimulus matrix (third row completes the standard set).
inline const Eigen::Matrix3d& rgb_to_xyz_matrix() {
    static const Eigen::Matrix3d m = [] {
        Eigen::Matrix3d t;
        t << 0.4124, 0.3576, 0.1805,
             0.2126, 0.7152, 0.0722,
             0.0193, 0.1192, 0.9505;
        return t;
    }();
    return m;
}

// Linear (x, y) image of an RGB triple: the matrix product itself, with no
// brightness normalization. Pure and linear in its argument.
inline ChromaticityPoint rgb_to_xy(const RgbIntensity& rgb) {
    const Eigen::Vector2d p = rgb_to_xy_matrix() * rgb.vec();
    return {p.x(), p.y()};
}

// Normalized chromaticity (X/(X+Y+Z), Y/(X+Y+Z)). Scale-invariant; rejects the
// all-zero input whose denominator vanishes.
inline ChromaticityPoint rgb_to_xy_chromaticity(const RgbIntensity& rgb) {
    const Eigen::Vector3d xyz = rgb_to_xyz_matrix() * rgb.vec();
    const double s = xyz.sum();
    if (s <= 0.0)
        throw std::domain_error("rgb_to_xy_chromaticity: degenerate chromaticity for zero input");
    return {xyz.x() / s, xyz.y() / s};
}

}  // namespace csk
