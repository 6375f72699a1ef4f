#pragma once

#include "pinnfdm/fdm.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pinnfdm {

struct ErrorSummary {
    double l2_relative = 0.0;
    double l_inf = 0.0;
    std::size_t n_points = 0;
};

double l2_norm(std::span<const double> v);

/// ||approx - exact||_2 / ||exact||_2. Throws std::invalid_argument on
/// length mismatch or a zero reference norm.
double relative_l2(std::span<const double> approx, std::span<const double> exact);

ErrorSummary compare(std::span<const double> approx, std::span<const double> exact);

/// Least-squares slope of log2(error) against log2(h), h = 1 / N. Resolutions
/// must double from one entry to the next.
double convergence_order(std::span<const int> resolutions, std::span<const double> errors);

using Point2 = std::array<double, 2>;

/// Piecewise-linear interpolation of a nodal field; exact at nodes.
std::vector<double> interpolate(const FieldSolution1D& field, std::span<const double> xs);
/// Bilinear interpolation of a nodal field; exact at nodes.
std::vector<double> interpolate(const FieldSolution2D& field, std::span<const Point2> points);

// Fixed assessment grids used for every reported error, so PINN and FDM
// numbers are computed on the same point set.
inline constexpr int kAssessmentNodes1D = 513;
inline constexpr int kAssessmentNodes2D = 101; // per axis

std::vector<double> assessment_grid_1d(double lo, double hi);
std::vector<Point2> assessment_grid_2d(const Box2D& box);

} // namespace pinnfdm
