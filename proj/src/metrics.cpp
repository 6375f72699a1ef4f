#include "pinnfdm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pinnfdm {

namespace {

// Index of the cell containing t in a uniform partition of [lo, hi] into n cells,
// plus the local coordinate in [0, 1].
std::pair<int, double> locate(double t, double lo, double hi, int n)
{
    const double s = (t - lo) / (hi - lo) * n;
    int cell = static_cast<int>(std::floor(s));
    cell = std::clamp(cell, 0, n - 1);
    return {cell, s - cell};
}

std::string format(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string describe(double x, double y) { return "(" + format(x) + ", " + format(y) + ")"; }

} // namespace

double l2_norm(std::span<const double> v)
{
    if (v.empty())
        throw std::invalid_argument("l2_norm: empty vector");
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

double relative_l2(std::span<const double> approx, std::span<const double> exact)
{
    if (approx.size() != exact.size())
        throw std::invalid_argument("relative_l2: length mismatch");
    const double denom = l2_norm(exact);
    if (!(denom > 0.0))
        throw std::invalid_argument("relative_l2: reference has zero norm");
    double s = 0.0;
    for (std::size_t i = 0; i < approx.size(); ++i) {
        const double d = approx[i] - exact[i];
        s += d * d;
    }
    return std::sqrt(s) / denom;
}

ErrorSummary compare(std::span<const double> approx, std::span<const double> exact)
{
    ErrorSummary out;
    out.l2_relative = relative_l2(approx, exact);
    for (std::size_t i = 0; i < approx.size(); ++i)
        out.l_inf = std::max(out.l_inf, std::abs(approx[i] - exact[i]));
    out.n_points = approx.size();
    return out;
}

double convergence_order(std::span<const int> resolutions, std::span<const double> errors)
{
    if (resolutions.size() != errors.size() || resolutions.size() < 2)
        throw std::invalid_argument("convergence_order: need >= 2 (resolution, error) pairs");
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
            throw std::invalid_argument("convergence_order: errors must be positive and finite");
        if (resolutions[i] <= 0)
            throw std::invalid_argument("convergence_order: resolutions must be positive");
        if (i > 0 && resolutions[i] != 2 * resolutions[i - 1])
            throw std::invalid_argument("convergence_order: resolutions must double between entries");
    }
    const double n = static_cast<double>(errors.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const double x = -std::log2(static_cast<double>(resolutions[i])); // log2(h)
        const double y = std::log2(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> interpolate(const FieldSolution1D& field, std::span<const double> xs)
{
    const auto& g = field.grid;
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        if (!(x >= g.lo && x <= g.hi))
            throw std::invalid_argument("interpolate: point x = " + format(x) + " outside [" + format(g.lo) + ", " +
                                        format(g.hi) + "]");
        const auto [i, t] = locate(x, g.lo, g.hi, g.n_cells);
        const auto k = static_cast<std::size_t>(i);
        if (t == 0.0)
            out.push_back(field.values[k]);
        else if (t == 1.0)
            out.push_back(field.values[k + 1]);
        else
            out.push_back((1.0 - t) * field.values[k] + t * field.values[k + 1]);
    }
    return out;
}

std::vector<double> interpolate(const FieldSolution2D& field, std::span<const Point2> points)
{
    const auto& g = field.grid;
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (!(p[0] >= g.box.x_lo && p[0] <= g.box.x_hi && p[1] >= g.box.y_lo && p[1] <= g.box.y_hi))
            throw std::invalid_argument("interpolate: point " + describe(p[0], p[1]) + " outside the grid");
        const auto [i, s] = locate(p[0], g.box.x_lo, g.box.x_hi, g.nx);
        const auto [j, t] = locate(p[1], g.box.y_lo, g.box.y_hi, g.ny);
        const double v00 = field.at(i, j), v10 = field.at(i + 1, j);
        const double v01 = field.at(i, j + 1), v11 = field.at(i + 1, j + 1);
        if (s == 0.0 && t == 0.0)
            out.push_back(v00);
        else
            out.push_back((1.0 - s) * (1.0 - t) * v00 + s * (1.0 - t) * v10 + (1.0 - s) * t * v01 + s * t * v11);
    }
    return out;
}

std::vector<double> assessment_grid_1d(double lo, double hi)
{
    return Grid1D{lo, hi, kAssessmentNodes1D - 1}.nodes();
}

std::vector<Point2> assessment_grid_2d(const Box2D& box)
{
    const Grid2D g{box, kAssessmentNodes2D - 1, kAssessmentNodes2D - 1};
    std::vector<Point2> out;
    out.reserve(static_cast<std::size_t>(g.n_nodes()));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            out.push_back({g.x(i), g.y(j)});
    return out;
}

} // namespace pinnfdm
