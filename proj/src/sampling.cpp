#include "pinnfdm/sampling.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinnfdm {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound)
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % bound;
}

Eigen::MatrixXd scale_1d(Eigen::MatrixXd unit, double lo, double hi)
{
    unit.array() = lo + (hi - lo) * unit.array();
    return unit;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index)
{
    return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

double uniform_open01(std::mt19937_64& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

Eigen::MatrixXd lhs(int n, int dims, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("lhs: n must be >= 1, got " + std::to_string(n));
    if (dims != 1 && dims != 2)
        throw std::invalid_argument("lhs: dims must be 1 or 2, got " + std::to_string(dims));
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd out(dims, n);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int d = 0; d < dims; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size(); i-- > 1;)
            std::swap(perm[i], perm[bounded(rng, i + 1)]);
        for (int j = 0; j < n; ++j) {
            const double stratum = perm[static_cast<std::size_t>(j)];
            // Rounding of stratum + u can reach the next stratum edge; keep it half-open.
            const double upper = (stratum + 1.0) / n;
            const double v = (stratum + uniform_open01(rng)) / n;
            out(d, j) = v < upper ? v : std::nextafter(upper, 0.0);
        }
    }
    return out;
}

BoundarySet boundary_points_1d(const ProblemSpec1D& spec)
{
    BoundarySet b;
    b.points.resize(1, 2);
    b.points << spec.domain_lo, spec.domain_hi;
    b.values.resize(2);
    b.values << spec.bc_lo, spec.bc_hi;
    return b;
}

BoundarySet boundary_points_1d(const FipSpec& spec)
{
    BoundarySet b;
    b.points.resize(1, 2);
    b.points << 0.0, spec.length;
    b.values.resize(2);
    b.values << spec.bc_lo, spec.bc_hi;
    return b;
}

BoundarySet boundary_points_2d(const ProblemSpec2D& spec, int n_per_edge)
{
    if (n_per_edge < 1)
        throw std::invalid_argument("boundary_points_2d: n_per_edge must be >= 1");
    const auto& d = spec.domain;
    BoundarySet b;
    b.points.resize(2, 4 * n_per_edge);
    b.values.resize(4 * n_per_edge);
    Eigen::Index c = 0;
    auto put = [&](double x, double y) {
        b.points(0, c) = x;
        b.points(1, c) = y;
        b.values(c) = spec.boundary(x, y);
        ++c;
    };
    for (int k = 0; k < n_per_edge; ++k) {
        const double t = (k + 0.5) / n_per_edge;
        put(d.x_lo + t * (d.x_hi - d.x_lo), d.y_lo);
    }
    for (int k = 0; k < n_per_edge; ++k) {
        const double t = (k + 0.5) / n_per_edge;
        put(d.x_hi, d.y_lo + t * (d.y_hi - d.y_lo));
    }
    for (int k = 0; k < n_per_edge; ++k) {
        const double t = (k + 0.5) / n_per_edge;
        put(d.x_hi - t * (d.x_hi - d.x_lo), d.y_hi);
    }
    for (int k = 0; k < n_per_edge; ++k) {
        const double t = (k + 0.5) / n_per_edge;
        put(d.x_lo, d.y_hi - t * (d.y_hi - d.y_lo));
    }
    return b;
}

SampleSet sample_problem(const ProblemSpec1D& spec, int n_interior, std::uint64_t seed)
{
    return {scale_1d(lhs(n_interior, 1, seed), spec.domain_lo, spec.domain_hi), boundary_points_1d(spec), seed};
}

SampleSet sample_problem(const ProblemSpec2D& spec, int n_interior, int n_per_edge, std::uint64_t seed)
{
    Eigen::MatrixXd pts = lhs(n_interior, 2, seed);
    const auto& d = spec.domain;
    pts.row(0).array() = d.x_lo + (d.x_hi - d.x_lo) * pts.row(0).array();
    pts.row(1).array() = d.y_lo + (d.y_hi - d.y_lo) * pts.row(1).array();
    return {std::move(pts), boundary_points_2d(spec, n_per_edge), seed};
}

SampleSet sample_problem(const FipSpec& spec, int n_interior, std::uint64_t seed)
{
    return {scale_1d(lhs(n_interior, 1, seed), 0.0, spec.length), boundary_points_1d(spec), seed};
}

} // namespace pinnfdm
