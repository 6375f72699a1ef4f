#pragma once

#include "pinnfdm/problems.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace pinnfdm {

/// Random streams. Every consumer draws from std::mt19937_64 seeded with
/// derive_seed(base_seed, stream, index) (a SplitMix64 mix), so e.g. the
/// collocation set of Adam epoch e is reproducible on its own. Uniform doubles
/// are the top 53 bits of a draw, offset by half an ulp so they lie in (0, 1).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);
double uniform_open01(std::mt19937_64& rng);

namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kAdamCollocation = 2;
inline constexpr std::uint64_t kLbfgsCollocation = 3;
inline constexpr std::uint64_t kEvalCollocation = 4;
inline constexpr std::uint64_t kHiddenInit = 5;
} // namespace stream

/// Latin hypercube design of n points in (0,1)^dims, stored column-wise
/// (dims x n). On every axis exactly one coordinate falls in each stratum
/// [k/n, (k+1)/n); strata are permuted independently per axis (Fisher-Yates).
Eigen::MatrixXd lhs(int n, int dims, std::uint64_t seed);

/// Dirichlet points with their prescribed values, points column-wise.
struct BoundarySet {
    Eigen::MatrixXd points;
    Eigen::VectorXd values;

    Eigen::Index size() const { return values.size(); }
};

struct SampleSet {
    Eigen::MatrixXd interior;
    BoundarySet boundary;
    std::uint64_t seed = 0;
};

BoundarySet boundary_points_1d(const ProblemSpec1D& spec);
BoundarySet boundary_points_1d(const FipSpec& spec);

/// n_per_edge points on each of the four edges, at the cell centres
/// t = (k + 1/2) / n_per_edge of the edge, traversed bottom, right, top, left.
/// Corners are never sampled; n_per_edge = 1 gives the four edge midpoints.
BoundarySet boundary_points_2d(const ProblemSpec2D& spec, int n_per_edge);

/// LHS interior points mapped onto the problem domain plus its boundary set.
SampleSet sample_problem(const ProblemSpec1D& spec, int n_interior, std::uint64_t seed);
SampleSet sample_problem(const ProblemSpec2D& spec, int n_interior, int n_per_edge, std::uint64_t seed);
SampleSet sample_problem(const FipSpec& spec, int n_interior, std::uint64_t seed);

} // namespace pinnfdm
