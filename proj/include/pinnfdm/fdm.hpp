#pragma once

#include "pinnfdm/problems.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace pinnfdm {

/// Node-centred uniform grid: n_cells + 1 nodes including both endpoints.
struct Grid1D {
    double lo = 0.0;
    double hi = 1.0;
    int n_cells = 0;

    double spacing() const { return (hi - lo) / n_cells; }
    double node(int i) const;
    int n_nodes() const { return n_cells + 1; }
    std::vector<double> nodes() const;
};

/// (nx + 1) x (ny + 1) nodes; values are stored with x fastest, index = j * (nx + 1) + i.
struct Grid2D {
    Box2D box;
    int nx = 0;
    int ny = 0;

    double hx() const { return (box.x_hi - box.x_lo) / nx; }
    double hy() const { return (box.y_hi - box.y_lo) / ny; }
    double x(int i) const;
    double y(int j) const;
    int n_nodes() const { return (nx + 1) * (ny + 1); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * (nx + 1) + i; }
};

struct SolveInfo {
    bool converged = true;
    int iterations = 0;            ///< sweeps for iterative methods, 0 for direct
    double final_update_norm = 0.0; ///< max-norm of the last sweep's update
    double wall_time = 0.0;        ///< seconds
};

struct FieldSolution1D {
    Grid1D grid;
    std::vector<double> values;
    SolveInfo info;
};

struct FieldSolution2D {
    Grid2D grid;
    std::vector<double> values;
    SolveInfo info;

    double at(int i, int j) const { return values[grid.index(i, j)]; }
};

enum class Method2D { GaussSeidel, SOR, Direct };
enum class FipMethod { Direct, Jacobi };

Method2D parse_method_2d(std::string_view text);
std::string_view to_string(Method2D method);
FipMethod parse_fip_method(std::string_view text);
std::string_view to_string(FipMethod method);

inline constexpr double kDefaultTol = 1e-10;
inline constexpr int kDefaultMaxIter = 200000;

struct Poisson2DOptions {
    Method2D method = Method2D::SOR;
    double tol = kDefaultTol;
    int max_iter = kDefaultMaxIter;
    std::optional<double> omega; ///< SOR relaxation; defaults to optimal_sor_omega
};

struct FipOptions {
    FipMethod method = FipMethod::Direct;
    double tol = kDefaultTol;
    int max_iter = kDefaultMaxIter;
};

/// Thomas algorithm for a tridiagonal system. lower[0] and upper[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Optimal SOR factor for the five-point Laplacian on an nx x ny rectangle,
/// 2 / (1 + sqrt(1 - rho_J^2)). On the unit square this is 2 / (1 + sin(pi h)).
double optimal_sor_omega(const Grid2D& grid);

/// Direct solve of (u[i-1] - 2u[i] + u[i+1]) / h^2 = f(x_i).
FieldSolution1D solve_poisson_1d(const ProblemSpec1D& spec, int n_cells);

/// Five-point stencil. Iterative methods start from a zero interior and stop
/// when the max-norm update of a sweep drops to tol; if max_iter is reached
/// first the last iterate is returned with info.converged = false.
FieldSolution2D solve_poisson_2d(const ProblemSpec2D& spec, int nx, int ny, const Poisson2DOptions& options = {});

/// (U[i-1] - 2U[i] + U[i+1]) / h^2 - a(x_i) U[i] = Q(x_i) on [0, L].
FieldSolution1D solve_fip_fdm(const FipSpec& spec, int n_cells, const FipOptions& options = {});

} // namespace pinnfdm
