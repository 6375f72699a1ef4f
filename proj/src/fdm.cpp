#include "pinnfdm/fdm.hpp"

#include "pinnfdm/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pinnfdm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double checked(double value, const char* what, double x, double y = std::nan(""))
{
    if (!std::isfinite(value)) {
        std::string where = "x = " + std::to_string(x);
        if (!std::isnan(y))
            where += ", y = " + std::to_string(y);
        throw NumericalError(std::string("non-finite ") + what + " at " + where);
    }
    return value;
}

// Maximum number of stored band entries for the direct 2D solver (~400 MB).
constexpr double kMaxBandEntries = 5e7;

// Cholesky factorisation of a symmetric positive definite band matrix.
// band[i * (p + 1) + d] holds A(i, i - d) for d in [0, p].
class BandCholesky {
public:
    BandCholesky(std::vector<double> band, std::size_t n, std::size_t p) : l_(std::move(band)), n_(n), p_(p)
    {
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t k0 = j > p_ ? j - p_ : 0;
            double s = at(j, j);
            for (std::size_t k = k0; k < j; ++k)
                s -= at(j, k) * at(j, k);
            if (!(s > 0.0))
                throw NumericalError("band Cholesky: matrix is not positive definite");
            const double ljj = std::sqrt(s);
            at(j, j) = ljj;
            const std::size_t i_end = std::min(n_ - 1, j + p_);
            for (std::size_t i = j + 1; i <= i_end; ++i) {
                const std::size_t ki = i > p_ ? i - p_ : 0;
                double t = at(i, j);
                for (std::size_t k = std::max(ki, k0); k < j; ++k)
                    t -= at(i, k) * at(j, k);
                at(i, j) = t / ljj;
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const
    {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t k0 = i > p_ ? i - p_ : 0;
            double s = b[i];
            for (std::size_t k = k0; k < i; ++k)
                s -= at(i, k) * b[k];
            b[i] = s / at(i, i);
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            const std::size_t k_end = std::min(n_ - 1, ii + p_);
            double s = b[ii];
            for (std::size_t k = ii + 1; k <= k_end; ++k)
                s -= at(k, ii) * b[k];
            b[ii] = s / at(ii, ii);
        }
        return b;
    }

private:
    double& at(std::size_t i, std::size_t j) { return l_[i * (p_ + 1) + (i - j)]; }
    double at(std::size_t i, std::size_t j) const { return l_[i * (p_ + 1) + (i - j)]; }

    std::vector<double> l_;
    std::size_t n_;
    std::size_t p_;
};

void fill_boundary(FieldSolution2D& sol, const ProblemSpec2D& spec)
{
    const auto& g = sol.grid;
    for (int i = 0; i <= g.nx; ++i) {
        sol.values[g.index(i, 0)] = checked(spec.boundary(g.x(i), g.y(0)), "boundary value", g.x(i), g.y(0));
        sol.values[g.index(i, g.ny)] = checked(spec.boundary(g.x(i), g.y(g.ny)), "boundary value", g.x(i), g.y(g.ny));
    }
    for (int j = 0; j <= g.ny; ++j) {
        sol.values[g.index(0, j)] = checked(spec.boundary(g.x(0), g.y(j)), "boundary value", g.x(0), g.y(j));
        sol.values[g.index(g.nx, j)] = checked(spec.boundary(g.x(g.nx), g.y(j)), "boundary value", g.x(g.nx), g.y(j));
    }
}

void relax_2d(FieldSolution2D& sol, const std::vector<double>& f, double omega, double tol, int max_iter)
{
    const auto& g = sol.grid;
    const double cx = 1.0 / (g.hx() * g.hx());
    const double cy = 1.0 / (g.hy() * g.hy());
    const double inv_diag = 1.0 / (2.0 * cx + 2.0 * cy);
    const std::size_t stride = static_cast<std::size_t>(g.nx) + 1;
    auto& u = sol.values;

    double update = 0.0;
    int sweep = 0;
    while (sweep < max_iter) {
        ++sweep;
        update = 0.0;
        for (int j = 1; j < g.ny; ++j) {
            for (int i = 1; i < g.nx; ++i) {
                const std::size_t k = g.index(i, j);
                const double gs = (cx * (u[k - 1] + u[k + 1]) + cy * (u[k - stride] + u[k + stride]) - f[k]) * inv_diag;
                const double delta = omega * (gs - u[k]);
                u[k] += delta;
                update = std::max(update, std::abs(delta));
            }
        }
        if (!std::isfinite(update))
            throw NumericalError("2D relaxation diverged (non-finite update)");
        if (update <= tol)
            break;
    }
    sol.info.iterations = sweep;
    sol.info.final_update_norm = update;
    sol.info.converged = update <= tol;
}

void require_band_fits(int nx, int ny)
{
    const double n = static_cast<double>(nx - 1) * static_cast<double>(ny - 1);
    if (n * static_cast<double>(nx) > kMaxBandEntries)
        throw std::invalid_argument("direct 2D solve: grid too large for band elimination (" + std::to_string(nx) +
                                    "x" + std::to_string(ny) + "); use SOR");
}

void direct_2d(FieldSolution2D& sol, const std::vector<double>& f)
{
    const auto& g = sol.grid;
    const std::size_t m = static_cast<std::size_t>(g.nx) - 1;
    const std::size_t rows = static_cast<std::size_t>(g.ny) - 1;
    const std::size_t n = m * rows;
    const std::size_t p = m;

    const double cx = 1.0 / (g.hx() * g.hx());
    const double cy = 1.0 / (g.hy() * g.hy());
    // Negated Laplacian: SPD, diagonal 2cx + 2cy, off-diagonals -cx (x-neighbours) and -cy (y-neighbours).
    std::vector<double> band(n * (p + 1), 0.0);
    std::vector<double> rhs(n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            const std::size_t row = r * m + c;
            const int i = static_cast<int>(c) + 1;
            const int j = static_cast<int>(r) + 1;
            band[row * (p + 1)] = 2.0 * cx + 2.0 * cy;
            if (c > 0)
                band[row * (p + 1) + 1] = -cx;
            if (r > 0)
                band[row * (p + 1) + p] = -cy;
            double b = -f[g.index(i, j)];
            if (i == 1)
                b += cx * sol.at(0, j);
            if (i == g.nx - 1)
                b += cx * sol.at(g.nx, j);
            if (j == 1)
                b += cy * sol.at(i, 0);
            if (j == g.ny - 1)
                b += cy * sol.at(i, g.ny);
            rhs[row] = b;
        }
    }
    const auto x = BandCholesky(std::move(band), n, p).solve(std::move(rhs));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < m; ++c)
            sol.values[g.index(static_cast<int>(c) + 1, static_cast<int>(r) + 1)] = x[r * m + c];
    sol.info.iterations = 0;
    sol.info.final_update_norm = 0.0;
    sol.info.converged = true;
}

} // namespace

double Grid1D::node(int i) const
{
    if (i == n_cells)
        return hi;
    return lo + i * spacing();
}

std::vector<double> Grid1D::nodes() const
{
    std::vector<double> out(static_cast<std::size_t>(n_nodes()));
    for (int i = 0; i <= n_cells; ++i)
        out[static_cast<std::size_t>(i)] = node(i);
    return out;
}

double Grid2D::x(int i) const { return i == nx ? box.x_hi : box.x_lo + i * hx(); }
double Grid2D::y(int j) const { return j == ny ? box.y_hi : box.y_lo + j * hy(); }

Method2D parse_method_2d(std::string_view text)
{
    if (text == "sor")
        return Method2D::SOR;
    if (text == "gauss-seidel" || text == "gs")
        return Method2D::GaussSeidel;
    if (text == "direct")
        return Method2D::Direct;
    throw std::invalid_argument("unknown 2D method '" + std::string(text) + "' (expected sor, gauss-seidel, direct)");
}

std::string_view to_string(Method2D method)
{
    switch (method) {
    case Method2D::GaussSeidel: return "gauss-seidel";
    case Method2D::SOR: return "sor";
    case Method2D::Direct: return "direct";
    }
    return "?";
}

FipMethod parse_fip_method(std::string_view text)
{
    if (text == "direct")
        return FipMethod::Direct;
    if (text == "jacobi")
        return FipMethod::Jacobi;
    throw std::invalid_argument("unknown FIP method '" + std::string(text) + "' (expected direct or jacobi)");
}

std::string_view to_string(FipMethod method) { return method == FipMethod::Direct ? "direct" : "jacobi"; }

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs)
{
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiagonal: inconsistent sizes");
    std::vector<double> c(n), d(n);
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double denom = diag[i] - lower[i] * c[i - 1];
        c[i] = i + 1 < n ? upper[i] / denom : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        d[i] -= c[i] * d[i + 1];
    return d;
}

double optimal_sor_omega(const Grid2D& grid)
{
    const double cx = 1.0 / (grid.hx() * grid.hx());
    const double cy = 1.0 / (grid.hy() * grid.hy());
    const double rho = (cx * std::cos(std::numbers::pi / grid.nx) + cy * std::cos(std::numbers::pi / grid.ny)) / (cx + cy);
    return 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
}

FieldSolution1D solve_poisson_1d(const ProblemSpec1D& spec, int n_cells)
{
    if (n_cells < 2)
        throw std::invalid_argument("solve_poisson_1d: n_cells must be >= 2, got " + std::to_string(n_cells));
    validate(spec);
    const auto start = Clock::now();

    FieldSolution1D sol;
    sol.grid = Grid1D{spec.domain_lo, spec.domain_hi, n_cells};
    const double h = sol.grid.spacing();
    const std::size_t m = static_cast<std::size_t>(n_cells) - 1;

    std::vector<double> lower(m, 1.0), diag(m, -2.0), upper(m, 1.0), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double x = sol.grid.node(static_cast<int>(k) + 1);
        rhs[k] = h * h * checked(spec.source(x), "source value", x);
    }
    rhs.front() -= spec.bc_lo;
    rhs.back() -= spec.bc_hi;
    const auto interior = solve_tridiagonal(lower, diag, upper, rhs);

    sol.values.resize(m + 2);
    sol.values.front() = spec.bc_lo;
    sol.values.back() = spec.bc_hi;
    std::copy(interior.begin(), interior.end(), sol.values.begin() + 1);
    sol.info.wall_time = seconds_since(start);
    return sol;
}

FieldSolution2D solve_poisson_2d(const ProblemSpec2D& spec, int nx, int ny, const Poisson2DOptions& options)
{
    if (nx < 2 || ny < 2)
        throw std::invalid_argument("solve_poisson_2d: nx and ny must be >= 2");
    if (!(options.tol > 0.0))
        throw std::invalid_argument("solve_poisson_2d: tol must be > 0");
    if (options.max_iter < 1)
        throw std::invalid_argument("solve_poisson_2d: max_iter must be >= 1");
    validate(spec);
    if (options.method == Method2D::Direct)
        require_band_fits(nx, ny);
    std::optional<double> omega;
    if (options.method == Method2D::SOR) {
        omega = options.omega.value_or(optimal_sor_omega(Grid2D{spec.domain, nx, ny}));
        if (!(*omega > 0.0 && *omega < 2.0))
            throw std::invalid_argument("solve_poisson_2d: SOR omega must lie in (0, 2)");
    }
    const auto start = Clock::now();

    FieldSolution2D sol;
    sol.grid = Grid2D{spec.domain, nx, ny};
    sol.values.assign(static_cast<std::size_t>(sol.grid.n_nodes()), 0.0);
    fill_boundary(sol, spec);

    const auto& g = sol.grid;
    std::vector<double> f(sol.values.size(), 0.0);
    for (int j = 1; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            f[g.index(i, j)] = checked(spec.source(g.x(i), g.y(j)), "source value", g.x(i), g.y(j));

    switch (options.method) {
    case Method2D::Direct:
        direct_2d(sol, f);
        break;
    case Method2D::GaussSeidel:
        relax_2d(sol, f, 1.0, options.tol, options.max_iter);
        break;
    case Method2D::SOR:
        relax_2d(sol, f, *omega, options.tol, options.max_iter);
        break;
    }
    sol.info.wall_time = seconds_since(start);
    return sol;
}

FieldSolution1D solve_fip_fdm(const FipSpec& spec, int n_cells, const FipOptions& options)
{
    if (n_cells < 2)
        throw std::invalid_argument("solve_fip_fdm: n_cells must be >= 2, got " + std::to_string(n_cells));
    validate(spec);
    const auto start = Clock::now();

    FieldSolution1D sol;
    sol.grid = Grid1D{0.0, spec.length, n_cells};
    const double h = sol.grid.spacing();
    const std::size_t n = static_cast<std::size_t>(n_cells) + 1;
    std::vector<double> a(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sol.grid.node(static_cast<int>(i));
        a[i] = checked(spec.coefficient(x), "coefficient", x);
        q[i] = checked(spec.source(x), "source value", x);
    }

    sol.values.assign(n, 0.0);
    sol.values.front() = spec.bc_lo;
    sol.values.back() = spec.bc_hi;

    if (options.method == FipMethod::Direct) {
        // Scaled by h^2: U[i-1] - (2 + a h^2) U[i] + U[i+1] = h^2 Q.
        const std::size_t m = n - 2;
        std::vector<double> lower(m, 1.0), diag(m), upper(m, 1.0), rhs(m);
        for (std::size_t k = 0; k < m; ++k) {
            diag[k] = -2.0 - a[k + 1] * h * h;
            rhs[k] = h * h * q[k + 1];
        }
        rhs.front() -= spec.bc_lo;
        rhs.back() -= spec.bc_hi;
        const auto interior = solve_tridiagonal(lower, diag, upper, rhs);
        std::copy(interior.begin(), interior.end(), sol.values.begin() + 1);
    } else {
        if (!(options.tol > 0.0))
            throw std::invalid_argument("solve_fip_fdm: tol must be > 0");
        if (options.max_iter < 1)
            throw std::invalid_argument("solve_fip_fdm: max_iter must be >= 1");
        auto& u = sol.values;
        for (std::size_t i = 1; i + 1 < n; ++i)
            u[i] = spec.bc_lo + (spec.bc_hi - spec.bc_lo) * sol.grid.node(static_cast<int>(i)) / spec.length;
        std::vector<double> next = u;
        double update = 0.0;
        int sweep = 0;
        while (sweep < options.max_iter) {
            ++sweep;
            update = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                next[i] = (u[i - 1] + u[i + 1] - h * h * q[i]) / (2.0 + a[i] * h * h);
                update = std::max(update, std::abs(next[i] - u[i]));
            }
            u.swap(next);
            if (!std::isfinite(update))
                throw NumericalError("Jacobi iteration diverged (non-finite update)");
            if (update <= options.tol)
                break;
        }
        sol.info.iterations = sweep;
        sol.info.final_update_norm = update;
        sol.info.converged = update <= options.tol;
    }
    sol.info.wall_time = seconds_since(start);
    return sol;
}

} // namespace pinnfdm
