#include "pinnfdm/error.hpp"
#include "pinnfdm/fdm.hpp"
#include "pinnfdm/metrics.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace pinnfdm;

namespace {

ProblemSpec1D poly_1d(Function1D f, double bc_lo, double bc_hi)
{
    ProblemSpec1D s;
    s.id = "poly";
    s.source = std::move(f);
    s.bc_lo = bc_lo;
    s.bc_hi = bc_hi;
    return s;
}

ProblemSpec2D laplace_2d(Function2D g)
{
    ProblemSpec2D s;
    s.id = "laplace";
    s.source = [](double, double) { return 0.0; };
    s.boundary = std::move(g);
    return s;
}

double nodal_error_2d(const ProblemSpec2D& spec, const FieldSolution2D& f)
{
    std::vector<double> exact(f.values.size());
    for (int j = 0; j <= f.grid.ny; ++j)
        for (int i = 0; i <= f.grid.nx; ++i)
            exact[f.grid.index(i, j)] = (*spec.exact)(f.grid.x(i), f.grid.y(j));
    return relative_l2(f.values, exact);
}

double nodal_error_1d(const ProblemSpec1D& spec, const FieldSolution1D& f)
{
    std::vector<double> exact;
    for (double x : f.grid.nodes())
        exact.push_back((*spec.exact)(x));
    return relative_l2(f.values, exact);
}

} // namespace

TEST_CASE("1D grid geometry")
{
    Grid1D g{0.0, 1.0, 512};
    const auto nodes = g.nodes();
    REQUIRE(nodes.size() == 513);
    CHECK(nodes.front() == 0.0);
    CHECK(nodes.back() == 1.0);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        CHECK(nodes[i + 1] > nodes[i]);
        CHECK(std::abs(nodes[i + 1] - nodes[i] - g.spacing()) <= 1e-14);
    }
    Grid2D g2{{}, 4, 8};
    CHECK(g2.hx() == 0.25);
    CHECK(g2.hy() == 0.125);
    CHECK(g2.n_nodes() == 45);
    CHECK(g2.index(2, 3) == 17u);
}

TEST_CASE("Thomas algorithm matches a dense solve")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int n : {1, 2, 5, 40}) {
        std::vector<double> lo(n), d(n), up(n), rhs(n);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            lo[i] = U(rng);
            up[i] = U(rng);
            d[i] = 3.0 + U(rng);
            rhs[i] = U(rng);
            A(i, i) = d[i];
            if (i > 0)
                A(i, i - 1) = lo[i];
            if (i + 1 < n)
                A(i, i + 1) = up[i];
            b(i) = rhs[i];
        }
        const Eigen::VectorXd ref = A.partialPivLu().solve(b);
        const auto x = solve_tridiagonal(lo, d, up, rhs);
        for (int i = 0; i < n; ++i)
            CHECK(x[i] == doctest::Approx(ref(i)).epsilon(1e-12));
    }
    std::vector<double> a{0.0, 1.0}, b{1.0}, c{0.0, 0.0}, r{1.0, 1.0};
    CHECK_THROWS_AS(solve_tridiagonal(a, b, c, r), std::invalid_argument);
}

TEST_CASE("1D solver is exact on low-degree polynomials")
{
    for (int n : {2, 7, 64, 513}) {
        const auto lin = solve_poisson_1d(poly_1d([](double) { return 0.0; }, 0.0, 1.0), n);
        const auto nodes = lin.grid.nodes();
        for (std::size_t i = 0; i < nodes.size(); ++i)
            CHECK(std::abs(lin.values[i] - nodes[i]) <= 1e-13);

        const auto quad = solve_poisson_1d(poly_1d([](double) { return 2.0; }, 0.0, 0.0), n);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            CHECK(std::abs(quad.values[i] - nodes[i] * (nodes[i] - 1.0)) <= 1e-12);
    }

    // Random cubics u = c0 + c1 x + c2 x^2 + c3 x^3, f = 2 c2 + 6 c3 x.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double c0 = U(rng), c1 = U(rng), c2 = U(rng), c3 = U(rng);
        auto u = [=](double x) { return c0 + x * (c1 + x * (c2 + x * c3)); };
        const int n = 3 + trial * 5;
        const auto sol = solve_poisson_1d(poly_1d([=](double x) { return 2 * c2 + 6 * c3 * x; }, u(0.0), u(1.0)), n);
        const auto nodes = sol.grid.nodes();
        for (std::size_t i = 0; i < nodes.size(); ++i)
            CHECK(std::abs(sol.values[i] - u(nodes[i])) <= 1e-12);
    }
}

TEST_CASE("1D solver preconditions")
{
    const auto spec = builtin_poisson_1d();
    CHECK_THROWS_AS(solve_poisson_1d(spec, 1), std::invalid_argument);
    CHECK_THROWS_AS(solve_poisson_1d(spec, 0), std::invalid_argument);
    auto nan_source = poly_1d([](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; }, 0, 1);
    CHECK_THROWS_AS(solve_poisson_1d(nan_source, 16), NumericalError);
}

TEST_CASE("1D benchmark: boundary values and second-order convergence")
{
    const auto spec = builtin_poisson_1d();
    const auto sol = solve_poisson_1d(spec, 512);
    CHECK(sol.values.front() == spec.bc_lo);
    CHECK(sol.values.back() == spec.bc_hi);
    CHECK(sol.info.converged);

    const std::vector<int> ns{64, 128, 256};
    std::vector<double> errs;
    for (int n : ns)
        errs.push_back(nodal_error_1d(spec, solve_poisson_1d(spec, n)));
    for (std::size_t i = 0; i + 1 < errs.size(); ++i)
        CHECK(std::log2(errs[i] / errs[i + 1]) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(convergence_order(ns, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("2D zero problem is a fixed point")
{
    const auto spec = laplace_2d([](double, double) { return 0.0; });
    for (auto m : {Method2D::GaussSeidel, Method2D::SOR, Method2D::Direct}) {
        const auto sol = solve_poisson_2d(spec, 8, 8, {m});
        for (double v : sol.values)
            CHECK(v == 0.0);
        if (m != Method2D::Direct)
            CHECK(sol.info.iterations == 1);
        CHECK(sol.info.converged);
    }
}

TEST_CASE("2D solvers reproduce a linear harmonic field and keep boundary values")
{
    auto g = [](double x, double y) { return 0.5 + x - 2.0 * y; };
    const auto spec = laplace_2d(g);
    for (auto m : {Method2D::GaussSeidel, Method2D::SOR, Method2D::Direct}) {
        Poisson2DOptions opt{m};
        opt.tol = 1e-13;
        const auto sol = solve_poisson_2d(spec, 12, 9, opt);
        const auto& grid = sol.grid;
        for (int j = 0; j <= grid.ny; ++j)
            for (int i = 0; i <= grid.nx; ++i) {
                const double v = sol.at(i, j);
                CHECK(std::isfinite(v));
                if (i == 0 || j == 0 || i == grid.nx || j == grid.ny)
                    CHECK(v == g(grid.x(i), grid.y(j)));
                else
                    CHECK(std::abs(v - g(grid.x(i), grid.y(j))) <= 1e-10);
            }
    }
}

TEST_CASE("2D manufactured problem converges at second order")
{
    const auto spec = builtin_poisson_2d();
    const double e32 = nodal_error_2d(spec, solve_poisson_2d(spec, 32, 32));
    const double e64 = nodal_error_2d(spec, solve_poisson_2d(spec, 64, 64));
    CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.1));

    const std::vector<int> ns{16, 32, 64};
    std::vector<double> errs;
    for (int n : ns)
        errs.push_back(nodal_error_2d(spec, solve_poisson_2d(spec, n, n)));
    CHECK(convergence_order(ns, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("2D direct and iterative solutions agree")
{
    const auto spec = builtin_poisson_2d();
    for (int n : {8, 16}) {
        const auto direct = solve_poisson_2d(spec, n, n, {Method2D::Direct});
        for (auto m : {Method2D::GaussSeidel, Method2D::SOR}) {
            Poisson2DOptions opt{m};
            opt.tol = 1e-10;
            const auto it = solve_poisson_2d(spec, n, n, opt);
            REQUIRE(it.info.converged);
            double diff = 0.0;
            for (std::size_t k = 0; k < it.values.size(); ++k)
                diff = std::max(diff, std::abs(it.values[k] - direct.values[k]));
            CHECK(diff <= 100 * opt.tol);
        }
    }
}

TEST_CASE("SOR relaxation factor")
{
    Grid2D g{{}, 64, 64};
    CHECK(optimal_sor_omega(g) == doctest::Approx(2.0 / (1.0 + std::sin(std::numbers::pi / 64))).epsilon(1e-12));
    // SOR needs far fewer sweeps than Gauss-Seidel.
    const auto spec = builtin_poisson_2d();
    const auto gs = solve_poisson_2d(spec, 32, 32, {Method2D::GaussSeidel});
    const auto sor = solve_poisson_2d(spec, 32, 32, {Method2D::SOR});
    CHECK(sor.info.iterations * 5 < gs.info.iterations);

    Poisson2DOptions bad{Method2D::SOR};
    bad.omega = 2.0;
    CHECK_THROWS_AS(solve_poisson_2d(spec, 8, 8, bad), std::invalid_argument);
}

TEST_CASE("2D non-convergence is reported, not hidden")
{
    const auto spec = builtin_poisson_2d();
    Poisson2DOptions opt{Method2D::GaussSeidel};
    opt.max_iter = 3;
    const auto sol = solve_poisson_2d(spec, 32, 32, opt);
    CHECK_FALSE(sol.info.converged);
    CHECK(sol.info.iterations == 3);
    CHECK(sol.info.final_update_norm > opt.tol);
    for (double v : sol.values)
        CHECK(std::isfinite(v));
}

TEST_CASE("2D preconditions")
{
    const auto spec = builtin_poisson_2d();
    CHECK_THROWS_AS(solve_poisson_2d(spec, 1, 8), std::invalid_argument);
    Poisson2DOptions opt;
    opt.tol = 0.0;
    CHECK_THROWS_AS(solve_poisson_2d(spec, 8, 8, opt), std::invalid_argument);
    CHECK_THROWS_AS(solve_poisson_2d(spec, 20000, 20000, {Method2D::Direct}), std::invalid_argument);
}

TEST_CASE("FIP direct solve satisfies the discrete equation")
{
    const auto spec = builtin_fip();
    const int n = 200;
    const auto sol = solve_fip_fdm(spec, n);
    CHECK(sol.values.front() == 1.0);
    CHECK(sol.values.back() == 3.0);
    const double h = sol.grid.spacing();
    for (int i = 1; i < n; ++i) {
        const double x = sol.grid.node(i);
        const double lhs = (sol.values[i - 1] - 2 * sol.values[i] + sol.values[i + 1]) / (h * h) -
                           spec.coefficient(x) * sol.values[i];
        CHECK(lhs == doctest::Approx(spec.source(x)).epsilon(1e-8));
    }
}

TEST_CASE("FIP solutions converge at second order")
{
    const auto spec = builtin_fip(0.7, 4.0, 1.5);
    const auto fine = solve_fip_fdm(spec, 4096);
    std::vector<int> ns{32, 64, 128};
    std::vector<double> errs;
    for (int n : ns) {
        const auto sol = solve_fip_fdm(spec, n);
        std::vector<double> ref;
        for (int i = 0; i <= n; ++i)
            ref.push_back(fine.values[static_cast<std::size_t>(i * (4096 / n))]);
        errs.push_back(relative_l2(sol.values, ref));
    }
    CHECK(convergence_order(ns, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("FIP Jacobi agrees with the direct solve")
{
    const auto spec = builtin_fip();
    const int n = 256;
    const auto direct = solve_fip_fdm(spec, n, {FipMethod::Direct});
    auto max_diff = [&](const FieldSolution1D& s) {
        double d = 0.0;
        for (std::size_t i = 0; i < s.values.size(); ++i)
            d = std::max(d, std::abs(s.values[i] - direct.values[i]));
        return d;
    };

    // With an update-norm stop the error is bounded by tol / (1 - rho), rho
    // the Jacobi contraction factor; bound it from above with a = b1 (its
    // minimum) so that 1 - rho >= 1 - 2 cos(pi h) / (2 + b1 h^2).
    const double h = 1.0 / n;
    const double gap = 1.0 - 2.0 * std::cos(std::numbers::pi * h) / (2.0 + spec.b1 * h * h);

    FipOptions opt{FipMethod::Jacobi, 1e-12, 1000000};
    const auto jac = solve_fip_fdm(spec, n, opt);
    REQUIRE(jac.info.converged);
    CHECK(jac.info.iterations > 1000);
    CHECK(max_diff(jac) <= opt.tol / gap);
    CHECK(jac.values.front() == 1.0);
    CHECK(jac.values.back() == 3.0);

    opt.tol = 1e-13;
    const auto tight = solve_fip_fdm(spec, n, opt);
    REQUIRE(tight.info.converged);
    CHECK(max_diff(tight) <= 1e-8);
}

TEST_CASE("FIP Jacobi non-convergence carries the last iterate")
{
    const auto sol = solve_fip_fdm(builtin_fip(), 64, {FipMethod::Jacobi, 1e-12, 10});
    CHECK_FALSE(sol.info.converged);
    CHECK(sol.info.iterations == 10);
    CHECK(sol.values.size() == 65u);
    CHECK_THROWS_AS(solve_fip_fdm(builtin_fip(), 1), std::invalid_argument);
}

TEST_CASE("method names")
{
    CHECK(parse_method_2d("sor") == Method2D::SOR);
    CHECK(parse_method_2d("gauss-seidel") == Method2D::GaussSeidel);
    CHECK(parse_method_2d("direct") == Method2D::Direct);
    CHECK(parse_method_2d(to_string(Method2D::GaussSeidel)) == Method2D::GaussSeidel);
    CHECK(parse_fip_method("jacobi") == FipMethod::Jacobi);
    CHECK(parse_fip_method(to_string(FipMethod::Direct)) == FipMethod::Direct);
    CHECK_THROWS_AS(parse_method_2d("multigrid"), std::invalid_argument);
}
