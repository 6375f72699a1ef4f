#include "pinnfdm/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

using namespace pinnfdm;

TEST_CASE("l2 norm")
{
    CHECK(l2_norm(std::vector<double>{3, 4}) == 5.0);
    CHECK(l2_norm(std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(l2_norm(std::vector<double>{1, 1, 1, 1}) == 2.0);
    CHECK_THROWS_AS(l2_norm(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("l2 norm triangle inequality")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 17;
        std::vector<double> a(n), b(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = N(rng);
            b[i] = N(rng) * 1e3;
            c[i] = a[i] + b[i];
        }
        CHECK(l2_norm(c) <= l2_norm(a) + l2_norm(b) + 1e-12);
    }
}

TEST_CASE("relative l2 error")
{
    const std::vector<double> u{1.0, -2.0, 0.5};
    CHECK(relative_l2(u, u) == 0.0);
    CHECK(relative_l2(std::vector<double>{2.0, -4.0, 1.0}, u) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(relative_l2(std::vector<double>{0, 0, 0}, u) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(relative_l2(u, std::vector<double>{0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(relative_l2(u, std::vector<double>{1, 2}), std::invalid_argument);

    const auto s = compare(std::vector<double>{1.0, -1.5, 0.5}, u);
    CHECK(s.n_points == 3);
    CHECK(s.l_inf == 0.5);
    CHECK(s.l2_relative == doctest::Approx(0.5 / std::sqrt(5.25)).epsilon(1e-14));
}

TEST_CASE("relative l2 is scale invariant")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(10), b(10), ca(10), cb(10);
        const double c = (trial % 2 ? -1.0 : 1.0) * std::pow(10.0, U(rng) * 6);
        for (int i = 0; i < 10; ++i) {
            a[i] = U(rng);
            b[i] = U(rng);
            ca[i] = c * a[i];
            cb[i] = c * b[i];
        }
        CHECK(std::abs(relative_l2(ca, cb) - relative_l2(a, b)) <= 1e-12 * std::max(1.0, relative_l2(a, b)));
    }
}

TEST_CASE("convergence order")
{
    CHECK(convergence_order(std::vector<int>{32, 64, 128}, std::vector<double>{1e-2, 2.5e-3, 6.25e-4}) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(convergence_order(std::vector<int>{32, 64}, std::vector<double>{1e-2, 5e-3}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(convergence_order(std::vector<int>{32, 64}, std::vector<double>{1e-2, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(convergence_order(std::vector<int>{32, 64}, std::vector<double>{1e-2, -1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(convergence_order(std::vector<int>{32}, std::vector<double>{1e-2}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_order(std::vector<int>{32, 48}, std::vector<double>{1e-2, 5e-3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(convergence_order(std::vector<int>{32, 64}, std::vector<double>{1e-2}), std::invalid_argument);
}

TEST_CASE("1D interpolation")
{
    FieldSolution1D f;
    f.grid = {0.0, 1.0, 4};
    f.values = {0.0, 1.0, 4.0, 9.0, 16.0};
    const std::vector<double> at_nodes{0.0, 0.25, 0.5, 0.75, 1.0};
    CHECK(interpolate(f, at_nodes) == f.values);
    CHECK(interpolate(f, std::vector<double>{0.125})[0] == doctest::Approx(0.5).epsilon(1e-15));

    std::string message;
    try {
        interpolate(f, std::vector<double>{1.5});
    } catch (const std::invalid_argument& e) {
        message = e.what();
    }
    CHECK(message.find("1.5") != std::string::npos);
    CHECK_THROWS_AS(interpolate(f, std::vector<double>{-0.01}), std::invalid_argument);
}

TEST_CASE("interpolation reproduces linear and bilinear fields")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = U(rng) - 0.5, b = 3 * U(rng), c = U(rng), d = U(rng) - 0.5;
        FieldSolution1D f;
        f.grid = {-1.0, 2.0, 7 + trial};
        for (double x : f.grid.nodes())
            f.values.push_back(a + b * x);
        std::vector<double> xs;
        for (int k = 0; k < 50; ++k)
            xs.push_back(-1.0 + 3.0 * U(rng));
        const auto v = interpolate(f, xs);
        for (std::size_t k = 0; k < xs.size(); ++k)
            CHECK(std::abs(v[k] - (a + b * xs[k])) <= 1e-13);

        FieldSolution2D g;
        g.grid = {{0.0, 1.0, 0.0, 2.0}, 5 + trial, 3 + trial};
        g.values.resize(static_cast<std::size_t>(g.grid.n_nodes()));
        auto bilinear = [&](double x, double y) { return a + b * x + c * y + d * x * y; };
        for (int j = 0; j <= g.grid.ny; ++j)
            for (int i = 0; i <= g.grid.nx; ++i)
                g.values[g.grid.index(i, j)] = bilinear(g.grid.x(i), g.grid.y(j));
        std::vector<Point2> ps;
        for (int k = 0; k < 50; ++k)
            ps.push_back({U(rng), 2.0 * U(rng)});
        ps.push_back({1.0, 2.0});
        ps.push_back({0.0, 0.0});
        const auto w = interpolate(g, ps);
        for (std::size_t k = 0; k < ps.size(); ++k)
            CHECK(std::abs(w[k] - bilinear(ps[k][0], ps[k][1])) <= 1e-13);
    }
}

TEST_CASE("2D interpolation")
{
    FieldSolution2D g;
    g.grid = {{}, 1, 1};
    // corners (0,0), (1,0), (0,1), (1,1)
    g.values = {0.0, 0.0, 1.0, 1.0};
    CHECK(interpolate(g, std::vector<Point2>{{0.5, 0.5}})[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(interpolate(g, std::vector<Point2>{{1.0, 1.0}})[0] == 1.0);
    std::string message;
    try {
        interpolate(g, std::vector<Point2>{{0.25, 1.75}});
    } catch (const std::invalid_argument& e) {
        message = e.what();
    }
    CHECK(message.find("0.25") != std::string::npos);
    CHECK(message.find("1.75") != std::string::npos);
}

TEST_CASE("assessment grids")
{
    const auto xs = assessment_grid_1d(0.0, 1.0);
    REQUIRE(xs.size() == 513);
    CHECK(xs.front() == 0.0);
    CHECK(xs.back() == 1.0);
    CHECK(xs[256] == 0.5);
    const auto ps = assessment_grid_2d(Box2D{});
    REQUIRE(ps.size() == 101u * 101u);
    CHECK(ps.front() == Point2{0.0, 0.0});
    CHECK(ps.back() == Point2{1.0, 1.0});
    CHECK(ps[1][0] == doctest::Approx(0.01));
    CHECK(ps[101][1] == doctest::Approx(0.01));
}
