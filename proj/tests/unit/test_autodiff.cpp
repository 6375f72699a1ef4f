#include "pinnfdm/autodiff.hpp"
#include "pinnfdm/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pinnfdm;

namespace {

double central_difference(const TapeLoss& loss, std::vector<double> x, std::size_t i, double h)
{
    auto eval = [&](const std::vector<double>& p) {
        std::vector<ad::Var> vars(p.begin(), p.end());
        return loss(vars).value();
    };
    x[i] += h;
    const double fp = eval(x);
    x[i] -= 2 * h;
    const double fm = eval(x);
    return (fp - fm) / (2 * h);
}

} // namespace

TEST_CASE("elementary partial derivatives")
{
    ad::Tape tape;
    const auto x = tape.variable(0.7);
    const auto y = tape.variable(-1.3);
    const auto f = x * y + ad::sin(x) / y - ad::exp(y) + ad::tanh(x * x) + ad::sqrt(x);
    const auto adj = tape.adjoints(f);
    const double xv = 0.7, yv = -1.3;
    const double dfdx = yv + std::cos(xv) / yv + (1 - std::pow(std::tanh(xv * xv), 2)) * 2 * xv + 0.5 / std::sqrt(xv);
    const double dfdy = xv - std::sin(xv) / (yv * yv) - std::exp(yv);
    CHECK(adj[static_cast<std::size_t>(x.index())] == doctest::Approx(dfdx).epsilon(1e-14));
    CHECK(adj[static_cast<std::size_t>(y.index())] == doctest::Approx(dfdy).epsilon(1e-14));
    CHECK(f.value() == doctest::Approx(xv * yv + std::sin(xv) / yv - std::exp(yv) + std::tanh(xv * xv) + std::sqrt(xv)));
}

TEST_CASE("compound assignment and reuse of a node")
{
    ad::Tape tape;
    const auto x = tape.variable(3.0);
    ad::Var acc = 0.0;
    for (int i = 0; i < 4; ++i)
        acc += x * x;
    acc -= x;
    acc *= 2.0;
    const auto adj = tape.adjoints(acc);
    // acc = 2 (4 x^2 - x)
    CHECK(acc.value() == 66.0);
    CHECK(adj[static_cast<std::size_t>(x.index())] == doctest::Approx(2 * (8 * 3.0 - 1)).epsilon(1e-15));
}

TEST_CASE("gradient of half squared norm is the parameter vector")
{
    const std::vector<double> p{0.5, -1.25, 3.0, 0.0, 7.5};
    const auto vg = loss_gradient(
        [](std::span<const ad::Var> v) {
            ad::Var s = 0.0;
            for (const auto& x : v)
                s += x * x;
            return 0.5 * s;
        },
        p);
    CHECK(vg.value == doctest::Approx(0.5 * (0.25 + 1.5625 + 9 + 56.25)));
    CHECK(vg.gradient == p);
}

TEST_CASE("constant loss has zero gradient")
{
    const auto vg = loss_gradient([](std::span<const ad::Var>) { return ad::Var(4.2); }, std::vector<double>{1, 2, 3});
    CHECK(vg.value == 4.2);
    CHECK(vg.gradient == std::vector<double>{0, 0, 0});
}

TEST_CASE("non-finite loss is an explicit failure")
{
    const std::vector<double> p{-1.0};
    CHECK_THROWS_AS(loss_gradient([](std::span<const ad::Var> v) { return ad::sqrt(v[0]); }, p), NumericalError);
    CHECK_THROWS_AS(loss_gradient([](std::span<const ad::Var> v) { return v[0] / 0.0; }, p), NumericalError);
}

TEST_CASE("tape gradient matches central differences on random compositions")
{
    const TapeLoss loss = [](std::span<const ad::Var> v) {
        ad::Var s = 0.0;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const auto r = ad::tanh(v[i] * v[i + 1] + 0.3) - ad::sin(v[i]) * ad::exp(-v[i + 1] * v[i + 1]);
            s += r * r;
        }
        return s / static_cast<double>(v.size());
    };
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> p(6);
        for (auto& x : p)
            x = U(rng);
        const auto vg = loss_gradient(loss, p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double fd = central_difference(loss, p, i, 1e-6);
            CHECK(std::abs(vg.gradient[i] - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
        }
    }
}
