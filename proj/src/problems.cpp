#include "pinnfdm/problems.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace pinnfdm {

namespace {

constexpr double kBoundaryTol = 1e-12;

void require(bool condition, const std::string& message)
{
    if (!condition)
        throw std::invalid_argument(message);
}

} // namespace

ProblemId parse_problem_id(std::string_view id)
{
    if (id == "poisson1d")
        return ProblemId::Poisson1D;
    if (id == "poisson2d")
        return ProblemId::Poisson2D;
    if (id == "fip")
        return ProblemId::Fip;
    throw std::invalid_argument("unknown problem id '" + std::string(id) +
                                "' (expected poisson1d, poisson2d or fip)");
}

std::string_view to_string(ProblemId id)
{
    switch (id) {
    case ProblemId::Poisson1D: return "poisson1d";
    case ProblemId::Poisson2D: return "poisson2d";
    case ProblemId::Fip: return "fip";
    }
    return "?";
}

SourceMode parse_source_mode(std::string_view text)
{
    if (text == "manufactured")
        return SourceMode::Manufactured;
    if (text == "paper" || text == "paper-verbatim" || text == "verbatim")
        return SourceMode::PaperVerbatim;
    throw std::invalid_argument("unknown source_mode '" + std::string(text) +
                                "' (expected manufactured or paper-verbatim)");
}

std::string_view to_string(SourceMode mode)
{
    return mode == SourceMode::Manufactured ? "manufactured" : "paper-verbatim";
}

double FipSpec::source(double x) const { return 1.0 + b1 * std::sin(w1 * x); }

double FipSpec::coefficient(double x) const
{
    const double a = b1 + x / (1.0 + x * x);
    if (!std::isfinite(a))
        throw std::invalid_argument("coefficient a(x) is not finite at x = " + std::to_string(x));
    return a;
}

void validate(const ProblemSpec1D& spec)
{
    require(spec.domain_lo < spec.domain_hi, "ProblemSpec1D: domain_lo must be < domain_hi");
    require(static_cast<bool>(spec.source), "ProblemSpec1D: source is empty");
    if (spec.exact) {
        require(std::abs((*spec.exact)(spec.domain_lo) - spec.bc_lo) <= kBoundaryTol,
                "ProblemSpec1D: exact(domain_lo) != bc_lo");
        require(std::abs((*spec.exact)(spec.domain_hi) - spec.bc_hi) <= kBoundaryTol,
                "ProblemSpec1D: exact(domain_hi) != bc_hi");
    }
}

void validate(const ProblemSpec2D& spec)
{
    const auto& d = spec.domain;
    require(d.x_lo < d.x_hi && d.y_lo < d.y_hi, "ProblemSpec2D: empty domain");
    require(static_cast<bool>(spec.source), "ProblemSpec2D: source is empty");
    require(static_cast<bool>(spec.boundary), "ProblemSpec2D: boundary is empty");
    if (!spec.exact)
        return;
    // Sample each edge; the exact solution must reproduce the Dirichlet data.
    constexpr int samples = 17;
    for (int k = 0; k <= samples; ++k) {
        const double t = static_cast<double>(k) / samples;
        const double x = d.x_lo + t * (d.x_hi - d.x_lo);
        const double y = d.y_lo + t * (d.y_hi - d.y_lo);
        const std::array<std::array<double, 2>, 4> pts{{{x, d.y_lo}, {x, d.y_hi}, {d.x_lo, y}, {d.x_hi, y}}};
        for (const auto& p : pts) {
            require(std::abs((*spec.exact)(p[0], p[1]) - spec.boundary(p[0], p[1])) <= kBoundaryTol,
                    "ProblemSpec2D: exact solution does not match boundary data");
        }
    }
}

void validate(const FipSpec& spec)
{
    require(spec.length > 0.0 && std::isfinite(spec.length), "FipSpec: length L must be > 0");
    require(std::isfinite(spec.b1) && std::isfinite(spec.w1), "FipSpec: b1 and w1 must be finite");
}

namespace closed_form {

double poisson1d_exact(double x) { return x * std::exp(-std::pow(x, 4)); }

double poisson1d_source(double x)
{
    const double e = std::exp(-std::pow(x, 4));
    return 16.0 * std::pow(x, 7) * e - 20.0 * std::pow(x, 3) * e;
}

double poisson2d_exact(double x, double y)
{
    return (x - 1.0) * (x - 1.0) * y * (y - 1.0) * (y - 1.0) * x * x;
}

double poisson2d_source_manufactured(double x, double y)
{
    // A(x) B(y) with A = x^4 - 2x^3 + x^2, B = y^3 - 2y^2 + y; lap = A''B + AB''.
    const double a = x * x * x * x - 2.0 * x * x * x + x * x;
    const double a2 = 12.0 * x * x - 12.0 * x + 2.0;
    const double b = y * y * y - 2.0 * y * y + y;
    const double b2 = 6.0 * y - 4.0;
    return a2 * b + a * b2;
}

double poisson2d_source_verbatim(double x, double y)
{
    const double x2 = x * x;
    return 2.0 * (x2 * x2 * (3.0 * y - 2.0) + x2 * x * (4.0 - 6.0 * y) + x2);
}

} // namespace closed_form

ProblemSpec1D builtin_poisson_1d()
{
    ProblemSpec1D spec;
    spec.id = "poisson1d";
    spec.domain_lo = 0.0;
    spec.domain_hi = 1.0;
    spec.source = closed_form::poisson1d_source;
    spec.bc_lo = 0.0;
    spec.bc_hi = std::exp(-1.0);
    spec.exact = closed_form::poisson1d_exact;
    validate(spec);
    return spec;
}

ProblemSpec2D builtin_poisson_2d(SourceMode mode)
{
    ProblemSpec2D spec;
    spec.id = "poisson2d";
    spec.source = mode == SourceMode::Manufactured ? Function2D(closed_form::poisson2d_source_manufactured)
                                                   : Function2D(closed_form::poisson2d_source_verbatim);
    spec.boundary = [](double, double) { return 0.0; };
    spec.exact = closed_form::poisson2d_exact;
    spec.source_mode = mode;
    validate(spec);
    return spec;
}

FipSpec builtin_fip(double b1, double w1, double length)
{
    FipSpec spec;
    spec.length = length;
    spec.b1 = b1;
    spec.w1 = w1;
    validate(spec);
    return spec;
}

} // namespace pinnfdm
