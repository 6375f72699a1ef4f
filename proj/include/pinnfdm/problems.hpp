#pragma once

#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace pinnfdm {

using Function1D = std::function<double(double)>;
using Function2D = std::function<double(double, double)>;

enum class ProblemId { Poisson1D, Poisson2D, Fip };

ProblemId parse_problem_id(std::string_view id);
std::string_view to_string(ProblemId id);

/// u''(x) = source(x) on [domain_lo, domain_hi], Dirichlet at both ends.
struct ProblemSpec1D {
    std::string id;
    double domain_lo = 0.0;
    double domain_hi = 1.0;
    Function1D source;
    double bc_lo = 0.0;
    double bc_hi = 0.0;
    std::optional<Function1D> exact;
};

enum class SourceMode {
    Manufactured,  ///< source = Laplacian of the exact solution
    PaperVerbatim, ///< the published right-hand side, kept for fidelity runs
};

SourceMode parse_source_mode(std::string_view text);
std::string_view to_string(SourceMode mode);

struct Box2D {
    double x_lo = 0.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 1.0;
};

/// u_xx + u_yy = source(x, y) on a rectangle, u = boundary(x, y) on its edges.
struct ProblemSpec2D {
    std::string id;
    Box2D domain;
    Function2D source;
    Function2D boundary;
    std::optional<Function2D> exact;
    SourceMode source_mode = SourceMode::Manufactured;
};

/// U''(x) - a(x) U(x) = Q(x) on (0, L) with
///   Q(x) = 1 + b1 sin(w1 x),  a(x) = b1 + x / (1 + x^2).
struct FipSpec {
    double length = 1.0;
    double b1 = 1.0;
    double w1 = std::numbers::pi;
    double bc_lo = 1.0;
    double bc_hi = 3.0;

    double source(double x) const;
    double coefficient(double x) const;
};

/// Checks the structural invariants (ordered domain, exact solution consistent
/// with the Dirichlet data to 1e-12). Throws std::invalid_argument.
void validate(const ProblemSpec1D& spec);
void validate(const ProblemSpec2D& spec);
void validate(const FipSpec& spec);

ProblemSpec1D builtin_poisson_1d();
ProblemSpec2D builtin_poisson_2d(SourceMode mode = SourceMode::Manufactured);
FipSpec builtin_fip(double b1 = 1.0, double w1 = std::numbers::pi, double length = 1.0);

namespace closed_form {

// u = x exp(-x^4) and its second derivative.
double poisson1d_exact(double x);
double poisson1d_source(double x);

// u = x^2 (x-1)^2 * y (y-1)^2.
double poisson2d_exact(double x, double y);
double poisson2d_source_manufactured(double x, double y);
double poisson2d_source_verbatim(double x, double y);

} // namespace closed_form

} // namespace pinnfdm
