#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

/// Scalar reverse-mode AD on an explicit tape. Each node records at most two
/// parents with their local partial derivatives; adjoints are accumulated by a
/// single reverse sweep. Used for generic loss gradients and as the reference
/// route when checking the hand-written network adjoint.
namespace pinnfdm::ad {

class Tape;

class Var {
public:
    Var(double value = 0.0) : value_(value) {} // NOLINT: implicit constants are intended

    double value() const { return value_; }
    std::int32_t index() const { return index_; }
    Tape* tape() const { return tape_; }

    Var& operator+=(const Var& rhs);
    Var& operator-=(const Var& rhs);
    Var& operator*=(const Var& rhs);

private:
    friend class Tape;
    Var(double value, Tape* tape, std::int32_t index) : value_(value), tape_(tape), index_(index) {}

    double value_;
    Tape* tape_ = nullptr;
    std::int32_t index_ = -1;
};

class Tape {
public:
    Var variable(double value);
    /// Records value = f(a, b) with partials da = df/da, db = df/db.
    Var record(double value, const Var& a, double da, const Var& b, double db);
    Var record(double value, const Var& a, double da);

    /// d(output)/d(node) for every node on the tape.
    std::vector<double> adjoints(const Var& output) const;
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        std::int32_t lhs;
        std::int32_t rhs;
        double dlhs;
        double drhs;
    };
    std::vector<Node> nodes_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);

Var tanh(const Var& x);
Var exp(const Var& x);
Var sin(const Var& x);
Var sqrt(const Var& x);

} // namespace pinnfdm::ad

namespace pinnfdm {

struct ValueAndGradient {
    double value = 0.0;
    std::vector<double> gradient;
};

using TapeLoss = std::function<ad::Var(std::span<const ad::Var>)>;

/// Gradient of a scalar loss with respect to every parameter by reverse
/// accumulation. Throws NumericalError if the loss or gradient is non-finite.
ValueAndGradient loss_gradient(const TapeLoss& loss, std::span<const double> params);

} // namespace pinnfdm
