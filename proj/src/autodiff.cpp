#include "pinnfdm/autodiff.hpp"

#include "pinnfdm/error.hpp"

#include <cmath>
#include <stdexcept>

namespace pinnfdm::ad {

namespace {

Tape* tape_of(const Var& a, const Var& b)
{
    if (a.tape() && b.tape() && a.tape() != b.tape())
        throw std::logic_error("ad::Var operands recorded on different tapes");
    return a.tape() ? a.tape() : b.tape();
}

} // namespace

Var Tape::variable(double value)
{
    nodes_.push_back({-1, -1, 0.0, 0.0});
    return Var(value, this, static_cast<std::int32_t>(nodes_.size() - 1));
}

Var Tape::record(double value, const Var& a, double da, const Var& b, double db)
{
    nodes_.push_back({a.index(), b.index(), da, db});
    return Var(value, this, static_cast<std::int32_t>(nodes_.size() - 1));
}

Var Tape::record(double value, const Var& a, double da)
{
    nodes_.push_back({a.index(), -1, da, 0.0});
    return Var(value, this, static_cast<std::int32_t>(nodes_.size() - 1));
}

std::vector<double> Tape::adjoints(const Var& output) const
{
    std::vector<double> adj(nodes_.size(), 0.0);
    if (output.tape() != this || output.index() < 0)
        return adj;
    adj[static_cast<std::size_t>(output.index())] = 1.0;
    for (std::size_t i = static_cast<std::size_t>(output.index()) + 1; i-- > 0;) {
        const double a = adj[i];
        if (a == 0.0)
            continue;
        const Node& n = nodes_[i];
        if (n.lhs >= 0)
            adj[static_cast<std::size_t>(n.lhs)] += a * n.dlhs;
        if (n.rhs >= 0)
            adj[static_cast<std::size_t>(n.rhs)] += a * n.drhs;
    }
    return adj;
}

Var& Var::operator+=(const Var& rhs) { return *this = *this + rhs; }
Var& Var::operator-=(const Var& rhs) { return *this = *this - rhs; }
Var& Var::operator*=(const Var& rhs) { return *this = *this * rhs; }

Var operator+(const Var& a, const Var& b)
{
    Tape* t = tape_of(a, b);
    const double v = a.value() + b.value();
    return t ? t->record(v, a, 1.0, b, 1.0) : Var(v);
}

Var operator-(const Var& a, const Var& b)
{
    Tape* t = tape_of(a, b);
    const double v = a.value() - b.value();
    return t ? t->record(v, a, 1.0, b, -1.0) : Var(v);
}

Var operator*(const Var& a, const Var& b)
{
    Tape* t = tape_of(a, b);
    const double v = a.value() * b.value();
    return t ? t->record(v, a, b.value(), b, a.value()) : Var(v);
}

Var operator/(const Var& a, const Var& b)
{
    Tape* t = tape_of(a, b);
    const double v = a.value() / b.value();
    return t ? t->record(v, a, 1.0 / b.value(), b, -v / b.value()) : Var(v);
}

Var operator-(const Var& a)
{
    return a.tape() ? a.tape()->record(-a.value(), a, -1.0) : Var(-a.value());
}

Var tanh(const Var& x)
{
    const double t = std::tanh(x.value());
    return x.tape() ? x.tape()->record(t, x, 1.0 - t * t) : Var(t);
}

Var exp(const Var& x)
{
    const double e = std::exp(x.value());
    return x.tape() ? x.tape()->record(e, x, e) : Var(e);
}

Var sin(const Var& x)
{
    const double s = std::sin(x.value());
    return x.tape() ? x.tape()->record(s, x, std::cos(x.value())) : Var(s);
}

Var sqrt(const Var& x)
{
    const double s = std::sqrt(x.value());
    return x.tape() ? x.tape()->record(s, x, 0.5 / s) : Var(s);
}

} // namespace pinnfdm::ad

namespace pinnfdm {

ValueAndGradient loss_gradient(const TapeLoss& loss, std::span<const double> params)
{
    ad::Tape tape;
    std::vector<ad::Var> inputs;
    inputs.reserve(params.size());
    for (double p : params)
        inputs.push_back(tape.variable(p));

    const ad::Var out = loss(inputs);
    ValueAndGradient result;
    result.value = out.value();
    if (!std::isfinite(result.value))
        throw NumericalError("loss_gradient: loss is not finite");

    const auto adj = tape.adjoints(out);
    result.gradient.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        result.gradient[i] = adj[static_cast<std::size_t>(inputs[i].index())];
        if (!std::isfinite(result.gradient[i]))
            throw NumericalError("loss_gradient: gradient component " + std::to_string(i) + " is not finite");
    }
    return result;
}

} // namespace pinnfdm
