#include "pinnfdm/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pinnfdm {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Trial {
    double step = 0.0;
    double f = 0.0;
    double slope = 0.0; // directional derivative g^T d
    std::vector<double> x;
    std::vector<double> g;
};

struct LineSearchOutcome {
    bool wolfe = false;      // strong Wolfe conditions satisfied
    bool decreased = false;  // best trial satisfies sufficient decrease with f < f0
    bool last_eval_is_best = false;
    bool non_finite = false;
    Trial best;
};

class StrongWolfeSearch {
public:
    StrongWolfeSearch(const Objective& objective, const LbfgsOptions& options, std::span<const double> x0, double f0,
                      std::span<const double> direction, double slope0)
        : objective_(objective), options_(options), x0_(x0), f0_(f0), d_(direction), slope0_(slope0)
    {}

    LineSearchOutcome run(double step0)
    {
        Trial prev{0.0, f0_, slope0_, {}, {}};
        double step = step0;
        for (int i = 0; evals_ < options_.max_line_search_evals; ++i) {
            Trial cur = evaluate(step);
            if (!std::isfinite(cur.f)) {
                // Back off towards the origin; non-finite values usually mean an overlong step.
                if (prev.step == 0.0 && step > 1e-20) {
                    step *= 0.1;
                    continue;
                }
                return finish(false, true);
            }
            if (cur.f > f0_ + options_.c1 * cur.step * slope0_ || (i > 0 && cur.f >= prev.f))
                return zoom(std::move(prev), std::move(cur));
            if (std::abs(cur.slope) <= -options_.c2 * slope0_)
                return accept(std::move(cur));
            if (cur.slope >= 0.0)
                return zoom(std::move(cur), std::move(prev));
            prev = std::move(cur);
            step *= 2.0;
        }
        return finish(false, false);
    }

private:
    Trial evaluate(double step)
    {
        Trial t;
        t.step = step;
        t.x.resize(x0_.size());
        t.g.assign(x0_.size(), 0.0);
        for (std::size_t i = 0; i < x0_.size(); ++i)
            t.x[i] = x0_[i] + step * d_[i];
        t.f = objective_(t.x, t.g);
        ++evals_;
        if (!all_finite(t.g))
            t.f = std::numeric_limits<double>::quiet_NaN();
        t.slope = dot(t.g, d_);
        last_eval_step_ = step;
        if (std::isfinite(t.f) && t.f <= f0_ + options_.c1 * step * slope0_ && t.f < f0_ &&
            (!have_best_ || t.f < best_.f)) {
            best_ = t;
            have_best_ = true;
        }
        return t;
    }

    // lo satisfies sufficient decrease and has the lower value; the minimiser
    // is bracketed between lo.step and hi.step.
    LineSearchOutcome zoom(Trial lo, Trial hi)
    {
        while (evals_ < options_.max_line_search_evals) {
            const double a = lo.step, b = hi.step;
            const double width = std::abs(b - a);
            if (width <= 1e-14 * std::max(1.0, std::abs(a)))
                break;
            double step = cubic_minimiser(lo, hi);
            const double lo_edge = std::min(a, b) + 0.1 * width;
            const double hi_edge = std::max(a, b) - 0.1 * width;
            if (!std::isfinite(step) || step < lo_edge || step > hi_edge)
                step = 0.5 * (a + b);
            Trial cur = evaluate(step);
            if (!std::isfinite(cur.f) || cur.f > f0_ + options_.c1 * step * slope0_ || cur.f >= lo.f) {
                hi = std::move(cur);
            } else {
                if (std::abs(cur.slope) <= -options_.c2 * slope0_)
                    return accept(std::move(cur));
                if (cur.slope * (hi.step - lo.step) >= 0.0)
                    hi = std::move(lo);
                lo = std::move(cur);
            }
        }
        return finish(false, false);
    }

    static double cubic_minimiser(const Trial& p, const Trial& q)
    {
        if (!std::isfinite(q.f) || !std::isfinite(q.slope))
            return std::numeric_limits<double>::quiet_NaN();
        const double d1 = p.slope + q.slope - 3.0 * (p.f - q.f) / (p.step - q.step);
        const double disc = d1 * d1 - p.slope * q.slope;
        if (disc < 0.0)
            return std::numeric_limits<double>::quiet_NaN();
        const double d2 = std::copysign(std::sqrt(disc), q.step - p.step);
        return q.step - (q.step - p.step) * (q.slope + d2 - d1) / (q.slope - p.slope + 2.0 * d2);
    }

    LineSearchOutcome accept(Trial t)
    {
        LineSearchOutcome out;
        out.wolfe = true;
        out.decreased = true;
        out.last_eval_is_best = true;
        out.best = std::move(t);
        return out;
    }

    LineSearchOutcome finish(bool wolfe, bool non_finite)
    {
        LineSearchOutcome out;
        out.wolfe = wolfe;
        out.non_finite = non_finite && !have_best_;
        out.decreased = have_best_;
        if (have_best_) {
            out.last_eval_is_best = best_.step == last_eval_step_;
            out.best = std::move(best_);
        }
        return out;
    }

    const Objective& objective_;
    const LbfgsOptions& options_;
    std::span<const double> x0_;
    double f0_;
    std::span<const double> d_;
    double slope0_;
    int evals_ = 0;
    double last_eval_step_ = 0.0;
    bool have_best_ = false;
    Trial best_;
};

struct CorrectionPair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

std::vector<double> two_loop_direction(std::span<const double> g, const std::deque<CorrectionPair>& pairs)
{
    std::vector<double> q(g.begin(), g.end());
    std::vector<double> alpha(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        const auto& p = pairs[i];
        alpha[i] = p.rho * dot(p.s, q);
        for (std::size_t j = 0; j < q.size(); ++j)
            q[j] -= alpha[i] * p.y[j];
    }
    if (!pairs.empty()) {
        const auto& last = pairs.back();
        const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (double& v : q)
            v *= gamma;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        const double beta = p.rho * dot(p.y, q);
        for (std::size_t j = 0; j < q.size(); ++j)
            q[j] += (alpha[i] - beta) * p.s[j];
    }
    for (double& v : q)
        v = -v;
    return q;
}

} // namespace

std::string_view to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::IterationLimit: return "iteration-limit";
    case StopReason::GradientTolerance: return "gradient-tolerance";
    case StopReason::LossChangeTolerance: return "loss-change-tolerance";
    case StopReason::LineSearchFailure: return "line-search-failure";
    case StopReason::NonFiniteLoss: return "non-finite-loss";
    }
    return "?";
}

void AdamOptions::validate() const
{
    if (epochs < 0)
        throw std::invalid_argument("adam: epochs must be >= 0");
    if (!(lr > 0.0))
        throw std::invalid_argument("adam: learning rate must be > 0");
    if (!(0.0 < beta1 && beta1 < beta2 && beta2 < 1.0))
        throw std::invalid_argument("adam: require 0 < beta1 < beta2 < 1");
    if (!(eps > 0.0))
        throw std::invalid_argument("adam: eps must be > 0");
}

void LbfgsOptions::validate() const
{
    if (max_iters < 0)
        throw std::invalid_argument("lbfgs: max_iters must be >= 0");
    if (memory < 1)
        throw std::invalid_argument("lbfgs: memory must be >= 1");
    if (!(0.0 < c1 && c1 < c2 && c2 < 1.0))
        throw std::invalid_argument("lbfgs: require 0 < c1 < c2 < 1");
    if (max_line_search_evals < 2)
        throw std::invalid_argument("lbfgs: max_line_search_evals must be >= 2");
}

OptimResult adam_run(const Objective& objective, std::vector<double> x0, const AdamOptions& options,
                     const Observer& observer)
{
    options.validate();
    OptimResult result;
    result.params = std::move(x0);
    auto& x = result.params;
    const std::size_t n = x.size();
    std::vector<double> g(n), m(n, 0.0), v(n, 0.0);
    result.history.reserve(static_cast<std::size_t>(options.epochs));

    double b1t = 1.0, b2t = 1.0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::fill(g.begin(), g.end(), 0.0);
        const double f = objective(x, g);
        if (!std::isfinite(f) || !all_finite(g)) {
            result.reason = StopReason::NonFiniteLoss;
            result.message = "non-finite loss or gradient at epoch " + std::to_string(epoch);
            return result;
        }
        result.history.push_back(f);
        result.iterations = epoch + 1;
        if (observer)
            observer(epoch, f);

        b1t *= options.beta1;
        b2t *= options.beta2;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
            v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
            const double m_hat = m[i] / (1.0 - b1t);
            const double v_hat = v[i] / (1.0 - b2t);
            x[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
        }
    }
    result.reason = StopReason::IterationLimit;
    return result;
}

OptimResult lbfgs_run(const Objective& objective, std::vector<double> x0, const LbfgsOptions& options,
                      const Observer& observer)
{
    options.validate();
    OptimResult result;
    result.params = std::move(x0);
    if (options.max_iters == 0) {
        result.reason = StopReason::IterationLimit;
        return result;
    }

    auto& x = result.params;
    std::vector<double> g(x.size(), 0.0);
    double f = objective(x, g);
    if (!std::isfinite(f) || !all_finite(g)) {
        result.reason = StopReason::NonFiniteLoss;
        result.message = "non-finite loss or gradient at the starting point";
        return result;
    }
    if (max_abs(g) <= options.grad_tol) {
        result.reason = StopReason::GradientTolerance;
        return result;
    }

    std::deque<CorrectionPair> pairs;
    result.reason = StopReason::IterationLimit;
    for (int iter = 0; iter < options.max_iters; ++iter) {
        std::vector<double> d = two_loop_direction(g, pairs);
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            pairs.clear();
            d = two_loop_direction(g, pairs);
            slope = dot(g, d);
        }
        const double step0 = pairs.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(g, g))) : 1.0;

        StrongWolfeSearch search(objective, options, x, f, d, slope);
        LineSearchOutcome ls = search.run(step0);
        if (!ls.decreased) {
            // No acceptable point: keep the current iterate. Restore the
            // objective's cache invariant with one evaluation at x.
            std::vector<double> g_again(x.size(), 0.0);
            objective(x, g_again);
            result.reason = StopReason::LineSearchFailure;
            result.message = ls.non_finite ? "line search produced only non-finite values"
                                           : "line search found no point with sufficient decrease";
            break;
        }
        if (!ls.last_eval_is_best) {
            std::vector<double> g_again(x.size(), 0.0);
            objective(ls.best.x, g_again);
        }

        CorrectionPair pair;
        pair.s.resize(x.size());
        pair.y.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            pair.s[i] = ls.best.x[i] - x[i];
            pair.y[i] = ls.best.g[i] - g[i];
        }
        const double sy = dot(pair.s, pair.y);
        const double yy = dot(pair.y, pair.y);
        if (sy > std::numeric_limits<double>::epsilon() * yy && yy > 0.0) {
            pair.rho = 1.0 / sy;
            pairs.push_back(std::move(pair));
            if (pairs.size() > static_cast<std::size_t>(options.memory))
                pairs.pop_front();
        }

        const double f_prev = f;
        x = std::move(ls.best.x);
        g = std::move(ls.best.g);
        f = ls.best.f;
        result.history.push_back(f);
        result.iterations = iter + 1;
        if (observer)
            observer(iter, f);

        if (max_abs(g) <= options.grad_tol) {
            result.reason = StopReason::GradientTolerance;
            break;
        }
        if (std::abs(f_prev - f) <= options.rel_tol * std::max(std::abs(f_prev), std::abs(f))) {
            result.reason = StopReason::LossChangeTolerance;
            break;
        }
        // A step that decreased f without meeting the curvature condition is
        // still taken; its pair is kept only if s^T y > 0.
    }
    return result;
}

} // namespace pinnfdm
