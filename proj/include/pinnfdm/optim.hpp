#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pinnfdm {

/// Returns f(x) and writes the gradient into `grad` (same length as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Called once per accepted iterate with the loss at that iterate. The most
/// recent Objective call was made at that same iterate, so callers may read
/// side information cached by the objective.
using Observer = std::function<void(int iteration, double loss)>;

enum class StopReason {
    IterationLimit,
    GradientTolerance,
    LossChangeTolerance,
    LineSearchFailure,
    NonFiniteLoss,
};

std::string_view to_string(StopReason reason);

struct OptimResult {
    std::vector<double> params;
    std::vector<double> history; ///< loss per epoch (Adam) or per accepted step (L-BFGS)
    StopReason reason = StopReason::IterationLimit;
    int iterations = 0;
    std::string message;

    /// False only when the run was aborted by a non-finite loss or gradient.
    bool ok() const { return reason != StopReason::NonFiniteLoss; }
};

struct AdamOptions {
    int epochs = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

/// Adam with bias correction. Each epoch evaluates the objective once; the
/// objective may change between calls (e.g. resampled collocation points).
OptimResult adam_run(const Objective& objective, std::vector<double> x0, const AdamOptions& options,
                     const Observer& observer = {});

struct LbfgsOptions {
    int max_iters = 500;
    int memory = 10;
    double c1 = 1e-4;         ///< sufficient decrease
    double c2 = 0.9;          ///< curvature (strong Wolfe)
    double grad_tol = 1e-9;   ///< stop when max |g_i| <= grad_tol
    double rel_tol = 1e-12;   ///< stop when |f_prev - f| <= rel_tol * max(|f_prev|, |f|)
    int max_line_search_evals = 30;

    void validate() const;
};

/// Limited-memory BFGS (two-loop recursion, scaled identity as the initial
/// inverse Hessian) with a bracketing/zoom strong-Wolfe line search. Accepted
/// losses are monotone non-increasing. The objective must be deterministic.
OptimResult lbfgs_run(const Objective& objective, std::vector<double> x0, const LbfgsOptions& options,
                      const Observer& observer = {});

} // namespace pinnfdm
