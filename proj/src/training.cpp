#include "pinnfdm/training.hpp"

#include "pinnfdm/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pinnfdm {

namespace {

using Clock = std::chrono::steady_clock;

std::string describe_point(const Eigen::MatrixXd& points, Eigen::Index col)
{
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (Eigen::Index r = 0; r < points.rows(); ++r)
        os << (r ? ", " : "") << points(r, col);
    os << ")";
    return os.str();
}

void require_finite(const Eigen::VectorXd& v, const Eigen::MatrixXd& points, const char* what)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i)))
            throw NumericalError(std::string("non-finite ") + what + " at point " + describe_point(points, i));
}

void require_scalar_output(const NetworkArch& arch)
{
    arch.validate();
    if (arch.output_dim() != 1)
        throw std::invalid_argument("PINN losses need a scalar-output network, got " + arch.to_string());
}

Eigen::VectorXd row_vector(const Eigen::MatrixXd& m) { return m.row(0).transpose(); }

// Mean squared residual sum_k d2u_k - c u - s; accumulates weight * d/dtheta into grad.
double residual_loss(const NetworkArch& arch, std::span<const double> flat, const Eigen::MatrixXd& points,
                     const PdeTerms& terms, double weight, std::span<double> grad)
{
    const Eigen::Index n = points.cols();
    if (n < 1)
        throw std::invalid_argument("pde loss needs at least one collocation point");
    if (terms.source.size() != n || (terms.coefficient.size() != 0 && terms.coefficient.size() != n))
        throw std::invalid_argument("pde loss: PDE terms do not match the collocation points");

    const auto trace = forward_batch(arch, flat, points, DerivOrder::Second);
    const Eigen::VectorXd u = row_vector(trace.value());
    Eigen::VectorXd r = -terms.source;
    for (int k = 0; k < arch.input_dim(); ++k)
        r += row_vector(trace.d2(k));
    if (terms.coefficient.size() != 0)
        r -= terms.coefficient.cwiseProduct(u);
    require_finite(r, points, "PDE residual");
    const double loss = r.squaredNorm() / static_cast<double>(n);

    if (!grad.empty()) {
        const Eigen::VectorXd rbar = (2.0 * weight / static_cast<double>(n)) * r;
        OutputAdjoint adj;
        for (int k = 0; k < arch.input_dim(); ++k)
            adj.d2[static_cast<std::size_t>(k)] = rbar.transpose();
        if (terms.coefficient.size() != 0)
            adj.value = (-terms.coefficient.cwiseProduct(rbar)).transpose();
        backward_batch(arch, flat, trace, adj, grad);
    }
    return loss;
}

// Mean squared mismatch of u against targets at points.
double value_loss(const NetworkArch& arch, std::span<const double> flat, const Eigen::MatrixXd& points,
                  const Eigen::VectorXd& targets, double weight, std::span<double> grad, const char* what)
{
    const Eigen::Index m = points.cols();
    if (m < 1)
        throw std::invalid_argument(std::string(what) + " loss needs at least one point");
    if (targets.size() != m)
        throw std::invalid_argument(std::string(what) + " loss: values do not match points");
    const auto trace = forward_batch(arch, flat, points, DerivOrder::Value);
    const Eigen::VectorXd e = row_vector(trace.value()) - targets;
    require_finite(e, points, what);
    if (!grad.empty()) {
        OutputAdjoint adj;
        adj.value = ((2.0 * weight / static_cast<double>(m)) * e).transpose();
        backward_batch(arch, flat, trace, adj, grad);
    }
    return e.squaredNorm() / static_cast<double>(m);
}

Eigen::VectorXd evaluate_network(const NetworkArch& arch, std::span<const double> flat, const Eigen::MatrixXd& points)
{
    return row_vector(forward_batch(arch, flat, points, DerivOrder::Value).value());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ErrorSummary summarize(const Eigen::VectorXd& predicted, const Eigen::VectorXd& reference)
{
    return compare(std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
                   std::span<const double>(reference.data(), static_cast<std::size_t>(reference.size())));
}

// Adam then L-BFGS on `flat`. `resample(stream, index)` installs the
// collocation set drawn from derive_seed(config.seed, stream, index).
template <class Loss, class Resample>
void run_two_stage(const Loss& loss, std::vector<double>& flat, const TrainConfig& config, Resample&& resample,
                   const CheckpointHook& checkpoint, PinnRunResult& out)
{
    LossReport cached;
    std::vector<double> last_x;
    std::string failure;
    const bool hook = checkpoint && config.checkpoint_every > 0;
    auto record = [&](int epoch) {
        out.history.push_back({epoch, cached});
        if (hook && (epoch + 1) % config.checkpoint_every == 0)
            checkpoint(epoch, last_x);
    };
    auto objective = [&](std::span<const double> x, std::span<double> g) -> double {
        if (hook)
            last_x.assign(x.begin(), x.end());
        try {
            cached = loss.evaluate(x, g);
            return cached.total;
        } catch (const NumericalError& e) {
            failure = e.what();
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    auto fail = [&](const char* stage, const OptimResult& r) {
        out.ok = false;
        out.message = std::string(stage) + ": " + r.message;
        if (!failure.empty())
            out.message += " (" + failure + ")";
    };

    if (config.adam_epochs > 0) {
        if (!config.resample_each_epoch)
            resample(stream::kAdamCollocation, 0);
        std::uint64_t epoch = 0;
        auto adam_objective = [&](std::span<const double> x, std::span<double> g) {
            if (config.resample_each_epoch)
                resample(stream::kAdamCollocation, epoch);
            ++epoch;
            return objective(x, g);
        };
        auto observer = [&](int it, double) { record(it); };
        auto r = adam_run(adam_objective, flat, config.adam(), observer);
        flat = std::move(r.params);
        out.adam_epochs_run = r.iterations;
        out.adam_stop = r.reason;
        if (!r.ok()) {
            fail("adam", r);
            return;
        }
    }

    if (config.lbfgs_max_iters > 0) {
        resample(stream::kLbfgsCollocation, 0);
        const int offset = out.adam_epochs_run;
        auto observer = [&](int it, double) { record(offset + it); };
        auto r = lbfgs_run(objective, flat, config.lbfgs(), observer);
        flat = std::move(r.params);
        out.lbfgs_iterations = r.iterations;
        out.lbfgs_stop = r.reason;
        if (!r.ok()) {
            fail("lbfgs", r);
            return;
        }
        if (r.reason == StopReason::LineSearchFailure)
            out.message = "lbfgs stopped early: " + r.message;
    }
}

template <class Loss, class Resample>
void final_loss(const Loss& loss, const std::vector<double>& flat, Resample&& resample, PinnRunResult& out)
{
    resample(stream::kEvalCollocation, 0);
    try {
        out.final_loss = loss.evaluate(flat, {});
    } catch (const NumericalError& e) {
        out.ok = false;
        out.message = std::string("final loss: ") + e.what();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.final_loss = {nan, nan, nan, nan};
    }
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

// ---------------------------------------------------------------------------

void TrainConfig::validate() const
{
    if (n_collocation < 1)
        throw std::invalid_argument("n_collocation must be >= 1");
    if (n_boundary_per_edge < 1)
        throw std::invalid_argument("n_boundary_per_edge must be >= 1");
    if (checkpoint_every < 0)
        throw std::invalid_argument("checkpoint_every must be >= 0");
    if (weights.pde < 0.0 || weights.bc < 0.0 || weights.data < 0.0)
        throw std::invalid_argument("loss weights must be >= 0");
    adam().validate();
    lbfgs().validate();
}

AdamOptions TrainConfig::adam() const { return {adam_epochs, adam_lr, adam_beta1, adam_beta2, adam_eps}; }

LbfgsOptions TrainConfig::lbfgs() const
{
    LbfgsOptions o;
    o.max_iters = lbfgs_max_iters;
    o.memory = lbfgs_memory;
    o.c1 = wolfe_c1;
    o.c2 = wolfe_c2;
    return o;
}

TrainConfig TrainConfig::forward_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::forward_2d_defaults()
{
    TrainConfig c;
    c.lbfgs_max_iters = 40000;
    return c;
}

TrainConfig TrainConfig::fip_defaults()
{
    TrainConfig c;
    c.adam_epochs = 40000;
    c.lbfgs_max_iters = 0;
    return c;
}

FipMode parse_fip_mode(std::string_view text)
{
    if (text == "recover-source")
        return FipMode::RecoverSource;
    if (text == "recover-coefficient")
        return FipMode::RecoverCoefficient;
    throw std::invalid_argument("unknown FIP mode '" + std::string(text) +
                                "' (expected recover-source or recover-coefficient)");
}

std::string_view to_string(FipMode mode)
{
    return mode == FipMode::RecoverSource ? "recover-source" : "recover-coefficient";
}

PdeTerms make_pde_terms(const ProblemSpec1D& spec, const Eigen::MatrixXd& points)
{
    PdeTerms t;
    t.source.resize(points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i)
        t.source(i) = spec.source(points(0, i));
    return t;
}

PdeTerms make_pde_terms(const ProblemSpec2D& spec, const Eigen::MatrixXd& points)
{
    PdeTerms t;
    t.source.resize(points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i)
        t.source(i) = spec.source(points(0, i), points(1, i));
    return t;
}

PdeTerms make_pde_terms(const FipSpec& spec, const Eigen::MatrixXd& points)
{
    PdeTerms t;
    t.source.resize(points.cols());
    t.coefficient.resize(points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        t.source(i) = spec.source(points(0, i));
        t.coefficient(i) = spec.coefficient(points(0, i));
    }
    return t;
}

double pde_loss(const NetworkParams& params, const Eigen::MatrixXd& points, const PdeTerms& terms)
{
    require_scalar_output(params.arch());
    return residual_loss(params.arch(), params.flat(), points, terms, 1.0, {});
}

double bc_loss(const NetworkParams& params, const BoundarySet& boundary)
{
    require_scalar_output(params.arch());
    return value_loss(params.arch(), params.flat(), boundary.points, boundary.values, 1.0, {}, "boundary");
}

double data_loss(const NetworkParams& params, const Observations& observations)
{
    require_scalar_output(params.arch());
    const Eigen::MatrixXd pts = observations.points.transpose();
    return value_loss(params.arch(), params.flat(), pts, observations.values, 1.0, {}, "data");
}

// ---------------------------------------------------------------------------

ForwardPinnLoss::ForwardPinnLoss(NetworkArch arch, LossWeights weights) : arch_(std::move(arch)), weights_(weights)
{
    require_scalar_output(arch_);
}

void ForwardPinnLoss::set_collocation(Eigen::MatrixXd points, PdeTerms terms)
{
    if (points.rows() != arch_.input_dim())
        throw std::invalid_argument("collocation points do not match the network input dimension");
    points_ = std::move(points);
    terms_ = std::move(terms);
}

void ForwardPinnLoss::set_boundary(BoundarySet boundary)
{
    if (boundary.points.rows() != arch_.input_dim())
        throw std::invalid_argument("boundary points do not match the network input dimension");
    boundary_ = std::move(boundary);
}

LossReport ForwardPinnLoss::evaluate(std::span<const double> flat, std::span<double> grad) const
{
    if (!grad.empty()) {
        if (grad.size() != flat.size())
            throw std::invalid_argument("gradient buffer has the wrong length");
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    LossReport r;
    r.l_pde = residual_loss(arch_, flat, points_, terms_, weights_.pde, grad);
    r.l_bc = value_loss(arch_, flat, boundary_.points, boundary_.values, weights_.bc, grad, "boundary");
    r.total = weights_.pde * r.l_pde + weights_.bc * r.l_bc;
    return r;
}

// ---------------------------------------------------------------------------

FipLoss::FipLoss(FipSpec spec, FipMode mode, NetworkArch u_arch, NetworkArch hidden_arch, Observations observations,
                 LossWeights weights, bool hidden_known)
    : spec_(spec)
    , mode_(mode)
    , u_arch_(std::move(u_arch))
    , hidden_arch_(std::move(hidden_arch))
    , observations_(std::move(observations))
    , weights_(weights)
    , hidden_known_(hidden_known)
{
    validate(spec_);
    require_scalar_output(u_arch_);
    require_scalar_output(hidden_arch_);
    if (u_arch_.input_dim() != 1 || hidden_arch_.input_dim() != 1)
        throw std::invalid_argument("FIP networks take a single input");
    if (observations_.size() < 1)
        throw std::invalid_argument("FIP training needs at least one observation");
    if (observations_.points.size() != observations_.values.size())
        throw std::invalid_argument("observation points and values differ in length");

    const auto boundary = boundary_points_1d(spec_);
    value_points_.resize(1, boundary.size() + observations_.size());
    value_points_.leftCols(boundary.size()) = boundary.points;
    value_points_.rightCols(observations_.size()) = observations_.points.transpose();
}

std::size_t FipLoss::param_count() const
{
    return u_arch_.param_count() + (hidden_known_ ? 0 : hidden_arch_.param_count());
}

void FipLoss::set_collocation(Eigen::MatrixXd points)
{
    if (points.rows() != 1)
        throw std::invalid_argument("FIP collocation points must be one-dimensional");
    points_ = std::move(points);
    known_a_.resize(points_.cols());
    known_q_.resize(points_.cols());
    for (Eigen::Index i = 0; i < points_.cols(); ++i) {
        known_a_(i) = spec_.coefficient(points_(0, i));
        known_q_(i) = spec_.source(points_(0, i));
    }
}

LossReport FipLoss::evaluate(std::span<const double> flat, std::span<double> grad) const
{
    if (flat.size() != param_count())
        throw std::invalid_argument("FIP parameter vector has the wrong length");
    const bool want_grad = !grad.empty();
    if (want_grad) {
        if (grad.size() != flat.size())
            throw std::invalid_argument("gradient buffer has the wrong length");
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    const Eigen::Index n = points_.cols();
    if (n < 1)
        throw std::invalid_argument("FIP loss needs at least one collocation point");

    const std::size_t nu = u_arch_.param_count();
    const auto u_flat = flat.subspan(0, nu);
    const auto h_flat = flat.subspan(nu);
    const auto u_grad = want_grad ? grad.subspan(0, nu) : std::span<double>{};
    const auto h_grad = want_grad ? grad.subspan(nu) : std::span<double>{};

    const auto u_trace = forward_batch(u_arch_, u_flat, points_, DerivOrder::Second);
    const Eigen::VectorXd u = row_vector(u_trace.value());
    const Eigen::VectorXd u_xx = row_vector(u_trace.d2(0));

    std::optional<BatchTrace> h_trace;
    Eigen::VectorXd hidden;
    if (hidden_known_) {
        hidden = mode_ == FipMode::RecoverSource ? known_q_ : known_a_;
    } else {
        h_trace = forward_batch(hidden_arch_, h_flat, points_, DerivOrder::Value);
        hidden = row_vector(h_trace->value());
    }
    const Eigen::VectorXd& a = mode_ == FipMode::RecoverCoefficient ? hidden : known_a_;
    const Eigen::VectorXd& q = mode_ == FipMode::RecoverSource ? hidden : known_q_;

    const Eigen::VectorXd r = u_xx - a.cwiseProduct(u) - q;
    require_finite(r, points_, "PDE residual");

    LossReport report;
    report.l_pde = r.squaredNorm() / static_cast<double>(n);

    if (want_grad) {
        const Eigen::VectorXd rbar = (2.0 * weights_.pde / static_cast<double>(n)) * r;
        OutputAdjoint u_adj;
        u_adj.value = (-a.cwiseProduct(rbar)).transpose();
        u_adj.d2[0] = rbar.transpose();
        backward_batch(u_arch_, u_flat, u_trace, u_adj, u_grad);
        if (h_trace) {
            OutputAdjoint h_adj;
            h_adj.value = mode_ == FipMode::RecoverSource ? Eigen::MatrixXd(-rbar.transpose())
                                                          : Eigen::MatrixXd(-u.cwiseProduct(rbar).transpose());
            backward_batch(hidden_arch_, h_flat, *h_trace, h_adj, h_grad);
        }
    }

    // Boundary values and observations share one value-only pass of U.
    const auto v_trace = forward_batch(u_arch_, u_flat, value_points_, DerivOrder::Value);
    const Eigen::VectorXd v = row_vector(v_trace.value());
    require_finite(v, value_points_, "network value");
    const Eigen::Index nb = 2;
    const Eigen::Index nd = observations_.size();
    Eigen::VectorXd e_bc(nb);
    e_bc << v(0) - spec_.bc_lo, v(1) - spec_.bc_hi;
    const Eigen::VectorXd e_data = v.tail(nd) - observations_.values;
    report.l_bc = e_bc.squaredNorm() / static_cast<double>(nb);
    report.l_data = e_data.squaredNorm() / static_cast<double>(nd);
    if (want_grad) {
        OutputAdjoint v_adj;
        v_adj.value.resize(1, nb + nd);
        v_adj.value.leftCols(nb) = ((2.0 * weights_.bc / static_cast<double>(nb)) * e_bc).transpose();
        v_adj.value.rightCols(nd) = ((2.0 * weights_.data / static_cast<double>(nd)) * e_data).transpose();
        backward_batch(u_arch_, u_flat, v_trace, v_adj, u_grad);
    }
    report.total = weights_.pde * report.l_pde + weights_.bc * report.l_bc + weights_.data * report.l_data;
    return report;
}

// ---------------------------------------------------------------------------

PinnRunResult train_forward_pinn(const ProblemSpec1D& problem, const NetworkArch& arch, const TrainConfig& config,
                                 const CheckpointHook& checkpoint)
{
    validate(problem);
    config.validate();
    require_scalar_output(arch);
    if (arch.input_dim() != 1)
        throw std::invalid_argument("1D problem needs a network with input dimension 1");
    const auto start = Clock::now();

    PinnRunResult out;
    out.params = init_params(arch, derive_seed(config.seed, stream::kInit));
    std::vector<double> flat(out.params.flat().begin(), out.params.flat().end());

    ForwardPinnLoss loss(arch, config.weights);
    loss.set_boundary(boundary_points_1d(problem));
    auto resample = [&](std::uint64_t s, std::uint64_t index) {
        auto sample = sample_problem(problem, config.n_collocation, derive_seed(config.seed, s, index));
        PdeTerms terms = make_pde_terms(problem, sample.interior);
        loss.set_collocation(std::move(sample.interior), std::move(terms));
    };

    run_two_stage(loss, flat, config, resample, checkpoint, out);
    final_loss(loss, flat, resample, out);
    out.params.assign(flat);

    const auto xs = assessment_grid_1d(problem.domain_lo, problem.domain_hi);
    out.assessment_points = to_eigen(xs).transpose();
    out.predicted = evaluate_network(arch, flat, out.assessment_points);
    if (problem.exact) {
        out.reference.resize(static_cast<Eigen::Index>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i)
            out.reference(static_cast<Eigen::Index>(i)) = (*problem.exact)(xs[i]);
    } else {
        out.reference = to_eigen(solve_poisson_1d(problem, kAssessmentNodes1D - 1).values);
    }
    out.error = summarize(out.predicted, out.reference);
    out.wall_time = seconds_since(start);
    return out;
}

PinnRunResult train_forward_pinn(const ProblemSpec2D& problem, const NetworkArch& arch, const TrainConfig& config,
                                 const CheckpointHook& checkpoint)
{
    validate(problem);
    config.validate();
    require_scalar_output(arch);
    if (arch.input_dim() != 2)
        throw std::invalid_argument("2D problem needs a network with input dimension 2");
    const auto start = Clock::now();

    PinnRunResult out;
    out.params = init_params(arch, derive_seed(config.seed, stream::kInit));
    std::vector<double> flat(out.params.flat().begin(), out.params.flat().end());

    ForwardPinnLoss loss(arch, config.weights);
    loss.set_boundary(boundary_points_2d(problem, config.n_boundary_per_edge));
    auto resample = [&](std::uint64_t s, std::uint64_t index) {
        auto sample = sample_problem(problem, config.n_collocation, 1, derive_seed(config.seed, s, index));
        PdeTerms terms = make_pde_terms(problem, sample.interior);
        loss.set_collocation(std::move(sample.interior), std::move(terms));
    };

    run_two_stage(loss, flat, config, resample, checkpoint, out);
    final_loss(loss, flat, resample, out);
    out.params.assign(flat);

    const auto pts = assessment_grid_2d(problem.domain);
    out.assessment_points.resize(2, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out.assessment_points(0, static_cast<Eigen::Index>(i)) = pts[i][0];
        out.assessment_points(1, static_cast<Eigen::Index>(i)) = pts[i][1];
    }
    out.predicted = evaluate_network(arch, flat, out.assessment_points);
    if (problem.exact) {
        out.reference.resize(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i)
            out.reference(static_cast<Eigen::Index>(i)) = (*problem.exact)(pts[i][0], pts[i][1]);
    } else {
        // The assessment grid coincides with the nodes of a 100 x 100 FDM grid.
        const auto fdm = solve_poisson_2d(problem, kAssessmentNodes2D - 1, kAssessmentNodes2D - 1);
        out.reference = to_eigen(fdm.values);
    }
    out.error = summarize(out.predicted, out.reference);
    out.wall_time = seconds_since(start);
    return out;
}

Observations make_observations(const FipSpec& spec, int n_obs, int n_fdm)
{
    if (n_obs < 2)
        throw std::invalid_argument("make_observations: n_obs must be >= 2, got " + std::to_string(n_obs));
    const auto field = solve_fip_fdm(spec, n_fdm, FipOptions{FipMethod::Direct});
    std::vector<double> xs(static_cast<std::size_t>(n_obs));
    for (int j = 1; j <= n_obs; ++j)
        xs[static_cast<std::size_t>(j - 1)] = spec.length * j / (n_obs + 1);
    Observations obs;
    obs.points = to_eigen(xs);
    obs.values = to_eigen(interpolate(field, xs));
    obs.provenance = "fdm:n=" + std::to_string(n_fdm);
    return obs;
}

PinnRunResult train_fip(const FipSpec& spec, FipMode mode, const Observations& observations, const NetworkArch& u_arch,
                        const NetworkArch& hidden_arch, const TrainConfig& config, const FipTrainOptions& options)
{
    validate(spec);
    config.validate();
    if (observations.size() < 1)
        throw std::invalid_argument("train_fip: observations are empty");
    const auto start = Clock::now();

    FipLoss loss(spec, mode, u_arch, hidden_arch, observations, config.weights, options.hidden_known);

    PinnRunResult out;
    out.params = init_params(u_arch, derive_seed(config.seed, stream::kInit));
    std::vector<double> flat(out.params.flat().begin(), out.params.flat().end());
    if (!options.hidden_known) {
        const auto h = init_params(hidden_arch, derive_seed(config.seed, stream::kHiddenInit));
        flat.insert(flat.end(), h.flat().begin(), h.flat().end());
    }

    auto resample = [&](std::uint64_t s, std::uint64_t index) {
        loss.set_collocation(sample_problem(spec, config.n_collocation, derive_seed(config.seed, s, index)).interior);
    };

    run_two_stage(loss, flat, config, resample, options.checkpoint, out);
    final_loss(loss, flat, resample, out);

    const std::size_t nu = u_arch.param_count();
    out.params.assign(std::span<const double>(flat).subspan(0, nu));
    if (!options.hidden_known)
        out.hidden = NetworkParams(hidden_arch, std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(nu), flat.end()));

    const auto xs = assessment_grid_1d(0.0, spec.length);
    out.assessment_points = to_eigen(xs).transpose();
    out.predicted = evaluate_network(u_arch, out.params.flat(), out.assessment_points);
    const auto reference = solve_fip_fdm(spec, options.reference_cells, FipOptions{FipMethod::Direct});
    out.reference = to_eigen(interpolate(reference, xs));
    out.error = summarize(out.predicted, out.reference);

    out.hidden_reference.resize(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
        out.hidden_reference(static_cast<Eigen::Index>(i)) =
            mode == FipMode::RecoverSource ? spec.source(xs[i]) : spec.coefficient(xs[i]);
    out.hidden_predicted = out.hidden ? evaluate_network(hidden_arch, out.hidden->flat(), out.assessment_points)
                                      : out.hidden_reference;
    out.hidden_error = summarize(out.hidden_predicted, out.hidden_reference);
    out.wall_time = seconds_since(start);
    return out;
}

} // namespace pinnfdm
