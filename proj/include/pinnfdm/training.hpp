#pragma once

#include "pinnfdm/fdm.hpp"
#include "pinnfdm/metrics.hpp"
#include "pinnfdm/network.hpp"
#include "pinnfdm/optim.hpp"
#include "pinnfdm/problems.hpp"
#include "pinnfdm/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pinnfdm {

struct LossWeights {
    double pde = 1.0;
    double bc = 1.0;
    double data = 1.0;
};

struct TrainConfig {
    int n_collocation = 256;
    int n_boundary_per_edge = 64;
    bool resample_each_epoch = true;
    int adam_epochs = 5000;
    double adam_lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int lbfgs_max_iters = 500;
    int lbfgs_memory = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    std::uint64_t seed = 1234;
    LossWeights weights;
    int checkpoint_every = 0; ///< epochs between checkpoint hook calls; 0 disables

    void validate() const;
    AdamOptions adam() const;
    LbfgsOptions lbfgs() const;

    static TrainConfig forward_defaults();
    static TrainConfig forward_2d_defaults();
    static TrainConfig fip_defaults();
};

struct LossReport {
    double l_pde = 0.0;
    double l_bc = 0.0;
    double l_data = 0.0;
    double total = 0.0;
};

struct HistoryRow {
    int epoch = 0;
    LossReport loss;
};

struct Observations {
    Eigen::VectorXd points;
    Eigen::VectorXd values;
    std::string provenance;

    Eigen::Index size() const { return values.size(); }
};

/// Known per-point terms of the residual
///   r = sum_k d2u/dx_k^2 - coefficient * u - source.
/// An empty coefficient vector means zero (Poisson).
struct PdeTerms {
    Eigen::VectorXd coefficient;
    Eigen::VectorXd source;
};

PdeTerms make_pde_terms(const ProblemSpec1D& spec, const Eigen::MatrixXd& points);
PdeTerms make_pde_terms(const ProblemSpec2D& spec, const Eigen::MatrixXd& points);
PdeTerms make_pde_terms(const FipSpec& spec, const Eigen::MatrixXd& points);

/// Mean squared residual over the collocation points.
double pde_loss(const NetworkParams& params, const Eigen::MatrixXd& points, const PdeTerms& terms);
/// Mean squared mismatch against prescribed boundary values.
double bc_loss(const NetworkParams& params, const BoundarySet& boundary);
/// Mean squared mismatch against observations (1D networks).
double data_loss(const NetworkParams& params, const Observations& observations);

/// L = w_pde L_PDE + w_bc L_BC for a single network with known PDE terms.
class ForwardPinnLoss {
public:
    ForwardPinnLoss(NetworkArch arch, LossWeights weights);

    void set_collocation(Eigen::MatrixXd points, PdeTerms terms);
    void set_boundary(BoundarySet boundary);
    const NetworkArch& arch() const { return arch_; }

    /// Loss components at `flat`; when `grad` is non-empty the gradient of
    /// the weighted total is written into it.
    LossReport evaluate(std::span<const double> flat, std::span<double> grad = {}) const;

private:
    NetworkArch arch_;
    LossWeights weights_;
    Eigen::MatrixXd points_;
    PdeTerms terms_;
    BoundarySet boundary_;
};

enum class FipMode { RecoverSource, RecoverCoefficient };

FipMode parse_fip_mode(std::string_view text);
std::string_view to_string(FipMode mode);

/// Joint loss for U_theta(x) and the hidden term H_phi(x) (Q or a):
///   r = U'' - a U - Q with H substituted, plus boundary and data mismatch.
/// The flat parameter vector is [U parameters | H parameters]. With
/// hidden_known the true closed form replaces H and only U is trained.
class FipLoss {
public:
    FipLoss(FipSpec spec, FipMode mode, NetworkArch u_arch, NetworkArch hidden_arch, Observations observations,
            LossWeights weights, bool hidden_known = false);

    void set_collocation(Eigen::MatrixXd points);
    std::size_t u_param_count() const { return u_arch_.param_count(); }
    std::size_t param_count() const;
    const NetworkArch& u_arch() const { return u_arch_; }
    const NetworkArch& hidden_arch() const { return hidden_arch_; }
    bool hidden_known() const { return hidden_known_; }

    LossReport evaluate(std::span<const double> flat, std::span<double> grad = {}) const;

private:
    FipSpec spec_;
    FipMode mode_;
    NetworkArch u_arch_;
    NetworkArch hidden_arch_;
    Observations observations_;
    LossWeights weights_;
    bool hidden_known_;
    Eigen::MatrixXd points_;
    Eigen::VectorXd known_a_;
    Eigen::VectorXd known_q_;
    Eigen::MatrixXd value_points_; // boundary points followed by observation points
};

/// Receives the full flat parameter vector every `checkpoint_every` epochs
/// (Adam and L-BFGS epochs share one counter).
using CheckpointHook = std::function<void(int epoch, std::span<const double> flat)>;

struct PinnRunResult {
    NetworkParams params;                ///< U network
    std::optional<NetworkParams> hidden; ///< FIP hidden-term network
    ErrorSummary error;                  ///< U against the reference on the assessment grid
    std::optional<ErrorSummary> hidden_error;
    LossReport final_loss;
    std::vector<HistoryRow> history;
    int adam_epochs_run = 0;
    int lbfgs_iterations = 0;
    StopReason adam_stop = StopReason::IterationLimit;
    StopReason lbfgs_stop = StopReason::IterationLimit;
    bool ok = true;
    std::string message;
    double wall_time = 0.0;

    Eigen::MatrixXd assessment_points; ///< input_dim x M
    Eigen::VectorXd predicted;
    Eigen::VectorXd reference;
    Eigen::VectorXd hidden_predicted;
    Eigen::VectorXd hidden_reference;
};

/// Adam (resampling collocation points every epoch if configured), then
/// L-BFGS on one fixed collocation set. The reference is the exact solution
/// when the problem has one, otherwise a fine FDM solution.
PinnRunResult train_forward_pinn(const ProblemSpec1D& problem, const NetworkArch& arch, const TrainConfig& config,
                                 const CheckpointHook& checkpoint = {});
PinnRunResult train_forward_pinn(const ProblemSpec2D& problem, const NetworkArch& arch, const TrainConfig& config,
                                 const CheckpointHook& checkpoint = {});

/// Solves the FIP equation by direct FDM on n_fdm cells and samples n_obs
/// equispaced interior points x_j = L j / (n_obs + 1) by linear interpolation.
Observations make_observations(const FipSpec& spec, int n_obs, int n_fdm);

struct FipTrainOptions {
    bool hidden_known = false;   ///< substitute the true hidden term and train U alone
    int reference_cells = 1024;  ///< FDM resolution for the U reference
    CheckpointHook checkpoint;   ///< receives [U | H]
};

PinnRunResult train_fip(const FipSpec& spec, FipMode mode, const Observations& observations, const NetworkArch& u_arch,
                        const NetworkArch& hidden_arch, const TrainConfig& config, const FipTrainOptions& options = {});

} // namespace pinnfdm
