#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinnfdm {

/// Dense feed-forward layout: tanh on hidden layers, identity on the output.
struct NetworkArch {
    std::vector<int> layer_sizes; ///< input dim, hidden sizes..., output dim

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t n_layers() const { return layer_sizes.size() - 1; }
    int fan_in(std::size_t layer) const { return layer_sizes[layer]; }
    int fan_out(std::size_t layer) const { return layer_sizes[layer + 1]; }

    /// Flat layout is layer-major; within a layer the weight matrix
    /// (fan_out x fan_in, row-major) comes first, then the bias vector.
    std::size_t weight_offset(std::size_t layer) const;
    std::size_t bias_offset(std::size_t layer) const;
    std::size_t param_count() const;

    void validate() const;
    std::string to_string() const; ///< "1,20,20,20,1"
    static NetworkArch parse(const std::string& text);
    static NetworkArch with_hidden(int input_dim, const std::vector<int>& hidden, int output_dim = 1);

    bool operator==(const NetworkArch&) const = default;
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;
using WeightMap = Eigen::Map<RowMajorMatrix>;
using ConstBiasMap = Eigen::Map<const Eigen::VectorXd>;
using BiasMap = Eigen::Map<Eigen::VectorXd>;

/// Parameters stored in one contiguous buffer so optimizers can work on the
/// flat view directly.
class NetworkParams {
public:
    NetworkParams() = default;
    explicit NetworkParams(NetworkArch arch);
    NetworkParams(NetworkArch arch, std::vector<double> flat);

    const NetworkArch& arch() const { return arch_; }
    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }
    /// Replaces every parameter from a flat vector of matching length.
    void assign(std::span<const double> flat);

    ConstWeightMap weight(std::size_t layer) const;
    WeightMap weight(std::size_t layer);
    ConstBiasMap bias(std::size_t layer) const;
    BiasMap bias(std::size_t layer);

private:
    NetworkArch arch_;
    std::vector<double> data_;
};

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
/// Uses std::mt19937_64 seeded with `seed`; uniform draws are the top 53 bits.
NetworkParams init_params(const NetworkArch& arch, std::uint64_t seed);

/// Network output and its input derivatives at one point. du(o, k) is
/// d u_o / d x_k and d2u(o, k) the pure second derivative.
struct EvalWithDerivs {
    Eigen::VectorXd u;
    Eigen::MatrixXd du;
    Eigen::MatrixXd d2u;
};

Eigen::VectorXd forward(const NetworkParams& params, std::span<const double> x);
EvalWithDerivs forward_with_input_derivs(const NetworkParams& params, std::span<const double> x);

// ---------------------------------------------------------------------------
// Batched evaluation with second-order forward jets and its adjoint.

enum class DerivOrder { Value, Second };

/// Adjoints of a scalar loss with respect to the batched outputs. Empty
/// matrices mean "no dependence".
struct OutputAdjoint {
    Eigen::MatrixXd value;
    std::array<Eigen::MatrixXd, 2> d1;
    std::array<Eigen::MatrixXd, 2> d2;
};

/// Everything the reverse pass needs from a batched forward evaluation.
/// Points are stored column-wise (input_dim x N).
class BatchTrace {
public:
    DerivOrder order() const { return order_; }
    Eigen::Index n_points() const { return n_points_; }
    const Eigen::MatrixXd& value() const { return out_; }                   ///< output_dim x N
    const Eigen::MatrixXd& d1(int k) const { return out_d1_[static_cast<std::size_t>(k)]; }
    const Eigen::MatrixXd& d2(int k) const { return out_d2_[static_cast<std::size_t>(k)]; }

private:
    friend BatchTrace forward_batch(const NetworkArch&, std::span<const double>, const Eigen::MatrixXd&, DerivOrder);
    friend void backward_batch(const NetworkArch&, std::span<const double>, const BatchTrace&,
                               const OutputAdjoint&, std::span<double>);

    struct Layer {
        Eigen::MatrixXd in;                   // activations entering the layer
        std::array<Eigen::MatrixXd, 2> d_in;  // their first input derivatives
        std::array<Eigen::MatrixXd, 2> d2_in; // and pure second derivatives
        Eigen::MatrixXd t;                    // tanh(pre-activation), hidden layers only
        std::array<Eigen::MatrixXd, 2> d_pre;
        std::array<Eigen::MatrixXd, 2> d2_pre;
    };

    DerivOrder order_ = DerivOrder::Value;
    int dim_ = 0;
    Eigen::Index n_points_ = 0;
    std::vector<Layer> layers_;
    Eigen::MatrixXd out_;
    std::array<Eigen::MatrixXd, 2> out_d1_;
    std::array<Eigen::MatrixXd, 2> out_d2_;
};

BatchTrace forward_batch(const NetworkArch& arch, std::span<const double> flat, const Eigen::MatrixXd& points,
                         DerivOrder order);

/// Accumulates (+=) the parameter gradient into `grad` (length param_count).
void backward_batch(const NetworkArch& arch, std::span<const double> flat, const BatchTrace& trace,
                    const OutputAdjoint& adjoint, std::span<double> grad);

// ---------------------------------------------------------------------------
// Scalar-generic jet evaluation. Instantiated with double it is a plain
// reference implementation; with ad::Var it records the whole jet computation
// on a tape, which gives an independent route to parameter gradients.

template <class T>
struct ScalarJet {
    std::vector<T> u;
    std::vector<std::array<T, 2>> du;
    std::vector<std::array<T, 2>> d2u;
};

template <class T>
ScalarJet<T> forward_jet(const NetworkArch& arch, std::span<const T> flat, std::span<const double> x)
{
    using std::tanh;
    const int dim = arch.input_dim();
    if (static_cast<int>(x.size()) != dim)
        throw std::invalid_argument("forward_jet: input dimension mismatch");

    std::vector<T> h(x.begin(), x.end());
    std::vector<std::array<T, 2>> dh(h.size()), d2h(h.size());
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) {
            dh[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = T(i == k ? 1.0 : 0.0);
            d2h[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = T(0.0);
        }

    for (std::size_t l = 0; l < arch.n_layers(); ++l) {
        const int n_in = arch.fan_in(l), n_out = arch.fan_out(l);
        const std::size_t w0 = arch.weight_offset(l), b0 = arch.bias_offset(l);
        const bool hidden = l + 1 < arch.n_layers();
        std::vector<T> a(static_cast<std::size_t>(n_out));
        std::vector<std::array<T, 2>> da(a.size()), d2a(a.size());
        for (int o = 0; o < n_out; ++o) {
            auto& ao = a[static_cast<std::size_t>(o)];
            ao = flat[b0 + static_cast<std::size_t>(o)];
            for (int k = 0; k < dim; ++k) {
                da[static_cast<std::size_t>(o)][static_cast<std::size_t>(k)] = T(0.0);
                d2a[static_cast<std::size_t>(o)][static_cast<std::size_t>(k)] = T(0.0);
            }
            for (int i = 0; i < n_in; ++i) {
                const T& w = flat[w0 + static_cast<std::size_t>(o * n_in + i)];
                ao = ao + w * h[static_cast<std::size_t>(i)];
                for (int k = 0; k < dim; ++k) {
                    const auto ks = static_cast<std::size_t>(k);
                    da[static_cast<std::size_t>(o)][ks] = da[static_cast<std::size_t>(o)][ks] + w * dh[static_cast<std::size_t>(i)][ks];
                    d2a[static_cast<std::size_t>(o)][ks] = d2a[static_cast<std::size_t>(o)][ks] + w * d2h[static_cast<std::size_t>(i)][ks];
                }
            }
        }
        if (hidden) {
            for (std::size_t o = 0; o < a.size(); ++o) {
                const T t = tanh(a[o]);
                const T s1 = T(1.0) - t * t;
                const T s2 = T(-2.0) * t * s1;
                a[o] = t;
                for (int k = 0; k < dim; ++k) {
                    const auto ks = static_cast<std::size_t>(k);
                    const T first = da[o][ks];
                    da[o][ks] = s1 * first;
                    d2a[o][ks] = s1 * d2a[o][ks] + s2 * first * first;
                }
            }
        }
        h = std::move(a);
        dh = std::move(da);
        d2h = std::move(d2a);
    }
    return {std::move(h), std::move(dh), std::move(d2h)};
}

// ---------------------------------------------------------------------------
// Checkpoints: a CSV file with '#' header lines recording the layout and seed,
// then "index,value" rows in flat order with 17 significant digits.

struct Checkpoint {
    NetworkParams params;
    std::uint64_t seed = 0;
};

void write_checkpoint(const std::filesystem::path& path, const NetworkParams& params, std::uint64_t seed);
Checkpoint read_checkpoint(const std::filesystem::path& path);

} // namespace pinnfdm
