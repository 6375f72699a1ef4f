#include "pinnfdm/network.hpp"

#include <charconv>
#include <cstdio>
#include <optional>
#include <fstream>
#include <random>
#include <sstream>

namespace pinnfdm {

namespace {

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw std::invalid_argument("empty entry in layer list '" + text + "'");
        int v = 0;
        const auto* first = item.data() + b;
        const auto* last = item.data() + e + 1;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            throw std::invalid_argument("bad integer '" + item + "' in layer list '" + text + "'");
        out.push_back(v);
    }
    return out;
}

void check_flat(const NetworkArch& arch, std::size_t size)
{
    if (size != arch.param_count())
        throw std::invalid_argument("flat parameter vector has length " + std::to_string(size) + ", expected " +
                                    std::to_string(arch.param_count()) + " for " + arch.to_string());
}

Eigen::MatrixXd zero_if_empty(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols)
{
    if (m.size() == 0)
        return Eigen::MatrixXd::Zero(rows, cols);
    if (m.rows() != rows || m.cols() != cols)
        throw std::invalid_argument("backward_batch: output adjoint has the wrong shape");
    return m;
}

} // namespace

std::size_t NetworkArch::weight_offset(std::size_t layer) const
{
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l)
        off += static_cast<std::size_t>(fan_out(l)) * (static_cast<std::size_t>(fan_in(l)) + 1);
    return off;
}

std::size_t NetworkArch::bias_offset(std::size_t layer) const
{
    return weight_offset(layer) + static_cast<std::size_t>(fan_out(layer)) * static_cast<std::size_t>(fan_in(layer));
}

std::size_t NetworkArch::param_count() const { return weight_offset(n_layers()); }

void NetworkArch::validate() const
{
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("network needs at least an input and an output layer");
    for (int s : layer_sizes)
        if (s < 1)
            throw std::invalid_argument("layer sizes must be positive: " + to_string());
    if (input_dim() != 1 && input_dim() != 2)
        throw std::invalid_argument("input dimension must be 1 or 2: " + to_string());
}

std::string NetworkArch::to_string() const
{
    std::string out;
    for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(layer_sizes[i]);
    }
    return out;
}

NetworkArch NetworkArch::parse(const std::string& text)
{
    NetworkArch arch{parse_int_list(text)};
    arch.validate();
    return arch;
}

NetworkArch NetworkArch::with_hidden(int input_dim, const std::vector<int>& hidden, int output_dim)
{
    NetworkArch arch;
    arch.layer_sizes.push_back(input_dim);
    arch.layer_sizes.insert(arch.layer_sizes.end(), hidden.begin(), hidden.end());
    arch.layer_sizes.push_back(output_dim);
    arch.validate();
    return arch;
}

NetworkParams::NetworkParams(NetworkArch arch) : arch_(std::move(arch))
{
    arch_.validate();
    data_.assign(arch_.param_count(), 0.0);
}

NetworkParams::NetworkParams(NetworkArch arch, std::vector<double> flat) : arch_(std::move(arch)), data_(std::move(flat))
{
    arch_.validate();
    check_flat(arch_, data_.size());
}

void NetworkParams::assign(std::span<const double> flat)
{
    check_flat(arch_, flat.size());
    std::copy(flat.begin(), flat.end(), data_.begin());
}

ConstWeightMap NetworkParams::weight(std::size_t layer) const
{
    return {data_.data() + arch_.weight_offset(layer), arch_.fan_out(layer), arch_.fan_in(layer)};
}

WeightMap NetworkParams::weight(std::size_t layer)
{
    return {data_.data() + arch_.weight_offset(layer), arch_.fan_out(layer), arch_.fan_in(layer)};
}

ConstBiasMap NetworkParams::bias(std::size_t layer) const
{
    return {data_.data() + arch_.bias_offset(layer), arch_.fan_out(layer)};
}

BiasMap NetworkParams::bias(std::size_t layer)
{
    return {data_.data() + arch_.bias_offset(layer), arch_.fan_out(layer)};
}

NetworkParams init_params(const NetworkArch& arch, std::uint64_t seed)
{
    NetworkParams params(arch);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < arch.n_layers(); ++l) {
        const double bound = std::sqrt(6.0 / (arch.fan_in(l) + arch.fan_out(l)));
        auto w = params.weight(l);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                w(r, c) = bound * (2.0 * u - 1.0);
            }
        params.bias(l).setZero();
    }
    return params;
}

BatchTrace forward_batch(const NetworkArch& arch, std::span<const double> flat, const Eigen::MatrixXd& points,
                         DerivOrder order)
{
    check_flat(arch, flat.size());
    if (points.rows() != arch.input_dim())
        throw std::invalid_argument("forward_batch: points have " + std::to_string(points.rows()) +
                                    " rows, network expects input dimension " + std::to_string(arch.input_dim()));
    const bool second = order == DerivOrder::Second;
    const int dim = arch.input_dim();
    const Eigen::Index n = points.cols();

    BatchTrace trace;
    trace.order_ = order;
    trace.dim_ = dim;
    trace.n_points_ = n;
    trace.layers_.resize(arch.n_layers());

    Eigen::MatrixXd h = points;
    std::array<Eigen::MatrixXd, 2> dh, d2h;
    if (second) {
        for (int k = 0; k < dim; ++k) {
            dh[static_cast<std::size_t>(k)] = Eigen::MatrixXd::Zero(dim, n);
            dh[static_cast<std::size_t>(k)].row(k).setOnes();
            d2h[static_cast<std::size_t>(k)] = Eigen::MatrixXd::Zero(dim, n);
        }
    }

    for (std::size_t l = 0; l < arch.n_layers(); ++l) {
        const ConstWeightMap w(flat.data() + arch.weight_offset(l), arch.fan_out(l), arch.fan_in(l));
        const ConstBiasMap b(flat.data() + arch.bias_offset(l), arch.fan_out(l));
        const bool hidden = l + 1 < arch.n_layers();
        auto& cache = trace.layers_[l];

        Eigen::MatrixXd a = w * h;
        a.colwise() += b;
        std::array<Eigen::MatrixXd, 2> da, d2a;
        if (second) {
            for (int k = 0; k < dim; ++k) {
                const auto ks = static_cast<std::size_t>(k);
                da[ks] = w * dh[ks];
                d2a[ks] = l == 0 ? Eigen::MatrixXd::Zero(a.rows(), n) : Eigen::MatrixXd(w * d2h[ks]);
            }
        }
        cache.in = std::move(h);
        cache.d_in = std::move(dh);
        cache.d2_in = std::move(d2h);

        if (!hidden) {
            trace.out_ = std::move(a);
            trace.out_d1_ = std::move(da);
            trace.out_d2_ = std::move(d2a);
            break;
        }

        const Eigen::ArrayXXd t = a.array().tanh();
        const Eigen::ArrayXXd s1 = 1.0 - t.square();
        const Eigen::ArrayXXd s2 = -2.0 * t * s1;
        h = t.matrix();
        if (second) {
            for (int k = 0; k < dim; ++k) {
                const auto ks = static_cast<std::size_t>(k);
                dh[ks] = (s1 * da[ks].array()).matrix();
                d2h[ks] = (s1 * d2a[ks].array() + s2 * da[ks].array().square()).matrix();
            }
        }
        cache.t = t.matrix();
        cache.d_pre = std::move(da);
        cache.d2_pre = std::move(d2a);
    }
    return trace;
}

void backward_batch(const NetworkArch& arch, std::span<const double> flat, const BatchTrace& trace,
                    const OutputAdjoint& adjoint, std::span<double> grad)
{
    check_flat(arch, flat.size());
    check_flat(arch, grad.size());
    const bool second = trace.order_ == DerivOrder::Second;
    const int dim = trace.dim_;
    const Eigen::Index n = trace.n_points_;
    if (!second) {
        for (int k = 0; k < 2; ++k)
            if (adjoint.d1[static_cast<std::size_t>(k)].size() || adjoint.d2[static_cast<std::size_t>(k)].size())
                throw std::invalid_argument("backward_batch: derivative adjoints given for a value-only trace");
    }

    const Eigen::Index n_out = arch.output_dim();
    Eigen::MatrixXd abar = zero_if_empty(adjoint.value, n_out, n);
    std::array<Eigen::MatrixXd, 2> dabar, d2abar;
    if (second) {
        for (int k = 0; k < dim; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            dabar[ks] = zero_if_empty(adjoint.d1[ks], n_out, n);
            d2abar[ks] = zero_if_empty(adjoint.d2[ks], n_out, n);
        }
    }

    for (std::size_t l = arch.n_layers(); l-- > 0;) {
        const auto& cache = trace.layers_[l];
        const ConstWeightMap w(flat.data() + arch.weight_offset(l), arch.fan_out(l), arch.fan_in(l));
        const bool hidden = l + 1 < arch.n_layers();

        if (hidden) {
            // Incoming adjoints are for h = t, dh = s1 da, d2h = s1 d2a + s2 da^2.
            const Eigen::ArrayXXd t = cache.t.array();
            const Eigen::ArrayXXd s1 = 1.0 - t.square();
            const Eigen::ArrayXXd s2 = -2.0 * t * s1;
            Eigen::ArrayXXd tbar = abar.array();
            if (second) {
                Eigen::ArrayXXd s1bar = Eigen::ArrayXXd::Zero(t.rows(), t.cols());
                Eigen::ArrayXXd s2bar = Eigen::ArrayXXd::Zero(t.rows(), t.cols());
                for (int k = 0; k < dim; ++k) {
                    const auto ks = static_cast<std::size_t>(k);
                    const Eigen::ArrayXXd da = cache.d_pre[ks].array();
                    const Eigen::ArrayXXd d2a = cache.d2_pre[ks].array();
                    const Eigen::ArrayXXd dh_bar = dabar[ks].array();
                    const Eigen::ArrayXXd d2h_bar = d2abar[ks].array();
                    s1bar += dh_bar * da + d2h_bar * d2a;
                    s2bar += d2h_bar * da.square();
                    dabar[ks] = (dh_bar * s1 + 2.0 * d2h_bar * s2 * da).matrix();
                    d2abar[ks] = (d2h_bar * s1).matrix();
                }
                tbar += s1bar * (-2.0 * t) + s2bar * (6.0 * t.square() - 2.0);
            }
            abar = (tbar * s1).matrix();
        }

        WeightMap gw(grad.data() + arch.weight_offset(l), arch.fan_out(l), arch.fan_in(l));
        BiasMap gb(grad.data() + arch.bias_offset(l), arch.fan_out(l));
        gw.noalias() += abar * cache.in.transpose();
        gb += abar.rowwise().sum();
        if (second) {
            for (int k = 0; k < dim; ++k) {
                const auto ks = static_cast<std::size_t>(k);
                gw.noalias() += dabar[ks] * cache.d_in[ks].transpose();
                if (l > 0)
                    gw.noalias() += d2abar[ks] * cache.d2_in[ks].transpose();
            }
        }

        if (l == 0)
            break;
        abar = w.transpose() * abar;
        if (second) {
            for (int k = 0; k < dim; ++k) {
                const auto ks = static_cast<std::size_t>(k);
                dabar[ks] = w.transpose() * dabar[ks];
                d2abar[ks] = w.transpose() * d2abar[ks];
            }
        }
    }
}

Eigen::VectorXd forward(const NetworkParams& params, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != params.arch().input_dim())
        throw std::invalid_argument("forward: input has dimension " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(params.arch().input_dim()));
    const Eigen::MatrixXd pt = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    return forward_batch(params.arch(), params.flat(), pt, DerivOrder::Value).value().col(0);
}

EvalWithDerivs forward_with_input_derivs(const NetworkParams& params, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != params.arch().input_dim())
        throw std::invalid_argument("forward_with_input_derivs: input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(params.arch().input_dim()));
    const Eigen::MatrixXd pt = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    const auto trace = forward_batch(params.arch(), params.flat(), pt, DerivOrder::Second);
    const int dim = params.arch().input_dim();
    EvalWithDerivs out;
    out.u = trace.value().col(0);
    out.du.resize(params.arch().output_dim(), dim);
    out.d2u.resize(params.arch().output_dim(), dim);
    for (int k = 0; k < dim; ++k) {
        out.du.col(k) = trace.d1(k).col(0);
        out.d2u.col(k) = trace.d2(k).col(0);
    }
    return out;
}

void write_checkpoint(const std::filesystem::path& path, const NetworkParams& params, std::uint64_t seed)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
    os << "# pinnfdm checkpoint v1\n";
    os << "# layer_sizes: " << params.arch().to_string() << "\n";
    os << "# seed: " << seed << "\n";
    os << "index,value\n";
    char buf[64];
    const auto flat = params.flat();
    for (std::size_t i = 0; i < flat.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", flat[i]);
        os << i << ',' << buf << '\n';
    }
    if (!os)
        throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::string line;
    std::optional<NetworkArch> arch;
    std::uint64_t seed = 0;
    std::vector<double> values;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        if (line.rfind("# layer_sizes:", 0) == 0) {
            arch = NetworkArch::parse(line.substr(14));
        } else if (line.rfind("# seed:", 0) == 0) {
            seed = std::stoull(line.substr(7));
        } else if (line[0] == '#') {
            continue;
        } else if (!header_seen) {
            if (line != "index,value")
                throw std::runtime_error("checkpoint: expected 'index,value' header in " + path.string());
            header_seen = true;
        } else {
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error("checkpoint: malformed row '" + line + "'");
            const auto index = std::stoull(line.substr(0, comma));
            if (index != values.size())
                throw std::runtime_error("checkpoint: rows out of order at index " + std::to_string(index));
            values.push_back(std::stod(line.substr(comma + 1)));
        }
    }
    if (!arch)
        throw std::runtime_error("checkpoint: missing layer_sizes header in " + path.string());
    if (values.size() != arch->param_count())
        throw std::runtime_error("checkpoint: " + path.string() + " has " + std::to_string(values.size()) +
                                 " values, layout " + arch->to_string() + " needs " +
                                 std::to_string(arch->param_count()));
    return {NetworkParams(*arch, std::move(values)), seed};
}

} // namespace pinnfdm
