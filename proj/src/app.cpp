#include "pinnfdm/app.hpp"

#include "pinnfdm/error.hpp"
#include "pinnfdm/network.hpp"
#include "pinnfdm/sampling.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <array>
#include <exception>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pinnfdm::app {

namespace {

using Clock = std::chrono::steady_clock;

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"problem", {"id", "source_mode", "b1", "w1", "length"}},
        {"fdm", {"n", "method", "fip_method", "tol", "max_iter", "omega"}},
        {"network", {"hidden", "hidden_term"}},
        {"training",
         {"n_collocation", "n_boundary_per_edge", "resample_each_epoch", "adam_epochs", "adam_lr", "adam_beta1",
          "adam_beta2", "adam_eps", "lbfgs_max_iters", "lbfgs_memory", "wolfe_c1", "wolfe_c2", "w_pde", "w_bc",
          "w_data", "checkpoint_every"}},
        {"fip", {"mode", "n_obs", "n_fdm", "hidden_known"}},
        {"run", {"seed", "experiment_id"}},
    };
    return keys;
}

std::string key_name(const std::string& section, const std::string& key) { return section + "." + key; }

double parse_double(const std::string& name, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw std::invalid_argument(name + ": expected a number, got '" + text + "'");
    return v;
}

long long parse_integer(const std::string& name, const std::string& text)
{
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw std::invalid_argument(name + ": expected an integer, got '" + text + "'");
    return v;
}

int parse_int(const std::string& name, const std::string& text)
{
    const long long v = parse_integer(name, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw std::invalid_argument(name + ": value out of range: " + text);
    return static_cast<int>(v);
}

std::uint64_t parse_seed(const std::string& name, const std::string& text)
{
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        if (!text.empty() && text[0] != '-')
            v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw std::invalid_argument(name + ": expected a non-negative integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& name, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw std::invalid_argument(name + ": expected true or false, got '" + text + "'");
}

std::vector<int> parse_layers(const std::string& name, const std::string& text)
{
    std::vector<int> layers;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        layers.push_back(parse_int(name, item));
    if (layers.empty())
        throw std::invalid_argument(name + ": expected a comma-separated list of layer widths");
    return layers;
}

std::string join_layers(const std::vector<int>& layers)
{
    std::string out;
    for (std::size_t i = 0; i < layers.size(); ++i)
        out += (i ? "," : "") + std::to_string(layers[i]);
    return out;
}

void check_keys(const Tree& tree)
{
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end())
            throw std::invalid_argument("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body)
            if (!it->second.contains(key))
                throw std::invalid_argument("config: unknown key " + key_name(section, key));
    }
}

std::optional<std::string> lookup(const Tree& tree, const std::string& section, const std::string& key)
{
    if (auto v = tree.get_optional<std::string>(Tree::path_type(section + "." + key, '.')))
        return *v;
    return std::nullopt;
}

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\n") == std::string::npos)
        return text;
    std::string out = "\"";
    for (char c : text)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

fs::path prepare_directory(const fs::path& outdir, const std::string& id)
{
    const fs::path dir = outdir / id;
    fs::create_directories(dir);
    return dir;
}

// Removes a run directory that is still empty when a run throws, so that
// rejected configurations leave nothing behind.
class EmptyDirGuard {
public:
    explicit EmptyDirGuard(fs::path dir) : dir_(std::move(dir)) {}
    EmptyDirGuard(const EmptyDirGuard&) = delete;
    EmptyDirGuard& operator=(const EmptyDirGuard&) = delete;
    ~EmptyDirGuard()
    {
        if (std::uncaught_exceptions() > 0) {
            std::error_code ec;
            if (fs::is_empty(dir_, ec) && !ec)
                fs::remove(dir_, ec);
        }
    }

private:
    fs::path dir_;
};

void write_timing(const fs::path& dir, const RunReport& report)
{
    auto out = open_output(dir / "timing.csv");
    out << "experiment_id,wall_time_s\n" << csv_field(report.experiment_id) << "," << format_double(report.wall_time)
        << "\n";
}

void finish(RunReport& report, const Settings& settings, Clock::time_point start)
{
    write_config(report.directory / "config.ini", settings);
    report.artifacts.insert(report.artifacts.begin(), "config.ini");
    report.artifacts.push_back("report.csv");
    report.artifacts.push_back("timing.csv");
    report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    write_report(report.directory / "report.csv", report);
    write_timing(report.directory, report);
}

void write_history(const fs::path& path, const std::vector<HistoryRow>& history)
{
    auto out = open_output(path);
    out << "epoch,l_pde,l_bc,l_data,total\n";
    for (const auto& row : history)
        out << row.epoch << "," << format_double(row.loss.l_pde) << "," << format_double(row.loss.l_bc) << ","
            << format_double(row.loss.l_data) << "," << format_double(row.loss.total) << "\n";
}

// Columns: coordinates of each assessment point, then one column per field.
void write_columns(const fs::path& path, const std::vector<std::string>& header, const Eigen::MatrixXd& points,
                   const std::vector<const Eigen::VectorXd*>& fields)
{
    auto out = open_output(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        for (Eigen::Index r = 0; r < points.rows(); ++r)
            out << (r ? "," : "") << format_double(points(r, c));
        for (const auto* f : fields)
            out << "," << format_double((*f)(c));
        out << "\n";
    }
}

Eigen::VectorXd to_eigen(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ErrorSummary compare_vectors(const std::vector<double>& a, const std::vector<double>& b) { return compare(a, b); }

std::string convergence_message(const SolveInfo& info)
{
    return "did not converge in " + std::to_string(info.iterations) + " iterations (last update " +
           format_double(info.final_update_norm) + ")";
}

NetworkArch u_arch(const Settings& s)
{
    const int dim = s.problem.id == ProblemId::Poisson2D ? 2 : 1;
    return NetworkArch::with_hidden(dim, s.hidden, 1);
}

CheckpointHook checkpoint_writer(const fs::path& dir, const NetworkArch& arch, std::optional<NetworkArch> hidden,
                                 std::uint64_t seed)
{
    return [dir, arch, hidden, seed](int epoch, std::span<const double> flat) {
        const fs::path sub = dir / "checkpoints";
        fs::create_directories(sub);
        const std::string tag = std::to_string(epoch + 1); // epochs completed
        const std::size_t nu = arch.param_count();
        write_checkpoint(sub / ("checkpoint_" + tag + ".csv"),
                         NetworkParams(arch, std::vector<double>(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(nu))),
                         seed);
        if (hidden && flat.size() > nu)
            write_checkpoint(sub / ("hidden_checkpoint_" + tag + ".csv"),
                             NetworkParams(*hidden, std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(nu), flat.end())),
                             seed);
    };
}

void fill_pinn_report(RunReport& report, const PinnRunResult& result)
{
    report.error = result.error;
    report.hidden_error = result.hidden_error;
    report.final_loss = result.final_loss;
    report.iterations = result.adam_epochs_run + result.lbfgs_iterations;
    report.ok = result.ok;
    report.message = result.message;
}

} // namespace

// ---------------------------------------------------------------------------

std::string format_double(double v)
{
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

Tree load_config(const fs::path& path)
{
    Tree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
    check_keys(tree);
    return tree;
}

void apply_override(Tree& tree, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
        throw std::invalid_argument("override must look like section.key=value, got '" + std::string(assignment) + "'");
    const std::string section(assignment.substr(0, dot));
    const std::string key(assignment.substr(dot + 1, eq - dot - 1));
    tree.put(Tree::path_type(section + "." + key, '.'), std::string(assignment.substr(eq + 1)));
    check_keys(tree);
}

Settings resolve(const Tree& tree, Command command)
{
    check_keys(tree);
    Settings s;
    auto get = [&](const char* section, const char* key) { return lookup(tree, section, key); };
    auto name = [](const char* section, const char* key) { return key_name(section, key); };

    if (command == Command::Fip) {
        s.problem.id = ProblemId::Fip;
    } else if (auto v = get("problem", "id")) {
        s.problem.id = parse_problem_id(*v);
    }
    if (command == Command::TrainPinn && s.problem.id == ProblemId::Fip)
        throw std::invalid_argument("train-pinn solves the forward problems; use the fip command for fip");
    if (auto v = get("problem", "source_mode"))
        s.problem.source_mode = parse_source_mode(*v);
    if (auto v = get("problem", "b1"))
        s.problem.b1 = parse_double(name("problem", "b1"), *v);
    if (auto v = get("problem", "w1"))
        s.problem.w1 = parse_double(name("problem", "w1"), *v);
    if (auto v = get("problem", "length"))
        s.problem.length = parse_double(name("problem", "length"), *v);

    s.fdm.n = s.problem.id == ProblemId::Poisson2D ? 128 : 512;
    if (auto v = get("fdm", "n"))
        s.fdm.n = parse_int(name("fdm", "n"), *v);
    if (auto v = get("fdm", "method"))
        s.fdm.method = parse_method_2d(*v);
    if (auto v = get("fdm", "fip_method"))
        s.fdm.fip_method = parse_fip_method(*v);
    if (auto v = get("fdm", "tol"))
        s.fdm.tol = parse_double(name("fdm", "tol"), *v);
    if (auto v = get("fdm", "max_iter"))
        s.fdm.max_iter = parse_int(name("fdm", "max_iter"), *v);
    if (auto v = get("fdm", "omega"))
        s.fdm.omega = parse_double(name("fdm", "omega"), *v);

    if (auto v = get("network", "hidden"))
        s.hidden = parse_layers(name("network", "hidden"), *v);
    if (auto v = get("network", "hidden_term"))
        s.hidden_term = parse_layers(name("network", "hidden_term"), *v);

    if (command == Command::Fip)
        s.training = TrainConfig::fip_defaults();
    else if (s.problem.id == ProblemId::Poisson2D)
        s.training = TrainConfig::forward_2d_defaults();
    else
        s.training = TrainConfig::forward_defaults();
    auto& t = s.training;
    auto int_key = [&](const char* key, int& field) {
        if (auto v = get("training", key))
            field = parse_int(name("training", key), *v);
    };
    auto double_key = [&](const char* key, double& field) {
        if (auto v = get("training", key))
            field = parse_double(name("training", key), *v);
    };
    int_key("n_collocation", t.n_collocation);
    int_key("n_boundary_per_edge", t.n_boundary_per_edge);
    if (auto v = get("training", "resample_each_epoch"))
        t.resample_each_epoch = parse_bool(name("training", "resample_each_epoch"), *v);
    int_key("adam_epochs", t.adam_epochs);
    double_key("adam_lr", t.adam_lr);
    double_key("adam_beta1", t.adam_beta1);
    double_key("adam_beta2", t.adam_beta2);
    double_key("adam_eps", t.adam_eps);
    int_key("lbfgs_max_iters", t.lbfgs_max_iters);
    int_key("lbfgs_memory", t.lbfgs_memory);
    double_key("wolfe_c1", t.wolfe_c1);
    double_key("wolfe_c2", t.wolfe_c2);
    double_key("w_pde", t.weights.pde);
    double_key("w_bc", t.weights.bc);
    double_key("w_data", t.weights.data);
    int_key("checkpoint_every", t.checkpoint_every);
    if (auto v = get("run", "seed"))
        t.seed = parse_seed(name("run", "seed"), *v);

    if (auto v = get("fip", "mode"))
        s.fip.mode = parse_fip_mode(*v);
    if (auto v = get("fip", "n_obs"))
        s.fip.n_obs = parse_int(name("fip", "n_obs"), *v);
    if (auto v = get("fip", "n_fdm"))
        s.fip.n_fdm = parse_int(name("fip", "n_fdm"), *v);
    if (auto v = get("fip", "hidden_known"))
        s.fip.hidden_known = parse_bool(name("fip", "hidden_known"), *v);

    if (command == Command::TrainPinn || command == Command::Fip)
        t.validate();
    if (command == Command::Fip && s.fip.n_obs < 2)
        throw std::invalid_argument("fip.n_obs must be >= 2, got " + std::to_string(s.fip.n_obs));

    if (auto v = get("run", "experiment_id"); v && !v->empty())
        s.experiment_id = *v;
    else
        s.experiment_id = default_experiment_id(s, command);
    if (s.experiment_id.find_first_of("/\\") != std::string::npos || s.experiment_id == "." || s.experiment_id == "..")
        throw std::invalid_argument("run.experiment_id must be a plain directory name");
    return s;
}

Tree to_tree(const Settings& s)
{
    Tree t;
    auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
        t.put(Tree::path_type(section + "." + key, '.'), value);
    };
    put("problem", "id", std::string(to_string(s.problem.id)));
    put("problem", "source_mode", std::string(to_string(s.problem.source_mode)));
    put("problem", "b1", format_double(s.problem.b1));
    put("problem", "w1", format_double(s.problem.w1));
    put("problem", "length", format_double(s.problem.length));

    put("fdm", "n", std::to_string(s.fdm.n));
    put("fdm", "method", std::string(to_string(s.fdm.method)));
    put("fdm", "fip_method", std::string(to_string(s.fdm.fip_method)));
    put("fdm", "tol", format_double(s.fdm.tol));
    put("fdm", "max_iter", std::to_string(s.fdm.max_iter));
    if (s.fdm.omega)
        put("fdm", "omega", format_double(*s.fdm.omega));

    put("network", "hidden", join_layers(s.hidden));
    put("network", "hidden_term", join_layers(s.hidden_term));

    const auto& tr = s.training;
    put("training", "n_collocation", std::to_string(tr.n_collocation));
    put("training", "n_boundary_per_edge", std::to_string(tr.n_boundary_per_edge));
    put("training", "resample_each_epoch", tr.resample_each_epoch ? "true" : "false");
    put("training", "adam_epochs", std::to_string(tr.adam_epochs));
    put("training", "adam_lr", format_double(tr.adam_lr));
    put("training", "adam_beta1", format_double(tr.adam_beta1));
    put("training", "adam_beta2", format_double(tr.adam_beta2));
    put("training", "adam_eps", format_double(tr.adam_eps));
    put("training", "lbfgs_max_iters", std::to_string(tr.lbfgs_max_iters));
    put("training", "lbfgs_memory", std::to_string(tr.lbfgs_memory));
    put("training", "wolfe_c1", format_double(tr.wolfe_c1));
    put("training", "wolfe_c2", format_double(tr.wolfe_c2));
    put("training", "w_pde", format_double(tr.weights.pde));
    put("training", "w_bc", format_double(tr.weights.bc));
    put("training", "w_data", format_double(tr.weights.data));
    put("training", "checkpoint_every", std::to_string(tr.checkpoint_every));

    put("fip", "mode", std::string(to_string(s.fip.mode)));
    put("fip", "n_obs", std::to_string(s.fip.n_obs));
    put("fip", "n_fdm", std::to_string(s.fip.n_fdm));
    put("fip", "hidden_known", s.fip.hidden_known ? "true" : "false");

    put("run", "seed", std::to_string(tr.seed));
    put("run", "experiment_id", s.experiment_id);
    return t;
}

void write_config(const fs::path& path, const Settings& settings)
{
    auto out = open_output(path);
    boost::property_tree::ini_parser::write_ini(out, to_tree(settings));
}

std::string default_experiment_id(const Settings& s, Command command)
{
    const std::string problem(to_string(s.problem.id));
    switch (command) {
    case Command::SolveFdm:
        return "fdm-" + problem + "-n" + std::to_string(s.fdm.n);
    case Command::TrainPinn:
        return "pinn-" + problem + "-s" + std::to_string(s.training.seed);
    case Command::Fip:
        return "fip-" + std::string(to_string(s.fip.mode)) + "-s" + std::to_string(s.training.seed);
    case Command::Bench:
        break;
    }
    return "run";
}

void write_report(const fs::path& path, const RunReport& r)
{
    auto out = open_output(path);
    out << "experiment_id,method,problem,l2_relative,l_inf,n_points,nodal_l2_relative,hidden_l2_relative,"
           "l_pde,l_bc,l_data,total,iterations,seed,ok,message,artifacts\n";
    std::string artifacts;
    for (std::size_t i = 0; i < r.artifacts.size(); ++i)
        artifacts += (i ? ";" : "") + r.artifacts[i];
    auto opt = [](const auto& o, auto member) -> std::optional<double> {
        if (!o)
            return std::nullopt;
        return (*o).*member;
    };
    out << csv_field(r.experiment_id) << "," << r.method << "," << r.problem << ","
        << format_double(r.error.l2_relative) << "," << format_double(r.error.l_inf) << "," << r.error.n_points
        << "," << optional_field(opt(r.nodal_error, &ErrorSummary::l2_relative)) << ","
        << optional_field(opt(r.hidden_error, &ErrorSummary::l2_relative)) << ","
        << optional_field(opt(r.final_loss, &LossReport::l_pde)) << ","
        << optional_field(opt(r.final_loss, &LossReport::l_bc)) << ","
        << optional_field(opt(r.final_loss, &LossReport::l_data)) << ","
        << optional_field(opt(r.final_loss, &LossReport::total)) << "," << r.iterations << "," << r.seed << ","
        << (r.ok ? "true" : "false") << "," << csv_field(r.message) << "," << csv_field(artifacts) << "\n";
}

// ---------------------------------------------------------------------------

RunReport run_solve_fdm(const Settings& s, const fs::path& outdir)
{
    const auto start = Clock::now();
    RunReport report;
    report.experiment_id = s.experiment_id;
    report.method = "fdm";
    report.problem = std::string(to_string(s.problem.id));
    report.seed = s.training.seed;
    report.directory = prepare_directory(outdir, s.experiment_id);
    const fs::path dir = report.directory;
    const EmptyDirGuard guard(dir);

    SolveInfo info;
    switch (s.problem.id) {
    case ProblemId::Poisson1D: {
        const auto spec = builtin_poisson_1d();
        const auto field = solve_poisson_1d(spec, s.fdm.n);
        info = field.info;
        const auto nodes = field.grid.nodes();
        std::vector<double> exact(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            exact[i] = (*spec.exact)(nodes[i]);
        report.nodal_error = compare_vectors(field.values, exact);
        const auto xs = assessment_grid_1d(spec.domain_lo, spec.domain_hi);
        std::vector<double> truth(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            truth[i] = (*spec.exact)(xs[i]);
        report.error = compare_vectors(interpolate(field, xs), truth);
        const Eigen::VectorXd u = to_eigen(field.values), e = to_eigen(exact);
        write_columns(dir / "solution.csv", {"x", "u", "exact"}, to_eigen(nodes).transpose(), {&u, &e});
        break;
    }
    case ProblemId::Poisson2D: {
        const auto spec = builtin_poisson_2d(s.problem.source_mode);
        Poisson2DOptions options;
        options.method = s.fdm.method;
        options.tol = s.fdm.tol;
        options.max_iter = s.fdm.max_iter;
        options.omega = s.fdm.omega;
        const auto field = solve_poisson_2d(spec, s.fdm.n, s.fdm.n, options);
        info = field.info;
        const auto& g = field.grid;
        Eigen::MatrixXd pts(2, g.n_nodes());
        std::vector<double> exact(static_cast<std::size_t>(g.n_nodes()));
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i) {
                const auto k = g.index(i, j);
                pts(0, static_cast<Eigen::Index>(k)) = g.x(i);
                pts(1, static_cast<Eigen::Index>(k)) = g.y(j);
                exact[k] = (*spec.exact)(g.x(i), g.y(j));
            }
        report.nodal_error = compare_vectors(field.values, exact);
        const auto ps = assessment_grid_2d(spec.domain);
        std::vector<double> truth(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i)
            truth[i] = (*spec.exact)(ps[i][0], ps[i][1]);
        report.error = compare_vectors(interpolate(field, ps), truth);
        const Eigen::VectorXd u = to_eigen(field.values), e = to_eigen(exact);
        write_columns(dir / "solution.csv", {"x", "y", "u", "exact"}, pts, {&u, &e});
        break;
    }
    case ProblemId::Fip: {
        const auto spec = builtin_fip(s.problem.b1, s.problem.w1, s.problem.length);
        FipOptions options{s.fdm.fip_method, s.fdm.tol, s.fdm.max_iter};
        const auto field = solve_fip_fdm(spec, s.fdm.n, options);
        info = field.info;
        // No closed form: compare against a direct solve on a 4x finer grid,
        // whose every fourth node coincides with this grid.
        const auto fine = solve_fip_fdm(spec, 4 * s.fdm.n, FipOptions{FipMethod::Direct});
        std::vector<double> reference(field.values.size());
        for (std::size_t i = 0; i < reference.size(); ++i)
            reference[i] = fine.values[4 * i];
        report.nodal_error = compare_vectors(field.values, reference);
        const auto xs = assessment_grid_1d(0.0, spec.length);
        report.error = compare_vectors(interpolate(field, xs), interpolate(fine, xs));
        const Eigen::VectorXd u = to_eigen(field.values), e = to_eigen(reference);
        write_columns(dir / "solution.csv", {"x", "u", "reference"}, to_eigen(field.grid.nodes()).transpose(),
                      {&u, &e});
        break;
    }
    }
    report.artifacts.push_back("solution.csv");
    report.iterations = info.iterations;
    report.ok = info.converged;
    if (!info.converged)
        report.message = convergence_message(info);
    finish(report, s, start);
    return report;
}

RunReport run_train_pinn(const Settings& s, const fs::path& outdir)
{
    const auto start = Clock::now();
    RunReport report;
    report.experiment_id = s.experiment_id;
    report.method = "pinn";
    report.problem = std::string(to_string(s.problem.id));
    report.seed = s.training.seed;
    report.directory = prepare_directory(outdir, s.experiment_id);
    const fs::path dir = report.directory;
    const EmptyDirGuard guard(dir);

    const NetworkArch arch = u_arch(s);
    const auto hook = checkpoint_writer(dir, arch, std::nullopt, s.training.seed);
    PinnRunResult result;
    std::vector<std::string> header;
    if (s.problem.id == ProblemId::Poisson1D) {
        result = train_forward_pinn(builtin_poisson_1d(), arch, s.training, hook);
        header = {"x", "u_pinn", "reference"};
    } else if (s.problem.id == ProblemId::Poisson2D) {
        result = train_forward_pinn(builtin_poisson_2d(s.problem.source_mode), arch, s.training, hook);
        header = {"x", "y", "u_pinn", "reference"};
    } else {
        throw std::invalid_argument("train-pinn does not handle problem fip");
    }
    fill_pinn_report(report, result);

    write_history(dir / "loss_history.csv", result.history);
    write_checkpoint(dir / "checkpoint.csv", result.params, s.training.seed);
    write_columns(dir / "solution.csv", header, result.assessment_points, {&result.predicted, &result.reference});
    report.artifacts = {"loss_history.csv", "checkpoint.csv", "solution.csv"};
    finish(report, s, start);
    return report;
}

RunReport run_fip(const Settings& s, const fs::path& outdir)
{
    const auto start = Clock::now();
    RunReport report;
    report.experiment_id = s.experiment_id;
    report.method = "pinn";
    report.problem = "fip-" + std::string(to_string(s.fip.mode));
    report.seed = s.training.seed;

    const FipSpec spec = builtin_fip(s.problem.b1, s.problem.w1, s.problem.length);
    const Observations obs = make_observations(spec, s.fip.n_obs, s.fip.n_fdm);
    report.directory = prepare_directory(outdir, s.experiment_id);
    const fs::path dir = report.directory;
    const EmptyDirGuard guard(dir);

    const NetworkArch arch = NetworkArch::with_hidden(1, s.hidden, 1);
    const NetworkArch hidden_arch = NetworkArch::with_hidden(1, s.hidden_term, 1);
    FipTrainOptions options;
    options.hidden_known = s.fip.hidden_known;
    options.checkpoint = checkpoint_writer(dir, arch, hidden_arch, s.training.seed);
    const auto result = train_fip(spec, s.fip.mode, obs, arch, hidden_arch, s.training, options);
    fill_pinn_report(report, result);

    write_history(dir / "loss_history.csv", result.history);
    write_checkpoint(dir / "checkpoint.csv", result.params, s.training.seed);
    report.artifacts = {"loss_history.csv", "checkpoint.csv"};
    if (result.hidden) {
        write_checkpoint(dir / "hidden_checkpoint.csv", *result.hidden, s.training.seed);
        report.artifacts.push_back("hidden_checkpoint.csv");
    }
    write_columns(dir / "solution.csv", {"x", "u_pinn", "u_fdm"}, result.assessment_points,
                  {&result.predicted, &result.reference});
    const std::string h = s.fip.mode == FipMode::RecoverSource ? "q" : "a";
    write_columns(dir / "hidden.csv", {"x", h + "_pinn", h + "_true"}, result.assessment_points,
                  {&result.hidden_predicted, &result.hidden_reference});
    write_columns(dir / "observations.csv", {"x", "u_obs"}, obs.points.transpose(), {&obs.values});
    report.artifacts.insert(report.artifacts.end(), {"solution.csv", "hidden.csv", "observations.csv"});
    report.message = result.message.empty() ? "observations " + obs.provenance
                                            : result.message + "; observations " + obs.provenance;
    finish(report, s, start);
    return report;
}

// ---------------------------------------------------------------------------

Suite parse_suite(std::string_view text)
{
    if (text == "paper-forward")
        return Suite::PaperForward;
    if (text == "paper-fip")
        return Suite::PaperFip;
    if (text == "convergence")
        return Suite::Convergence;
    throw std::invalid_argument("unknown suite '" + std::string(text) +
                                "' (expected paper-forward, paper-fip or convergence)");
}

std::string_view to_string(Suite suite)
{
    switch (suite) {
    case Suite::PaperForward:
        return "paper-forward";
    case Suite::PaperFip:
        return "paper-fip";
    case Suite::Convergence:
        return "convergence";
    }
    return "unknown";
}

bool BenchReport::ok() const
{
    for (const auto& r : rows)
        if (!r.ok)
            return false;
    return !rows.empty();
}

namespace {

// Published figures the benchmark rows are compared against.
constexpr double kPaperFdm1D = 7.26e-8;
constexpr double kPaperFdm2D = 2.21e-4;
constexpr double kPaperPinn1D = 5.63e-6;
constexpr double kPaperPinn2D = 6.01e-3;
constexpr double kPaperFipSourceLoss = 1.87e-2;
constexpr double kPaperFipCoefficientLoss = 3.1563e-2;

Tree with(const Tree& base, std::initializer_list<std::pair<const char*, std::string>> values)
{
    Tree t = base;
    for (const auto& [path, value] : values)
        t.put(Tree::path_type(path, '.'), value);
    // Constituent runs pick their own ids.
    if (auto run = t.get_child_optional("run"))
        run->erase("experiment_id");
    return t;
}

BenchRow row_from(const RunReport& r, std::string resolution, std::optional<double> paper)
{
    BenchRow row;
    row.method = r.method;
    row.problem = r.problem;
    row.resolution = std::move(resolution);
    row.l2_relative = r.error.l2_relative;
    row.l_inf = r.error.l_inf;
    if (r.final_loss)
        row.final_loss = r.final_loss->total;
    if (r.hidden_error)
        row.hidden_l2_relative = r.hidden_error->l2_relative;
    row.paper_value = paper;
    row.ok = r.ok;
    row.message = r.message;
    return row;
}

template <class F>
BenchRow guarded(const std::string& method, const std::string& problem, F&& f)
{
    try {
        return f();
    } catch (const std::exception& e) {
        BenchRow row;
        row.method = method;
        row.problem = problem;
        row.ok = false;
        row.message = e.what();
        return row;
    }
}

BenchRow convergence_row(const Tree& base, const std::string& problem, const std::vector<int>& ns,
                         const fs::path& dir)
{
    BenchRow row;
    row.method = "fdm";
    row.problem = problem;
    std::vector<double> errors;
    for (int n : ns) {
        const auto s = resolve(with(base, {{"problem.id", problem}, {"fdm.n", std::to_string(n)}}), Command::SolveFdm);
        const auto r = run_solve_fdm(s, dir);
        errors.push_back(r.nodal_error->l2_relative);
        row.resolution += (row.resolution.empty() ? "" : ";") + std::to_string(n);
        row.ok = row.ok && r.ok;
        if (!r.ok)
            row.message = r.experiment_id + ": " + r.message;
        row.l2_relative = r.nodal_error->l2_relative;
        row.l_inf = r.nodal_error->l_inf;
    }
    row.order = convergence_order(ns, errors);
    return row;
}

void write_bench(const BenchReport& bench)
{
    {
        auto out = open_output(bench.directory / "bench.csv");
        out << "suite,method,problem,resolution,l2_relative,l_inf,final_loss,hidden_l2_relative,order,paper_value,ok,"
               "message\n";
        for (const auto& r : bench.rows)
            out << to_string(bench.suite) << "," << r.method << "," << r.problem << "," << csv_field(r.resolution)
                << "," << optional_field(r.l2_relative) << "," << optional_field(r.l_inf) << ","
                << optional_field(r.final_loss) << "," << optional_field(r.hidden_l2_relative) << ","
                << optional_field(r.order) << "," << optional_field(r.paper_value) << ","
                << (r.ok ? "true" : "false") << "," << csv_field(r.message) << "\n";
    }
    auto out = open_output(bench.directory / "summary.txt");
    auto show = [](const std::optional<double>& v) {
        if (!v)
            return std::string("-");
        std::array<char, 32> buf{};
        std::snprintf(buf.data(), buf.size(), "%.3e", *v);
        return std::string(buf.data());
    };
    std::array<char, 256> line{};
    std::snprintf(line.data(), line.size(), "%-6s %-28s %-16s %-11s %-11s %-11s %-11s %-8s %-11s %s\n", "method",
                  "problem", "resolution", "rel_l2", "final_loss", "hidden_l2", "paper", "order", "", "status");
    out << "suite " << to_string(bench.suite) << "\n" << line.data();
    for (const auto& r : bench.rows) {
        std::snprintf(line.data(), line.size(), "%-6s %-28s %-16s %-11s %-11s %-11s %-11s %-8s %-11s %s\n",
                      r.method.c_str(), r.problem.c_str(), r.resolution.c_str(), show(r.l2_relative).c_str(),
                      show(r.final_loss).c_str(), show(r.hidden_l2_relative).c_str(), show(r.paper_value).c_str(),
                      r.order ? format_double(std::round(*r.order * 1000) / 1000).c_str() : "-", "",
                      r.ok ? "ok" : ("FAILED: " + r.message).c_str());
        out << line.data();
    }
}

} // namespace

BenchReport run_bench(Suite suite, const Tree& base, const fs::path& outdir)
{
    check_keys(base);
    BenchReport bench;
    bench.suite = suite;
    bench.directory = prepare_directory(outdir, "bench-" + std::string(to_string(suite)));
    const fs::path dir = bench.directory;

    switch (suite) {
    case Suite::PaperForward: {
        const std::array<std::pair<const char*, double>, 2> fdm{{{"poisson1d", kPaperFdm1D}, {"poisson2d", kPaperFdm2D}}};
        for (const auto& [problem, paper] : fdm)
            bench.rows.push_back(guarded("fdm", problem, [&, problem = problem, paper = paper] {
                const auto s = resolve(with(base, {{"problem.id", problem}}), Command::SolveFdm);
                const auto r = run_solve_fdm(s, dir);
                const std::string res = s.problem.id == ProblemId::Poisson2D
                                            ? std::to_string(s.fdm.n) + "x" + std::to_string(s.fdm.n)
                                            : std::to_string(s.fdm.n);
                return row_from(r, res, paper);
            }));
        const std::array<std::pair<const char*, double>, 2> pinn{
            {{"poisson1d", kPaperPinn1D}, {"poisson2d", kPaperPinn2D}}};
        for (const auto& [problem, paper] : pinn)
            bench.rows.push_back(guarded("pinn", problem, [&, problem = problem, paper = paper] {
                const auto s = resolve(with(base, {{"problem.id", problem}}), Command::TrainPinn);
                const auto r = run_train_pinn(s, dir);
                return row_from(r, std::to_string(s.training.n_collocation) + " pts", paper);
            }));
        break;
    }
    case Suite::PaperFip: {
        const std::array<std::pair<const char*, double>, 2> modes{
            {{"recover-source", kPaperFipSourceLoss}, {"recover-coefficient", kPaperFipCoefficientLoss}}};
        for (const auto& [mode, paper] : modes)
            bench.rows.push_back(guarded("pinn", std::string("fip-") + mode, [&, mode = mode, paper = paper] {
                const auto s = resolve(with(base, {{"fip.mode", mode}}), Command::Fip);
                const auto r = run_fip(s, dir);
                return row_from(r, std::to_string(s.fip.n_obs) + " obs", paper);
            }));
        break;
    }
    case Suite::Convergence:
        bench.rows.push_back(guarded("fdm", "poisson1d", [&] {
            return convergence_row(base, "poisson1d", {64, 128, 256, 512}, dir);
        }));
        bench.rows.push_back(guarded("fdm", "poisson2d", [&] {
            return convergence_row(base, "poisson2d", {16, 32, 64}, dir);
        }));
        bench.rows.push_back(guarded("fdm", "fip", [&] {
            return convergence_row(base, "fip", {64, 128, 256, 512}, dir);
        }));
        break;
    }
    write_bench(bench);
    return bench;
}

} // namespace pinnfdm::app
