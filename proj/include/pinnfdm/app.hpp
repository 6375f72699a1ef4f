#pragma once

#include "pinnfdm/fdm.hpp"
#include "pinnfdm/metrics.hpp"
#include "pinnfdm/problems.hpp"
#include "pinnfdm/training.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pinnfdm::app {

namespace fs = std::filesystem;
using Tree = boost::property_tree::ptree;

enum class Command { SolveFdm, TrainPinn, Fip, Bench };

struct ProblemSettings {
    ProblemId id = ProblemId::Poisson1D;
    SourceMode source_mode = SourceMode::Manufactured;
    double b1 = 1.0;
    double w1 = 3.141592653589793;
    double length = 1.0;
};

struct FdmSettings {
    int n = 512; ///< cells (per axis in 2D)
    Method2D method = Method2D::SOR;
    FipMethod fip_method = FipMethod::Direct;
    double tol = kDefaultTol;
    int max_iter = kDefaultMaxIter;
    std::optional<double> omega;
};

struct FipSettings {
    FipMode mode = FipMode::RecoverSource;
    int n_obs = 20;
    int n_fdm = 1024;
    bool hidden_known = false;
};

/// Fully resolved configuration of one run.
struct Settings {
    ProblemSettings problem;
    FdmSettings fdm;
    std::vector<int> hidden{20, 20, 20};     ///< U network hidden layers
    std::vector<int> hidden_term{20, 20};    ///< FIP hidden-term network hidden layers
    TrainConfig training;
    FipSettings fip;
    std::string experiment_id;
};

/// Reads a sectioned key = value file ([problem], [fdm], [network],
/// [training], [fip], [run]).
Tree load_config(const fs::path& path);

/// Sets `section.key` from a "section.key=value" string.
void apply_override(Tree& tree, std::string_view assignment);

/// Applies defaults for `command` and `problem`, then the values in `tree`.
/// Unknown keys are rejected.
Settings resolve(const Tree& tree, Command command);

/// Inverse of resolve: every field, doubles at 17 significant digits.
Tree to_tree(const Settings& settings);
void write_config(const fs::path& path, const Settings& settings);

std::string default_experiment_id(const Settings& settings, Command command);

struct RunReport {
    std::string experiment_id;
    std::string method; ///< fdm | pinn
    std::string problem;
    ErrorSummary error;
    std::optional<ErrorSummary> nodal_error;  ///< FDM only: error at the grid nodes
    std::optional<ErrorSummary> hidden_error; ///< FIP only
    std::optional<LossReport> final_loss;     ///< PINN only
    long iterations = 0;
    double wall_time = 0.0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string message;
    fs::path directory;
    std::vector<std::string> artifacts;
};

RunReport run_solve_fdm(const Settings& settings, const fs::path& outdir);
RunReport run_train_pinn(const Settings& settings, const fs::path& outdir);
RunReport run_fip(const Settings& settings, const fs::path& outdir);

enum class Suite { PaperForward, PaperFip, Convergence };
Suite parse_suite(std::string_view text);
std::string_view to_string(Suite suite);

struct BenchRow {
    std::string method;
    std::string problem;
    std::string resolution;
    std::optional<double> l2_relative;
    std::optional<double> l_inf;
    std::optional<double> final_loss;
    std::optional<double> hidden_l2_relative;
    std::optional<double> order;
    std::optional<double> paper_value; ///< published error (forward) or final loss (FIP)
    bool ok = true;
    std::string message;
};

struct BenchReport {
    Suite suite = Suite::PaperForward;
    std::vector<BenchRow> rows;
    fs::path directory;

    bool ok() const;
};

/// Runs every row of `suite` with `base` as the shared configuration; each
/// constituent run gets its own subdirectory. Writes bench.csv and summary.txt.
BenchReport run_bench(Suite suite, const Tree& base, const fs::path& outdir);

/// Writes `report` as a one-row CSV with a header.
void write_report(const fs::path& path, const RunReport& report);

std::string format_double(double v);

} // namespace pinnfdm::app
