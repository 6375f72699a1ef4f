// pinnfdm: finite differences vs physics-informed networks on the Poisson and
// forward-inverse benchmark problems.

#include "pinnfdm/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace app = pinnfdm::app;

namespace {

void print_report(const app::RunReport& r)
{
    std::cout << r.experiment_id << ": l2_relative=" << app::format_double(r.error.l2_relative)
              << " l_inf=" << app::format_double(r.error.l_inf);
    if (r.nodal_error)
        std::cout << " nodal_l2_relative=" << app::format_double(r.nodal_error->l2_relative);
    if (r.hidden_error)
        std::cout << " hidden_l2_relative=" << app::format_double(r.hidden_error->l2_relative);
    if (r.final_loss)
        std::cout << " final_loss=" << app::format_double(r.final_loss->total);
    std::cout << " iterations=" << r.iterations << " wall_time=" << r.wall_time << "s"
              << (r.ok ? "" : " FAILED: " + r.message) << "\n"
              << "  -> " << r.directory.string() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"Finite differences and physics-informed neural networks for Poisson-type problems"};
    cli.require_subcommand(1);
    cli.fallthrough();

    std::string config_path;
    std::string outdir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> experiment_id;
    std::vector<std::string> overrides;
    cli.add_option("--config", config_path, "INI file with [problem] [fdm] [network] [training] [fip] [run] sections")
        ->check(CLI::ExistingFile);
    cli.add_option("--outdir", outdir, "Output root (default: $PINNFDM_OUTDIR or ./runs)");
    cli.add_option("--seed", seed, "Base seed");
    cli.add_option("--id", experiment_id, "Experiment id (output subdirectory name)");
    cli.add_option("--set", overrides, "Override a config value: section.key=value (repeatable)");

    auto* fdm = cli.add_subcommand("solve-fdm", "Solve a problem by finite differences");
    std::string fdm_problem;
    std::optional<int> fdm_n, fdm_max_iter;
    std::optional<std::string> fdm_method, source_mode_fdm;
    std::optional<double> fdm_tol, fdm_omega;
    fdm->add_option("problem", fdm_problem, "poisson1d | poisson2d | fip")->required();
    fdm->add_option("-n,--cells", fdm_n, "Cells (per axis in 2D)");
    fdm->add_option("--method", fdm_method, "2D: sor | gauss-seidel | direct; fip: direct | jacobi");
    fdm->add_option("--tol", fdm_tol, "Iterative stopping tolerance on the update max-norm");
    fdm->add_option("--max-iter", fdm_max_iter, "Iteration cap");
    fdm->add_option("--omega", fdm_omega, "SOR relaxation factor (default: optimal)");
    fdm->add_option("--source-mode", source_mode_fdm, "2D source: manufactured | paper");

    auto* pinn = cli.add_subcommand("train-pinn", "Train a PINN on a forward problem");
    std::string pinn_problem;
    std::optional<std::string> hidden, source_mode_pinn;
    std::optional<int> epochs, lbfgs_iters, n_collocation;
    pinn->add_option("problem", pinn_problem, "poisson1d | poisson2d")->required();
    pinn->add_option("--hidden", hidden, "Hidden layer widths, e.g. 20,20,20");
    pinn->add_option("--epochs", epochs, "Adam epochs");
    pinn->add_option("--lbfgs-iters", lbfgs_iters, "L-BFGS iteration cap");
    pinn->add_option("--collocation", n_collocation, "Collocation points per epoch");
    pinn->add_option("--source-mode", source_mode_pinn, "2D source: manufactured | paper");

    auto* fip = cli.add_subcommand("fip", "Forward-inverse problem: recover the source term or the coefficient");
    std::string fip_mode;
    std::optional<int> n_obs, fip_epochs, fip_lbfgs;
    std::optional<double> b1, w1, length;
    bool hidden_known = false;
    fip->add_option("mode", fip_mode, "recover-source | recover-coefficient")->required();
    fip->add_option("--n-obs", n_obs, "Number of observations");
    fip->add_option("--epochs", fip_epochs, "Adam epochs");
    fip->add_option("--lbfgs-iters", fip_lbfgs, "L-BFGS iteration cap");
    fip->add_option("--b1", b1, "Amplitude b1");
    fip->add_option("--w1", w1, "Frequency w1");
    fip->add_option("--length", length, "Domain length L");
    fip->add_flag("--hidden-known", hidden_known, "Substitute the true hidden term and train U alone");

    auto* bench = cli.add_subcommand("bench", "Run a benchmark suite");
    std::string suite;
    bench->add_option("suite", suite, "paper-forward | paper-fip | convergence")->required();

    CLI11_PARSE(cli, argc, argv);

    try {
        app::Tree tree = config_path.empty() ? app::Tree{} : app::load_config(config_path);
        auto set = [&](const std::string& key, const std::string& value) {
            app::apply_override(tree, key + "=" + value);
        };
        for (const auto& o : overrides)
            app::apply_override(tree, o);
        if (seed)
            set("run.seed", std::to_string(*seed));
        if (experiment_id)
            set("run.experiment_id", *experiment_id);

        if (outdir.empty()) {
            const char* env = std::getenv("PINNFDM_OUTDIR");
            outdir = env && *env ? env : "runs";
        }

        if (fdm->parsed()) {
            set("problem.id", fdm_problem);
            if (fdm_n)
                set("fdm.n", std::to_string(*fdm_n));
            if (fdm_method)
                set(fdm_problem == "fip" ? "fdm.fip_method" : "fdm.method", *fdm_method);
            if (fdm_tol)
                set("fdm.tol", app::format_double(*fdm_tol));
            if (fdm_max_iter)
                set("fdm.max_iter", std::to_string(*fdm_max_iter));
            if (fdm_omega)
                set("fdm.omega", app::format_double(*fdm_omega));
            if (source_mode_fdm)
                set("problem.source_mode", *source_mode_fdm);
            const auto report = app::run_solve_fdm(app::resolve(tree, app::Command::SolveFdm), outdir);
            print_report(report);
            return report.ok ? 0 : 1;
        }
        if (pinn->parsed()) {
            set("problem.id", pinn_problem);
            if (hidden)
                set("network.hidden", *hidden);
            if (epochs)
                set("training.adam_epochs", std::to_string(*epochs));
            if (lbfgs_iters)
                set("training.lbfgs_max_iters", std::to_string(*lbfgs_iters));
            if (n_collocation)
                set("training.n_collocation", std::to_string(*n_collocation));
            if (source_mode_pinn)
                set("problem.source_mode", *source_mode_pinn);
            const auto report = app::run_train_pinn(app::resolve(tree, app::Command::TrainPinn), outdir);
            print_report(report);
            return report.ok ? 0 : 1;
        }
        if (fip->parsed()) {
            set("fip.mode", fip_mode);
            if (n_obs)
                set("fip.n_obs", std::to_string(*n_obs));
            if (fip_epochs)
                set("training.adam_epochs", std::to_string(*fip_epochs));
            if (fip_lbfgs)
                set("training.lbfgs_max_iters", std::to_string(*fip_lbfgs));
            if (b1)
                set("problem.b1", app::format_double(*b1));
            if (w1)
                set("problem.w1", app::format_double(*w1));
            if (length)
                set("problem.length", app::format_double(*length));
            if (hidden_known)
                set("fip.hidden_known", "true");
            const auto report = app::run_fip(app::resolve(tree, app::Command::Fip), outdir);
            print_report(report);
            return report.ok ? 0 : 1;
        }
        if (bench->parsed()) {
            const auto result = app::run_bench(app::parse_suite(suite), tree, outdir);
            std::ifstream summary(result.directory / "summary.txt");
            std::cout << summary.rdbuf() << "  -> " << result.directory.string() << "\n";
            return result.ok() ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
