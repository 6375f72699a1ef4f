#include "pinnfdm/app.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

using namespace pinnfdm;
using namespace pinnfdm::app;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("pinnfdm_app_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path& p)
{
    std::vector<std::string> out;
    std::ifstream in(p);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

// Field count of one CSV line, honouring double-quoted fields.
std::size_t fields(const std::string& line)
{
    std::size_t n = 1;
    bool quoted = false;
    for (char c : line) {
        if (c == '"')
            quoted = !quoted;
        else if (c == ',' && !quoted)
            ++n;
    }
    return n;
}

Tree tree_of(std::initializer_list<const char*> assignments)
{
    Tree t;
    for (const char* a : assignments)
        apply_override(t, a);
    return t;
}

int run_cli(const std::string& args, const fs::path& outdir_env)
{
    const std::string cmd = "PINNFDM_OUTDIR='" + outdir_env.string() + "' '" + PINNFDM_CLI_PATH + "' " + args +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("defaults per command and problem")
{
    const auto fdm1 = resolve(Tree{}, Command::SolveFdm);
    CHECK(fdm1.problem.id == ProblemId::Poisson1D);
    CHECK(fdm1.fdm.n == 512);
    CHECK(default_experiment_id(fdm1, Command::SolveFdm) == "fdm-poisson1d-n512");

    const auto fdm2 = resolve(tree_of({"problem.id=poisson2d"}), Command::SolveFdm);
    CHECK(fdm2.fdm.n == 128);
    CHECK(fdm2.fdm.method == Method2D::SOR);

    const auto pinn1 = resolve(Tree{}, Command::TrainPinn);
    CHECK(pinn1.training.adam_epochs == 5000);
    CHECK(pinn1.training.lbfgs_max_iters == 500);
    CHECK(pinn1.training.seed == 1234u);
    CHECK(pinn1.hidden == std::vector<int>{20, 20, 20});
    CHECK(default_experiment_id(pinn1, Command::TrainPinn) == "pinn-poisson1d-s1234");

    const auto pinn2 = resolve(tree_of({"problem.id=poisson2d"}), Command::TrainPinn);
    CHECK(pinn2.training.lbfgs_max_iters == TrainConfig::forward_2d_defaults().lbfgs_max_iters);

    const auto fip = resolve(tree_of({"fip.mode=recover-coefficient", "run.seed=7"}), Command::Fip);
    CHECK(fip.problem.id == ProblemId::Fip);
    CHECK(fip.training.adam_epochs == 40000);
    CHECK(fip.training.lbfgs_max_iters == 0);
    CHECK(fip.fip.n_obs == 20);
    CHECK(fip.hidden_term == std::vector<int>{20, 20});
    CHECK(default_experiment_id(fip, Command::Fip) == "fip-recover-coefficient-s7");
}

TEST_CASE("overrides and rejection of bad configuration")
{
    const auto s = resolve(tree_of({"training.adam_epochs=12", "network.hidden=8,4", "training.resample_each_epoch=false",
                                    "fdm.omega=1.5", "run.experiment_id=mine"}),
                           Command::TrainPinn);
    CHECK(s.training.adam_epochs == 12);
    CHECK(s.hidden == std::vector<int>{8, 4});
    CHECK_FALSE(s.training.resample_each_epoch);
    CHECK(s.fdm.omega == 1.5);
    CHECK(s.experiment_id == "mine");

    CHECK_THROWS_AS(resolve(tree_of({"training.epochs=5"}), Command::TrainPinn), std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"solver.n=5"}), Command::SolveFdm), std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"fdm.n=12x"}), Command::SolveFdm), std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"run.seed=-3"}), Command::TrainPinn), std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"training.resample_each_epoch=maybe"}), Command::TrainPinn),
                    std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"training.adam_beta1=0.9999"}), Command::TrainPinn), std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"problem.id=fip"}), Command::TrainPinn), std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"problem.id=poisson3d"}), Command::SolveFdm), std::invalid_argument);
    CHECK_THROWS_AS(resolve(tree_of({"fip.n_obs=1"}), Command::Fip), std::invalid_argument);
    Tree t;
    CHECK_THROWS_AS(apply_override(t, "no-equals-sign"), std::invalid_argument);
}

TEST_CASE("settings survive a round trip through the config tree")
{
    for (const auto cmd : {Command::SolveFdm, Command::TrainPinn, Command::Fip}) {
        auto s = resolve(tree_of({"problem.b1=0.3", "training.adam_lr=0.1", "training.w_bc=2.5"}), cmd);
        s.experiment_id = "x";
        const auto back = resolve(to_tree(s), cmd);
        std::ostringstream a, b;
        boost::property_tree::write_ini(a, to_tree(s));
        boost::property_tree::write_ini(b, to_tree(back));
        CHECK(a.str() == b.str());
        CHECK(back.training.adam_lr == 0.1);
        CHECK(back.problem.b1 == 0.3);
        CHECK(back.training.weights.bc == 2.5);
    }
}

TEST_CASE("solve-fdm artifacts and rerun from the written config")
{
    const auto out = scratch("fdm");
    const auto s = resolve(tree_of({"fdm.n=64"}), Command::SolveFdm);
    const auto r = run_solve_fdm(s, out);
    REQUIRE(r.ok);
    CHECK(r.directory == out / "fdm-poisson1d-n64");
    for (const char* f : {"config.ini", "report.csv", "timing.csv", "solution.csv"})
        CHECK(fs::exists(r.directory / f));
    REQUIRE(r.nodal_error.has_value());
    CHECK(r.nodal_error->l2_relative < 1e-3);
    CHECK(r.error.n_points == 513);

    const auto report = lines(r.directory / "report.csv");
    REQUIRE(report.size() == 2);
    CHECK(fields(report[0]) == 17);
    CHECK(fields(report[1]) == 17);
    CHECK(report[0].rfind("experiment_id,method,problem,l2_relative", 0) == 0);
    const auto solution = lines(r.directory / "solution.csv");
    CHECK(solution.front() == "x,u,exact");
    CHECK(solution.size() == 66u);

    const auto again = scratch("fdm_again");
    const auto s2 = resolve(load_config(r.directory / "config.ini"), Command::SolveFdm);
    const auto r2 = run_solve_fdm(s2, again);
    for (const char* f : {"config.ini", "report.csv", "solution.csv"})
        CHECK(slurp(r.directory / f) == slurp(r2.directory / f));

    const auto fip = run_solve_fdm(resolve(tree_of({"problem.id=fip", "fdm.n=128"}), Command::SolveFdm), out);
    CHECK(fip.ok);
    CHECK(lines(fip.directory / "solution.csv").front() == "x,u,reference");
    CHECK(fip.nodal_error->l2_relative < 1e-3);
}

TEST_CASE("short PINN runs are byte-identical")
{
    const auto tree = tree_of({"training.adam_epochs=30", "training.lbfgs_max_iters=10", "training.n_collocation=16",
                               "network.hidden=6,6", "training.checkpoint_every=20"});
    const auto s = resolve(tree, Command::TrainPinn);
    const auto a = run_train_pinn(s, scratch("pinn_a"));
    const auto b = run_train_pinn(s, scratch("pinn_b"));
    REQUIRE(a.ok);
    for (const char* f : {"config.ini", "report.csv", "loss_history.csv", "checkpoint.csv", "solution.csv"})
        CHECK(slurp(a.directory / f) == slurp(b.directory / f));
    CHECK(fs::exists(a.directory / "checkpoints" / "checkpoint_20.csv"));

    const auto history = lines(a.directory / "loss_history.csv");
    CHECK(history.front() == "epoch,l_pde,l_bc,l_data,total");
    CHECK(history.size() == static_cast<std::size_t>(1 + a.iterations));
    for (const auto& l : history)
        CHECK(fields(l) == 5);
    CHECK(lines(a.directory / "solution.csv").size() == 514u);
    CHECK(lines(a.directory / "timing.csv").size() == 2u);
}

TEST_CASE("short FIP run writes its artifacts; invalid runs leave nothing")
{
    const auto out = scratch("fip");
    const auto s = resolve(tree_of({"training.adam_epochs=20", "fip.n_obs=5", "fip.n_fdm=256"}), Command::Fip);
    const auto r = run_fip(s, out);
    REQUIRE(r.ok);
    for (const char* f : {"loss_history.csv", "checkpoint.csv", "hidden_checkpoint.csv", "solution.csv", "hidden.csv",
                          "observations.csv"})
        CHECK(fs::exists(r.directory / f));
    CHECK(lines(r.directory / "observations.csv").size() == 6u);
    CHECK(lines(r.directory / "hidden.csv").front() == "x,q_pinn,q_true");
    CHECK(r.hidden_error.has_value());
    CHECK(r.final_loss.has_value());

    auto bad = s;
    bad.fip.n_obs = 0;
    bad.experiment_id = "rejected";
    CHECK_THROWS(run_fip(bad, out));
    CHECK_FALSE(fs::exists(out / "rejected"));
}

TEST_CASE("convergence bench recovers second order")
{
    const auto out = scratch("bench");
    const auto bench = run_bench(Suite::Convergence, Tree{}, out);
    CHECK(bench.ok());
    REQUIRE(bench.rows.size() == 3u);
    for (const auto& row : bench.rows) {
        REQUIRE(row.order.has_value());
        CHECK(*row.order == doctest::Approx(2.0).epsilon(0.1));
    }
    const auto csv = lines(bench.directory / "bench.csv");
    REQUIRE(csv.size() == 4u);
    for (const auto& l : csv)
        CHECK(fields(l) == 12);
    CHECK(fs::exists(bench.directory / "summary.txt"));
    CHECK(parse_suite("paper-fip") == Suite::PaperFip);
    CHECK_THROWS_AS(parse_suite("everything"), std::invalid_argument);
}

TEST_CASE("paper-forward bench with a tiny configuration")
{
    const auto out = scratch("bench_forward");
    const auto bench = run_bench(Suite::PaperForward,
                                 tree_of({"training.adam_epochs=5", "training.lbfgs_max_iters=2",
                                          "training.n_collocation=8", "network.hidden=4", "fdm.n=32"}),
                                 out);
    REQUIRE(bench.rows.size() == 4u);
    CHECK(bench.rows[0].method == "fdm");
    CHECK(bench.rows[2].method == "pinn");
    CHECK(bench.rows[3].problem == "poisson2d");
    for (const auto& row : bench.rows) {
        CHECK(row.l2_relative.has_value());
        CHECK(row.paper_value.has_value());
    }
}

TEST_CASE("command line exit codes")
{
    const auto out = scratch("cli");
    CHECK(run_cli("solve-fdm poisson1d -n 32", out) == 0);
    CHECK(fs::exists(out / "fdm-poisson1d-n32" / "report.csv"));
    CHECK(run_cli("solve-fdm poisson1d -n 1", out) == 2);
    CHECK(run_cli("solve-fdm poisson4d", out) == 2);
    CHECK(run_cli("fip recover-source --n-obs 0", out) == 2);
    CHECK(run_cli("train-pinn poisson1d --set training.bogus=1", out) == 2);
    CHECK(run_cli("solve-fdm poisson2d -n 8 --method jacobi-ish", out) == 2);
    CHECK(run_cli("solve-fdm poisson2d -n 16 --method gs --max-iter 3", out) == 1);
    CHECK(run_cli("", out) != 0);
    CHECK(fs::exists(out / "fdm-poisson2d-n16" / "report.csv"));
    CHECK_FALSE(fs::exists(out / "fdm-poisson1d-n1"));
}
