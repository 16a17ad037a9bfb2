#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path& work_dir()
{
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "ergochron_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Outcome cli(const std::string& args)
{
    const auto out = work_dir() / "stdout.txt";
    const auto err = work_dir() / "stderr.txt";
    const std::string cmd = std::string("ERGOCHRON_WORKERS=1 '") + ERGOCHRON_CLI + "' " + args +
                            " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    Outcome o;
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
}

// A 4x4 run that finishes in a few seconds.
const char* small =
    "--set lattice.extents=4,4 --set echo.tau=40 --set ensemble.size=6 "
    "--set lyapunov.T=1000 --set lyapunov.chains=2 --set lyapunov.max_lag=60 "
    "--set lyapunov.burn_in=5 --set fit.bootstrap=10";

}  // namespace

TEST_CASE("help exits cleanly")
{
    const auto o = cli("--help");
    CHECK(o.status == 0);
    CHECK(o.out.find("reproduce") != std::string::npos);
}

TEST_CASE("usage errors exit with status 2")
{
    auto o = cli("");
    CHECK(o.status == 2);
    CHECK(o.err.find("error\tusage\t") != std::string::npos);

    o = cli("echo --bogus-flag");
    CHECK(o.status == 2);
    CHECK(o.err.find("Usage") != std::string::npos);

    o = cli("reproduce fig9");
    CHECK(o.status == 2);

    o = cli("--workers 0 echo");
    CHECK(o.status == 2);

    o = cli("--config x.cfg reproduce table1");
    CHECK(o.status == 2);
}

TEST_CASE("a missing config file names the path")
{
    const auto o = cli("--config /nonexistent/ergochron.cfg echo");
    CHECK(o.status == 1);
    CHECK(o.err.find("error\tconfig\t") == 0);
    CHECK(o.err.find("/nonexistent/ergochron.cfg") != std::string::npos);
}

TEST_CASE("bad settings are reported as config errors")
{
    auto o = cli("--set nope.key=1 echo");
    CHECK(o.status == 1);
    CHECK(o.err.find("unknown key 'nope.key'") != std::string::npos);

    o = cli("--set ensemble.size echo");
    CHECK(o.status == 1);
    CHECK(o.err.find("key=value") != std::string::npos);

    o = cli("--set ensemble.size=0 echo");
    CHECK(o.status == 1);
    CHECK(o.err.find("ensemble.size") != std::string::npos);
}

TEST_CASE("echo then analyze on a small lattice")
{
    const auto run = work_dir() / "run";
    auto o = cli(std::string(small) + " --seed 5 --out '" + run.string() + "' echo");
    REQUIRE_MESSAGE(o.status == 0, o.err);
    CHECK(o.out.find("wrote 7 files") != std::string::npos);
    for (const char* f : {"run.cfg", "echo_series.csv", "gw_curves.csv", "fits.csv", "phi.csv",
                          "stretch_summary.csv", "summary.csv", "manifest.txt"})
        CHECK_MESSAGE(fs::exists(run / f), f);
    const std::string cfg = slurp(run / "run.cfg");
    CHECK(cfg.find("ensemble.master_seed = 5\n") != std::string::npos);
    CHECK(cfg.find("lattice.extents = 4,4\n") != std::string::npos);

    const std::string fits = slurp(run / "fits.csv");
    const std::string summary = slurp(run / "summary.csv");
    fs::remove(run / "fits.csv");
    o = cli("--out '" + run.string() + "' analyze");
    REQUIRE_MESSAGE(o.status == 0, o.err);
    CHECK(slurp(run / "fits.csv") == fits);
    CHECK(slurp(run / "summary.csv") == summary);

    // The stored run.cfg also works as a --config for re-analysis.
    o = cli("--config '" + (run / "run.cfg").string() + "' analyze");
    CHECK(o.status == 0);

    o = cli("--out '" + (work_dir() / "empty").string() + "' analyze");
    CHECK(o.status == 1);
    CHECK(o.err.find("run.cfg") != std::string::npos);
}

TEST_CASE("lyapunov subcommand writes the direct files")
{
    const auto run = work_dir() / "lyap";
    const auto o = cli(std::string(small) + " --out '" + run.string() + "' lyapunov");
    REQUIRE_MESSAGE(o.status == 0, o.err);
    CHECK(fs::exists(run / "phi.csv"));
    CHECK(fs::exists(run / "stretch_summary.csv"));
    CHECK_FALSE(fs::exists(run / "echo_series.csv"));
}

TEST_CASE("an unreachable energy shell reports the failing realization")
{
    const auto run = work_dir() / "shell";
    const auto o = cli(std::string(small) + " --set echo.energy_per_site=1e6 --out '" +
                       run.string() + "' echo");
    CHECK(o.status == 1);
    CHECK(o.err.find("error\trealization\trealization 0 (seed ") == 0);
}
