#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nhrod/cli.hpp"
#include "test_support.hpp"

using namespace nhrod;
using namespace nhrod::sim;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("nhrod_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

RunConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string write_file(const std::string& path, const std::string& text)
{
    std::ofstream(path) << text;
    return path;
}

std::string usage_message(const std::string& text)
{
    try {
        parse(text);
    } catch (const usage_error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(ParseConfig, AllKeys)
{
    const auto cfg = parse("# comment\n"
                           "rho = 2\nalpha = 0.5\nbeta = 0.3\nbend_k = 0.1\nradius = 0.25\nlength = 3\n"
                           "n_nodes = 20\nbc = free\ndt = 0.001\nt_end = 1.5\npreset = straight_rest\n"
                           "constrained = false\n\ndiag_path = d.csv\nsnap_path = s.csv\nsnap_every = 10\n");
    EXPECT_EQ(cfg.params.rho, 2.0);
    EXPECT_EQ(cfg.params.alpha, 0.5);
    EXPECT_EQ(cfg.params.beta, 0.3);
    EXPECT_EQ(cfg.params.bend_k, 0.1);
    EXPECT_EQ(cfg.params.radius, 0.25);
    EXPECT_EQ(cfg.params.length, 3.0);
    EXPECT_EQ(cfg.n_nodes, 20u);
    EXPECT_EQ(cfg.bc, BoundaryCondition::Free);
    EXPECT_EQ(cfg.time_step(), 0.001);
    EXPECT_EQ(cfg.t_end, 1.5);
    EXPECT_EQ(cfg.preset, Preset::StraightRest);
    EXPECT_FALSE(cfg.constrained);
    EXPECT_EQ(cfg.diag_path, "d.csv");
    EXPECT_EQ(cfg.snap_path, "s.csv");
    EXPECT_EQ(cfg.snap_every, 10);
    EXPECT_EQ(cfg.step_count(), 1500);
}

TEST(ParseConfig, DefaultsSelectPaperPreset)
{
    const auto cfg = parse("t_end = 150\n");
    EXPECT_EQ(cfg.preset, Preset::Paper);
    EXPECT_EQ(cfg.n_nodes, 32u);
    EXPECT_TRUE(cfg.constrained);
    const double k = 4.0 / 31;
    EXPECT_DOUBLE_EQ(cfg.time_step(), k * k / 8);
    EXPECT_EQ(cfg.params.radius, 1.0);
    EXPECT_EQ(cfg.params.bend_k, 0.7);
}

TEST(ParseConfig, ErrorsNameLineAndField)
{
    EXPECT_NE(usage_message("t_end = 1\nrho = abc\n").find("line 2"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nrho = abc\n").find("'rho'"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nfoo = 2\n").find("unknown field 'foo'"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nt_end = 2\n").find("repeated"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\ndt = 0.1\ndt_factor = 0.2\n").find("either"), std::string::npos);
    EXPECT_NE(usage_message("rho = 1\n").find("t_end"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nbc = closed\n").find("free or periodic"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nconstrained = yes\n").find("true or false"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\npreset = custom\n").find("initial_file"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nbc = periodic\n").find("bc = free"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nn_nodes = 3\n").find(">= 5"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nsnap_every = 0\n").find(">= 1"), std::string::npos);
    EXPECT_NE(usage_message("t_end = -1\n").find("positive"), std::string::npos);
    EXPECT_NE(usage_message("t_end = 1\nrho = 0\n").find("rho"), std::string::npos);
    EXPECT_NE(usage_message("t_end 1\n").find("line 1"), std::string::npos);
}

TEST(InitialFile, ReadsCustomData)
{
    TempDir dir;
    std::string text = "x,y,theta,vx,vy,vtheta\n";
    for (int i = 0; i < 6; ++i) text += std::to_string(i) + ",0.5,0.1,0,0," + std::to_string(0.01 * i) + "\n";
    const auto path = write_file(dir.file("init.csv"), text);
    auto cfg = parse("t_end = 0.01\nn_nodes = 6\nlength = 5\npreset = custom\ninitial_file = " + path + "\n");
    const auto d = preset_initial_data(cfg);
    EXPECT_EQ(d.x0[3], 3.0);
    EXPECT_EQ(d.y0[2], 0.5);
    EXPECT_EQ(d.vtheta0[5], 0.05);

    cfg.n_nodes = 7;
    EXPECT_THROW(preset_initial_data(cfg), usage_error);
    write_file(path, "x,y\n1,2\n");
    cfg.n_nodes = 6;
    EXPECT_THROW(preset_initial_data(cfg), usage_error);
}

TEST(Run, StraightRestIsStationaryUnderBothSteppers)
{
    for (const char* constrained : {"true", "false"}) {
        const auto cfg = parse(std::string("t_end = 0.2\npreset = straight_rest\nconstrained = ") + constrained + "\n");
        std::vector<DiagnosticsRecord> rows;
        run(cfg, [&](const DiagnosticsRecord& r, const StatePair&) { rows.push_back(r); });
        ASSERT_EQ(rows.size(), std::size_t(cfg.step_count() + 1));
        for (const auto& r : rows) {
            EXPECT_NEAR(r.energy, rows.front().energy, 1e-20);
            EXPECT_EQ(r.px, rows.front().px);
            EXPECT_EQ(r.jz, rows.front().jz);
            EXPECT_EQ(r.ptheta, rows.front().ptheta);
            EXPECT_EQ(r.stretch_max, rows.front().stretch_max);
            EXPECT_EQ(r.c2_max, 0.0);
        }
    }
}

TEST(Run, FilesHaveDocumentedLayoutAndCounts)
{
    TempDir dir;
    auto cfg = parse("t_end = 0.1\nsnap_every = 5\n");
    cfg.diag_path = dir.file("diag.csv");
    cfg.snap_path = dir.file("snap.csv");
    const auto result = run_to_files(cfg);

    const long steps = cfg.step_count();
    EXPECT_EQ(steps, long(std::ceil(0.1 / cfg.time_step())));
    EXPECT_EQ(result.steps, steps);

    const auto diag = lines_of(slurp(cfg.diag_path));
    ASSERT_EQ(diag.size(), std::size_t(steps + 2));
    EXPECT_EQ(diag[0], "step,t,energy,px,py,ptheta,jz,c1_max,c2_max,stretch_min,stretch_max");
    EXPECT_EQ(diag[1].substr(0, 4), "0,0,");
    // 17 significant digits
    const auto energy_field = diag[1].substr(4, diag[1].find(',', 4) - 4);
    EXPECT_GE(energy_field.size(), 17u);

    const auto snap = lines_of(slurp(cfg.snap_path));
    const long blocks = steps / cfg.snap_every + 1;
    const std::size_t block_lines = 3 + cfg.n_nodes;
    ASSERT_EQ(snap.size(), std::size_t(blocks) * block_lines + std::size_t(blocks - 1));
    EXPECT_EQ(snap[0], "step,t");
    EXPECT_EQ(snap[2], "i,s,x,y,theta");
    EXPECT_EQ(snap[block_lines], "");
    EXPECT_EQ(snap[block_lines + 1], "step,t");
    EXPECT_EQ(snap[block_lines + 2].substr(0, 2), "5,");
}

TEST(Run, ConstraintsHoldOnPaperPreset)
{
    const auto cfg = parse("t_end = 1\n");
    double worst = 0;
    run(cfg, [&](const DiagnosticsRecord& r, const StatePair&) { worst = std::max({worst, r.c1_max, r.c2_max}); });
    EXPECT_LE(worst, 1e-10);
}

TEST(Run, Reproducible)
{
    TempDir dir;
    auto cfg = parse("t_end = 0.3\nsnap_every = 7\n");
    cfg.diag_path = dir.file("a.csv");
    cfg.snap_path = dir.file("as.csv");
    run_to_files(cfg);
    cfg.diag_path = dir.file("b.csv");
    cfg.snap_path = dir.file("bs.csv");
    run_to_files(cfg);
    EXPECT_EQ(slurp(dir.file("a.csv")), slurp(dir.file("b.csv")));
    EXPECT_EQ(slurp(dir.file("as.csv")), slurp(dir.file("bs.csv")));
}

TEST(Run, UnstableStepAbortsWithStepAndField)
{
    std::ostringstream warnings;
    const auto cfg = parse("t_end = 500\nn_nodes = 16\ndt = 0.2\n");
    try {
        run(cfg, {}, &warnings);
        FAIL() << "expected numerical_abort";
    } catch (const numerical_abort& e) {
        EXPECT_GT(e.step(), 0);
        EXPECT_NE(std::string(e.what()).find("step " + std::to_string(e.step())), std::string::npos);
        EXPECT_FALSE(e.field().empty());
    }
    EXPECT_NE(warnings.str().find("stability"), std::string::npos);
}

TEST(Run, ThetaWaveErrorIsSecondOrder)
{
    auto error_for = [](int n) {
        const auto cfg = parse("t_end = 2\npreset = theta_wave\nradius = 0\nn_nodes = " + std::to_string(n) + "\n");
        const auto result = run(cfg);
        const auto grid = cfg.grid();
        const double t = double(result.steps) * cfg.time_step();
        double e = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            e = std::max(e, std::abs(result.final_state.prev.theta[i] -
                                     theta_wave_exact(grid.position(i), t, cfg.params)));
        return e;
    };
    const double ratio = error_for(32) / error_for(64);
    EXPECT_GT(ratio, 3.4);
    EXPECT_LT(ratio, 4.8);
}

TEST(Convergence, ObservedOrderIsTwo)
{
    const auto cfg = parse("t_end = 2\npreset = theta_wave\nradius = 0\n");
    const auto rows = convergence(cfg, {17, 33, 65});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_FALSE(rows[0].order);
    for (std::size_t r = 1; r < 3; ++r) {
        ASSERT_TRUE(rows[r].order);
        EXPECT_NEAR(*rows[r].order, 2.0, 0.3);
        EXPECT_NEAR(rows[r].h, rows[r - 1].h / 4, 1e-15);
    }
}

TEST(Convergence, SingleLevelAndDegenerateBeam)
{
    const auto one = convergence(parse("t_end = 1\npreset = theta_wave\nradius = 0\n"), {17});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_FALSE(one[0].order);

    const auto beamless = convergence(parse("t_end = 2\npreset = theta_wave\nbend_k = 0\nconstrained = false\n"),
                                      {17, 33, 65});
    EXPECT_NEAR(*beamless.back().order, 2.0, 0.3);
}

TEST(Convergence, RequiresAnalyticPreset)
{
    EXPECT_THROW(convergence(parse("t_end = 1\n"), {17, 33}), usage_error);
    EXPECT_THROW(convergence(parse("t_end = 1\npreset = theta_wave\n"), {17, 33}), usage_error);
}

TEST(Cli, ExitCodes)
{
    TempDir dir;
    std::ostringstream out, err;
    using nhrod::cli::run_cli;

    EXPECT_EQ(run_cli({}, out, err), 1);
    EXPECT_EQ(run_cli({"bogus"}, out, err), 1);
    EXPECT_EQ(run_cli({"run", dir.file("missing.cfg")}, out, err), 1);
    EXPECT_EQ(run_cli({"run", write_file(dir.file("bad.cfg"), "t_end = 1\nrho = x\n")}, out, err), 1);
    EXPECT_NE(err.str().find("line 2"), std::string::npos);

    const auto good = write_file(dir.file("good.cfg"), "t_end = 0.05\ndiag_path = " + dir.file("d.csv") +
                                                           "\nsnap_path = " + dir.file("s.csv") + "\n");
    EXPECT_EQ(run_cli({"run", good}, out, err), 0);
    EXPECT_TRUE(fs::exists(dir.file("d.csv")));
    EXPECT_TRUE(fs::exists(dir.file("s.csv")));

    const auto unstable = write_file(dir.file("unstable.cfg"), "t_end = 500\nn_nodes = 16\ndt = 0.2\n");
    EXPECT_EQ(run_cli({"run", unstable}, out, err), 2);

    const auto wave = write_file(dir.file("wave.cfg"), "t_end = 1\npreset = theta_wave\nradius = 0\n");
    std::ostringstream table;
    EXPECT_EQ(run_cli({"converge", wave, "--levels", "17,33"}, table, err), 0);
    const auto rows = lines_of(table.str());
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "n_nodes,h,error,order");
    EXPECT_EQ(rows[1].back(), ',');
    EXPECT_EQ(run_cli({"converge", wave, "--levels", "17,x"}, out, err), 1);
    EXPECT_EQ(run_cli({"converge", good, "--levels", "17,33"}, out, err), 1);
}
