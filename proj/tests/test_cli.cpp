#include "phfem/phfem.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using phfem::Json;
using phfem::read_text;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("phfem_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CliResult run(const std::string& args) {
    const fs::path dir = scratch("run");
    const std::string cmd = std::string(PHFEM_CLI_PATH) + " " + args + " > " + (dir / "out").string() + " 2> " +
                            (dir / "err").string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(dir / "out");
    r.err = read_text(dir / "err");
    fs::remove_all(dir);
    return r;
}

std::string demo(const std::string& name) { return (fs::path(PHFEM_SOURCE_DIR) / "demos" / name).string(); }

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Cli, BuildWritesAModelDirectory) {
    const fs::path out = scratch("build");
    const CliResult r = run("build --config " + demo("mixed_2x1.json") + " --out " + out.string());
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"J.mtx", "B.mtx", "C.mtx", "D.mtx", "Q.mtx", "P_fq.mtx", "S_q_hat.mtx", "M_q.mtx", "nodes.csv",
                          "hodge.csv", "structure.json", "manifest.json"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    const Json manifest = Json::parse(read_text(out / "manifest.json"));
    EXPECT_EQ(manifest["tool_version"], phfem::kToolVersion);
    EXPECT_EQ(manifest["dims"]["inputs"], 7);
    fs::remove_all(out);
}

TEST(Cli, RepeatedBuildsAreByteIdentical) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ASSERT_EQ(run("build --config " + demo("square_corner.json") + " --out " + a.string()).code, 0);
    ASSERT_EQ(run("build --config " + demo("square_corner.json") + " --out " + b.string()).code, 0);
    int compared = 0;
    for (const auto& e : fs::directory_iterator(a))
        if (e.path().extension() == ".mtx") {
            EXPECT_EQ(read_text(e.path()), read_text(b / e.path().filename())) << e.path().filename();
            ++compared;
        }
    EXPECT_GE(compared, 20);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, SimulateReportsEnergyBalance) {
    const fs::path model = scratch("sim_model"), out = scratch("sim_out");
    ASSERT_EQ(run("build --config " + demo("line_upwind.json") + " --out " + model.string()).code, 0);
    const CliResult r = run("simulate --model " + model.string() + " --config " + demo("sim_line_pulse.json") + " --out " + out.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string energy = read_text(out / "energy.csv");
    EXPECT_EQ(energy.substr(0, energy.find('\n')), "t,H,supplied,defect");
    EXPECT_EQ(count_lines(energy), 2002);
    EXPECT_TRUE(fs::exists(out / "outputs.csv"));
    EXPECT_TRUE(fs::exists(out / "snapshot_2.csv"));
    const Json snaps = Json::parse(read_text(out / "snapshots.json"));
    EXPECT_EQ(snaps.size(), 3u);
    fs::remove_all(model);
    fs::remove_all(out);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("codes");
    phfem::write_text(dir / "broken.json", "{\"mesh\": {\"n\": 2,, }");
    const CliResult malformed = run("build --config " + (dir / "broken.json").string() + " --out " + (dir / "m").string());
    EXPECT_EQ(malformed.code, 2);
    EXPECT_NE(malformed.err.find("byte"), std::string::npos) << malformed.err;
    const CliResult missing = run("simulate --model " + (dir / "nothing").string() + " --config " + demo("sim_free.json") +
                            " --out " + (dir / "s").string());
    EXPECT_EQ(missing.code, 3);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("eigs --method other").code, 2);
    EXPECT_EQ(run("eigs --n 10 --alpha 1.0").code, 2);
    EXPECT_EQ(run("build --config " + (dir / "absent.json").string() + " --out " + (dir / "x").string()).code, 2);
    fs::remove_all(dir);
}

TEST(Cli, SpectraAndTables) {
    const CliResult eigs = run("eigs --n 20 --alpha 0");
    ASSERT_EQ(eigs.code, 0) << eigs.err;
    EXPECT_EQ(count_lines(eigs.out), 21);
    EXPECT_NE(eigs.out.find("\n1,1.5321"), std::string::npos) << eigs.out.substr(0, 80);
    const CliResult comparison = run("eigs --n 20 --method golo --alpha-prime 0.0833333333333333");
    ASSERT_EQ(comparison.code, 0) << comparison.err;
    const std::string first = comparison.out.substr(comparison.out.find('\n') + 1);
    EXPECT_NEAR(std::stod(first.substr(first.find(',') + 1)), 1.5387, 5e-4);
    const CliResult t3 = run("table3");
    ASSERT_EQ(t3.code, 0);
    EXPECT_EQ(count_lines(t3.out), 10);
    EXPECT_EQ(t3.out.substr(0, t3.out.find('\n')),
              "k,alpha=-1/12;N=20,alpha=-1/12;N=40,alpha=-1/12;N=80,alpha=0;N=20,alpha=0;N=40,alpha=0;N=80,"
              "alpha=1/6;N=20,alpha=1/6;N=40,alpha=1/6;N=80,exact");
    const CliResult conv = run("convergence --alpha 0 --n 20 40 80 --k 1");
    ASSERT_EQ(conv.code, 0) << conv.err;
    EXPECT_NE(conv.out.find("parameter,k,slope"), std::string::npos);
}

TEST(Cli, SmallWaveExperiment) {
    const fs::path out = scratch("wave");
    const CliResult r = run("wave2d --n 10 --t-end 4 --out " + out.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out / "snapshot_0.csv"));
    EXPECT_TRUE(fs::exists(out / "energy.csv"));
    const Json manifest = Json::parse(read_text(out / "manifest.json"));
    EXPECT_GT(manifest["front_radius"].get<double>(), 0.0);
    EXPECT_EQ(run("wave2d --n 10 --m 12 --out " + out.string()).code, 2);
    fs::remove_all(out);
}
