#include "flowspectra/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fsys = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fsys::temp_directory_path() / (std::string("flowspectra_cli_") + info->name());
        fsys::remove_all(dir_);
        fsys::create_directories(dir_);
    }

    fsys::path path(const std::string& name) const { return dir_ / name; }

    fsys::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    int run(const std::string& args, std::string* stdout_text = nullptr) const
    {
        const auto out = path("stdout.txt");
        const std::string cmd = "FLOWSPECTRA_LOG=error \"" FLOWSPECTRA_CLI "\" " + args + " > \"" +
                                out.string() + "\" 2> \"" + path("stderr.txt").string() + "\"";
        const int status = std::system(cmd.c_str());
        if (stdout_text) {
            *stdout_text = slurp(out);
        }
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static std::string slurp(const fsys::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fsys::path dir_;
};

std::string q(const fsys::path& p)
{
    return "\"" + p.string() + "\"";
}

const char* kCircle = "[geometry]\ntype = polygon\nvertices = 64\n[flow]\nt_end = 0.1\n"
                      "[run]\ncadence = 5\noutput = out\n";

} // namespace

TEST_F(Cli, HelpAndUsage)
{
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("evolve"), 1);
    EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(Cli, EvolveWritesOutputs)
{
    const auto cfg = write("circle.ini", kCircle);
    ASSERT_EQ(run("evolve " + q(cfg)), 0);
    EXPECT_TRUE(fsys::exists(path("out/trace.csv")));
    EXPECT_TRUE(fsys::exists(path("out/eigenfunction.csv")));
    const auto summary = flowspectra::read_json(path("out/summary.json").string());
    EXPECT_EQ(summary["law"], "mcf");
    EXPECT_EQ(summary["truncated"], false);
    EXPECT_NEAR(summary["lambda_final"].get<double>(), 1.0 / 0.8, 5e-3);
    bool saw_tt1 = false;
    for (const auto& c : summary["checks"]) {
        saw_tt1 |= c["theorem"] == "tt1" && c["passed"] == true;
    }
    EXPECT_TRUE(saw_tt1);
}

TEST_F(Cli, EvolveIsByteDeterministic)
{
    const auto cfg = write("circle.ini", kCircle);
    ASSERT_EQ(run("evolve " + q(cfg)), 0);
    const auto first = slurp(path("out/trace.csv"));
    ASSERT_EQ(run("evolve " + q(cfg)), 0);
    EXPECT_EQ(first, slurp(path("out/trace.csv")));
    EXPECT_FALSE(first.empty());
}

TEST_F(Cli, SingularRunExitsTruncated)
{
    const auto cfg = write("sphere.ini", "[geometry]\ntype = icosphere\nsubdivision = 2\n"
                                         "[flow]\nt_end = 0.3\n[run]\ncadence = 20\noutput = out\n");
    EXPECT_EQ(run("evolve " + q(cfg)), 2);
    const auto summary = flowspectra::read_json(path("out/summary.json").string());
    EXPECT_EQ(summary["truncated"], true);
    EXPECT_LT(summary["t_final"].get<double>(), 0.3);
    EXPECT_FALSE(summary["reason"].get<std::string>().empty());
}

TEST_F(Cli, BadConfigExitsOne)
{
    const auto cfg = write("bad.ini", "[geometry]\ntype = polygon\n[flow]\nt_end = 0.1\ncfl = -1\n");
    EXPECT_EQ(run("evolve " + q(cfg)), 1);
    EXPECT_NE(slurp(path("stderr.txt")).find("bad.ini:5: flow.cfl"), std::string::npos);
    EXPECT_EQ(run("evolve " + q(path("missing.ini"))), 1);
}

TEST_F(Cli, VerifyUnknownTheorem)
{
    const auto cfg = write("circle.ini", kCircle);
    EXPECT_EQ(run("verify " + q(cfg) + " --theorem nope"), 1);
    EXPECT_NE(slurp(path("stderr.txt")).find("unknown theorem"), std::string::npos);
}

TEST_F(Cli, VerifyVacuousHypothesisExitsZero)
{
    const auto cfg = write("ell.ini", "[geometry]\ntype = ellipsoid\na = 1\nb = 1\nc = 3\nsubdivision = 2\n"
                                      "[flow]\nt_end = 0.005\n[run]\ncadence = 5\noutput = out\n");
    ASSERT_EQ(run("verify " + q(cfg) + " --theorem tt1"), 0);
    const auto v = flowspectra::read_json(path("out/verdict_tt1.json").string());
    EXPECT_EQ(v["hypothesis_holds"], false);
    EXPECT_EQ(v["passed"], true);
}

TEST_F(Cli, VerifyChecksOnCircle)
{
    const auto cfg = write("circle.ini", kCircle);
    for (const std::string th : {"tt1", "variation", "lemma21", "metric-cmp"}) {
        EXPECT_EQ(run("verify " + q(cfg) + " --theorem " + th), 0) << th;
        const auto v = flowspectra::read_json(path("out/verdict_" + th + ".json").string());
        EXPECT_EQ(v["theorem"], th);
        EXPECT_EQ(v["passed"], true);
    }
}

TEST_F(Cli, VerifyWrongLawWritesFailedVerdict)
{
    const auto cfg = write("circle.ini", kCircle);
    EXPECT_EQ(run("verify " + q(cfg) + " --theorem hk"), 1);
    const auto v = flowspectra::read_json(path("out/verdict_hk.json").string());
    EXPECT_EQ(v["passed"], false);
    EXPECT_TRUE(v.contains("error"));
}

TEST_F(Cli, PlotRendersSvg)
{
    const auto cfg = write("circle.ini", kCircle);
    ASSERT_EQ(run("evolve " + q(cfg)), 0);
    ASSERT_EQ(run("plot " + q(path("out/trace.csv")) + " -o " + q(path("t.svg"))), 0);
    const auto svg = slurp(path("t.svg"));
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);

    write("partial.csv", "t,lambda\n0,1\n");
    EXPECT_EQ(run("plot " + q(path("partial.csv")) + " -o " + q(path("p.svg"))), 1);
    EXPECT_NE(slurp(path("stderr.txt")).find("q_up"), std::string::npos);
}

TEST_F(Cli, PlotMarksTruncation)
{
    const auto cfg = write("sphere.ini", "[geometry]\ntype = icosphere\nsubdivision = 2\n"
                                         "[flow]\nt_end = 0.3\n[run]\ncadence = 20\noutput = out\n");
    ASSERT_EQ(run("evolve " + q(cfg)), 2);
    ASSERT_EQ(run("plot " + q(path("out/trace.csv")) + " -o " + q(path("t.svg"))), 0);
    EXPECT_NE(slurp(path("t.svg")).find("class=\"truncation\""), std::string::npos);
}

TEST_F(Cli, OracleSphere)
{
    std::string out;
    ASSERT_EQ(run("oracle sphere --R 1 --n 2 --t 0", &out), 0);
    const auto j = nlohmann::json::parse(out);
    EXPECT_DOUBLE_EQ(j["lambda"].get<double>(), 2.0);
    EXPECT_DOUBLE_EQ(j["lambda_rate"].get<double>(), 8.0);
    EXPECT_DOUBLE_EQ(j["singular_time"].get<double>(), 0.25);
    EXPECT_EQ(run("oracle sphere --R 1 --n 2 --t 0.3"), 1);
    EXPECT_EQ(run("oracle sphere --R -1 --n 2 --t 0"), 1);
}
