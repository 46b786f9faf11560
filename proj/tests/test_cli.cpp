#include "oracle_values.hpp"
#include "test_support.hpp"

#include <ctxcalc/cli.hpp>

#include <gtest/gtest.h>

#include <map>

using namespace ctxcalc;
using ctxcalc::test::read_file;
using ctxcalc::test::source_path;
using ctxcalc::test::temp_dir;
namespace fs = std::filesystem;

namespace {

struct result
{
    int code;
    std::string out;
    std::string err;
};

result run_cli(std::vector<std::string> args, std::map<std::string, std::string> env = {})
{
    args.insert(args.begin(), "ctxcalc");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err, [&env](const std::string& k) -> std::optional<std::string> {
        const auto it = env.find(k);
        return it == env.end() ? std::nullopt : std::optional<std::string>(it->second);
    });
    return {code, out.str(), err.str()};
}

std::string scenario_file(const std::string& name)
{
    return source_path("scenarios/" + name).string();
}

fs::path write_text(const temp_dir& dir, const std::string& name, const std::string& text)
{
    const auto p = dir.path() / name;
    std::ofstream(p) << text;
    return p;
}

std::size_t line_count(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const std::string two_topic_head = "schema: 1\n"
                                   "topics:\n"
                                   "  - {lambda_correct: 0.5, lambda_noise: 0.5}\n"
                                   "  - {lambda_correct: 0.5, lambda_noise: 0.5}\n"
                                   "correlations: [0, 0.3, 0.3, 0]\n"
                                   "alpha: 1\nbeta: 0.5\nn_agents: 2\n";

} // namespace

TEST(Cli, EvalDefaultJson)
{
    const auto r = run_cli({"eval", scenario_file("default.yaml")});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_TRUE(r.err.empty());
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["rci_shared"]["value"].get<double>(), 0.969997, 1e-6);
    EXPECT_NEAR(j["rci_separate"]["value"].get<double>(), 0.621893, 1e-6);
    EXPECT_NEAR(j["rci_ratio"].get<double>(), 0.641128, 1e-6);
    EXPECT_NEAR(j["time_ratio"].get<double>(), 1.0 + 1.0 / std::log(3.0), 1e-12);
}

TEST(Cli, EvalSingleTopicCsv)
{
    const auto r = run_cli({"eval", scenario_file("single_topic.yaml"), "--format", "csv"});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_EQ(r.out.rfind("metric,value\n", 0), 0u);
    EXPECT_NE(r.out.find("\nrci_ratio,1\n"), std::string::npos) << r.out;
}

TEST(Cli, EvalWritesFileWhenOutGiven)
{
    temp_dir dir("eval");
    const auto r = run_cli({"eval", scenario_file("default.yaml"), "--out", dir.str(), "--format", "csv"});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_EQ(read_file(dir.path() / "eval.csv"), r.out);
}

TEST(Cli, ZeroWindowIsDomainError)
{
    temp_dir dir("zero");
    const auto p = write_text(dir, "zero.yaml", two_topic_head + "shared_window: 0\n");
    const auto r = run_cli({"eval", p.string()});
    EXPECT_EQ(r.code, cli::exit_domain);
    EXPECT_TRUE(r.out.empty());
    EXPECT_NE(r.err.find("zero denominator"), std::string::npos) << r.err;
}

TEST(Cli, SweepWritesFigureTables)
{
    temp_dir dir("sweep");
    auto r = run_cli({"sweep", scenario_file("figure1_rci_vs_memory.yaml"), "--out", dir.str()});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(line_count(read_file(dir.path() / "figure1_rci_vs_memory.csv")), 41u);
    EXPECT_TRUE(fs::exists(dir.path() / "figure1_rci_vs_memory.svg"));

    r = run_cli({"sweep", scenario_file("figure2_rci_vs_noise.yaml"), "--out", dir.str()});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_EQ(line_count(read_file(dir.path() / "figure2_rci_vs_noise.csv")), 22u);

    r = run_cli({"sweep", scenario_file("latency_sweep.yaml"), "--out", dir.str()});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_FALSE(fs::exists(dir.path() / "latency_sweep.svg"));
    r = run_cli({"sweep", scenario_file("latency_sweep.yaml"), "--out", dir.str(), "--chart"});
    EXPECT_TRUE(fs::exists(dir.path() / "latency_sweep.svg"));
}

TEST(Cli, SweepErrors)
{
    temp_dir dir("sweeperr");
    const auto empty = write_text(dir, "empty.yaml",
                                  two_topic_head
                                      + "shared_window: 2\nsweep:\n  parameter: memory_window\n  values: []\n");
    auto r = run_cli({"sweep", empty.string(), "--out", dir.str()});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_NE(r.err.find("empty grid"), std::string::npos) << r.err;

    r = run_cli({"sweep", scenario_file("default.yaml"), "--out", dir.str()});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_NE(r.err.find("no sweep block"), std::string::npos) << r.err;

    r = run_cli({"sweep", (dir.path() / "missing.yaml").string(), "--out", dir.str()});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_NE(r.err.find("cannot read scenario"), std::string::npos) << r.err;
}

TEST(Cli, UnwritableOutputDirectory)
{
    temp_dir dir("unwritable");
    const auto blocker = write_text(dir, "file", "x");
    const auto target = (blocker / "sub").string();
    auto r = run_cli({"sweep", scenario_file("figure1_rci_vs_memory.yaml"), "--out", target});
    EXPECT_EQ(r.code, cli::exit_io);
    EXPECT_NE(r.err.find("I/O error"), std::string::npos) << r.err;
    r = run_cli({"figures", "--out", target});
    EXPECT_EQ(r.code, cli::exit_io);
}

TEST(Cli, ValidateRejectsTooFewTrials)
{
    const auto r = run_cli({"validate", scenario_file("default.yaml"), "--trials", "100"});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ValidateIsDeterministicAndPasses)
{
    const std::vector<std::string> args{"validate", scenario_file("default.yaml"), "--trials", "20000", "--seed", "7"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    ASSERT_EQ(a.code, cli::exit_ok) << a.out << a.err;
    EXPECT_EQ(a.out, b.out);
    const auto j = nlohmann::json::parse(a.out);
    EXPECT_EQ(j["all_passed"], true);
    EXPECT_EQ(j["components"].size(), 11u);

    auto other = args;
    other.back() = "8";
    EXPECT_NE(run_cli(other).out, a.out);

    auto partitioned = args;
    partitioned.insert(partitioned.end(), {"--partitions", "4"});
    const auto p4 = run_cli(partitioned);
    EXPECT_EQ(p4.code, cli::exit_ok);
    EXPECT_EQ(p4.out, run_cli(partitioned).out);
}

TEST(Cli, ValidationFailureStillWritesReport)
{
    temp_dir dir("valfail");
    const auto p = write_text(dir, "strict.yaml",
                              two_topic_head
                                  + "shared_window: 2\nsimulation:\n  trials: 10000\n  seed: 3\n"
                                    "  sigma_threshold: 1e-9\n");
    const auto r = run_cli({"validate", p.string(), "--out", dir.str()});
    EXPECT_EQ(r.code, cli::exit_validation_failed);
    const auto written = read_file(dir.path() / "validation_report.json");
    EXPECT_EQ(written, r.out);
    EXPECT_EQ(nlohmann::json::parse(written)["all_passed"], false);
}

TEST(Cli, SimulateReportsBothModes)
{
    const auto r = run_cli({"simulate", scenario_file("default.yaml"), "--trials", "20000", "--format", "csv"});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_EQ(line_count(r.out), 3u);
    EXPECT_NE(r.out.find("\nshared,"), std::string::npos);
    EXPECT_NE(r.out.find("\nseparate,"), std::string::npos);
    EXPECT_EQ(r.out, run_cli({"simulate", scenario_file("default.yaml"), "--trials", "20000", "--format", "csv"}).out);
}

TEST(Cli, FiguresMatchSweepAndRerunIsIdentical)
{
    temp_dir figs("figs");
    temp_dir sweeps("sweeps");
    ASSERT_EQ(run_cli({"figures", "--out", figs.str()}).code, cli::exit_ok);

    std::size_t files = 0;
    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(figs.path()))
    {
        ++files;
        first[e.path().filename().string()] = read_file(e.path());
    }
    EXPECT_EQ(files, 4u);

    ASSERT_EQ(run_cli({"figures", "--out", figs.str()}).code, cli::exit_ok);
    for (const auto& [name, content] : first)
    {
        EXPECT_EQ(read_file(figs.path() / name), content) << name;
    }

    for (const char* stem : {"figure1_rci_vs_memory", "figure2_rci_vs_noise"})
    {
        ASSERT_EQ(run_cli({"sweep", scenario_file(std::string(stem) + ".yaml"), "--out", sweeps.str()}).code,
                  cli::exit_ok);
        EXPECT_EQ(read_file(sweeps.path() / (std::string(stem) + ".csv")), first[std::string(stem) + ".csv"]);
    }
}

TEST(Cli, OutDirFromEnvironment)
{
    temp_dir dir("env");
    const auto target = (dir.path() / "nested" / "out").string();
    const auto r = run_cli({"figures"}, {{cli::out_dir_env, target}});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_TRUE(fs::exists(fs::path(target) / "figure1_rci_vs_memory.csv"));

    // --out wins over the environment.
    temp_dir flag("flag");
    ASSERT_EQ(run_cli({"figures", "--out", flag.str()}, {{cli::out_dir_env, "/nonexistent/ignored"}}).code,
              cli::exit_ok);
    EXPECT_TRUE(fs::exists(flag.path() / "figure2_rci_vs_noise.svg"));
}

TEST(Cli, UsageErrors)
{
    auto r = run_cli({});
    EXPECT_EQ(r.code, cli::exit_config);
    r = run_cli({"eval"});
    EXPECT_EQ(r.code, cli::exit_config);
    r = run_cli({"eval", scenario_file("default.yaml"), "--format", "xml"});
    EXPECT_EQ(r.code, cli::exit_config);
    r = run_cli({"bogus"});
    EXPECT_EQ(r.code, cli::exit_config);
    r = run_cli({"--help"});
    EXPECT_EQ(r.code, cli::exit_ok);
    EXPECT_NE(r.out.find("validate"), std::string::npos);
}

TEST(Cli, ConfigErrorsGoToStderrWithLine)
{
    temp_dir dir("cfg");
    const auto p = write_text(dir, "bad.yaml", two_topic_head + "shared_window: 2\ncolour: blue\n");
    const auto r = run_cli({"eval", p.string()});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_TRUE(r.out.empty());
    EXPECT_NE(r.err.find("line 10"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("'colour'"), std::string::npos) << r.err;
}
