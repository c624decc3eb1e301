#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(YIELDOPT_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("yieldopt_cli_test_" + name);
    fs::remove_all(d);
    return d;
}

const std::string toy = std::string("--config ") + YIELDOPT_CONFIG_DIR + "/toy.ini";

} // namespace

TEST(Cli, EstimateIsDeterministic) {
    const auto a = scratch("a"), b = scratch("b");
    ASSERT_EQ(run(toy + " estimate --out " + a.string()).code, 0);
    ASSERT_EQ(run(toy + " --out " + b.string() + " estimate").code, 0);
    const std::string ea = slurp(a / "estimate.csv");
    EXPECT_EQ(ea, slurp(b / "estimate.csv"));
    EXPECT_EQ(slurp(a / "hybrid_records.csv"), slurp(b / "hybrid_records.csv"));
    EXPECT_EQ(ea.substr(0, ea.find('\n')), "method,yield,sigma,n_samples,true_evals,critical_count");
    EXPECT_NE(ea.find("\nmc,"), std::string::npos);
    EXPECT_NE(ea.find("\ngpr-hybrid,"), std::string::npos);
}

TEST(Cli, SeedChangesResult) {
    const auto a = scratch("s1"), b = scratch("s2");
    ASSERT_EQ(run(toy + " --seed 11 estimate --out " + a.string()).code, 0);
    ASSERT_EQ(run(toy + " --seed 12 estimate --out " + b.string()).code, 0);
    EXPECT_NE(slurp(a / "hybrid_records.csv"), slurp(b / "hybrid_records.csv"));
}

TEST(Cli, OtherSubcommandsWriteTheirFiles) {
    const auto d = scratch("all");
    ASSERT_EQ(run(toy + " newton --out " + d.string()).code, 0);
    ASSERT_EQ(run(toy + " newton --classic --out " + (d / "classic").string()).code, 0);
    ASSERT_EQ(run(toy + " moo --out " + d.string()).code, 0);
    ASSERT_EQ(run(toy + " bench-compare --out " + d.string()).code, 0);
    for (const char* f : {"newton_trace.csv", "classic/newton_trace.csv", "pareto.csv", "moo_history.csv",
                          "bench_compare.csv"})
        EXPECT_TRUE(fs::exists(d / f)) << f;
    const std::string bc = slurp(d / "bench_compare.csv");
    EXPECT_EQ(bc.substr(0, bc.find('\n')), "method,true_evals,yield,sigma,savings_ratio");
}

TEST(Cli, PrintConfigRoundTrips) {
    const auto d = scratch("pc");
    const CliRun r = run(toy + " --print-config estimate --out " + d.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("[model]"), std::string::npos);
    EXPECT_NE(r.out.find("kind = toy"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    EXPECT_NE(run("").code, 0);
    EXPECT_NE(run("frobnicate").code, 0);
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("--config /nonexistent/x.ini estimate").code, 2);
    const auto d = scratch("bad");
    fs::create_directories(d);
    std::ofstream(d / "bad.ini") << "[gpr]\nalpah = 1\n";
    const CliRun r = run("--config " + (d / "bad.ini").string() + " estimate");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("unknown key gpr.alpah"), std::string::npos);
}
