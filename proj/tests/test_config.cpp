#include "yieldopt/config.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace yieldopt;

namespace {

std::string message_of(const std::string& text) {
    try {
        (void)parse_config_string(text);
    } catch (const InvalidInput& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, EmptyTextGivesDefaults) {
    const RunConfig c = parse_config_string("");
    EXPECT_TRUE(c == RunConfig{});
    EXPECT_EQ(c.spec.n_freq, 11u);
    EXPECT_EQ(c.hybrid.n_initial_train, 10u);
    EXPECT_EQ(c.gpr.alpha, 1e-5);
    EXPECT_EQ(c.hybrid.gamma, 2.0);
}

TEST(Config, RoundTripIsExact) {
    RunConfig c;
    c.gpr.alpha = 1.0 / 3.0e5;
    c.hybrid.gamma = 2.7182818284590451;
    c.newton.sigma_hat = 0.0123;
    c.moo.y_min = 0.85;
    c.seed = 0xfeedfacecafebeefULL;
    c.hybrid.sort_enabled = false;
    c.newton_start = (ParamVec(4) << 9.1, 5.2, 1.05, 0.95).finished();
    const RunConfig back = parse_config_string(serialize_config(c));
    EXPECT_TRUE(back == c);
    EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Config, ToyDefaultsApplyBeforeOverrides) {
    const RunConfig c = parse_config_string("[model]\nkind = toy\n[distribution]\nmean = 1.5\n");
    EXPECT_EQ(c.model.kind, ModelKind::toy);
    EXPECT_EQ(c.dimension(), 1u);
    EXPECT_EQ(c.distribution.mean[0], 1.5);
    EXPECT_EQ(c.distribution.std_dev[0], 1.0);
    EXPECT_EQ(c.spec.threshold, 0.0);
    EXPECT_EQ(c.spec.n_freq, 1u);
    EXPECT_TRUE(parse_config_string(serialize_config(c)) == c);
}

TEST(Config, ShippedFilesLoad) {
    const RunConfig b = load_config(std::string(YIELDOPT_CONFIG_DIR) + "/benchmark.ini");
    EXPECT_TRUE(b == RunConfig{});
    const RunConfig t = load_config(std::string(YIELDOPT_CONFIG_DIR) + "/toy.ini");
    EXPECT_EQ(t.model.kind, ModelKind::toy);
    EXPECT_EQ(t.n_samples, 10000u);
}

TEST(Config, UnknownNamesAreRejected) {
    EXPECT_NE(message_of("[gpr]\nalpah = 1e-5\n").find("unknown key gpr.alpah"), std::string::npos);
    EXPECT_NE(message_of("[gp]\nalpha = 1e-5\n").find("unknown section [gp]"), std::string::npos);
    EXPECT_NE(message_of("seed = 3\n").find("must be a section"), std::string::npos);
}

TEST(Config, TypedErrorsNameTheField) {
    EXPECT_NE(message_of("[gpr]\nalpha = abc\n").find("gpr.alpha: expected a number, got 'abc'"), std::string::npos);
    EXPECT_NE(message_of("[moo]\npop = -3\n").find("moo.pop"), std::string::npos);
    EXPECT_NE(message_of("[hybrid]\nsort = maybe\n").find("expected a boolean"), std::string::npos);
    EXPECT_NE(message_of("[model]\nkind = horn\n").find("model.kind"), std::string::npos);
    EXPECT_NE(message_of("[distribution]\nmean = 1 2 3\n").find("distribution.std"), std::string::npos);
    EXPECT_NE(message_of("[hybrid]\ngamma = 1\n").find("hybrid.gamma"), std::string::npos);
    EXPECT_NE(message_of("[newton]\nstart = 1 1 1 1\n").find("newton.start"), std::string::npos);
    EXPECT_NE(message_of("[gpr]\nzeta0 = 5\n").find("gpr.zeta0"), std::string::npos);
    EXPECT_NE(message_of("[spec]\nf_lo_ghz = 8\n").find("f_lo_ghz"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/x.ini"), InvalidInput);
}
