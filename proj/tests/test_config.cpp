#include <string>

#include <gtest/gtest.h>

#include "fluxent/config.hpp"

using namespace fluxent;

namespace {

const std::string kBase = R"([system]
delta1 = 0.1
delta2 = 0.15
eps1 = 3.331
eps2 = 6.662
g = 0.15

[drive]
amplitude = 5
omega = 1
phi0 = 0

[noise]
gamma1 = 1e-4
gamma2 = 1e-4
temperature_mk = 30
)";

ConfigError error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "no ConfigError for:\n" << text;
    return ConfigError(0, "", "");
}

}  // namespace

TEST(Config, ParsesBasePoint) {
    const RunConfig c = parse_config(kBase);
    EXPECT_DOUBLE_EQ(c.params.q1.delta, 0.1);
    EXPECT_DOUBLE_EQ(c.params.q2.eps, 6.662);
    EXPECT_DOUBLE_EQ(c.params.g, 0.15);
    EXPECT_DOUBLE_EQ(c.params.drive.amplitude, 5.0);
    EXPECT_DOUBLE_EQ(c.params.q1.gamma_relax, 1e-4);
    EXPECT_FALSE(c.sweep);
    const SystemParams p = c.point();
    EXPECT_NEAR(p.q1.gamma_excite / p.q1.gamma_relax, 0.0048384524441646235, 1e-12);
    EXPECT_GT(p.q2.gamma_excite, 0.0);
}

TEST(Config, CommentsAndBlankLines) {
    const RunConfig c = parse_config("# leading comment\n" + kBase + "\n# trailing\n\n");
    EXPECT_DOUBLE_EQ(c.params.q1.eps, 3.331);
}

TEST(Config, ExplicitExcitationRatesOverrideTemperature) {
    const RunConfig c = parse_config(kBase + "gamma_excite1 = 0\ngamma_excite2 = 2e-6\n");
    const SystemParams p = c.point();
    EXPECT_EQ(p.q1.gamma_excite, 0.0);
    EXPECT_EQ(p.q2.gamma_excite, 2e-6);
}

TEST(Config, UnknownKeyReportsLine) {
    const auto e = error_of(kBase + "gamma3 = 1\n");
    EXPECT_EQ(e.line(), 17);
    EXPECT_EQ(e.field(), "noise.gamma3");
}

TEST(Config, UnknownSection) {
    const auto e = error_of(kBase + "[plots]\nx = 1\n");
    EXPECT_EQ(e.field(), "plots");
    EXPECT_EQ(e.line(), 18);
}

TEST(Config, MalformedLines) {
    EXPECT_EQ(error_of(kBase + "gamma_phi1\n").line(), 17);
    EXPECT_EQ(error_of(kBase + "[integrator\n").line(), 17);
    EXPECT_EQ(error_of("eps1 = 3\n" + kBase).line(), 1);
    EXPECT_EQ(error_of(kBase + "gamma_phi1 = fast\n").field(), "noise.gamma_phi1");
}

TEST(Config, DuplicateKeyAndSection) {
    const auto k = error_of(kBase + "gamma1 = 2e-4\n");
    EXPECT_EQ(k.line(), 17);
    EXPECT_EQ(k.field(), "noise.gamma1");
    EXPECT_EQ(error_of(kBase + "[drive]\n").line(), 17);
}

TEST(Config, UnequalDriveAmplitudes) {
    std::string t = kBase;
    t.insert(t.find("omega = 1"), "amplitude2 = 4\n");
    const auto e = error_of(t);
    EXPECT_EQ(e.field(), "drive.amplitude2");
    EXPECT_EQ(e.line(), 10);
    t = kBase;
    t.insert(t.find("omega = 1"), "amplitude2 = 5\n");
    EXPECT_NO_THROW(parse_config(t));
}

TEST(Config, RangeChecks) {
    std::string t = kBase;
    t.replace(t.find("omega = 1"), 9, "omega = 0");
    EXPECT_EQ(error_of(t).field(), "drive.omega");
    EXPECT_EQ(error_of(kBase + "gamma_phi2 = -1e-5\n").field(), "noise.gamma_phi2");
    EXPECT_EQ(error_of(kBase + "[integrator]\nn_phase = 8\n").field(), "integrator.n_phase");
    EXPECT_EQ(error_of(kBase + "[integrator]\nn_time = 32\n").field(), "integrator.n_time");
    EXPECT_EQ(error_of(kBase + "[integrator]\nmode = euler\n").field(), "integrator.mode");
    EXPECT_EQ(error_of(kBase + "[integrator]\nsteps_per_period = 10\n").field(), "integrator.steps_per_period");
}

TEST(Config, IntegratorAndSeriesKeys) {
    const RunConfig c = parse_config(kBase +
                                     "[integrator]\nmode = dp45\nrel_tol = 1e-9\nn_phase = 32\nn_time = 128\n"
                                     "reuse_phase_shift = false\n[series]\nk_max = 40\ndenom_guard = 0.01\n");
    EXPECT_EQ(c.integrator.mode, StepMode::AdaptiveDp45);
    EXPECT_DOUBLE_EQ(c.integrator.rel_tol, 1e-9);
    EXPECT_EQ(c.averaging.n_phase, 32);
    EXPECT_EQ(c.averaging.n_time, 128);
    EXPECT_FALSE(c.averaging.reuse_phase_shift);
    EXPECT_EQ(c.series.k_max, 40);
    EXPECT_DOUBLE_EQ(c.series.denom_guard, 0.01);
}

TEST(Config, SweepAxesAndLinks) {
    const RunConfig c = parse_config(kBase +
                                     "[sweep]\nx = eps1 2.8 4.2 561\ny = g 0.05 0.25 5\n"
                                     "link = eps2 = 2 * eps1; gamma2 = gamma1 + 1e-5\nmethod = numeric\noutput = a.csv\n");
    ASSERT_TRUE(c.sweep);
    const auto& s = *c.sweep;
    EXPECT_EQ(s.x.name, "eps1");
    EXPECT_EQ(s.x.n, 561);
    EXPECT_NEAR(s.x.step(), 0.0025, 1e-15);
    ASSERT_TRUE(s.y);
    EXPECT_EQ(s.y->name, "g");
    ASSERT_EQ(s.links.size(), 2u);
    EXPECT_EQ(s.links[0].target, "eps2");
    EXPECT_EQ(s.links[0].scale, 2.0);
    EXPECT_EQ(s.links[1].offset, 1e-5);
    EXPECT_EQ(s.method, Method::Numeric);
    EXPECT_EQ(s.output, "a.csv");
    const SystemParams p = c.point({{"eps1", 3.5}}, s.links);
    EXPECT_DOUBLE_EQ(p.q2.eps, 7.0);
    EXPECT_DOUBLE_EQ(p.q2.gamma_relax, 1e-4 + 1e-5);
}

TEST(Config, SweepErrors) {
    EXPECT_EQ(error_of(kBase + "[sweep]\nx = eps1 2.8 4.2 1\n").field(), "sweep.x");
    EXPECT_EQ(error_of(kBase + "[sweep]\nx = eps3 2.8 4.2 11\n").field(), "sweep.x");
    EXPECT_EQ(error_of(kBase + "[sweep]\nx = eps1 2.8 4.2\n").field(), "sweep.x");
    EXPECT_EQ(error_of(kBase + "[sweep]\nx = eps1 2.8 4.2 11\nlink = eps2 == eps1\n").field(), "sweep.link");
    EXPECT_EQ(error_of(kBase + "[sweep]\nx = eps1 2.8 4.2 11\nlink = eps2 = 2 * foo\n").field(), "sweep.link");
    EXPECT_EQ(error_of(kBase + "[sweep]\ny = g 0 1 3\n").field(), "sweep.x");
    EXPECT_EQ(error_of(kBase + "[sweep]\nx = eps1 2.8 4.2 11\nmethod = exact\n").field(), "sweep.method");
}

TEST(Config, DynamicsSection) {
    const RunConfig c = parse_config(kBase +
                                     "[dynamics]\ngammas = 1e-4, 5e-4 5e-3\ninitial = mixed\nfull_state = true\n"
                                     "horizon = 1000\noutput = fig1\n");
    const auto& d = c.dynamics;
    ASSERT_EQ(d.gammas.size(), 3u);
    EXPECT_EQ(d.gammas[1], 5e-4);
    EXPECT_EQ(d.initial, InitialState::Mixed);
    EXPECT_TRUE(d.full_state);
    EXPECT_EQ(d.horizon, 1000.0);
    EXPECT_EQ(d.output, "fig1");
    EXPECT_FALSE(parse_config(kBase).dynamics.full_state);
}

TEST(Config, DynamicsErrors) {
    EXPECT_EQ(error_of(kBase + "[dynamics]\ngammas = 1e-4 0\n").field(), "dynamics.gammas");
    EXPECT_EQ(error_of(kBase + "[dynamics]\ninitial = bell\n").field(), "dynamics.initial");
    EXPECT_EQ(error_of(kBase + "[dynamics]\nfull_state = yes\n").field(), "dynamics.full_state");
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/fluxent.ini"), ConfigError); }

TEST(Config, MethodNames) {
    EXPECT_EQ(parse_method("analytic"), Method::Analytic);
    EXPECT_EQ(parse_method("both"), Method::Both);
    EXPECT_STREQ(to_string(Method::Numeric), "numeric");
    EXPECT_THROW(parse_method("rwa"), ParameterError);
}
