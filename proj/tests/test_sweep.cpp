#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "fluxent/dynamics.hpp"
#include "fluxent/sweep.hpp"
#include "fluxent/verify.hpp"

using namespace fluxent;

namespace {

RunConfig fig1_config() {
    RunConfig c;
    c.params = fixtures::fig1();
    return c;
}

SweepSpec eps1_axis(double lo, double hi, int n) {
    SweepSpec s;
    s.x = {"eps1", lo, hi, n};
    s.links = {{"eps2", "eps1", 2.0, 0.0}};
    return s;
}

std::vector<double> line_positions(const std::vector<ResonanceLinePoint>& lines, ResonanceKind kind, int qubit,
                                   CouplingBranch b) {
    std::vector<double> xs;
    for (const auto& l : lines)
        if (l.info.kind == kind && (kind == ResonanceKind::TwoQubit || (l.info.qubit == qubit && l.info.branch == b)))
            xs.push_back(l.x);
    std::sort(xs.begin(), xs.end());
    return xs;
}

void expect_positions(const std::vector<double>& got, const std::vector<double>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

}  // namespace

TEST(Sweep, TwoByTwoGrid) {
    RunConfig cfg = fig1_config();
    SweepSpec s = eps1_axis(3.30, 3.36, 2);
    s.y = SweepAxis{"g", 0.1, 0.15, 2};
    cfg.sweep = s;
    const auto r = run_sweep(cfg, s, {.workers = 1, .method = Method::Both});
    ASSERT_EQ(r.points.size(), 4u);
    EXPECT_EQ(r.at(1, 0).x, 3.36);
    EXPECT_EQ(r.at(0, 1).y, 0.15);
    for (const auto& p : r.points) {
        EXPECT_TRUE(std::isfinite(p.numeric));
        EXPECT_GE(p.numeric, 0.0);
        EXPECT_LE(p.numeric, 1.0);
        EXPECT_FALSE(p.analytic.tag.empty());
    }
    const std::string csv = sweep_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "eps1,g,cbar,tag,cbar_numeric,cbar_analytic,resonance,detuning,diagnostics");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Sweep, OutputIndependentOfWorkerCount) {
    const RunConfig cfg = fig1_config();
    const SweepSpec s = eps1_axis(3.0, 3.6, 7);
    const auto one = sweep_csv(run_sweep(cfg, s, {.workers = 1, .method = Method::Both}));
    const auto three = sweep_csv(run_sweep(cfg, s, {.workers = 3, .method = Method::Both}));
    EXPECT_EQ(one, three);
}

TEST(Sweep, FailingPointIsReportedNotFatal) {
    RunConfig cfg = fig1_config();
    cfg.params.temperature_mk = 0.0;
    SweepSpec s;
    s.x = {"gamma1", 0.0, 1e-4, 2};
    s.links = {{"gamma2", "gamma1", 1.0, 0.0}};
    const auto r = run_sweep(cfg, s, {.workers = 1, .method = Method::Both});
    EXPECT_FALSE(r.at(0).numeric_error.empty());
    EXPECT_TRUE(std::isnan(r.at(0).numeric));
    EXPECT_EQ(r.at(0).analytic.tag, "out_of_theory");
    EXPECT_TRUE(r.at(1).numeric_error.empty());
    EXPECT_TRUE(std::isfinite(r.at(1).numeric));
    const std::string csv = sweep_csv(r);
    const auto row = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
    EXPECT_NE(row.find("not unique"), std::string::npos) << row;
}

TEST(Sweep, AnalyticBranchDispatch) {
    SystemParams p = fixtures::fig1();
    EXPECT_EQ(concurrence_analytic(p, {}).tag, "rwa");
    p.q1.eps = 3.52;
    p.q2.eps = 7.04;
    const auto nonres = concurrence_analytic(p, {});
    EXPECT_EQ(nonres.tag, "nonres") << nonres.diagnostic;
    EXPECT_GT(nonres.truncation_bound, 0.0);
    p.q1.eps = 2.86;  // eps1 + g - 3 omega = 0.01
    p.q2.eps = 5.72;
    const auto out = concurrence_analytic(p, {});
    EXPECT_EQ(out.tag, "out_of_theory");
    EXPECT_TRUE(std::isnan(out.value));
    EXPECT_EQ(out.resonance.qubit, 1);
    EXPECT_NE(out.diagnostic.find("single-qubit"), std::string::npos);
}

TEST(Sweep, RatesWidenTheResonantBranch) {
    SystemParams p = fixtures::fig1();
    p.q1.eps = 3.3;  // delta12 = -0.1
    p.q2.eps = 6.6;
    EXPECT_EQ(concurrence_analytic(p, {}).tag, "nonres");
    p.q1.gamma_phi = 0.02;
    EXPECT_EQ(concurrence_analytic(p, {}).tag, "rwa");
}

TEST(Sweep, NumericOnlyLeavesAnalyticEmpty) {
    const RunConfig cfg = fig1_config();
    const auto r = run_sweep(cfg, eps1_axis(3.2, 3.4, 2), {.workers = 1, .method = Method::Numeric});
    EXPECT_TRUE(r.at(0).analytic.tag.empty());
    const std::string csv = sweep_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "eps1,cbar_numeric,cbar_analytic,tag,resonance,detuning,truncation_bound,fixed_point_residual,diagnostics");
    EXPECT_NE(csv.find(",numeric,"), std::string::npos);
}

TEST(ResonanceLines, Fig2Window) {
    const RunConfig cfg = fig1_config();
    const auto lines = resonance_lines(cfg, eps1_axis(2.8, 4.2, 57));
    using K = ResonanceKind;
    using B = CouplingBranch;
    expect_positions(line_positions(lines, K::SingleQubit, 1, B::Plus), {2.85, 3.85});
    expect_positions(line_positions(lines, K::SingleQubit, 1, B::Minus), {3.15, 4.15});
    expect_positions(line_positions(lines, K::SingleQubit, 2, B::Plus), {2.925, 3.425, 3.925});
    expect_positions(line_positions(lines, K::SingleQubit, 2, B::Minus), {3.075, 3.575, 4.075});
    expect_positions(line_positions(lines, K::TwoQubit, 0, B::Plus), {3.0, 10.0 / 3.0, 11.0 / 3.0, 4.0});
    const std::string csv = resonance_lines_csv(lines);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "family,qubit,branch,k,extended,y,x");
}

TEST(ResonanceLines, OneSetPerRow) {
    const RunConfig cfg = fig1_config();
    SweepSpec s = eps1_axis(2.8, 4.2, 15);
    s.y = SweepAxis{"g", 0.1, 0.2, 3};
    const auto lines = resonance_lines(cfg, s);
    for (double g : {0.1, 0.15, 0.2}) {
        std::vector<double> xs;
        for (const auto& l : lines)
            if (std::fabs(l.y - g) < 1e-12 && l.info.qubit == 1 && l.info.branch == CouplingBranch::Plus)
                xs.push_back(l.x);
        std::sort(xs.begin(), xs.end());
        expect_positions(xs, {3.0 - g, 4.0 - g});
    }
}

TEST(Dynamics, NoTunnellingNoEntanglement) {
    RunConfig cfg = fig1_config();
    cfg.params.q1.delta = 0.0;
    cfg.dynamics.gammas = {5e-3};
    cfg.dynamics.horizon = 200.0;
    const auto runs = run_dynamics(cfg, 1);
    ASSERT_EQ(runs.size(), 1u);
    double cmax = 0.0;
    for (const auto& s : runs[0].samples) cmax = std::max(cmax, s.concurrence);
    EXPECT_LT(cmax, 1e-10);
}

TEST(Dynamics, CsvLayoutAndSummary) {
    RunConfig cfg = fig1_config();
    cfg.dynamics.gammas = {5e-3, 1e-2};
    cfg.dynamics.horizon = 100.0;
    cfg.dynamics.full_state = true;
    const auto runs = run_dynamics(cfg, 2);
    ASSERT_EQ(runs.size(), 2u);
    EXPECT_EQ(runs[0].gamma, 5e-3);
    EXPECT_EQ(runs[0].samples.front().t, 0.0);
    EXPECT_NEAR(runs[0].samples.back().t, runs[0].periods * cfg.params.period(), 1e-9);
    for (const auto& s : runs[1].samples) {
        EXPECT_NEAR(s.trace, 1.0, 1e-10);
        EXPECT_NEAR(s.rho.trace().real(), 1.0, 1e-10);
    }
    const std::string plain = dynamics_csv(runs[0]);
    EXPECT_EQ(plain.substr(0, plain.find('\n')), "t_ns,C,tr,min_eig,pop0,pop1,pop2,pop3");
    const std::string full = dynamics_csv(runs[0], true);
    const std::string header = full.substr(0, full.find('\n'));
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), 7 + 32);
    EXPECT_NE(header.find(",re_03,im_03"), std::string::npos);
    const std::string summary = dynamics_summary_csv(runs, {"a.csv", "b.csv"});
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 3);
}

TEST(Dynamics, EntryIsFoundPastTheRecordedHorizon) {
    RunConfig cfg = fig1_config();
    cfg.dynamics.gammas = {5e-3};
    cfg.dynamics.horizon = 100.0;
    const auto runs = run_dynamics(cfg, 1);
    const auto& r = runs[0];
    EXPECT_GT(r.entry_period, r.periods);
    EXPECT_NEAR(r.entry_time, r.entry_period * cfg.params.period(), 1e-6);
    EXPECT_NEAR(r.samples.back().t, r.periods * cfg.params.period(), 1e-9);
}

TEST(Dynamics, DefaultHorizon) {
    DynamicsSpec d;
    d.gammas = {1e-3, 1e-4};
    EXPECT_DOUBLE_EQ(default_horizon(d), 2e5);
    d.horizon = 50.0;
    EXPECT_DOUBLE_EQ(default_horizon(d), 50.0);
}

TEST(Verify, DefaultPointPasses) {
    const auto rep = run_verify(fixtures::fig1(), {}, {});
    for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.value;
    EXPECT_TRUE(rep.passed());
}

TEST(Verify, InjectedFaultsAreCaught) {
    auto failing = [](const VerifyReport& r) {
        std::vector<std::string> names;
        for (const auto& c : r.checks)
            if (!c.pass) names.push_back(c.name);
        return names;
    };
    const auto h14 = failing(run_verify(fixtures::fig1(), {}, {}, {.flip_h14_sign = true}));
    EXPECT_EQ(h14, std::vector<std::string>{"rwa_stationarity_residual"});
    const auto leak = failing(run_verify(fixtures::fig1(), {}, {}, {.trace_leak = 1e-6}));
    ASSERT_FALSE(leak.empty());
    EXPECT_EQ(leak.front(), "trace_drift_per_period");
}
