#include <cmath>
#include <complex>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "loggas/experiments.hpp"
#include "loggas/observables.hpp"
#include "loggas/stats.hpp"

using namespace loggas;
using cx = std::complex<double>;

namespace {

const EquilibriumMeasure& semicircle_measure() {
    static EquilibriumMeasure m(Potential::quadratic());
    return m;
}

const EquilibriumMeasure& quartic_measure() {
    static EquilibriumMeasure m(Potential::quartic(1.0), {-1.5, 1.5});
    return m;
}

EnsembleConfig tridiag_config(double beta, int N) {
    EnsembleConfig c;
    c.beta = beta;
    c.N = N;
    c.method = Method::tridiagonal;
    return c;
}

/// Shared tridiagonal sample sets (generated once per process).
const SampleSet& set256_b2() {
    static SampleSet s = run_chains(tridiag_config(2.0, 256), 4, 375, 901);
    return s;
}
const SampleSet& set256_b1() {
    static SampleSet s = run_chains(tridiag_config(1.0, 256), 4, 300, 902);
    return s;
}
const SampleSet& set512_b2() {
    static SampleSet s = run_chains(tridiag_config(2.0, 512), 4, 200, 903);
    return s;
}
const SampleSet& set128_b2() {
    static SampleSet s = run_chains(tridiag_config(2.0, 128), 4, 125, 904);
    return s;
}
const SampleSet& set64_b1() {
    static SampleSet s = run_chains(tridiag_config(1.0, 64), 4, 150, 905);
    return s;
}

const SampleSet& mala_quartic_set() {
    static SampleSet s = [] {
        EnsembleConfig c;
        c.beta = 2.0;
        c.N = 8;
        c.potential = Potential::quartic(1.0);
        c.method = Method::mala;
        c.mcmc.burn_in_sweeps = 600;
        c.mcmc.thinning_sweeps = 5;
        return run_chains(c, 2, 300, 906);
    }();
    return s;
}

const ReportRow& find_row(const ExperimentReport& r, const std::string& needle) {
    for (const ReportRow& row : r.rows)
        if (row.inputs.find(needle) != std::string::npos) return row;
    REQUIRE_MESSAGE(false, "row not found: ", needle);
    static ReportRow dummy;
    return dummy;
}

}  // namespace

TEST_CASE("report mechanics: verdict, csv shape, json validity") {
    ExperimentReport r;
    r.name = "demo";
    r.config_echo = "beta=2";
    r.claim = "demo claim";
    ReportRow good;
    good.inputs = "a, with comma";
    good.pass = true;
    ReportRow info;
    info.gated = false;
    info.pass = false;  // ungated failures must not affect the verdict
    r.rows = {good, info};
    CHECK(r.verdict());

    ReportRow bad;
    bad.pass = false;
    r.rows.push_back(bad);
    CHECK_FALSE(r.verdict());

    const std::string csv = r.csv();
    CHECK(csv.rfind("inputs,predicted,estimated,stderr,z_score,gated,pass,note\n", 0) == 0);
    CHECK(csv.find("\"a, with comma\"") != std::string::npos);

    const auto j = nlohmann::json::parse(r.json_text());
    CHECK(j["name"] == "demo");
    CHECK(j["verdict"] == "fail");
    CHECK(j["rows"].size() == 3);

    const auto dir = std::filesystem::temp_directory_path() / "loggas_report_test";
    std::filesystem::remove_all(dir);
    r.write(dir.string());
    CHECK(std::filesystem::exists(dir / "demo.csv"));
    CHECK(std::filesystem::exists(dir / "demo.json"));
    CHECK_FALSE(std::filesystem::exists(dir / "demo.svg"));  // no plot attached
    std::filesystem::remove_all(dir);
}

TEST_CASE("loop statistic agrees with the direct formula") {
    const EquilibriumMeasure& m = quartic_measure();
    const std::vector<double> l = {-0.9, 0.1, 0.7};
    const double beta = 1.5;
    const cx z(0.4, 0.6);

    const cx s = stieltjes_emp(l, z);
    const cx sp = stieltjes_emp(l, z, 1);
    cx vterm = 0.0;
    for (double lam : l) vterm += m.potential().evaluate(lam, 1) / (lam - z);
    vterm /= 3.0;
    const cx direct = s * s - (1.0 - 2.0 / beta) / 3.0 * sp + vterm;

    const cx got = loop_statistic(l, m, beta, z, {});
    CHECK(std::abs(got - direct) < 1e-12);

    // Rank-2 combination assembled by hand.
    const cx w(0.0, 1.1);
    const cx direct2 = direct * stieltjes_emp(l, w) + 2.0 / (9.0 * beta) * f_kernel(l, z, w);
    CHECK(std::abs(loop_statistic(l, m, beta, z, {w}) - direct2) < 1e-12);
}

TEST_CASE("loop equation rank 1: oracle at N=2 is exact") {
    const Oracle oracle(2.0, 2, Potential::quadratic());
    const auto report = verify_loop_rank1(oracle, 2.0, semicircle_measure(), {cx(0.0, 1.0)});
    REQUIRE(report.rows.size() == 2);
    for (const ReportRow& row : report.rows) {
        CHECK(std::abs(row.estimated) < 1e-8);
        CHECK(row.pass);
    }
    CHECK(report.verdict());
    CHECK(report.config_echo.find("N=2") != std::string::npos);
}

TEST_CASE("loop equation rank 1: Monte Carlo z-scores within 4") {
    const auto report = verify_loop_rank1(set64_b1(), semicircle_measure(),
                                          {cx(0.3, 0.5), cx(-1.0, 0.25)});
    REQUIRE(report.rows.size() == 4);
    for (const ReportRow& row : report.rows) {
        CAPTURE(row.inputs);
        CHECK(row.stderr_value > 0.0);
        CHECK(std::abs(row.z_score) <= 4.0);
        CHECK(row.pass);
    }
    CHECK(report.verdict());
}

TEST_CASE("loop equation rank 1: beta=2 term drop changes nothing") {
    const auto report =
        verify_loop_rank1(set256_b2(), semicircle_measure(), {cx(0.5, 0.8)});
    const ReportRow& drop = find_row(report, "drop (1-2/beta)");
    CHECK(drop.estimated == 0.0);
    CHECK(drop.pass);
    CHECK(report.verdict());
}

TEST_CASE("loop equation rank 1: MCMC samples use batch-mean errors") {
    const auto report =
        verify_loop_rank1(mala_quartic_set(), quartic_measure(), {cx(0.5, 0.5)});
    for (const ReportRow& row : report.rows) {
        CAPTURE(row.inputs);
        CHECK(row.pass);
    }
    CHECK(report.verdict());
}

TEST_CASE("loop equation rank 1: input validation") {
    CHECK_THROWS_AS(verify_loop_rank1(set64_b1(), semicircle_measure(), {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        verify_loop_rank1(set64_b1(), semicircle_measure(), {cx(0.5, 0.0)}),
        std::invalid_argument);
}

TEST_CASE("loop equation rank 2: oracle at N=2 is exact") {
    const Oracle oracle(2.0, 2, Potential::quadratic());
    const auto report =
        verify_loop_rankn(oracle, 2.0, semicircle_measure(), cx(0.0, 1.0), {cx(0.0, 2.0)});
    REQUIRE(report.rows.size() == 2);
    for (const ReportRow& row : report.rows) {
        CHECK(std::abs(row.estimated) < 1e-7);
        CHECK(row.pass);
    }
    CHECK(report.verdict());
}

TEST_CASE("loop equation rank n: Monte Carlo including a conjugate pair") {
    const auto two = verify_loop_rankn(set64_b1(), semicircle_measure(), cx(0.0, 1.0),
                                       {cx(0.0, 2.0), cx(0.5, 1.0)});
    for (const ReportRow& row : two.rows) {
        CAPTURE(row.inputs);
        CHECK(row.pass);
    }
    CHECK(two.verdict());

    const cx w(0.6, 0.9);
    const auto conj_pair =
        verify_loop_rankn(set64_b1(), semicircle_measure(), cx(0.0, 0.8), {w, std::conj(w)});
    for (const ReportRow& row : conj_pair.rows) {
        CAPTURE(row.inputs);
        CHECK(row.pass);
    }
}

TEST_CASE("loop equation rank n: input validation") {
    CHECK_THROWS_AS(
        verify_loop_rankn(set64_b1(), semicircle_measure(), cx(0.0, 1.0), {}),
        std::invalid_argument);
    const std::vector<cx> five(5, cx(0.0, 1.0));
    CHECK_THROWS_AS(
        verify_loop_rankn(set64_b1(), semicircle_measure(), cx(0.0, 1.0), five),
        std::invalid_argument);
}

TEST_CASE("local law scan: slope -2 at q=1 and determinism across threads") {
    const int N = 256;
    std::vector<double> etas;
    for (int k = 2; k <= 6; ++k) etas.push_back(std::ldexp(1.0, k) / N);  // 4/N .. 64/N
    const auto report = local_law_scan(set256_b2(), semicircle_measure(), 0.0, etas, 1);
    const ReportRow& slope = find_row(report, "slope");
    CHECK(slope.predicted == -2.0);
    CHECK(std::abs(slope.estimated + 2.0) <= 0.2);
    CHECK(slope.pass);
    CHECK(report.verdict());
    CHECK_FALSE(report.plot.empty());

    const auto t1 = local_law_scan(set256_b2(), semicircle_measure(), 0.0, etas, 1, 0.5, 1);
    const auto t4 = local_law_scan(set256_b2(), semicircle_measure(), 0.0, etas, 1, 0.5, 4);
    CHECK(t1.csv() == t4.csv());
}

TEST_CASE("local law scan: macroscopic eta averages harder") {
    const auto report = local_law_scan(set256_b2(), semicircle_measure(), 0.0,
                                       {0.01, 0.1, 1.0, 10.0}, 1, 16.0);
    CHECK(report.rows[0].estimated > report.rows[3].estimated);
}

TEST_CASE("local law scan: input validation") {
    const auto& m = semicircle_measure();
    CHECK_THROWS_AS(local_law_scan(set256_b2(), m, 0.0, {0.1, 0.2, 0.3}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(local_law_scan(set256_b2(), m, 0.0, {0.1, 0.2, 0.3, 0.7}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(local_law_scan(set256_b2(), m, 9.0, {0.1, 0.2, 0.3, 0.4}, 1),
                    std::invalid_argument);
}

TEST_CASE("rigidity profile: constants stay bounded from N=128 to 256") {
    const auto report =
        rigidity_profile({set128_b2(), set256_b2()}, semicircle_measure(), 0.1);
    const ReportRow& ratio = find_row(report, "max/min");
    CHECK(ratio.estimated >= 1.0);
    CHECK(ratio.estimated < 2.0);
    CHECK(report.verdict());

    CHECK_THROWS_AS(rigidity_profile({set256_b2(), set128_b2()}, semicircle_measure(), 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(rigidity_profile({set128_b2()}, semicircle_measure(), 0.7),
                    std::invalid_argument);
}

TEST_CASE("edge tail: survival is monotone and the exponent is sane") {
    const auto report =
        edge_tail(set256_b2(), semicircle_measure(), {0.0, 0.5, 1.0, 2.0});
    REQUIRE(report.rows.size() == 5);
    // Baseline in (0,1); each later point no larger than its predecessor.
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
        CAPTURE(i);
        CHECK(report.rows[i].pass);
    }
    for (std::size_t i = 2; i + 1 < report.rows.size(); ++i)
        CHECK(report.rows[i].estimated <= report.rows[i - 1].estimated);

    const ReportRow& fit = find_row(report, "exponent");
    CHECK(fit.estimated > 0.4);
    CHECK(fit.estimated < 2.2);

    CHECK_THROWS_AS(edge_tail(set256_b2(), semicircle_measure(), {1.0, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(edge_tail(set256_b2(), semicircle_measure(), {-1.0, 0.5}),
                    std::invalid_argument);
}

TEST_CASE("wegner scan: counts decrease with delta and respect the linear bound") {
    const auto report = wegner_scan(set256_b2(), semicircle_measure(), 0.0,
                                    {0.5, 0.2, 0.1, 0.05});
    REQUIRE(report.rows.size() == 4);
    for (const ReportRow& row : report.rows) {
        CAPTURE(row.inputs);
        CHECK(row.pass);
    }
    CHECK(report.verdict());

    // Interval of length 2*ell at the bulk center stays O(1).
    const auto bulk = wegner_scan(set256_b2(), semicircle_measure(), 0.0, {1.0});
    CHECK(bulk.rows[0].estimated <= 5.0);
    // The same interval at the top edge holds fewer eigenvalues.
    const auto edge =
        wegner_scan(set256_b2(), semicircle_measure(), semicircle_measure().B(), {1.0});
    CHECK(edge.rows[0].estimated < bulk.rows[0].estimated);

    CHECK_THROWS_AS(
        wegner_scan(set256_b2(), semicircle_measure(), 0.0, {0.1, 0.2}),
        std::invalid_argument);
}

TEST_CASE("log-field CLT: bulk variance window, diagonal structure, normality") {
    const auto report =
        clt_logfield(set512_b2(), semicircle_measure(), {0.0, 1.2, -1.2});
    for (const ReportRow& row : report.rows) {
        if (!row.gated) continue;
        CAPTURE(row.inputs);
        CAPTURE(row.estimated);
        CHECK(row.pass);
    }
    CHECK(report.verdict());

    // The fast field evaluation must match the reference observable.
    const Sample& s0 = set512_b2().samples.front();
    const Scales sc = semicircle_measure().scales(0.0, 512);
    const FieldValue ref = log_char(s0.lambdas, semicircle_measure(), cx(0.0, sc.eta));
    std::vector<double> re_vals;
    for (const Sample& s : set512_b2().samples)
        re_vals.push_back(log_char(s.lambdas, semicircle_measure(), cx(0.0, sc.eta)).re);
    const ReportRow& mean_row = find_row(report, "E=0; mean Re L");
    CHECK(mean_row.estimated == doctest::Approx(mean_var(re_vals).mean).epsilon(1e-10));
    CHECK(std::isfinite(ref.re));

    // Re-Im decoupling is exact (hence gated) only at the symmetric point.
    CHECK(find_row(report, "E=0; Corr").gated);
    CHECK_FALSE(find_row(report, "E=1.2; Corr").gated);
    CHECK_FALSE(find_row(report, "pair E=1.2, E=-1.2; Cov(Im L, Im L)").note.empty());
}

TEST_CASE("log-field CLT: input validation") {
    const auto& m = semicircle_measure();
    SampleSet tiny = set512_b2();
    tiny.samples.resize(100);
    CHECK_THROWS_AS(clt_logfield(tiny, m, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(clt_logfield(set512_b2(), m, {3.0}), std::invalid_argument);
    CHECK_THROWS_AS(clt_logfield(set512_b2(), m, {}), std::invalid_argument);
}

TEST_CASE("displacement CLT: variance ratio and correlation structure") {
    const auto report =
        gustavsson(set512_b2(), semicircle_measure(), {128, 256, 257, 384});
    const ReportRow& var_mid = find_row(report, "n=256; Var Y");
    CHECK(var_mid.estimated / var_mid.predicted > 0.7);
    CHECK(var_mid.estimated / var_mid.predicted < 1.3);
    CHECK(var_mid.pass);

    const ReportRow& adj = find_row(report, "pair n=256, n=257");
    CHECK(adj.estimated > 0.55);
    CHECK(adj.estimated < 0.97);
    CHECK(adj.pass == (adj.estimated >= 0.9));  // honest asymptotic gate

    const ReportRow& macro = find_row(report, "pair n=128, n=384");
    CHECK(std::abs(macro.estimated) <= 0.15);
    CHECK(macro.pass);

    CHECK_THROWS_AS(gustavsson(set512_b2(), semicircle_measure(), {1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(gustavsson(set512_b2(), semicircle_measure(), {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(gustavsson(set512_b2(), semicircle_measure(), {600}),
                    std::invalid_argument);
}

TEST_CASE("smooth CLT: trace statistic hits the quadrature predictions") {
    const auto report = smooth_clt(set256_b2(), semicircle_measure(),
                                   [](double x) { return x; }, [](double) { return 1.0; });
    const ReportRow& var_row = find_row(report, "Var S_N");
    CHECK(var_row.predicted == doctest::Approx(1.0).epsilon(1e-8));  // 2/beta
    CHECK(var_row.pass);
    const ReportRow& mean_row = find_row(report, "mean S_N");
    CHECK(mean_row.predicted == 0.0);
    CHECK(mean_row.pass);
    for (const ReportRow& row : report.rows) {
        if (!row.gated) continue;
        CAPTURE(row.inputs);
        CHECK(row.pass);
    }
    CHECK(report.verdict());
}

TEST_CASE("smooth CLT: quadratic statistic at beta=1 sees the mean shift") {
    const auto report = smooth_clt(set256_b1(), semicircle_measure(),
                                   [](double x) { return x * x; },
                                   [](double x) { return 2.0 * x; });
    const ReportRow& mean_row = find_row(report, "mean S_N");
    CHECK(mean_row.predicted == doctest::Approx(1.0).epsilon(1e-9));  // 2/beta - 1
    CHECK(mean_row.pass);
    const ReportRow& var_row = find_row(report, "Var S_N");
    CHECK(var_row.predicted == doctest::Approx(4.0).epsilon(1e-8));  // 4/beta at beta=1
    CHECK(var_row.pass);
    CHECK(report.verdict());
}
