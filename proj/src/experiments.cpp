#include "loggas/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "loggas/covariance.hpp"
#include "loggas/observables.hpp"
#include "loggas/stats.hpp"

namespace loggas {

namespace {

using cx = std::complex<double>;

std::string cx_str(cx z) {
    std::ostringstream os;
    os << z.real() << (z.imag() >= 0 ? "+" : "-") << std::abs(z.imag()) << "i";
    return os.str();
}

std::string echo_sample_set(const SampleSet& set) {
    int chains = 0;
    for (const Sample& s : set.samples) chains = std::max(chains, s.chain_id + 1);
    std::ostringstream os;
    os << "beta=" << set.config.beta << ", N=" << set.config.N
       << ", potential=" << set.config.potential.describe() << ", method="
       << (set.config.method == Method::mala ? "mala" : "tridiagonal")
       << ", chains=" << chains << ", samples=" << set.samples.size();
    return os.str();
}

std::string echo_oracle(double beta, const EquilibriumMeasure& m, int N) {
    std::ostringstream os;
    os << "oracle, beta=" << beta << ", N=" << N
       << ", potential=" << m.potential().describe();
    return os.str();
}

/// Splits a per-sample series into per-chain sequences (samples are ordered
/// by (chain_id, sweep_index)).
std::vector<std::vector<double>> split_chains(const SampleSet& set,
                                              const std::vector<double>& v) {
    std::vector<std::vector<double>> chains;
    int current = -1;
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        if (set.samples[i].chain_id != current) {
            current = set.samples[i].chain_id;
            chains.emplace_back();
        }
        chains.back().push_back(v[i]);
    }
    return chains;
}

/// Standard error of the mean: chain-blocked batch means for MCMC draws,
/// plain iid error otherwise.
double series_stderr(const SampleSet& set, const std::vector<double>& v) {
    if (set.config.method == Method::mala) return stderr_batch(split_chains(set, v));
    return stderr_iid(v);
}

/// Standard error of the sample variance (per-sample squared deviations fed
/// through the batch-mean machinery for MCMC).
double series_variance_stderr(const SampleSet& set, const std::vector<double>& v) {
    if (set.config.method != Method::mala) return variance_stderr(v);
    const double mean = mean_var(v).mean;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    return stderr_batch(split_chains(set, sq));
}

/// Standard error of a sample covariance via the centered product series.
double series_covariance_stderr(const SampleSet& set, const std::vector<double>& x,
                                const std::vector<double>& y) {
    const double mx = mean_var(x).mean, my = mean_var(y).mean;
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = (x[i] - mx) * (y[i] - my);
    return series_stderr(set, p);
}

/// Effective sample count: the raw count for independent draws, summed
/// per-chain Geyer ESS for MCMC.
double effective_n(const SampleSet& set, const std::vector<double>& v) {
    if (set.config.method != Method::mala) return static_cast<double>(v.size());
    double total = 0.0;
    for (const auto& chain : split_chains(set, v)) total += ess_geyer(chain);
    return std::max(1.0, total);
}

double zscore(double estimated, double predicted, double se) {
    return se > 0.0 ? (estimated - predicted) / se : 0.0;
}

ReportRow mc_zero_row(const std::string& inputs, double estimated, double se) {
    ReportRow row;
    row.inputs = inputs;
    row.predicted = 0.0;
    row.estimated = estimated;
    row.stderr_value = se;
    row.z_score = zscore(estimated, 0.0, se);
    row.pass = std::abs(row.z_score) <= 4.0;
    row.note = "exact identity; gate |z_score| <= 4";
    return row;
}

void require_off_axis(cx z) {
    if (z.imag() == 0.0)
        throw std::invalid_argument("loop equation evaluation point on the real axis");
}

int sample_size_of(const SampleSet& set) {
    if (set.samples.empty()) throw std::invalid_argument("empty sample set");
    return set.config.N;
}

double sorted_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const std::size_t idx = std::min(
        v.size() - 1,
        static_cast<std::size_t>(std::max(0.0, std::ceil(p * v.size()) - 1.0)));
    return v[idx];
}

}  // namespace

bool ExperimentReport::verdict() const {
    for (const ReportRow& row : rows)
        if (row.gated && !row.pass) return false;
    return true;
}

std::string ExperimentReport::csv() const {
    std::ostringstream os;
    os << "inputs,predicted,estimated,stderr,z_score,gated,pass,note\n";
    for (const ReportRow& row : rows) {
        os << csv_quote(row.inputs) << ',' << fmt(row.predicted) << ','
           << fmt(row.estimated) << ',' << fmt(row.stderr_value) << ','
           << fmt(row.z_score) << ',' << (row.gated ? "true" : "false") << ','
           << (row.pass ? "true" : "false") << ',' << csv_quote(row.note) << '\n';
    }
    return os.str();
}

std::string ExperimentReport::json_text() const {
    nlohmann::json j;
    j["name"] = name;
    j["config"] = config_echo;
    j["claim"] = claim;
    j["verdict"] = verdict() ? "pass" : "fail";
    j["rows"] = nlohmann::json::array();
    for (const ReportRow& row : rows) {
        j["rows"].push_back({{"inputs", row.inputs},
                             {"predicted", row.predicted},
                             {"estimated", row.estimated},
                             {"stderr", row.stderr_value},
                             {"z_score", row.z_score},
                             {"gated", row.gated},
                             {"pass", row.pass},
                             {"note", row.note}});
    }
    return j.dump(2) + "\n";
}

void ExperimentReport::write(const std::string& outdir) const {
    std::filesystem::create_directories(outdir);
    const std::filesystem::path dir(outdir);
    write_file((dir / (name + ".csv")).string(), csv());
    write_file((dir / (name + ".json")).string(), json_text());
    if (!plot.empty())
        write_svg_plot((dir / (name + ".svg")).string(), plot_title.empty() ? name : plot_title,
                       plot_xlabel, plot_ylabel, plot, plot_logx, plot_logy);
}

std::complex<double> loop_statistic(const std::vector<double>& lambdas,
                                    const EquilibriumMeasure& m, double beta, cx z,
                                    const std::vector<cx>& zs, bool drop_beta_term) {
    const double N = static_cast<double>(lambdas.size());
    const LoopObservables lo = loop_observables(lambdas, m, z, z);
    // (1/N) sum V'(l_k)/(l_k - z) = Delta + h + V'(z) s(z); P = s^2 + V' s + h.
    cx base = lo.P + lo.Delta;
    if (!drop_beta_term)
        base -= (1.0 - 2.0 / beta) / N * stieltjes_emp(lambdas, z, 1);
    if (zs.empty()) return base;

    std::vector<cx> svals(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) svals[i] = stieltjes_emp(lambdas, zs[i]);
    cx prod_all = 1.0;
    for (cx s : svals) prod_all *= s;
    cx total = base * prod_all;
    for (std::size_t j = 0; j < zs.size(); ++j) {
        cx prod_others = 1.0;
        for (std::size_t i = 0; i < zs.size(); ++i)
            if (i != j) prod_others *= svals[i];
        total += 2.0 / (N * N * beta) * f_kernel(lambdas, z, zs[j]) * prod_others;
    }
    return total;
}

namespace {

const char* kLoopClaim =
    "Loop equation: E[s(z)^2 - (1-2/beta) s'(z)/N + avg_k V'(l_k)/(l_k - z)] = 0, "
    "and its rank-n extension with the two-point kernel correction, exactly at every N";

ExperimentReport loop_mc_report(const std::string& name, const SampleSet& set,
                                const EquilibriumMeasure& m, cx z, const std::vector<cx>& zs,
                                const std::vector<cx>& extra_z_points, int threads) {
    const double beta = set.config.beta;
    const std::size_t n = set.samples.size();
    std::vector<cx> points;  // rank-1 case: several z points; rank-n: one z
    if (zs.empty()) {
        points = extra_z_points;
    } else {
        points = {z};
    }

    ExperimentReport report;
    report.name = name;
    report.config_echo = echo_sample_set(set);
    report.claim = kLoopClaim;

    const int nthreads = thread_budget(threads);
    for (cx zp : points) {
        std::vector<double> re(n), im(n);
        parallel_for(n, nthreads, [&](std::size_t i) {
            const cx v = loop_statistic(set.samples[i].lambdas, m, beta, zp, zs);
            re[i] = v.real();
            im[i] = v.imag();
        });
        std::string base = "z=" + cx_str(zp);
        if (!zs.empty()) {
            base += "; aux=";
            for (std::size_t i = 0; i < zs.size(); ++i)
                base += (i ? "," : "") + cx_str(zs[i]);
        }
        report.rows.push_back(
            mc_zero_row(base + "; component=Re", mean_var(re).mean, series_stderr(set, re)));
        report.rows.push_back(
            mc_zero_row(base + "; component=Im", mean_var(im).mean, series_stderr(set, im)));
    }

    if (set.config.beta == 2.0 && zs.empty() && !points.empty()) {
        // The (1 - 2/beta) coefficient is exactly zero: dropping the term
        // must not change any per-sample value.
        const cx zp = points.front();
        double worst = 0.0;
        for (const Sample& s : set.samples) {
            const cx with = loop_statistic(s.lambdas, m, beta, zp, {});
            const cx without = loop_statistic(s.lambdas, m, beta, zp, {}, true);
            worst = std::max(worst, std::abs(with - without));
        }
        ReportRow row;
        row.inputs = "z=" + cx_str(zp) + "; drop (1-2/beta) term at beta=2";
        row.predicted = 0.0;
        row.estimated = worst;
        row.pass = worst <= 1e-12;
        row.note = "coefficient is exactly zero; max per-sample difference";
        report.rows.push_back(row);
    }
    return report;
}

ExperimentReport loop_oracle_report(const std::string& name, const Oracle& oracle, double beta,
                                    const EquilibriumMeasure& m, const std::vector<cx>& points,
                                    const std::vector<cx>& zs, double tol) {
    ExperimentReport report;
    report.name = name;
    report.claim = kLoopClaim;

    std::vector<std::function<double(const std::vector<double>&)>> gs;
    for (cx zp : points) {
        gs.push_back([&m, beta, zp, zs](const std::vector<double>& l) {
            return loop_statistic(l, m, beta, zp, zs).real();
        });
        gs.push_back([&m, beta, zp, zs](const std::vector<double>& l) {
            return loop_statistic(l, m, beta, zp, zs).imag();
        });
    }
    const std::vector<double> values = oracle.expectations(gs);
    report.config_echo = echo_oracle(beta, m, oracle.n());

    for (std::size_t p = 0; p < points.size(); ++p) {
        std::string base = "z=" + cx_str(points[p]);
        if (!zs.empty()) {
            base += "; aux=";
            for (std::size_t i = 0; i < zs.size(); ++i)
                base += (i ? "," : "") + cx_str(zs[i]);
        }
        for (int comp = 0; comp < 2; ++comp) {
            ReportRow row;
            row.inputs = base + (comp == 0 ? "; component=Re" : "; component=Im");
            row.predicted = 0.0;
            row.estimated = values[2 * p + comp];
            row.stderr_value = 0.0;
            row.z_score = 0.0;
            row.pass = std::abs(row.estimated) <= tol;
            std::ostringstream note;
            note << "quadrature residual gate " << tol << "; refinement error "
                 << oracle.last_refinement_error();
            row.note = note.str();
            report.rows.push_back(row);
        }
    }
    return report;
}

}  // namespace

ExperimentReport verify_loop_rank1(const SampleSet& samples, const EquilibriumMeasure& m,
                                   const std::vector<cx>& z_points, int threads) {
    if (z_points.empty()) throw std::invalid_argument("no evaluation points");
    for (cx z : z_points) require_off_axis(z);
    sample_size_of(samples);
    return loop_mc_report("verify_loop_rank1", samples, m, 0.0, {}, z_points, threads);
}

ExperimentReport verify_loop_rank1(const Oracle& oracle, double beta,
                                   const EquilibriumMeasure& m, const std::vector<cx>& z_points) {
    if (z_points.empty()) throw std::invalid_argument("no evaluation points");
    for (cx z : z_points) require_off_axis(z);
    return loop_oracle_report("verify_loop_rank1", oracle, beta, m, z_points, {}, 1e-8);
}

ExperimentReport verify_loop_rankn(const SampleSet& samples, const EquilibriumMeasure& m, cx z,
                                   const std::vector<cx>& zs, int threads) {
    if (zs.empty() || zs.size() > 4)
        throw std::invalid_argument("auxiliary point count must be in [1, 4]");
    require_off_axis(z);
    for (cx w : zs) require_off_axis(w);
    sample_size_of(samples);
    return loop_mc_report("verify_loop_rankn", samples, m, z, zs, {}, threads);
}

ExperimentReport verify_loop_rankn(const Oracle& oracle, double beta,
                                   const EquilibriumMeasure& m, cx z,
                                   const std::vector<cx>& zs) {
    if (zs.empty() || zs.size() > 4)
        throw std::invalid_argument("auxiliary point count must be in [1, 4]");
    require_off_axis(z);
    for (cx w : zs) require_off_axis(w);
    return loop_oracle_report("verify_loop_rankn", oracle, beta, m, {z}, zs, 1e-7);
}

ExperimentReport local_law_scan(const SampleSet& samples, const EquilibriumMeasure& m, double E,
                                const std::vector<double>& etas, int q, double eta_max,
                                int threads) {
    if (etas.size() < 4) throw std::invalid_argument("fewer than 4 eta points");
    for (double eta : etas)
        if (!(eta > 0.0) || eta > eta_max)
            throw std::invalid_argument("eta outside (0, eta_max]");
    if (E < m.A() - eta_max || E > m.B() + eta_max)
        throw std::invalid_argument("energy outside the spectral window");
    if (q < 1) throw std::invalid_argument("moment order q must be >= 1");
    const std::size_t n = samples.samples.size();
    sample_size_of(samples);

    ExperimentReport report;
    report.name = "local_law_scan";
    report.config_echo = echo_sample_set(samples);
    report.claim =
        "Local law: E|s_N - m_V|^{2q} at z = E + i*eta decays like (N eta)^{-2q} "
        "down to microscopic eta in the bulk";

    const int nthreads = thread_budget(threads);
    std::vector<double> log_eta, log_moment;
    SvgSeries data_series{"E|s-m|^{2q}", {}, false};
    for (double eta : etas) {
        const cx z(E, eta);
        const cx mv = m.stieltjes(z);
        std::vector<double> momv(n);
        parallel_for(n, nthreads, [&](std::size_t i) {
            const cx d = stieltjes_emp(samples.samples[i].lambdas, z) - mv;
            momv[i] = std::pow(std::norm(d), q);
        });
        const double est = mean_var(momv).mean;
        const double se = series_stderr(samples, momv);

        ReportRow row;
        row.inputs = "eta=" + fmt(eta);
        row.predicted = 0.0;
        row.estimated = est;
        row.stderr_value = se;
        row.gated = false;
        row.note = "scan point (slope is the prediction)";
        report.rows.push_back(row);

        log_eta.push_back(std::log(eta));
        log_moment.push_back(std::log(est));
        data_series.points.emplace_back(eta, est);
    }

    const SlopeFit fit = least_squares(log_eta, log_moment);
    // Slope standard error from the fit residuals.
    double ss_res = 0.0, ss_x = 0.0, mean_x = mean_var(log_eta).mean;
    for (std::size_t i = 0; i < log_eta.size(); ++i) {
        const double r = log_moment[i] - fit.slope * log_eta[i] - fit.intercept;
        ss_res += r * r;
        ss_x += (log_eta[i] - mean_x) * (log_eta[i] - mean_x);
    }
    const double slope_se =
        log_eta.size() > 2 ? std::sqrt(ss_res / (log_eta.size() - 2) / ss_x) : 0.0;

    ReportRow slope_row;
    slope_row.inputs = "log-log slope over " + std::to_string(etas.size()) + " eta points";
    slope_row.predicted = -2.0 * q;
    slope_row.estimated = fit.slope;
    slope_row.stderr_value = slope_se;
    slope_row.z_score = zscore(fit.slope, -2.0 * q, slope_se);
    slope_row.pass = std::abs(fit.slope + 2.0 * q) <= 0.2 * q;
    slope_row.note = "window +-0.2q around -2q";
    report.rows.push_back(slope_row);

    SvgSeries fit_series{"fitted slope", {}, true};
    for (double le : {log_eta.front(), log_eta.back()})
        fit_series.points.emplace_back(std::exp(le), std::exp(fit.intercept + fit.slope * le));
    report.plot = {data_series, fit_series};
    report.plot_title = "local law moment scan";
    report.plot_xlabel = "eta";
    report.plot_ylabel = "E|s_N - m_V|^{2q}";
    report.plot_logx = report.plot_logy = true;
    return report;
}

ExperimentReport rigidity_profile(const std::vector<SampleSet>& sample_sets,
                                  const EquilibriumMeasure& m, double bulk_fraction,
                                  int threads) {
    if (sample_sets.empty()) throw std::invalid_argument("no sample sets");
    if (!(bulk_fraction > 0.0 && bulk_fraction < 0.5))
        throw std::invalid_argument("bulk_fraction outside (0, 0.5)");
    for (std::size_t i = 1; i < sample_sets.size(); ++i)
        if (sample_sets[i].config.N <= sample_sets[i - 1].config.N)
            throw std::invalid_argument("sizes must be strictly increasing");

    ExperimentReport report;
    report.name = "rigidity_profile";
    report.config_echo = echo_sample_set(sample_sets.front()) + " ... N up to " +
                         std::to_string(sample_sets.back().config.N);
    report.claim =
        "Rigidity: bulk eigenvalues sit within log N * N^{-2/3} khat^{-1/3} of their "
        "classical locations, with a constant bounded in N";

    const int nthreads = thread_budget(threads);
    std::vector<double> constants;
    SvgSeries series{"0.99-quantile constant", {}, true};
    for (const SampleSet& set : sample_sets) {
        const int N = sample_size_of(set);
        const int a = std::max(1, static_cast<int>(std::ceil(bulk_fraction * N)));
        const int b = N - a;
        if (a > b) throw std::invalid_argument("bulk window empty");
        std::vector<double> gamma(b - a + 1);
        for (int k = a; k <= b; ++k) gamma[k - a] = m.quantile(k, N);

        const double n23 = std::pow(static_cast<double>(N), 2.0 / 3.0);
        const double logN = std::log(static_cast<double>(N));
        const std::size_t n = set.samples.size();
        std::vector<double> maxima(n);
        parallel_for(n, nthreads, [&](std::size_t i) {
            const std::vector<double>& l = set.samples[i].lambdas;
            double worst = 0.0;
            for (int k = a; k <= b; ++k) {
                const double khat = std::min(k, N + 1 - k);
                const double v =
                    n23 * std::cbrt(khat) * std::abs(l[k - 1] - gamma[k - a]) / logN;
                worst = std::max(worst, v);
            }
            maxima[i] = worst;
        });

        const double est = sorted_quantile(maxima, 0.99);
        // Order-statistic error band: quantile positions at 0.99 +- 1.96
        // binomial standard deviations.
        std::vector<double> sorted = maxima;
        std::sort(sorted.begin(), sorted.end());
        const double sd = std::sqrt(0.99 * 0.01 / n);
        auto pos = [&](double p) {
            const double clamped = std::clamp(p, 0.0, 1.0);
            return sorted[std::min(n - 1, static_cast<std::size_t>(std::max(
                                              0.0, std::ceil(clamped * n) - 1.0)))];
        };
        const double se = (pos(0.99 + 1.96 * sd) - pos(0.99 - 1.96 * sd)) / (2 * 1.96);

        ReportRow row;
        row.inputs = "N=" + std::to_string(N);
        row.predicted = 0.0;
        row.estimated = est;
        row.stderr_value = se;
        row.gated = false;
        row.note = "profile point (boundedness is the claim)";
        report.rows.push_back(row);
        constants.push_back(est);
        series.points.emplace_back(static_cast<double>(N), est);
    }

    const double lo = *std::min_element(constants.begin(), constants.end());
    const double hi = *std::max_element(constants.begin(), constants.end());
    ReportRow verdict_row;
    verdict_row.inputs = "max/min of the per-N constants";
    verdict_row.predicted = 2.0;
    verdict_row.estimated = hi / lo;
    verdict_row.pass = hi / lo < 2.0;
    verdict_row.note = "no doubling across the size range (gate: ratio < 2)";
    report.rows.push_back(verdict_row);

    report.plot = {series};
    report.plot_title = "rigidity constant vs N";
    report.plot_xlabel = "N";
    report.plot_ylabel = "0.99-quantile of the normalized max displacement";
    report.plot_logx = true;
    return report;
}

ExperimentReport edge_tail(const SampleSet& samples, const EquilibriumMeasure& m,
                           const std::vector<double>& xs, int /*threads*/) {
    const int N = sample_size_of(samples);
    if (xs.empty()) throw std::invalid_argument("no x values");
    const double n23 = std::pow(static_cast<double>(N), 2.0 / 3.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < 0.0 || xs[i] > n23)
            throw std::invalid_argument("x outside [0, N^{2/3}]");
        if (i > 0 && xs[i] <= xs[i - 1])
            throw std::invalid_argument("xs must be strictly increasing");
    }

    ExperimentReport report;
    report.name = "edge_tail";
    report.config_echo = echo_sample_set(samples);
    report.claim =
        "Edge confinement: P(an eigenvalue exits [A - x N^{-2/3}, B + x N^{-2/3}]) "
        "decays stretched-exponentially in x";

    const std::size_t n = samples.samples.size();
    const double scale = 1.0 / n23;
    std::vector<double> survival;
    SvgSeries series{"survival", {}, true};
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        const double lo = m.A() - xs[xi] * scale, hi = m.B() + xs[xi] * scale;
        std::size_t exceed = 0;
        for (const Sample& s : samples.samples)
            if (s.lambdas.front() < lo || s.lambdas.back() > hi) ++exceed;
        const double p = static_cast<double>(exceed) / n;
        const WilsonInterval wi = wilson_interval(exceed, n);
        const double se =
            (p > 0.0 && p < 1.0) ? std::sqrt(p * (1 - p) / n) : (wi.hi - wi.lo) / 3.92;

        ReportRow row;
        row.inputs = "x=" + fmt(xs[xi]);
        row.predicted = 0.0;
        row.estimated = p;
        row.stderr_value = se;
        row.gated = true;
        if (xi == 0) {
            row.pass = p > 0.0 && p < 1.0;
            row.note = "baseline survival in (0,1); Wilson [" + fmt(wi.lo) + ", " +
                       fmt(wi.hi) + "]";
        } else {
            // Nested events on the same draws: monotone by construction.
            row.pass = p <= survival.back() + 1e-15;
            row.note = "non-increasing (nested events); Wilson [" + fmt(wi.lo) + ", " +
                       fmt(wi.hi) + "]";
        }
        report.rows.push_back(row);
        survival.push_back(p);
        series.points.emplace_back(xs[xi], p);
    }

    // Stretched exponent: P(x) ~ P(0) exp(-c x^p) so
    // log(log P(0) - log P(x)) ~ p log x.
    std::vector<double> fx, fy;
    for (std::size_t xi = 1; xi < xs.size(); ++xi) {
        if (xs[xi] > 0.0 && survival[xi] > 0.0 && survival[xi] < survival[0]) {
            fx.push_back(std::log(xs[xi]));
            fy.push_back(std::log(std::log(survival[0] / survival[xi])));
        }
    }
    ReportRow fit_row;
    fit_row.inputs = "stretched-exponential exponent fit";
    fit_row.predicted = 1.5;
    if (fx.size() >= 2) {
        const SlopeFit fit = least_squares(fx, fy);
        double ss_res = 0.0, ss_x = 0.0, mean_x = mean_var(fx).mean;
        for (std::size_t i = 0; i < fx.size(); ++i) {
            const double r = fy[i] - fit.slope * fx[i] - fit.intercept;
            ss_res += r * r;
            ss_x += (fx[i] - mean_x) * (fx[i] - mean_x);
        }
        fit_row.estimated = fit.slope;
        fit_row.stderr_value =
            fx.size() > 2 ? std::sqrt(ss_res / (fx.size() - 2) / ss_x) : 0.0;
        fit_row.pass = fit.slope >= 0.7 && fit.slope <= 1.7;
        fit_row.note = "gate [0.7, 1.7]; proven lower bound 3/4, Gaussian-ensemble truth 3/2";
    } else {
        fit_row.estimated = 0.0;
        fit_row.pass = false;
        fit_row.note = "insufficient exceedance counts for the exponent fit";
    }
    report.rows.push_back(fit_row);

    report.plot = {series};
    report.plot_title = "edge exceedance survival";
    report.plot_xlabel = "x";
    report.plot_ylabel = "P(spectrum exits the x-enlarged support)";
    report.plot_logy = true;
    return report;
}

ExperimentReport wegner_scan(const SampleSet& samples, const EquilibriumMeasure& m, double E,
                             const std::vector<double>& deltas, int /*threads*/) {
    const int N = sample_size_of(samples);
    if (deltas.empty()) throw std::invalid_argument("no delta values");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw std::invalid_argument("delta must be positive");
        if (i > 0 && deltas[i] >= deltas[i - 1])
            throw std::invalid_argument("deltas must be strictly decreasing");
    }

    ExperimentReport report;
    report.name = "wegner_scan";
    report.config_echo = echo_sample_set(samples);
    report.claim =
        "No eigenvalue pile-up: the expected count in [E - delta*ell, E + delta*ell] "
        "is at most linear in delta with an O(1) cap";

    const double ell = m.scales(E, N).ell;
    const std::size_t n = samples.samples.size();
    double prev = 0.0;
    SvgSeries series{"E[count]", {}, true};
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        const double d = deltas[di];
        std::vector<double> counts(n);
        for (std::size_t i = 0; i < n; ++i)
            counts[i] = count_interval(samples.samples[i].lambdas, E - d * ell, E + d * ell);
        const double est = mean_var(counts).mean;
        const double se = series_stderr(samples, counts);
        const double predicted = N * (m.cdf(E + d * ell) - m.cdf(E - d * ell));

        ReportRow row;
        row.inputs = "delta=" + fmt(d);
        row.predicted = predicted;
        row.estimated = est;
        row.stderr_value = se;
        row.z_score = zscore(est, predicted, se);
        row.pass = est <= 4.0 * d + 0.5 && (di == 0 || est <= prev + 1e-12);
        row.note = "gates: count <= 4*delta + 0.5 and non-increasing; predicted = "
                   "equilibrium mass (informational)";
        report.rows.push_back(row);
        prev = est;
        series.points.emplace_back(d, est);
    }

    report.plot = {series};
    report.plot_title = "expected count vs interval half-width";
    report.plot_xlabel = "delta";
    report.plot_ylabel = "E[count in E +- delta*ell]";
    report.plot_logx = report.plot_logy = true;
    return report;
}

// True when the equilibrium density is even about the support midpoint
// (equivalently, the ensemble is invariant under reflection).  Tested by
// Taylor-shifting the density polynomial factor to the midpoint and checking
// that the odd coefficients vanish.
static bool symmetric_about_mid(const EquilibriumMeasure& m) {
    const double mid = 0.5 * (m.A() + m.B());
    std::vector<double> p = m.r_coeffs();
    const std::size_t terms = p.size();
    std::vector<double> shifted;
    double fact = 1.0;
    for (std::size_t k = 0; k < terms; ++k) {
        shifted.push_back(polyval(p, mid) / fact);
        p = polyder(p);
        fact *= static_cast<double>(k + 1);
    }
    double top = 0.0;
    for (double c : shifted) top = std::max(top, std::abs(c));
    for (std::size_t k = 1; k < shifted.size(); k += 2)
        if (std::abs(shifted[k]) > 1e-9 * top) return false;
    return true;
}

ExperimentReport clt_logfield(const SampleSet& samples, const EquilibriumMeasure& m,
                              const std::vector<double>& energies, int threads) {
    const int N = sample_size_of(samples);
    const std::size_t n = samples.samples.size();
    if (n < 500) throw std::invalid_argument("underpowered: fewer than 500 samples");
    if (energies.empty()) throw std::invalid_argument("no energies");
    for (double E : energies)
        if (E < m.A() || E > m.B())
            throw std::invalid_argument("energy outside the support");

    const double beta = samples.config.beta;
    const double logN = std::log(static_cast<double>(N));
    const double rad = 0.5 * (m.B() - m.A());
    const std::size_t ne = energies.size();

    struct PointInfo {
        double E, kappa, eta, cut;
        cx z, U;
        bool bulk;
    };
    std::vector<PointInfo> pts(ne);
    for (std::size_t l = 0; l < ne; ++l) {
        const Scales sc = m.scales(energies[l], N);
        pts[l].E = energies[l];
        pts[l].kappa = sc.kappa;
        pts[l].eta = sc.eta;
        pts[l].cut = std::max(sc.kappa, sc.eta);
        pts[l].z = cx(energies[l], sc.eta);
        pts[l].U = m.log_potential(pts[l].z);
        pts[l].bulk = sc.kappa >= 0.1 * rad;
    }

    // Field values: L_N(z) = sum log(z - l_k) - N U(z); Im z > 0 keeps the
    // principal log on the correct branch (matches log_char).
    std::vector<std::vector<double>> R(ne, std::vector<double>(n));
    std::vector<std::vector<double>> I(ne, std::vector<double>(n));
    const int nthreads = thread_budget(threads);
    parallel_for(n, nthreads, [&](std::size_t i) {
        const std::vector<double>& l = samples.samples[i].lambdas;
        for (std::size_t p = 0; p < ne; ++p) {
            cx sum = 0.0;
            for (double lam : l) sum += std::log(pts[p].z - lam);
            R[p][i] = sum.real() - N * pts[p].U.real();
            I[p][i] = sum.imag() - N * pts[p].U.imag();
        }
    });

    ExperimentReport report;
    report.name = "clt_logfield";
    report.config_echo = echo_sample_set(samples);
    report.claim =
        "Log-correlated field: Re/Im of the centered log characteristic polynomial are "
        "asymptotically Gaussian with logarithmic covariance and a (2/beta - 1) mean shift";

    std::vector<double> var_im(ne), var_re(ne);
    for (std::size_t p = 0; p < ne; ++p) {
        var_re[p] = mean_var(R[p]).var;
        var_im[p] = mean_var(I[p]).var;
    }

    for (std::size_t p = 0; p < ne; ++p) {
        const std::string at = "E=" + fmt(pts[p].E);

        ReportRow mean_row;
        mean_row.inputs = at + "; mean Re L";
        mean_row.predicted = clt_mean_shift(beta, pts[p].kappa, N);
        mean_row.estimated = mean_var(R[p]).mean;
        mean_row.stderr_value = series_stderr(samples, R[p]);
        mean_row.z_score = zscore(mean_row.estimated, mean_row.predicted, mean_row.stderr_value);
        if (beta == 2.0) {
            mean_row.pass = std::abs(mean_row.z_score) <= 4.0;
            mean_row.note = "shift is exactly zero at beta=2; gate |z_score| <= 4";
        } else {
            mean_row.gated = false;
            mean_row.note = "informational: shift converges only like a power of 1/log N";
        }
        report.rows.push_back(mean_row);

        ReportRow vi;
        vi.inputs = at + "; Var Im L";
        vi.predicted = clt_cov_imim(beta, pts[p].z, pts[p].cut, pts[p].z, pts[p].cut).value;
        vi.estimated = var_im[p];
        vi.stderr_value = series_variance_stderr(samples, I[p]);
        vi.z_score = zscore(vi.estimated, vi.predicted, vi.stderr_value);
        const double normalized = vi.estimated * beta / logN;
        const double pred_normalized = vi.predicted * beta / logN;
        if (pts[p].bulk && pred_normalized >= 0.75 && pred_normalized <= 1.25) {
            vi.pass = normalized >= 0.7 && normalized <= 1.3;
            vi.note = "bulk gate: beta*Var/log N = " + fmt(normalized) + " in [0.7, 1.3]";
        } else if (pts[p].bulk) {
            vi.gated = false;
            vi.note = "informational: finite-N surrogate predicts beta*Var/log N = " +
                      fmt(pred_normalized) + ", outside the comfortable asymptotic window";
        } else {
            vi.gated = false;
            vi.note = "edge point: informational";
        }
        report.rows.push_back(vi);

        ReportRow vr;
        vr.inputs = at + "; Var Re L";
        vr.predicted = clt_cov_rere(beta, pts[p].z, pts[p].z);
        vr.estimated = var_re[p];
        vr.stderr_value = series_variance_stderr(samples, R[p]);
        vr.z_score = zscore(vr.estimated, vr.predicted, vr.stderr_value);
        vr.gated = false;
        vr.note = "informational: -(1/beta) log(2 eta)";
        report.rows.push_back(vr);

        ReportRow cross;
        cross.inputs = at + "; Corr(Re L, Im L)";
        cross.predicted = 0.0;
        const double cov_ri = covariance(R[p], I[p]);
        cross.estimated = cov_ri / std::sqrt(var_re[p] * var_im[p]);
        cross.stderr_value = 1.0 / std::sqrt(effective_n(samples, R[p]));
        cross.z_score = zscore(cross.estimated, 0.0, cross.stderr_value);
        // Reflection symmetry kills the Re-Im coupling exactly (at any N) only
        // for an even ensemble probed at its midpoint; elsewhere it decays
        // like 1/log N and an asymptotic window would misfire.
        const double mid = 0.5 * (m.A() + m.B());
        if (symmetric_about_mid(m) && std::abs(pts[p].E - mid) <= 1e-12 * rad) {
            cross.pass = std::abs(cross.estimated) <= 0.1;
            cross.note = "diagonal covariance structure: gate |corr| <= 0.1";
        } else {
            cross.gated = false;
            cross.note = "informational: Re-Im coupling vanishes only like 1/log N away "
                         "from a symmetric point";
        }
        report.rows.push_back(cross);

        for (int comp = 0; comp < 2; ++comp) {
            const std::vector<double>& series = comp == 0 ? R[p] : I[p];
            const double neff = effective_n(samples, series);
            ReportRow skew_row;
            skew_row.inputs =
                at + (comp == 0 ? "; skewness Re L" : "; skewness Im L");
            skew_row.estimated = skewness(series);
            skew_row.stderr_value = std::sqrt(6.0 / neff);
            skew_row.z_score = zscore(skew_row.estimated, 0.0, skew_row.stderr_value);
            skew_row.pass = std::abs(skew_row.z_score) <= 10.0;
            skew_row.note = "normality z-test; gate |z| <= 10";
            report.rows.push_back(skew_row);

            ReportRow kurt_row;
            kurt_row.inputs =
                at + (comp == 0 ? "; excess kurtosis Re L" : "; excess kurtosis Im L");
            kurt_row.estimated = excess_kurtosis(series);
            kurt_row.stderr_value = std::sqrt(24.0 / neff);
            kurt_row.z_score = zscore(kurt_row.estimated, 0.0, kurt_row.stderr_value);
            kurt_row.pass = std::abs(kurt_row.z_score) <= 10.0;
            kurt_row.note = "normality z-test; gate |z| <= 10";
            report.rows.push_back(kurt_row);
        }
    }

    for (std::size_t p = 0; p < ne; ++p) {
        for (std::size_t q = p + 1; q < ne; ++q) {
            const std::string at = "pair E=" + fmt(pts[p].E) + ", E=" + fmt(pts[q].E);
            const double sep = std::abs(pts[p].E - pts[q].E);
            const bool macro = sep >= 0.5;

            const SymmetrizedCov pred =
                clt_cov_imim(beta, pts[p].z, pts[p].cut, pts[q].z, pts[q].cut);
            ReportRow imim;
            imim.inputs = at + "; Cov(Im L, Im L)";
            imim.predicted = pred.value;
            imim.estimated = covariance(I[p], I[q]);
            imim.stderr_value = series_covariance_stderr(samples, I[p], I[q]);
            imim.z_score = zscore(imim.estimated, imim.predicted, imim.stderr_value);
            const double corr = imim.estimated / std::sqrt(var_im[p] * var_im[q]);
            const double pred_vp =
                clt_cov_imim(beta, pts[p].z, pts[p].cut, pts[p].z, pts[p].cut).value;
            const double pred_vq =
                clt_cov_imim(beta, pts[q].z, pts[q].cut, pts[q].z, pts[q].cut).value;
            const double pred_corr = pred.value / std::sqrt(pred_vp * pred_vq);
            if (macro && std::abs(pred_corr) <= 0.05) {
                imim.pass = std::abs(corr) <= 0.15;
                imim.note = "macroscopic pair gate: |corr| = " + fmt(std::abs(corr)) +
                            " <= 0.15; prediction discrepancy " + fmt(pred.discrepancy);
            } else if (macro) {
                imim.gated = false;
                imim.note = "informational: macroscopic pair, but the finite-N surrogate "
                            "still predicts corr = " + fmt(pred_corr);
            } else if (pts[p].bulk && pts[q].bulk) {
                imim.pass = pred.discrepancy < 0.10;
                imim.note = "bulk pair: symmetrization discrepancy " +
                            fmt(pred.discrepancy) + " gated < 0.10; corr = " + fmt(corr);
            } else {
                imim.gated = false;
                imim.note = "informational; corr = " + fmt(corr);
            }
            report.rows.push_back(imim);

            ReportRow rere;
            rere.inputs = at + "; Cov(Re L, Re L)";
            rere.predicted = clt_cov_rere(beta, pts[p].z, pts[q].z);
            rere.estimated = covariance(R[p], R[q]);
            rere.stderr_value = series_covariance_stderr(samples, R[p], R[q]);
            rere.z_score = zscore(rere.estimated, rere.predicted, rere.stderr_value);
            rere.gated = false;
            rere.note = "informational: -(1/beta) log|conj(z_l) - z_j|";
            report.rows.push_back(rere);
        }
    }
    return report;
}

ExperimentReport gustavsson(const SampleSet& samples, const EquilibriumMeasure& m,
                            const std::vector<long>& indices, int threads) {
    const int N = sample_size_of(samples);
    const std::size_t n = samples.samples.size();
    if (n < 500) throw std::invalid_argument("underpowered: fewer than 500 samples");
    if (indices.empty()) throw std::invalid_argument("no indices");
    const double bulk_floor = std::pow(static_cast<double>(N), 0.1);
    for (long k : indices) {
        if (k < 1 || k > N) throw std::invalid_argument("index outside [1, N]");
        if (std::min<double>(k, N + 1 - k) < bulk_floor)
            throw std::invalid_argument("index outside the bulk (khat < N^0.1)");
    }

    const double beta = samples.config.beta;
    const std::size_t ni = indices.size();
    std::vector<std::vector<double>> Y(ni, std::vector<double>(n));
    const int nthreads = thread_budget(threads);
    parallel_for(n, nthreads, [&](std::size_t i) {
        for (std::size_t p = 0; p < ni; ++p)
            Y[p][i] = displacement(samples.samples[i].lambdas, m, beta,
                                   static_cast<int>(indices[p]));
    });

    ExperimentReport report;
    report.name = "gustavsson";
    report.config_echo = echo_sample_set(samples);
    report.claim =
        "Displacement CLT: normalized eigenvalue displacements Y_N(n) are asymptotically "
        "Gaussian with the log-ratio covariance matrix";

    std::vector<double> vars(ni);
    for (std::size_t p = 0; p < ni; ++p) vars[p] = mean_var(Y[p]).var;

    for (std::size_t p = 0; p < ni; ++p) {
        ReportRow row;
        row.inputs = "n=" + std::to_string(indices[p]) + "; Var Y";
        row.predicted = displacement_cov(m, N, indices[p], indices[p]).value;
        row.estimated = vars[p];
        row.stderr_value = series_variance_stderr(samples, Y[p]);
        row.z_score = zscore(row.estimated, row.predicted, row.stderr_value);
        const double ratio = row.estimated / row.predicted;
        row.pass = ratio >= 0.7 && ratio <= 1.3;
        row.note = "gate: estimated/predicted = " + fmt(ratio) + " in [0.7, 1.3]";
        report.rows.push_back(row);
    }

    for (std::size_t p = 0; p < ni; ++p) {
        for (std::size_t q = p + 1; q < ni; ++q) {
            const SymmetrizedCov pred = displacement_cov(m, N, indices[p], indices[q]);
            const double pred_diag_p = displacement_cov(m, N, indices[p], indices[p]).value;
            const double pred_diag_q = displacement_cov(m, N, indices[q], indices[q]).value;
            const double pred_corr = pred.value / std::sqrt(pred_diag_p * pred_diag_q);

            ReportRow row;
            row.inputs = "pair n=" + std::to_string(indices[p]) + ", n=" +
                         std::to_string(indices[q]) + "; Corr(Y, Y)";
            row.predicted = pred_corr;
            const double cov = covariance(Y[p], Y[q]);
            row.estimated = cov / std::sqrt(vars[p] * vars[q]);
            row.stderr_value = (1.0 - row.estimated * row.estimated) /
                               std::sqrt(effective_n(samples, Y[p]));
            row.z_score = zscore(row.estimated, row.predicted, row.stderr_value);

            const double gsep =
                std::abs(m.quantile(static_cast<int>(indices[p]), N) -
                         m.quantile(static_cast<int>(indices[q]), N));
            if (std::abs(indices[p] - indices[q]) == 1) {
                row.pass = row.estimated >= 0.9;
                row.note = "adjacent gate: corr -> 1 within 0.1 (asymptotic; finite-N "
                           "surrogate predicts " + fmt(pred_corr) + ")";
            } else if (gsep >= 0.5 && std::abs(pred_corr) <= 0.05) {
                row.pass = std::abs(row.estimated) <= 0.15;
                row.note = "macroscopic gate: |corr| <= 0.15";
            } else if (gsep >= 0.5) {
                row.gated = false;
                row.note = "informational: macroscopic separation, but the finite-N "
                           "surrogate still predicts corr = " + fmt(pred_corr);
            } else {
                row.gated = false;
                row.note = "informational; surrogate discrepancy " + fmt(pred.discrepancy);
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

ExperimentReport smooth_clt(const SampleSet& samples, const EquilibriumMeasure& m,
                            const std::function<double(double)>& f,
                            const std::function<double(double)>& fprime, int threads) {
    sample_size_of(samples);
    const std::size_t n = samples.samples.size();
    const double beta = samples.config.beta;
    const double sigma2 = sigma2_quadrature(m, beta, f, fprime);
    const double delta = delta_quadrature(m, beta, f);

    std::vector<double> S(n);
    const int nthreads = thread_budget(threads);
    parallel_for(n, nthreads, [&](std::size_t i) {
        S[i] = linear_stat(samples.samples[i].lambdas, m, f);
    });

    ExperimentReport report;
    report.name = "smooth_clt";
    report.config_echo = echo_sample_set(samples);
    report.claim =
        "Smooth linear statistics: S_N(f) is asymptotically Gaussian with mean delta(f) "
        "and variance sigma^2(f), with matching log moment generating function";

    const MeanVar mv = mean_var(S);

    ReportRow mean_row;
    mean_row.inputs = "mean S_N(f)";
    mean_row.predicted = delta;
    mean_row.estimated = mv.mean;
    mean_row.stderr_value = series_stderr(samples, S);
    mean_row.z_score = zscore(mv.mean, delta, mean_row.stderr_value);
    mean_row.pass = std::abs(mean_row.z_score) <= 4.0;
    mean_row.note = "gate |z_score| <= 4 vs the mean-shift quadrature";
    report.rows.push_back(mean_row);

    ReportRow var_row;
    var_row.inputs = "Var S_N(f)";
    var_row.predicted = sigma2;
    var_row.estimated = mv.var;
    var_row.stderr_value = series_variance_stderr(samples, S);
    var_row.z_score = zscore(mv.var, sigma2, var_row.stderr_value);
    var_row.pass = std::abs(var_row.z_score) <= 4.0;
    var_row.note = "gate |z_score| <= 4 vs the variance quadrature";
    report.rows.push_back(var_row);

    for (double t : {-0.5, -0.25, 0.25, 0.5}) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(t * S[i]);
        const MeanVar my = mean_var(y);
        ReportRow row;
        row.inputs = "log MGF at t=" + fmt(t);
        row.predicted = 0.5 * t * t * sigma2 + t * delta;
        row.estimated = std::log(my.mean);
        row.stderr_value = series_stderr(samples, y) / my.mean;
        row.z_score = zscore(row.estimated, row.predicted, row.stderr_value);
        row.pass = std::abs(row.z_score) <= 4.0;
        row.note = "gate |z_score| <= 4 vs t^2 sigma^2/2 + t delta";
        report.rows.push_back(row);
    }

    const double neff = effective_n(samples, S);
    ReportRow skew_row;
    skew_row.inputs = "skewness S_N(f)";
    skew_row.estimated = skewness(S);
    skew_row.stderr_value = std::sqrt(6.0 / neff);
    skew_row.z_score = zscore(skew_row.estimated, 0.0, skew_row.stderr_value);
    skew_row.gated = false;
    skew_row.note = "informational normality check";
    report.rows.push_back(skew_row);

    ReportRow kurt_row;
    kurt_row.inputs = "excess kurtosis S_N(f)";
    kurt_row.estimated = excess_kurtosis(S);
    kurt_row.stderr_value = std::sqrt(24.0 / neff);
    kurt_row.z_score = zscore(kurt_row.estimated, 0.0, kurt_row.stderr_value);
    kurt_row.gated = false;
    kurt_row.note = std::abs(kurt_row.z_score) > 10.0
                        ? "heavy-tail warning: kurtosis z-test failed hard (|z| > 10)"
                        : "informational normality check";
    report.rows.push_back(kurt_row);

    return report;
}

}  // namespace loggas
