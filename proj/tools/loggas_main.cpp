#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "loggas/config.hpp"
#include "loggas/equilibrium.hpp"
#include "loggas/errors.hpp"
#include "loggas/experiments.hpp"
#include "loggas/io.hpp"
#include "loggas/observables.hpp"
#include "loggas/oracle.hpp"
#include "loggas/potential.hpp"
#include "loggas/sampler.hpp"

namespace fs = std::filesystem;
using loggas::ExperimentReport;
using loggas::RunConfig;

namespace {

loggas::EquilibriumMeasure make_measure(const RunConfig& c) {
    if (c.support_guess)
        return loggas::EquilibriumMeasure(c.ensemble.potential,
                                          {c.support_guess->first, c.support_guess->second});
    return loggas::EquilibriumMeasure(c.ensemble.potential);
}

loggas::SampleSet build_samples(const RunConfig& c, int threads) {
    c.ensemble.validate();
    return loggas::run_chains(c.ensemble, c.chains, c.samples, c.seed, threads, c.cache_dir);
}

/// Writes every report and folds the verdicts into an exit code (0 or 2).
int finish(const std::vector<ExperimentReport>& reports, const std::string& out_dir) {
    int code = 0;
    for (const ExperimentReport& r : reports) {
        r.write(out_dir);
        const bool ok = r.verdict();
        loggas::log_info(r.name + ": " + (ok ? "PASS" : "FAIL") + " (" +
                         std::to_string(r.rows.size()) + " rows) -> " + out_dir);
        if (!ok) code = 2;
    }
    return code;
}

/// Default local-law grid: 6 geometric points spanning [4/N, min(256/N, 1/2)].
std::vector<double> default_etas(int N) {
    const double lo = 4.0 / N;
    const double hi = std::min(256.0 / N, 0.5);
    std::vector<double> etas(6);
    for (int j = 0; j < 6; ++j) etas[j] = lo * std::pow(hi / lo, j / 5.0);
    return etas;
}

std::vector<long> default_indices(int N) {
    std::vector<long> idx = {N / 2, N / 2 + 1, std::max(N / 4, 1), std::max(3 * N / 4, 1)};
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

int cmd_equilibrium(const RunConfig& c) {
    const loggas::EquilibriumMeasure m = make_measure(c);

    nlohmann::ordered_json j;
    j["A"] = m.A();
    j["B"] = m.B();
    j["r_coeffs"] = m.r_coeffs();
    j["quad_order"] = m.quad_order();

    fs::path json_path, csv_path;
    if (c.out_dir.size() > 5 && c.out_dir.substr(c.out_dir.size() - 5) == ".json") {
        json_path = c.out_dir;
        csv_path = json_path;
        csv_path.replace_extension(".csv");
        if (json_path.has_parent_path()) fs::create_directories(json_path.parent_path());
    } else {
        fs::create_directories(c.out_dir);
        json_path = fs::path(c.out_dir) / "equilibrium.json";
        csv_path = fs::path(c.out_dir) / "equilibrium.csv";
    }
    loggas::write_file(json_path.string(), j.dump(2) + "\n");

    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i <= 1000; ++i) {
        const double t = m.A() + (m.B() - m.A()) * i / 1000.0;
        rows.push_back({loggas::fmt(t), loggas::fmt(m.density(t))});
    }
    loggas::write_csv(csv_path.string(), {"t", "rho"}, rows);
    loggas::log_info("equilibrium: support [" + loggas::fmt(m.A()) + ", " + loggas::fmt(m.B()) +
                     "] -> " + json_path.string());
    return 0;
}

int cmd_sample(const RunConfig& c, int threads) {
    const loggas::SampleSet set = build_samples(c, threads);
    nlohmann::ordered_json j;
    j["beta"] = set.config.beta;
    j["N"] = set.config.N;
    j["potential"] = set.config.potential.describe();
    j["method"] = set.config.method == loggas::Method::tridiagonal ? "tridiagonal" : "mala";
    j["chains"] = c.chains;
    j["samples"] = static_cast<int>(set.samples.size());
    j["seed"] = c.seed;
    if (!c.cache_dir.empty()) j["cache_key"] = loggas::cache_key(set.config, c.seed);
    fs::create_directories(c.out_dir);
    loggas::write_file((fs::path(c.out_dir) / "samples.json").string(), j.dump(2) + "\n");
    loggas::log_info("sample: " + std::to_string(set.samples.size()) + " configurations ready");
    return 0;
}

int cmd_oracle(const RunConfig& c) {
    const int N = c.ensemble.N;
    if (N > 3) throw loggas::ConfigError("oracle: N must be 1, 2 or 3 (got " +
                                         std::to_string(N) + ")");
    const loggas::Oracle oracle(c.ensemble.beta, N, c.ensemble.potential);
    using Config = std::vector<double>;
    const std::string& name = c.oracle.observable;

    nlohmann::ordered_json j;
    j["observable"] = name;
    j["beta"] = c.ensemble.beta;
    j["N"] = N;
    j["potential"] = c.ensemble.potential.describe();

    if (name == "stieltjes") {
        const std::complex<double> z = c.oracle.z;
        if (z.imag() == 0.0)
            throw loggas::ConfigError("oracle.z: needs a nonzero imaginary part");
        const auto sz = [&](const Config& l) { return loggas::stieltjes_emp(l, z); };
        const std::vector<double> v = oracle.expectations(
            {[&](const Config& l) { return sz(l).real(); },
             [&](const Config& l) { return sz(l).imag(); }});
        j["z"] = {z.real(), z.imag()};
        j["value"] = {{"re", v[0]}, {"im", v[1]}};
    } else {
        std::function<double(const Config&)> g;
        if (name == "trace")
            g = [](const Config& l) { double s = 0; for (double x : l) s += x; return s; };
        else if (name == "trace2")
            g = [](const Config& l) { double s = 0; for (double x : l) s += x * x; return s; };
        else if (name == "trace3")
            g = [](const Config& l) { double s = 0; for (double x : l) s += x * x * x; return s; };
        else if (name == "max")
            g = [](const Config& l) { return l.back(); };
        else if (name == "min")
            g = [](const Config& l) { return l.front(); };
        else
            throw loggas::ConfigError(
                "oracle.observable: expected trace, trace2, trace3, max, min or stieltjes");
        j["value"] = oracle.expectation(g);
    }
    j["refinement_error"] = oracle.last_refinement_error();

    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    fs::create_directories(c.out_dir);
    loggas::write_file((fs::path(c.out_dir) / "oracle.json").string(), text);
    return 0;
}

int cmd_verify_loops(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    std::vector<ExperimentReport> reports;
    if (c.loops.use_oracle) {
        if (c.ensemble.N > 3)
            throw loggas::ConfigError("loops.use_oracle: N must be 1, 2 or 3");
        const loggas::Oracle oracle(c.ensemble.beta, c.ensemble.N, c.ensemble.potential);
        reports.push_back(
            loggas::verify_loop_rank1(oracle, c.ensemble.beta, m, c.loops.z));
        if (!c.loops.zs.empty())
            reports.push_back(loggas::verify_loop_rankn(oracle, c.ensemble.beta, m,
                                                        c.loops.z.front(), c.loops.zs));
    } else {
        const loggas::SampleSet set = build_samples(c, threads);
        reports.push_back(loggas::verify_loop_rank1(set, m, c.loops.z, threads));
        if (!c.loops.zs.empty())
            reports.push_back(
                loggas::verify_loop_rankn(set, m, c.loops.z.front(), c.loops.zs, threads));
    }
    return finish(reports, c.out_dir);
}

int cmd_local_law(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    const loggas::SampleSet set = build_samples(c, threads);
    std::vector<double> etas = c.local_law.etas;
    if (etas.empty()) etas = default_etas(c.ensemble.N);
    return finish({loggas::local_law_scan(set, m, c.local_law.E, etas, c.local_law.q, 0.5,
                                          threads)},
                  c.out_dir);
}

int cmd_rigidity(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    std::vector<loggas::SampleSet> sets;
    for (std::size_t i = 0; i < c.N_list.size(); ++i) {
        RunConfig ci = c;
        ci.ensemble.N = c.N_list[i];
        // Distinct seeds per size keep the sets independent.
        ci.seed = c.seed + i;
        sets.push_back(build_samples(ci, threads));
    }
    return finish({loggas::rigidity_profile(sets, m, c.rigidity.bulk_fraction, threads)},
                  c.out_dir);
}

int cmd_edge_tail(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    const loggas::SampleSet set = build_samples(c, threads);
    return finish({loggas::edge_tail(set, m, c.edge_tail.xs, threads)}, c.out_dir);
}

int cmd_wegner(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    const loggas::SampleSet set = build_samples(c, threads);
    return finish({loggas::wegner_scan(set, m, c.wegner.E, c.wegner.deltas, threads)},
                  c.out_dir);
}

int cmd_clt(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    const loggas::SampleSet set = build_samples(c, threads);
    return finish({loggas::clt_logfield(set, m, c.clt.energies, threads)}, c.out_dir);
}

int cmd_gustavsson(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    const loggas::SampleSet set = build_samples(c, threads);
    std::vector<long> idx = c.gustavsson.indices;
    if (idx.empty()) idx = default_indices(c.ensemble.N);
    return finish({loggas::gustavsson(set, m, idx, threads)}, c.out_dir);
}

int cmd_smooth_clt(const RunConfig& c, int threads) {
    const loggas::EquilibriumMeasure m = make_measure(c);
    const loggas::SampleSet set = build_samples(c, threads);
    const std::vector<double> coeffs = c.smooth_clt.f_coeffs;
    const std::vector<double> dcoeffs = loggas::polyder(coeffs);
    return finish({loggas::smooth_clt(
                      set, m, [coeffs](double x) { return loggas::polyval(coeffs, x); },
                      [dcoeffs](double x) { return loggas::polyval(dcoeffs, x); }, threads)},
                  c.out_dir);
}

std::string md_num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

int cmd_report(const RunConfig& c) {
    if (!fs::is_directory(c.out_dir))
        throw loggas::ConfigError("report: no such directory: " + c.out_dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(c.out_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::ostringstream md;
    md << "# Experiment summary\n";
    int found = 0;
    bool all_pass = true;
    for (const fs::path& f : files) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(loggas::read_file(f.string()));
        } catch (const std::exception&) {
            continue;  // not a report document
        }
        if (!j.is_object() || !j.contains("name") || !j.contains("verdict") ||
            !j.contains("rows"))
            continue;
        ++found;
        const bool pass = j["verdict"] == "pass";
        all_pass = all_pass && pass;
        md << "\n## " << j["name"].get<std::string>() << " - "
           << (pass ? "PASS" : "FAIL") << "\n\n";
        md << "Claim: " << j.value("claim", std::string("?")) << "\n\n";
        md << "Config: `" << j.value("config", std::string("?")) << "`\n\n";
        md << "| inputs | predicted | estimated | stderr | z | gated | pass |\n";
        md << "|---|---|---|---|---|---|---|\n";
        for (const auto& row : j["rows"]) {
            md << "| " << row.value("inputs", std::string()) << " | "
               << md_num(row.value("predicted", 0.0)) << " | "
               << md_num(row.value("estimated", 0.0)) << " | "
               << md_num(row.value("stderr", 0.0)) << " | "
               << md_num(row.value("z_score", 0.0)) << " | "
               << (row.value("gated", true) ? "yes" : "no") << " | "
               << (row.value("pass", true) ? "pass" : "FAIL") << " |\n";
        }
    }
    if (found == 0) throw loggas::ConfigError("report: no experiment outputs in " + c.out_dir);

    const std::string text = md.str();
    loggas::write_file((fs::path(c.out_dir) / "summary.md").string(), text);
    std::cout << text;
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loggas: numerical laboratory for one-cut beta-ensembles"};
    app.require_subcommand(1);

    std::string config_path, out_flag, cache_flag;
    std::uint64_t seed_flag = 0;
    int threads_flag = 0, chains_flag = 0, samples_flag = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_flag, "output directory (or file for `equilibrium`)");
    app.add_option("--cache", cache_flag, "sample cache directory");
    app.add_option("--seed", seed_flag, "RNG seed (overrides config)");
    app.add_option("--threads", threads_flag, "thread budget (overrides config; 0 = auto)");
    app.add_option("--chains", chains_flag, "number of chains (overrides config)");
    app.add_option("--samples", samples_flag, "samples per chain (overrides config)");
    app.add_flag("--quiet", quiet, "suppress progress logging");

    const std::vector<std::string> names = {"equilibrium", "sample",   "oracle",
                                            "verify-loops", "local-law", "rigidity",
                                            "edge-tail",   "wegner",   "clt",
                                            "gustavsson",  "smooth-clt", "report"};
    const std::vector<std::string> descr = {
        "solve and tabulate the equilibrium measure",
        "draw (and optionally cache) eigenvalue configurations",
        "exact small-N expectations by quadrature",
        "loop-equation residual tests (rank 1 and rank n)",
        "E|s_N - m_V|^2 scaling in the spectral scale eta",
        "rescaled bulk max deviation across a list of N",
        "upper-edge survival probabilities and stretch exponent",
        "expected eigenvalue count in shrinking intervals",
        "log-characteristic-polynomial CLT checks",
        "eigenvalue displacement CLT checks",
        "polynomial linear statistic CLT checks",
        "aggregate experiment outputs into summary.md"};
    for (std::size_t i = 0; i < names.size(); ++i)
        app.add_subcommand(names[i], descr[i])->fallthrough();

    CLI11_PARSE(app, argc, argv);
    loggas::set_quiet(quiet);

    try {
        RunConfig c = config_path.empty() ? RunConfig{} : loggas::load_config_file(config_path);
        if (app.count("--out")) c.out_dir = out_flag;
        if (app.count("--cache")) c.cache_dir = cache_flag;
        if (app.count("--seed")) c.seed = seed_flag;
        if (app.count("--threads")) c.threads = threads_flag;
        if (app.count("--chains")) {
            if (chains_flag < 1) throw loggas::ConfigError("chains: must be >= 1");
            c.chains = chains_flag;
        }
        if (app.count("--samples")) {
            if (samples_flag < 1) throw loggas::ConfigError("samples: must be >= 1");
            c.samples = samples_flag;
        }
        const int threads = loggas::thread_budget(c.threads);

        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "equilibrium") return cmd_equilibrium(c);
        if (sub == "sample") return cmd_sample(c, threads);
        if (sub == "oracle") return cmd_oracle(c);
        if (sub == "verify-loops") return cmd_verify_loops(c, threads);
        if (sub == "local-law") return cmd_local_law(c, threads);
        if (sub == "rigidity") return cmd_rigidity(c, threads);
        if (sub == "edge-tail") return cmd_edge_tail(c, threads);
        if (sub == "wegner") return cmd_wegner(c, threads);
        if (sub == "clt") return cmd_clt(c, threads);
        if (sub == "gustavsson") return cmd_gustavsson(c, threads);
        if (sub == "smooth-clt") return cmd_smooth_clt(c, threads);
        if (sub == "report") return cmd_report(c);
        std::cerr << "error: unknown subcommand " << sub << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
