#include "loggas/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "loggas/errors.hpp"
#include "loggas/io.hpp"

namespace loggas {
namespace {

using json = nlohmann::ordered_json;

std::string join_scope(const std::string& scope, const std::string& key) {
    return scope.empty() ? key : scope + "." + key;
}

void check_keys(const json& obj, const std::string& scope,
                const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (allowed.find(item.key()) == allowed.end())
            throw ConfigError("unknown key: " + join_scope(scope, item.key()));
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& scope, const std::string& key,
                  double defv) {
    const json* v = find(obj, key);
    if (!v) return defv;
    if (!v->is_number()) throw ConfigError(join_scope(scope, key) + ": expected a number");
    return v->get<double>();
}

long get_integer(const json& obj, const std::string& scope, const std::string& key,
                 long defv) {
    const json* v = find(obj, key);
    if (!v) return defv;
    if (!v->is_number_integer())
        throw ConfigError(join_scope(scope, key) + ": expected an integer");
    return v->get<long>();
}

bool get_bool(const json& obj, const std::string& scope, const std::string& key, bool defv) {
    const json* v = find(obj, key);
    if (!v) return defv;
    if (!v->is_boolean()) throw ConfigError(join_scope(scope, key) + ": expected a boolean");
    return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& scope, const std::string& key,
                       const std::string& defv) {
    const json* v = find(obj, key);
    if (!v) return defv;
    if (!v->is_string()) throw ConfigError(join_scope(scope, key) + ": expected a string");
    return v->get<std::string>();
}

std::vector<double> get_number_list(const json& obj, const std::string& scope,
                                    const std::string& key,
                                    const std::vector<double>& defv) {
    const json* v = find(obj, key);
    if (!v) return defv;
    if (!v->is_array())
        throw ConfigError(join_scope(scope, key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const json& e : *v) {
        if (!e.is_number())
            throw ConfigError(join_scope(scope, key) + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::complex<double> parse_complex(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(where + ": expected [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<std::complex<double>> get_complex_list(
    const json& obj, const std::string& scope, const std::string& key,
    const std::vector<std::complex<double>>& defv) {
    const json* v = find(obj, key);
    if (!v) return defv;
    if (!v->is_array())
        throw ConfigError(join_scope(scope, key) + ": expected an array of [re, im] pairs");
    std::vector<std::complex<double>> out;
    for (const json& e : *v) out.push_back(parse_complex(e, join_scope(scope, key)));
    return out;
}

Potential parse_potential(const json& v) {
    if (!v.is_object()) throw ConfigError("potential: expected an object");
    const std::string kind = get_string(v, "potential", "kind", "");
    if (kind == "quadratic") {
        check_keys(v, "potential", {"kind"});
        return Potential::quadratic();
    }
    if (kind == "quartic") {
        check_keys(v, "potential", {"kind", "t"});
        if (!find(v, "t")) throw ConfigError("potential.t: required for kind \"quartic\"");
        return Potential::quartic(get_number(v, "potential", "t", 0.0));
    }
    if (kind == "polynomial") {
        check_keys(v, "potential", {"kind", "coeffs"});
        if (!find(v, "coeffs"))
            throw ConfigError("potential.coeffs: required for kind \"polynomial\"");
        try {
            return Potential::polynomial(get_number_list(v, "potential", "coeffs", {}));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("potential.coeffs: ") + e.what());
        }
    }
    throw ConfigError("potential.kind: expected \"quadratic\", \"quartic\" or \"polynomial\"");
}

json potential_to_json(const Potential& p) {
    json v;
    switch (p.kind()) {
        case Potential::Kind::quadratic:
            v["kind"] = "quadratic";
            break;
        case Potential::Kind::quartic:
            v["kind"] = "quartic";
            v["t"] = p.quartic_coupling();
            break;
        case Potential::Kind::polynomial:
            v["kind"] = "polynomial";
            v["coeffs"] = p.coefficients();
            break;
    }
    return v;
}

void require_positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError(key + ": must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root: expected an object");

    check_keys(doc, "",
               {"potential", "support_guess", "beta", "N", "method", "mcmc", "seed",
                "chains", "samples", "cache", "out", "threads", "oracle", "loops",
                "local_law", "rigidity", "edge_tail", "wegner", "clt", "gustavsson",
                "smooth_clt"});

    RunConfig c;

    if (const json* v = find(doc, "potential")) c.ensemble.potential = parse_potential(*v);

    if (const json* v = find(doc, "support_guess")) {
        if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
            throw ConfigError("support_guess: expected [a, b]");
        const double a = (*v)[0].get<double>(), b = (*v)[1].get<double>();
        if (!(a < b)) throw ConfigError("support_guess: requires a < b");
        c.support_guess = {a, b};
    }

    c.ensemble.beta = get_number(doc, "", "beta", c.ensemble.beta);
    require_positive(c.ensemble.beta, "beta");

    if (const json* v = find(doc, "N")) {
        c.N_list.clear();
        if (v->is_number_integer()) {
            c.N_list.push_back(static_cast<int>(v->get<long>()));
        } else if (v->is_array()) {
            for (const json& e : *v) {
                if (!e.is_number_integer())
                    throw ConfigError("N: expected an integer or an array of integers");
                c.N_list.push_back(static_cast<int>(e.get<long>()));
            }
        } else {
            throw ConfigError("N: expected an integer or an array of integers");
        }
        if (c.N_list.empty()) throw ConfigError("N: at least one size required");
        for (int n : c.N_list)
            if (n < 1) throw ConfigError("N: sizes must be >= 1");
    }
    c.ensemble.N = c.N_list.front();

    const std::string method = get_string(doc, "", "method", "tridiagonal");
    if (method == "tridiagonal")
        c.ensemble.method = Method::tridiagonal;
    else if (method == "mala")
        c.ensemble.method = Method::mala;
    else
        throw ConfigError("method: expected \"tridiagonal\" or \"mala\"");

    if (const json* v = find(doc, "mcmc")) {
        if (!v->is_object()) throw ConfigError("mcmc: expected an object");
        check_keys(*v, "mcmc", {"burn_in_sweeps", "thinning_sweeps", "step_size", "adapt"});
        McmcSettings& s = c.ensemble.mcmc;
        s.burn_in_sweeps =
            static_cast<int>(get_integer(*v, "mcmc", "burn_in_sweeps", s.burn_in_sweeps));
        s.thinning_sweeps =
            static_cast<int>(get_integer(*v, "mcmc", "thinning_sweeps", s.thinning_sweeps));
        s.step_size = get_number(*v, "mcmc", "step_size", s.step_size);
        s.adapt = get_bool(*v, "mcmc", "adapt", s.adapt);
        if (s.burn_in_sweeps < 0) throw ConfigError("mcmc.burn_in_sweeps: must be >= 0");
        if (s.thinning_sweeps < 1) throw ConfigError("mcmc.thinning_sweeps: must be >= 1");
        if (s.step_size < 0.0) throw ConfigError("mcmc.step_size: must be >= 0");
    }

    if (const json* v = find(doc, "seed")) {
        if (!v->is_number_integer())
            throw ConfigError("seed: expected a nonnegative integer");
        if (!v->is_number_unsigned() && v->get<long long>() < 0)
            throw ConfigError("seed: expected a nonnegative integer");
        c.seed = v->get<std::uint64_t>();
    }

    c.chains = static_cast<int>(get_integer(doc, "", "chains", c.chains));
    if (c.chains < 1) throw ConfigError("chains: must be >= 1");
    c.samples = static_cast<int>(get_integer(doc, "", "samples", c.samples));
    if (c.samples < 1) throw ConfigError("samples: must be >= 1");
    c.cache_dir = get_string(doc, "", "cache", c.cache_dir);
    c.out_dir = get_string(doc, "", "out", c.out_dir);
    c.threads = static_cast<int>(get_integer(doc, "", "threads", c.threads));
    if (c.threads < 0) throw ConfigError("threads: must be >= 0");

    if (const json* v = find(doc, "oracle")) {
        if (!v->is_object()) throw ConfigError("oracle: expected an object");
        check_keys(*v, "oracle", {"observable", "z"});
        c.oracle.observable = get_string(*v, "oracle", "observable", c.oracle.observable);
        if (const json* z = find(*v, "z")) c.oracle.z = parse_complex(*z, "oracle.z");
    }

    if (const json* v = find(doc, "loops")) {
        if (!v->is_object()) throw ConfigError("loops: expected an object");
        check_keys(*v, "loops", {"z", "zs", "use_oracle"});
        c.loops.z = get_complex_list(*v, "loops", "z", c.loops.z);
        c.loops.zs = get_complex_list(*v, "loops", "zs", c.loops.zs);
        c.loops.use_oracle = get_bool(*v, "loops", "use_oracle", c.loops.use_oracle);
    }

    if (const json* v = find(doc, "local_law")) {
        if (!v->is_object()) throw ConfigError("local_law: expected an object");
        check_keys(*v, "local_law", {"E", "q", "etas"});
        c.local_law.E = get_number(*v, "local_law", "E", c.local_law.E);
        c.local_law.q = static_cast<int>(get_integer(*v, "local_law", "q", c.local_law.q));
        if (c.local_law.q < 1) throw ConfigError("local_law.q: must be >= 1");
        c.local_law.etas = get_number_list(*v, "local_law", "etas", c.local_law.etas);
    }

    if (const json* v = find(doc, "rigidity")) {
        if (!v->is_object()) throw ConfigError("rigidity: expected an object");
        check_keys(*v, "rigidity", {"bulk_fraction"});
        c.rigidity.bulk_fraction =
            get_number(*v, "rigidity", "bulk_fraction", c.rigidity.bulk_fraction);
        if (!(c.rigidity.bulk_fraction > 0.0 && c.rigidity.bulk_fraction < 0.5))
            throw ConfigError("rigidity.bulk_fraction: must lie in (0, 0.5)");
    }

    if (const json* v = find(doc, "edge_tail")) {
        if (!v->is_object()) throw ConfigError("edge_tail: expected an object");
        check_keys(*v, "edge_tail", {"xs"});
        c.edge_tail.xs = get_number_list(*v, "edge_tail", "xs", c.edge_tail.xs);
    }

    if (const json* v = find(doc, "wegner")) {
        if (!v->is_object()) throw ConfigError("wegner: expected an object");
        check_keys(*v, "wegner", {"E", "deltas"});
        c.wegner.E = get_number(*v, "wegner", "E", c.wegner.E);
        c.wegner.deltas = get_number_list(*v, "wegner", "deltas", c.wegner.deltas);
    }

    if (const json* v = find(doc, "clt")) {
        if (!v->is_object()) throw ConfigError("clt: expected an object");
        check_keys(*v, "clt", {"energies"});
        c.clt.energies = get_number_list(*v, "clt", "energies", c.clt.energies);
    }

    if (const json* v = find(doc, "gustavsson")) {
        if (!v->is_object()) throw ConfigError("gustavsson: expected an object");
        check_keys(*v, "gustavsson", {"indices"});
        if (const json* idx = find(*v, "indices")) {
            if (!idx->is_array())
                throw ConfigError("gustavsson.indices: expected an array of integers");
            c.gustavsson.indices.clear();
            for (const json& e : *idx) {
                if (!e.is_number_integer())
                    throw ConfigError("gustavsson.indices: expected an array of integers");
                c.gustavsson.indices.push_back(e.get<long>());
            }
        }
    }

    if (const json* v = find(doc, "smooth_clt")) {
        if (!v->is_object()) throw ConfigError("smooth_clt: expected an object");
        check_keys(*v, "smooth_clt", {"f_coeffs"});
        c.smooth_clt.f_coeffs =
            get_number_list(*v, "smooth_clt", "f_coeffs", c.smooth_clt.f_coeffs);
        if (c.smooth_clt.f_coeffs.empty())
            throw ConfigError("smooth_clt.f_coeffs: at least one coefficient required");
    }

    return c;
}

std::string serialize_config(const RunConfig& c) {
    json doc;
    doc["potential"] = potential_to_json(c.ensemble.potential);
    if (c.support_guess)
        doc["support_guess"] = {c.support_guess->first, c.support_guess->second};
    doc["beta"] = c.ensemble.beta;
    if (c.N_list.size() == 1)
        doc["N"] = c.N_list.front();
    else
        doc["N"] = c.N_list;
    doc["method"] = c.ensemble.method == Method::tridiagonal ? "tridiagonal" : "mala";
    doc["mcmc"] = {{"burn_in_sweeps", c.ensemble.mcmc.burn_in_sweeps},
                   {"thinning_sweeps", c.ensemble.mcmc.thinning_sweeps},
                   {"step_size", c.ensemble.mcmc.step_size},
                   {"adapt", c.ensemble.mcmc.adapt}};
    doc["seed"] = c.seed;
    doc["chains"] = c.chains;
    doc["samples"] = c.samples;
    doc["cache"] = c.cache_dir;
    doc["out"] = c.out_dir;
    doc["threads"] = c.threads;

    doc["oracle"] = {{"observable", c.oracle.observable},
                     {"z", {c.oracle.z.real(), c.oracle.z.imag()}}};

    json zlist = json::array();
    for (const auto& z : c.loops.z) zlist.push_back({z.real(), z.imag()});
    json zslist = json::array();
    for (const auto& z : c.loops.zs) zslist.push_back({z.real(), z.imag()});
    doc["loops"] = {{"z", zlist}, {"zs", zslist}, {"use_oracle", c.loops.use_oracle}};

    doc["local_law"] = {
        {"E", c.local_law.E}, {"q", c.local_law.q}, {"etas", c.local_law.etas}};
    doc["rigidity"] = {{"bulk_fraction", c.rigidity.bulk_fraction}};
    doc["edge_tail"] = {{"xs", c.edge_tail.xs}};
    doc["wegner"] = {{"E", c.wegner.E}, {"deltas", c.wegner.deltas}};
    doc["clt"] = {{"energies", c.clt.energies}};
    doc["gustavsson"] = {{"indices", c.gustavsson.indices}};
    doc["smooth_clt"] = {{"f_coeffs", c.smooth_clt.f_coeffs}};

    return doc.dump(2) + "\n";
}

RunConfig load_config_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    return parse_config(text);
}

}  // namespace loggas
