#include "qge/bounds.hpp"

#include "qge/error.hpp"
#include "qge/evolution.hpp"
#include "qge/graph.hpp"
#include "qge/parallel.hpp"
#include "qge/random.hpp"
#include "qge/walk.hpp"
#include "text.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace qge {

double weighted_geo_sum(double theta, int T) {
    require(theta != 1.0, ErrorKind::parameter, "weighted_geo_sum: theta must differ from 1");
    require(T >= 0, ErrorKind::parameter, "weighted_geo_sum: T must be non-negative");
    const double num = T * std::pow(theta, T + 2) + theta - (T + 1.0) * std::pow(theta, T + 1);
    return num / ((theta - 1.0) * (theta - 1.0));
}

double weighted_geo_sum_inf(double theta) {
    require(std::abs(theta) < 1.0, ErrorKind::parameter, "weighted_geo_sum_inf: need |theta| < 1");
    return theta / ((theta - 1.0) * (theta - 1.0));
}

double fejer_geo_sum(double theta, int T) {
    require(theta != 1.0, ErrorKind::parameter, "fejer_geo_sum: theta must differ from 1");
    require(T >= 1, ErrorKind::parameter, "fejer_geo_sum: T must be >= 1");
    const double num = T - 1.0 + std::pow(theta, T) - T * theta;
    return theta / (double(T) * T) * num / ((1.0 - theta) * (1.0 - theta));
}

BoundTerms explicit_variance_bound(const BoundInputs& in) {
    require(in.kappa > 0.0, ErrorKind::parameter, "bound: kappa must be positive");
    require(in.d >= 3, ErrorKind::parameter, "bound: need d >= 3");
    require(in.T >= 1, ErrorKind::parameter, "bound: T must be >= 1");
    require(in.B >= 1, ErrorKind::parameter, "bound: B must be positive");
    require(in.census >= 0, ErrorKind::parameter, "bound: census size must be non-negative");
    require(in.beta > 0.0 && in.beta < in.d - 2.0, ErrorKind::domain,
            "bound: walk term unavailable (need 0 < beta < d-2)");
    const double d = in.d, T = in.T, k2 = in.kappa * in.kappa;
    // The Fejer/geometric majorisation below relies on this.
    require(T - 1.0 - T * (d - 1.0) < 0.0, ErrorKind::numerical, "bound: T - 1 - T(d-1) must be negative");

    BoundTerms out;
    out.beta_eff = std::min(in.beta, z_bound_gap_limit(in.d));
    const double b = out.beta_eff;
    out.K = 5.0 * (d - 1.0) / (2.0 * (d - 2.0 - b));
    out.diag = k2 / T;
    out.walk = 2.0 * k2 * out.K * (d - 1.0) * (d - 1.0 - b) / (T * b * b);
    out.cycles = (2.0 * k2 / ((d - 2.0) * (d - 1.0))) * ((d - 1.0) / ((d - 2.0) * (d - 2.0))) *
                 std::pow(d - 1.0, T) * static_cast<double>(in.census) / (T * T * in.B);
    out.total = out.diag + out.walk + out.cycles;
    return out;
}

int choose_horizon(long long n, int d) {
    require(n >= 2, ErrorKind::parameter, "choose_horizon: need n >= 2");
    require(d >= 3, ErrorKind::parameter, "choose_horizon: need d >= 3");
    // Epsilon keeps exact powers of d-1 from rounding down.
    const double t = 0.3 * std::log(static_cast<double>(n)) / std::log(d - 1.0);
    return std::max(1, static_cast<int>(std::floor(t + 1e-9)));
}

double wormald_log_probability(const WormaldParams& p) {
    require(p.k >= 3.0, ErrorKind::parameter, "wormald: need k >= 3");
    require(p.A > 1.0, ErrorKind::parameter, "wormald: need A > 1");
    require(p.S >= 0.0, ErrorKind::parameter, "wormald: need S >= 0");
    return -5.0 * std::pow(p.d - 1.0, p.k) + (p.S / (4.0 * p.k)) * (1.0 - std::log(p.A));
}

double wormald_probability(const WormaldParams& p) { return std::exp(wormald_log_probability(p)); }

WormaldParams wormald_setup(double n, int d) {
    require(n > 1.0 && d >= 3, ErrorKind::parameter, "wormald setup: need n > 1, d >= 3");
    WormaldParams p;
    p.n = n;
    p.d = d;
    const double lg = std::log(n) / std::log(d - 1.0);
    const double n35 = std::pow(n, 0.6);
    p.k = 0.6 * lg;
    if (std::abs(p.k - std::round(p.k)) < 1e-9)
        p.k = std::round(p.k);
    p.S = std::floor(42.0 * n35 * lg + 1e-9);
    p.A = p.S / (12.0 * n35 * lg);
    return p;
}

namespace {

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

long long parse_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos == s.size())
            return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::parse, "config: bad integer '" + s + "' for " + key);
}

double parse_real(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size())
            return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::parse, "config: bad number '" + s + "' for " + key);
}

std::vector<long long> parse_list(const std::string& s, const std::string& key) {
    std::vector<long long> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        const auto dash = item.find('-', 1);
        if (dash != std::string::npos) {
            const long long lo = parse_int(trim(item.substr(0, dash)), key);
            const long long hi = parse_int(trim(item.substr(dash + 1)), key);
            require(lo <= hi, ErrorKind::parse, "config: empty range in " + key);
            for (long long v = lo; v <= hi; ++v)
                out.push_back(v);
        } else {
            out.push_back(parse_int(item, key));
        }
    }
    require(!out.empty(), ErrorKind::parse, "config: empty list for " + key);
    return out;
}

} // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
    ExperimentConfig c;
    std::stringstream in{std::string(text)};
    std::string line;
    bool have_n = false, have_seeds = false;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::parse, "config: expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "d") {
            c.d = static_cast<int>(parse_int(value, key));
        } else if (key == "n_list") {
            c.n_list.clear();
            for (auto v : parse_list(value, key))
                c.n_list.push_back(static_cast<int>(v));
            have_n = true;
        } else if (key == "seeds") {
            c.seeds.clear();
            for (auto v : parse_list(value, key)) {
                require(v >= 0, ErrorKind::validation, "config: seeds must be non-negative");
                c.seeds.push_back(static_cast<std::uint64_t>(v));
            }
            have_seeds = true;
        } else if (key == "K") {
            c.K = parse_real(value, key);
        } else if (key == "samples") {
            c.samples = static_cast<int>(parse_int(value, key));
        } else if (key == "kappa") {
            c.kappa = parse_real(value, key);
        } else if (key == "output") {
            c.output = value;
        } else if (key == "observable") {
            c.observable = value;
        } else if (key == "observable_seed") {
            c.observable_seed = static_cast<std::uint64_t>(parse_int(value, key));
        } else if (key == "control") {
            require(value == "true" || value == "false", ErrorKind::parse, "config: control must be true or false");
            c.control = value == "true";
        } else {
            fail(ErrorKind::parse, "config: unknown key '" + key + "'");
        }
    }
    require(have_n, ErrorKind::validation, "config: n_list is required");
    require(have_seeds, ErrorKind::validation, "config: seeds is required");
    require(c.d >= 3, ErrorKind::validation, "config: need d >= 3");
    require(c.K > 0.0 && c.samples >= 1, ErrorKind::validation, "config: need K > 0 and samples >= 1");
    require(c.kappa > 0.0, ErrorKind::validation, "config: kappa must be positive");
    require(c.observable == "parity" || c.observable == "random", ErrorKind::validation,
            "config: observable must be parity or random");
    for (int n : c.n_list)
        require(n > c.d && (static_cast<long long>(n) * c.d) % 2 == 0, ErrorKind::validation,
                "config: n = " + std::to_string(n) + " is not valid for d = " + std::to_string(c.d));
    return c;
}

std::string config_canonical(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["d"] = c.d;
    j["n_list"] = c.n_list;
    j["seeds"] = c.seeds;
    j["K"] = c.K;
    j["samples"] = c.samples;
    j["kappa"] = c.kappa;
    j["output"] = c.output;
    j["observable"] = c.observable;
    j["observable_seed"] = c.observable_seed;
    j["control"] = c.control;
    return j.dump();
}

namespace {

struct Job {
    int n;
    std::uint64_t seed;
    bool control;
};

ExperimentRow run_job(const ExperimentConfig& c, const Job& job) {
    ExperimentRow row;
    row.n = job.n;
    row.seed = job.seed;
    row.B = job.n * c.d / 2;
    row.T = choose_horizon(job.n, c.d);
    row.bound = std::numeric_limits<double>::quiet_NaN();
    row.observable = job.control ? "constant" : c.observable;
    try {
        const Graph g = generate_random_regular(job.n, c.d, mix_seed(job.seed, 2 * static_cast<std::uint64_t>(job.n)));
        const auto report = spectral_report(g);
        row.beta = report.beta;
        row.girth = report.girth;
        row.census = static_cast<long long>(cycle_bond_census(g, 2 * row.T).size());

        const MetricGraph mg(g, random_lengths(g.bond_count(), mix_seed(job.seed, 2 * static_cast<std::uint64_t>(job.n) + 1)));
        const Assembly a = build_assembly(mg, SigmaKind::equi_transmitting);
        Observable f;
        if (job.control)
            f = constant_observable(g.directed_count(), c.kappa);
        else if (c.observable == "random")
            f = random_traceless_observable(g.directed_count(), c.kappa, mix_seed(c.observable_seed, job.seed));
        else
            f = parity_observable(g, c.kappa);

        const KGrid grid{c.K, c.samples, false, 0};
        const auto v = variance_estimate(a, mg, f, grid);
        row.variance = v.estimate;
        row.stderr_ = v.stderr_;

        if (job.control) {
            row.status = "control";
        } else if (report.beta > 0.0 && report.beta < c.d - 2.0) {
            // Bound uses the actual sup norm of the centred observable.
            row.terms = explicit_variance_bound({f.kappa, c.d, report.beta, row.T, row.census, row.B});
            row.bound = row.terms.total;
            row.status = row.variance <= row.bound ? "ok" : "bound_violated";
        } else {
            row.status = "bound_unavailable";
        }
    } catch (const Error& e) {
        row.status = std::string("failed: ") + to_string(e.kind()) + ": " + e.what();
    }
    return row;
}

} // namespace

ExperimentResult family_experiment(const ExperimentConfig& config) {
    std::vector<Job> jobs;
    for (int n : config.n_list)
        for (auto s : config.seeds)
            jobs.push_back({n, s, false});
    if (config.control && !config.n_list.empty() && !config.seeds.empty())
        jobs.push_back({config.n_list.front(), config.seeds.front(), true});

    ExperimentResult r;
    r.config = config;
    r.rows = parallel_map<ExperimentRow>(jobs.size(), [&](std::size_t i) { return run_job(config, jobs[i]); });
    return r;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

} // namespace

std::string experiment_csv(const ExperimentResult& r) {
    std::string out = "n,B,beta,girth,census,T,variance,bound,seed,stderr,observable,status\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.n) + "," + std::to_string(row.B) + "," + detail::num(row.beta) + "," +
               (row.girth ? std::to_string(*row.girth) : std::string("acyclic")) + "," + std::to_string(row.census) +
               "," + std::to_string(row.T) + "," + detail::num(row.variance) + "," +
               (std::isnan(row.bound) ? std::string() : detail::num(row.bound)) + "," + std::to_string(row.seed) +
               "," + detail::num(row.stderr_) + "," + row.observable + "," + csv_field(row.status) + "\n";
    }
    return out;
}

std::string experiment_metadata_json(const ExperimentResult& r) {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::parse(config_canonical(r.config));
    j["sigma"] = "equi_transmitting";
    j["lengths"] = "uniform [1,2), seed mix(seed, 2n+1)";
    j["graph_seed"] = "mix(seed, 2n)";
    j["k_average"] = "midpoint grid K(s+1/2)/samples";
    j["horizon"] = "T = max(1, floor(0.3 log_{d-1} n))";
    j["beta_eff"] = "min(beta, d-1-sqrt(d-1))";
    nlohmann::ordered_json terms;
    terms["diag"] = {{"formula", "kappa^2/T"}, {"source", "t = 0 Fejer term with Tr Op(f)^2 <= 2B kappa^2"}};
    terms["walk"] = {{"formula", "2 kappa^2 K (d-1)(d-1-beta_eff)/(T beta_eff^2)"},
                     {"K", "5(d-1)/(2(d-2-beta_eff))"},
                     {"source", "walk decay bound summed with w_T(t) <= 1/T and sum t theta^t = theta/(theta-1)^2"}};
    terms["cycles"] = {
        {"formula", "(2 kappa^2/((d-2)(d-1))) ((d-1)/(d-2)^2) (d-1)^T |C_{B,2T}| / (T^2 B)"},
        {"source", "return-path error 2 kappa^2 (d-1)^{t-1}|C_{B,2T}|/(d-2) summed against w_T(t) (d-1)^t"}};
    j["terms"] = terms;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json o;
        o["n"] = row.n;
        o["seed"] = row.seed;
        o["observable"] = row.observable;
        o["status"] = row.status;
        if (!std::isnan(row.bound))
            o["terms"] = {{"diag", row.terms.diag},
                          {"walk", row.terms.walk},
                          {"cycles", row.terms.cycles},
                          {"beta_eff", row.terms.beta_eff},
                          {"K", row.terms.K}};
        rows.push_back(o);
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

} // namespace qge
