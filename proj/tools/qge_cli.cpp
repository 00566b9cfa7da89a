#include "qge/qge.h"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CliError {
    qge_status status;
    std::string message;
};

void check(qge_status st) {
    if (st != QGE_OK)
        throw CliError{st, qge_last_error()};
}

[[noreturn]] void die(qge_status st, const std::string& msg) { throw CliError{st, msg}; }

std::string take(char* s) {
    std::string out(s ? s : "");
    qge_free_string(s);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        die(QGE_ERR_IO, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Temp file in the target directory, then rename, so a failed run leaves nothing behind.
void atomic_write(const std::string& path, const std::string& data) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            die(QGE_ERR_IO, "cannot write '" + path + "'");
        out << data;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            die(QGE_ERR_IO, "write failed for '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        die(QGE_ERR_IO, "cannot rename into '" + path + "'");
    }
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        die(QGE_ERR_INTERNAL, "sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Manifest digest covers everything except the timestamp, so reruns with the
// same inputs reproduce the same outputs byte for byte.
struct Manifest {
    json body;

    explicit Manifest(const std::string& command) {
        body["command"] = command;
        body["version"] = qge_version();
        body["params"] = json::object();
        body["seeds"] = json::object();
        body["inputs"] = json::object();
    }

    template <class T>
    void param(const std::string& key, const T& value) { body["params"][key] = value; }
    void seed(const std::string& key, std::uint64_t value) { body["seeds"][key] = value; }
    std::string input(const std::string& path) {
        auto text = read_file(path);
        body["inputs"][path] = "sha256:" + sha256_hex(text);
        return text;
    }
    std::string digest() const { return sha256_hex(body.dump()); }
};

enum class Format { csv, json, graph };

struct Output {
    std::string path; // empty means stdout
    std::string plot;
};

void emit(const Output& o, const Manifest& m, const std::string& payload, Format fmt) {
    if (o.path.empty()) {
        std::cout << payload;
        if (fmt == Format::json)
            std::cout << "\n";
        return;
    }
    const std::string digest = m.digest();
    std::string data;
    if (fmt == Format::json) {
        auto j = json::parse(payload);
        j["manifest"] = digest;
        data = j.dump() + "\n";
    } else {
        data = payload + "# manifest: " + digest + "\n";
    }
    atomic_write(o.path, data);
    json side = m.body;
    side["digest"] = digest;
    side["timestamp"] = utc_now();
    atomic_write(o.path + ".manifest.json", side.dump(2) + "\n");
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

double cell_value(const std::string& s) {
    if (s.empty())
        return std::nan("");
    try {
        return std::stod(s);
    } catch (...) {
        return std::nan("");
    }
}

struct Series {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> pts;
};

// Minimal line chart; log10 y axis when every value is positive.
std::string svg_plot(const std::vector<Series>& series, const std::string& xlabel, const std::string& ylabel) {
    const double W = 640, H = 400, L = 70, R = 20, T = 20, Bm = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    bool log_y = true;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
            if (y <= 0)
                log_y = false;
        }
    if (!std::isfinite(x0)) {
        x0 = 0;
        x1 = 1;
        y0 = 0;
        y1 = 1;
        log_y = false;
    }
    auto fy = [&](double y) { return log_y ? std::log10(y) : y; };
    double ly0 = fy(y0), ly1 = fy(y1);
    if (x1 == x0)
        x1 = x0 + 1;
    if (ly1 == ly0)
        ly1 = ly0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - Bm - (fy(y) - ly0) / (ly1 - ly0) * (H - T - Bm); };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return std::string(buf);
    };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - Bm << "\" x2=\"" << W - R << "\" y2=\"" << H - Bm
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - Bm << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << L << "\" y=\"" << H - Bm + 16 << "\" font-size=\"11\">" << fmt(x0) << "</text>\n"
      << "<text x=\"" << W - R << "\" y=\"" << H - Bm + 16 << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(x1)
      << "</text>\n"
      << "<text x=\"" << L - 4 << "\" y=\"" << H - Bm << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(y0)
      << "</text>\n"
      << "<text x=\"" << L - 4 << "\" y=\"" << T + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(y1)
      << "</text>\n"
      << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << xlabel << "</text>\n"
      << "<text x=\"14\" y=\"" << (T + H - Bm) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << (T + H - Bm) / 2 << ")\" text-anchor=\"middle\">" << ylabel << (log_y ? " (log)" : "") << "</text>\n";
    int legend = 0;
    for (const auto& s : series) {
        if (s.pts.empty())
            continue;
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.pts)
            o << px(x) << "," << py(y) << " ";
        o << "\"/>\n";
        o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 + 14 * legend++ << "\" font-size=\"12\" fill=\""
          << s.color << "\" text-anchor=\"end\">" << s.name << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

using GraphPtr = std::unique_ptr<qge_graph, decltype(&qge_graph_free)>;
using SystemPtr = std::unique_ptr<qge_system, decltype(&qge_system_free)>;

GraphPtr load_graph(Manifest& m, const std::string& path) {
    const auto text = m.input(path);
    qge_graph* g = nullptr;
    check(qge_graph_parse(text.c_str(), &g));
    return GraphPtr(g, qge_graph_free);
}

struct SystemArgs {
    std::string graph;
    std::string sigma = "et";
    std::string lengths;
    std::uint64_t length_seed = 0;

    void add(CLI::App* app) {
        app->add_option("--graph", graph, "graph file")->required();
        app->add_option("--sigma", sigma, "vertex scattering: et or kirchhoff");
        app->add_option("--lengths", lengths, "bond lengths file, one per line");
        app->add_option("--length-seed", length_seed, "seed for random lengths in [1, 2)");
    }

    SystemPtr load(Manifest& m) const {
        auto g = load_graph(m, graph);
        m.param("sigma", sigma);
        std::string ltext;
        if (!lengths.empty())
            ltext = m.input(lengths);
        else
            m.seed("length_seed", length_seed);
        qge_system* s = nullptr;
        check(qge_system_create(g.get(), sigma.c_str(), lengths.empty() ? nullptr : ltext.c_str(), length_seed, &s));
        return SystemPtr(s, qge_system_free);
    }
};

void add_output(CLI::App* app, Output& o, bool plot) {
    app->add_option("--out", o.path, "output file (default stdout)");
    if (plot)
        app->add_option("--plot", o.plot, "SVG line plot");
}

void write_plot(const Output& o, const std::vector<Series>& series, const std::string& xl, const std::string& yl) {
    if (!o.plot.empty())
        atomic_write(o.plot, svg_plot(series, xl, yl));
}

int exit_code(qge_status st) {
    switch (st) {
    case QGE_ERR_PARSE: return 2;
    case QGE_ERR_NUMERICAL: return 4;
    default: return 3;
    }
}

void print_error(qge_status st, const std::string& msg) {
    json j;
    j["error"] = {{"kind", qge_status_name(st)}, {"message", msg}};
    std::cerr << j.dump() << "\n";
}

void apply_thread_env() {
    const char* env = std::getenv("QGE_THREADS");
    if (!env || !*env)
        return;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0)
        die(QGE_ERR_PARAMETER, std::string("QGE_THREADS must be a non-negative integer, got '") + env + "'");
    qge_set_threads(static_cast<unsigned>(v));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum graph ergodicity toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qge_version()));

    // graph
    auto* graph = app.add_subcommand("graph", "generate and inspect regular graphs");
    graph->require_subcommand(1);
    int gen_n = 0, gen_d = 4;
    std::uint64_t gen_seed = 0;
    Output gen_out;
    auto* gen = graph->add_subcommand("gen", "sample a uniform random d-regular graph");
    gen->add_option("--n", gen_n, "vertices")->required();
    gen->add_option("--d", gen_d, "degree");
    gen->add_option("--seed", gen_seed, "sampler seed");
    add_output(gen, gen_out, false);

    std::string info_path;
    Output info_out;
    auto* info = graph->add_subcommand("info", "spectral report as JSON");
    info->add_option("file", info_path, "graph file")->required();
    add_output(info, info_out, false);

    std::string census_path;
    int census_t = 3;
    Output census_out;
    auto* cen = graph->add_subcommand("census", "short-cycle census as JSON");
    cen->add_option("file", census_path, "graph file")->required();
    cen->add_option("--t", census_t, "length parameter");
    add_output(cen, census_out, false);

    // scatter
    auto* scatter = app.add_subcommand("scatter", "vertex scattering matrices");
    scatter->require_subcommand(1);
    std::string dump_kind = "et";
    int dump_d = 4;
    Output dump_out;
    auto* dump = scatter->add_subcommand("dump", "sigma as re,im CSV");
    dump->add_option("--kind", dump_kind, "et or kirchhoff");
    dump->add_option("--d", dump_d, "degree");
    add_output(dump, dump_out, false);

    // variance
    SystemArgs var_sys;
    qge_variance_options vopt;
    qge_variance_defaults(&vopt);
    std::string var_obs = "parity", var_obs_file;
    bool var_mc = false;
    Output var_out;
    auto* var = app.add_subcommand("variance", "k-averaged quantum variance");
    var_sys.add(var);
    var->add_option("--K", vopt.K, "upper end of the k window");
    var->add_option("--samples", vopt.samples, "k samples");
    var->add_flag("--monte-carlo", var_mc, "uniform random k instead of midpoints");
    var->add_option("--grid-seed", vopt.grid_seed, "seed for --monte-carlo");
    var->add_option("--obs", var_obs, "parity, random, constant or file");
    var->add_option("--obs-file", var_obs_file, "observable file for --obs file");
    var->add_option("--obs-seed", vopt.observable_seed, "seed for --obs random");
    var->add_option("--kappa", vopt.kappa, "observable bound");
    add_output(var, var_out, false);

    // walk
    auto* walk = app.add_subcommand("walk", "classical bond walk diagnostics");
    walk->require_subcommand(1);
    SystemArgs decay_sys;
    int decay_T = 30;
    std::string decay_obs = "parity";
    std::uint64_t decay_seed = 0;
    Output decay_out;
    auto* decay = walk->add_subcommand("decay", "norm decay of M^t f against the bound");
    decay_sys.add(decay);
    decay->add_option("--T", decay_T, "last time step");
    decay->add_option("--obs", decay_obs, "parity or random");
    decay->add_option("--obs-seed", decay_seed, "seed for --obs random");
    add_output(decay, decay_out, true);

    SystemArgs sing_sys;
    Output sing_out;
    auto* sing = walk->add_subcommand("singular", "singular values of M with multiplicities");
    sing_sys.add(sing);
    add_output(sing, sing_out, false);

    // spectrum
    SystemArgs spec_sys;
    double spec_kmin = 0.0, spec_kmax = 10.0, spec_res = 1e-3;
    Output spec_out;
    auto* spec = app.add_subcommand("spectrum", "roots of det(U(k) - I)");
    spec_sys.add(spec);
    spec->add_option("--kmin", spec_kmin, "window start");
    spec->add_option("--kmax", spec_kmax, "window end");
    spec->add_option("--resolution", spec_res, "scan step");
    add_output(spec, spec_out, false);

    // experiment
    std::string exp_config;
    Output exp_out;
    auto* exp = app.add_subcommand("experiment", "random regular family sweep");
    exp->add_option("--config", exp_config, "key=value config file")->required();
    add_output(exp, exp_out, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(QGE_ERR_PARSE, e.what());
        return 2;
    }

    try {
        apply_thread_env();

        if (gen->parsed()) {
            Manifest m("graph gen");
            m.param("n", gen_n);
            m.param("d", gen_d);
            m.seed("seed", gen_seed);
            qge_graph* g = nullptr;
            check(qge_graph_generate(gen_n, gen_d, gen_seed, &g));
            GraphPtr hold(g, qge_graph_free);
            char* text = nullptr;
            check(qge_graph_text(g, &text));
            emit(gen_out, m, take(text), Format::graph);
        } else if (info->parsed()) {
            Manifest m("graph info");
            auto g = load_graph(m, info_path);
            char* out = nullptr;
            check(qge_graph_info_json(g.get(), &out));
            emit(info_out, m, take(out), Format::json);
        } else if (cen->parsed()) {
            Manifest m("graph census");
            m.param("t", census_t);
            auto g = load_graph(m, census_path);
            char* out = nullptr;
            check(qge_graph_census_json(g.get(), census_t, &out));
            emit(census_out, m, take(out), Format::json);
        } else if (dump->parsed()) {
            Manifest m("scatter dump");
            m.param("kind", dump_kind);
            m.param("d", dump_d);
            char* out = nullptr;
            check(qge_sigma_csv(dump_kind.c_str(), dump_d, &out));
            emit(dump_out, m, take(out), Format::csv);
        } else if (var->parsed()) {
            Manifest m("variance");
            auto s = var_sys.load(m);
            m.param("K", vopt.K);
            m.param("samples", vopt.samples);
            m.param("monte_carlo", var_mc);
            m.param("obs", var_obs);
            m.param("kappa", vopt.kappa);
            if (var_mc)
                m.seed("grid_seed", vopt.grid_seed);
            if (var_obs == "random")
                m.seed("obs_seed", vopt.observable_seed);
            std::string obs_text;
            if (var_obs == "file") {
                if (var_obs_file.empty())
                    die(QGE_ERR_PARAMETER, "--obs file needs --obs-file");
                obs_text = m.input(var_obs_file);
                vopt.observable_text = obs_text.c_str();
            }
            vopt.monte_carlo = var_mc ? 1 : 0;
            vopt.observable = var_obs.c_str();
            char* out = nullptr;
            check(qge_variance_json(s.get(), &vopt, &out));
            emit(var_out, m, take(out), Format::json);
        } else if (decay->parsed()) {
            Manifest m("walk decay");
            auto s = decay_sys.load(m);
            m.param("T", decay_T);
            m.param("obs", decay_obs);
            if (decay_obs == "random")
                m.seed("obs_seed", decay_seed);
            char* out = nullptr;
            check(qge_walk_decay_csv(s.get(), decay_T, decay_obs.c_str(), decay_seed, &out));
            const auto csv = take(out);
            emit(decay_out, m, csv, Format::csv);
            Series norm{"norm", "#1f77b4", {}}, bound{"bound", "#d62728", {}};
            for (const auto& r : csv_rows(csv)) {
                const double t = cell_value(r.at(0)), nv = cell_value(r.at(1)), bv = cell_value(r.at(2));
                if (std::isfinite(nv))
                    norm.pts.emplace_back(t, nv);
                if (std::isfinite(bv))
                    bound.pts.emplace_back(t, bv);
            }
            write_plot(decay_out, {norm, bound}, "t", "||M^t f||");
        } else if (sing->parsed()) {
            Manifest m("walk singular");
            auto s = sing_sys.load(m);
            char* out = nullptr;
            check(qge_walk_singular_csv(s.get(), &out));
            emit(sing_out, m, take(out), Format::csv);
        } else if (spec->parsed()) {
            Manifest m("spectrum");
            auto s = spec_sys.load(m);
            m.param("kmin", spec_kmin);
            m.param("kmax", spec_kmax);
            m.param("resolution", spec_res);
            char* out = nullptr;
            check(qge_spectrum_csv(s.get(), spec_kmin, spec_kmax, spec_res, &out));
            emit(spec_out, m, take(out), Format::csv);
        } else if (exp->parsed()) {
            Manifest m("experiment");
            const auto text = m.input(exp_config);
            char *csv = nullptr, *meta = nullptr, *canon = nullptr;
            check(qge_experiment_run(text.c_str(), &csv, &meta, &canon));
            const auto table = take(csv), metadata = take(meta);
            const auto config = json::parse(take(canon));
            m.param("config", config);
            if (config.contains("seeds"))
                m.body["seeds"]["family"] = config["seeds"];
            Output o = exp_out;
            if (o.path.empty() && config.contains("output") && config["output"].is_string())
                o.path = config["output"].get<std::string>();
            emit(o, m, table, Format::csv);
            if (!o.path.empty()) {
                auto mj = json::parse(metadata);
                mj["manifest"] = m.digest();
                atomic_write(o.path + ".meta.json", mj.dump(2) + "\n");
            }
            // Per-n means over the non-control rows.
            std::map<double, std::pair<double, int>> var_by_n, bound_by_n;
            for (const auto& r : csv_rows(table)) {
                if (r.size() < 12 || r[10] == "constant" || r[11].rfind("failed", 0) == 0)
                    continue;
                const double n = cell_value(r[0]), v = cell_value(r[6]), b = cell_value(r[7]);
                if (std::isfinite(v)) {
                    var_by_n[n].first += v;
                    var_by_n[n].second += 1;
                }
                if (std::isfinite(b)) {
                    bound_by_n[n].first += b;
                    bound_by_n[n].second += 1;
                }
            }
            Series vs{"mean variance", "#1f77b4", {}}, bs{"mean bound", "#d62728", {}};
            for (auto& [n, acc] : var_by_n)
                vs.pts.emplace_back(n, acc.first / acc.second);
            for (auto& [n, acc] : bound_by_n)
                bs.pts.emplace_back(n, acc.first / acc.second);
            write_plot(o, {vs, bs}, "n", "variance");
        }
    } catch (const CliError& e) {
        print_error(e.status, e.message);
        return exit_code(e.status);
    } catch (const std::exception& e) {
        print_error(QGE_ERR_INTERNAL, e.what());
        return 3;
    }
    return 0;
}
