#include "qge/qge.h"

#include "qge/bounds.hpp"
#include "qge/error.hpp"
#include "qge/evolution.hpp"
#include "qge/graph.hpp"
#include "qge/parallel.hpp"
#include "qge/scattering.hpp"
#include "qge/walk.hpp"
#include "text.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

struct qge_graph {
    qge::Graph g;
};

struct qge_system {
    qge::MetricGraph mg;
    qge::Assembly a;
};

namespace {

thread_local std::string last_error;

qge_status status_of(qge::ErrorKind k) {
    using qge::ErrorKind;
    switch (k) {
    case ErrorKind::parameter: return QGE_ERR_PARAMETER;
    case ErrorKind::parse: return QGE_ERR_PARSE;
    case ErrorKind::validation: return QGE_ERR_VALIDATION;
    case ErrorKind::sampling: return QGE_ERR_SAMPLING;
    case ErrorKind::budget: return QGE_ERR_BUDGET;
    case ErrorKind::nonexistent: return QGE_ERR_NONEXISTENT;
    case ErrorKind::construction: return QGE_ERR_CONSTRUCTION;
    case ErrorKind::assembly: return QGE_ERR_ASSEMBLY;
    case ErrorKind::identity: return QGE_ERR_IDENTITY;
    case ErrorKind::domain: return QGE_ERR_DOMAIN;
    case ErrorKind::numerical: return QGE_ERR_NUMERICAL;
    case ErrorKind::io: return QGE_ERR_IO;
    }
    return QGE_ERR_INTERNAL;
}

template <class F>
qge_status guard(F&& fn) {
    try {
        fn();
        last_error.clear();
        return QGE_OK;
    } catch (const qge::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown failure";
    }
    return QGE_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
    if (!p)
        qge::fail(qge::ErrorKind::parameter, std::string(what) + " is null");
}

char* dup(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

qge::Observable walk_observable(const qge::Graph& g, const std::string& name, std::uint64_t seed, double kappa) {
    if (name == "parity")
        return qge::parity_observable(g, kappa);
    if (name == "random")
        return qge::random_traceless_observable(g.directed_count(), kappa, seed);
    qge::fail(qge::ErrorKind::parameter, "unknown observable '" + name + "'");
}

} // namespace

extern "C" {

const char* qge_version(void) { return "0.1.0"; }

const char* qge_status_name(qge_status status) {
    switch (status) {
    case QGE_OK: return "ok";
    case QGE_ERR_PARAMETER: return "parameter";
    case QGE_ERR_PARSE: return "parse";
    case QGE_ERR_VALIDATION: return "validation";
    case QGE_ERR_SAMPLING: return "sampling";
    case QGE_ERR_BUDGET: return "budget";
    case QGE_ERR_NONEXISTENT: return "nonexistent";
    case QGE_ERR_CONSTRUCTION: return "construction";
    case QGE_ERR_ASSEMBLY: return "assembly";
    case QGE_ERR_IDENTITY: return "identity";
    case QGE_ERR_DOMAIN: return "domain";
    case QGE_ERR_NUMERICAL: return "numerical";
    case QGE_ERR_IO: return "io";
    case QGE_ERR_INTERNAL: return "internal";
    }
    return "internal";
}

const char* qge_last_error(void) { return last_error.c_str(); }

void qge_set_threads(unsigned count) { qge::set_thread_count(count); }

void qge_free_string(char* s) { std::free(s); }

qge_status qge_graph_generate(int n, int d, uint64_t seed, qge_graph** out) {
    return guard([&] {
        need(out, "out");
        *out = new qge_graph{qge::generate_random_regular(n, d, seed)};
    });
}

qge_status qge_graph_parse(const char* text, qge_graph** out) {
    return guard([&] {
        need(text, "text");
        need(out, "out");
        *out = new qge_graph{qge::import_graph(text)};
    });
}

void qge_graph_free(qge_graph* g) { delete g; }

qge_status qge_graph_shape(const qge_graph* g, int* n, int* d, int* bonds) {
    return guard([&] {
        need(g, "graph");
        if (n)
            *n = g->g.n();
        if (d)
            *d = g->g.d();
        if (bonds)
            *bonds = g->g.bond_count();
    });
}

qge_status qge_graph_text(const qge_graph* g, char** out) {
    return guard([&] {
        need(g, "graph");
        need(out, "out");
        *out = dup(qge::export_graph(g->g));
    });
}

qge_status qge_graph_info_json(const qge_graph* g, char** out) {
    return guard([&] {
        need(g, "graph");
        need(out, "out");
        *out = dup(qge::spectral_json(g->g, qge::spectral_report(g->g)));
    });
}

qge_status qge_graph_census_json(const qge_graph* g, int t, char** out) {
    return guard([&] {
        need(g, "graph");
        need(out, "out");
        *out = dup(qge::census_json(qge::census(g->g, t)));
    });
}

qge_status qge_sigma_csv(const char* kind, int d, char** out) {
    return guard([&] {
        need(kind, "kind");
        need(out, "out");
        *out = dup(qge::sigma_csv(qge::make_sigma(qge::parse_sigma_kind(kind), d)));
    });
}

qge_status qge_system_create(const qge_graph* g, const char* sigma_kind, const char* lengths_text,
                             uint64_t length_seed, qge_system** out) {
    return guard([&] {
        need(g, "graph");
        need(sigma_kind, "sigma kind");
        need(out, "out");
        const auto kind = qge::parse_sigma_kind(sigma_kind);
        const int B = g->g.bond_count();
        auto L = lengths_text ? qge::parse_lengths(lengths_text, B) : qge::random_lengths(B, length_seed);
        qge::MetricGraph mg(g->g, std::move(L));
        auto a = qge::build_assembly(mg, kind);
        *out = new qge_system{std::move(mg), std::move(a)};
    });
}

void qge_system_free(qge_system* s) { delete s; }

void qge_variance_defaults(qge_variance_options* opts) {
    if (!opts)
        return;
    opts->K = 200.0;
    opts->samples = 200;
    opts->monte_carlo = 0;
    opts->grid_seed = 0;
    opts->kappa = 1.0;
    opts->observable = "parity";
    opts->observable_seed = 0;
    opts->observable_text = nullptr;
}

qge_status qge_variance_json(const qge_system* s, const qge_variance_options* opts, char** out) {
    return guard([&] {
        need(s, "system");
        need(opts, "options");
        need(out, "out");
        const auto& g = s->mg.graph();
        const std::string name = opts->observable ? opts->observable : "parity";
        std::optional<qge::Observable> f;
        if (name == "constant")
            f = qge::constant_observable(g.directed_count(), opts->kappa);
        else if (name == "file") {
            need(opts->observable_text, "observable text");
            f = qge::parse_observable(opts->observable_text, g.directed_count());
        } else
            f = walk_observable(g, name, opts->observable_seed, opts->kappa);

        qge::KGrid grid;
        grid.K = opts->K;
        grid.samples = opts->samples;
        grid.monte_carlo = opts->monte_carlo != 0;
        grid.seed = opts->grid_seed;
        const auto v = qge::variance_estimate(s->a, s->mg, *f, grid);

        nlohmann::ordered_json j;
        j["B"] = g.bond_count();
        j["K"] = grid.K;
        j["samples"] = v.samples;
        j["estimate"] = v.estimate;
        j["stderr"] = v.stderr_;
        *out = dup(j.dump());
    });
}

qge_status qge_walk_decay_csv(const qge_system* s, int T, const char* observable, uint64_t observable_seed,
                              char** out) {
    return guard([&] {
        need(s, "system");
        need(out, "out");
        const auto& g = s->mg.graph();
        const auto f = walk_observable(g, observable ? observable : "parity", observable_seed, 1.0);
        const auto w = qge::classical_map(s->a);
        const auto basis = qge::vertex_basis(s->a.bonds);
        const double beta = qge::spectral_report(g).beta;
        *out = dup(qge::decay_csv(qge::decay_profile(w, basis, f.f, T, beta)));
    });
}

qge_status qge_walk_singular_csv(const qge_system* s, char** out) {
    return guard([&] {
        need(s, "system");
        need(out, "out");
        *out = dup(qge::singular_csv(qge::singular_profile(qge::classical_map(s->a))));
    });
}

qge_status qge_spectrum_csv(const qge_system* s, double k_min, double k_max, double resolution, char** out) {
    return guard([&] {
        need(s, "system");
        need(out, "out");
        std::string csv = "k,multiplicity\n";
        for (const auto& r : qge::spectrum_scan(s->a, s->mg, k_min, k_max, resolution))
            csv += qge::detail::num(r.k) + "," + std::to_string(r.multiplicity) + "\n";
        *out = dup(csv);
    });
}

qge_status qge_experiment_run(const char* config_text, char** csv, char** metadata_json, char** canonical_config) {
    return guard([&] {
        need(config_text, "config");
        const auto config = qge::parse_experiment_config(config_text);
        const auto r = qge::family_experiment(config);
        // Allocate everything first so a failure leaks nothing.
        std::string c = qge::experiment_csv(r), m = qge::experiment_metadata_json(r), k = qge::config_canonical(config);
        char* pc = csv ? dup(c) : nullptr;
        char* pm = nullptr;
        char* pk = nullptr;
        try {
            pm = metadata_json ? dup(m) : nullptr;
            pk = canonical_config ? dup(k) : nullptr;
        } catch (...) {
            std::free(pc);
            std::free(pm);
            throw;
        }
        if (csv)
            *csv = pc;
        if (metadata_json)
            *metadata_json = pm;
        if (canonical_config)
            *canonical_config = pk;
    });
}

} // extern "C"
