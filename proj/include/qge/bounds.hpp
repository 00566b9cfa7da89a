#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qge {

/// sum_{t=1}^T t theta^t in closed form. Error(parameter) for theta == 1.
double weighted_geo_sum(double theta, int T);
/// theta / (theta - 1)^2. Error(parameter) unless |theta| < 1.
double weighted_geo_sum_inf(double theta);
/// sum_{t=1}^T theta^t w_T(t) = (theta/T^2)(T - 1 + theta^T - T theta)/(1 - theta)^2.
double fejer_geo_sum(double theta, int T);

struct BoundInputs {
    double kappa = 1.0;
    int d = 4;
    double beta = 0.0;   // measured gap
    int T = 1;
    long long census = 0; // |C_{B,2T}|
    int B = 0;
};

struct BoundTerms {
    double diag = 0.0;   // kappa^2 / T
    double walk = 0.0;   // 2 kappa^2 K (d-1)(d-1-beta_eff) / (T beta_eff^2)
    double cycles = 0.0; // 2 kappa^2 / ((d-2)(d-1)) * (d-1)/(d-2)^2 * (d-1)^T |C| / (T^2 B)
    double total = 0.0;
    double beta_eff = 0.0;
    double K = 0.0;
};

/// Explicit-constant form of the variance bound. beta_eff = min(beta, d-1-sqrt(d-1)),
/// the range where the walk decay estimate holds. Error(domain) when beta <= 0
/// or beta >= d-2 (walk term unavailable).
BoundTerms explicit_variance_bound(const BoundInputs& in);

/// max(1, floor((3/10) log_{d-1} n)).
int choose_horizon(long long n, int d);

struct WormaldParams {
    double n = 0.0;
    int d = 4;
    double k = 3.0;
    double S = 0.0;
    double A = 0.0;
};

/// log of exp(-5 (d-1)^k) (e/A)^{S/(4k)}.
double wormald_log_probability(const WormaldParams& p);
double wormald_probability(const WormaldParams& p);
/// k = (3/5) log_{d-1} n, S = floor(42 n^{3/5} log_{d-1} n), A = S / (12 n^{3/5} log_{d-1} n).
WormaldParams wormald_setup(double n, int d);

struct ExperimentConfig {
    int d = 4;
    std::vector<int> n_list;
    std::vector<std::uint64_t> seeds;
    double K = 200.0;
    int samples = 200;
    double kappa = 1.0;
    std::string output;
    std::string observable = "parity"; // or "random"
    std::uint64_t observable_seed = 0;
    bool control = true;               // append a constant-observable row
};

/// key=value lines; '#' comments. seeds and n_list take comma lists and a-b ranges.
ExperimentConfig parse_experiment_config(std::string_view text);
std::string config_canonical(const ExperimentConfig& c);

struct ExperimentRow {
    int n = 0;
    int B = 0;
    double beta = 0.0;
    std::optional<int> girth;
    long long census = 0;
    int T = 1;
    double variance = 0.0;
    double bound = 0.0; // NaN when unavailable
    std::uint64_t seed = 0;
    double stderr_ = 0.0;
    std::string observable;
    std::string status; // "ok", "bound_unavailable" or "failed: ..."
    BoundTerms terms;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ExperimentRow> rows;
};

/// One row per (n, seed) in config order, rows for failed seeds kept.
ExperimentResult family_experiment(const ExperimentConfig& config);

/// n,B,beta,girth,census,T,variance,bound,seed,stderr,observable,status
std::string experiment_csv(const ExperimentResult& r);
/// Constants and their sources for each bound term.
std::string experiment_metadata_json(const ExperimentResult& r);

} // namespace qge
