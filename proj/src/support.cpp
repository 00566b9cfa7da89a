#include "qge/error.hpp"
#include "qge/parallel.hpp"
#include "qge/random.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

namespace qge {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::sampling: return "sampling";
    case ErrorKind::budget: return "budget";
    case ErrorKind::nonexistent: return "nonexistent";
    case ErrorKind::construction: return "construction";
    case ErrorKind::assembly: return "assembly";
    case ErrorKind::identity: return "identity";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0)
        fail(ErrorKind::parameter, "Rng::below: empty range");
    // Accept only the largest multiple of bound to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned count) {
    if (count == 0) {
        count = std::thread::hardware_concurrency();
        if (count == 0)
            count = 1;
    }
    g_threads.store(count);
}

unsigned thread_count() { return g_threads.load(); }

} // namespace qge
