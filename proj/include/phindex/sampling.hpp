#pragma once

// Monte-Carlo "random journal" sampling: draw n-paper samples from a paper
// citation population, record each sample's citation average and phi, and
// compare the spread against the envelopes mu -+ k*sigma/sqrt(n).
//
// Everything is deterministic given a seed. Each size bin derives its own
// RNG stream from the master seed, so bins can run in parallel and a run's
// output never depends on thread scheduling.

#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "phi.hpp"
#include "stats.hpp"

namespace phindex {

enum class Replacement { WithoutReplacement, WithReplacement };

struct SimulationConfig {
    std::vector<std::uint64_t> size_grid;  // strictly ascending sample sizes
    std::uint64_t draws_per_size = 0;
    std::uint64_t seed = 0;
    Replacement replacement = Replacement::WithoutReplacement;
};

struct SimPoint {
    std::uint64_t n = 0;
    double f_n = 0.0;  // sample citation average
    double phi = 0.0;  // (f_n - mu) * sqrt(n) / sigma against the population
};

struct SimulationResult {
    std::vector<SimPoint> points;  // grouped by size, in size_grid order
    double population_mu = 0.0;
    double population_sigma = 0.0;
    SimulationConfig config;
};

struct EnvelopeBand {
    std::uint64_t n = 0;
    double lower = 0.0;
    double upper = 0.0;
};

struct Envelope {
    double k = 0.0;
    std::vector<EnvelopeBand> curve;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derived (not consecutive) stream seeds, so concurrent streams never overlap.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master + (stream + 1) * 0x9e3779b97f4a7c15ull);
}

// mt19937_64 core (sequence pinned by the standard, hence portable) with a
// hand-rolled bounded draw: std::uniform_int_distribution is implementation
// defined and would break byte-identical output across toolchains.
class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Lemire's unbiased multiply-and-reject; bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        unsigned __int128 m = (unsigned __int128)gen_() * bound;
        auto low = std::uint64_t(m);
        if (low < bound) {
            const std::uint64_t cutoff = (~bound + 1) % bound;
            while (low < cutoff) {
                m = (unsigned __int128)gen_() * bound;
                low = std::uint64_t(m);
            }
        }
        return std::uint64_t(m >> 64);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_unit() { return double(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

namespace detail {

// Reusable sampler. Without replacement it runs a partial Fisher-Yates over
// a persistent index array and undoes its swaps after every draw, so a draw
// costs O(n), not O(population).
class JournalSampler {
public:
    JournalSampler(std::span<const double> population, Replacement mode)
        : pop_(population), mode_(mode) {
        if (mode_ == Replacement::WithoutReplacement) {
            index_.resize(pop_.size());
            std::iota(index_.begin(), index_.end(), std::size_t{0});
        }
    }

    void draw(std::uint64_t n, SampleRng& rng, std::vector<double>& out) {
        out.resize(n);
        const std::uint64_t size = pop_.size();
        if (mode_ == Replacement::WithReplacement) {
            for (std::uint64_t i = 0; i < n; ++i) out[i] = pop_[rng.next_below(size)];
            return;
        }
        swaps_.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint64_t j = i + rng.next_below(size - i);
            std::swap(index_[i], index_[j]);
            swaps_[i] = j;
            out[i] = pop_[index_[i]];
        }
        for (std::uint64_t i = n; i-- > 0;) std::swap(index_[i], index_[swaps_[i]]);
    }

private:
    std::span<const double> pop_;
    Replacement mode_;
    std::vector<std::size_t> index_;
    std::vector<std::uint64_t> swaps_;
};

}  // namespace detail

inline std::vector<double> draw_random_journal(std::span<const double> population,
                                               std::uint64_t n, SampleRng& rng,
                                               Replacement mode = Replacement::WithoutReplacement) {
    if (population.empty()) throw DataError("draw_random_journal: empty population");
    if (n < 1) throw DataError("draw_random_journal: n must be at least 1");
    if (mode == Replacement::WithoutReplacement && n > population.size())
        throw DataError("draw_random_journal: n exceeds population size when sampling "
                        "without replacement");
    detail::JournalSampler sampler(population, mode);
    std::vector<double> out;
    sampler.draw(n, rng, out);
    return out;
}

inline SimulationResult run_simulation(std::span<const double> population,
                                       const SimulationConfig& config) {
    if (population.empty()) throw DataError("run_simulation: empty population");
    if (config.size_grid.empty()) throw DataError("run_simulation: empty size grid");
    if (config.draws_per_size < 1)
        throw DataError("run_simulation: draws_per_size must be at least 1");
    for (std::size_t i = 0; i < config.size_grid.size(); ++i) {
        const auto n = config.size_grid[i];
        if (n < 1) throw DataError("run_simulation: sample sizes must be positive");
        if (i > 0 && n <= config.size_grid[i - 1])
            throw DataError("run_simulation: size grid must be strictly ascending");
        if (config.replacement == Replacement::WithoutReplacement && n > population.size())
            throw DataError("run_simulation: size " + std::to_string(n) +
                            " exceeds population size " + std::to_string(population.size()) +
                            " when sampling without replacement");
    }
    const Moments pop = describe(population);
    if (!(pop.stddev > 0))
        throw DataError("run_simulation: degenerate population, sigma is zero");

    SimulationResult result;
    result.population_mu = pop.mean;
    result.population_sigma = pop.stddev;
    result.config = config;
    const std::uint64_t draws = config.draws_per_size;
    result.points.resize(config.size_grid.size() * draws);

    auto run_bin = [&](std::size_t bin) {
        SampleRng rng(split_seed(config.seed, bin));
        detail::JournalSampler sampler(population, config.replacement);
        std::vector<double> sample;
        const std::uint64_t n = config.size_grid[bin];
        const double sqrt_n = std::sqrt(double(n));
        SimPoint* slot = result.points.data() + bin * draws;
        for (std::uint64_t d = 0; d < draws; ++d) {
            sampler.draw(n, rng, sample);
            double sum = 0.0;
            for (double x : sample) sum += x;
            const double f = sum / double(n);
            slot[d] = {n, f, (f - pop.mean) * sqrt_n / pop.stddev};
        }
    };

    if (config.size_grid.size() == 1) {
        run_bin(0);
    } else {
        std::vector<std::future<void>> bins;
        bins.reserve(config.size_grid.size());
        for (std::size_t b = 0; b < config.size_grid.size(); ++b)
            bins.push_back(std::async(std::launch::async, run_bin, b));
        for (auto& fut : bins) fut.get();
    }
    return result;
}

// k = 0 is allowed and collapses the band onto mu.
inline Envelope clt_envelope(double mu, double sigma, double k,
                             std::span<const std::uint64_t> size_grid) {
    if (!(sigma > 0)) throw DataError("clt_envelope: sigma must be positive");
    if (k < 0 || !std::isfinite(k)) throw DataError("clt_envelope: k must be non-negative");
    Envelope env;
    env.k = k;
    env.curve.reserve(size_grid.size());
    for (const auto n : size_grid) {
        if (n < 1) throw DataError("clt_envelope: sizes must be positive");
        const double half = k * sigma / std::sqrt(double(n));
        env.curve.push_back({n, mu - half, mu + half});
    }
    return env;
}

// Fraction of points with |f_n - mu| <= k*sigma/sqrt(n). The inequality is
// closed: a point exactly on the envelope counts as covered.
inline double coverage(std::span<const SimPoint> points, double mu, double sigma, double k) {
    if (points.empty()) throw DataError("coverage: empty input");
    if (!(sigma > 0)) throw DataError("coverage: sigma must be positive");
    if (k < 0 || !std::isfinite(k)) throw DataError("coverage: k must be non-negative");
    std::uint64_t inside = 0;
    for (const auto& p : points)
        if (std::abs(p.f_n - mu) <= k * sigma / std::sqrt(double(p.n))) ++inside;
    return double(inside) / double(points.size());
}

inline double coverage(std::span<const JournalAggregate> journals, double mu, double sigma,
                       double k) {
    if (journals.empty()) throw DataError("coverage: empty input");
    if (!(sigma > 0)) throw DataError("coverage: sigma must be positive");
    if (k < 0 || !std::isfinite(k)) throw DataError("coverage: k must be non-negative");
    std::uint64_t inside = 0;
    for (const auto& j : journals) {
        if (j.n < 1) throw DataError("coverage: aggregate with n=0");
        if (std::abs(j.f - mu) <= k * sigma / std::sqrt(double(j.n))) ++inside;
    }
    return double(inside) / double(journals.size());
}

// Standard deviation of the phi values (population convention), optionally
// restricted to one sample size. Near 1 when the standardization is doing
// its job at that size.
inline double empirical_se(const SimulationResult& result,
                           std::optional<std::uint64_t> n_filter = std::nullopt) {
    std::vector<double> phis;
    phis.reserve(result.points.size());
    for (const auto& p : result.points)
        if (!n_filter || p.n == *n_filter) phis.push_back(p.phi);
    if (phis.size() < 2) throw DataError("empirical_se: need at least 2 matching points");
    return describe(phis).stddev;
}

// Twenty log-spaced sizes from 10 to 10,000.
inline std::vector<std::uint64_t> default_size_grid() {
    std::vector<std::uint64_t> grid;
    for (int i = 0; i < 20; ++i) {
        const double expo = 1.0 + 3.0 * double(i) / 19.0;
        const auto n = std::uint64_t(std::llround(std::pow(10.0, expo)));
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    return grid;
}

inline constexpr std::uint64_t kDefaultDrawsPerSize = 2000;

}  // namespace phindex
