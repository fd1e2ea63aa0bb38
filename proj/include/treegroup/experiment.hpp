#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "treegroup/rng.hpp"

namespace treegroup {

// Aggregated outcome of a Monte Carlo run. Everything except `elapsed_seconds`
// is a pure function of (name, params, rng, samples), so two runs with the
// same configuration serialize identically once timing is excluded; that is
// what to_json(false) is for.
struct ExperimentReport {
    std::string name;
    RngConfig rng;
    std::uint64_t samples = 0;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    double elapsed_seconds = 0.0;

    nlohmann::ordered_json to_json(bool include_timing = true) const;
    // Tidy rows "metric,value", one line per scalar; arrays are indexed.
    std::string to_csv() const;
};

// Mean / standard error helper for scalar samples.
struct RunningStat {
    std::uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++count;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const RunningStat& o) {
        count += o.count;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
    // Unbiased sample variance.
    double variance() const;
    double stderr_of_mean() const;
};

// Number of worker threads: TREEGROUP_THREADS if set (clamped to >= 1),
// otherwise hardware concurrency.
int thread_cap();

namespace detail {
void run_chunks(std::uint64_t chunk_count,
                const std::function<void(std::uint64_t)>& run_one);
}

inline constexpr std::uint64_t kSamplesPerChunk = 4096;

// Runs per_sample(index, rng, state) for every index in [0, samples), in
// fixed chunks of 4096 samples. Each sample gets its own engine derived from
// (cfg, index) and each chunk accumulates into its own State; the states are
// then merged in chunk order. The result is therefore independent of the
// thread count.
template <typename State, typename PerSample>
State run_samples(std::uint64_t samples, const RngConfig& cfg,
                  PerSample per_sample) {
    const std::uint64_t chunks = (samples + kSamplesPerChunk - 1) / kSamplesPerChunk;
    std::vector<State> states(static_cast<std::size_t>(chunks));
    detail::run_chunks(chunks, [&](std::uint64_t c) {
        const std::uint64_t begin = c * kSamplesPerChunk;
        const std::uint64_t end = std::min(samples, begin + kSamplesPerChunk);
        State& state = states[static_cast<std::size_t>(c)];
        for (std::uint64_t i = begin; i < end; ++i) {
            Rng rng(cfg, i);
            per_sample(i, rng, state);
        }
    });
    State merged;
    for (auto& s : states) merged.merge(s);
    return merged;
}

} // namespace treegroup
