#include "treegroup/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace treegroup {

nlohmann::ordered_json ExperimentReport::to_json(bool include_timing) const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["rng"] = {{"seed", rng.seed}, {"stream", rng.stream}};
    j["samples"] = samples;
    j["params"] = params;
    j["results"] = results;
    if (include_timing) j["timing"] = {{"elapsed_seconds", elapsed_seconds}};
    return j;
}

namespace {

void csv_value(std::ostringstream& out, const std::string& key,
               const nlohmann::ordered_json& v) {
    if (v.is_array()) {
        std::size_t i = 0;
        for (const auto& item : v) csv_value(out, key + "[" + std::to_string(i++) + "]", item);
        return;
    }
    if (v.is_object()) {
        for (const auto& [k, item] : v.items()) csv_value(out, key + "." + k, item);
        return;
    }
    out << key << "," << v.dump() << "\n";
}

} // namespace

std::string ExperimentReport::to_csv() const {
    std::ostringstream out;
    out << "metric,value\n";
    out << "name," << name << "\n";
    out << "seed," << rng.seed << "\n";
    out << "stream," << rng.stream << "\n";
    out << "samples," << samples << "\n";
    for (const auto& [k, v] : params.items()) csv_value(out, "params." + k, v);
    for (const auto& [k, v] : results.items()) csv_value(out, k, v);
    return out.str();
}

double RunningStat::variance() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double v = (sum_sq - sum * sum / n) / (n - 1.0);
    return v > 0.0 ? v : 0.0;
}

double RunningStat::stderr_of_mean() const {
    if (count < 2) return 0.0;
    return std::sqrt(variance() / static_cast<double>(count));
}

int thread_cap() {
    if (const char* env = std::getenv("TREEGROUP_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

namespace detail {

void run_chunks(std::uint64_t chunk_count,
                const std::function<void(std::uint64_t)>& run_one) {
    const int workers = static_cast<int>(std::min<std::uint64_t>(
        static_cast<std::uint64_t>(thread_cap()), chunk_count));
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < chunk_count; ++c) run_one(c);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::uint64_t c = next.fetch_add(1);
                if (c >= chunk_count) return;
                run_one(c);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail

} // namespace treegroup
