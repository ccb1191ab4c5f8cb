#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gaat::pipeline {

using MetricMap = std::map<std::string, double>;

struct SeedRow {
    std::uint64_t seed = 0;
    MetricMap metrics;
    std::optional<std::string> error;
};

struct SeedReport {
    std::vector<SeedRow> rows;
    MetricMap mean;
    MetricMap stddev;  // sample standard deviation (n - 1); 0 for a single row
    std::size_t failures = 0;
};

/// Runs `run` once per seed. Exceptions are recorded on the row and excluded from the aggregate.
SeedReport run_seeds(const std::function<MetricMap(std::uint64_t)>& run, std::span<const std::uint64_t> seeds);

/// Mean and sample standard deviation of each metric over the rows without an error.
void aggregate(SeedReport& report);

}  // namespace gaat::pipeline
