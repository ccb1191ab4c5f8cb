#include "gaat/pipeline/seeds.hpp"

#include <cmath>
#include <exception>

namespace gaat::pipeline {

void aggregate(SeedReport& report) {
    report.mean.clear();
    report.stddev.clear();
    report.failures = 0;
    std::map<std::string, std::vector<double>> values;
    for (const SeedRow& row : report.rows) {
        if (row.error) {
            ++report.failures;
            continue;
        }
        for (const auto& [k, v] : row.metrics) values[k].push_back(v);
    }
    for (const auto& [k, xs] : values) {
        double sum = 0.0;
        for (double x : xs) sum += x;
        const double mean = sum / static_cast<double>(xs.size());
        double sq = 0.0;
        for (double x : xs) sq += (x - mean) * (x - mean);
        report.mean[k] = mean;
        report.stddev[k] = xs.size() > 1 ? std::sqrt(sq / static_cast<double>(xs.size() - 1)) : 0.0;
    }
}

SeedReport run_seeds(const std::function<MetricMap(std::uint64_t)>& run, std::span<const std::uint64_t> seeds) {
    SeedReport report;
    for (const std::uint64_t seed : seeds) {
        SeedRow row;
        row.seed = seed;
        try {
            row.metrics = run(seed);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    aggregate(report);
    return report;
}

}  // namespace gaat::pipeline
