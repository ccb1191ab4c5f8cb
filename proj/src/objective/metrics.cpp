#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "gaat/error.hpp"
#include "gaat/objective.hpp"

namespace gaat::obj {

namespace {

void check_lengths(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const double> labels) {
    check_lengths(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos = 0.0, rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] > 0.5) {
                pos += 1.0;
                rank_sum += mid_rank;
            }
        }
        i = j;
    }
    const double neg = static_cast<double>(scores.size()) - pos;
    if (pos == 0.0 || neg == 0.0) throw std::invalid_argument("auc needs both positive and negative labels");
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double f1(std::span<const double> scores, std::span<const double> labels, double theta) {
    check_lengths(scores, labels);
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] > theta;
        const bool actual = labels[i] > 0.5;
        tp += predicted && actual;
        fp += predicted && !actual;
        fn += !predicted && actual;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double average_precision(std::span<const double> scores, std::span<const double> labels) {
    check_lengths(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double total_pos = 0.0;
    for (double y : labels) total_pos += y > 0.5;
    if (total_pos == 0.0) throw std::invalid_argument("average precision needs at least one positive label");
    double hits = 0.0, ap = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (labels[order[k]] > 0.5) {
            hits += 1.0;
            ap += hits / static_cast<double>(k + 1);
        }
    }
    return ap / total_pos;
}

Metrics evaluate_scores(std::span<const double> scores, std::span<const double> labels) {
    return {auc(scores, labels), f1(scores, labels), average_precision(scores, labels)};
}

}  // namespace gaat::obj
