#include "hpnet/metrics.hpp"

#include <cstddef>
#include <string>

#include "hpnet/errors.hpp"

namespace hpnet {

namespace {

void check_pair(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes) {
    if (pred.empty()) throw DataError("no predictions to score");
    if (pred.size() != truth.size()) {
        throw DataError("got " + std::to_string(pred.size()) + " predictions for " +
                        std::to_string(truth.size()) + " true labels");
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= num_classes || truth[i] < 0 || truth[i] >= num_classes) {
            throw DataError("sample " + std::to_string(i) + " has a class index outside [0, " +
                            std::to_string(num_classes) + ")");
        }
    }
}

}  // namespace

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.empty() || pred.size() != truth.size()) {
        throw DataError("prediction and truth vectors must be nonempty and equal-sized");
    }
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

MistakeSeverity mistake_severity(const std::vector<int>& pred, const std::vector<int>& truth,
                                 const Taxonomy& taxonomy) {
    check_pair(pred, truth, taxonomy.leaf_count());
    MistakeSeverity out;
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) continue;
        ++out.mistakes;
        total += static_cast<double>(
            taxonomy.height(taxonomy.lca(taxonomy.leaf(pred[i]), taxonomy.leaf(truth[i]))));
    }
    if (out.mistakes > 0) out.mean_height = total / static_cast<double>(out.mistakes);
    return out;
}

double hd_at_k(const std::vector<std::vector<int>>& topk, const std::vector<int>& truth,
               const ClassDistanceMatrix& dm) {
    if (topk.empty()) throw DataError("no predictions to score");
    if (topk.size() != truth.size()) {
        throw DataError("got " + std::to_string(topk.size()) + " prediction rows for " +
                        std::to_string(truth.size()) + " true labels");
    }
    const int K = dm.size();
    const std::size_t k = topk.front().size();
    if (k < 1 || static_cast<int>(k) > K) {
        throw DataError("top-k width " + std::to_string(k) + " is out of range [1, " +
                        std::to_string(K) + "]");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < topk.size(); ++i) {
        if (topk[i].size() != k) throw DataError("ragged top-k rows");
        if (truth[i] < 0 || truth[i] >= K) {
            throw DataError("true class index out of range at sample " + std::to_string(i));
        }
        double row = 0.0;
        for (int p : topk[i]) {
            if (p < 0 || p >= K) {
                throw DataError("predicted class index out of range at sample " +
                                std::to_string(i));
            }
            row += dm.D(p, truth[i]);
        }
        total += row / static_cast<double>(k);
    }
    return total / static_cast<double>(topk.size());
}

EvalReport evaluate(const std::vector<std::vector<int>>& topk, const std::vector<int>& truth,
                    const Taxonomy& taxonomy) {
    if (topk.empty()) throw DataError("no predictions to score");
    std::vector<int> top1(topk.size());
    for (std::size_t i = 0; i < topk.size(); ++i) {
        if (topk[i].empty()) throw DataError("empty top-k row at sample " + std::to_string(i));
        top1[i] = topk[i].front();
    }
    const ClassDistanceMatrix lcd = lcd_encode(taxonomy);

    EvalReport report;
    report.samples = static_cast<int>(topk.size());
    report.k = static_cast<int>(topk.front().size());
    report.accuracy = accuracy(top1, truth);
    const MistakeSeverity ms = mistake_severity(top1, truth, taxonomy);
    report.mistake_severity = ms.mean_height;
    report.mistake_count = ms.mistakes;
    report.hd_at_k = hd_at_k(topk, truth, lcd);
    return report;
}

}  // namespace hpnet
