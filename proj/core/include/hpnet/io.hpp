#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hpnet/classifier.hpp"
#include "hpnet/hierarchy.hpp"
#include "hpnet/metrics.hpp"
#include "hpnet/prototypes.hpp"

// Artifact serialization. Text artifacts print doubles with %.17g so values
// round-trip exactly and reruns of the same config are byte-identical; no
// artifact embeds timestamps or machine state. Binary artifacts carry a
// magic, a format version and a trailing FNV-1a checksum over everything
// before it, with all integers and doubles little-endian.

namespace hpnet::io {

std::string format_double(double v);

// FNV-1a over the canonical config string; hex form goes into artifacts so
// mismatched pipelines are detectable.
std::uint64_t config_hash(const std::string& canonical);
std::string hash_hex(std::uint64_t h);

///////////////////////////////////////////////////////////////////////////////
// Class distance matrices (CSV: label header row, label first column)
///////////////////////////////////////////////////////////////////////////////

void write_distance_matrix_csv(const std::filesystem::path& path, const ClassDistanceMatrix& dm);
ClassDistanceMatrix read_distance_matrix_csv(const std::filesystem::path& path);

///////////////////////////////////////////////////////////////////////////////
// Prototypes (CSV for inspection, binary as the authoritative artifact)
///////////////////////////////////////////////////////////////////////////////

void write_prototypes_csv(const std::filesystem::path& path, const PrototypeSet& p);
PrototypeSet read_prototypes_csv(const std::filesystem::path& path);

void write_prototypes_binary(const std::filesystem::path& path, const PrototypeSet& p);
PrototypeSet read_prototypes_binary(const std::filesystem::path& path);

///////////////////////////////////////////////////////////////////////////////
// Feature batches (CSV: header "label,f1,...,fp")
///////////////////////////////////////////////////////////////////////////////

FeatureBatch read_features_csv(const std::filesystem::path& path,
                               const std::vector<std::string>& class_labels);
void write_features_csv(const std::filesystem::path& path, const FeatureBatch& batch,
                        const std::vector<std::string>& class_labels);

///////////////////////////////////////////////////////////////////////////////
// Ranked predictions (CSV: header "sample_id,true_label,pred1,...,predk")
///////////////////////////////////////////////////////////////////////////////

struct PredictionRows {
    std::vector<std::string> sample_ids;
    std::vector<int> truth;
    std::vector<std::vector<int>> topk;

    int k() const { return topk.empty() ? 0 : static_cast<int>(topk.front().size()); }
};

void write_predictions_csv(const std::filesystem::path& path, const PredictionRows& rows,
                           const std::vector<std::string>& class_labels);
PredictionRows read_predictions_csv(const std::filesystem::path& path,
                                    const std::vector<std::string>& class_labels);

///////////////////////////////////////////////////////////////////////////////
// Model checkpoint (binary)
///////////////////////////////////////////////////////////////////////////////

void write_model_binary(const std::filesystem::path& path, const Model& model,
                        std::uint64_t config_hash_value);

struct LoadedModel {
    Model model;
    std::uint64_t config_hash = 0;
};

LoadedModel read_model_binary(const std::filesystem::path& path);

///////////////////////////////////////////////////////////////////////////////
// Reports and training history
///////////////////////////////////////////////////////////////////////////////

void write_eval_report_json(const std::filesystem::path& path, const EvalReport& report,
                            const std::string& config_hash_hex);
void write_distortion_report_json(const std::filesystem::path& path,
                                  const DistortionReport& report,
                                  const std::string& config_hash_hex);

// meta_line must be a complete one-line JSON object; it becomes the first
// line, followed by one JSON object per epoch.
void write_history_jsonl(const std::filesystem::path& path, const std::string& meta_line,
                         const std::vector<EpochRecord>& history);

// All-node ball coordinates from a tree embedding (CSV: label,x0,...).
void write_node_embedding_csv(const std::filesystem::path& path, const NodeEmbedding& emb);

}  // namespace hpnet::io
