// hpnet: hierarchy-aware prototype classification in the Poincare ball.
//
// One command per process. Every command is deterministic given its config
// and seed; re-running overwrites outputs byte-identically. Exit codes:
// 0 success, 2 config error, 3 data error, 4 numerical failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hpnet/classifier.hpp"
#include "hpnet/errors.hpp"
#include "hpnet/hierarchy.hpp"
#include "hpnet/io.hpp"
#include "hpnet/metrics.hpp"
#include "hpnet/prototypes.hpp"
#include "hpnet/synthetic.hpp"
#include "hpnet/taxonomy.hpp"

namespace {

using hpnet::ClassDistanceMatrix;
using hpnet::FeatureBatch;
using hpnet::HierarchyMode;
using hpnet::Model;
using hpnet::SpaceMode;
using hpnet::Taxonomy;
using nlohmann::json;

// Failing stage and config hash, carried into every error message.
std::string g_stage = "parse-args";
std::string g_config_hash = "none";

void set_stage(const std::string& s) { g_stage = s; }

void set_config_hash(const std::string& canonical) {
    g_config_hash = hpnet::io::hash_hex(hpnet::io::config_hash(canonical));
}

std::string fd(double v) { return hpnet::io::format_double(v); }

// out.csv -> out_<suffix>.<ext>
std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix,
                              const std::string& ext) {
    std::filesystem::path q = p;
    q.replace_extension();
    return std::filesystem::path(q.string() + "_" + suffix + ext);
}

Taxonomy load_taxonomy(const std::string& path) {
    set_stage("parse-taxonomy");
    return Taxonomy::load(path);
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw hpnet::DataError(path.string() + ": cannot open for writing");
    out << j.dump(2) << "\n";
    out.close();
    if (!out) throw hpnet::DataError(path.string() + ": write failed");
}

void write_taxonomy_indented(const std::filesystem::path& path, const Taxonomy& t) {
    std::ofstream out(path);
    if (!out) throw hpnet::DataError(path.string() + ": cannot open for writing");
    std::vector<Taxonomy::NodeId> stack = {t.root()};
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (int i = 0; i < t.depth(v); ++i) out << '\t';
        out << t.label(v) << "\n";
        const auto& kids = t.children(v);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    out.close();
    if (!out) throw hpnet::DataError(path.string() + ": write failed");
}

int eval_k(int requested, int num_classes) {
    if (requested > 0) {
        if (requested > num_classes) {
            throw hpnet::ConfigError("top-k of " + std::to_string(requested) + " exceeds the " +
                                     std::to_string(num_classes) + " available classes");
        }
        return requested;
    }
    return std::min(5, num_classes);
}

///////////////////////////////////////////////////////////////////////////////
// encode-hierarchy
///////////////////////////////////////////////////////////////////////////////

struct EncodeOpts {
    std::string taxonomy;
    std::string method = "lcd";
    std::string out;
    int dim = 10;
    double curvature = 1.0;
    int epochs = 300;
    std::uint64_t seed = 1;
};

void run_encode(const EncodeOpts& o) {
    const Taxonomy tax = load_taxonomy(o.taxonomy);
    set_config_hash("encode-hierarchy|digest=" + hpnet::io::hash_hex(tax.leaf_digest()) +
                    "|method=" + o.method + "|dim=" + std::to_string(o.dim) + "|c=" +
                    fd(o.curvature) + "|epochs=" + std::to_string(o.epochs) +
                    "|seed=" + std::to_string(o.seed));

    if (o.method == "lcd") {
        set_stage("encode-lcd");
        const ClassDistanceMatrix dm = hpnet::lcd_encode(tax);
        set_stage("write-matrix");
        hpnet::io::write_distance_matrix_csv(o.out, dm);
        return;
    }
    if (o.method != "hcd") {
        throw hpnet::ConfigError("unknown encoding method '" + o.method + "', expected lcd or hcd");
    }

    set_stage("encode-hcd");
    hpnet::TreeEmbedConfig cfg;
    cfg.dim = o.dim;
    cfg.curvature = o.curvature;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    const hpnet::TreeEmbedResult res = hpnet::hcd_encode(tax, cfg);

    set_stage("write-matrix");
    hpnet::io::write_distance_matrix_csv(o.out, res.matrix);
    hpnet::io::write_node_embedding_csv(sibling(o.out, "embedding", ".csv"), res.embedding);

    // Distortion of the embedded leaf geometry against the LCA-height metric
    // of the same tree, so encodings are comparable at a glance.
    set_stage("write-summary");
    const ClassDistanceMatrix lcd = hpnet::lcd_encode(tax);
    hpnet::PrototypeSet leaves;
    leaves.mode = SpaceMode::Hyperbolic;
    leaves.curvature = res.embedding.curvature;
    leaves.labels = tax.leaf_labels();
    leaves.points = hpnet::Mat(tax.leaf_count(), res.embedding.points.cols());
    for (int k = 0; k < tax.leaf_count(); ++k) {
        leaves.points.row(k) = res.embedding.points.row(tax.leaf(k));
    }
    const hpnet::DistortionReport rep = hpnet::distortion_report(leaves, lcd);
    json j;
    j["initial_objective"] = res.initial_objective;
    j["final_objective"] = res.final_objective;
    j["converged"] = res.converged;
    j["distortion_vs_lca"] = rep.raw_distortion;
    j["scale_vs_lca"] = rep.scale;
    j["surrogate_loss_vs_lca"] = rep.surrogate_loss;
    j["config_hash"] = g_config_hash;
    write_json_file(sibling(o.out, "summary", ".json"), j);
}

///////////////////////////////////////////////////////////////////////////////
// fit-prototypes
///////////////////////////////////////////////////////////////////////////////

struct FitOpts {
    std::string matrix;
    std::string mode = "hyperbolic";
    int dim = 16;
    double curvature = 0.01;
    int steps = 2000;
    double lr = 0.1;
    std::uint64_t seed = 1;
    std::string out;
    std::string out_csv;
    std::string report;
};

void run_fit(const FitOpts& o) {
    set_stage("read-matrix");
    const ClassDistanceMatrix dm = hpnet::io::read_distance_matrix_csv(o.matrix);
    set_config_hash("fit-prototypes|mode=" + o.mode + "|dim=" + std::to_string(o.dim) +
                    "|c=" + fd(o.curvature) + "|steps=" + std::to_string(o.steps) +
                    "|lr=" + fd(o.lr) + "|seed=" + std::to_string(o.seed));

    hpnet::FitConfig cfg;
    cfg.mode = hpnet::space_mode_from_string(o.mode);
    cfg.dim = o.dim;
    cfg.curvature = o.curvature;
    cfg.steps = o.steps;
    cfg.lr = o.lr;
    cfg.seed = o.seed;

    set_stage("fit-prototypes");
    hpnet::FitResult res = hpnet::fit_prototypes(dm, cfg);

    set_stage("write-prototypes");
    hpnet::io::write_prototypes_binary(o.out, res.prototypes);
    if (!o.out_csv.empty()) hpnet::io::write_prototypes_csv(o.out_csv, res.prototypes);
    if (!o.report.empty()) {
        hpnet::io::write_distortion_report_json(o.report, res.report, g_config_hash);
    }
}

///////////////////////////////////////////////////////////////////////////////
// train
///////////////////////////////////////////////////////////////////////////////

struct TrainOpts {
    std::string taxonomy;
    std::string features;
    std::string mode = "hyperbolic";
    std::string hierarchy = "none";
    double curvature = 0.01;
    int dim = 16;
    double temperature = 0.1;
    double disto_weight = 1.0;
    int epochs = 60;
    int batch_size = 64;
    double lr = 0.1;
    double proto_lr = 0.1;
    int backbone_hidden = 0;
    int backbone_out = 0;
    int hcd_dim = 10;
    int hcd_epochs = 300;
    std::uint64_t seed = 1;
    std::string out;
    std::string history;
};

std::string train_canonical(const TrainOpts& o, std::uint64_t digest) {
    return "train|digest=" + hpnet::io::hash_hex(digest) + "|mode=" + o.mode + "|hierarchy=" +
           o.hierarchy + "|c=" + fd(o.curvature) + "|dim=" + std::to_string(o.dim) +
           "|T=" + fd(o.temperature) + "|disto_weight=" + fd(o.disto_weight) +
           "|epochs=" + std::to_string(o.epochs) + "|batch=" + std::to_string(o.batch_size) +
           "|lr=" + fd(o.lr) + "|proto_lr=" + fd(o.proto_lr) +
           "|backbone_hidden=" + std::to_string(o.backbone_hidden) +
           "|backbone_out=" + std::to_string(o.backbone_out) +
           "|hcd_dim=" + std::to_string(o.hcd_dim) +
           "|hcd_epochs=" + std::to_string(o.hcd_epochs) + "|seed=" + std::to_string(o.seed);
}

std::optional<ClassDistanceMatrix> encode_for(const Taxonomy& tax, HierarchyMode h, int hcd_dim,
                                              int hcd_epochs, std::uint64_t seed) {
    switch (h) {
        case HierarchyMode::None: return std::nullopt;
        case HierarchyMode::Lcd: set_stage("encode-lcd"); return hpnet::lcd_encode(tax);
        case HierarchyMode::Hcd: {
            set_stage("encode-hcd");
            hpnet::TreeEmbedConfig cfg;
            cfg.dim = hcd_dim;
            cfg.epochs = hcd_epochs;
            cfg.seed = seed;
            return hpnet::hcd_encode(tax, cfg).matrix;
        }
    }
    throw hpnet::ConfigError("unknown hierarchy mode");
}

void run_train(const TrainOpts& o) {
    const Taxonomy tax = load_taxonomy(o.taxonomy);
    set_config_hash(train_canonical(o, tax.leaf_digest()));

    set_stage("validate-config");
    hpnet::TrainConfig cfg;
    cfg.mode = hpnet::space_mode_from_string(o.mode);
    cfg.hierarchy = hpnet::hierarchy_mode_from_string(o.hierarchy);
    cfg.curvature = o.curvature;
    cfg.proto_dim = o.dim;
    cfg.temperature = o.temperature;
    cfg.disto_weight = o.disto_weight;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch_size;
    cfg.lr = o.lr;
    cfg.proto_lr = o.proto_lr;
    cfg.backbone_hidden = o.backbone_hidden;
    cfg.backbone_out = o.backbone_out;
    cfg.seed = o.seed;
    cfg.validate();

    set_stage("read-features");
    const FeatureBatch batch = hpnet::io::read_features_csv(o.features, tax.leaf_labels());

    const std::optional<ClassDistanceMatrix> target =
        encode_for(tax, cfg.hierarchy, o.hcd_dim, o.hcd_epochs, o.seed);

    set_stage("train");
    hpnet::TrainResult res =
        hpnet::train(cfg, batch, tax.leaf_labels(), target, tax.leaf_digest());

    set_stage("write-model");
    hpnet::io::write_model_binary(o.out, res.model, hpnet::io::config_hash(
                                                        train_canonical(o, tax.leaf_digest())));
    if (!o.history.empty()) {
        json meta;
        meta["command"] = "train";
        meta["config_hash"] = g_config_hash;
        meta["mode"] = o.mode;
        meta["hierarchy"] = o.hierarchy;
        meta["curvature"] = o.curvature;
        meta["dim"] = o.dim;
        meta["temperature"] = o.temperature;
        meta["disto_weight"] = o.disto_weight;
        meta["epochs"] = o.epochs;
        meta["seed"] = o.seed;
        hpnet::io::write_history_jsonl(o.history, meta.dump(), res.history);
    }
}

///////////////////////////////////////////////////////////////////////////////
// eval
///////////////////////////////////////////////////////////////////////////////

struct EvalOpts {
    std::string taxonomy;
    std::string model;
    std::string features;
    std::string predictions;
    int k = 0;  // 0 = min(5, K)
    std::string out;
    std::string predictions_out;
};

void run_eval(const EvalOpts& o) {
    if (o.model.empty() == o.predictions.empty()) {
        throw hpnet::ConfigError("eval needs exactly one of --model or --predictions");
    }
    if (!o.model.empty() && o.features.empty()) {
        throw hpnet::ConfigError("eval with --model requires --features");
    }
    const Taxonomy tax = load_taxonomy(o.taxonomy);

    hpnet::EvalReport report;
    if (!o.model.empty()) {
        set_stage("read-model");
        const hpnet::io::LoadedModel loaded = hpnet::io::read_model_binary(o.model);
        const Model& model = loaded.model;
        if (model.leaf_digest != 0 && model.leaf_digest != tax.leaf_digest()) {
            throw hpnet::DataError(
                "model was trained against a different taxonomy (leaf digest mismatch)");
        }
        if (model.labels != tax.leaf_labels()) {
            throw hpnet::DataError("model class labels do not match the taxonomy leaves");
        }
        set_config_hash("eval|digest=" + hpnet::io::hash_hex(tax.leaf_digest()) +
                        "|model_config=" + hpnet::io::hash_hex(loaded.config_hash) +
                        "|k=" + std::to_string(o.k));

        set_stage("read-features");
        const FeatureBatch batch = hpnet::io::read_features_csv(o.features, tax.leaf_labels());
        set_stage("predict");
        const int k = eval_k(o.k, model.num_classes());
        const auto topk = model.predict_topk_raw(batch.X, k);
        set_stage("score");
        report = hpnet::evaluate(topk, batch.y, tax);
        if (!o.predictions_out.empty()) {
            set_stage("write-predictions");
            hpnet::io::PredictionRows rows;
            rows.truth = batch.y;
            rows.topk = topk;
            rows.sample_ids.resize(topk.size());
            for (std::size_t i = 0; i < topk.size(); ++i) {
                rows.sample_ids[i] = std::to_string(i);
            }
            hpnet::io::write_predictions_csv(o.predictions_out, rows, tax.leaf_labels());
        }
    } else {
        // Decoupled scoring: rank lists produced by any external model.
        set_config_hash("eval|digest=" + hpnet::io::hash_hex(tax.leaf_digest()) +
                        "|predictions=external|k=" + std::to_string(o.k));
        set_stage("read-predictions");
        const hpnet::io::PredictionRows rows =
            hpnet::io::read_predictions_csv(o.predictions, tax.leaf_labels());
        set_stage("score");
        report = hpnet::evaluate(rows.topk, rows.truth, tax);
    }

    set_stage("write-report");
    hpnet::io::write_eval_report_json(o.out, report, g_config_hash);
}

///////////////////////////////////////////////////////////////////////////////
// sweep
///////////////////////////////////////////////////////////////////////////////

struct SweepOpts {
    std::string taxonomy;
    std::string features;
    std::string test_features;
    std::string mode = "hyperbolic";
    std::string hierarchy = "lcd";
    std::vector<double> curvatures = {0.01, 0.1, 1.0};
    std::vector<int> dims = {16};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    double temperature = 0.1;
    double disto_weight = 1.0;
    int epochs = 30;
    int batch_size = 64;
    double lr = 0.1;
    double proto_lr = 0.1;
    int k = 0;
    std::string out;
};

void run_sweep(const SweepOpts& o) {
    const Taxonomy tax = load_taxonomy(o.taxonomy);
    {
        std::ostringstream canon;
        canon << "sweep|digest=" << hpnet::io::hash_hex(tax.leaf_digest()) << "|mode=" << o.mode
              << "|hierarchy=" << o.hierarchy << "|T=" << fd(o.temperature)
              << "|disto_weight=" << fd(o.disto_weight) << "|epochs=" << o.epochs
              << "|batch=" << o.batch_size << "|lr=" << fd(o.lr)
              << "|proto_lr=" << fd(o.proto_lr) << "|k=" << o.k << "|cs=";
        for (double c : o.curvatures) canon << fd(c) << ",";
        canon << "|dims=";
        for (int d : o.dims) canon << d << ",";
        canon << "|seeds=";
        for (auto s : o.seeds) canon << s << ",";
        set_config_hash(canon.str());
    }
    if (o.curvatures.empty() || o.dims.empty() || o.seeds.empty()) {
        throw hpnet::ConfigError("sweep grids must be nonempty");
    }

    set_stage("read-features");
    const FeatureBatch train_batch = hpnet::io::read_features_csv(o.features, tax.leaf_labels());
    const FeatureBatch test_batch =
        hpnet::io::read_features_csv(o.test_features, tax.leaf_labels());

    const HierarchyMode hier = hpnet::hierarchy_mode_from_string(o.hierarchy);
    const int k = eval_k(o.k, tax.leaf_count());

    std::ostringstream body;
    for (const double c : o.curvatures) {
        for (const int dim : o.dims) {
            for (const std::uint64_t seed : o.seeds) {
                set_stage("sweep c=" + fd(c) + " dim=" + std::to_string(dim) +
                          " seed=" + std::to_string(seed));
                hpnet::TrainConfig cfg;
                cfg.mode = hpnet::space_mode_from_string(o.mode);
                cfg.hierarchy = hier;
                cfg.curvature = c;
                cfg.proto_dim = dim;
                cfg.temperature = o.temperature;
                cfg.disto_weight = o.disto_weight;
                cfg.epochs = o.epochs;
                cfg.batch_size = o.batch_size;
                cfg.lr = o.lr;
                cfg.proto_lr = o.proto_lr;
                cfg.seed = seed;
                const auto target = encode_for(tax, hier, 10, 300, seed);
                set_stage("sweep train c=" + fd(c) + " dim=" + std::to_string(dim) +
                          " seed=" + std::to_string(seed));
                const hpnet::TrainResult res =
                    hpnet::train(cfg, train_batch, tax.leaf_labels(), target, tax.leaf_digest());
                const auto topk = res.model.predict_topk_raw(test_batch.X, k);
                const hpnet::EvalReport rep = hpnet::evaluate(topk, test_batch.y, tax);

                body << fd(c) << "," << dim << "," << seed << "," << fd(rep.accuracy) << ",";
                if (rep.mistake_severity) body << fd(*rep.mistake_severity);
                body << "," << fd(rep.hd_at_k) << ",";
                if (target) body << fd(hpnet::disto_loss(res.model.prototypes, *target));
                body << "\n";
            }
        }
    }

    set_stage("write-sweep");
    std::ofstream out(o.out);
    if (!out) throw hpnet::DataError(o.out + ": cannot open for writing");
    out << "# config_hash=" << g_config_hash << "\n";
    out << "# k=" << k << "\n";
    out << "c,dim,seed,accuracy,mistake_severity,hd_at_k,disto\n";
    out << body.str();
    out.close();
    if (!out) throw hpnet::DataError(o.out + ": write failed");
}

///////////////////////////////////////////////////////////////////////////////
// export-matrix
///////////////////////////////////////////////////////////////////////////////

struct ExportOpts {
    std::string model;
    std::string taxonomy;  // optional digest check
    std::string out;
};

void run_export(const ExportOpts& o) {
    set_stage("read-model");
    const hpnet::io::LoadedModel loaded = hpnet::io::read_model_binary(o.model);
    const Model& model = loaded.model;
    set_config_hash("export-matrix|model_config=" + hpnet::io::hash_hex(loaded.config_hash));
    if (!o.taxonomy.empty()) {
        const Taxonomy tax = load_taxonomy(o.taxonomy);
        if (model.leaf_digest != 0 && model.leaf_digest != tax.leaf_digest()) {
            throw hpnet::DataError(
                "model was trained against a different taxonomy (leaf digest mismatch)");
        }
    }

    set_stage("export-matrix");
    std::ofstream out(o.out);
    if (!out) throw hpnet::DataError(o.out + ": cannot open for writing");
    out << "# config_hash=" << g_config_hash << "\n";

    auto block = [&](const std::string& name, const hpnet::Mat& D) {
        out << "# block=" << name << "\n";
        out << "label";
        for (const auto& l : model.labels) out << "," << l;
        out << "\n";
        for (int i = 0; i < D.rows(); ++i) {
            out << model.labels[static_cast<std::size_t>(i)];
            for (int j = 0; j < D.cols(); ++j) out << "," << fd(D(i, j));
            out << "\n";
        }
    };
    block("learned_distances", model.prototypes.distance_matrix());
    // Ground truth is present only for hierarchy-aware checkpoints; the
    // learned block still exports alone for side-by-side plotting.
    if (model.target) block("target_distances", model.target->D);
    out.close();
    if (!out) throw hpnet::DataError(o.out + ": write failed");
}

///////////////////////////////////////////////////////////////////////////////
// gen-synthetic
///////////////////////////////////////////////////////////////////////////////

struct GenOpts {
    std::vector<int> branching = {3, 2, 2};
    int feature_dim = 8;
    int train_per_class = 40;
    int test_per_class = 20;
    double center_scale = 4.0;
    double center_shrink = 0.5;
    double noise = 0.5;
    std::uint64_t seed = 1;
    std::string out_dir;
};

void run_gen(const GenOpts& o) {
    {
        std::ostringstream canon;
        canon << "gen-synthetic|branching=";
        for (int b : o.branching) canon << b << ",";
        canon << "|p=" << o.feature_dim << "|train=" << o.train_per_class
              << "|test=" << o.test_per_class << "|center_scale=" << fd(o.center_scale)
              << "|center_shrink=" << fd(o.center_shrink) << "|noise=" << fd(o.noise)
              << "|seed=" << o.seed;
        set_config_hash(canon.str());
    }
    hpnet::SyntheticConfig cfg;
    cfg.branching = o.branching;
    cfg.feature_dim = o.feature_dim;
    cfg.train_per_class = o.train_per_class;
    cfg.test_per_class = o.test_per_class;
    cfg.center_scale = o.center_scale;
    cfg.center_shrink = o.center_shrink;
    cfg.sample_noise = o.noise;
    cfg.seed = o.seed;

    set_stage("generate");
    const hpnet::SyntheticDataset ds = hpnet::make_synthetic(cfg);

    set_stage("write-dataset");
    std::error_code ec;
    std::filesystem::create_directories(o.out_dir, ec);
    if (ec) throw hpnet::DataError(o.out_dir + ": cannot create directory: " + ec.message());
    const std::filesystem::path dir(o.out_dir);
    write_taxonomy_indented(dir / "taxonomy.txt", ds.taxonomy);
    hpnet::io::write_features_csv(dir / "train.csv", ds.train, ds.taxonomy.leaf_labels());
    hpnet::io::write_features_csv(dir / "test.csv", ds.test, ds.taxonomy.leaf_labels());
}

///////////////////////////////////////////////////////////////////////////////

void report_error(const char* kind, const std::exception& e) {
    std::cerr << "error: " << kind << ": " << g_stage << ": " << e.what() << " (config "
              << g_config_hash << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchy-aware prototype classification in the Poincare ball"};
    app.require_subcommand(1);

    EncodeOpts enc;
    auto* enc_cmd = app.add_subcommand(
        "encode-hierarchy", "Encode a taxonomy into a class distance matrix (lcd or hcd)");
    enc_cmd->add_option("--taxonomy", enc.taxonomy, "Taxonomy file (indented or edge list)")
        ->required();
    enc_cmd->add_option("--method", enc.method, "Encoding: lcd or hcd")->required();
    enc_cmd->add_option("--out", enc.out, "Output distance matrix CSV")->required();
    enc_cmd->add_option("--dim", enc.dim, "hcd: embedding dimension");
    enc_cmd->add_option("--curvature", enc.curvature, "hcd: ball parameter c");
    enc_cmd->add_option("--epochs", enc.epochs, "hcd: optimization epochs");
    enc_cmd->add_option("--seed", enc.seed, "hcd: random seed");
    enc_cmd->callback([&] { run_encode(enc); });

    FitOpts fit;
    auto* fit_cmd = app.add_subcommand(
        "fit-prototypes", "Fit prototypes to a class distance matrix by distortion descent");
    fit_cmd->add_option("--matrix", fit.matrix, "Class distance matrix CSV")->required();
    fit_cmd->add_option("--mode", fit.mode, "hyperbolic or euclidean");
    fit_cmd->add_option("--dim", fit.dim, "Prototype dimension");
    fit_cmd->add_option("--curvature", fit.curvature, "Ball parameter c");
    fit_cmd->add_option("--steps", fit.steps, "Gradient steps");
    fit_cmd->add_option("--lr", fit.lr, "Learning rate");
    fit_cmd->add_option("--seed", fit.seed, "Random seed");
    fit_cmd->add_option("--out", fit.out, "Output prototype binary")->required();
    fit_cmd->add_option("--out-csv", fit.out_csv, "Also write prototypes as CSV");
    fit_cmd->add_option("--report", fit.report, "Distortion report JSON");
    fit_cmd->callback([&] { run_fit(fit); });

    TrainOpts tr;
    auto* tr_cmd = app.add_subcommand(
        "train", "Jointly train embeddings and prototypes on labeled features");
    tr_cmd->add_option("--taxonomy", tr.taxonomy, "Taxonomy file")->required();
    tr_cmd->add_option("--features", tr.features, "Training feature CSV")->required();
    tr_cmd->add_option("--mode", tr.mode, "hyperbolic or euclidean");
    tr_cmd->add_option("--hierarchy", tr.hierarchy, "none, lcd or hcd");
    tr_cmd->add_option("--curvature", tr.curvature, "Ball parameter c");
    tr_cmd->add_option("--dim", tr.dim, "Prototype dimension");
    tr_cmd->add_option("--temperature", tr.temperature, "Softmax temperature T");
    tr_cmd->add_option("--disto-weight", tr.disto_weight, "Weight of the distortion term");
    tr_cmd->add_option("--epochs", tr.epochs, "Training epochs");
    tr_cmd->add_option("--batch-size", tr.batch_size, "Mini-batch size");
    tr_cmd->add_option("--lr", tr.lr, "Learning rate for W and backbone");
    tr_cmd->add_option("--proto-lr", tr.proto_lr, "Learning rate for prototypes and bias");
    tr_cmd->add_option("--backbone-hidden", tr.backbone_hidden,
                       "Hidden width of the feature backbone (0 = none)");
    tr_cmd->add_option("--backbone-out", tr.backbone_out,
                       "Backbone output dimension (0 = input dimension)");
    tr_cmd->add_option("--hcd-dim", tr.hcd_dim, "hcd: embedding dimension");
    tr_cmd->add_option("--hcd-epochs", tr.hcd_epochs, "hcd: optimization epochs");
    tr_cmd->add_option("--seed", tr.seed, "Random seed");
    tr_cmd->add_option("--out", tr.out, "Output model checkpoint")->required();
    tr_cmd->add_option("--history", tr.history, "Per-epoch history JSONL");
    tr_cmd->callback([&] { run_train(tr); });

    EvalOpts ev;
    auto* ev_cmd = app.add_subcommand(
        "eval", "Score a model (or an external prediction file) against a taxonomy");
    ev_cmd->add_option("--taxonomy", ev.taxonomy, "Taxonomy file")->required();
    ev_cmd->add_option("--model", ev.model, "Model checkpoint");
    ev_cmd->add_option("--features", ev.features, "Feature CSV to score");
    ev_cmd->add_option("--predictions", ev.predictions, "Ranked prediction CSV (external model)");
    ev_cmd->add_option("--k", ev.k, "Ranking depth for hd@k (default min(5, K))");
    ev_cmd->add_option("--out", ev.out, "Evaluation report JSON")->required();
    ev_cmd->add_option("--predictions-out", ev.predictions_out, "Also write ranked predictions");
    ev_cmd->callback([&] { run_eval(ev); });

    SweepOpts sw;
    auto* sw_cmd = app.add_subcommand(
        "sweep", "Grid over curvature x dimension x seed, one tidy CSV row per cell");
    sw_cmd->add_option("--taxonomy", sw.taxonomy, "Taxonomy file")->required();
    sw_cmd->add_option("--features", sw.features, "Training feature CSV")->required();
    sw_cmd->add_option("--test-features", sw.test_features, "Held-out feature CSV")->required();
    sw_cmd->add_option("--mode", sw.mode, "hyperbolic or euclidean");
    sw_cmd->add_option("--hierarchy", sw.hierarchy, "none, lcd or hcd");
    sw_cmd->add_option("--curvatures", sw.curvatures, "Curvature grid")->delimiter(',');
    sw_cmd->add_option("--dims", sw.dims, "Dimension grid")->delimiter(',');
    sw_cmd->add_option("--seeds", sw.seeds, "Seed grid")->delimiter(',');
    sw_cmd->add_option("--temperature", sw.temperature, "Softmax temperature T");
    sw_cmd->add_option("--disto-weight", sw.disto_weight, "Weight of the distortion term");
    sw_cmd->add_option("--epochs", sw.epochs, "Training epochs per cell");
    sw_cmd->add_option("--batch-size", sw.batch_size, "Mini-batch size");
    sw_cmd->add_option("--lr", sw.lr, "Learning rate for W");
    sw_cmd->add_option("--proto-lr", sw.proto_lr, "Learning rate for prototypes and bias");
    sw_cmd->add_option("--k", sw.k, "Ranking depth for hd@k (default min(5, K))");
    sw_cmd->add_option("--out", sw.out, "Tidy results CSV")->required();
    sw_cmd->callback([&] { run_sweep(sw); });

    ExportOpts ex;
    auto* ex_cmd = app.add_subcommand(
        "export-matrix", "Export learned prototype distances beside the target matrix");
    ex_cmd->add_option("--model", ex.model, "Model checkpoint")->required();
    ex_cmd->add_option("--taxonomy", ex.taxonomy, "Optional taxonomy for a digest check");
    ex_cmd->add_option("--out", ex.out, "Output CSV")->required();
    ex_cmd->callback([&] { run_export(ex); });

    GenOpts gen;
    auto* gen_cmd = app.add_subcommand(
        "gen-synthetic", "Generate a hierarchical Gaussian benchmark dataset");
    gen_cmd->add_option("--branching", gen.branching, "Children per node at each level")
        ->delimiter(',');
    gen_cmd->add_option("--feature-dim", gen.feature_dim, "Feature dimension");
    gen_cmd->add_option("--train-per-class", gen.train_per_class, "Training samples per leaf");
    gen_cmd->add_option("--test-per-class", gen.test_per_class, "Test samples per leaf");
    gen_cmd->add_option("--center-scale", gen.center_scale, "Sigma of first-level centers");
    gen_cmd->add_option("--center-shrink", gen.center_shrink, "Per-level center noise decay");
    gen_cmd->add_option("--noise", gen.noise, "Sample noise around leaf centers");
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->required();
    gen_cmd->callback([&] { run_gen(gen); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const hpnet::ConfigError& e) {
        report_error("config", e);
        return 2;
    } catch (const hpnet::DataError& e) {
        report_error("data", e);
        return 3;
    } catch (const hpnet::NumericalError& e) {
        report_error("numerical", e);
        return 4;
    } catch (const std::exception& e) {
        report_error("internal", e);
        return 4;
    }
}
