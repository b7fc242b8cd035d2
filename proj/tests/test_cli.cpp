#include "doctest.h"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hpnet/hierarchy.hpp"
#include "hpnet/io.hpp"
#include "hpnet/taxonomy.hpp"

// Drives the installed command-line binary end to end. The binary path
// arrives in the HPNET_CLI environment variable, set by the test harness.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* env = std::getenv("HPNET_CLI");
    REQUIRE_MESSAGE(env != nullptr, "HPNET_CLI must point at the command-line binary");
    return env;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("hpnet_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

// Runs the CLI, captures combined output into log, returns the exit code.
int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        "\"" + cli_path() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

int count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("cli pipeline: generate, encode, fit, train, evaluate, export") {
    TempDir dir;
    const fs::path log = dir.path / "log.txt";

    // Synthetic data: 4 leaves, two 2-leaf branches.
    REQUIRE(run_cli("gen-synthetic --branching 2,2 --feature-dim 4 --train-per-class 12 "
                    "--test-per-class 6 --seed 3 --out-dir " + dir.path.string(),
                    log) == 0);
    REQUIRE(fs::exists(dir.file("taxonomy.txt")));
    REQUIRE(fs::exists(dir.file("train.csv")));
    REQUIRE(fs::exists(dir.file("test.csv")));

    const hpnet::Taxonomy tax = hpnet::Taxonomy::load(dir.file("taxonomy.txt"));
    CHECK(tax.leaf_count() == 4);
    CHECK(tax.tree_height() == 2);

    // Hierarchy encoding.
    REQUIRE(run_cli("encode-hierarchy --taxonomy " + dir.file("taxonomy.txt") +
                    " --method lcd --out " + dir.file("lcd.csv"),
                    log) == 0);
    const hpnet::ClassDistanceMatrix dm = hpnet::io::read_distance_matrix_csv(dir.file("lcd.csv"));
    CHECK(dm.size() == 4);
    CHECK(dm.encoding_tag == "lcd");
    CHECK(dm.D(0, 1) == 1.0);
    CHECK(dm.D(0, 2) == 2.0);

    // Standalone prototype fit from the matrix.
    REQUIRE(run_cli("fit-prototypes --matrix " + dir.file("lcd.csv") +
                    " --mode hyperbolic --dim 4 --curvature 1.0 --steps 300 --lr 0.1 --seed 2"
                    " --out " + dir.file("protos.bin") + " --out-csv " + dir.file("protos.csv") +
                    " --report " + dir.file("fit_report.json"),
                    log) == 0);
    const hpnet::PrototypeSet protos = hpnet::io::read_prototypes_binary(dir.file("protos.bin"));
    CHECK(protos.size() == 4);
    CHECK(protos.dim() == 4);
    protos.validate();
    const json fit_rep = read_json(dir.file("fit_report.json"));
    // The fit is scale-free, so only the scaled surrogate is meaningfully
    // small; the unscaled distortion just has to be reported and sane.
    CHECK(fit_rep["surrogate_loss"].get<double>() < 0.01);
    CHECK(fit_rep["distortion"].get<double>() >= 0.0);
    CHECK(fit_rep["scale"].get<double>() > 0.0);
    CHECK(fit_rep.contains("config_hash"));

    // Joint training with the hierarchy term.
    const std::string train_args =
        "train --taxonomy " + dir.file("taxonomy.txt") + " --features " + dir.file("train.csv") +
        " --mode hyperbolic --hierarchy lcd --curvature 1.0 --dim 4 --temperature 0.2"
        " --disto-weight 1.0 --epochs 12 --batch-size 16 --lr 0.05 --proto-lr 0.05 --seed 1"
        " --history " + dir.file("history.jsonl");
    REQUIRE(run_cli(train_args + " --out " + dir.file("model.bin"), log) == 0);
    CHECK(count_lines(dir.file("history.jsonl")) == 13);  // meta line + 12 epochs

    const hpnet::io::LoadedModel loaded = hpnet::io::read_model_binary(dir.file("model.bin"));
    CHECK(loaded.model.labels == tax.leaf_labels());
    CHECK(loaded.model.leaf_digest == tax.leaf_digest());
    REQUIRE(loaded.model.target.has_value());
    CHECK(loaded.model.target->encoding_tag == "lcd");

    // Evaluation from the checkpoint, also exporting ranked predictions.
    REQUIRE(run_cli("eval --taxonomy " + dir.file("taxonomy.txt") + " --model " +
                    dir.file("model.bin") + " --features " + dir.file("test.csv") +
                    " --k 2 --out " + dir.file("report.json") + " --predictions-out " +
                    dir.file("preds.csv"),
                    log) == 0);
    const json rep = read_json(dir.file("report.json"));
    CHECK(rep["samples"].get<int>() == 24);
    CHECK(rep["k"].get<int>() == 2);
    CHECK(rep["accuracy"].get<double>() >= 0.5);

    // Decoupled evaluation: scoring the exported predictions reproduces the
    // same metrics without the model.
    REQUIRE(run_cli("eval --taxonomy " + dir.file("taxonomy.txt") + " --predictions " +
                    dir.file("preds.csv") + " --k 2 --out " + dir.file("report2.json"),
                    log) == 0);
    const json rep2 = read_json(dir.file("report2.json"));
    CHECK(rep2["accuracy"] == rep["accuracy"]);
    CHECK(rep2["mistake_severity"] == rep["mistake_severity"]);
    CHECK(rep2["mistake_count"] == rep["mistake_count"]);
    CHECK(rep2["hd_at_k"] == rep["hd_at_k"]);
    CHECK(rep2["samples"] == rep["samples"]);

    // Matrix export carries the learned block and the training target block.
    REQUIRE(run_cli("export-matrix --model " + dir.file("model.bin") + " --taxonomy " +
                    dir.file("taxonomy.txt") + " --out " + dir.file("matrix.csv"),
                    log) == 0);
    const std::string matrix_text = slurp(dir.file("matrix.csv"));
    CHECK(matrix_text.find("# block=learned_distances") != std::string::npos);
    CHECK(matrix_text.find("# block=target_distances") != std::string::npos);
}

TEST_CASE("cli artifacts are byte-identical across reruns") {
    TempDir dir;
    const fs::path log = dir.path / "log.txt";

    REQUIRE(run_cli("gen-synthetic --branching 2,2 --feature-dim 3 --train-per-class 8 "
                    "--test-per-class 4 --seed 7 --out-dir " + dir.path.string(),
                    log) == 0);
    const std::string train_a = slurp(dir.file("train.csv"));

    REQUIRE(run_cli("gen-synthetic --branching 2,2 --feature-dim 3 --train-per-class 8 "
                    "--test-per-class 4 --seed 7 --out-dir " + dir.path.string(),
                    log) == 0);
    CHECK(slurp(dir.file("train.csv")) == train_a);

    const std::string train_cmd =
        "train --taxonomy " + dir.file("taxonomy.txt") + " --features " + dir.file("train.csv") +
        " --mode hyperbolic --hierarchy lcd --curvature 1.0 --dim 3 --epochs 4 --batch-size 8"
        " --temperature 0.2 --lr 0.05 --proto-lr 0.05 --seed 5 --history " +
        dir.file("hist.jsonl");
    REQUIRE(run_cli(train_cmd + " --out " + dir.file("m1.bin"), log) == 0);
    const std::string hist_a = slurp(dir.file("hist.jsonl"));
    REQUIRE(run_cli(train_cmd + " --out " + dir.file("m2.bin"), log) == 0);

    CHECK(slurp(dir.file("m1.bin")) == slurp(dir.file("m2.bin")));
    CHECK(slurp(dir.file("hist.jsonl")) == hist_a);

    // hcd encoding, the only stochastic encoder, is also seed-stable.
    const std::string enc_cmd = "encode-hierarchy --taxonomy " + dir.file("taxonomy.txt") +
                                " --method hcd --dim 3 --epochs 30 --seed 2 --out ";
    REQUIRE(run_cli(enc_cmd + dir.file("h1.csv"), log) == 0);
    REQUIRE(run_cli(enc_cmd + dir.file("h2.csv"), log) == 0);
    CHECK(slurp(dir.file("h1.csv")) == slurp(dir.file("h2.csv")));
    CHECK(fs::exists(dir.file("h1_embedding.csv")));
    CHECK(fs::exists(dir.file("h1_summary.json")));
    CHECK(slurp(dir.file("h1_embedding.csv")) == slurp(dir.file("h2_embedding.csv")));
}

TEST_CASE("cli sweep emits one row per grid cell") {
    TempDir dir;
    const fs::path log = dir.path / "log.txt";

    REQUIRE(run_cli("gen-synthetic --branching 2,2 --feature-dim 3 --train-per-class 8 "
                    "--test-per-class 4 --seed 11 --out-dir " + dir.path.string(),
                    log) == 0);
    REQUIRE(run_cli("sweep --taxonomy " + dir.file("taxonomy.txt") + " --features " +
                    dir.file("train.csv") + " --test-features " + dir.file("test.csv") +
                    " --mode hyperbolic --hierarchy lcd --curvatures 0.5,1.0 --dims 3"
                    " --seeds 1,2 --epochs 3 --batch-size 8 --k 2 --out " +
                    dir.file("sweep.csv"),
                    log) == 0);

    std::ifstream in(dir.file("sweep.csv"));
    std::string line;
    std::vector<std::string> rows;
    std::string header;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) continue;
        if (header.empty()) {
            header = line;
        } else {
            rows.push_back(line);
        }
    }
    CHECK(header == "c,dim,seed,accuracy,mistake_severity,hd_at_k,disto");
    CHECK(rows.size() == 4);  // 2 curvatures x 1 dim x 2 seeds
    for (const auto& r : rows) {
        CHECK(std::count(r.begin(), r.end(), ',') == 6);
    }
}

TEST_CASE("cli maps failure kinds to distinct exit codes") {
    TempDir dir;
    const fs::path log = dir.path / "log.txt";

    REQUIRE(run_cli("gen-synthetic --branching 2 --feature-dim 3 --train-per-class 4 "
                    "--test-per-class 2 --seed 1 --out-dir " + dir.path.string(),
                    log) == 0);

    CHECK(run_cli("--help", log) == 0);

    // Unknown flag: argument parsing failure.
    CHECK(run_cli("train --no-such-flag", log) == 2);

    // Bad enum value: configuration error.
    CHECK(run_cli("train --taxonomy " + dir.file("taxonomy.txt") + " --features " +
                  dir.file("train.csv") + " --mode banana --out " + dir.file("m.bin"),
                  log) == 2);
    CHECK(slurp(log).find("error: config") != std::string::npos);

    // Missing input file: data error.
    CHECK(run_cli("encode-hierarchy --taxonomy " + dir.file("nope.txt") + " --method lcd --out " +
                  dir.file("x.csv"),
                  log) == 3);
    CHECK(slurp(log).find("error: data") != std::string::npos);

    // Corrupt checkpoint: data error.
    {
        std::ofstream bad(dir.file("bad.bin"), std::ios::binary);
        bad << "HPNMgarbage";
    }
    CHECK(run_cli("eval --taxonomy " + dir.file("taxonomy.txt") + " --model " +
                  dir.file("bad.bin") + " --features " + dir.file("test.csv") + " --out " +
                  dir.file("r.json"),
                  log) == 3);

    // eval needs exactly one of --model / --predictions.
    CHECK(run_cli("eval --taxonomy " + dir.file("taxonomy.txt") + " --out " + dir.file("r.json"),
                  log) == 2);
}

TEST_CASE("cli eval refuses a taxonomy that does not match the checkpoint") {
    TempDir dir;
    const fs::path log = dir.path / "log.txt";

    REQUIRE(run_cli("gen-synthetic --branching 2,2 --feature-dim 3 --train-per-class 6 "
                    "--test-per-class 3 --seed 2 --out-dir " + dir.path.string(),
                    log) == 0);
    REQUIRE(run_cli("train --taxonomy " + dir.file("taxonomy.txt") + " --features " +
                    dir.file("train.csv") + " --mode euclidean --dim 3 --epochs 2 --batch-size 8"
                    " --seed 1 --out " + dir.file("model.bin"),
                    log) == 0);

    // A different tree with different leaves.
    {
        std::ofstream other(dir.file("other.txt"));
        other << "root\n\tp\n\tq\n";
    }
    CHECK(run_cli("eval --taxonomy " + dir.file("other.txt") + " --model " + dir.file("model.bin") +
                  " --features " + dir.file("test.csv") + " --out " + dir.file("r.json"),
                  log) == 3);
    CHECK(slurp(log).find("error: data") != std::string::npos);
}

TEST_CASE("cli encode-hierarchy on the shipped 65-condition taxonomy") {
    TempDir dir;
    const fs::path log = dir.path / "log.txt";
    const std::string taxonomy =
        std::string(HPNET_DATA_DIR) + "/example_taxonomy_65.txt";

    REQUIRE(run_cli("encode-hierarchy --taxonomy " + taxonomy +
                        " --method lcd --out " + dir.file("d65.csv"),
                    log) == 0);

    const hpnet::ClassDistanceMatrix m =
        hpnet::io::read_distance_matrix_csv(dir.file("d65.csv"));
    REQUIRE(m.size() == 65);
    double max_entry = 0.0;
    for (int i = 0; i < 65; ++i) {
        for (int j = 0; j < 65; ++j) {
            const double v = m.D(i, j);
            CHECK(v == static_cast<double>(static_cast<int>(v)));  // integers
            max_entry = std::max(max_entry, v);
        }
    }
    CHECK(max_entry == 3.0);
    CHECK(m.labels.front() == "condition-01");
    CHECK(m.labels.back() == "condition-65");
}
