#include "hpnet/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "hpnet/errors.hpp"
#include "hpnet/rng.hpp"

namespace hpnet::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& msg) {
    throw DataError(path.string() + ": " + msg);
}

[[noreturn]] void fail_line(const std::filesystem::path& path, int line, const std::string& msg) {
    fail(path, "line " + std::to_string(line) + ": " + msg);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::ofstream out(path, mode);
    if (!out) fail(path, "cannot open for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::ifstream in(path, mode);
    if (!in) fail(path, "cannot open for reading");
    return in;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_double(const std::filesystem::path& path, int line, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) fail_line(path, line, "trailing characters in number '" + s + "'");
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        fail_line(path, line, "cannot parse number '" + s + "'");
    }
}

// One content line at a time; '#' lines land in comments, blanks are skipped.
class CsvSource {
public:
    explicit CsvSource(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string>& cells) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line.front() == '#') {
                comments_.push_back(line);
                continue;
            }
            cells = split_csv(line);
            return true;
        }
        return false;
    }

    int line() const { return line_; }

    // Value of "# key=value" among the comments seen so far, empty if absent.
    std::string comment_value(const std::string& key) const {
        const std::string prefix = "# " + key + "=";
        for (const auto& c : comments_) {
            if (c.rfind(prefix, 0) == 0) return c.substr(prefix.size());
        }
        return {};
    }

private:
    std::istream& in_;
    int line_ = 0;
    std::vector<std::string> comments_;
};

std::unordered_map<std::string, int> label_index(const std::vector<std::string>& labels) {
    std::unordered_map<std::string, int> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) idx[labels[i]] = static_cast<int>(i);
    return idx;
}

///////////////////////////////////////////////////////////////////////////////
// Binary framing: magic, u32 version, payload, trailing FNV-1a checksum over
// every prior byte. Integers and doubles are little-endian on disk.
///////////////////////////////////////////////////////////////////////////////

constexpr std::uint32_t kFormatVersion = 1;

class BinWriter {
public:
    BinWriter(const std::filesystem::path& path, const char magic[4])
        : path_(path), out_(open_out(path, std::ios::binary)) {
        bytes(magic, 4);
        u32(kFormatVersion);
    }

    void bytes(const void* p, std::size_t n) {
        hash_ = fnv1a64(std::string_view(static_cast<const char*>(p), n), hash_);
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }

    void u8(std::uint8_t v) { bytes(&v, 1); }

    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }

    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    void mat(const Mat& m) {
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) f64(m(r, c));
    }

    void vec(const Vec& v) {
        for (int i = 0; i < v.size(); ++i) f64(v(i));
    }

    // Writes the checksum (itself unhashed) and flushes.
    void finish() {
        const std::uint64_t h = hash_;
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(h >> (8 * i));
        out_.write(reinterpret_cast<const char*>(b), 8);
        out_.close();
        if (!out_) fail(path_, "write failed");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class BinReader {
public:
    BinReader(const std::filesystem::path& path, const char magic[4])
        : path_(path), in_(open_in(path, std::ios::binary)) {
        char got[4];
        bytes(got, 4);
        if (std::string_view(got, 4) != std::string_view(magic, 4)) {
            fail(path_, "bad magic, not the expected artifact type");
        }
        const std::uint32_t version = u32();
        if (version != kFormatVersion) {
            fail(path_, "unsupported format version " + std::to_string(version));
        }
    }

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) fail(path_, "truncated file");
        hash_ = fnv1a64(std::string_view(static_cast<const char*>(p), n), hash_);
    }

    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }

    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string str() {
        const std::uint32_t n = u32();
        if (n > (1u << 20)) fail(path_, "implausible string length");
        std::string s(n, '\0');
        if (n > 0) bytes(s.data(), n);
        return s;
    }

    Mat mat(int rows, int cols) {
        Mat m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = f64();
        return m;
    }

    Vec vec(int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = f64();
        return v;
    }

    int dim(const std::string& what, std::uint32_t cap = 1u << 20) {
        const std::uint32_t v = u32();
        if (v == 0 || v > cap) fail(path_, "implausible " + what);
        return static_cast<int>(v);
    }

    void verify_checksum() {
        const std::uint64_t expected = hash_;
        unsigned char b[8];
        in_.read(reinterpret_cast<char*>(b), 8);
        if (in_.gcount() != 8) fail(path_, "truncated file");
        std::uint64_t stored = 0;
        for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        if (stored != expected) fail(path_, "checksum mismatch, file is corrupt");
        if (in_.peek() != std::char_traits<char>::eof()) fail(path_, "trailing bytes");
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

SpaceMode mode_from_u8(const std::filesystem::path& path, std::uint8_t v) {
    if (v == 0) return SpaceMode::Hyperbolic;
    if (v == 1) return SpaceMode::Euclidean;
    fail(path, "unknown space mode byte");
}

HierarchyMode hierarchy_from_u8(const std::filesystem::path& path, std::uint8_t v) {
    if (v == 0) return HierarchyMode::None;
    if (v == 1) return HierarchyMode::Lcd;
    if (v == 2) return HierarchyMode::Hcd;
    fail(path, "unknown hierarchy mode byte");
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t config_hash(const std::string& canonical) { return fnv1a64(canonical); }

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

///////////////////////////////////////////////////////////////////////////////
// Distance matrix CSV
///////////////////////////////////////////////////////////////////////////////

void write_distance_matrix_csv(const std::filesystem::path& path, const ClassDistanceMatrix& dm) {
    dm.validate();
    auto out = open_out(path);
    if (!dm.encoding_tag.empty()) out << "# encoding=" << dm.encoding_tag << "\n";
    out << "label";
    for (const auto& l : dm.labels) out << "," << l;
    out << "\n";
    for (int i = 0; i < dm.size(); ++i) {
        out << dm.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < dm.size(); ++j) out << "," << format_double(dm.D(i, j));
        out << "\n";
    }
    out.close();
    if (!out) fail(path, "write failed");
}

ClassDistanceMatrix read_distance_matrix_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    CsvSource src(in);
    std::vector<std::string> cells;
    if (!src.next(cells)) fail(path, "empty file");
    if (cells.size() < 2 || cells[0] != "label") {
        fail_line(path, src.line(), "expected header 'label,<class>,...'");
    }
    ClassDistanceMatrix dm;
    dm.labels.assign(cells.begin() + 1, cells.end());
    const int K = static_cast<int>(dm.labels.size());
    dm.D = Mat(K, K);
    for (int i = 0; i < K; ++i) {
        if (!src.next(cells)) fail(path, "expected " + std::to_string(K) + " matrix rows");
        if (static_cast<int>(cells.size()) != K + 1) {
            fail_line(path, src.line(), "expected " + std::to_string(K + 1) + " cells");
        }
        if (cells[0] != dm.labels[static_cast<std::size_t>(i)]) {
            fail_line(path, src.line(), "row label '" + cells[0] + "' does not match header order");
        }
        for (int j = 0; j < K; ++j) {
            dm.D(i, j) = parse_double(path, src.line(), cells[static_cast<std::size_t>(j + 1)]);
        }
    }
    if (src.next(cells)) fail_line(path, src.line(), "unexpected extra row");
    dm.encoding_tag = src.comment_value("encoding");
    try {
        dm.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return dm;
}

///////////////////////////////////////////////////////////////////////////////
// Prototype CSV / binary
///////////////////////////////////////////////////////////////////////////////

void write_prototypes_csv(const std::filesystem::path& path, const PrototypeSet& p) {
    p.validate();
    auto out = open_out(path);
    out << "# mode=" << to_string(p.mode) << "\n";
    out << "# curvature=" << format_double(p.curvature) << "\n";
    out << "label";
    for (int j = 0; j < p.dim(); ++j) out << ",x" << j;
    out << "\n";
    for (int i = 0; i < p.size(); ++i) {
        out << p.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < p.dim(); ++j) out << "," << format_double(p.points(i, j));
        out << "\n";
    }
    out.close();
    if (!out) fail(path, "write failed");
}

PrototypeSet read_prototypes_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    CsvSource src(in);
    std::vector<std::string> cells;
    if (!src.next(cells)) fail(path, "empty file");
    if (cells.size() < 2 || cells[0] != "label") {
        fail_line(path, src.line(), "expected header 'label,x0,...'");
    }
    const int dim = static_cast<int>(cells.size()) - 1;

    PrototypeSet p;
    std::vector<std::vector<double>> rows;
    while (src.next(cells)) {
        if (static_cast<int>(cells.size()) != dim + 1) {
            fail_line(path, src.line(), "expected " + std::to_string(dim + 1) + " cells");
        }
        p.labels.push_back(cells[0]);
        std::vector<double> row(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) {
            row[static_cast<std::size_t>(j)] =
                parse_double(path, src.line(), cells[static_cast<std::size_t>(j + 1)]);
        }
        rows.push_back(std::move(row));
    }

    const std::string mode = src.comment_value("mode");
    if (mode.empty()) fail(path, "missing '# mode=' comment");
    try {
        p.mode = space_mode_from_string(mode);
    } catch (const Error& e) {
        fail(path, e.what());
    }
    const std::string curv = src.comment_value("curvature");
    if (curv.empty()) fail(path, "missing '# curvature=' comment");
    p.curvature = parse_double(path, 0, curv);

    p.points = Mat(static_cast<int>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < dim; ++j) {
            p.points(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
        }
    }
    try {
        p.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return p;
}

void write_prototypes_binary(const std::filesystem::path& path, const PrototypeSet& p) {
    p.validate();
    BinWriter w(path, "HPNP");
    w.u8(p.mode == SpaceMode::Hyperbolic ? 0 : 1);
    w.f64(p.curvature);
    w.u32(static_cast<std::uint32_t>(p.size()));
    w.u32(static_cast<std::uint32_t>(p.dim()));
    for (const auto& l : p.labels) w.str(l);
    w.mat(p.points);
    w.finish();
}

PrototypeSet read_prototypes_binary(const std::filesystem::path& path) {
    BinReader r(path, "HPNP");
    PrototypeSet p;
    p.mode = mode_from_u8(path, r.u8());
    p.curvature = r.f64();
    const int K = r.dim("class count");
    const int dim = r.dim("prototype dimension");
    p.labels.reserve(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) p.labels.push_back(r.str());
    p.points = r.mat(K, dim);
    r.verify_checksum();
    try {
        p.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return p;
}

///////////////////////////////////////////////////////////////////////////////
// Feature CSV
///////////////////////////////////////////////////////////////////////////////

FeatureBatch read_features_csv(const std::filesystem::path& path,
                               const std::vector<std::string>& class_labels) {
    auto in = open_in(path);
    CsvSource src(in);
    std::vector<std::string> cells;
    if (!src.next(cells)) fail(path, "empty file");
    if (cells.size() < 2 || cells[0] != "label") {
        fail_line(path, src.line(), "expected header 'label,f1,...'");
    }
    const int p = static_cast<int>(cells.size()) - 1;
    const auto idx = label_index(class_labels);

    std::vector<std::vector<double>> rows;
    FeatureBatch batch;
    while (src.next(cells)) {
        if (static_cast<int>(cells.size()) != p + 1) {
            fail_line(path, src.line(), "expected " + std::to_string(p + 1) + " cells");
        }
        const auto it = idx.find(cells[0]);
        if (it == idx.end()) {
            fail_line(path, src.line(), "label '" + cells[0] + "' is not a leaf class");
        }
        batch.y.push_back(it->second);
        std::vector<double> row(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) {
            row[static_cast<std::size_t>(j)] =
                parse_double(path, src.line(), cells[static_cast<std::size_t>(j + 1)]);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(path, "no samples");
    batch.X = Mat(static_cast<int>(rows.size()), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < p; ++j) {
            batch.X(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
        }
    }
    try {
        batch.validate(static_cast<int>(class_labels.size()));
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return batch;
}

void write_features_csv(const std::filesystem::path& path, const FeatureBatch& batch,
                        const std::vector<std::string>& class_labels) {
    batch.validate(static_cast<int>(class_labels.size()));
    auto out = open_out(path);
    out << "label";
    for (int j = 1; j <= batch.feature_dim(); ++j) out << ",f" << j;
    out << "\n";
    for (int i = 0; i < batch.size(); ++i) {
        out << class_labels[static_cast<std::size_t>(batch.y[static_cast<std::size_t>(i)])];
        for (int j = 0; j < batch.feature_dim(); ++j) {
            out << "," << format_double(batch.X(i, j));
        }
        out << "\n";
    }
    out.close();
    if (!out) fail(path, "write failed");
}

///////////////////////////////////////////////////////////////////////////////
// Predictions CSV
///////////////////////////////////////////////////////////////////////////////

void write_predictions_csv(const std::filesystem::path& path, const PredictionRows& rows,
                           const std::vector<std::string>& class_labels) {
    const int k = rows.k();
    if (k < 1) throw DataError("no predictions to write");
    if (rows.sample_ids.size() != rows.topk.size() || rows.truth.size() != rows.topk.size()) {
        throw DataError("prediction row parts have mismatched sizes");
    }
    auto out = open_out(path);
    out << "sample_id,true_label";
    for (int j = 1; j <= k; ++j) out << ",pred" << j;
    out << "\n";
    for (std::size_t i = 0; i < rows.topk.size(); ++i) {
        if (static_cast<int>(rows.topk[i].size()) != k) throw DataError("ragged top-k rows");
        out << rows.sample_ids[i] << ","
            << class_labels.at(static_cast<std::size_t>(rows.truth[i]));
        for (int v : rows.topk[i]) out << "," << class_labels.at(static_cast<std::size_t>(v));
        out << "\n";
    }
    out.close();
    if (!out) fail(path, "write failed");
}

PredictionRows read_predictions_csv(const std::filesystem::path& path,
                                    const std::vector<std::string>& class_labels) {
    auto in = open_in(path);
    CsvSource src(in);
    std::vector<std::string> cells;
    if (!src.next(cells)) fail(path, "empty file");
    if (cells.size() < 3 || cells[0] != "sample_id" || cells[1] != "true_label") {
        fail_line(path, src.line(), "expected header 'sample_id,true_label,pred1,...'");
    }
    const int k = static_cast<int>(cells.size()) - 2;
    const auto idx = label_index(class_labels);
    auto lookup = [&](const std::string& label, int line) {
        const auto it = idx.find(label);
        if (it == idx.end()) fail_line(path, line, "label '" + label + "' is not a leaf class");
        return it->second;
    };

    PredictionRows rows;
    while (src.next(cells)) {
        if (static_cast<int>(cells.size()) != k + 2) {
            fail_line(path, src.line(), "expected " + std::to_string(k + 2) + " cells");
        }
        rows.sample_ids.push_back(cells[0]);
        rows.truth.push_back(lookup(cells[1], src.line()));
        std::vector<int> preds(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            preds[static_cast<std::size_t>(j)] =
                lookup(cells[static_cast<std::size_t>(j + 2)], src.line());
        }
        rows.topk.push_back(std::move(preds));
    }
    if (rows.topk.empty()) fail(path, "no prediction rows");
    return rows;
}

///////////////////////////////////////////////////////////////////////////////
// Model checkpoint
///////////////////////////////////////////////////////////////////////////////

void write_model_binary(const std::filesystem::path& path, const Model& model,
                        std::uint64_t config_hash_value) {
    model.head.validate();
    model.prototypes.validate();
    BinWriter w(path, "HPNM");
    w.u64(config_hash_value);
    w.u8(model.mode == SpaceMode::Hyperbolic ? 0 : 1);
    switch (model.hierarchy) {
        case HierarchyMode::None: w.u8(0); break;
        case HierarchyMode::Lcd: w.u8(1); break;
        case HierarchyMode::Hcd: w.u8(2); break;
    }
    w.f64(model.head.curvature);
    w.f64(model.head.temperature);
    w.f64(model.disto_weight);
    w.f64(model.prototypes.curvature);
    w.u64(model.leaf_digest);

    w.u32(static_cast<std::uint32_t>(model.labels.size()));
    for (const auto& l : model.labels) w.str(l);

    w.u32(static_cast<std::uint32_t>(model.head.out_dim()));
    w.u32(static_cast<std::uint32_t>(model.head.in_dim()));
    w.mat(model.head.W);
    w.vec(model.head.b);

    w.u32(static_cast<std::uint32_t>(model.prototypes.dim()));
    w.mat(model.prototypes.points);

    w.u8(model.backbone ? 1 : 0);
    if (model.backbone) {
        w.u32(static_cast<std::uint32_t>(model.backbone->in_dim()));
        w.u32(static_cast<std::uint32_t>(model.backbone->hidden_dim()));
        w.u32(static_cast<std::uint32_t>(model.backbone->out_dim()));
        w.mat(model.backbone->W1);
        w.vec(model.backbone->b1);
        w.mat(model.backbone->W2);
        w.vec(model.backbone->b2);
    }

    w.u8(model.target ? 1 : 0);
    if (model.target) {
        w.str(model.target->encoding_tag);
        w.mat(model.target->D);
    }
    w.finish();
}

LoadedModel read_model_binary(const std::filesystem::path& path) {
    BinReader r(path, "HPNM");
    LoadedModel loaded;
    Model& model = loaded.model;
    loaded.config_hash = r.u64();
    model.mode = mode_from_u8(path, r.u8());
    model.hierarchy = hierarchy_from_u8(path, r.u8());
    model.head.mode = model.mode;
    model.head.curvature = r.f64();
    model.head.temperature = r.f64();
    model.disto_weight = r.f64();
    model.prototypes.mode = model.mode;
    model.prototypes.curvature = r.f64();
    model.leaf_digest = r.u64();

    const int K = r.dim("class count");
    model.labels.reserve(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) model.labels.push_back(r.str());
    model.prototypes.labels = model.labels;

    const int out_dim = r.dim("head output dimension");
    const int in_dim = r.dim("head input dimension");
    model.head.W = r.mat(out_dim, in_dim);
    model.head.b = r.vec(in_dim);

    const int proto_dim = r.dim("prototype dimension");
    model.prototypes.points = r.mat(K, proto_dim);

    if (r.u8() != 0) {
        TinyBackbone bb;
        const int bin = r.dim("backbone input dimension");
        const int bhid = r.dim("backbone hidden dimension");
        const int bout = r.dim("backbone output dimension");
        bb.W1 = r.mat(bhid, bin);
        bb.b1 = r.vec(bhid);
        bb.W2 = r.mat(bout, bhid);
        bb.b2 = r.vec(bout);
        model.backbone = std::move(bb);
    }

    if (r.u8() != 0) {
        ClassDistanceMatrix dm;
        dm.encoding_tag = r.str();
        dm.labels = model.labels;
        dm.D = r.mat(K, K);
        model.target = std::move(dm);
    }
    r.verify_checksum();

    try {
        model.head.validate();
        model.prototypes.validate();
        if (model.target) model.target->validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    if (model.head.out_dim() != model.prototypes.dim()) {
        fail(path, "head and prototype dimensions disagree");
    }
    return loaded;
}

///////////////////////////////////////////////////////////////////////////////
// Reports and history
///////////////////////////////////////////////////////////////////////////////

void write_eval_report_json(const std::filesystem::path& path, const EvalReport& report,
                            const std::string& config_hash_hex) {
    json j;
    j["accuracy"] = report.accuracy;
    j["mistake_severity"] =
        report.mistake_severity ? json(*report.mistake_severity) : json(nullptr);
    j["mistake_count"] = report.mistake_count;
    j["hd_at_k"] = report.hd_at_k;
    j["k"] = report.k;
    j["samples"] = report.samples;
    j["config_hash"] = config_hash_hex;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    out.close();
    if (!out) fail(path, "write failed");
}

void write_distortion_report_json(const std::filesystem::path& path,
                                  const DistortionReport& report,
                                  const std::string& config_hash_hex) {
    json j;
    j["distortion"] = report.raw_distortion;
    j["scale"] = report.scale;
    j["surrogate_loss"] = report.surrogate_loss;
    j["config_hash"] = config_hash_hex;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    out.close();
    if (!out) fail(path, "write failed");
}

void write_history_jsonl(const std::filesystem::path& path, const std::string& meta_line,
                         const std::vector<EpochRecord>& history) {
    auto out = open_out(path);
    out << meta_line << "\n";
    for (const auto& rec : history) {
        json j;
        j["epoch"] = rec.epoch;
        j["dce"] = rec.dce;
        j["disto"] = rec.disto;
        j["total"] = rec.total;
        j["accuracy"] = rec.accuracy;
        out << j.dump() << "\n";
    }
    out.close();
    if (!out) fail(path, "write failed");
}

void write_node_embedding_csv(const std::filesystem::path& path, const NodeEmbedding& emb) {
    if (emb.points.rows() != static_cast<int>(emb.labels.size())) {
        throw DataError("node embedding labels do not match its rows");
    }
    auto out = open_out(path);
    out << "# curvature=" << format_double(emb.curvature) << "\n";
    out << "label";
    for (int j = 0; j < emb.points.cols(); ++j) out << ",x" << j;
    out << "\n";
    for (int i = 0; i < emb.points.rows(); ++i) {
        out << emb.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < emb.points.cols(); ++j) {
            out << "," << format_double(emb.points(i, j));
        }
        out << "\n";
    }
    out.close();
    if (!out) fail(path, "write failed");
}

}  // namespace hpnet::io
