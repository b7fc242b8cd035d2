#include "hpnet/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "hpnet/rng.hpp"

namespace hpnet {

namespace {

std::string strip_cr(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

void check_label(const std::string& label, int line_no) {
    if (label.empty()) {
        throw DataError("taxonomy line " + std::to_string(line_no) + ": empty label");
    }
    if (label.find(',') != std::string::npos || label.find('\t') != std::string::npos) {
        throw DataError("taxonomy line " + std::to_string(line_no) + ": label '" + label
                        + "' must not contain commas or tabs");
    }
}

}  // namespace

Taxonomy Taxonomy::parse_indented(std::istream& in) {
    Taxonomy t;
    std::map<std::string, NodeId> by_label;
    std::vector<NodeId> stack;  // stack[d] = last node seen at depth d

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip_cr(raw);
        if (line.empty()) continue;

        std::size_t depth = 0;
        while (depth < line.size() && line[depth] == '\t') ++depth;
        std::string label = line.substr(depth);
        check_label(label, line_no);

        if (t.labels_.empty()) {
            if (depth != 0) {
                throw DataError("taxonomy line " + std::to_string(line_no)
                                + ": root must start at depth 0");
            }
        } else {
            if (depth == 0) {
                throw DataError("taxonomy line " + std::to_string(line_no)
                                + ": second root '" + label + "' (multiple roots)");
            }
            if (depth > stack.size()) {
                throw DataError("taxonomy line " + std::to_string(line_no) + ": depth jumps to "
                                + std::to_string(depth) + " with no node at depth "
                                + std::to_string(depth - 1));
            }
        }
        if (by_label.count(label)) {
            throw DataError("taxonomy line " + std::to_string(line_no) + ": duplicate label '"
                            + label + "'");
        }

        NodeId id = static_cast<NodeId>(t.labels_.size());
        NodeId parent = depth == 0 ? kNoNode : stack[depth - 1];
        t.labels_.push_back(label);
        t.parents_.push_back(parent);
        t.children_.emplace_back();
        if (parent != kNoNode) t.children_[parent].push_back(id);
        by_label.emplace(label, id);

        stack.resize(depth);
        stack.push_back(id);
    }

    t.finalize();
    return t;
}

Taxonomy Taxonomy::parse_edge_list(std::istream& in) {
    struct Edge {
        std::string parent, child;
        int line;
    };
    std::vector<Edge> edges;
    std::vector<std::string> order;  // declaration order of first appearance
    std::map<std::string, int> seen;

    auto declare = [&](const std::string& label) {
        if (!seen.count(label)) {
            seen.emplace(label, static_cast<int>(order.size()));
            order.push_back(label);
        }
    };

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip_cr(raw);
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw DataError("taxonomy line " + std::to_string(line_no)
                            + ": expected 'parent<TAB>child'");
        }
        std::string parent = line.substr(0, tab);
        std::string child = line.substr(tab + 1);
        if (child.find('\t') != std::string::npos) {
            throw DataError("taxonomy line " + std::to_string(line_no)
                            + ": more than two tab-separated fields");
        }
        check_label(parent, line_no);
        check_label(child, line_no);
        declare(parent);
        declare(child);
        edges.push_back({std::move(parent), std::move(child), line_no});
    }
    if (edges.empty()) throw DataError("taxonomy: empty tree");

    std::map<std::string, std::string> parent_of;
    for (const auto& e : edges) {
        if (e.parent == e.child) {
            throw DataError("taxonomy line " + std::to_string(e.line) + ": cycle detected ('"
                            + e.child + "' is its own parent)");
        }
        auto [it, inserted] = parent_of.emplace(e.child, e.parent);
        if (!inserted) {
            if (it->second == e.parent) {
                throw DataError("taxonomy line " + std::to_string(e.line) + ": duplicate edge '"
                                + e.parent + "' -> '" + e.child + "'");
            }
            throw DataError("taxonomy line " + std::to_string(e.line) + ": node '" + e.child
                            + "' has multiple parents ('" + it->second + "' and '" + e.parent
                            + "')");
        }
    }

    std::vector<std::string> roots;
    for (const auto& label : order) {
        if (!parent_of.count(label)) roots.push_back(label);
    }
    if (roots.empty()) {
        throw DataError("taxonomy: cycle detected (every node has a parent)");
    }
    if (roots.size() > 1) {
        throw DataError("taxonomy: multiple roots ('" + roots[0] + "' and '" + roots[1] + "')");
    }

    // Build ids in declaration order, root first.
    Taxonomy t;
    std::map<std::string, NodeId> id_of;
    auto add_node = [&](const std::string& label) {
        NodeId id = static_cast<NodeId>(t.labels_.size());
        t.labels_.push_back(label);
        t.parents_.push_back(kNoNode);
        t.children_.emplace_back();
        id_of.emplace(label, id);
        return id;
    };
    add_node(roots[0]);
    for (const auto& label : order) {
        if (label != roots[0]) add_node(label);
    }
    for (const auto& e : edges) {
        NodeId p = id_of.at(e.parent);
        NodeId ch = id_of.at(e.child);
        t.parents_[ch] = p;
        t.children_[p].push_back(ch);
    }

    // Walking up from any node must reach the root; a walk longer than the
    // node count means a cycle detached from the root.
    const int n = t.node_count();
    for (NodeId v = 0; v < n; ++v) {
        NodeId cur = v;
        int steps = 0;
        while (cur != kNoNode && steps <= n) {
            cur = t.parents_[cur];
            ++steps;
        }
        if (steps > n) {
            throw DataError("taxonomy: cycle detected (node '" + t.labels_[v]
                            + "' never reaches the root)");
        }
    }

    t.finalize();
    return t;
}

Taxonomy Taxonomy::parse(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();

    // First non-empty line with an interior tab => edge list.
    std::istringstream scan(content);
    std::string line;
    bool edge_list = false;
    while (std::getline(scan, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        auto first_non_tab = line.find_first_not_of('\t');
        edge_list = first_non_tab != std::string::npos
                    && line.find('\t', first_non_tab) != std::string::npos;
        break;
    }

    std::istringstream body(content);
    return edge_list ? parse_edge_list(body) : parse_indented(body);
}

Taxonomy Taxonomy::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open taxonomy file: " + file.string());
    return parse(in);
}

void Taxonomy::finalize() {
    if (labels_.empty()) throw DataError("taxonomy: empty tree");
    const int n = node_count();

    // Edge lists may declare a child before its parent, so ids are not
    // topologically ordered; walk down from the root instead.
    depths_.assign(n, 0);
    std::vector<NodeId> pending{0};
    while (!pending.empty()) {
        const NodeId v = pending.back();
        pending.pop_back();
        for (NodeId ch : children_[v]) {
            depths_[ch] = depths_[v] + 1;
            pending.push_back(ch);
        }
    }

    heights_.assign(n, 0);
    std::vector<NodeId> by_depth(n);
    for (NodeId v = 0; v < n; ++v) by_depth[v] = v;
    std::sort(by_depth.begin(), by_depth.end(),
              [this](NodeId a, NodeId b) { return depths_[a] > depths_[b]; });
    for (NodeId v : by_depth) {
        if (parents_[v] != kNoNode) {
            heights_[parents_[v]] = std::max(heights_[parents_[v]], heights_[v] + 1);
        }
    }

    for (NodeId v = 0; v < n; ++v) {
        if (children_[v].empty()) {
            leaves_.push_back(v);
            leaf_labels_.push_back(labels_[v]);
        }
    }
}

Taxonomy::NodeId Taxonomy::find(std::string_view label) const {
    for (NodeId v = 0; v < node_count(); ++v) {
        if (labels_[v] == label) return v;
    }
    return kNoNode;
}

Taxonomy::NodeId Taxonomy::require(std::string_view label) const {
    NodeId v = find(label);
    if (v == kNoNode) throw DataError("unknown taxonomy node '" + std::string(label) + "'");
    return v;
}

int Taxonomy::leaf_index(std::string_view label) const {
    for (std::size_t k = 0; k < leaf_labels_.size(); ++k) {
        if (leaf_labels_[k] == label) return static_cast<int>(k);
    }
    throw DataError("unknown leaf class '" + std::string(label) + "'");
}

Taxonomy::NodeId Taxonomy::lca(NodeId u, NodeId v) const {
    if (u < 0 || u >= node_count() || v < 0 || v >= node_count()) {
        throw DataError("lca: unknown node id");
    }
    while (depths_[u] > depths_[v]) u = parents_[u];
    while (depths_[v] > depths_[u]) v = parents_[v];
    while (u != v) {
        u = parents_[u];
        v = parents_[v];
    }
    return u;
}

std::uint64_t Taxonomy::leaf_digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& label : leaf_labels_) {
        h = fnv1a64(label, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
    }
    return h;
}

}  // namespace hpnet
