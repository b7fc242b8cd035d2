#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpnet/errors.hpp"

namespace hpnet {

// Rooted class tree. Node ids are dense ints in declaration order; leaf k of
// leaf_order() is class index k everywhere else in the library.
class Taxonomy {
public:
    using NodeId = int;
    static constexpr NodeId kNoNode = -1;

    // Indented form: tab count = depth, rest of the line = label, root on
    // line 1. Blank lines are skipped.
    static Taxonomy parse_indented(std::istream& in);

    // Edge-list form: "parent<TAB>child" per line, root inferred.
    static Taxonomy parse_edge_list(std::istream& in);

    // Sniffs the format: an interior tab on the first line means edge list.
    static Taxonomy load(const std::filesystem::path& file);
    static Taxonomy parse(std::istream& in);

    int node_count() const { return static_cast<int>(labels_.size()); }
    NodeId root() const { return 0; }
    const std::string& label(NodeId v) const { return labels_.at(v); }
    NodeId parent(NodeId v) const { return parents_.at(v); }
    const std::vector<NodeId>& children(NodeId v) const { return children_.at(v); }
    bool is_leaf(NodeId v) const { return children_.at(v).empty(); }

    // Leaves in declaration order; index in this vector = class index.
    const std::vector<NodeId>& leaf_order() const { return leaves_; }
    int leaf_count() const { return static_cast<int>(leaves_.size()); }
    NodeId leaf(int class_index) const { return leaves_.at(class_index); }
    const std::vector<std::string>& leaf_labels() const { return leaf_labels_; }

    NodeId find(std::string_view label) const;        // kNoNode when absent
    NodeId require(std::string_view label) const;     // DataError when absent
    int leaf_index(std::string_view label) const;     // DataError when not a leaf

    int depth(NodeId v) const { return depths_.at(v); }
    // Max edge count from v down to any descendant leaf; leaves have height 0.
    int height(NodeId v) const { return heights_.at(v); }
    int tree_height() const { return heights_.at(0); }

    NodeId lca(NodeId u, NodeId v) const;

    // FNV-1a over leaf labels in order; checkpoints carry this to refuse
    // evaluation against a different taxonomy.
    std::uint64_t leaf_digest() const;

private:
    Taxonomy() = default;
    void finalize();  // depths, heights, leaf order; validates non-empty

    std::vector<std::string> labels_;
    std::vector<NodeId> parents_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<int> depths_;
    std::vector<int> heights_;
    std::vector<NodeId> leaves_;
    std::vector<std::string> leaf_labels_;
};

}  // namespace hpnet
