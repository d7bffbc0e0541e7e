/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcs/panel.hpp"
#include "hcs/rfc3339.hpp"

namespace hcs {

struct TreeNode {
    std::string id;
    std::string author_id;
    UnixSeconds timestamp = 0;
    std::string text;
    std::string parent_id; // empty for the root
};

struct ReplyTree {
    std::string tree_id;
    std::vector<TreeNode> nodes; // file order
    std::size_t root = 0;
    std::vector<std::int64_t> parent; // node index, -1 for the root
    std::vector<std::vector<std::size_t>> children;

    std::size_t size() const { return nodes.size(); }
    std::size_t max_depth() const;

    // Structural validation: unique ids, exactly one root, parents present,
    // acyclic. Violations raise structural errors naming node ids.
    static ReplyTree build(std::string tree_id, std::vector<TreeNode> nodes);
};

struct TreeRejection {
    std::string tree_id;
    std::string reason;
};

struct TreeLoadResult {
    std::vector<ReplyTree> trees;
    std::vector<TreeRejection> rejected; // malformed trees, with reasons
};

// Line-delimited records {tree_id, nodes: [{id, author_id, timestamp, text,
// parent_id|null}]}. Malformed trees are rejected individually; file-level
// problems raise errors.
TreeLoadResult load_trees(const std::string& path);

enum class NodeStatus { Scored, Excluded };

struct LabeledTree {
    std::string tree_id;
    double gamma = 0.75;
    ReplyTree tree;
    std::vector<NodeStatus> status;  // aligned with tree.nodes
    std::vector<Score> scores;       // valid where status == Scored
    std::vector<SpeechLabel> labels; // valid where status == Scored

    std::size_t excluded = 0;
    std::size_t hate = 0;
    std::size_t counter = 0;
    std::size_t neutral = 0;
};

// Scores and labels every node through the panel; unscorable nodes get an
// exclusion marker, never dropped.
LabeledTree label_tree(const Panel& panel, const ReplyTree& tree, double gamma = 0.75);

struct MonthlyProportionRow {
    std::string month; // "YYYY-MM", UTC
    bool has_data = false;
    std::size_t hate = 0;
    std::size_t counter = 0;
    std::size_t neutral = 0;
    std::size_t excluded = 0; // reported separately, not in the proportions
    double p_hate = 0.0;
    double p_counter = 0.0;
    double p_other = 0.0;
};

// Proportions over all non-excluded nodes per UTC calendar month; months in
// the observed span with no scored nodes appear as gap rows.
std::vector<MonthlyProportionRow> monthly_proportions(const std::vector<LabeledTree>& trees);

struct MonthlyExtremityRow {
    std::string month;
    bool has_hate = false;
    double hate_extremity = 0.0; // mean S_h over nodes with S_h > 1/2
    std::size_t n_hate = 0;
    bool has_counter = false;
    double counter_extremity = 0.0; // mean S_c over nodes with S_c > 1/2
    std::size_t n_counter = 0;
};

std::vector<MonthlyExtremityRow> monthly_extremity(const std::vector<LabeledTree>& trees);

struct InteractionOptions {
    double score_threshold = 0.70;
    std::size_t min_each = 10;
    // false: "following" = every later-timestamped tweet in the tree;
    // true: only descendants of the trigger node.
    bool subtree = false;
};

struct InteractionProfile {
    // [trigger][following]; trigger 0 = Hate, 1 = Counter;
    // following 0 = Hate, 1 = Counter, 2 = Other.
    double value[2][3] = {{0, 0, 0}, {0, 0, 0}};
    bool defined[2][3] = {{false, false, false}, {false, false, false}};
    std::size_t trees_used = 0;
};

// Per-tree base-rate-normalized following frequencies, averaged over triggers
// then over qualifying trees. Raises an empty-result error when no tree
// qualifies.
InteractionProfile interaction_profile(const std::vector<LabeledTree>& trees,
                                       const InteractionOptions& opts = {});

} // namespace hcs
