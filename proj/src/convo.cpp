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

#include "hcs/convo.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hcs/error.hpp"

namespace hcs {
namespace {

// Node type under the interaction analysis threshold.
enum : std::size_t { kHate = 0, kCounter = 1, kOther = 2 };

std::size_t node_type(const Score& s, double threshold) {
    if (s.s_hate > threshold) return kHate;
    if (s.s_counter > threshold) return kCounter;
    return kOther;
}

} // namespace

std::size_t ReplyTree::max_depth() const {
    std::size_t best = 0;
    std::vector<std::size_t> depth(nodes.size(), 0);
    // children lists only hold indices greater in BFS order from the root,
    // so a stack walk from the root covers every node exactly once.
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        best = std::max(best, depth[i]);
        for (const std::size_t c : children[i]) {
            depth[c] = depth[i] + 1;
            stack.push_back(c);
        }
    }
    return best;
}

ReplyTree ReplyTree::build(std::string tree_id, std::vector<TreeNode> nodes) {
    if (nodes.empty()) {
        fail(ErrorCode::Structural, "tree \"" + tree_id + "\" has no nodes");
    }
    ReplyTree t;
    t.tree_id = std::move(tree_id);
    t.nodes = std::move(nodes);

    std::unordered_map<std::string, std::size_t> index;
    index.reserve(t.nodes.size());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        if (n.id.empty()) {
            fail(ErrorCode::Structural, "tree \"" + t.tree_id + "\" has a node with an empty id");
        }
        if (!index.emplace(n.id, i).second) {
            fail(ErrorCode::Structural,
                 "tree \"" + t.tree_id + "\" has duplicate node id \"" + n.id + "\"");
        }
    }

    t.parent.assign(t.nodes.size(), -1);
    t.children.assign(t.nodes.size(), {});
    bool root_seen = false;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        if (n.parent_id.empty()) {
            if (root_seen) {
                fail(ErrorCode::Structural, "tree \"" + t.tree_id + "\" has two roots: \"" +
                                                t.nodes[t.root].id + "\" and \"" + n.id + "\"");
            }
            root_seen = true;
            t.root = i;
            continue;
        }
        const auto it = index.find(n.parent_id);
        if (it == index.end()) {
            fail(ErrorCode::Structural, "tree \"" + t.tree_id + "\": node \"" + n.id +
                                            "\" replies to missing node \"" + n.parent_id + "\"");
        }
        if (it->second == i) {
            fail(ErrorCode::Structural,
                 "tree \"" + t.tree_id + "\": node \"" + n.id + "\" replies to itself");
        }
        t.parent[i] = static_cast<std::int64_t>(it->second);
        t.children[it->second].push_back(i);
    }
    if (!root_seen) {
        fail(ErrorCode::Structural, "tree \"" + t.tree_id + "\" has no root");
    }

    // Cycle check: walk each parent chain with memoized states.
    // 0 = unvisited, 1 = in progress, 2 = reaches the root.
    std::vector<std::uint8_t> state(t.nodes.size(), 0);
    state[t.root] = 2;
    std::vector<std::size_t> chain;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (state[i] != 0) continue;
        chain.clear();
        std::size_t cur = i;
        while (state[cur] == 0) {
            state[cur] = 1;
            chain.push_back(cur);
            cur = static_cast<std::size_t>(t.parent[cur]);
        }
        if (state[cur] == 1) {
            fail(ErrorCode::Structural, "tree \"" + t.tree_id + "\": node \"" +
                                            t.nodes[cur].id + "\" sits on a reply cycle");
        }
        for (const std::size_t n : chain) state[n] = 2;
    }
    return t;
}

TreeLoadResult load_trees(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open tree file \"" + path + "\"");
    }
    TreeLoadResult res;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto where = "tree file line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("tree_id") || !j["tree_id"].is_string()) {
            fail(ErrorCode::Parse, where + ": missing or non-string field \"tree_id\"");
        }
        const auto tree_id = j["tree_id"].get<std::string>();
        try {
            if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty()) {
                fail(ErrorCode::Parse, where + ": missing or empty array field \"nodes\"");
            }
            std::vector<TreeNode> nodes;
            nodes.reserve(j["nodes"].size());
            for (const auto& nj : j["nodes"]) {
                if (!nj.is_object()) {
                    fail(ErrorCode::Parse, where + ": node record is not an object");
                }
                TreeNode n;
                for (const char* field : {"id", "author_id", "timestamp", "text"}) {
                    if (!nj.contains(field) || !nj[field].is_string()) {
                        fail(ErrorCode::Parse, where + ": missing or non-string node field \"" +
                                                   std::string(field) + "\"");
                    }
                }
                n.id = nj["id"].get<std::string>();
                n.author_id = nj["author_id"].get<std::string>();
                n.timestamp = parse_rfc3339(nj["timestamp"].get<std::string>());
                n.text = nj["text"].get<std::string>();
                if (!nj.contains("parent_id")) {
                    fail(ErrorCode::Parse, where + ": node \"" + n.id +
                                               "\" lacks the field \"parent_id\"");
                }
                if (!nj["parent_id"].is_null()) {
                    if (!nj["parent_id"].is_string()) {
                        fail(ErrorCode::Parse, where + ": node \"" + n.id +
                                                   "\" has a non-string parent_id");
                    }
                    n.parent_id = nj["parent_id"].get<std::string>();
                    if (n.parent_id.empty()) {
                        fail(ErrorCode::Parse, where + ": node \"" + n.id +
                                                   "\" has an empty parent_id; use null for roots");
                    }
                }
                nodes.push_back(std::move(n));
            }
            res.trees.push_back(ReplyTree::build(tree_id, std::move(nodes)));
        } catch (const Error& e) {
            res.rejected.push_back({tree_id, e.what()});
        }
    }
    return res;
}

LabeledTree label_tree(const Panel& panel, const ReplyTree& tree, double gamma) {
    LabeledTree lt;
    lt.tree_id = tree.tree_id;
    lt.gamma = gamma;
    lt.tree = tree;
    lt.status.assign(tree.size(), NodeStatus::Excluded);
    lt.scores.assign(tree.size(), Score{});
    lt.labels.assign(tree.size(), SpeechLabel::Neutral);
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& n = tree.nodes[i];
        Tweet tw;
        tw.id = n.id;
        tw.author_id = n.author_id;
        tw.group = Group::Unlabeled;
        tw.timestamp = n.timestamp;
        tw.text = n.text;
        try {
            lt.scores[i] = panel.score(tw);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Unscorable) throw;
            ++lt.excluded;
            continue;
        }
        lt.status[i] = NodeStatus::Scored;
        lt.labels[i] = classify_score(lt.scores[i], gamma);
        switch (lt.labels[i]) {
        case SpeechLabel::Hate: ++lt.hate; break;
        case SpeechLabel::Counter: ++lt.counter; break;
        case SpeechLabel::Neutral: ++lt.neutral; break;
        }
    }
    return lt;
}

namespace {

struct MonthAgg {
    std::size_t hate = 0, counter = 0, neutral = 0, excluded = 0;
};

} // namespace

std::vector<MonthlyProportionRow> monthly_proportions(const std::vector<LabeledTree>& trees) {
    std::map<std::string, MonthAgg> months;
    for (const auto& lt : trees) {
        for (std::size_t i = 0; i < lt.tree.size(); ++i) {
            auto& agg = months[month_key(lt.tree.nodes[i].timestamp)];
            if (lt.status[i] == NodeStatus::Excluded) {
                ++agg.excluded;
                continue;
            }
            switch (lt.labels[i]) {
            case SpeechLabel::Hate: ++agg.hate; break;
            case SpeechLabel::Counter: ++agg.counter; break;
            case SpeechLabel::Neutral: ++agg.neutral; break;
            }
        }
    }
    std::vector<MonthlyProportionRow> rows;
    if (months.empty()) return rows;
    const std::string last = months.rbegin()->first;
    for (std::string m = months.begin()->first;; m = next_month_key(m)) {
        MonthlyProportionRow row;
        row.month = m;
        const auto it = months.find(m);
        if (it != months.end()) {
            const auto& agg = it->second;
            row.hate = agg.hate;
            row.counter = agg.counter;
            row.neutral = agg.neutral;
            row.excluded = agg.excluded;
            const std::size_t n = agg.hate + agg.counter + agg.neutral;
            if (n > 0) {
                row.has_data = true;
                row.p_hate = static_cast<double>(agg.hate) / static_cast<double>(n);
                row.p_counter = static_cast<double>(agg.counter) / static_cast<double>(n);
                row.p_other = static_cast<double>(agg.neutral) / static_cast<double>(n);
            }
        }
        rows.push_back(std::move(row));
        if (m == last) break;
    }
    return rows;
}

namespace {

struct ExtremityAgg {
    double hate_sum = 0.0;
    std::size_t hate_n = 0;
    double counter_sum = 0.0;
    std::size_t counter_n = 0;
};

} // namespace

std::vector<MonthlyExtremityRow> monthly_extremity(const std::vector<LabeledTree>& trees) {
    std::map<std::string, ExtremityAgg> months;
    for (const auto& lt : trees) {
        for (std::size_t i = 0; i < lt.tree.size(); ++i) {
            if (lt.status[i] == NodeStatus::Excluded) continue;
            auto& agg = months[month_key(lt.tree.nodes[i].timestamp)];
            const auto& s = lt.scores[i];
            if (s.s_hate > 0.5) {
                agg.hate_sum += s.s_hate;
                ++agg.hate_n;
            }
            if (s.s_counter > 0.5) {
                agg.counter_sum += s.s_counter;
                ++agg.counter_n;
            }
        }
    }
    std::vector<MonthlyExtremityRow> rows;
    if (months.empty()) return rows;
    const std::string last = months.rbegin()->first;
    for (std::string m = months.begin()->first;; m = next_month_key(m)) {
        MonthlyExtremityRow row;
        row.month = m;
        const auto it = months.find(m);
        if (it != months.end()) {
            const auto& agg = it->second;
            if (agg.hate_n > 0) {
                row.has_hate = true;
                row.n_hate = agg.hate_n;
                row.hate_extremity = agg.hate_sum / static_cast<double>(agg.hate_n);
            }
            if (agg.counter_n > 0) {
                row.has_counter = true;
                row.n_counter = agg.counter_n;
                row.counter_extremity = agg.counter_sum / static_cast<double>(agg.counter_n);
            }
        }
        rows.push_back(std::move(row));
        if (m == last) break;
    }
    return rows;
}

InteractionProfile interaction_profile(const std::vector<LabeledTree>& trees,
                                       const InteractionOptions& opts) {
    if (!(opts.score_threshold >= 0.5) || !(opts.score_threshold < 1.0)) {
        fail(ErrorCode::Config, "interaction score threshold must lie in [0.5, 1)");
    }
    if (opts.min_each == 0) {
        fail(ErrorCode::Config, "interaction analysis requires min_each >= 1");
    }

    double sum[2][3] = {{0, 0, 0}, {0, 0, 0}};
    std::size_t cnt[2][3] = {{0, 0, 0}, {0, 0, 0}};
    std::size_t trees_used = 0;

    for (const auto& lt : trees) {
        // Non-excluded nodes with their interaction type.
        std::vector<std::size_t> idx;
        std::vector<std::size_t> type(lt.tree.size(), kOther);
        std::size_t n_type[3] = {0, 0, 0};
        for (std::size_t i = 0; i < lt.tree.size(); ++i) {
            if (lt.status[i] == NodeStatus::Excluded) continue;
            idx.push_back(i);
            type[i] = node_type(lt.scores[i], opts.score_threshold);
            ++n_type[type[i]];
        }
        if (n_type[kHate] < opts.min_each || n_type[kCounter] < opts.min_each) continue;
        ++trees_used;
        const auto n = static_cast<double>(idx.size());

        // Mean following frequency per trigger type, over triggers that have
        // at least one follower.
        double freq_sum[2][3] = {{0, 0, 0}, {0, 0, 0}};
        std::size_t trig_n[2] = {0, 0};

        if (!opts.subtree) {
            // Sort non-excluded nodes by timestamp; suffix counts give the
            // strictly-later type tallies for every trigger in O(n).
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return lt.tree.nodes[a].timestamp < lt.tree.nodes[b].timestamp;
            });
            const std::size_t m = idx.size();
            // after[k][t] = count of type t among sorted positions >= k.
            std::vector<std::array<std::size_t, 3>> suffix(m + 1, {0, 0, 0});
            for (std::size_t k = m; k-- > 0;) {
                suffix[k] = suffix[k + 1];
                ++suffix[k][type[idx[k]]];
            }
            std::size_t k = 0;
            while (k < m) {
                // Tie run shares one strictly-later suffix.
                std::size_t e = k;
                while (e < m && lt.tree.nodes[idx[e]].timestamp ==
                                    lt.tree.nodes[idx[k]].timestamp) {
                    ++e;
                }
                const auto& later = suffix[e];
                const std::size_t total = later[0] + later[1] + later[2];
                if (total > 0) {
                    for (std::size_t p = k; p < e; ++p) {
                        const std::size_t tt = type[idx[p]];
                        if (tt == kOther) continue;
                        ++trig_n[tt];
                        for (std::size_t y = 0; y < 3; ++y) {
                            freq_sum[tt][y] += static_cast<double>(later[y]) /
                                               static_cast<double>(total);
                        }
                    }
                }
                k = e;
            }
        } else {
            // Descendants of the trigger node, excluded nodes skipped.
            for (const std::size_t i : idx) {
                const std::size_t tt = type[i];
                if (tt == kOther) continue;
                std::size_t later[3] = {0, 0, 0};
                std::vector<std::size_t> stack(lt.tree.children[i]);
                while (!stack.empty()) {
                    const std::size_t c = stack.back();
                    stack.pop_back();
                    if (lt.status[c] != NodeStatus::Excluded) ++later[type[c]];
                    stack.insert(stack.end(), lt.tree.children[c].begin(),
                                 lt.tree.children[c].end());
                }
                const std::size_t total = later[0] + later[1] + later[2];
                if (total == 0) continue;
                ++trig_n[tt];
                for (std::size_t y = 0; y < 3; ++y) {
                    freq_sum[tt][y] += static_cast<double>(later[y]) /
                                       static_cast<double>(total);
                }
            }
        }

        for (std::size_t t = 0; t < 2; ++t) {
            if (trig_n[t] == 0) continue;
            for (std::size_t y = 0; y < 3; ++y) {
                const double base = static_cast<double>(n_type[y]) / n;
                if (base <= 0.0) continue;
                const double mean_freq =
                    freq_sum[t][y] / static_cast<double>(trig_n[t]);
                sum[t][y] += mean_freq / base;
                ++cnt[t][y];
            }
        }
    }

    if (trees_used == 0) {
        fail(ErrorCode::EmptyResult,
             "no tree meets the interaction criteria (min_each = " +
                 std::to_string(opts.min_each) + ")");
    }
    InteractionProfile prof;
    prof.trees_used = trees_used;
    for (std::size_t t = 0; t < 2; ++t) {
        for (std::size_t y = 0; y < 3; ++y) {
            if (cnt[t][y] == 0) continue;
            prof.defined[t][y] = true;
            prof.value[t][y] = sum[t][y] / static_cast<double>(cnt[t][y]);
        }
    }
    return prof;
}

} // namespace hcs
