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

#include "hcs/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hcs/error.hpp"
#include "hcs/random.hpp"
#include "hcs/rfc3339.hpp"

namespace hcs {
namespace {

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
    return buf;
}

struct GroupVocabs {
    std::vector<std::string> hate;      // shared + hate-exclusive
    std::vector<std::string> counter;   // shared + counter-exclusive
    std::vector<std::string> all;       // union
};

GroupVocabs make_vocabs(double rho, std::size_t vocab_size) {
    const auto shared =
        static_cast<std::size_t>(std::llround(rho * static_cast<double>(vocab_size)));
    GroupVocabs v;
    for (std::size_t i = 0; i < shared; ++i) {
        auto w = numbered("sh", i);
        v.hate.push_back(w);
        v.counter.push_back(w);
        v.all.push_back(std::move(w));
    }
    for (std::size_t i = shared; i < vocab_size; ++i) {
        auto w = numbered("ha", i);
        v.hate.push_back(w);
        v.all.push_back(std::move(w));
    }
    for (std::size_t i = shared; i < vocab_size; ++i) {
        auto w = numbered("co", i);
        v.counter.push_back(w);
        v.all.push_back(std::move(w));
    }
    return v;
}

std::string draw_text(Rng& rng, const std::vector<std::string>& vocab, std::size_t len_min,
                      std::size_t len_max) {
    const std::size_t len = len_min + static_cast<std::size_t>(
                                          rng.below(len_max - len_min + 1));
    std::string text;
    for (std::size_t k = 0; k < len; ++k) {
        if (k > 0) text += ' ';
        text += vocab[static_cast<std::size_t>(rng.below(vocab.size()))];
    }
    return text;
}

void check_common(double rho, std::size_t vocab_size, std::size_t len_min,
                  std::size_t len_max) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        fail(ErrorCode::Config, "vocabulary overlap rho must lie in [0, 1]");
    }
    if (vocab_size == 0) {
        fail(ErrorCode::Config, "vocab_size must be >= 1");
    }
    if (len_min == 0 || len_max < len_min) {
        fail(ErrorCode::Config, "document length range requires 1 <= len_min <= len_max");
    }
}

} // namespace

void SynthConfig::validate() const {
    check_common(rho, vocab_size, len_min, len_max);
    if (per_class == 0) {
        fail(ErrorCode::Config, "per_class must be >= 1");
    }
    if (authors_per_group == 0) {
        fail(ErrorCode::Config, "authors_per_group must be >= 1");
    }
    if (step_seconds <= 0) {
        fail(ErrorCode::Config, "step_seconds must be positive");
    }
    parse_rfc3339(start_timestamp);
}

std::vector<Tweet> synth_tweets(const SynthConfig& cfg) {
    cfg.validate();
    const GroupVocabs vocabs = make_vocabs(cfg.rho, cfg.vocab_size);
    Rng rng(cfg.seed);
    const UnixSeconds start = parse_rfc3339(cfg.start_timestamp);

    std::vector<Tweet> out;
    out.reserve(2 * cfg.per_class + cfg.unlabeled);
    std::size_t ordinal = 0;
    const auto emit = [&](const char* id_prefix, const char* author_prefix, Group group,
                          const std::vector<std::string>& vocab, std::size_t count,
                          std::size_t author_pool) {
        for (std::size_t i = 0; i < count; ++i) {
            Tweet t;
            t.id = numbered(id_prefix, i);
            t.author_id =
                numbered(author_prefix, static_cast<std::size_t>(rng.below(author_pool)));
            t.group = group;
            t.timestamp = start + static_cast<std::int64_t>(ordinal) * cfg.step_seconds;
            t.text = draw_text(rng, vocab, cfg.len_min, cfg.len_max);
            out.push_back(std::move(t));
            ++ordinal;
        }
    };
    emit("h", "ah", Group::Hate, vocabs.hate, cfg.per_class, cfg.authors_per_group);
    emit("c", "ac", Group::Counter, vocabs.counter, cfg.per_class, cfg.authors_per_group);
    emit("u", "au", Group::Unlabeled, vocabs.all, cfg.unlabeled, cfg.authors_per_group);
    return out;
}

Corpus synth_corpus(const SynthConfig& cfg) {
    Corpus c;
    for (auto& t : synth_tweets(cfg)) c.add(std::move(t));
    return c;
}

void write_tweets_jsonl(const std::vector<Tweet>& tweets, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::Io, "cannot open \"" + path + "\" for writing");
    }
    for (const auto& t : tweets) {
        nlohmann::json j;
        j["id"] = t.id;
        j["author_id"] = t.author_id;
        j["group"] = group_name(t.group);
        j["timestamp"] = format_rfc3339(t.timestamp);
        j["text"] = t.text;
        out << j.dump() << '\n';
    }
    if (!out) {
        fail(ErrorCode::Io, "write to \"" + path + "\" failed");
    }
}

void SynthTreeConfig::validate() const {
    check_common(rho, vocab_size, len_min, len_max);
    if (trees == 0) {
        fail(ErrorCode::Config, "trees must be >= 1");
    }
    if (nodes_min == 0 || nodes_max < nodes_min) {
        fail(ErrorCode::Config, "tree size range requires 1 <= nodes_min <= nodes_max");
    }
    if (!(hate_frac >= 0.0) || !(counter_frac >= 0.0) || hate_frac + counter_frac > 1.0) {
        fail(ErrorCode::Config, "hate_frac + counter_frac must lie in [0, 1]");
    }
    if (step_seconds <= 0) {
        fail(ErrorCode::Config, "step_seconds must be positive");
    }
    parse_rfc3339(start_timestamp);
}

std::vector<ReplyTree> synth_trees(const SynthTreeConfig& cfg) {
    cfg.validate();
    const GroupVocabs vocabs = make_vocabs(cfg.rho, cfg.vocab_size);
    Rng rng(cfg.seed);
    const UnixSeconds start = parse_rfc3339(cfg.start_timestamp);

    std::vector<ReplyTree> out;
    out.reserve(cfg.trees);
    for (std::size_t tr = 0; tr < cfg.trees; ++tr) {
        const std::size_t n =
            cfg.nodes_min + static_cast<std::size_t>(rng.below(cfg.nodes_max - cfg.nodes_min + 1));
        const UnixSeconds base =
            start + static_cast<std::int64_t>(tr * (cfg.nodes_max + 1)) * cfg.step_seconds;
        std::vector<TreeNode> nodes;
        nodes.reserve(n);
        char idbuf[48];
        for (std::size_t i = 0; i < n; ++i) {
            TreeNode node;
            std::snprintf(idbuf, sizeof idbuf, "t%04zu_n%04zu", tr, i);
            node.id = idbuf;
            std::snprintf(idbuf, sizeof idbuf, "t%04zu_a%02zu", tr,
                          static_cast<std::size_t>(rng.below(20)));
            node.author_id = idbuf;
            node.timestamp = base + static_cast<std::int64_t>(i) * cfg.step_seconds;
            const double u = rng.uniform01();
            const auto* vocab = &vocabs.all;
            if (u < cfg.hate_frac) {
                vocab = &vocabs.hate;
            } else if (u < cfg.hate_frac + cfg.counter_frac) {
                vocab = &vocabs.counter;
            }
            node.text = draw_text(rng, *vocab, cfg.len_min, cfg.len_max);
            if (i > 0) {
                const auto p = static_cast<std::size_t>(rng.below(i));
                node.parent_id = nodes[p].id;
            }
            nodes.push_back(std::move(node));
        }
        char treebuf[24];
        std::snprintf(treebuf, sizeof treebuf, "tree%04zu", tr);
        out.push_back(ReplyTree::build(treebuf, std::move(nodes)));
    }
    return out;
}

void write_trees_jsonl(const std::vector<ReplyTree>& trees, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::Io, "cannot open \"" + path + "\" for writing");
    }
    for (const auto& t : trees) {
        nlohmann::json rec;
        rec["tree_id"] = t.tree_id;
        auto& nodes = rec["nodes"] = nlohmann::json::array();
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            const auto& n = t.nodes[i];
            nlohmann::json nj;
            nj["id"] = n.id;
            nj["author_id"] = n.author_id;
            nj["timestamp"] = format_rfc3339(n.timestamp);
            nj["text"] = n.text;
            if (n.parent_id.empty()) {
                nj["parent_id"] = nullptr;
            } else {
                nj["parent_id"] = n.parent_id;
            }
            nodes.push_back(std::move(nj));
        }
        out << rec.dump() << '\n';
    }
    if (!out) {
        fail(ErrorCode::Io, "write to \"" + path + "\" failed");
    }
}

} // namespace hcs
