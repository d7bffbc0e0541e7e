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

#include "hcs/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hcs/error.hpp"
#include "hcs/random.hpp"

namespace hcs {

namespace {

using nlohmann::json;

std::string require_string(const json& rec, const char* field, std::size_t lineno) {
    auto it = rec.find(field);
    if (it == rec.end() || !it->is_string())
        fail(ErrorCode::Parse, "line " + std::to_string(lineno) +
                                   ": missing or non-string field \"" + field + "\"");
    return it->get<std::string>();
}

// Uniform sample without replacement: partial Fisher-Yates over a copy.
std::vector<std::size_t> sample_without_replacement(const std::vector<std::size_t>& pool,
                                                    std::size_t n, Rng& rng) {
    std::vector<std::size_t> v = pool;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t r = j + static_cast<std::size_t>(rng.below(v.size() - j));
        std::swap(v[j], v[r]);
    }
    v.resize(n);
    return v;
}

void require_pool(std::size_t available, std::size_t required, Group g,
                  const char* what) {
    if (available < required)
        fail(ErrorCode::Capacity, std::string(what) + ": " + group_name(g) +
                                      " pool has " + std::to_string(available) +
                                      " tweets, " + std::to_string(required) +
                                      " required");
}

bool sorted_contains(const std::vector<std::string>& ids, std::string_view id) {
    return std::binary_search(ids.begin(), ids.end(), id,
                              [](std::string_view a, std::string_view b) { return a < b; });
}

} // namespace

std::string group_name(Group g) {
    switch (g) {
        case Group::Hate: return "hate";
        case Group::Counter: return "counter";
        case Group::Unlabeled: return "unlabeled";
    }
    fail(ErrorCode::Config, "unknown group");
}

Group group_from_name(std::string_view name) {
    if (name == "hate") return Group::Hate;
    if (name == "counter") return Group::Counter;
    if (name == "unlabeled") return Group::Unlabeled;
    fail(ErrorCode::Parse, "unknown group \"" + std::string(name) +
                               "\" (expected hate, counter or unlabeled)");
}

Corpus Corpus::ingest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open tweet file: " + path);
    return ingest_stream(in, path);
}

Corpus Corpus::ingest_stream(std::istream& in, const std::string& source_name) {
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            fail(ErrorCode::Parse, source_name + " line " + std::to_string(lineno) +
                                       ": not a valid record");
        try {
            Tweet t;
            t.id = require_string(rec, "id", lineno);
            t.author_id = require_string(rec, "author_id", lineno);
            t.group = group_from_name(require_string(rec, "group", lineno));
            t.timestamp = parse_rfc3339(require_string(rec, "timestamp", lineno));
            t.text = require_string(rec, "text", lineno);
            corpus.add(std::move(t));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Duplicate) throw;
            fail(ErrorCode::Parse,
                 source_name + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return corpus;
}

void Corpus::add(Tweet tweet) {
    if (tweet.id.empty()) fail(ErrorCode::Parse, "tweet with empty id");
    auto [it, inserted] = by_id_.emplace(tweet.id, tweets_.size());
    if (!inserted) fail(ErrorCode::Duplicate, "duplicate tweet id \"" + tweet.id + "\"");
    switch (tweet.group) {
        case Group::Hate: hate_idx_.push_back(tweets_.size()); break;
        case Group::Counter: counter_idx_.push_back(tweets_.size()); break;
        case Group::Unlabeled: unlabeled_idx_.push_back(tweets_.size()); break;
    }
    tweets_.push_back(std::move(tweet));
}

const Tweet* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &tweets_[it->second];
}

const Tweet& Corpus::by_id(std::string_view id) const {
    const Tweet* t = find(id);
    if (!t) fail(ErrorCode::Io, "unknown tweet id \"" + std::string(id) + "\"");
    return *t;
}

const std::vector<std::size_t>& Corpus::group_index(Group g) const {
    switch (g) {
        case Group::Hate: return hate_idx_;
        case Group::Counter: return counter_idx_;
        case Group::Unlabeled: return unlabeled_idx_;
    }
    fail(ErrorCode::Config, "unknown group");
}

bool TrainingSet::contains(std::string_view id) const { return sorted_contains(ids, id); }
bool TestSet::contains(std::string_view id) const { return sorted_contains(ids, id); }

std::vector<TrainingSet> build_training_sets(const Corpus& corpus, std::size_t k,
                                             std::size_t per_class, std::uint64_t seed) {
    if (k < 1) fail(ErrorCode::Config, "number of training sets must be >= 1");
    if (per_class < 1) fail(ErrorCode::Config, "per_class must be >= 1");
    const auto& hate = corpus.group_index(Group::Hate);
    const auto& counter = corpus.group_index(Group::Counter);
    require_pool(hate.size(), per_class, Group::Hate, "training set");
    require_pool(counter.size(), per_class, Group::Counter, "training set");

    std::vector<TrainingSet> sets;
    sets.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        Rng rng(derive_seed(seed, i));
        TrainingSet s;
        s.index = i;
        s.per_class = per_class;
        s.ids.reserve(2 * per_class);
        for (const auto* pool : {&hate, &counter})
            for (std::size_t idx : sample_without_replacement(*pool, per_class, rng))
                s.ids.push_back(corpus.tweets()[idx].id);
        std::sort(s.ids.begin(), s.ids.end());
        sets.push_back(std::move(s));
    }
    return sets;
}

TestSet build_test_set_excluding(const Corpus& corpus,
                                 const std::vector<std::string>& exclude,
                                 std::size_t per_class, std::uint64_t seed) {
    if (per_class < 1) fail(ErrorCode::Config, "per_class must be >= 1");
    std::vector<std::string> excl = exclude;
    std::sort(excl.begin(), excl.end());

    Rng rng(seed);
    TestSet s;
    s.per_class = per_class;
    s.ids.reserve(2 * per_class);
    for (Group g : {Group::Hate, Group::Counter}) {
        std::vector<std::size_t> pool;
        for (std::size_t idx : corpus.group_index(g))
            if (!sorted_contains(excl, corpus.tweets()[idx].id)) pool.push_back(idx);
        require_pool(pool.size(), per_class, g, "test set");
        for (std::size_t idx : sample_without_replacement(pool, per_class, rng))
            s.ids.push_back(corpus.tweets()[idx].id);
    }
    std::sort(s.ids.begin(), s.ids.end());
    return s;
}

TestSet build_test_set(const Corpus& corpus, const TrainingSet& train,
                       std::size_t per_class, std::uint64_t seed) {
    TestSet s = build_test_set_excluding(corpus, train.ids, per_class, seed);
    s.index = train.index;
    return s;
}

std::string scheme_name(DocLabelScheme s) {
    switch (s) {
        case DocLabelScheme::Unique: return "unique";
        case DocLabelScheme::Author: return "author";
        case DocLabelScheme::Group: return "group";
        case DocLabelScheme::AuthorGroup: return "author_group";
        case DocLabelScheme::UniqueGroup: return "unique_group";
    }
    fail(ErrorCode::Config, "unknown doc label scheme");
}

DocLabelScheme scheme_from_name(std::string_view name) {
    if (name == "unique") return DocLabelScheme::Unique;
    if (name == "author") return DocLabelScheme::Author;
    if (name == "group") return DocLabelScheme::Group;
    if (name == "author_group") return DocLabelScheme::AuthorGroup;
    if (name == "unique_group") return DocLabelScheme::UniqueGroup;
    fail(ErrorCode::Config,
         "unknown doc label scheme \"" + std::string(name) +
             "\" (expected unique, author, group, author_group or unique_group)");
}

std::vector<std::string> doc_tags(const Tweet& tweet, DocLabelScheme scheme) {
    const bool needs_group = scheme == DocLabelScheme::Group ||
                             scheme == DocLabelScheme::AuthorGroup ||
                             scheme == DocLabelScheme::UniqueGroup;
    if (needs_group && tweet.group == Group::Unlabeled)
        fail(ErrorCode::Label, "tweet \"" + tweet.id +
                                   "\" is unlabeled but the doc label scheme requires a group");
    switch (scheme) {
        case DocLabelScheme::Unique: return {tweet.id};
        case DocLabelScheme::Author: return {tweet.author_id};
        case DocLabelScheme::Group: return {group_name(tweet.group)};
        case DocLabelScheme::AuthorGroup: return {tweet.author_id, group_name(tweet.group)};
        case DocLabelScheme::UniqueGroup: return {tweet.id, group_name(tweet.group)};
    }
    fail(ErrorCode::Config, "unknown doc label scheme");
}

} // namespace hcs
