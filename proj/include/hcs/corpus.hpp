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
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hcs/rfc3339.hpp"

namespace hcs {

// Group is account provenance, not per-message ground truth.
enum class Group { Hate, Counter, Unlabeled };

std::string group_name(Group g);
Group group_from_name(std::string_view name);

struct Tweet {
    std::string id;
    std::string author_id;
    Group group = Group::Unlabeled;
    UnixSeconds timestamp = 0;
    std::string text;
};

class Corpus {
public:
    Corpus() = default;

    // Line-delimited records {id, author_id, group, timestamp, text}.
    static Corpus ingest_file(const std::string& path);
    static Corpus ingest_stream(std::istream& in, const std::string& source_name);

    void add(Tweet tweet);

    std::size_t size() const { return tweets_.size(); }
    const std::vector<Tweet>& tweets() const { return tweets_; }
    const Tweet* find(std::string_view id) const;
    const Tweet& by_id(std::string_view id) const;

    // Indices into tweets() for one group, in insertion order.
    const std::vector<std::size_t>& group_index(Group g) const;

private:
    std::vector<Tweet> tweets_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::vector<std::size_t> hate_idx_, counter_idx_, unlabeled_idx_;
};

// Balanced id sample: exactly per_class Hate and per_class Counter ids.
struct TrainingSet {
    std::size_t index = 0;
    std::size_t per_class = 0;
    std::vector<std::string> ids; // sorted
    bool contains(std::string_view id) const;
};

struct TestSet {
    std::size_t index = 0;
    std::size_t per_class = 0;
    std::vector<std::string> ids; // sorted
    bool contains(std::string_view id) const;
};

// k balanced sets sampled independently; per-set seed derived from
// (seed, set index). Overlap between sets is emergent, not engineered.
std::vector<TrainingSet> build_training_sets(const Corpus& corpus, std::size_t k,
                                             std::size_t per_class, std::uint64_t seed);

// Balanced set disjoint from `train`, sampled with the given seed.
TestSet build_test_set(const Corpus& corpus, const TrainingSet& train,
                       std::size_t per_class, std::uint64_t seed);

// Balanced set avoiding every id in `exclude` (sorted or not).
TestSet build_test_set_excluding(const Corpus& corpus,
                                 const std::vector<std::string>& exclude,
                                 std::size_t per_class, std::uint64_t seed);

enum class DocLabelScheme { Unique, Author, Group, AuthorGroup, UniqueGroup };

std::string scheme_name(DocLabelScheme s);
DocLabelScheme scheme_from_name(std::string_view name);

// Unique → [id]; Author → [author_id]; Group → [group];
// AuthorGroup → [author_id, group]; UniqueGroup → [id, group].
std::vector<std::string> doc_tags(const Tweet& tweet, DocLabelScheme scheme);

} // namespace hcs
