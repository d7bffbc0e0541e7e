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
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hcs/corpus.hpp"
#include "hcs/random.hpp"
#include "hcs/text_prep.hpp"

namespace hcs {

struct VocabEntry {
    std::string token;
    std::uint64_t freq = 0;
};

class Vocab {
public:
    // Drops tokens with frequency < min_count. Entries are ordered by
    // frequency descending, then token ascending, giving dense stable indices.
    static Vocab build(const std::vector<TokenSeq>& docs, std::uint64_t min_count);
    static Vocab from_entries(std::vector<VocabEntry> entries, std::uint64_t min_count);

    std::size_t size() const { return entries_.size(); }
    const std::vector<VocabEntry>& entries() const { return entries_; }
    std::uint64_t min_count() const { return min_count_; }
    std::uint64_t total_tokens() const { return total_tokens_; }

    // Index of a retained token, or -1.
    std::int64_t index_of(std::string_view token) const;

private:
    std::vector<VocabEntry> entries_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::uint64_t min_count_ = 0;
    std::uint64_t total_tokens_ = 0;
};

// Unigram table sampling negatives proportional to freq^0.75.
class NegativeSampler {
public:
    NegativeSampler(const Vocab& vocab, std::size_t table_size);
    std::uint32_t sample(Rng& rng) const {
        return table_[static_cast<std::size_t>(rng.below(table_.size()))];
    }
    const std::vector<std::uint32_t>& table() const { return table_; }

private:
    std::vector<std::uint32_t> table_;
};

enum class PvAlgorithm { DBOW, DM };

std::string pv_algorithm_name(PvAlgorithm a);
PvAlgorithm pv_algorithm_from_name(std::string_view name);

struct EmbedConfig {
    std::size_t dim = 300;
    std::size_t window = 5;
    std::uint64_t min_count = 10;
    PvAlgorithm algorithm = PvAlgorithm::DBOW;
    std::size_t epochs = 20;
    double lr_initial = 0.025;
    double lr_min = 0.00025;
    std::size_t negative = 5;
    DocLabelScheme scheme = DocLabelScheme::AuthorGroup;
    std::uint64_t seed = 1;

    // Frequent-word subsampling threshold; 0 disables it.
    double subsample = 0.0;
    // DBOW-only: also train word input vectors skip-gram style.
    bool train_word_vectors = false;
    std::size_t table_size = std::size_t{1} << 20;
    // workers > 1 enables race-tolerant sharded training and forfeits
    // bitwise determinism; not part of the config identity.
    std::size_t workers = 1;

    std::size_t infer_steps = 50;
    double infer_lr_initial = 0.025;
    double infer_lr_min = 0.00025;

    void validate() const;
    // Canonical text for fingerprinting; excludes workers.
    std::string identity_text() const;
};

struct TrainStats {
    std::size_t skipped_docs = 0;
    std::uint64_t total_updates = 0;
};

struct Doc {
    std::vector<std::string> tags;
    TokenSeq tokens;
};

class EmbeddingModel {
public:
    // Empty model; meaningful instances come from train() or load().
    EmbeddingModel() = default;

    // Trains from scratch; deterministic for config.workers == 1.
    static EmbeddingModel train(const std::vector<Doc>& docs, const EmbedConfig& config,
                                TrainStats* stats = nullptr);

    const EmbedConfig& config() const { return config_; }
    const Vocab& vocab() const { return vocab_; }
    std::size_t dim() const { return config_.dim; }

    const std::vector<float>& word_in() const { return word_in_; }
    const std::vector<float>& word_out() const { return word_out_; }
    const std::vector<float>& doc_matrix() const { return doc_vectors_; }
    const std::vector<std::string>& tag_names() const { return tag_names_; }
    bool has_tag(std::string_view tag) const;
    // Row of the trained document matrix for a tag.
    std::vector<float> doc_vector(std::string_view tag) const;

    // Optimizes a fresh document vector against frozen word matrices for
    // config.infer_steps passes. All-OOV or empty input returns the
    // deterministic initialization and sets low_confidence.
    std::vector<float> infer_vector(const TokenSeq& tokens, std::uint64_t seed,
                                    bool* low_confidence = nullptr) const;

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
    static EmbeddingModel load(std::istream& is);
    static EmbeddingModel load_file(const std::string& path);

private:
    friend struct PvTrainer;

    EmbedConfig config_;
    Vocab vocab_;
    std::vector<float> word_in_;     // |V| x dim
    std::vector<float> word_out_;    // |V| x dim
    std::vector<float> doc_vectors_; // |T| x dim
    std::vector<std::string> tag_names_;
    std::unordered_map<std::string, std::uint32_t> tag_rows_;
    std::shared_ptr<const NegativeSampler> sampler_;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    double grad_norm = 0.0;
};

// Compares the analytic gradient of the negative-sampling objective over one
// epoch of events against central finite differences in double precision.
// With saturate=true, parameters are preset so every event is saturated;
// intended for two docs with disjoint single-token vocabularies.
GradCheckResult gradient_check(const std::vector<Doc>& docs, const EmbedConfig& config,
                               std::uint64_t seed, bool saturate = false);

double cosine(const std::vector<float>& a, const std::vector<float>& b);

} // namespace hcs
