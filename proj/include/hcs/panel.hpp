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

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hcs/corpus.hpp"
#include "hcs/linear.hpp"
#include "hcs/pv.hpp"
#include "hcs/text_prep.hpp"

namespace hcs {

// A feature extractor paired with a hypothesis function, plus the ids of the
// tweets it trained on (used for vote withholding).
struct Expert {
    std::string id;
    std::string fingerprint;
    EmbeddingModel embedding;
    HypothesisFunction hypothesis;
    StopList stoplist = StopList::none();
    std::vector<std::string> train_ids; // sorted
    double f1 = 0.0;                    // macro F1 at gamma = 1/2 on its own test set
    double lambda = 1.0;
    std::size_t set_index = 0;

    void validate() const;
    bool trained_on(std::string_view tweet_id) const;

    // predict_proba over infer_vector; the inference seed is derived from the
    // embedding seed and the tweet id, so repeat calls are identical.
    double prob_hate(const Tweet& tweet, bool* low_confidence = nullptr) const;

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
    static Expert load(std::istream& is);
    static Expert load_file(const std::string& path);
};

struct Score {
    double s_hate = 0.0;
    double s_counter = 0.0;
    std::size_t voters = 0;
};

enum class SpeechLabel { Hate, Counter, Neutral };

std::string speech_label_name(SpeechLabel l);

class Panel {
public:
    Panel(std::vector<std::shared_ptr<const Expert>> experts, double gamma);

    const std::vector<std::shared_ptr<const Expert>>& experts() const { return experts_; }
    double gamma() const { return gamma_; }

    // Mean probability over non-withheld experts. The violation counter
    // increments if a withheld probability ever reaches the sum; it is the
    // instrumented leakage assertion and must stay zero.
    static Score aggregate(const std::vector<double>& probs,
                           const std::vector<bool>& withheld,
                           std::atomic<std::uint64_t>* violations = nullptr);

    // Throws Unscorable when every expert withholds.
    Score score(const Tweet& tweet) const;

    SpeechLabel classify(const Tweet& tweet) const;
    SpeechLabel classify(const Tweet& tweet, double gamma) const;

    std::uint64_t leakage_violations() const {
        return violations_.load(std::memory_order_relaxed);
    }

private:
    std::vector<std::shared_ptr<const Expert>> experts_;
    double gamma_;
    mutable std::atomic<std::uint64_t> violations_{0};
};

// Strict thresholds: S_h > gamma is Hate, S_c > gamma is Counter, everything
// else (ties included) is Neutral.
SpeechLabel classify_score(const Score& s, double gamma);

// Ranks by individual F1 descending, ties broken by fingerprint, keeps top_k.
Panel build_panel(std::vector<std::shared_ptr<const Expert>> experts,
                  std::size_t top_k, double gamma);

// Manifest referencing expert artifact files; relative paths resolve against
// the manifest's directory.
void save_panel_manifest(const std::string& path, const Panel& panel,
                         const std::vector<std::string>& expert_paths);
Panel load_panel_manifest(const std::string& path,
                          std::optional<double> gamma_override = std::nullopt);

} // namespace hcs
