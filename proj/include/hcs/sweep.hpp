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
#include <optional>
#include <string>
#include <vector>

#include "hcs/corpus.hpp"
#include "hcs/panel.hpp"
#include "hcs/pv.hpp"
#include "hcs/text_prep.hpp"

namespace hcs {

// One trainable cell of the sweep grid: embedding config x stop level x
// regularization strength x training set.
struct SweepCell {
    EmbedConfig embed;
    StopLevel stop_level = StopLevel::None;
    std::string stop_path; // custom stop list file, empty otherwise
    double lambda = 1.0;
    std::size_t set_index = 0;

    std::string identity_text() const;
    // Stable hex key for the ledger; experts are addressed by it.
    std::string fingerprint() const;
    // Embedding identity shared by all lambdas of one (embed, stop, set) group.
    std::string feature_key() const;
};

struct SweepOptions {
    std::string artifact_dir;  // expert files land here
    std::string ledger_path;   // JSONL results ledger, append-only
    std::string stoplist_dir;  // where named stop lists live
    double gamma = 0.5;        // threshold for the recorded individual F1
    bool use_intercept = false;
    double fit_tol = 1e-6;
    std::size_t fit_max_iter = 1000;
};

struct SweepEntry {
    std::string fingerprint;
    std::string expert_path;
    std::string identity;
    double lambda = 0.0;
    std::size_t set_index = 0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    bool failed = false;
    std::string error;
    bool from_ledger = false; // true when resumed, not retrained
};

// Trains one expert per cell, evaluates it on the held-out set for its
// training set, persists the expert file and a ledger line per cell, and
// skips cells the ledger already marks complete.  Per-cell failures are
// recorded and the sweep continues.
std::vector<SweepEntry> expert_sweep(const Corpus& corpus,
                                     const std::vector<TrainingSet>& sets,
                                     const std::vector<TestSet>& tests,
                                     const std::vector<SweepCell>& cells,
                                     const SweepOptions& opts);

// Ranked view: successful entries sorted by F1 descending, fingerprint
// ascending on ties.
std::vector<SweepEntry> rank_entries(std::vector<SweepEntry> entries);

// Reads a results ledger back; unreadable lines raise parse errors.
std::vector<SweepEntry> load_ledger(const std::string& path);

// Loads the top-k experts named by ranked ledger entries into a panel.
Panel panel_from_entries(const std::vector<SweepEntry>& ranked, std::size_t top_k,
                         double gamma);

// Trains a single expert (no ledger, no files); shared by sweep and tests.
Expert train_expert(const Corpus& corpus, const TrainingSet& set,
                    const SweepCell& cell, const SweepOptions& opts);

} // namespace hcs
