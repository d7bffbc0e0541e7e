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

#include "hcs/corpus.hpp"
#include "hcs/linear.hpp"
#include "hcs/panel.hpp"

namespace hcs {

struct Confusion {
    // counts[truth][predicted], indices 0 = Hate, 1 = Counter.
    std::uint64_t counts[2][2] = {{0, 0}, {0, 0}};
    std::uint64_t neutral = 0; // predictions excluded from the counts
    std::uint64_t total = 0;   // rows considered
    std::uint64_t labeled() const {
        return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
    }
};

// Neutral predictions are tallied separately, not counted in the 2x2 table.
Confusion confusion(const std::vector<ClassLabel>& truth,
                    const std::vector<SpeechLabel>& predicted);

struct MacroMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Unweighted average of per-class precision/recall; a never-predicted class
// contributes zero precision by convention.
MacroMetrics macro_metrics(const Confusion& c);

struct MetricsRow {
    double gamma = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double macro_f1 = 0.0;
    double labeled_fraction = 0.0;
};

struct ScoredTweet {
    std::string id;
    ClassLabel truth = ClassLabel::Hate;
    Score score;
};

struct ThresholdSweepResult {
    std::vector<MetricsRow> rows;
    std::size_t scored = 0;
    std::size_t excluded = 0; // unscorable tweets, reported not dropped
    std::size_t test_size = 0;
};

// Scores every test tweet once through the panel; unscorable tweets are
// counted as exclusions.
std::vector<ScoredTweet> score_test_set(const Panel& panel, const Corpus& corpus,
                                        const TestSet& test, std::size_t* excluded);

// One row per gamma from a single pass of cached scores.
ThresholdSweepResult threshold_sweep_cached(const std::vector<ScoredTweet>& scored,
                                            std::size_t excluded, std::size_t test_size,
                                            const std::vector<double>& gammas);

ThresholdSweepResult threshold_sweep(const Panel& panel, const Corpus& corpus,
                                     const TestSet& test,
                                     const std::vector<double>& gammas);

struct JudgmentRecord {
    std::string tweet_id;
    double score = 0.0;         // classifier S_h
    std::vector<int> ratings;   // human ratings, each in 1..5
};

// Line-delimited records {tweet_id, score, ratings[]}.
std::vector<JudgmentRecord> load_judgments(const std::string& path);

struct BinStat {
    double lo = 0.0;
    double hi = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

struct CorrelationResult {
    double pearson_r = 0.0;
    std::vector<BinStat> bins; // non-empty bins over the [0,1] grid
};

// Human ratings are averaged per record and mapped (mean-1)/4 onto [0,1];
// Pearson r is computed between scores and those means.
CorrelationResult judgment_correlation(const std::vector<JudgmentRecord>& records,
                                       double bin_width);

} // namespace hcs
