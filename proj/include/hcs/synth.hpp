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

#include "hcs/convo.hpp"
#include "hcs/corpus.hpp"

namespace hcs {

// Two-group synthetic corpus whose separability is controlled by the
// vocabulary overlap fraction rho: 0 = disjoint vocabularies, 1 = identical.
struct SynthConfig {
    std::size_t per_class = 5000;
    std::size_t unlabeled = 0;
    double rho = 0.5;
    std::size_t vocab_size = 200; // tokens available to each group
    std::size_t len_min = 8;
    std::size_t len_max = 16;
    std::size_t authors_per_group = 50;
    std::uint64_t seed = 1;
    std::string start_timestamp = "2018-01-01T00:00:00Z";
    std::int64_t step_seconds = 3600;

    void validate() const;
};

std::vector<Tweet> synth_tweets(const SynthConfig& cfg);
Corpus synth_corpus(const SynthConfig& cfg);

// Writes tweets in the corpus file format, one record per line.
void write_tweets_jsonl(const std::vector<Tweet>& tweets, const std::string& path);

// Synthetic reply trees whose node texts are drawn from the same two-group
// vocabulary; planted per-node roles make panel labels meaningful downstream.
struct SynthTreeConfig {
    std::size_t trees = 20;
    std::size_t nodes_min = 40;
    std::size_t nodes_max = 80;
    double hate_frac = 0.35;
    double counter_frac = 0.35;
    double rho = 0.0;
    std::size_t vocab_size = 200;
    std::size_t len_min = 8;
    std::size_t len_max = 16;
    std::uint64_t seed = 1;
    std::string start_timestamp = "2018-01-01T00:00:00Z";
    std::int64_t step_seconds = 3600;

    void validate() const;
};

std::vector<ReplyTree> synth_trees(const SynthTreeConfig& cfg);
void write_trees_jsonl(const std::vector<ReplyTree>& trees, const std::string& path);

} // namespace hcs
