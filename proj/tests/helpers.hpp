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

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hcs/corpus.hpp"
#include "hcs/error.hpp"
#include "hcs/panel.hpp"
#include "hcs/sweep.hpp"
#include "hcs/synth.hpp"

namespace hcstest {

// Fresh scratch directory per call; unique across processes and call sites.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto n = counter.fetch_add(1);
    auto p = std::filesystem::temp_directory_path() /
             ("hcs_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(n));
    std::filesystem::create_directories(p);
    return p;
}

inline std::string write_file(const std::filesystem::path& path,
                              const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    os << content;
    return path.string();
}

inline std::string read_all(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is),
                       std::istreambuf_iterator<char>());
}

// Runs fn and reports the error class it raised, if any.
template <typename Fn>
std::optional<hcs::ErrorCode> error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const hcs::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Small two-group corpus; rho = 0 keeps the group vocabularies disjoint.
inline hcs::Corpus tiny_corpus(std::size_t per_class = 40, double rho = 0.0,
                               std::uint64_t seed = 7) {
    hcs::SynthConfig cfg;
    cfg.per_class = per_class;
    cfg.rho = rho;
    cfg.vocab_size = 30;
    cfg.len_min = 5;
    cfg.len_max = 9;
    cfg.authors_per_group = 5;
    cfg.seed = seed;
    return hcs::synth_corpus(cfg);
}

inline hcs::EmbedConfig tiny_embed(std::size_t dim = 12, std::uint64_t seed = 11) {
    hcs::EmbedConfig e;
    e.dim = dim;
    e.window = 3;
    e.min_count = 1;
    e.epochs = 8;
    e.negative = 3;
    e.infer_steps = 15;
    e.seed = seed;
    return e;
}

struct TinyPanelParts {
    hcs::Corpus corpus;
    std::vector<hcs::TrainingSet> sets;
    std::vector<hcs::TestSet> tests;
    std::vector<std::shared_ptr<hcs::Expert>> experts;
};

// Two experts over two training sets of a separable corpus; good enough to
// exercise panel plumbing without pretending to be a benchmark.
inline TinyPanelParts tiny_panel_parts(std::uint64_t seed = 7) {
    TinyPanelParts parts;
    parts.corpus = tiny_corpus(40, 0.0, seed);
    parts.sets = hcs::build_training_sets(parts.corpus, 2, 15, seed + 1);
    for (const auto& s : parts.sets)
        parts.tests.push_back(
            hcs::build_test_set(parts.corpus, s, 10, seed + 100 + s.index));
    hcs::SweepOptions opts;
    for (std::size_t i = 0; i < parts.sets.size(); ++i) {
        hcs::SweepCell cell;
        cell.embed = tiny_embed(12, seed + 31 + i);
        cell.lambda = 1.0;
        cell.set_index = i;
        parts.experts.push_back(std::make_shared<hcs::Expert>(
            hcs::train_expert(parts.corpus, parts.sets[i], cell, opts)));
    }
    return parts;
}

inline std::vector<std::shared_ptr<const hcs::Expert>> as_const_experts(
    const std::vector<std::shared_ptr<hcs::Expert>>& in) {
    std::vector<std::shared_ptr<const hcs::Expert>> out(in.begin(), in.end());
    return out;
}

} // namespace hcstest
