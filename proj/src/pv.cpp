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

#include "hcs/pv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hcs/binio.hpp"
#include "hcs/error.hpp"
#include "pv_internal.hpp"

namespace hcs {

namespace {

constexpr char kModelMagic[8] = {'H', 'C', 'S', 'E', 'M', 'B', '1', '\0'};
constexpr std::uint32_t kModelVersion = 1;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Vocab Vocab::build(const std::vector<TokenSeq>& docs, std::uint64_t min_count) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& doc : docs)
        for (const auto& tok : doc) ++counts[tok];
    std::vector<VocabEntry> entries;
    entries.reserve(counts.size());
    for (auto& [tok, freq] : counts)
        if (freq >= min_count) entries.push_back({tok, freq});
    if (entries.empty())
        fail(ErrorCode::Config, "vocabulary is empty after pruning at min_count=" +
                                    std::to_string(min_count));
    std::sort(entries.begin(), entries.end(), [](const VocabEntry& a, const VocabEntry& b) {
        if (a.freq != b.freq) return a.freq > b.freq;
        return a.token < b.token;
    });
    return from_entries(std::move(entries), min_count);
}

Vocab Vocab::from_entries(std::vector<VocabEntry> entries, std::uint64_t min_count) {
    Vocab v;
    v.entries_ = std::move(entries);
    v.min_count_ = min_count;
    v.index_.reserve(v.entries_.size());
    for (std::size_t i = 0; i < v.entries_.size(); ++i) {
        v.total_tokens_ += v.entries_[i].freq;
        v.index_.emplace(v.entries_[i].token, static_cast<std::uint32_t>(i));
    }
    return v;
}

std::int64_t Vocab::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

NegativeSampler::NegativeSampler(const Vocab& vocab, std::size_t table_size) {
    if (vocab.size() == 0) fail(ErrorCode::Config, "cannot build sampler on empty vocab");
    if (table_size == 0) fail(ErrorCode::Config, "sampler table size must be positive");
    const auto& entries = vocab.entries();
    double total_pow = 0.0;
    for (const auto& e : entries) total_pow += std::pow(static_cast<double>(e.freq), 0.75);
    table_.resize(table_size);
    std::size_t i = 0;
    double cum = std::pow(static_cast<double>(entries[0].freq), 0.75) / total_pow;
    for (std::size_t a = 0; a < table_size; ++a) {
        table_[a] = static_cast<std::uint32_t>(i);
        if (static_cast<double>(a + 1) / static_cast<double>(table_size) > cum &&
            i + 1 < entries.size()) {
            ++i;
            cum += std::pow(static_cast<double>(entries[i].freq), 0.75) / total_pow;
        }
    }
}

std::string pv_algorithm_name(PvAlgorithm a) {
    return a == PvAlgorithm::DBOW ? "dbow" : "dm";
}

PvAlgorithm pv_algorithm_from_name(std::string_view name) {
    if (name == "dbow") return PvAlgorithm::DBOW;
    if (name == "dm") return PvAlgorithm::DM;
    fail(ErrorCode::Config,
         "unknown algorithm \"" + std::string(name) + "\" (expected dbow or dm)");
}

void EmbedConfig::validate() const {
    if (dim == 0) fail(ErrorCode::Config, "dim must be positive");
    if (window < 1) fail(ErrorCode::Config, "window must be >= 1");
    if (negative < 1) fail(ErrorCode::Config, "negative must be >= 1");
    if (epochs < 1) fail(ErrorCode::Config, "epochs must be >= 1");
    if (min_count < 1) fail(ErrorCode::Config, "min_count must be >= 1");
    if (!(lr_initial > 0)) fail(ErrorCode::Config, "lr_initial must be positive");
    if (!(lr_min > 0) || lr_min > lr_initial)
        fail(ErrorCode::Config, "lr_min must satisfy 0 < lr_min <= lr_initial");
    if (!(infer_lr_initial > 0) || !(infer_lr_min > 0) || infer_lr_min > infer_lr_initial)
        fail(ErrorCode::Config, "inference learning rates must satisfy 0 < lr_min <= lr_initial");
    if (infer_steps < 1) fail(ErrorCode::Config, "infer_steps must be >= 1");
    if (subsample < 0) fail(ErrorCode::Config, "subsample must be >= 0");
    if (table_size == 0) fail(ErrorCode::Config, "table_size must be positive");
    if (workers < 1) fail(ErrorCode::Config, "workers must be >= 1");
}

std::string EmbedConfig::identity_text() const {
    std::string s = "pv|alg=" + pv_algorithm_name(algorithm);
    s += "|dim=" + std::to_string(dim);
    s += "|win=" + std::to_string(window);
    s += "|minc=" + std::to_string(min_count);
    s += "|ep=" + std::to_string(epochs);
    s += "|lri=" + fmt_double(lr_initial);
    s += "|lrm=" + fmt_double(lr_min);
    s += "|neg=" + std::to_string(negative);
    s += "|scheme=" + scheme_name(scheme);
    s += "|seed=" + std::to_string(seed);
    s += "|sub=" + fmt_double(subsample);
    s += "|twv=" + std::to_string(train_word_vectors ? 1 : 0);
    s += "|tbl=" + std::to_string(table_size);
    s += "|is=" + std::to_string(infer_steps);
    s += "|ili=" + fmt_double(infer_lr_initial);
    s += "|ilm=" + fmt_double(infer_lr_min);
    return s;
}

bool EmbeddingModel::has_tag(std::string_view tag) const {
    return tag_rows_.count(std::string(tag)) != 0;
}

std::vector<float> EmbeddingModel::doc_vector(std::string_view tag) const {
    auto it = tag_rows_.find(std::string(tag));
    if (it == tag_rows_.end())
        fail(ErrorCode::Config, "model has no document vector for tag \"" +
                                    std::string(tag) + "\"");
    const std::size_t row = it->second;
    return std::vector<float>(doc_vectors_.begin() + static_cast<std::ptrdiff_t>(row * config_.dim),
                              doc_vectors_.begin() + static_cast<std::ptrdiff_t>((row + 1) * config_.dim));
}

std::vector<float> EmbeddingModel::infer_vector(const TokenSeq& tokens,
                                                std::uint64_t seed,
                                                bool* low_confidence) const {
    const std::size_t dim = config_.dim;
    Rng rng(seed);
    std::vector<float> vec(dim);
    detail::init_uniform(vec, dim, rng);

    detail::PvDoc doc;
    doc.tag_rows = {0};
    doc.words.reserve(tokens.size());
    for (const auto& tok : tokens) {
        const std::int64_t idx = vocab_.index_of(tok);
        if (idx >= 0) doc.words.push_back(static_cast<std::uint32_t>(idx));
    }
    if (doc.words.empty()) {
        if (low_confidence) *low_confidence = true;
        return vec;
    }
    if (low_confidence) *low_confidence = false;

    // Word matrices are frozen; only the fresh vector is optimized.
    auto* win = const_cast<float*>(word_in_.data());
    auto* wout = const_cast<float*>(word_out_.data());
    const std::uint64_t total =
        static_cast<std::uint64_t>(config_.infer_steps) * doc.words.size();
    detail::PvScratch<float> scratch;
    std::vector<detail::PvEvent> events;
    std::uint64_t u = 0;
    for (std::size_t step = 0; step < config_.infer_steps; ++step) {
        for (std::size_t pos = 0; pos < doc.words.size(); ++pos, ++u) {
            const float lr = static_cast<float>(detail::lr_at(
                config_.infer_lr_initial, config_.infer_lr_min, u, total));
            events.clear();
            detail::position_events(doc, pos, config_, *sampler_, rng, events);
            for (const auto& ev : events)
                detail::event_step<float>(ev, lr, vec.data(), win, wout, dim, scratch,
                                          /*freeze_words=*/true);
        }
    }
    return vec;
}

void EmbeddingModel::save(std::ostream& os) const {
    os.write(kModelMagic, 8);
    binio::write_u32(os, kModelVersion);

    binio::write_u64(os, config_.dim);
    binio::write_u64(os, config_.window);
    binio::write_u64(os, config_.min_count);
    binio::write_u8(os, config_.algorithm == PvAlgorithm::DBOW ? 0 : 1);
    binio::write_u64(os, config_.epochs);
    binio::write_f64(os, config_.lr_initial);
    binio::write_f64(os, config_.lr_min);
    binio::write_u64(os, config_.negative);
    binio::write_u8(os, static_cast<std::uint8_t>(config_.scheme));
    binio::write_u64(os, config_.seed);
    binio::write_f64(os, config_.subsample);
    binio::write_u8(os, config_.train_word_vectors ? 1 : 0);
    binio::write_u64(os, config_.table_size);
    binio::write_u64(os, config_.infer_steps);
    binio::write_f64(os, config_.infer_lr_initial);
    binio::write_f64(os, config_.infer_lr_min);

    binio::write_u64(os, vocab_.size());
    for (const auto& e : vocab_.entries()) {
        binio::write_string(os, e.token);
        binio::write_u64(os, e.freq);
    }
    binio::write_u64(os, tag_names_.size());
    for (const auto& t : tag_names_) binio::write_string(os, t);

    binio::write_f32_array(os, word_in_);
    binio::write_f32_array(os, word_out_);
    binio::write_f32_array(os, doc_vectors_);
    if (!os) fail(ErrorCode::Io, "failed writing embedding model");
}

void EmbeddingModel::save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot open for writing: " + path);
    save(os);
    os.flush();
    if (!os) fail(ErrorCode::Io, "failed writing embedding model to " + path);
}

EmbeddingModel EmbeddingModel::load(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kModelMagic))
        fail(ErrorCode::Format, "not an embedding model file (bad magic)");
    const std::uint32_t version = binio::read_u32(is);
    if (version != kModelVersion)
        fail(ErrorCode::Format,
             "unsupported embedding model version " + std::to_string(version));

    EmbeddingModel m;
    EmbedConfig& c = m.config_;
    c.dim = binio::read_u64(is);
    c.window = binio::read_u64(is);
    c.min_count = binio::read_u64(is);
    c.algorithm = binio::read_u8(is) == 0 ? PvAlgorithm::DBOW : PvAlgorithm::DM;
    c.epochs = binio::read_u64(is);
    c.lr_initial = binio::read_f64(is);
    c.lr_min = binio::read_f64(is);
    c.negative = binio::read_u64(is);
    const std::uint8_t scheme = binio::read_u8(is);
    if (scheme > 4) fail(ErrorCode::Format, "invalid doc label scheme in model file");
    c.scheme = static_cast<DocLabelScheme>(scheme);
    c.seed = binio::read_u64(is);
    c.subsample = binio::read_f64(is);
    c.train_word_vectors = binio::read_u8(is) != 0;
    c.table_size = binio::read_u64(is);
    c.infer_steps = binio::read_u64(is);
    c.infer_lr_initial = binio::read_f64(is);
    c.infer_lr_min = binio::read_f64(is);

    const std::uint64_t vsize = binio::read_u64(is);
    std::vector<VocabEntry> entries(vsize);
    for (auto& e : entries) {
        e.token = binio::read_string(is);
        e.freq = binio::read_u64(is);
    }
    m.vocab_ = Vocab::from_entries(std::move(entries), c.min_count);

    const std::uint64_t tsize = binio::read_u64(is);
    m.tag_names_.resize(tsize);
    for (std::size_t i = 0; i < tsize; ++i) {
        m.tag_names_[i] = binio::read_string(is);
        m.tag_rows_.emplace(m.tag_names_[i], static_cast<std::uint32_t>(i));
    }

    m.word_in_ = binio::read_f32_array(is);
    m.word_out_ = binio::read_f32_array(is);
    m.doc_vectors_ = binio::read_f32_array(is);
    const std::size_t v = m.vocab_.size();
    if (m.word_in_.size() != v * c.dim || m.word_out_.size() != v * c.dim ||
        m.doc_vectors_.size() != tsize * c.dim)
        fail(ErrorCode::Format, "embedding model matrix sizes are inconsistent");

    m.sampler_ = std::make_shared<NegativeSampler>(m.vocab_, c.table_size);
    return m;
}

EmbeddingModel EmbeddingModel::load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::Io, "cannot open embedding model: " + path);
    return load(is);
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size())
        fail(ErrorCode::Shape, "cosine over vectors of different lengths");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace hcs
