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

#include "hcs/panel.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hcs/binio.hpp"
#include "hcs/error.hpp"

namespace hcs {

namespace {

constexpr char kExpertMagic[8] = {'H', 'C', 'S', 'E', 'X', 'P', '1', '\0'};
constexpr std::uint32_t kExpertVersion = 1;

} // namespace

void Expert::validate() const {
    if (train_ids.empty()) fail(ErrorCode::Config, "expert has no training ids");
    if (!std::is_sorted(train_ids.begin(), train_ids.end()))
        fail(ErrorCode::Config, "expert train_ids must be sorted");
    if (static_cast<std::size_t>(hypothesis.theta.size()) != embedding.dim())
        fail(ErrorCode::Shape, "hypothesis dimension " +
                                   std::to_string(hypothesis.theta.size()) +
                                   " does not match embedding dimension " +
                                   std::to_string(embedding.dim()));
}

bool Expert::trained_on(std::string_view tweet_id) const {
    return std::binary_search(
        train_ids.begin(), train_ids.end(), tweet_id,
        [](std::string_view a, std::string_view b) { return a < b; });
}

double Expert::prob_hate(const Tweet& tweet, bool* low_confidence) const {
    const TokenSeq tokens = remove_stopwords(normalize(tweet.text), stoplist);
    const std::uint64_t seed = derive_seed(embedding.config().seed, fnv1a64(tweet.id));
    const std::vector<float> x = embedding.infer_vector(tokens, seed, low_confidence);
    return predict_proba(hypothesis, x);
}

void Expert::save(std::ostream& os) const {
    os.write(kExpertMagic, 8);
    binio::write_u32(os, kExpertVersion);
    binio::write_string(os, id);
    binio::write_string(os, fingerprint);
    binio::write_f64(os, f1);
    binio::write_f64(os, lambda);
    binio::write_u64(os, set_index);

    binio::write_u8(os, static_cast<std::uint8_t>(stoplist.level()));
    binio::write_u64(os, stoplist.words().size());
    for (const auto& w : stoplist.words()) binio::write_string(os, w);

    binio::write_u64(os, train_ids.size());
    for (const auto& tid : train_ids) binio::write_string(os, tid);

    std::vector<double> theta(hypothesis.theta.data(),
                              hypothesis.theta.data() + hypothesis.theta.size());
    binio::write_f64_array(os, theta);
    binio::write_f64(os, hypothesis.intercept);
    binio::write_u8(os, hypothesis.use_intercept ? 1 : 0);
    binio::write_u8(os, hypothesis.converged ? 1 : 0);
    binio::write_u64(os, hypothesis.iterations);
    binio::write_f64(os, hypothesis.grad_norm);
    binio::write_f64(os, hypothesis.final_loss);

    embedding.save(os);
    if (!os) fail(ErrorCode::Io, "failed writing expert");
}

void Expert::save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot open for writing: " + path);
    save(os);
    os.flush();
    if (!os) fail(ErrorCode::Io, "failed writing expert to " + path);
}

Expert Expert::load(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kExpertMagic))
        fail(ErrorCode::Format, "not an expert file (bad magic)");
    const std::uint32_t version = binio::read_u32(is);
    if (version != kExpertVersion)
        fail(ErrorCode::Format, "unsupported expert version " + std::to_string(version));

    Expert e;
    e.id = binio::read_string(is);
    e.fingerprint = binio::read_string(is);
    e.f1 = binio::read_f64(is);
    e.lambda = binio::read_f64(is);
    e.set_index = binio::read_u64(is);

    const std::uint8_t level = binio::read_u8(is);
    if (level > 3) fail(ErrorCode::Format, "invalid stop level in expert file");
    const std::uint64_t nwords = binio::read_u64(is);
    std::vector<std::string> words(nwords);
    for (auto& w : words) w = binio::read_string(is);
    e.stoplist = StopList::from_words(static_cast<StopLevel>(level), std::move(words));

    const std::uint64_t nids = binio::read_u64(is);
    e.train_ids.resize(nids);
    for (auto& tid : e.train_ids) tid = binio::read_string(is);

    const std::vector<double> theta = binio::read_f64_array(is);
    e.hypothesis.theta =
        Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    e.hypothesis.intercept = binio::read_f64(is);
    e.hypothesis.use_intercept = binio::read_u8(is) != 0;
    e.hypothesis.converged = binio::read_u8(is) != 0;
    e.hypothesis.iterations = binio::read_u64(is);
    e.hypothesis.grad_norm = binio::read_f64(is);
    e.hypothesis.final_loss = binio::read_f64(is);
    e.hypothesis.lambda = e.lambda;

    e.embedding = EmbeddingModel::load(is);
    e.validate();
    return e;
}

Expert Expert::load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::Io, "cannot open expert file: " + path);
    return load(is);
}

std::string speech_label_name(SpeechLabel l) {
    switch (l) {
        case SpeechLabel::Hate: return "hate";
        case SpeechLabel::Counter: return "counter";
        case SpeechLabel::Neutral: return "neutral";
    }
    fail(ErrorCode::Config, "unknown speech label");
}

Panel::Panel(std::vector<std::shared_ptr<const Expert>> experts, double gamma)
    : experts_(std::move(experts)), gamma_(gamma) {
    if (experts_.empty()) fail(ErrorCode::Config, "panel needs at least one expert");
    if (!(gamma_ >= 0.5 && gamma_ <= 1.0))
        fail(ErrorCode::Config, "gamma must lie in [0.5, 1.0]");
    for (const auto& e : experts_) {
        if (!e) fail(ErrorCode::Config, "panel expert is null");
        e->validate();
    }
}

Score Panel::aggregate(const std::vector<double>& probs,
                       const std::vector<bool>& withheld,
                       std::atomic<std::uint64_t>* violations) {
    if (probs.size() != withheld.size())
        fail(ErrorCode::Shape, "probability and withholding vectors differ in length");
    double sum = 0.0;
    std::size_t voters = 0;
    std::vector<bool> contributed(probs.size(), false);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (withheld[i]) continue;
        sum += probs[i];
        contributed[i] = true;
        ++voters;
    }
    if (violations)
        for (std::size_t i = 0; i < probs.size(); ++i)
            if (withheld[i] && contributed[i])
                violations->fetch_add(1, std::memory_order_relaxed);
    if (voters == 0)
        fail(ErrorCode::Unscorable, "every expert withheld its vote");
    Score s;
    s.s_hate = sum / static_cast<double>(voters);
    s.s_counter = 1.0 - s.s_hate;
    s.voters = voters;
    return s;
}

Score Panel::score(const Tweet& tweet) const {
    std::vector<double> probs(experts_.size(), 0.0);
    std::vector<bool> withheld(experts_.size(), false);
    for (std::size_t i = 0; i < experts_.size(); ++i) {
        if (experts_[i]->trained_on(tweet.id)) {
            // Withheld vote: the probability is never even computed.
            withheld[i] = true;
            continue;
        }
        probs[i] = experts_[i]->prob_hate(tweet);
    }
    return aggregate(probs, withheld, &violations_);
}

SpeechLabel classify_score(const Score& s, double gamma) {
    if (!(gamma >= 0.5 && gamma <= 1.0))
        fail(ErrorCode::Config, "gamma must lie in [0.5, 1.0]");
    if (s.s_hate > gamma) return SpeechLabel::Hate;
    if (s.s_counter > gamma) return SpeechLabel::Counter;
    return SpeechLabel::Neutral;
}

SpeechLabel Panel::classify(const Tweet& tweet) const { return classify(tweet, gamma_); }

SpeechLabel Panel::classify(const Tweet& tweet, double gamma) const {
    return classify_score(score(tweet), gamma);
}

Panel build_panel(std::vector<std::shared_ptr<const Expert>> experts,
                  std::size_t top_k, double gamma) {
    if (top_k < 1) fail(ErrorCode::Config, "top_k must be >= 1");
    if (top_k > experts.size())
        fail(ErrorCode::Capacity, "requested top " + std::to_string(top_k) +
                                      " experts but only " +
                                      std::to_string(experts.size()) + " available");
    std::sort(experts.begin(), experts.end(),
              [](const std::shared_ptr<const Expert>& a,
                 const std::shared_ptr<const Expert>& b) {
                  if (a->f1 != b->f1) return a->f1 > b->f1;
                  return a->fingerprint < b->fingerprint;
              });
    experts.resize(top_k);
    return Panel(std::move(experts), gamma);
}

void save_panel_manifest(const std::string& path, const Panel& panel,
                         const std::vector<std::string>& expert_paths) {
    if (expert_paths.size() != panel.experts().size())
        fail(ErrorCode::Shape, "one expert path required per panel expert");
    nlohmann::json j;
    j["format"] = "hcs-panel";
    j["version"] = 1;
    j["gamma"] = panel.gamma();
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < expert_paths.size(); ++i) {
        const Expert& e = *panel.experts()[i];
        arr.push_back({{"path", expert_paths[i]},
                       {"id", e.id},
                       {"fingerprint", e.fingerprint},
                       {"f1", e.f1}});
    }
    j["experts"] = std::move(arr);
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot open for writing: " + path);
    os << j.dump(2) << '\n';
    if (!os) fail(ErrorCode::Io, "failed writing panel manifest to " + path);
}

Panel load_panel_manifest(const std::string& path, std::optional<double> gamma_override) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::Io, "cannot open panel manifest: " + path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "hcs-panel")
        fail(ErrorCode::Format, "not a panel manifest: " + path);
    if (j.value("version", 0) != 1)
        fail(ErrorCode::Format, "unsupported panel manifest version in " + path);
    if (!j.contains("gamma") || !j["gamma"].is_number())
        fail(ErrorCode::Format, "panel manifest missing gamma: " + path);
    if (!j.contains("experts") || !j["experts"].is_array() || j["experts"].empty())
        fail(ErrorCode::Format, "panel manifest lists no experts: " + path);

    const auto base = std::filesystem::path(path).parent_path();
    std::vector<std::shared_ptr<const Expert>> experts;
    for (const auto& rec : j["experts"]) {
        if (!rec.is_object() || !rec.contains("path") || !rec["path"].is_string())
            fail(ErrorCode::Format, "panel manifest expert entry missing path");
        std::filesystem::path p = rec["path"].get<std::string>();
        if (p.is_relative()) p = base / p;
        experts.push_back(std::make_shared<Expert>(Expert::load_file(p.string())));
    }
    const double gamma = gamma_override.value_or(j["gamma"].get<double>());
    return Panel(std::move(experts), gamma);
}

} // namespace hcs
