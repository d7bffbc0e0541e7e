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

#include "hcs/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>

#include "hcs/error.hpp"
#include "hcs/eval.hpp"
#include "hcs/linear.hpp"
#include "hcs/random.hpp"

namespace hcs {
namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string stop_identity(const SweepCell& cell) {
    std::string s = "stop=" + stop_level_name(cell.stop_level);
    if (cell.stop_level == StopLevel::Custom) s += ":" + cell.stop_path;
    return s;
}

StopList cell_stoplist(const SweepCell& cell, const SweepOptions& opts) {
    if (cell.stop_level == StopLevel::Custom) {
        if (cell.stop_path.empty()) {
            fail(ErrorCode::Config, "custom stop level requires a stop list path");
        }
        return load_stoplist(cell.stop_path);
    }
    return resolve_stoplist(cell.stop_level, opts.stoplist_dir);
}

// Everything the lambdas of one (embedding x stop x set) group share.
struct FeatureGroup {
    std::string key;
    StopList stops;
    EmbeddingModel model;
    LabeledMatrix train;
    Eigen::MatrixXd test_x;
    std::vector<ClassLabel> test_y;
    std::size_t test_size = 0;
};

TokenSeq prep_tokens(const Tweet& tweet, const StopList& stops) {
    return remove_stopwords(normalize(tweet.text), stops);
}

std::unique_ptr<FeatureGroup> build_group(const Corpus& corpus, const TrainingSet& set,
                                          const TestSet* test, const SweepCell& cell,
                                          const SweepOptions& opts) {
    auto g = std::make_unique<FeatureGroup>();
    g->key = cell.feature_key();
    g->stops = cell_stoplist(cell, opts);

    std::vector<Doc> docs;
    docs.reserve(set.ids.size());
    for (const auto& id : set.ids) {
        const Tweet* tw = corpus.find(id);
        if (tw == nullptr) {
            fail(ErrorCode::Config, "training set references unknown tweet id \"" + id + "\"");
        }
        Doc d;
        d.tags = doc_tags(*tw, cell.embed.scheme);
        d.tokens = prep_tokens(*tw, g->stops);
        docs.push_back(std::move(d));
    }
    g->model = EmbeddingModel::train(docs, cell.embed);

    const auto dim = static_cast<Eigen::Index>(cell.embed.dim);
    g->train.X.resize(static_cast<Eigen::Index>(set.ids.size()), dim);
    g->train.y.resize(set.ids.size());
    for (std::size_t i = 0; i < set.ids.size(); ++i) {
        const Tweet* tw = corpus.find(set.ids[i]);
        const auto seed = derive_seed(cell.embed.seed, fnv1a64(tw->id));
        const auto v = g->model.infer_vector(prep_tokens(*tw, g->stops), seed);
        for (Eigen::Index j = 0; j < dim; ++j) {
            g->train.X(static_cast<Eigen::Index>(i), j) = static_cast<double>(v[static_cast<std::size_t>(j)]);
        }
        g->train.y[i] = tw->group == Group::Hate ? ClassLabel::Hate : ClassLabel::Counter;
    }

    if (test != nullptr) {
        g->test_size = test->ids.size();
        g->test_x.resize(static_cast<Eigen::Index>(test->ids.size()), dim);
        g->test_y.resize(test->ids.size());
        for (std::size_t i = 0; i < test->ids.size(); ++i) {
            const Tweet* tw = corpus.find(test->ids[i]);
            if (tw == nullptr) {
                fail(ErrorCode::Config, "test set references unknown tweet id \"" + test->ids[i] + "\"");
            }
            const auto seed = derive_seed(cell.embed.seed, fnv1a64(tw->id));
            const auto v = g->model.infer_vector(prep_tokens(*tw, g->stops), seed);
            for (Eigen::Index j = 0; j < dim; ++j) {
                g->test_x(static_cast<Eigen::Index>(i), j) = static_cast<double>(v[static_cast<std::size_t>(j)]);
            }
            g->test_y[i] = tw->group == Group::Hate ? ClassLabel::Hate : ClassLabel::Counter;
        }
    }
    return g;
}

struct CellFit {
    Expert expert;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

CellFit fit_cell(const FeatureGroup& g, const TrainingSet& set, const SweepCell& cell,
                 const SweepOptions& opts) {
    FitOptions fo;
    fo.tol = opts.fit_tol;
    fo.max_iter = opts.fit_max_iter;
    fo.add_intercept = opts.use_intercept;
    CellFit out;
    out.expert.hypothesis = fit(g.train, cell.lambda, fo);
    out.expert.id = cell.fingerprint();
    out.expert.fingerprint = cell.fingerprint();
    out.expert.embedding = g.model;
    out.expert.stoplist = g.stops;
    out.expert.train_ids = set.ids;
    out.expert.lambda = cell.lambda;
    out.expert.set_index = cell.set_index;

    if (g.test_size > 0) {
        std::vector<ClassLabel> truth = g.test_y;
        std::vector<SpeechLabel> pred(truth.size());
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const double p = predict_proba(out.expert.hypothesis,
                                           Eigen::VectorXd(g.test_x.row(static_cast<Eigen::Index>(i))));
            pred[i] = classify_score(Score{p, 1.0 - p, 1}, opts.gamma);
        }
        const Confusion c = confusion(truth, pred);
        if (c.labeled() > 0) {
            const MacroMetrics m = macro_metrics(c);
            out.f1 = m.f1;
            out.precision = m.precision;
            out.recall = m.recall;
        }
    }
    out.expert.f1 = out.f1;
    return out;
}

nlohmann::json entry_json(const SweepEntry& e) {
    nlohmann::json j;
    j["fingerprint"] = e.fingerprint;
    j["status"] = e.failed ? "failed" : "ok";
    j["identity"] = e.identity;
    j["lambda"] = e.lambda;
    j["set_index"] = e.set_index;
    j["f1"] = e.f1;
    j["precision"] = e.precision;
    j["recall"] = e.recall;
    j["path"] = e.expert_path;
    if (e.failed) j["error"] = e.error;
    return j;
}

void append_ledger(const std::string& path, const SweepEntry& e) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::app);
    if (!out) {
        fail(ErrorCode::Io, "cannot open results ledger \"" + path + "\" for append");
    }
    out << entry_json(e).dump() << '\n';
    out.flush();
    if (!out) {
        fail(ErrorCode::Io, "write to results ledger \"" + path + "\" failed");
    }
}

} // namespace

std::string SweepCell::identity_text() const {
    return embed.identity_text() + "|" + stop_identity(*this) + "|lam=" + fmt_g(lambda) +
           "|set=" + std::to_string(set_index);
}

std::string SweepCell::fingerprint() const { return hex64(fnv1a64(identity_text())); }

std::string SweepCell::feature_key() const {
    return embed.identity_text() + "|" + stop_identity(*this) + "|set=" +
           std::to_string(set_index);
}

std::vector<SweepEntry> load_ledger(const std::string& path) {
    std::vector<SweepEntry> out;
    std::ifstream in(path);
    if (!in) return out; // a missing ledger is an empty ledger
    std::string line;
    std::size_t line_no = 0;
    std::unordered_map<std::string, std::size_t> by_fp;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, "ledger line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("fingerprint") || !j["fingerprint"].is_string() ||
            !j.contains("status") || !j["status"].is_string()) {
            fail(ErrorCode::Parse, "ledger line " + std::to_string(line_no) +
                                       ": missing fingerprint or status");
        }
        SweepEntry e;
        e.fingerprint = j["fingerprint"].get<std::string>();
        e.failed = j["status"].get<std::string>() != "ok";
        e.identity = j.value("identity", std::string());
        e.lambda = j.value("lambda", 0.0);
        e.set_index = j.value("set_index", std::size_t{0});
        e.f1 = j.value("f1", 0.0);
        e.precision = j.value("precision", 0.0);
        e.recall = j.value("recall", 0.0);
        e.expert_path = j.value("path", std::string());
        e.error = j.value("error", std::string());
        e.from_ledger = true;
        // Later lines supersede earlier ones for the same cell.
        auto it = by_fp.find(e.fingerprint);
        if (it == by_fp.end()) {
            by_fp.emplace(e.fingerprint, out.size());
            out.push_back(std::move(e));
        } else {
            out[it->second] = std::move(e);
        }
    }
    return out;
}

std::vector<SweepEntry> expert_sweep(const Corpus& corpus,
                                     const std::vector<TrainingSet>& sets,
                                     const std::vector<TestSet>& tests,
                                     const std::vector<SweepCell>& cells,
                                     const SweepOptions& opts) {
    if (cells.empty()) {
        fail(ErrorCode::Config, "expert sweep: empty grid");
    }
    if (sets.empty() || tests.size() != sets.size()) {
        fail(ErrorCode::Config, "expert sweep: " + std::to_string(sets.size()) +
                                    " training sets vs " + std::to_string(tests.size()) +
                                    " test sets");
    }
    if (!opts.artifact_dir.empty()) {
        std::filesystem::create_directories(opts.artifact_dir);
    }

    std::unordered_map<std::string, SweepEntry> done;
    for (auto& e : load_ledger(opts.ledger_path)) {
        if (!e.failed) done.emplace(e.fingerprint, std::move(e));
    }

    std::vector<SweepEntry> out;
    out.reserve(cells.size());
    std::unique_ptr<FeatureGroup> group;
    for (const auto& cell : cells) {
        if (cell.set_index >= sets.size()) {
            fail(ErrorCode::Config, "sweep cell names set " + std::to_string(cell.set_index) +
                                        " but only " + std::to_string(sets.size()) +
                                        " sets exist");
        }
        const std::string fp = cell.fingerprint();
        auto it = done.find(fp);
        if (it != done.end() &&
            (it->second.expert_path.empty() ||
             std::filesystem::exists(it->second.expert_path))) {
            out.push_back(it->second);
            continue;
        }
        SweepEntry entry;
        entry.fingerprint = fp;
        entry.identity = cell.identity_text();
        entry.lambda = cell.lambda;
        entry.set_index = cell.set_index;
        try {
            cell.embed.validate();
            if (group == nullptr || group->key != cell.feature_key()) {
                group = build_group(corpus, sets[cell.set_index], &tests[cell.set_index],
                                    cell, opts);
            }
            CellFit fitres = fit_cell(*group, sets[cell.set_index], cell, opts);
            entry.f1 = fitres.f1;
            entry.precision = fitres.precision;
            entry.recall = fitres.recall;
            if (!opts.artifact_dir.empty()) {
                const auto path =
                    (std::filesystem::path(opts.artifact_dir) / ("expert_" + fp + ".bin"))
                        .string();
                fitres.expert.save_file(path);
                entry.expert_path = path;
            }
        } catch (const std::exception& e) {
            entry.failed = true;
            entry.error = e.what();
        }
        append_ledger(opts.ledger_path, entry);
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<SweepEntry> rank_entries(std::vector<SweepEntry> entries) {
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [](const SweepEntry& e) { return e.failed; }),
                  entries.end());
    std::sort(entries.begin(), entries.end(), [](const SweepEntry& a, const SweepEntry& b) {
        if (a.f1 != b.f1) return a.f1 > b.f1;
        return a.fingerprint < b.fingerprint;
    });
    return entries;
}

Panel panel_from_entries(const std::vector<SweepEntry>& ranked, std::size_t top_k,
                         double gamma) {
    if (top_k == 0) {
        fail(ErrorCode::Config, "panel requires top_k >= 1");
    }
    if (ranked.size() < top_k) {
        fail(ErrorCode::Capacity, "panel of " + std::to_string(top_k) + " requested but only " +
                                      std::to_string(ranked.size()) +
                                      " successful experts exist");
    }
    std::vector<std::shared_ptr<const Expert>> experts;
    experts.reserve(top_k);
    for (std::size_t i = 0; i < top_k; ++i) {
        if (ranked[i].expert_path.empty()) {
            fail(ErrorCode::Config, "expert " + ranked[i].fingerprint +
                                        " has no persisted artifact path");
        }
        experts.push_back(
            std::make_shared<Expert>(Expert::load_file(ranked[i].expert_path)));
    }
    return build_panel(std::move(experts), top_k, gamma);
}

Expert train_expert(const Corpus& corpus, const TrainingSet& set, const SweepCell& cell,
                    const SweepOptions& opts) {
    cell.embed.validate();
    auto group = build_group(corpus, set, nullptr, cell, opts);
    return fit_cell(*group, set, cell, opts).expert;
}

} // namespace hcs
