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

#include "hcs/eval.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hcs/error.hpp"

namespace hcs {

Confusion confusion(const std::vector<ClassLabel>& truth,
                    const std::vector<SpeechLabel>& predicted) {
    if (truth.size() != predicted.size()) {
        fail(ErrorCode::Shape, "confusion: " + std::to_string(truth.size()) +
                                   " truth labels vs " + std::to_string(predicted.size()) +
                                   " predictions");
    }
    Confusion c;
    c.total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::size_t t = truth[i] == ClassLabel::Hate ? 0 : 1;
        switch (predicted[i]) {
        case SpeechLabel::Hate: ++c.counts[t][0]; break;
        case SpeechLabel::Counter: ++c.counts[t][1]; break;
        case SpeechLabel::Neutral: ++c.neutral; break;
        }
    }
    return c;
}

MacroMetrics macro_metrics(const Confusion& c) {
    if (c.labeled() == 0) {
        fail(ErrorCode::UndefinedMetric, "macro metrics: no labeled predictions");
    }
    MacroMetrics m;
    double f1_sum = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        const double tp = static_cast<double>(c.counts[k][k]);
        const double pred = static_cast<double>(c.counts[0][k] + c.counts[1][k]);
        const double truth = static_cast<double>(c.counts[k][0] + c.counts[k][1]);
        const double p = pred > 0.0 ? tp / pred : 0.0;
        const double r = truth > 0.0 ? tp / truth : 0.0;
        const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        m.precision += 0.5 * p;
        m.recall += 0.5 * r;
        f1_sum += 0.5 * f;
    }
    m.f1 = f1_sum;
    return m;
}

std::vector<ScoredTweet> score_test_set(const Panel& panel, const Corpus& corpus,
                                        const TestSet& test, std::size_t* excluded) {
    std::vector<ScoredTweet> out;
    out.reserve(test.ids.size());
    std::size_t skipped = 0;
    for (const auto& id : test.ids) {
        const Tweet* tw = corpus.find(id);
        if (tw == nullptr) {
            fail(ErrorCode::Config, "test set references unknown tweet id \"" + id + "\"");
        }
        if (tw->group == Group::Unlabeled) {
            fail(ErrorCode::Label, "test tweet \"" + id + "\" has no group label");
        }
        ScoredTweet st;
        st.id = id;
        st.truth = tw->group == Group::Hate ? ClassLabel::Hate : ClassLabel::Counter;
        try {
            st.score = panel.score(*tw);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Unscorable) throw;
            ++skipped;
            continue;
        }
        out.push_back(std::move(st));
    }
    if (excluded != nullptr) *excluded = skipped;
    return out;
}

ThresholdSweepResult threshold_sweep_cached(const std::vector<ScoredTweet>& scored,
                                            std::size_t excluded, std::size_t test_size,
                                            const std::vector<double>& gammas) {
    if (gammas.empty()) {
        fail(ErrorCode::Config, "threshold sweep: empty gamma list");
    }
    if (test_size == 0) {
        fail(ErrorCode::Config, "threshold sweep: empty test set");
    }
    ThresholdSweepResult res;
    res.scored = scored.size();
    res.excluded = excluded;
    res.test_size = test_size;
    res.rows.reserve(gammas.size());
    std::vector<ClassLabel> truth(scored.size());
    std::vector<SpeechLabel> pred(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) truth[i] = scored[i].truth;
    for (const double gamma : gammas) {
        for (std::size_t i = 0; i < scored.size(); ++i) {
            pred[i] = classify_score(scored[i].score, gamma);
        }
        const Confusion c = confusion(truth, pred);
        MetricsRow row;
        row.gamma = gamma;
        row.labeled_fraction =
            static_cast<double>(c.labeled()) / static_cast<double>(test_size);
        if (c.labeled() > 0) {
            const MacroMetrics m = macro_metrics(c);
            row.precision = m.precision;
            row.recall = m.recall;
            row.macro_f1 = m.f1;
        }
        res.rows.push_back(row);
    }
    return res;
}

ThresholdSweepResult threshold_sweep(const Panel& panel, const Corpus& corpus,
                                     const TestSet& test,
                                     const std::vector<double>& gammas) {
    std::size_t excluded = 0;
    const auto scored = score_test_set(panel, corpus, test, &excluded);
    return threshold_sweep_cached(scored, excluded, test.ids.size(), gammas);
}

std::vector<JudgmentRecord> load_judgments(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open judgments file \"" + path + "\"");
    }
    std::vector<JudgmentRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse,
                 "judgments line " + std::to_string(line_no) + ": " + e.what());
        }
        const auto where = "judgments line " + std::to_string(line_no);
        if (!j.is_object() || !j.contains("tweet_id") || !j["tweet_id"].is_string()) {
            fail(ErrorCode::Parse, where + ": missing or non-string field \"tweet_id\"");
        }
        if (!j.contains("score") || !j["score"].is_number()) {
            fail(ErrorCode::Parse, where + ": missing or non-numeric field \"score\"");
        }
        if (!j.contains("ratings") || !j["ratings"].is_array() || j["ratings"].empty()) {
            fail(ErrorCode::Parse, where + ": missing or empty array field \"ratings\"");
        }
        JudgmentRecord rec;
        rec.tweet_id = j["tweet_id"].get<std::string>();
        rec.score = j["score"].get<double>();
        for (const auto& r : j["ratings"]) {
            if (!r.is_number_integer()) {
                fail(ErrorCode::Parse, where + ": non-integer rating");
            }
            const auto v = r.get<long long>();
            if (v < 1 || v > 5) {
                fail(ErrorCode::Format, where + ": rating " + std::to_string(v) +
                                            " outside 1..5");
            }
            rec.ratings.push_back(static_cast<int>(v));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

CorrelationResult judgment_correlation(const std::vector<JudgmentRecord>& records,
                                       double bin_width) {
    if (records.size() < 2) {
        fail(ErrorCode::Config, "judgment correlation requires at least 2 records, got " +
                                    std::to_string(records.size()));
    }
    if (!(bin_width > 0.0) || bin_width > 1.0) {
        fail(ErrorCode::Config, "bin width must lie in (0, 1]");
    }
    const std::size_t n = records.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = records[i];
        if (rec.ratings.empty()) {
            fail(ErrorCode::Config, "record \"" + rec.tweet_id + "\" has no ratings");
        }
        if (!std::isfinite(rec.score) || rec.score < 0.0 || rec.score > 1.0) {
            fail(ErrorCode::Format, "record \"" + rec.tweet_id +
                                        "\" score outside [0, 1]");
        }
        double sum = 0.0;
        for (const int r : rec.ratings) sum += static_cast<double>(r);
        const double mean = sum / static_cast<double>(rec.ratings.size());
        x[i] = rec.score;
        y[i] = (mean - 1.0) / 4.0;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        fail(ErrorCode::UndefinedMetric,
             "judgment correlation undefined: zero variance in " +
                 std::string(sxx == 0.0 ? "scores" : "ratings"));
    }
    CorrelationResult res;
    res.pearson_r = sxy / std::sqrt(sxx * syy);

    const auto n_bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-12));
    std::vector<std::vector<double>> buckets(n_bins);
    for (std::size_t i = 0; i < n; ++i) {
        auto b = static_cast<std::size_t>(x[i] / bin_width);
        if (b >= n_bins) b = n_bins - 1;
        buckets[b].push_back(y[i]);
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (buckets[b].empty()) continue;
        BinStat stat;
        stat.lo = static_cast<double>(b) * bin_width;
        stat.hi = b + 1 == n_bins ? 1.0 : static_cast<double>(b + 1) * bin_width;
        stat.n = buckets[b].size();
        double sum = 0.0;
        for (const double v : buckets[b]) sum += v;
        stat.mean = sum / static_cast<double>(stat.n);
        if (stat.n > 1) {
            double ss = 0.0;
            for (const double v : buckets[b]) {
                const double d = v - stat.mean;
                ss += d * d;
            }
            const double sd = std::sqrt(ss / static_cast<double>(stat.n - 1));
            stat.stderr_ = sd / std::sqrt(static_cast<double>(stat.n));
        }
        res.bins.push_back(stat);
    }
    return res;
}

} // namespace hcs
