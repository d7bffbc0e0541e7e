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

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "hcs/error.hpp"
#include "hcs/eval.hpp"
#include "helpers.hpp"

using hcs::ClassLabel;
using hcs::Confusion;
using hcs::ErrorCode;
using hcs::JudgmentRecord;
using hcs::ScoredTweet;
using hcs::SpeechLabel;
using hcstest::error_code_of;
using hcstest::scratch_dir;
using hcstest::write_file;

namespace {

std::vector<ScoredTweet> hand_scored() {
    return {
        {"t1", ClassLabel::Hate, {0.9, 0.1, 2}},
        {"t2", ClassLabel::Hate, {0.6, 0.4, 2}},
        {"t3", ClassLabel::Counter, {0.2, 0.8, 2}},
        {"t4", ClassLabel::Counter, {0.45, 0.55, 2}},
    };
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("confusion counts by truth and prediction") {
    const std::vector<ClassLabel> truth = {ClassLabel::Hate, ClassLabel::Hate,
                                           ClassLabel::Counter, ClassLabel::Counter};
    const std::vector<SpeechLabel> pred = {SpeechLabel::Hate, SpeechLabel::Neutral,
                                           SpeechLabel::Counter, SpeechLabel::Hate};
    const auto c = hcs::confusion(truth, pred);
    CHECK(c.counts[0][0] == 1);
    CHECK(c.counts[0][1] == 0);
    CHECK(c.counts[1][0] == 1);
    CHECK(c.counts[1][1] == 1);
    CHECK(c.neutral == 1);
    CHECK(c.total == 4);
    CHECK(c.labeled() == 3);
}

TEST_CASE("confusion requires aligned inputs") {
    CHECK(error_code_of([] {
              hcs::confusion({ClassLabel::Hate}, {});
          }) == ErrorCode::Shape);
}

TEST_CASE("balanced mistakes give 0.8 across the macro metrics") {
    Confusion c;
    c.counts[0][0] = 40;
    c.counts[0][1] = 10;
    c.counts[1][0] = 10;
    c.counts[1][1] = 40;
    c.total = 100;
    const auto m = hcs::macro_metrics(c);
    CHECK(m.precision == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("perfect predictions give unit metrics") {
    Confusion c;
    c.counts[0][0] = 5;
    c.counts[1][1] = 7;
    c.total = 12;
    const auto m = hcs::macro_metrics(c);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
}

TEST_CASE("a never-predicted class contributes zero precision") {
    // Truth {H, C}; both predicted Hate.
    Confusion c;
    c.counts[0][0] = 1;
    c.counts[1][0] = 1;
    c.total = 2;
    const auto m = hcs::macro_metrics(c);
    CHECK(m.precision == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(0.5).epsilon(1e-12));
    // Hate F1 = 2/3, Counter F1 = 0.
    CHECK(m.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("macro metrics over zero labeled rows are undefined") {
    Confusion c;
    c.neutral = 4;
    c.total = 4;
    CHECK(error_code_of([&] { hcs::macro_metrics(c); }) == ErrorCode::UndefinedMetric);
}

TEST_CASE("threshold sweep thins labels as gamma rises") {
    const auto res =
        hcs::threshold_sweep_cached(hand_scored(), 1, 5, {0.5, 0.75, 0.95});
    REQUIRE(res.rows.size() == 3);
    CHECK(res.scored == 4);
    CHECK(res.excluded == 1);
    CHECK(res.test_size == 5);

    CHECK(res.rows[0].gamma == 0.5);
    CHECK(res.rows[0].macro_f1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.rows[0].labeled_fraction == doctest::Approx(0.8).epsilon(1e-12));

    CHECK(res.rows[1].macro_f1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.rows[1].labeled_fraction == doctest::Approx(0.4).epsilon(1e-12));

    CHECK(res.rows[2].labeled_fraction == 0.0);
    CHECK(res.rows[2].macro_f1 == 0.0);

    for (std::size_t i = 1; i < res.rows.size(); ++i)
        CHECK(res.rows[i].labeled_fraction <= res.rows[i - 1].labeled_fraction);
}

TEST_CASE("threshold sweep validates its inputs") {
    CHECK(error_code_of([] {
              hcs::threshold_sweep_cached({}, 0, 4, {});
          }) == ErrorCode::Config);
    CHECK(error_code_of([] {
              hcs::threshold_sweep_cached({}, 0, 0, {0.5});
          }) == ErrorCode::Config);
}

TEST_CASE("cached and direct sweeps agree on a real panel") {
    const auto parts = hcstest::tiny_panel_parts(19);
    hcs::Panel panel(hcstest::as_const_experts(parts.experts), 0.75);
    const std::vector<double> gammas = {0.5, 0.75, 0.9};

    const auto direct =
        hcs::threshold_sweep(panel, parts.corpus, parts.tests[0], gammas);
    std::size_t excluded = 0;
    const auto scored =
        hcs::score_test_set(panel, parts.corpus, parts.tests[0], &excluded);
    const auto cached = hcs::threshold_sweep_cached(scored, excluded,
                                                    parts.tests[0].ids.size(), gammas);
    REQUIRE(direct.rows.size() == cached.rows.size());
    for (std::size_t i = 0; i < direct.rows.size(); ++i) {
        CHECK(direct.rows[i].macro_f1 == cached.rows[i].macro_f1);
        CHECK(direct.rows[i].precision == cached.rows[i].precision);
        CHECK(direct.rows[i].recall == cached.rows[i].recall);
        CHECK(direct.rows[i].labeled_fraction == cached.rows[i].labeled_fraction);
    }
    CHECK(direct.scored + direct.excluded == parts.tests[0].ids.size());
    CHECK(panel.leakage_violations() == 0);
}

TEST_CASE("score_test_set rejects unknown and unlabeled ids") {
    const auto parts = hcstest::tiny_panel_parts(23);
    hcs::Panel panel(hcstest::as_const_experts(parts.experts), 0.75);
    hcs::TestSet bad;
    bad.per_class = 1;
    bad.ids = {"nicht_da"};
    CHECK(error_code_of([&] {
              hcs::score_test_set(panel, parts.corpus, bad, nullptr);
          }) == ErrorCode::Config);
}

TEST_CASE("perfectly linear judgments give r = 1") {
    std::vector<JudgmentRecord> recs;
    for (int m = 1; m <= 5; ++m) {
        JudgmentRecord r;
        r.tweet_id = "t" + std::to_string(m);
        r.score = (static_cast<double>(m) - 1.0) / 4.0;
        r.ratings = {m};
        recs.push_back(r);
    }
    const auto res = hcs::judgment_correlation(recs, 0.02);
    CHECK(res.pearson_r == doctest::Approx(1.0).epsilon(1e-12));

    for (auto& r : recs) r.score = 1.0 - r.score;
    const auto neg = hcs::judgment_correlation(recs, 0.02);
    CHECK(neg.pearson_r == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson r matches a direct computation") {
    const std::vector<double> scores = {0.12, 0.37, 0.52, 0.58, 0.71, 0.93};
    const std::vector<std::vector<int>> ratings = {{1, 2}, {2}, {3, 4}, {2, 3},
                                                   {4, 5}, {5, 5, 4}};
    std::vector<JudgmentRecord> recs;
    for (std::size_t i = 0; i < scores.size(); ++i)
        recs.push_back({"t" + std::to_string(i), scores[i], ratings[i]});

    const std::size_t n = scores.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const int r : ratings[i]) sum += r;
        y[i] = (sum / static_cast<double>(ratings[i].size()) - 1.0) / 4.0;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += scores[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (scores[i] - mx) * (y[i] - my);
        sxx += (scores[i] - mx) * (scores[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double expected = sxy / std::sqrt(sxx * syy);

    const auto res = hcs::judgment_correlation(recs, 0.02);
    CHECK(res.pearson_r == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bins cover the score grid with sample statistics") {
    std::vector<JudgmentRecord> recs = {
        {"a", 0.010, {1}},       // bin 0: [0, 0.02)
        {"b", 0.015, {3}},       // bin 0
        {"c", 0.021, {2}},       // bin 1
        {"d", 1.000, {5}},       // last bin, upper edge inclusive
        {"e", 0.500, {4}},       // exact boundary goes to bin 25
    };
    const auto res = hcs::judgment_correlation(recs, 0.02);
    REQUIRE(res.bins.size() == 4);

    const auto& b0 = res.bins[0];
    CHECK(b0.lo == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b0.hi == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(b0.n == 2);
    // Mapped ratings are 0 and 0.5; sample sd is sqrt(0.125).
    CHECK(b0.mean == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(b0.stderr_ ==
          doctest::Approx(std::sqrt(0.125) / std::sqrt(2.0)).epsilon(1e-12));

    const auto& b1 = res.bins[1];
    CHECK(b1.n == 1);
    CHECK(b1.stderr_ == 0.0);

    const auto& b_mid = res.bins[2];
    CHECK(b_mid.lo == doctest::Approx(0.5).epsilon(1e-12));

    const auto& blast = res.bins.back();
    CHECK(blast.hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(blast.n == 1);
    CHECK(blast.mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlation validates its inputs") {
    std::vector<JudgmentRecord> one = {{"a", 0.5, {3}}};
    CHECK(error_code_of([&] { hcs::judgment_correlation(one, 0.02); }) ==
          ErrorCode::Config);

    std::vector<JudgmentRecord> flat = {{"a", 0.5, {1}}, {"b", 0.5, {5}}};
    CHECK(error_code_of([&] { hcs::judgment_correlation(flat, 0.02); }) ==
          ErrorCode::UndefinedMetric);

    std::vector<JudgmentRecord> ok = {{"a", 0.1, {1}}, {"b", 0.9, {5}}};
    CHECK(error_code_of([&] { hcs::judgment_correlation(ok, 0.0); }) ==
          ErrorCode::Config);
    CHECK(error_code_of([&] { hcs::judgment_correlation(ok, 1.5); }) ==
          ErrorCode::Config);

    std::vector<JudgmentRecord> range = {{"a", -0.1, {1}}, {"b", 0.9, {5}}};
    CHECK(error_code_of([&] { hcs::judgment_correlation(range, 0.02); }) ==
          ErrorCode::Format);
}

TEST_CASE("judgment files parse and validate") {
    const auto dir = scratch_dir("judgments");
    const auto good = write_file(dir / "good.jsonl",
                                 R"({"tweet_id":"1","score":0.8,"ratings":[4,5]})"
                                 "\n"
                                 R"({"tweet_id":"2","score":0.2,"ratings":[1]})"
                                 "\n");
    const auto recs = hcs::load_judgments(good);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].tweet_id == "1");
    CHECK(recs[0].score == 0.8);
    CHECK(recs[0].ratings == std::vector<int>{4, 5});

    const auto bad_rating = write_file(
        dir / "bad_rating.jsonl", R"({"tweet_id":"1","score":0.8,"ratings":[6]})"
                                  "\n");
    CHECK(error_code_of([&] { hcs::load_judgments(bad_rating); }) ==
          ErrorCode::Format);

    const auto bad_json = write_file(dir / "bad.jsonl", "{kaputt\n");
    CHECK(error_code_of([&] { hcs::load_judgments(bad_json); }) == ErrorCode::Parse);
    CHECK(error_code_of([&] {
              hcs::load_judgments((dir / "fehlt.jsonl").string());
          }) == ErrorCode::Io);
}

} // TEST_SUITE
