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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hcs/convo.hpp"
#include "hcs/corpus.hpp"
#include "hcs/error.hpp"
#include "hcs/eval.hpp"
#include "hcs/panel.hpp"
#include "hcs/pv.hpp"
#include "hcs/random.hpp"
#include "hcs/sweep.hpp"
#include "hcs/synth.hpp"
#include "hcs/text_prep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    // Paths; empty entries resolve against out_dir.
    std::string out_dir = "out";
    std::string corpus_path;
    std::string trees_path;
    std::string stoplist_dir = "data/stoplists";
    std::string sets_path;
    std::string ledger_path;
    std::string experts_dir;
    std::string panel_path;
    std::string prep_out;
    std::uint64_t seed = 1;
    std::size_t workers = 1;

    // synth
    std::size_t synth_per_class = 5000;
    std::size_t synth_unlabeled = 0;
    double synth_rho = 0.5;
    std::size_t synth_vocab = 200;
    std::size_t synth_len_min = 8;
    std::size_t synth_len_max = 16;
    std::size_t synth_authors = 50;
    bool synth_with_trees = false;
    std::size_t synth_tree_count = 40;

    // prep
    std::string prep_stop = "light";

    // sets
    std::size_t k_sets = 2;
    std::size_t train_per_class = 2000;
    std::size_t test_per_class = 500;

    // sweep grid
    std::vector<std::string> grid_algorithms = {"dbow"};
    std::vector<std::size_t> grid_dims = {100};
    std::vector<std::size_t> grid_windows = {5};
    std::vector<std::size_t> grid_epochs = {10};
    std::vector<std::string> grid_schemes = {"author_group"};
    std::vector<std::string> grid_stops = {"none", "light"};
    std::vector<double> lambdas = {0.1, 1.0, 10.0};
    std::uint64_t min_count = 10;
    std::size_t negative = 5;
    double lr_initial = 0.025;
    double lr_min = 0.00025;
    double subsample = 0.0;
    bool train_word_vectors = false;
    std::size_t infer_steps = 50;
    bool use_intercept = false;

    // panel
    std::size_t top_k = 10;
    double panel_gamma = 0.75;

    // eval
    std::vector<double> gammas = {0.50, 0.65, 0.75, 0.85, 0.95};
    std::size_t eval_per_class = 500;
    std::string judgments_path;
    double bin_width = 0.02;

    // tree analysis
    std::optional<double> trees_gamma; // unset: manifest gamma
    double score_threshold = 0.70;
    std::size_t min_each = 10;
    bool subtree = false;

    std::string corpus() const { return corpus_path.empty() ? out_dir + "/corpus.jsonl" : corpus_path; }
    std::string trees() const { return trees_path.empty() ? out_dir + "/trees.jsonl" : trees_path; }
    std::string sets() const { return sets_path.empty() ? out_dir + "/sets.json" : sets_path; }
    std::string ledger() const { return ledger_path.empty() ? out_dir + "/ledger.jsonl" : ledger_path; }
    std::string experts() const { return experts_dir.empty() ? out_dir + "/experts" : experts_dir; }
    std::string panel() const { return panel_path.empty() ? out_dir + "/panel.json" : panel_path; }
    std::string prep() const { return prep_out.empty() ? out_dir + "/prep.jsonl" : prep_out; }
};

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            hcs::fail(hcs::ErrorCode::Config,
                      "config: unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) obj.at(key).get_to(out);
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        hcs::fail(hcs::ErrorCode::Io, "cannot open config file \"" + path + "\"");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        hcs::fail(hcs::ErrorCode::Parse, "config file \"" + path + "\": " + e.what());
    }
    if (!j.is_object()) {
        hcs::fail(hcs::ErrorCode::Format, "config file root must be an object");
    }
    try {
        check_keys(j, "the top level",
                   {"out_dir", "corpus", "trees", "stoplist_dir", "sets", "ledger",
                    "experts_dir", "panel_manifest", "seed", "workers", "synth", "prep",
                    "set_building", "grid", "panel", "eval", "tree_analysis"});
        read_key(j, "out_dir", cfg.out_dir);
        read_key(j, "corpus", cfg.corpus_path);
        read_key(j, "trees", cfg.trees_path);
        read_key(j, "stoplist_dir", cfg.stoplist_dir);
        read_key(j, "sets", cfg.sets_path);
        read_key(j, "ledger", cfg.ledger_path);
        read_key(j, "experts_dir", cfg.experts_dir);
        read_key(j, "panel_manifest", cfg.panel_path);
        read_key(j, "seed", cfg.seed);
        read_key(j, "workers", cfg.workers);
        if (j.contains("synth")) {
            const auto& s = j["synth"];
            check_keys(s, "\"synth\"",
                       {"per_class", "unlabeled", "rho", "vocab_size", "len_min", "len_max",
                        "authors_per_group", "with_trees", "tree_count"});
            read_key(s, "per_class", cfg.synth_per_class);
            read_key(s, "unlabeled", cfg.synth_unlabeled);
            read_key(s, "rho", cfg.synth_rho);
            read_key(s, "vocab_size", cfg.synth_vocab);
            read_key(s, "len_min", cfg.synth_len_min);
            read_key(s, "len_max", cfg.synth_len_max);
            read_key(s, "authors_per_group", cfg.synth_authors);
            read_key(s, "with_trees", cfg.synth_with_trees);
            read_key(s, "tree_count", cfg.synth_tree_count);
        }
        if (j.contains("prep")) {
            const auto& s = j["prep"];
            check_keys(s, "\"prep\"", {"stop_level", "out"});
            read_key(s, "stop_level", cfg.prep_stop);
            read_key(s, "out", cfg.prep_out);
        }
        if (j.contains("set_building")) {
            const auto& s = j["set_building"];
            check_keys(s, "\"set_building\"", {"k", "train_per_class", "test_per_class"});
            read_key(s, "k", cfg.k_sets);
            read_key(s, "train_per_class", cfg.train_per_class);
            read_key(s, "test_per_class", cfg.test_per_class);
        }
        if (j.contains("grid")) {
            const auto& s = j["grid"];
            check_keys(s, "\"grid\"",
                       {"algorithms", "dims", "windows", "epochs", "schemes", "stop_levels",
                        "lambdas", "min_count", "negative", "lr_initial", "lr_min",
                        "subsample", "train_word_vectors", "infer_steps", "use_intercept"});
            read_key(s, "algorithms", cfg.grid_algorithms);
            read_key(s, "dims", cfg.grid_dims);
            read_key(s, "windows", cfg.grid_windows);
            read_key(s, "epochs", cfg.grid_epochs);
            read_key(s, "schemes", cfg.grid_schemes);
            read_key(s, "stop_levels", cfg.grid_stops);
            read_key(s, "lambdas", cfg.lambdas);
            read_key(s, "min_count", cfg.min_count);
            read_key(s, "negative", cfg.negative);
            read_key(s, "lr_initial", cfg.lr_initial);
            read_key(s, "lr_min", cfg.lr_min);
            read_key(s, "subsample", cfg.subsample);
            read_key(s, "train_word_vectors", cfg.train_word_vectors);
            read_key(s, "infer_steps", cfg.infer_steps);
            read_key(s, "use_intercept", cfg.use_intercept);
        }
        if (j.contains("panel")) {
            const auto& s = j["panel"];
            check_keys(s, "\"panel\"", {"top_k", "gamma"});
            read_key(s, "top_k", cfg.top_k);
            read_key(s, "gamma", cfg.panel_gamma);
        }
        if (j.contains("eval")) {
            const auto& s = j["eval"];
            check_keys(s, "\"eval\"", {"gammas", "test_per_class", "judgments", "bin_width"});
            read_key(s, "gammas", cfg.gammas);
            read_key(s, "test_per_class", cfg.eval_per_class);
            read_key(s, "judgments", cfg.judgments_path);
            read_key(s, "bin_width", cfg.bin_width);
        }
        if (j.contains("tree_analysis")) {
            const auto& s = j["tree_analysis"];
            check_keys(s, "\"tree_analysis\"",
                       {"gamma", "score_threshold", "min_each", "subtree"});
            if (s.contains("gamma")) cfg.trees_gamma = s["gamma"].get<double>();
            read_key(s, "score_threshold", cfg.score_threshold);
            read_key(s, "min_each", cfg.min_each);
            read_key(s, "subtree", cfg.subtree);
        }
    } catch (const json::exception& e) {
        hcs::fail(hcs::ErrorCode::Format, "config file \"" + path + "\": " + e.what());
    }
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) {
        hcs::fail(hcs::ErrorCode::Config,
                  std::string(what) + " \"" + path + "\" does not exist");
    }
}

void ensure_out_dir(const RunConfig& cfg) {
    if (cfg.out_dir.empty()) {
        hcs::fail(hcs::ErrorCode::Config, "output directory must not be empty");
    }
    fs::create_directories(cfg.out_dir);
}

// ---------------------------------------------------------------- sets file

json sets_to_json(const RunConfig& cfg, const std::vector<hcs::TrainingSet>& train,
                  const std::vector<hcs::TestSet>& test) {
    json j;
    j["format"] = "hcs-sets";
    j["version"] = 1;
    j["seed"] = cfg.seed;
    j["k"] = cfg.k_sets;
    j["train_per_class"] = cfg.train_per_class;
    j["test_per_class"] = cfg.test_per_class;
    auto& jt = j["train"] = json::array();
    for (const auto& s : train) jt.push_back({{"index", s.index}, {"ids", s.ids}});
    auto& je = j["test"] = json::array();
    for (const auto& s : test) je.push_back({{"index", s.index}, {"ids", s.ids}});
    return j;
}

struct SetsFile {
    std::uint64_t seed = 0;
    std::size_t k = 0;
    std::size_t train_per_class = 0;
    std::size_t test_per_class = 0;
    std::vector<hcs::TrainingSet> train;
    std::vector<hcs::TestSet> test;
};

SetsFile load_sets(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        hcs::fail(hcs::ErrorCode::Io, "cannot open sets file \"" + path + "\"");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        hcs::fail(hcs::ErrorCode::Parse, "sets file \"" + path + "\": " + e.what());
    }
    SetsFile out;
    try {
        if (j.value("format", std::string()) != "hcs-sets") {
            hcs::fail(hcs::ErrorCode::Format, "sets file \"" + path + "\" has wrong format tag");
        }
        out.seed = j.at("seed").get<std::uint64_t>();
        out.k = j.at("k").get<std::size_t>();
        out.train_per_class = j.at("train_per_class").get<std::size_t>();
        out.test_per_class = j.at("test_per_class").get<std::size_t>();
        for (const auto& e : j.at("train")) {
            hcs::TrainingSet s;
            s.index = e.at("index").get<std::size_t>();
            s.per_class = out.train_per_class;
            e.at("ids").get_to(s.ids);
            out.train.push_back(std::move(s));
        }
        for (const auto& e : j.at("test")) {
            hcs::TestSet s;
            s.index = e.at("index").get<std::size_t>();
            s.per_class = out.test_per_class;
            e.at("ids").get_to(s.ids);
            out.test.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        hcs::fail(hcs::ErrorCode::Format, "sets file \"" + path + "\": " + e.what());
    }
    if (out.train.size() != out.k || out.test.size() != out.k) {
        hcs::fail(hcs::ErrorCode::Format, "sets file \"" + path + "\" is inconsistent");
    }
    return out;
}

// ------------------------------------------------------------------- grid

std::vector<hcs::SweepCell> expand_grid(const RunConfig& cfg) {
    if (cfg.grid_algorithms.empty() || cfg.grid_dims.empty() || cfg.grid_windows.empty() ||
        cfg.grid_epochs.empty() || cfg.grid_schemes.empty() || cfg.grid_stops.empty() ||
        cfg.lambdas.empty()) {
        hcs::fail(hcs::ErrorCode::Config, "sweep grid has an empty dimension");
    }
    std::vector<hcs::SweepCell> cells;
    for (const auto& alg : cfg.grid_algorithms) {
        for (const auto dim : cfg.grid_dims) {
            for (const auto win : cfg.grid_windows) {
                for (const auto ep : cfg.grid_epochs) {
                    for (const auto& scheme : cfg.grid_schemes) {
                        for (const auto& stop : cfg.grid_stops) {
                            for (std::size_t set = 0; set < cfg.k_sets; ++set) {
                                hcs::EmbedConfig e;
                                e.algorithm = hcs::pv_algorithm_from_name(alg);
                                e.dim = dim;
                                e.window = win;
                                e.epochs = ep;
                                e.scheme = hcs::scheme_from_name(scheme);
                                e.min_count = cfg.min_count;
                                e.negative = cfg.negative;
                                e.lr_initial = cfg.lr_initial;
                                e.lr_min = cfg.lr_min;
                                e.subsample = cfg.subsample;
                                e.train_word_vectors = cfg.train_word_vectors;
                                e.infer_steps = cfg.infer_steps;
                                e.workers = cfg.workers;
                                // Group-stable seed: survives grid edits.
                                const std::string key = alg + "|" + std::to_string(dim) +
                                                        "|" + std::to_string(win) + "|" +
                                                        std::to_string(ep) + "|" + scheme +
                                                        "|" + stop + "|" +
                                                        std::to_string(set);
                                e.seed = hcs::derive_seed(cfg.seed, hcs::fnv1a64(key));
                                e.validate();
                                for (const double lambda : cfg.lambdas) {
                                    if (!(lambda > 0.0)) {
                                        hcs::fail(hcs::ErrorCode::Config,
                                                  "lambda grid values must be positive");
                                    }
                                    hcs::SweepCell cell;
                                    cell.embed = e;
                                    cell.stop_level = hcs::stop_level_from_name(stop);
                                    cell.lambda = lambda;
                                    cell.set_index = set;
                                    cells.push_back(std::move(cell));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return cells;
}

hcs::SweepOptions sweep_options(const RunConfig& cfg) {
    hcs::SweepOptions opts;
    opts.artifact_dir = cfg.experts();
    opts.ledger_path = cfg.ledger();
    opts.stoplist_dir = cfg.stoplist_dir;
    opts.gamma = 0.5;
    opts.use_intercept = cfg.use_intercept;
    return opts;
}

// ---------------------------------------------------------------- commands

void cmd_synth(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    hcs::SynthConfig sc;
    sc.per_class = cfg.synth_per_class;
    sc.unlabeled = cfg.synth_unlabeled;
    sc.rho = cfg.synth_rho;
    sc.vocab_size = cfg.synth_vocab;
    sc.len_min = cfg.synth_len_min;
    sc.len_max = cfg.synth_len_max;
    sc.authors_per_group = cfg.synth_authors;
    sc.seed = cfg.seed;
    sc.validate();
    const auto tweets = hcs::synth_tweets(sc);
    hcs::write_tweets_jsonl(tweets, cfg.corpus());
    std::cout << "wrote " << tweets.size() << " tweets (rho = " << sc.rho << ") to "
              << cfg.corpus() << "\n";
    if (cfg.synth_with_trees) {
        hcs::SynthTreeConfig tc;
        tc.trees = cfg.synth_tree_count;
        tc.rho = cfg.synth_rho;
        tc.vocab_size = cfg.synth_vocab;
        tc.len_min = cfg.synth_len_min;
        tc.len_max = cfg.synth_len_max;
        tc.seed = hcs::derive_seed(cfg.seed, 0x7265e5);
        tc.validate();
        const auto trees = hcs::synth_trees(tc);
        hcs::write_trees_jsonl(trees, cfg.trees());
        std::cout << "wrote " << trees.size() << " reply trees to " << cfg.trees() << "\n";
    }
}

void cmd_prep(const RunConfig& cfg) {
    require_file(cfg.corpus(), "corpus file");
    const auto level = hcs::stop_level_from_name(cfg.prep_stop);
    const auto stops = hcs::resolve_stoplist(level, cfg.stoplist_dir);
    ensure_out_dir(cfg);
    const auto corpus = hcs::Corpus::ingest_file(cfg.corpus());
    std::ofstream out(cfg.prep());
    if (!out) {
        hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + cfg.prep() + "\" for writing");
    }
    for (const auto& t : corpus.tweets()) {
        const auto tokens = hcs::remove_stopwords(hcs::normalize(t.text), stops);
        json j;
        j["id"] = t.id;
        j["group"] = hcs::group_name(t.group);
        j["tokens"] = tokens;
        out << j.dump() << '\n';
    }
    if (!out) {
        hcs::fail(hcs::ErrorCode::Io, "write to \"" + cfg.prep() + "\" failed");
    }
    std::cout << "preprocessed " << corpus.size() << " tweets (stop level " << cfg.prep_stop
              << ") to " << cfg.prep() << "\n";
}

void cmd_sets(const RunConfig& cfg) {
    require_file(cfg.corpus(), "corpus file");
    ensure_out_dir(cfg);
    const auto corpus = hcs::Corpus::ingest_file(cfg.corpus());
    const auto train =
        hcs::build_training_sets(corpus, cfg.k_sets, cfg.train_per_class, cfg.seed);
    std::vector<hcs::TestSet> test;
    test.reserve(train.size());
    for (const auto& tr : train) {
        test.push_back(hcs::build_test_set(corpus, tr, cfg.test_per_class,
                                           hcs::derive_seed(cfg.seed, 0x7e57 + tr.index)));
    }
    std::ofstream out(cfg.sets());
    if (!out) {
        hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + cfg.sets() + "\" for writing");
    }
    out << sets_to_json(cfg, train, test).dump(2) << '\n';
    if (!out) {
        hcs::fail(hcs::ErrorCode::Io, "write to \"" + cfg.sets() + "\" failed");
    }
    std::cout << "built " << train.size() << " training sets (2x" << cfg.train_per_class
              << ") with held-out sets (2x" << cfg.test_per_class << ") in " << cfg.sets()
              << "\n";
}

void write_expert_table(const RunConfig& cfg, const std::vector<hcs::SweepEntry>& ranked) {
    const auto path = cfg.out_dir + "/experts.tsv";
    std::ofstream out(path);
    if (!out) {
        hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + path + "\" for writing");
    }
    out << "rank\tfingerprint\tf1\tprecision\trecall\tlambda\tset\tpath\tidentity\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& e = ranked[i];
        char num[128];
        std::snprintf(num, sizeof num, "%.6f\t%.6f\t%.6f", e.f1, e.precision, e.recall);
        out << (i + 1) << '\t' << e.fingerprint << '\t' << num << '\t' << e.lambda << '\t'
            << e.set_index << '\t' << e.expert_path << '\t' << e.identity << '\n';
    }
    if (!out) {
        hcs::fail(hcs::ErrorCode::Io, "write to \"" + path + "\" failed");
    }
}

void cmd_sweep(const RunConfig& cfg) {
    require_file(cfg.corpus(), "corpus file");
    require_file(cfg.sets(), "sets file");
    const auto cells = expand_grid(cfg);
    ensure_out_dir(cfg);
    const auto corpus = hcs::Corpus::ingest_file(cfg.corpus());
    const auto sets = load_sets(cfg.sets());
    const auto entries =
        hcs::expert_sweep(corpus, sets.train, sets.test, cells, sweep_options(cfg));
    std::size_t cached = 0, failed = 0;
    for (const auto& e : entries) {
        cached += e.from_ledger ? 1 : 0;
        failed += e.failed ? 1 : 0;
    }
    const auto ranked = hcs::rank_entries(entries);
    write_expert_table(cfg, ranked);
    std::cout << "swept " << entries.size() << " cells (" << cached << " cached, " << failed
              << " failed); ranking in " << cfg.out_dir << "/experts.tsv\n";
    for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) {
        char line[160];
        std::snprintf(line, sizeof line, "  #%zu F1=%.4f lambda=%g set=%zu %s", i + 1,
                      ranked[i].f1, ranked[i].lambda, ranked[i].set_index,
                      ranked[i].fingerprint.c_str());
        std::cout << line << "\n";
    }
    if (failed > 0) {
        std::cout << "  (failures recorded in " << cfg.ledger() << ")\n";
    }
}

void cmd_panel(const RunConfig& cfg) {
    require_file(cfg.ledger(), "results ledger");
    if (!(cfg.panel_gamma >= 0.5 && cfg.panel_gamma <= 1.0)) {
        hcs::fail(hcs::ErrorCode::Config, "panel gamma must lie in [0.5, 1]");
    }
    ensure_out_dir(cfg);
    const auto ranked = hcs::rank_entries(hcs::load_ledger(cfg.ledger()));
    const auto panel = hcs::panel_from_entries(ranked, cfg.top_k, cfg.panel_gamma);
    std::vector<std::string> paths;
    paths.reserve(cfg.top_k);
    for (std::size_t i = 0; i < cfg.top_k; ++i) paths.push_back(ranked[i].expert_path);
    hcs::save_panel_manifest(cfg.panel(), panel, paths);
    std::cout << "panel of " << cfg.top_k << " experts (gamma = " << cfg.panel_gamma
              << ") written to " << cfg.panel() << "\n";
    for (const auto& e : panel.experts()) {
        char line[128];
        std::snprintf(line, sizeof line, "  F1=%.4f %s", e->f1, e->fingerprint.c_str());
        std::cout << line << "\n";
    }
}

void write_metrics(const RunConfig& cfg, const hcs::ThresholdSweepResult& res) {
    const auto tsv_path = cfg.out_dir + "/metrics.tsv";
    std::ofstream tsv(tsv_path);
    if (!tsv) {
        hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + tsv_path + "\" for writing");
    }
    tsv << "gamma\tprecision\trecall\tmacro_f1\tlabeled_fraction\n";
    for (const auto& r : res.rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%.2f\t%.6f\t%.6f\t%.6f\t%.6f", r.gamma,
                      r.precision, r.recall, r.macro_f1, r.labeled_fraction);
        tsv << line << '\n';
    }
    if (!tsv) {
        hcs::fail(hcs::ErrorCode::Io, "write to \"" + tsv_path + "\" failed");
    }

    const auto rep_path = cfg.out_dir + "/report.txt";
    std::ofstream rep(rep_path);
    if (!rep) {
        hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + rep_path + "\" for writing");
    }
    char buf[160];
    rep << "Panel scores by confidence threshold\n";
    rep << "gamma   precision  recall  macro F1  labeled\n";
    for (const auto& r : res.rows) {
        std::snprintf(buf, sizeof buf, "%.2f    %.3f      %.3f   %.3f     %.1f%%\n", r.gamma,
                      r.precision, r.recall, r.macro_f1, 100.0 * r.labeled_fraction);
        rep << buf;
    }
    std::snprintf(buf, sizeof buf, "scored %zu of %zu test tweets (%zu unscorable)\n",
                  res.scored, res.test_size, res.excluded);
    rep << buf;
    if (!rep) {
        hcs::fail(hcs::ErrorCode::Io, "write to \"" + rep_path + "\" failed");
    }
    std::cout.write(buf, static_cast<std::streamsize>(std::char_traits<char>::length(buf)));
}

void cmd_eval(const RunConfig& cfg) {
    require_file(cfg.corpus(), "corpus file");
    require_file(cfg.panel(), "panel manifest");
    for (const double g : cfg.gammas) {
        if (!(g >= 0.5 && g <= 1.0)) {
            hcs::fail(hcs::ErrorCode::Config, "eval gammas must lie in [0.5, 1]");
        }
    }
    ensure_out_dir(cfg);
    const auto corpus = hcs::Corpus::ingest_file(cfg.corpus());
    const auto panel = hcs::load_panel_manifest(cfg.panel());

    // Held-out set disjoint from every expert's training data, so all votes count.
    std::vector<std::string> exclude;
    for (const auto& e : panel.experts()) {
        exclude.insert(exclude.end(), e->train_ids.begin(), e->train_ids.end());
    }
    const auto test = hcs::build_test_set_excluding(corpus, exclude, cfg.eval_per_class,
                                                    hcs::derive_seed(cfg.seed, 0xe7a1));
    const auto res = hcs::threshold_sweep(panel, corpus, test, cfg.gammas);
    write_metrics(cfg, res);
    std::cout << "metrics in " << cfg.out_dir << "/metrics.tsv, report in " << cfg.out_dir
              << "/report.txt\n";

    if (!cfg.judgments_path.empty()) {
        require_file(cfg.judgments_path, "judgments file");
        const auto records = hcs::load_judgments(cfg.judgments_path);
        const auto corr = hcs::judgment_correlation(records, cfg.bin_width);
        const auto path = cfg.out_dir + "/correlation.tsv";
        std::ofstream out(path);
        if (!out) {
            hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + path + "\" for writing");
        }
        out << "bin_lo\tbin_hi\tmean_human\tstderr\tn\n";
        for (const auto& b : corr.bins) {
            char line[160];
            std::snprintf(line, sizeof line, "%.3f\t%.3f\t%.6f\t%.6f\t%zu", b.lo, b.hi,
                          b.mean, b.stderr_, b.n);
            out << line << '\n';
        }
        if (!out) {
            hcs::fail(hcs::ErrorCode::Io, "write to \"" + path + "\" failed");
        }
        char msg[96];
        std::snprintf(msg, sizeof msg, "pearson r = %.4f over %zu records\n", corr.pearson_r,
                      records.size());
        std::cout << msg << "binned means in " << path << "\n";
    }
}

void cmd_trees(const RunConfig& cfg) {
    require_file(cfg.trees(), "trees file");
    require_file(cfg.panel(), "panel manifest");
    ensure_out_dir(cfg);
    const auto panel = hcs::load_panel_manifest(cfg.panel(), cfg.trees_gamma);
    const double gamma = cfg.trees_gamma.value_or(panel.gamma());
    const auto loaded = hcs::load_trees(cfg.trees());
    for (const auto& rej : loaded.rejected) {
        std::cout << "rejected tree \"" << rej.tree_id << "\": " << rej.reason << "\n";
    }
    if (loaded.trees.empty()) {
        hcs::fail(hcs::ErrorCode::EmptyResult, "no valid trees in \"" + cfg.trees() + "\"");
    }
    std::vector<hcs::LabeledTree> labeled;
    labeled.reserve(loaded.trees.size());
    std::size_t excluded = 0;
    for (const auto& t : loaded.trees) {
        labeled.push_back(hcs::label_tree(panel, t, gamma));
        excluded += labeled.back().excluded;
    }
    std::cout << "labeled " << labeled.size() << " trees at gamma = " << gamma << " ("
              << excluded << " nodes excluded)\n";

    {
        const auto path = cfg.out_dir + "/monthly_proportions.tsv";
        std::ofstream out(path);
        if (!out) hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + path + "\" for writing");
        out << "month\thate\tcounter\tneutral\texcluded\tp_hate\tp_counter\tp_other\n";
        for (const auto& r : hcs::monthly_proportions(labeled)) {
            out << r.month << '\t' << r.hate << '\t' << r.counter << '\t' << r.neutral
                << '\t' << r.excluded << '\t';
            if (r.has_data) {
                char line[96];
                std::snprintf(line, sizeof line, "%.6f\t%.6f\t%.6f", r.p_hate, r.p_counter,
                              r.p_other);
                out << line << '\n';
            } else {
                out << "-\t-\t-\n";
            }
        }
        if (!out) hcs::fail(hcs::ErrorCode::Io, "write to \"" + path + "\" failed");
    }
    {
        const auto path = cfg.out_dir + "/monthly_extremity.tsv";
        std::ofstream out(path);
        if (!out) hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + path + "\" for writing");
        out << "month\thate_extremity\tn_hate\tcounter_extremity\tn_counter\n";
        for (const auto& r : hcs::monthly_extremity(labeled)) {
            out << r.month << '\t';
            if (r.has_hate) {
                char v[32];
                std::snprintf(v, sizeof v, "%.6f", r.hate_extremity);
                out << v;
            } else {
                out << '-';
            }
            out << '\t' << r.n_hate << '\t';
            if (r.has_counter) {
                char v[32];
                std::snprintf(v, sizeof v, "%.6f", r.counter_extremity);
                out << v;
            } else {
                out << '-';
            }
            out << '\t' << r.n_counter << '\n';
        }
        if (!out) hcs::fail(hcs::ErrorCode::Io, "write to \"" + path + "\" failed");
    }
    {
        hcs::InteractionOptions opts;
        opts.score_threshold = cfg.score_threshold;
        opts.min_each = cfg.min_each;
        opts.subtree = cfg.subtree;
        const auto prof = hcs::interaction_profile(labeled, opts);
        const auto path = cfg.out_dir + "/interaction.tsv";
        std::ofstream out(path);
        if (!out) hcs::fail(hcs::ErrorCode::Io, "cannot open \"" + path + "\" for writing");
        out << "trigger\tfollowing\tnormalized_frequency\n";
        static const char* kTrigger[2] = {"hate", "counter"};
        static const char* kFollow[3] = {"hate", "counter", "other"};
        for (std::size_t t = 0; t < 2; ++t) {
            for (std::size_t y = 0; y < 3; ++y) {
                out << kTrigger[t] << '\t' << kFollow[y] << '\t';
                if (prof.defined[t][y]) {
                    char v[32];
                    std::snprintf(v, sizeof v, "%.6f", prof.value[t][y]);
                    out << v << '\n';
                } else {
                    out << "-\n";
                }
            }
        }
        if (!out) hcs::fail(hcs::ErrorCode::Io, "write to \"" + path + "\" failed");
        std::cout << "interaction profile over " << prof.trees_used << " qualifying trees in "
                  << path << "\n";
    }
}

template <typename F>
void stage(const char* name, F&& f) {
    std::cout << "==> " << name << "\n";
    try {
        f();
    } catch (const hcs::Error& e) {
        throw hcs::Error(e.code(), "stage " + std::string(name) + ": " + e.what());
    }
}

void cmd_pipeline(const RunConfig& cfg, bool fresh) {
    require_file(cfg.corpus(), "corpus file");
    expand_grid(cfg); // fail fast on grid mistakes before any work
    stage("prep", [&] { cmd_prep(cfg); });
    stage("sets", [&] {
        if (!fresh && fs::exists(cfg.sets())) {
            const auto sets = load_sets(cfg.sets());
            if (sets.seed == cfg.seed && sets.k == cfg.k_sets &&
                sets.train_per_class == cfg.train_per_class &&
                sets.test_per_class == cfg.test_per_class) {
                std::cout << "sets cache hit: " << cfg.sets() << "\n";
                return;
            }
        }
        cmd_sets(cfg);
    });
    stage("sweep", [&] { cmd_sweep(cfg); });
    stage("panel", [&] { cmd_panel(cfg); });
    stage("eval", [&] { cmd_eval(cfg); });
    std::cout << "pipeline complete; results under " << cfg.out_dir << "\n";
}

struct Flags {
    std::optional<std::string> config, out_dir, corpus, trees, stoplist_dir, sets, ledger,
        experts_dir, panel_manifest, prep_out, prep_stop, judgments;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers, per_class, unlabeled, vocab_size, len_min, len_max,
        authors, tree_count, k, train_per_class, test_per_class, min_count, negative,
        infer_steps, top_k, eval_per_class, min_each;
    std::optional<double> rho, lr_initial, lr_min, subsample, panel_gamma, bin_width,
        trees_gamma, score_threshold;
    bool with_trees = false, train_word_vectors = false, use_intercept = false,
         subtree = false;
    std::vector<std::string> algorithms, schemes, stops;
    std::vector<std::size_t> dims, windows, epochs;
    std::vector<double> lambdas, gammas;
    bool fresh = false;
};

template <typename T>
void take(const std::optional<T>& flag, T& into) {
    if (flag.has_value()) into = *flag;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hate/counter speech classification pipeline"};
    app.require_subcommand(1);
    app.fallthrough(true);

    Flags f;
    app.add_option("--config", f.config, "JSON config file (flags override it)");
    app.add_option("--out-dir", f.out_dir, "output directory (default: out)");
    app.add_option("--corpus", f.corpus, "corpus JSONL path");
    app.add_option("--trees-file", f.trees, "reply trees JSONL path");
    app.add_option("--stoplist-dir", f.stoplist_dir, "directory with stop list files");
    app.add_option("--sets-file", f.sets, "training/test sets JSON path");
    app.add_option("--ledger", f.ledger, "sweep results ledger path");
    app.add_option("--experts-dir", f.experts_dir, "expert artifact directory");
    app.add_option("--panel-manifest", f.panel_manifest, "panel manifest path");
    app.add_option("--seed", f.seed, "master seed");
    app.add_option("--workers", f.workers,
                   "embedding training workers (>1 forfeits bitwise determinism)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic two-group corpus");
    synth->add_option("--per-class", f.per_class, "tweets per group");
    synth->add_option("--unlabeled", f.unlabeled, "extra unlabeled tweets");
    synth->add_option("--rho", f.rho, "vocabulary overlap fraction in [0,1]");
    synth->add_option("--vocab-size", f.vocab_size, "tokens per group vocabulary");
    synth->add_option("--len-min", f.len_min, "minimum tokens per tweet");
    synth->add_option("--len-max", f.len_max, "maximum tokens per tweet");
    synth->add_option("--authors", f.authors, "authors per group");
    synth->add_flag("--with-trees", f.with_trees, "also generate synthetic reply trees");
    synth->add_option("--tree-count", f.tree_count, "number of synthetic trees");

    auto* prep = app.add_subcommand("prep", "normalize and stop-filter the corpus");
    prep->add_option("--stop-level", f.prep_stop, "none|light|heavy");
    prep->add_option("--prep-out", f.prep_out, "tokenized output path");

    auto* sets = app.add_subcommand("sets", "sample balanced training and held-out sets");
    sets->add_option("--k", f.k, "number of training sets");
    sets->add_option("--train-per-class", f.train_per_class, "training tweets per class");
    sets->add_option("--test-per-class", f.test_per_class, "held-out tweets per class");

    auto* sweep = app.add_subcommand("sweep", "train and score the expert grid");
    auto* opt_algorithms =
        sweep->add_option("--algorithms", f.algorithms, "dbow|dm list");
    auto* opt_dims = sweep->add_option("--dims", f.dims, "embedding dimensions");
    auto* opt_windows = sweep->add_option("--windows", f.windows, "context windows");
    auto* opt_epochs = sweep->add_option("--epochs", f.epochs, "training epochs");
    auto* opt_schemes = sweep->add_option(
        "--schemes", f.schemes, "unique|author|group|author_group|unique_group list");
    auto* opt_stops = sweep->add_option("--stop-levels", f.stops, "none|light|heavy list");
    auto* opt_lambdas = sweep->add_option("--lambdas", f.lambdas,
                                          "regularization strengths (smaller = stronger)");
    sweep->add_option("--min-count", f.min_count, "vocabulary frequency cutoff");
    sweep->add_option("--negative", f.negative, "negative samples per position");
    sweep->add_option("--lr-initial", f.lr_initial, "initial learning rate");
    sweep->add_option("--lr-min", f.lr_min, "final learning rate");
    sweep->add_option("--subsample", f.subsample, "frequent-word subsampling threshold");
    sweep->add_flag("--train-word-vectors", f.train_word_vectors,
                    "DBOW: also train word vectors");
    sweep->add_option("--infer-steps", f.infer_steps, "inference optimization passes");
    sweep->add_flag("--use-intercept", f.use_intercept, "unregularized intercept term");

    auto* panel = app.add_subcommand("panel", "assemble the top-k expert panel");
    panel->add_option("--top-k", f.top_k, "panel size");
    panel->add_option("--gamma", f.panel_gamma, "panel confidence threshold");

    auto* eval = app.add_subcommand("eval", "threshold sweep on a held-out set");
    auto* opt_gammas = eval->add_option("--gammas", f.gammas, "thresholds to sweep");
    eval->add_option("--eval-per-class", f.eval_per_class, "held-out tweets per class");
    eval->add_option("--judgments", f.judgments, "human judgment records JSONL");
    eval->add_option("--bin-width", f.bin_width, "correlation bin width");

    auto* trees = app.add_subcommand("trees", "label reply trees and run the analyses");
    trees->add_option("--gamma", f.trees_gamma, "override the manifest gamma");
    trees->add_option("--score-threshold", f.score_threshold,
                      "interaction analysis score threshold");
    trees->add_option("--min-each", f.min_each, "minimum hate and counter tweets per tree");
    trees->add_flag("--subtree", f.subtree, "count only descendants as following tweets");

    auto* pipeline =
        app.add_subcommand("pipeline", "prep, sets, sweep, panel, and eval in order");
    pipeline->add_flag("--fresh", f.fresh, "rebuild sets even on a cache hit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg;
        if (f.config.has_value()) load_config_file(*f.config, cfg);
        take(f.out_dir, cfg.out_dir);
        take(f.corpus, cfg.corpus_path);
        take(f.trees, cfg.trees_path);
        take(f.stoplist_dir, cfg.stoplist_dir);
        take(f.sets, cfg.sets_path);
        take(f.ledger, cfg.ledger_path);
        take(f.experts_dir, cfg.experts_dir);
        take(f.panel_manifest, cfg.panel_path);
        take(f.seed, cfg.seed);
        take(f.workers, cfg.workers);
        take(f.per_class, cfg.synth_per_class);
        take(f.unlabeled, cfg.synth_unlabeled);
        take(f.rho, cfg.synth_rho);
        take(f.vocab_size, cfg.synth_vocab);
        take(f.len_min, cfg.synth_len_min);
        take(f.len_max, cfg.synth_len_max);
        take(f.authors, cfg.synth_authors);
        if (f.with_trees) cfg.synth_with_trees = true;
        take(f.tree_count, cfg.synth_tree_count);
        take(f.prep_stop, cfg.prep_stop);
        take(f.prep_out, cfg.prep_out);
        take(f.k, cfg.k_sets);
        take(f.train_per_class, cfg.train_per_class);
        take(f.test_per_class, cfg.test_per_class);
        if (opt_algorithms->count() > 0) cfg.grid_algorithms = f.algorithms;
        if (opt_dims->count() > 0) cfg.grid_dims = f.dims;
        if (opt_windows->count() > 0) cfg.grid_windows = f.windows;
        if (opt_epochs->count() > 0) cfg.grid_epochs = f.epochs;
        if (opt_schemes->count() > 0) cfg.grid_schemes = f.schemes;
        if (opt_stops->count() > 0) cfg.grid_stops = f.stops;
        if (opt_lambdas->count() > 0) cfg.lambdas = f.lambdas;
        take(f.min_count, cfg.min_count);
        take(f.negative, cfg.negative);
        take(f.lr_initial, cfg.lr_initial);
        take(f.lr_min, cfg.lr_min);
        take(f.subsample, cfg.subsample);
        if (f.train_word_vectors) cfg.train_word_vectors = true;
        take(f.infer_steps, cfg.infer_steps);
        if (f.use_intercept) cfg.use_intercept = true;
        take(f.top_k, cfg.top_k);
        take(f.panel_gamma, cfg.panel_gamma);
        if (opt_gammas->count() > 0) cfg.gammas = f.gammas;
        take(f.eval_per_class, cfg.eval_per_class);
        take(f.judgments, cfg.judgments_path);
        take(f.bin_width, cfg.bin_width);
        if (f.trees_gamma.has_value()) cfg.trees_gamma = f.trees_gamma;
        take(f.score_threshold, cfg.score_threshold);
        take(f.min_each, cfg.min_each);
        if (f.subtree) cfg.subtree = true;
        if (cfg.workers == 0) {
            hcs::fail(hcs::ErrorCode::Config, "workers must be >= 1");
        }

        if (synth->parsed()) cmd_synth(cfg);
        if (prep->parsed()) cmd_prep(cfg);
        if (sets->parsed()) cmd_sets(cfg);
        if (sweep->parsed()) cmd_sweep(cfg);
        if (panel->parsed()) cmd_panel(cfg);
        if (eval->parsed()) cmd_eval(cfg);
        if (trees->parsed()) cmd_trees(cfg);
        if (pipeline->parsed()) cmd_pipeline(cfg, f.fresh);
        return 0;
    } catch (const hcs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
