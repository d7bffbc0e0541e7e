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

#include <atomic>
#include <cmath>

#include "hcs/error.hpp"
#include "pv_internal.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hcs {

namespace detail {

PvCorpus convert_docs(const std::vector<Doc>& docs, const Vocab& vocab) {
    PvCorpus pc;
    pc.docs.reserve(docs.size());
    for (const auto& d : docs) {
        if (d.tags.empty()) fail(ErrorCode::Config, "document without tags");
        PvDoc pd;
        pd.words.reserve(d.tokens.size());
        for (const auto& tok : d.tokens) {
            const std::int64_t idx = vocab.index_of(tok);
            if (idx >= 0) pd.words.push_back(static_cast<std::uint32_t>(idx));
        }
        if (pd.words.empty()) {
            ++pc.skipped;
            continue;
        }
        pd.tag_rows.reserve(d.tags.size());
        for (const auto& tag : d.tags) {
            auto [it, inserted] =
                pc.tag_rows.emplace(tag, static_cast<std::uint32_t>(pc.tag_names.size()));
            if (inserted) pc.tag_names.push_back(tag);
            pd.tag_rows.push_back(it->second);
        }
        pc.positions += pd.words.size();
        pc.docs.push_back(std::move(pd));
    }
    return pc;
}

void position_events(const PvDoc& doc, std::size_t pos, const EmbedConfig& cfg,
                     const NegativeSampler& sampler, Rng& rng,
                     std::vector<PvEvent>& out) {
    const std::uint32_t target = doc.words[pos];
    const auto draw_rounds = [&](PvEvent& ev) {
        ev.out_rows.push_back(target);
        ev.labels.push_back(1);
        for (std::size_t n = 0; n < cfg.negative; ++n) {
            const std::uint32_t neg = sampler.sample(rng);
            if (neg == target) continue; // draw consumed, round skipped
            ev.out_rows.push_back(neg);
            ev.labels.push_back(0);
        }
    };
    const auto window_range = [&](std::size_t& lo, std::size_t& hi) {
        const std::size_t shrink = static_cast<std::size_t>(rng.below(cfg.window));
        const std::size_t w = cfg.window - shrink;
        lo = pos >= w ? pos - w : 0;
        hi = std::min(doc.words.size() - 1, pos + w);
    };

    if (cfg.algorithm == PvAlgorithm::DBOW) {
        for (const std::uint32_t tag : doc.tag_rows) {
            PvEvent ev;
            ev.doc_rows.push_back(tag);
            draw_rounds(ev);
            out.push_back(std::move(ev));
        }
        if (cfg.train_word_vectors) {
            std::size_t lo, hi;
            window_range(lo, hi);
            for (std::size_t c = lo; c <= hi; ++c) {
                if (c == pos) continue;
                PvEvent ev;
                ev.word_rows.push_back(doc.words[c]);
                draw_rounds(ev);
                out.push_back(std::move(ev));
            }
        }
    } else {
        std::size_t lo, hi;
        window_range(lo, hi);
        PvEvent ev;
        ev.doc_rows = doc.tag_rows;
        for (std::size_t c = lo; c <= hi; ++c)
            if (c != pos) ev.word_rows.push_back(doc.words[c]);
        draw_rounds(ev);
        out.push_back(std::move(ev));
    }
}

void init_uniform(std::vector<float>& m, std::size_t dim, Rng& rng) {
    const float inv = 1.0f / static_cast<float>(dim);
    for (auto& x : m) x = (rng.uniform01f() - 0.5f) * inv;
}

} // namespace detail

using detail::PvCorpus;
using detail::PvDoc;
using detail::PvEvent;
using detail::PvScratch;

struct PvTrainer {
    static void check_finite(const EmbeddingModel& m, std::size_t epoch) {
        const auto scan = [&](const std::vector<float>& v, const char* name) {
            for (const float x : v)
                if (!std::isfinite(x))
                    fail(ErrorCode::Numeric, std::string("non-finite value in ") + name +
                                                 " after epoch " + std::to_string(epoch));
        };
        scan(m.word_in_, "word_in");
        scan(m.word_out_, "word_out");
        scan(m.doc_vectors_, "doc_vectors");
    }

    static std::vector<double> keep_probs(const Vocab& vocab, double subsample) {
        std::vector<double> keep;
        if (subsample <= 0) return keep;
        keep.resize(vocab.size());
        const double st = subsample * static_cast<double>(vocab.total_tokens());
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            const double f = static_cast<double>(vocab.entries()[i].freq);
            keep[i] = (std::sqrt(f / st) + 1.0) * st / f;
        }
        return keep;
    }

    // Shared inner loop: runs one document's positions at tick base u0.
    struct Worker {
        const EmbedConfig* cfg;
        float* doc_mat;
        float* win;
        float* wout;
        const NegativeSampler* sampler;
        const std::vector<double>* keep;
        std::uint64_t total;
        Rng rng{0};
        PvScratch<float> scratch;
        std::vector<PvEvent> events;
        PvDoc work;
        std::vector<std::uint64_t> ticks;

        void run_doc(const PvDoc& doc, std::uint64_t u0) {
            const PvDoc* active = &doc;
            const bool subsampling = !keep->empty();
            if (subsampling) {
                work.tag_rows = doc.tag_rows;
                work.words.clear();
                ticks.clear();
                for (std::size_t p = 0; p < doc.words.size(); ++p)
                    if (rng.uniform01() < (*keep)[doc.words[p]]) {
                        work.words.push_back(doc.words[p]);
                        ticks.push_back(u0 + p);
                    }
                active = &work;
            }
            for (std::size_t pos = 0; pos < active->words.size(); ++pos) {
                const std::uint64_t tick = subsampling ? ticks[pos] : u0 + pos;
                const auto lr = static_cast<float>(
                    detail::lr_at(cfg->lr_initial, cfg->lr_min, tick, total));
                events.clear();
                detail::position_events(*active, pos, *cfg, *sampler, rng, events);
                for (const auto& ev : events)
                    detail::event_step<float>(ev, lr, doc_mat, win, wout, cfg->dim,
                                              scratch);
            }
        }
    };

    static Worker make_worker(EmbeddingModel& m, const std::vector<double>& keep,
                              std::uint64_t total) {
        Worker w;
        w.cfg = &m.config_;
        w.doc_mat = m.doc_vectors_.data();
        w.win = m.word_in_.data();
        w.wout = m.word_out_.data();
        w.sampler = m.sampler_.get();
        w.keep = &keep;
        w.total = total;
        return w;
    }

    static void train_serial(EmbeddingModel& m, const PvCorpus& pc,
                             const std::vector<double>& keep, std::uint64_t total) {
        const EmbedConfig& cfg = m.config_;
        Worker w = make_worker(m, keep, total);
        w.rng = Rng(derive_seed(cfg.seed, 0));
        std::uint64_t u = 0;
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (const auto& doc : pc.docs) {
                w.run_doc(doc, u);
                u += doc.words.size();
            }
            check_finite(m, epoch);
        }
    }

    // Race-tolerant sharded training: threads update the shared matrices
    // without synchronization. Tick ranges are handed out per document.
    static void train_parallel(EmbeddingModel& m, const PvCorpus& pc,
                               const std::vector<double>& keep, std::uint64_t total) {
        const EmbedConfig& cfg = m.config_;
#ifdef _OPENMP
        std::atomic<std::uint64_t> ticker{0};
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
#pragma omp parallel num_threads(static_cast<int>(cfg.workers))
            {
                Worker w = make_worker(m, keep, total);
                const auto tid = static_cast<std::uint64_t>(omp_get_thread_num());
                w.rng = Rng(derive_seed(cfg.seed,
                                        0x1000 + epoch * cfg.workers + tid));
#pragma omp for schedule(static)
                for (std::int64_t di = 0; di < static_cast<std::int64_t>(pc.docs.size()); ++di) {
                    const PvDoc& doc = pc.docs[static_cast<std::size_t>(di)];
                    const std::uint64_t u0 = ticker.fetch_add(
                        doc.words.size(), std::memory_order_relaxed);
                    w.run_doc(doc, u0);
                }
            }
            check_finite(m, epoch);
        }
#else
        train_serial(m, pc, keep, total);
#endif
    }

    static EmbeddingModel run(const std::vector<Doc>& docs, const EmbedConfig& config,
                              TrainStats* stats) {
        config.validate();
        if (docs.empty()) fail(ErrorCode::Config, "no documents to train on");

        std::vector<TokenSeq> token_docs;
        token_docs.reserve(docs.size());
        for (const auto& d : docs) token_docs.push_back(d.tokens);
        Vocab vocab = Vocab::build(token_docs, config.min_count);
        PvCorpus pc = detail::convert_docs(docs, vocab);
        if (pc.docs.empty())
            fail(ErrorCode::Config, "every document lost all tokens to vocabulary pruning");

        EmbeddingModel m;
        m.config_ = config;
        m.vocab_ = std::move(vocab);
        m.tag_names_ = std::move(pc.tag_names);
        m.tag_rows_ = std::move(pc.tag_rows);
        const std::size_t dim = config.dim;
        m.word_in_.resize(m.vocab_.size() * dim);
        m.word_out_.assign(m.vocab_.size() * dim, 0.0f);
        m.doc_vectors_.resize(m.tag_names_.size() * dim);
        {
            Rng r(derive_seed(config.seed, 1));
            detail::init_uniform(m.word_in_, dim, r);
        }
        {
            Rng r(derive_seed(config.seed, 2));
            detail::init_uniform(m.doc_vectors_, dim, r);
        }
        m.sampler_ = std::make_shared<NegativeSampler>(m.vocab_, config.table_size);

        const std::uint64_t total = static_cast<std::uint64_t>(config.epochs) * pc.positions;
        if (stats) {
            stats->skipped_docs = pc.skipped;
            stats->total_updates = total;
        }
        const auto keep = keep_probs(m.vocab_, config.subsample);
        if (config.workers == 1)
            train_serial(m, pc, keep, total);
        else
            train_parallel(m, pc, keep, total);
        return m;
    }
};

EmbeddingModel EmbeddingModel::train(const std::vector<Doc>& docs,
                                     const EmbedConfig& config, TrainStats* stats) {
    return PvTrainer::run(docs, config, stats);
}

GradCheckResult gradient_check(const std::vector<Doc>& docs, const EmbedConfig& config,
                               std::uint64_t seed, bool saturate) {
    EmbedConfig cfg = config;
    cfg.validate();
    if (cfg.dim > 8) fail(ErrorCode::Config, "gradient check expects dim <= 8");

    std::vector<TokenSeq> token_docs;
    for (const auto& d : docs) token_docs.push_back(d.tokens);
    Vocab vocab = Vocab::build(token_docs, cfg.min_count);
    if (vocab.size() > 20) fail(ErrorCode::Config, "gradient check expects vocab <= 20 tokens");
    PvCorpus pc = detail::convert_docs(docs, vocab);
    NegativeSampler sampler(vocab, cfg.table_size);

    const std::size_t V = vocab.size();
    const std::size_t T = pc.tag_names.size();
    const std::size_t dim = cfg.dim;
    std::vector<double> D(T * dim, 0.0), WI(V * dim, 0.0), WO(V * dim, 0.0);

    if (saturate) {
        // Doc d gets sign (+,-,+,...); each token takes the sign of the first
        // doc containing it. With disjoint per-doc vocabularies every event
        // score lands at ±40, deep in the sigmoid's flat regions.
        const double c = std::sqrt(40.0);
        std::vector<double> tok_sign(V, 0.0);
        for (std::size_t d = 0; d < pc.docs.size(); ++d) {
            const double s = (d % 2 == 0) ? 1.0 : -1.0;
            for (const std::uint32_t tr : pc.docs[d].tag_rows) D[std::size_t{tr} * dim] = s * c;
            for (const std::uint32_t w : pc.docs[d].words)
                if (tok_sign[w] == 0.0) tok_sign[w] = s;
        }
        for (std::size_t w = 0; w < V; ++w) {
            WI[w * dim] = tok_sign[w] * c;
            WO[w * dim] = tok_sign[w] * c;
        }
    } else {
        Rng r(derive_seed(seed, 1));
        const double inv = 1.0 / static_cast<double>(dim);
        for (auto& x : D) x = (r.uniform01() - 0.5) * inv;
        for (auto& x : WI) x = (r.uniform01() - 0.5) * inv;
        for (auto& x : WO) x = (r.uniform01() - 0.5) * inv;
    }

    // One epoch of events, frozen for both evaluations.
    Rng rng(derive_seed(seed, 0));
    std::vector<PvEvent> events;
    for (const auto& doc : pc.docs)
        for (std::size_t pos = 0; pos < doc.words.size(); ++pos)
            detail::position_events(doc, pos, cfg, sampler, rng, events);

    std::vector<double> GD(D.size(), 0.0), GWI(WI.size(), 0.0), GWO(WO.size(), 0.0);
    for (const auto& ev : events)
        detail::event_grad<double>(ev, D.data(), WI.data(), WO.data(), dim, GD.data(),
                                   GWI.data(), GWO.data());
    double gnorm2 = 0.0;
    for (const auto* g : {&GD, &GWI, &GWO})
        for (const double x : *g) gnorm2 += x * x;

    const auto loss_all = [&]() {
        double L = 0.0;
        for (const auto& ev : events)
            L += detail::event_loss<double>(ev, D.data(), WI.data(), WO.data(), dim);
        return L;
    };

    const double h = 1e-5;
    double max_rel = 0.0;
    const auto check_block = [&](std::vector<double>& P, const std::vector<double>& G) {
        for (std::size_t i = 0; i < P.size(); ++i) {
            const double orig = P[i];
            P[i] = orig + h;
            const double lp = loss_all();
            P[i] = orig - h;
            const double lm = loss_all();
            P[i] = orig;
            const double num = (lp - lm) / (2.0 * h);
            const double denom = std::max({std::abs(G[i]), std::abs(num), 1e-6});
            max_rel = std::max(max_rel, std::abs(G[i] - num) / denom);
        }
    };
    check_block(D, GD);
    check_block(WI, GWI);
    check_block(WO, GWO);
    return {max_rel, std::sqrt(gnorm2)};
}

} // namespace hcs
