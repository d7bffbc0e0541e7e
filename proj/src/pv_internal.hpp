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

// Shared machinery between the trainers, inference and the gradient check.
// Every parameter update in the module flows through event_step so the
// checked math and the production math are the same code.

#include <cmath>
#include <cstdint>
#include <vector>

#include "hcs/pv.hpp"
#include "hcs/random.hpp"

namespace hcs::detail {

// Document converted to matrix rows: tag rows and in-vocab word indices.
struct PvDoc {
    std::vector<std::uint32_t> tag_rows;
    std::vector<std::uint32_t> words;
};

struct PvCorpus {
    std::vector<PvDoc> docs;
    std::uint64_t positions = 0; // sum of in-vocab tokens over kept docs
    std::size_t skipped = 0;     // docs with zero in-vocab tokens
    std::vector<std::string> tag_names;
    std::unordered_map<std::string, std::uint32_t> tag_rows;
};

PvCorpus convert_docs(const std::vector<Doc>& docs, const Vocab& vocab);

// One negative-sampling SGD event. The input vector is the mean over the
// referenced doc rows and word rows; a single row means the full gradient
// reaches it. out_rows[0] is the positive target, the rest are negatives.
struct PvEvent {
    std::vector<std::uint32_t> doc_rows;
    std::vector<std::uint32_t> word_rows;
    std::vector<std::uint32_t> out_rows;
    std::vector<std::uint8_t> labels;

    void clear() {
        doc_rows.clear();
        word_rows.clear();
        out_rows.clear();
        labels.clear();
    }
};

// Appends the events for one document position. RNG consumption order is
// fixed: PV-DM draws the window shrink first, then negatives; PV-DBOW draws
// negatives per tag event, then (with train_word_vectors) the window shrink
// and per-context skip-gram negatives.
void position_events(const PvDoc& doc, std::size_t pos, const EmbedConfig& cfg,
                     const NegativeSampler& sampler, Rng& rng,
                     std::vector<PvEvent>& out);

template <typename Real>
inline Real sigmoid_r(Real z) {
    if (z >= Real(0)) {
        const Real e = std::exp(-z);
        return Real(1) / (Real(1) + e);
    }
    const Real e = std::exp(z);
    return e / (Real(1) + e);
}

// log(1 + e^z) without overflow.
template <typename Real>
inline Real softplus_r(Real z) {
    if (z > Real(0)) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

template <typename Real>
struct PvScratch {
    std::vector<Real> h; // input mean
    std::vector<Real> e; // accumulated input update
    std::vector<Real> g; // per-round step sizes
    void resize(std::size_t dim, std::size_t rounds) {
        h.assign(dim, Real(0));
        e.assign(dim, Real(0));
        g.assign(rounds, Real(0));
    }
};

template <typename Real>
inline Real dot_r(const Real* a, const Real* b, std::size_t dim) {
    Real s = 0;
    for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

// One simultaneous gradient-descent step on the event objective
//   L = sum_k [ labels[k] ? softplus(-f_k) : softplus(f_k) ],
// f_k = <h, wout[out_rows[k]]>, h = mean of referenced input rows.
// freeze_words leaves word_in/word_out untouched (inference).
template <typename Real>
void event_step(const PvEvent& ev, Real lr, Real* doc, Real* win, Real* wout,
                std::size_t dim, PvScratch<Real>& s, bool freeze_words = false) {
    const std::size_t cnt = ev.doc_rows.size() + ev.word_rows.size();
    const std::size_t rounds = ev.out_rows.size();
    s.resize(dim, rounds);
    Real* h = s.h.data();
    Real* e = s.e.data();

    for (const std::uint32_t r : ev.doc_rows) {
        const Real* row = doc + std::size_t{r} * dim;
        for (std::size_t i = 0; i < dim; ++i) h[i] += row[i];
    }
    for (const std::uint32_t r : ev.word_rows) {
        const Real* row = win + std::size_t{r} * dim;
        for (std::size_t i = 0; i < dim; ++i) h[i] += row[i];
    }
    const Real inv_cnt = Real(1) / static_cast<Real>(cnt);
    for (std::size_t i = 0; i < dim; ++i) h[i] *= inv_cnt;

    for (std::size_t k = 0; k < rounds; ++k) {
        const Real* o = wout + std::size_t{ev.out_rows[k]} * dim;
        const Real f = dot_r(h, o, dim);
        const Real gk = (static_cast<Real>(ev.labels[k]) - sigmoid_r(f)) * lr;
        s.g[k] = gk;
        for (std::size_t i = 0; i < dim; ++i) e[i] += gk * o[i];
    }
    if (!freeze_words) {
        for (std::size_t k = 0; k < rounds; ++k) {
            Real* o = wout + std::size_t{ev.out_rows[k]} * dim;
            const Real gk = s.g[k];
            for (std::size_t i = 0; i < dim; ++i) o[i] += gk * h[i];
        }
    }
    for (const std::uint32_t r : ev.doc_rows) {
        Real* row = doc + std::size_t{r} * dim;
        for (std::size_t i = 0; i < dim; ++i) row[i] += e[i] * inv_cnt;
    }
    if (!freeze_words) {
        for (const std::uint32_t r : ev.word_rows) {
            Real* row = win + std::size_t{r} * dim;
            for (std::size_t i = 0; i < dim; ++i) row[i] += e[i] * inv_cnt;
        }
    }
}

template <typename Real>
Real event_loss(const PvEvent& ev, const Real* doc, const Real* win,
                const Real* wout, std::size_t dim) {
    const std::size_t cnt = ev.doc_rows.size() + ev.word_rows.size();
    std::vector<Real> h(dim, Real(0));
    for (const std::uint32_t r : ev.doc_rows)
        for (std::size_t i = 0; i < dim; ++i) h[i] += doc[std::size_t{r} * dim + i];
    for (const std::uint32_t r : ev.word_rows)
        for (std::size_t i = 0; i < dim; ++i) h[i] += win[std::size_t{r} * dim + i];
    for (std::size_t i = 0; i < dim; ++i) h[i] /= static_cast<Real>(cnt);

    Real loss = 0;
    for (std::size_t k = 0; k < ev.out_rows.size(); ++k) {
        const Real f = dot_r(h.data(), wout + std::size_t{ev.out_rows[k]} * dim, dim);
        loss += ev.labels[k] ? softplus_r(-f) : softplus_r(f);
    }
    return loss;
}

// Accumulates dL/dparam for one event into dense gradient buffers.
template <typename Real>
void event_grad(const PvEvent& ev, const Real* doc, const Real* win,
                const Real* wout, std::size_t dim, Real* gdoc, Real* gwin,
                Real* gwout) {
    const std::size_t cnt = ev.doc_rows.size() + ev.word_rows.size();
    std::vector<Real> h(dim, Real(0));
    for (const std::uint32_t r : ev.doc_rows)
        for (std::size_t i = 0; i < dim; ++i) h[i] += doc[std::size_t{r} * dim + i];
    for (const std::uint32_t r : ev.word_rows)
        for (std::size_t i = 0; i < dim; ++i) h[i] += win[std::size_t{r} * dim + i];
    for (std::size_t i = 0; i < dim; ++i) h[i] /= static_cast<Real>(cnt);

    std::vector<Real> dh(dim, Real(0));
    for (std::size_t k = 0; k < ev.out_rows.size(); ++k) {
        const Real* o = wout + std::size_t{ev.out_rows[k]} * dim;
        const Real f = dot_r(h.data(), o, dim);
        const Real d = sigmoid_r(f) - static_cast<Real>(ev.labels[k]);
        for (std::size_t i = 0; i < dim; ++i) {
            dh[i] += d * o[i];
            gwout[std::size_t{ev.out_rows[k]} * dim + i] += d * h[i];
        }
    }
    for (const std::uint32_t r : ev.doc_rows)
        for (std::size_t i = 0; i < dim; ++i)
            gdoc[std::size_t{r} * dim + i] += dh[i] / static_cast<Real>(cnt);
    for (const std::uint32_t r : ev.word_rows)
        for (std::size_t i = 0; i < dim; ++i)
            gwin[std::size_t{r} * dim + i] += dh[i] / static_cast<Real>(cnt);
}

// Linear decay from lr_initial towards lr_min over total scheduled updates,
// clipped at lr_min.
inline double lr_at(double lr_initial, double lr_min, std::uint64_t u,
                    std::uint64_t total) {
    if (total == 0) return lr_initial;
    const double lr =
        lr_initial - (lr_initial - lr_min) * (static_cast<double>(u) /
                                              static_cast<double>(total));
    return lr < lr_min ? lr_min : lr;
}

// Uniform(-0.5/dim, +0.5/dim) init, one float per element.
void init_uniform(std::vector<float>& m, std::size_t dim, Rng& rng);

} // namespace hcs::detail
