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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hcs/error.hpp"
#include "hcs/linear.hpp"
#include "hcs/random.hpp"
#include "helpers.hpp"

using hcs::ClassLabel;
using hcs::ErrorCode;
using hcs::FitOptions;
using hcs::LabeledMatrix;
using hcstest::error_code_of;

namespace {

LabeledMatrix random_data(std::size_t n, std::size_t dim, hcs::Rng& rng) {
    LabeledMatrix d;
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j)
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rng.uniform01() * 2.0 - 1.0;
        d.y[i] = rng.below(2) == 0 ? ClassLabel::Hate : ClassLabel::Counter;
    }
    return d;
}

double loss_only(const Eigen::VectorXd& theta, const LabeledMatrix& d, double lambda) {
    Eigen::VectorXd g;
    return hcs::loss_and_grad(theta, d, lambda, g);
}

// Worst relative error between the analytic gradient and central differences.
double fd_max_rel_error(const LabeledMatrix& d, double lambda,
                        const Eigen::VectorXd& theta) {
    Eigen::VectorXd g;
    hcs::loss_and_grad(theta, d, lambda, g);
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd t = theta;
        t(i) = theta(i) + h;
        const double up = loss_only(t, d, lambda);
        t(i) = theta(i) - h;
        const double dn = loss_only(t, d, lambda);
        const double fd = (up - dn) / (2 * h);
        const double scale = std::max({1.0, std::abs(fd), std::abs(g(i))});
        worst = std::max(worst, std::abs(fd - g(i)) / scale);
    }
    return worst;
}

} // namespace

TEST_SUITE("linear") {

TEST_CASE("sigmoid matches its closed form") {
    CHECK(hcs::sigmoid(0.0) == 0.5);
    CHECK(hcs::sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    CHECK(hcs::sigmoid(700.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hcs::sigmoid(-700.0) == doctest::Approx(0.0).epsilon(1e-12));
    hcs::Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double z = rng.uniform01() * 40.0 - 20.0;
        CHECK(hcs::sigmoid(z) + hcs::sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("loss at zero weights is n ln 2") {
    hcs::Rng rng(2);
    const auto d = random_data(10, 4, rng);
    const Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
    const double loss = loss_only(theta, d, 1.0);
    CHECK(loss == doctest::Approx(10.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("regularization scales as 1/lambda") {
    hcs::Rng rng(3);
    const auto d = random_data(8, 3, rng);
    Eigen::VectorXd theta(3);
    theta << 0.7, -1.2, 0.4;
    const double lam = 0.5;
    const double l1 = loss_only(theta, d, lam);
    const double l2 = loss_only(theta, d, 2 * lam);
    const double reg_lam = 0.5 * theta.squaredNorm() / lam;
    CHECK(l1 - l2 == doctest::Approx(reg_lam / 2.0).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches finite differences") {
    hcs::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.below(30);
        const std::size_t dim = 2 + rng.below(6);
        const auto d = random_data(n, dim, rng);
        Eigen::VectorXd theta(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < theta.size(); ++i)
            theta(i) = rng.uniform01() * 4.0 - 2.0;
        const double lambda = std::exp(rng.uniform01() * 4.0 - 2.0);
        CHECK(fd_max_rel_error(d, lambda, theta) <= 1e-6);
    }
}

TEST_CASE("separable one-dimensional fit matches a grid oracle") {
    LabeledMatrix d;
    d.X.resize(2, 1);
    d.X << 1.0, -1.0;
    d.y = {ClassLabel::Hate, ClassLabel::Counter};
    const double lambda = 1.0;
    const auto h = hcs::fit(d, lambda);
    REQUIRE(h.converged);
    CHECK(h.theta(0) > 0.0);

    double best_theta = 0.0, best_loss = 1e300;
    for (double t = -10.0; t <= 10.0; t += 2e-4) {
        Eigen::VectorXd theta(1);
        theta << t;
        const double l = loss_only(theta, d, lambda);
        if (l < best_loss) {
            best_loss = l;
            best_theta = t;
        }
    }
    CHECK(std::abs(h.theta(0) - best_theta) <= 1e-3);
    CHECK(hcs::predict_proba(h, Eigen::VectorXd::Constant(1, 1.0)) > 0.5);
    CHECK(hcs::predict_proba(h, Eigen::VectorXd::Constant(1, -1.0)) < 0.5);
}

TEST_CASE("contradictory labels drive weights to zero") {
    LabeledMatrix d;
    d.X.resize(2, 1);
    d.X << 1.0, 1.0;
    d.y = {ClassLabel::Hate, ClassLabel::Counter};
    const auto h = hcs::fit(d, 1.0);
    REQUIRE(h.converged);
    CHECK(std::abs(h.theta(0)) < 1e-5);
}

TEST_CASE("stronger penalties shrink the solution") {
    hcs::Rng rng(6);
    LabeledMatrix d;
    d.X.resize(20, 2);
    d.y.resize(20);
    for (int i = 0; i < 20; ++i) {
        const bool hate = i % 2 == 0;
        d.X(i, 0) = (hate ? 1.0 : -1.0) + (rng.uniform01() - 0.5) * 0.2;
        d.X(i, 1) = rng.uniform01() - 0.5;
        d.y[static_cast<std::size_t>(i)] = hate ? ClassLabel::Hate : ClassLabel::Counter;
    }
    const auto strong = hcs::fit(d, 0.01); // small lambda, strong penalty
    const auto weak = hcs::fit(d, 100.0);
    CHECK(strong.theta.norm() < weak.theta.norm());
}

TEST_CASE("objective is convex along random chords") {
    hcs::Rng rng(7);
    const auto d = random_data(15, 3, rng);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd a(3), b(3);
        for (int i = 0; i < 3; ++i) {
            a(i) = rng.uniform01() * 6.0 - 3.0;
            b(i) = rng.uniform01() * 6.0 - 3.0;
        }
        const double lambda = std::exp(rng.uniform01() * 4.0 - 2.0);
        const double mid = loss_only((a + b) / 2.0, d, lambda);
        const double chord = (loss_only(a, d, lambda) + loss_only(b, d, lambda)) / 2.0;
        CHECK(mid <= chord + 1e-9);
    }
}

TEST_CASE("row order does not change the solution") {
    hcs::Rng rng(8);
    const auto d = random_data(30, 3, rng);
    LabeledMatrix shuffled;
    std::vector<std::size_t> order(30);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 29; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    shuffled.X.resize(30, 3);
    shuffled.y.resize(30);
    for (std::size_t i = 0; i < 30; ++i) {
        shuffled.X.row(static_cast<Eigen::Index>(i)) =
            d.X.row(static_cast<Eigen::Index>(order[i]));
        shuffled.y[i] = d.y[order[i]];
    }
    const auto h1 = hcs::fit(d, 1.0);
    const auto h2 = hcs::fit(shuffled, 1.0);
    REQUIRE(h1.converged);
    REQUIRE(h2.converged);
    CHECK((h1.theta - h2.theta).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("predict_proba is consistent across input types") {
    hcs::HypothesisFunction h;
    h.theta = Eigen::VectorXd::Zero(3);
    h.theta(0) = 1.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    x(0) = 1.0;
    CHECK(hcs::predict_proba(h, x) ==
          doctest::Approx(0.7310585786300049).epsilon(1e-12));
    const std::vector<float> xf = {1.0f, 0.0f, 0.0f};
    CHECK(hcs::predict_proba(h, xf) == hcs::predict_proba(h, x));
    CHECK(hcs::predict_proba(h, Eigen::VectorXd::Zero(3)) == 0.5);
    CHECK(error_code_of([&] {
              hcs::predict_proba(h, Eigen::VectorXd::Zero(2));
          }) == ErrorCode::Shape);
}

TEST_CASE("probabilities of opposite inputs sum to one") {
    hcs::Rng rng(9);
    hcs::HypothesisFunction h;
    h.theta = Eigen::VectorXd(3);
    h.theta << 0.3, -1.1, 2.0;
    for (int i = 0; i < 50; ++i) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x(j) = rng.uniform01() * 4.0 - 2.0;
        CHECK(hcs::predict_proba(h, x) + hcs::predict_proba(h, -x) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("non-convergence is reported, not thrown") {
    hcs::Rng rng(10);
    const auto d = random_data(40, 5, rng);
    FitOptions opts;
    opts.max_iter = 1;
    const auto h = hcs::fit(d, 1.0, opts);
    CHECK(!h.converged);
    CHECK(h.iterations <= 1);
}

TEST_CASE("an intercept separates shifted data") {
    LabeledMatrix d;
    d.X.resize(40, 1);
    d.y.resize(40);
    for (int i = 0; i < 40; ++i) {
        const bool hate = i % 2 == 0;
        d.X(i, 0) = hate ? 2.0 : 1.0;
        d.y[static_cast<std::size_t>(i)] = hate ? ClassLabel::Hate : ClassLabel::Counter;
    }
    FitOptions opts;
    opts.add_intercept = true;
    const auto h = hcs::fit(d, 50.0, opts);
    REQUIRE(h.converged);
    CHECK(h.use_intercept);
    CHECK(h.intercept < 0.0);
    CHECK(hcs::predict_proba(h, Eigen::VectorXd::Constant(1, 2.0)) > 0.5);
    CHECK(hcs::predict_proba(h, Eigen::VectorXd::Constant(1, 1.0)) < 0.5);

    const auto flat = hcs::fit(d, 50.0);
    const double p2 = hcs::predict_proba(flat, Eigen::VectorXd::Constant(1, 2.0));
    const double p1 = hcs::predict_proba(flat, Eigen::VectorXd::Constant(1, 1.0));
    CHECK(((p1 > 0.5) == (p2 > 0.5)));
}

TEST_CASE("shape and configuration errors are rejected") {
    LabeledMatrix d;
    d.X.resize(2, 2);
    d.X.setZero();
    d.y = {ClassLabel::Hate};
    CHECK(error_code_of([&] { d.validate(); }) == ErrorCode::Shape);
    d.y = {ClassLabel::Hate, ClassLabel::Counter};
    CHECK(error_code_of([&] { hcs::fit(d, 0.0); }) == ErrorCode::Config);
    LabeledMatrix empty;
    empty.X.resize(0, 3);
    CHECK(error_code_of([&] { hcs::fit(empty, 1.0); }) == ErrorCode::Config);
}

} // TEST_SUITE
