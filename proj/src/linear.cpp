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

#include "hcs/linear.hpp"

#include <cmath>
#include <deque>

#include "hcs/error.hpp"

namespace hcs {

namespace {

double softplus(double z) {
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

// Core objective over an already-augmented matrix. Only the first reg_dims
// coordinates are penalized, which keeps an optional intercept unregularized.
double loss_grad_impl(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& signs, double lambda,
                      Eigen::Index reg_dims, Eigen::VectorXd& grad) {
    const Eigen::VectorXd z = X * theta;
    Eigen::VectorXd w(z.size());
    double loss = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (!std::isfinite(z[j]))
            fail(ErrorCode::Numeric,
                 "non-finite feature or margin at row " + std::to_string(j));
        const double m = signs[j] * z[j];
        loss += softplus(-m);
        w[j] = -signs[j] * sigmoid(-m);
    }
    grad = X.transpose() * w;
    loss += 0.5 / lambda * theta.head(reg_dims).squaredNorm();
    grad.head(reg_dims) += theta.head(reg_dims) / lambda;
    return loss;
}

Eigen::VectorXd label_signs(const std::vector<ClassLabel>& y) {
    Eigen::VectorXd signs(static_cast<Eigen::Index>(y.size()));
    for (std::size_t j = 0; j < y.size(); ++j)
        signs[static_cast<Eigen::Index>(j)] = y[j] == ClassLabel::Hate ? 1.0 : -1.0;
    return signs;
}

} // namespace

void LabeledMatrix::validate() const {
    if (X.rows() == 0) fail(ErrorCode::Config, "empty training data");
    if (X.cols() == 0) fail(ErrorCode::Config, "zero-dimensional features");
    if (X.rows() != static_cast<Eigen::Index>(y.size()))
        fail(ErrorCode::Shape, "feature rows (" + std::to_string(X.rows()) +
                                   ") do not match label count (" +
                                   std::to_string(y.size()) + ")");
}

double sigmoid(double z) {
    if (z >= 0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double loss_and_grad(const Eigen::VectorXd& theta, const LabeledMatrix& data,
                     double lambda, Eigen::VectorXd& grad) {
    data.validate();
    if (!(lambda > 0)) fail(ErrorCode::Config, "lambda must be positive");
    if (theta.size() != data.X.cols())
        fail(ErrorCode::Shape, "theta dimension does not match features");
    return loss_grad_impl(theta, data.X, label_signs(data.y), lambda, theta.size(),
                          grad);
}

HypothesisFunction fit(const LabeledMatrix& data, double lambda, FitOptions opts) {
    data.validate();
    if (!(lambda > 0)) fail(ErrorCode::Config, "lambda must be positive");
    if (opts.history < 1) fail(ErrorCode::Config, "history must be >= 1");

    const Eigen::Index dim = data.X.cols();
    Eigen::MatrixXd X;
    if (opts.add_intercept) {
        X.resize(data.X.rows(), dim + 1);
        X.leftCols(dim) = data.X;
        X.col(dim).setOnes();
    } else {
        X = data.X;
    }
    const Eigen::VectorXd signs = label_signs(data.y);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(X.cols());
    Eigen::VectorXd g;
    double l = loss_grad_impl(theta, X, signs, lambda, dim, g);

    std::deque<Eigen::VectorXd> S, Yv;
    std::deque<double> rho;
    constexpr double kArmijo = 1e-4;

    std::size_t iter = 0;
    bool converged = g.norm() <= opts.tol;
    while (!converged && iter < opts.max_iter) {
        Eigen::VectorXd d = -g;
        if (!S.empty()) {
            Eigen::VectorXd q = g;
            const std::size_t m = S.size();
            std::vector<double> alpha(m);
            for (std::size_t i = m; i-- > 0;) {
                alpha[i] = rho[i] * S[i].dot(q);
                q -= alpha[i] * Yv[i];
            }
            const double gamma = S.back().dot(Yv.back()) / Yv.back().dot(Yv.back());
            Eigen::VectorXd r = gamma * q;
            for (std::size_t i = 0; i < m; ++i) {
                const double beta = rho[i] * Yv[i].dot(r);
                r += (alpha[i] - beta) * S[i];
            }
            d = -r;
        }
        double gtd = g.dot(d);
        if (!(gtd < 0)) {
            d = -g;
            gtd = g.dot(d);
        }

        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd theta_new, g_new;
        double l_new = l;
        while (step > 1e-20) {
            theta_new = theta + step * d;
            l_new = loss_grad_impl(theta_new, X, signs, lambda, dim, g_new);
            if (l_new <= l + kArmijo * step * gtd) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // at numerical floor; report current state

        const Eigen::VectorXd s = theta_new - theta;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            S.push_back(s);
            Yv.push_back(yv);
            rho.push_back(1.0 / sy);
            if (S.size() > opts.history) {
                S.pop_front();
                Yv.pop_front();
                rho.pop_front();
            }
        }
        theta = std::move(theta_new);
        g = std::move(g_new);
        l = l_new;
        ++iter;
        converged = g.norm() <= opts.tol;
    }

    HypothesisFunction h;
    if (opts.add_intercept) {
        h.theta = theta.head(dim);
        h.intercept = theta[dim];
        h.use_intercept = true;
    } else {
        h.theta = theta;
    }
    h.lambda = lambda;
    h.converged = converged;
    h.iterations = iter;
    h.grad_norm = g.norm();
    h.final_loss = l;
    return h;
}

double predict_proba(const HypothesisFunction& h, const Eigen::VectorXd& x) {
    if (x.size() != h.theta.size())
        fail(ErrorCode::Shape, "feature dimension " + std::to_string(x.size()) +
                                   " does not match hypothesis dimension " +
                                   std::to_string(h.theta.size()));
    return sigmoid(h.theta.dot(x) + (h.use_intercept ? h.intercept : 0.0));
}

double predict_proba(const HypothesisFunction& h, const std::vector<float>& x) {
    Eigen::VectorXd xd(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        xd[static_cast<Eigen::Index>(i)] = static_cast<double>(x[i]);
    return predict_proba(h, xd);
}

} // namespace hcs
