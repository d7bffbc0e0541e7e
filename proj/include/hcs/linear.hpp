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

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace hcs {

// Binary class labels; Hate is the positive class.
enum class ClassLabel { Hate, Counter };

struct LabeledMatrix {
    Eigen::MatrixXd X; // n x dim
    std::vector<ClassLabel> y;
    void validate() const;
};

// Numerically stable logistic function, exact at z = 0, saturating cleanly
// for |z| up to ~700.
double sigmoid(double z);

struct HypothesisFunction {
    Eigen::VectorXd theta;
    double intercept = 0.0;
    bool use_intercept = false;
    double lambda = 1.0;
    bool converged = false;
    std::size_t iterations = 0;
    double grad_norm = 0.0;
    double final_loss = 0.0;
};

// loss = sum_j softplus(-m_j) + (1/lambda) * 0.5 * ||theta||^2 where
// m_j = +theta.x for Hate rows and -theta.x for Counter rows. Small lambda
// means a strong penalty. grad is resized and filled.
double loss_and_grad(const Eigen::VectorXd& theta, const LabeledMatrix& data,
                     double lambda, Eigen::VectorXd& grad);

struct FitOptions {
    double tol = 1e-6;
    std::size_t max_iter = 1000;
    std::size_t history = 10;
    bool add_intercept = false;
};

// L-BFGS with Armijo backtracking. Non-convergence within max_iter is
// reported through HypothesisFunction::converged, not an error.
HypothesisFunction fit(const LabeledMatrix& data, double lambda, FitOptions opts = {});

double predict_proba(const HypothesisFunction& h, const Eigen::VectorXd& x);
double predict_proba(const HypothesisFunction& h, const std::vector<float>& x);

} // namespace hcs
