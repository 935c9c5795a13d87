// Copyright 2026 The crfner Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Linear-chain CRF over K tags with explicit start and end states.
//
// The transition matrix A is (K+2) x (K+2): rows/cols 0..K-1 are tags, K is
// the start state and K+1 the end state. The emission matrix P is n x K. A
// path y_1..y_n scores
//
//   A(start, y_1) + sum_{i<n} A(y_i, y_{i+1}) + A(y_n, end) + sum_i P(i, y_i).
//
// Transitions into start and out of end are never read, so those entries need
// no masking. Everything is computed in log space.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfner::crf {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using TagPath = std::vector<int>;

inline Eigen::Index start_state(Eigen::Index num_tags) { return num_tags; }
inline Eigen::Index end_state(Eigen::Index num_tags) { return num_tags + 1; }

template <typename DerivedA, typename DerivedP>
void check_shapes(const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedP>& P) {
  const auto k = P.cols();
  if (P.rows() < 1 || k < 1) {
    throw std::invalid_argument("crf: emission matrix must be at least 1x1");
  }
  if (A.rows() != k + 2 || A.cols() != k + 2) {
    throw std::invalid_argument("crf: transition matrix is " + std::to_string(A.rows()) + "x" +
                                std::to_string(A.cols()) + ", expected " + std::to_string(k + 2) +
                                " square for " + std::to_string(k) + " tags");
  }
}

template <typename DerivedP>
void check_path(const Eigen::MatrixBase<DerivedP>& P, const TagPath& y) {
  if (static_cast<Eigen::Index>(y.size()) != P.rows()) {
    throw std::invalid_argument("crf: path length " + std::to_string(y.size()) +
                                " does not match " + std::to_string(P.rows()) + " emission rows");
  }
  for (int t : y) {
    if (t < 0 || t >= P.cols()) throw std::invalid_argument("crf: tag index out of range");
  }
}

// Stable log(sum(exp(v))). Returns -inf for an all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  if (m == -std::numeric_limits<Scalar>::infinity()) return m;
  return m + std::log((v.derived().array() - m).exp().sum());
}

template <typename DerivedA, typename DerivedP>
typename DerivedP::Scalar path_score(const Eigen::MatrixBase<DerivedA>& A,
                                     const Eigen::MatrixBase<DerivedP>& P, const TagPath& y) {
  check_shapes(A, P);
  check_path(P, y);
  const auto k = P.cols();
  typename DerivedP::Scalar s = A(start_state(k), y.front()) + A(y.back(), end_state(k));
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += P(static_cast<Eigen::Index>(i), y[i]);
    if (i + 1 < y.size()) s += A(y[i], y[i + 1]);
  }
  return s;
}

// alpha(i, t): log-sum of scores of all prefixes y_1..y_i with y_i = t,
// including the start transition and P(i, t).
template <typename DerivedA, typename DerivedP>
Matrix<typename DerivedP::Scalar> forward_scores(const Eigen::MatrixBase<DerivedA>& A,
                                                 const Eigen::MatrixBase<DerivedP>& P) {
  using Scalar = typename DerivedP::Scalar;
  check_shapes(A, P);
  const auto n = P.rows();
  const auto k = P.cols();
  const auto trans = A.topLeftCorner(k, k);
  Matrix<Scalar> alpha(n, k);
  alpha.row(0) = A.row(start_state(k)).head(k) + P.row(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index t = 0; t < k; ++t) {
      alpha(i, t) = log_sum_exp(alpha.row(i - 1).transpose() + trans.col(t)) + P(i, t);
    }
  }
  return alpha;
}

// beta(i, t): log-sum of scores of all suffixes y_{i+1}..y_n given y_i = t,
// including the end transition but not P(i, t).
template <typename DerivedA, typename DerivedP>
Matrix<typename DerivedP::Scalar> backward_scores(const Eigen::MatrixBase<DerivedA>& A,
                                                  const Eigen::MatrixBase<DerivedP>& P) {
  using Scalar = typename DerivedP::Scalar;
  check_shapes(A, P);
  const auto n = P.rows();
  const auto k = P.cols();
  const auto trans = A.topLeftCorner(k, k);
  Matrix<Scalar> beta(n, k);
  beta.row(n - 1) = A.col(end_state(k)).head(k).transpose();
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    const RowVector<Scalar> next = P.row(i + 1) + beta.row(i + 1);
    for (Eigen::Index t = 0; t < k; ++t) {
      beta(i, t) = log_sum_exp(trans.row(t) + next);
    }
  }
  return beta;
}

template <typename DerivedA, typename DerivedP>
typename DerivedP::Scalar log_partition(const Eigen::MatrixBase<DerivedA>& A,
                                        const Eigen::MatrixBase<DerivedP>& P) {
  const auto alpha = forward_scores(A, P);
  const auto k = P.cols();
  return log_sum_exp(alpha.row(P.rows() - 1) + A.col(end_state(k)).head(k).transpose());
}

// Same quantity as log_partition, via the backward recursion.
template <typename DerivedA, typename DerivedP>
typename DerivedP::Scalar log_partition_backward(const Eigen::MatrixBase<DerivedA>& A,
                                                 const Eigen::MatrixBase<DerivedP>& P) {
  const auto beta = backward_scores(A, P);
  const auto k = P.cols();
  return log_sum_exp(A.row(start_state(k)).head(k) + P.row(0) + beta.row(0));
}

// Posterior p(y_i = t | P) as an n x K matrix.
template <typename DerivedA, typename DerivedP>
Matrix<typename DerivedP::Scalar> marginals(const Eigen::MatrixBase<DerivedA>& A,
                                            const Eigen::MatrixBase<DerivedP>& P) {
  const auto alpha = forward_scores(A, P);
  const auto beta = backward_scores(A, P);
  const auto k = P.cols();
  const auto log_z =
      log_sum_exp(alpha.row(P.rows() - 1) + A.col(end_state(k)).head(k).transpose());
  return ((alpha + beta).array() - log_z).exp().matrix();
}

template <typename Scalar>
struct LogLikelihood {
  Scalar value;
  Matrix<Scalar> d_transitions;  // (K+2) x (K+2); unused entries are zero
  Matrix<Scalar> d_emissions;    // n x K
};

// log p(y | P) together with its gradient: empirical minus expected feature
// counts, the expectations coming from forward-backward marginals.
template <typename DerivedA, typename DerivedP>
LogLikelihood<typename DerivedP::Scalar> log_likelihood(const Eigen::MatrixBase<DerivedA>& A,
                                                        const Eigen::MatrixBase<DerivedP>& P,
                                                        const TagPath& y) {
  using Scalar = typename DerivedP::Scalar;
  check_shapes(A, P);
  check_path(P, y);
  const auto n = P.rows();
  const auto k = P.cols();
  const auto alpha = forward_scores(A, P);
  const auto beta = backward_scores(A, P);
  const Scalar log_z =
      log_sum_exp(alpha.row(n - 1) + A.col(end_state(k)).head(k).transpose());

  LogLikelihood<Scalar> out{path_score(A, P, y) - log_z, Matrix<Scalar>::Zero(k + 2, k + 2),
                            Matrix<Scalar>::Zero(n, k)};
  const Matrix<Scalar> unary = ((alpha + beta).array() - log_z).exp().matrix();

  out.d_emissions = -unary;
  out.d_transitions.row(start_state(k)).head(k) = -unary.row(0);
  out.d_transitions.col(end_state(k)).head(k) = -unary.row(n - 1).transpose();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    // pairwise(s, t) = p(y_i = s, y_{i+1} = t)
    const RowVector<Scalar> next = P.row(i + 1) + beta.row(i + 1);
    for (Eigen::Index s = 0; s < k; ++s) {
      for (Eigen::Index t = 0; t < k; ++t) {
        out.d_transitions(s, t) -= std::exp(alpha(i, s) + A(s, t) + next(t) - log_z);
      }
    }
  }

  out.d_transitions(start_state(k), y.front()) += 1;
  out.d_transitions(y.back(), end_state(k)) += 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.d_emissions(i, y[static_cast<std::size_t>(i)]) += 1;
    if (i + 1 < n) out.d_transitions(y[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i + 1)]) += 1;
  }
  return out;
}

template <typename Scalar>
struct ViterbiResult {
  TagPath path;
  Scalar score;
};

// Highest-scoring path. Every max is taken with a strict comparison, so the
// lowest tag index wins ties both in the recursion and at the final step.
template <typename DerivedA, typename DerivedP>
ViterbiResult<typename DerivedP::Scalar> viterbi_decode(const Eigen::MatrixBase<DerivedA>& A,
                                                        const Eigen::MatrixBase<DerivedP>& P) {
  using Scalar = typename DerivedP::Scalar;
  check_shapes(A, P);
  const auto n = P.rows();
  const auto k = P.cols();
  Matrix<Scalar> delta(n, k);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> back(n, k);
  delta.row(0) = A.row(start_state(k)).head(k) + P.row(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index t = 0; t < k; ++t) {
      Eigen::Index arg = 0;
      Scalar best = delta(i - 1, 0) + A(0, t);
      for (Eigen::Index s = 1; s < k; ++s) {
        const Scalar v = delta(i - 1, s) + A(s, t);
        if (v > best) {
          best = v;
          arg = s;
        }
      }
      delta(i, t) = best + P(i, t);
      back(i, t) = static_cast<int>(arg);
    }
  }
  Eigen::Index last = 0;
  Scalar best = delta(n - 1, 0) + A(0, end_state(k));
  for (Eigen::Index t = 1; t < k; ++t) {
    const Scalar v = delta(n - 1, t) + A(t, end_state(k));
    if (v > best) {
      best = v;
      last = t;
    }
  }
  ViterbiResult<Scalar> out{TagPath(static_cast<std::size_t>(n)), best};
  out.path.back() = static_cast<int>(last);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    out.path[static_cast<std::size_t>(i - 1)] = back(i, out.path[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Per-position argmax of P, lowest index on ties. The decoding rule of a
// head without transitions.
template <typename DerivedP>
TagPath argmax_decode(const Eigen::MatrixBase<DerivedP>& P) {
  TagPath path(static_cast<std::size_t>(P.rows()));
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    Eigen::Index arg = 0;
    for (Eigen::Index t = 1; t < P.cols(); ++t) {
      if (P(i, t) > P(i, arg)) arg = t;
    }
    path[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return path;
}

}  // namespace crfner::crf
