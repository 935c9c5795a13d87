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

// Exhaustive enumeration over all K^n tag paths, used to check the dynamic
// programs in crf.hpp. Only the shape checks are shared with them.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crfner/crf.hpp"

namespace crfner::crf {

inline constexpr std::uint64_t kOracleMaxPaths = 1'000'000;

template <typename Scalar>
struct OracleResult {
  Scalar log_partition;
  TagPath best_path;
  Scalar best_score;
  std::uint64_t paths_enumerated;
};

// Visits every path in lexicographic order (y_1 most significant).
template <typename Fn>
void for_each_path(Eigen::Index n, Eigen::Index k, Fn&& fn) {
  TagPath y(static_cast<std::size_t>(n), 0);
  while (true) {
    fn(static_cast<const TagPath&>(y));
    Eigen::Index i = n - 1;
    while (i >= 0 && y[static_cast<std::size_t>(i)] == k - 1) {
      y[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) return;
    ++y[static_cast<std::size_t>(i)];
  }
}

// Throws std::length_error when K^n exceeds kOracleMaxPaths. The best path is
// the lexicographically first among maximal ones.
template <typename DerivedA, typename DerivedP>
OracleResult<typename DerivedP::Scalar> brute_force_oracle(const Eigen::MatrixBase<DerivedA>& A,
                                                           const Eigen::MatrixBase<DerivedP>& P) {
  using Scalar = typename DerivedP::Scalar;
  check_shapes(A, P);
  const auto n = P.rows();
  const auto k = P.cols();
  std::uint64_t total = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    total *= static_cast<std::uint64_t>(k);
    if (total > kOracleMaxPaths) throw std::length_error("brute_force_oracle: instance too large");
  }

  std::vector<Scalar> scores;
  scores.reserve(total);
  OracleResult<Scalar> out{0, {}, -std::numeric_limits<Scalar>::infinity(), 0};
  const auto start = start_state(k);
  const auto end = end_state(k);
  for_each_path(n, k, [&](const TagPath& y) {
    Scalar s = A(start, y[0]);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int cur = y[static_cast<std::size_t>(i)];
      const int next = i + 1 < n ? y[static_cast<std::size_t>(i + 1)] : static_cast<int>(end);
      s += P(i, cur) + A(cur, next);
    }
    scores.push_back(s);
    if (s > out.best_score) {
      out.best_score = s;
      out.best_path = y;
    }
  });
  Scalar sum = 0;
  for (Scalar s : scores) sum += std::exp(s - out.best_score);
  out.log_partition = out.best_score + std::log(sum);
  out.paths_enumerated = scores.size();
  return out;
}

}  // namespace crfner::crf
