// Copyright 2026 The capcheck Authors. All Rights Reserved.
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

#ifndef CAPCHECK_SCORE_HPP_
#define CAPCHECK_SCORE_HPP_

#include <cstddef>

#include "json.hpp"

namespace capcheck {

struct ScoreTriple {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t n = 0;

  friend bool operator==(const ScoreTriple&, const ScoreTriple&) = default;
};

// Zero denominators give 0 rather than NaN: no predictions => P = 0, no
// references => R = 0, P + R = 0 => F1 = 0.
inline ScoreTriple score_from_counts(std::size_t matched, std::size_t predicted,
                                     std::size_t reference, std::size_t n) {
  ScoreTriple s;
  s.n = n;
  s.precision = predicted ? static_cast<double>(matched) / predicted : 0.0;
  s.recall = reference ? static_cast<double>(matched) / reference : 0.0;
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

inline nlohmann::json to_json(const ScoreTriple& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"n", s.n}};
}

inline ScoreTriple score_triple_from_json(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),
          j.at("f1").get<double>(), j.at("n").get<std::size_t>()};
}

}  // namespace capcheck

#endif  // CAPCHECK_SCORE_HPP_
