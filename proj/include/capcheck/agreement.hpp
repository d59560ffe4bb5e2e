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

#ifndef CAPCHECK_AGREEMENT_HPP_
#define CAPCHECK_AGREEMENT_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capcheck/io.hpp"
#include "json.hpp"

namespace capcheck {

enum class Criterion { kInformativeness, kAccuracy, kFewerHallucinations, kOverall };
enum class Side { kA, kB };
enum class Winner { kA, kB, kTie };

std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view s);
std::string_view to_string(Winner w);

struct PairJudgment {
  std::string comparison_id;
  Criterion criterion = Criterion::kOverall;
  std::vector<Side> votes;
  std::string sample_id;
};

// Line-JSON {comparison_id, criterion, votes: ["A", "B", ...], sample_id}.
// Throws ParseError / ValidationError citing the line.
std::vector<PairJudgment> parse_judgments(std::string_view text);
std::vector<PairJudgment> load_judgments(const fs::path& path);

struct ScoreFile {
  std::string metric_id;
  std::map<std::string, double> scores;  // "<comparison_id>:A" -> score

  // Throws DataError naming the comparison when a side is missing.
  double score(std::string_view comparison_id, Side side) const;
};

// {"metric_id": "...", "scores": {"<id>:A": x, "<id>:B": y}}
ScoreFile parse_score_file(const nlohmann::json& j);
ScoreFile load_score_file(const fs::path& path);

// Strict majority of the votes; an even split (or no votes) is a tie.
Winner majority_winner(const PairJudgment& judgment);

struct AgreementResult {
  double rate = 0;          // agreements / n_used
  double tie_fraction = 0;  // metric ties / n_used
  std::size_t n_used = 0;   // judgments with a human winner
  std::size_t human_ties = 0;
  std::size_t agreements = 0;
  std::size_t metric_ties = 0;
};

// Only judgments of `criterion` are considered. Agreement requires the
// human winner's score to be strictly higher; equal scores count as
// disagreement and are reported in tie_fraction. Human ties are left out of
// n_used. With n_used = 0 the rates are 0.
AgreementResult agreement_rate(const std::vector<PairJudgment>& judgments,
                               const ScoreFile& scores, Criterion criterion);

// Vote counts per item: counts[i][k] = raters who put item i in category k.
// Throws DataError unless every item has the same rater total R >= 2 and
// K >= 2 categories.
double gwet_ac1(const std::vector<std::vector<int>>& counts);

}  // namespace capcheck

#endif  // CAPCHECK_AGREEMENT_HPP_
