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

#include "capcheck/agreement.hpp"

#include <numeric>

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

std::string side_key(std::string_view comparison_id, Side side) {
  return std::string(comparison_id) + (side == Side::kA ? ":A" : ":B");
}

}  // namespace

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::kInformativeness: return "informativeness";
    case Criterion::kAccuracy: return "accuracy";
    case Criterion::kFewerHallucinations: return "fewer_hallucinations";
    case Criterion::kOverall: return "overall";
  }
  return "overall";
}

std::optional<Criterion> parse_criterion(std::string_view s) {
  for (Criterion c : {Criterion::kInformativeness, Criterion::kAccuracy,
                      Criterion::kFewerHallucinations, Criterion::kOverall}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::kA: return "A";
    case Winner::kB: return "B";
    case Winner::kTie: return "tie";
  }
  return "tie";
}

std::vector<PairJudgment> parse_judgments(std::string_view text) {
  std::vector<PairJudgment> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError(where + "malformed JSON");
    }
    try {
      PairJudgment pj;
      pj.comparison_id = j.at("comparison_id").get<std::string>();
      const auto crit = j.at("criterion").get<std::string>();
      auto c = parse_criterion(crit);
      if (!c) throw ValidationError(where + "unknown criterion \"" + crit + "\"");
      pj.criterion = *c;
      for (const auto& v : j.at("votes")) {
        const auto s = v.get<std::string>();
        if (s == "A") {
          pj.votes.push_back(Side::kA);
        } else if (s == "B") {
          pj.votes.push_back(Side::kB);
        } else {
          throw ValidationError(where + "vote must be \"A\" or \"B\", got \"" + s + "\"");
        }
      }
      if (pj.votes.empty()) throw ValidationError(where + "votes must not be empty");
      pj.sample_id = j.value("sample_id", std::string());
      out.push_back(std::move(pj));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
    if (end == text.size()) break;
  }
  return out;
}

std::vector<PairJudgment> load_judgments(const fs::path& path) {
  return parse_judgments(read_file(path));
}

double ScoreFile::score(std::string_view comparison_id, Side side) const {
  auto it = scores.find(side_key(comparison_id, side));
  if (it == scores.end()) {
    throw DataError("metric '" + metric_id + "' has no score for comparison '" +
                    std::string(comparison_id) + "' side " + (side == Side::kA ? "A" : "B"));
  }
  return it->second;
}

ScoreFile parse_score_file(const nlohmann::json& j) {
  try {
    return {j.at("metric_id").get<std::string>(),
            j.at("scores").get<std::map<std::string, double>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("score file: ") + e.what());
  }
}

ScoreFile load_score_file(const fs::path& path) {
  try {
    return parse_score_file(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Winner majority_winner(const PairJudgment& judgment) {
  std::size_t a = 0;
  for (Side s : judgment.votes) a += s == Side::kA;
  const std::size_t b = judgment.votes.size() - a;
  if (a > b) return Winner::kA;
  if (b > a) return Winner::kB;
  return Winner::kTie;
}

AgreementResult agreement_rate(const std::vector<PairJudgment>& judgments,
                               const ScoreFile& scores, Criterion criterion) {
  AgreementResult r;
  for (const auto& j : judgments) {
    if (j.criterion != criterion) continue;
    // Both sides must exist even when the humans tied.
    const double a = scores.score(j.comparison_id, Side::kA);
    const double b = scores.score(j.comparison_id, Side::kB);
    const Winner w = majority_winner(j);
    if (w == Winner::kTie) {
      ++r.human_ties;
      continue;
    }
    ++r.n_used;
    if (a == b) {
      ++r.metric_ties;
    } else if ((w == Winner::kA) == (a > b)) {
      ++r.agreements;
    }
  }
  if (r.n_used > 0) {
    r.rate = static_cast<double>(r.agreements) / static_cast<double>(r.n_used);
    r.tie_fraction = static_cast<double>(r.metric_ties) / static_cast<double>(r.n_used);
  }
  return r;
}

double gwet_ac1(const std::vector<std::vector<int>>& counts) {
  if (counts.empty()) throw DataError("gwet_ac1: no items");
  const std::size_t k = counts.front().size();
  if (k < 2) throw DataError("gwet_ac1: at least two categories are required");
  const int raters = std::accumulate(counts.front().begin(), counts.front().end(), 0);
  if (raters < 2) throw DataError("gwet_ac1: at least two raters are required");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& row = counts[i];
    if (row.size() != k) {
      throw DataError("gwet_ac1: item " + std::to_string(i) + " has " +
                      std::to_string(row.size()) + " categories, expected " +
                      std::to_string(k));
    }
    int total = 0;
    for (int c : row) {
      if (c < 0) throw DataError("gwet_ac1: negative vote count");
      total += c;
    }
    if (total != raters) {
      throw DataError("gwet_ac1: item " + std::to_string(i) + " has " +
                      std::to_string(total) + " ratings, expected " + std::to_string(raters));
    }
  }

  const double n = static_cast<double>(counts.size());
  const double r = raters;
  double pa = 0;
  std::vector<double> pi(k, 0.0);
  for (const auto& row : counts) {
    double agree = 0;
    for (std::size_t c = 0; c < k; ++c) {
      agree += static_cast<double>(row[c]) * (row[c] - 1);
      pi[c] += row[c] / r;
    }
    pa += agree / (r * (r - 1));
  }
  pa /= n;
  double pe = 0;
  for (double& p : pi) {
    p /= n;
    pe += p * (1 - p);
  }
  pe /= static_cast<double>(k - 1);
  // pe <= (1 - 1/K) / (K - 1) = 1/K < 1, so the denominator never vanishes.
  return (pa - pe) / (1 - pe);
}

}  // namespace capcheck
