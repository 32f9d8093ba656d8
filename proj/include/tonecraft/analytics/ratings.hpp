#ifndef TONECRAFT_ANALYTICS_RATINGS_HPP
#define TONECRAFT_ANALYTICS_RATINGS_HPP

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tonecraft/analytics/tone_delta.hpp"
#include "tonecraft/corpus/io.hpp"
#include "tonecraft/corpus/threads.hpp"
#include "tonecraft/error.hpp"

namespace tonecraft::analytics {

struct RatingRecord {
  std::string item_id;
  std::string rater_id;
  std::string criterion;
  double value = 0.0;
};

/// Items x criteria table of mean ratings.
struct RatingMatrix {
  std::vector<std::string> items;
  std::vector<std::string> tones;
  Eigen::MatrixXd values;
};

inline std::vector<RatingRecord> read_ratings(std::istream& is) {
  std::vector<RatingRecord> out;
  corpus::for_each_jsonl(is, [&](const nlohmann::json& j) {
    RatingRecord r;
    r.item_id = corpus::detail::id_from_json(j.at("item_id"));
    r.rater_id = corpus::detail::id_from_json(j.at("rater_id"));
    r.criterion = j.at("criterion").get<std::string>();
    r.value = j.at("value").get<double>();
    out.push_back(std::move(r));
  });
  return out;
}

inline void check_rating_range(const std::vector<RatingRecord>& records, double lo, double hi) {
  for (const auto& r : records)
    if (!(r.value >= lo && r.value <= hi))
      throw InvalidArgument("rating " + std::to_string(r.value) + " for item '" + r.item_id + "' outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

/// Averages raters per (item, criterion). `tones` fixes column order; when
/// empty, all criteria are used in lexicographic order. Every item must have
/// at least one rating for every tone.
inline RatingMatrix mean_ratings(const std::vector<RatingRecord>& records, std::vector<std::string> tones = {}) {
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> acc;
  std::set<std::string> seen;
  for (const auto& r : records) {
    auto& cell = acc[r.item_id][r.criterion];
    cell.first += r.value;
    ++cell.second;
    seen.insert(r.criterion);
  }
  if (tones.empty()) tones.assign(seen.begin(), seen.end());
  RatingMatrix m;
  m.tones = tones;
  for (const auto& [item, _] : acc) m.items.push_back(item);
  std::sort(m.items.begin(), m.items.end(), corpus::detail::id_less);
  m.values.resize(static_cast<Eigen::Index>(m.items.size()), static_cast<Eigen::Index>(tones.size()));
  for (std::size_t i = 0; i < m.items.size(); ++i) {
    const auto& row = acc[m.items[i]];
    for (std::size_t j = 0; j < tones.size(); ++j) {
      auto it = row.find(tones[j]);
      if (it == row.end()) throw InvalidArgument("item '" + m.items[i] + "' has no rating for '" + tones[j] + "'");
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          it->second.first / static_cast<double>(it->second.second);
    }
  }
  return m;
}

/// Raters x items matrix of one criterion, for ICC. Must be complete.
inline Eigen::MatrixXd rater_matrix(const std::vector<RatingRecord>& records, const std::string& criterion) {
  std::map<std::string, std::map<std::string, double>> by_rater;
  std::set<std::string> items;
  for (const auto& r : records) {
    if (r.criterion != criterion) continue;
    by_rater[r.rater_id][r.item_id] = r.value;
    items.insert(r.item_id);
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(by_rater.size()), static_cast<Eigen::Index>(items.size()));
  Eigen::Index i = 0;
  for (const auto& [rater, row] : by_rater) {
    Eigen::Index j = 0;
    for (const auto& item : items) {
      auto it = row.find(item);
      if (it == row.end()) throw InvalidArgument("rater '" + rater + "' did not rate item '" + item + "'");
      out(i, j++) = it->second;
    }
    ++i;
  }
  return out;
}

/// Groups a rating matrix whose item ids read "<conversation>/<turn>" (turn 0
/// is the first user request, 1 the first agent response, ...) into rated
/// conversations.
inline std::vector<std::vector<RatedUtterance>> rated_conversations(const RatingMatrix& m) {
  std::map<std::string, std::map<std::size_t, std::size_t>> turns;
  for (std::size_t i = 0; i < m.items.size(); ++i) {
    const auto& id = m.items[i];
    const auto slash = id.rfind('/');
    if (slash == std::string::npos || slash + 1 == id.size() || !corpus::detail::all_digits(id.substr(slash + 1)))
      throw InvalidArgument("item id '" + id + "' is not of the form <conversation>/<turn>");
    turns[id.substr(0, slash)][std::stoul(id.substr(slash + 1))] = i;
  }
  std::vector<std::vector<RatedUtterance>> out;
  for (const auto& [conv, by_turn] : turns) {
    std::vector<RatedUtterance> utts;
    std::size_t expected = 0;
    for (const auto& [turn, row] : by_turn) {
      if (turn != expected++) throw InvalidArgument("conversation '" + conv + "' is missing turn " + std::to_string(expected - 1));
      RatedUtterance u;
      u.role = turn % 2 == 0 ? corpus::Role::user : corpus::Role::agent;
      const auto r = m.values.row(static_cast<Eigen::Index>(row));
      for (Eigen::Index j = 0; j < r.size(); ++j) u.tones.push_back(r(j));
      utts.push_back(std::move(u));
    }
    out.push_back(std::move(utts));
  }
  return out;
}

}  // namespace tonecraft::analytics

#endif  // TONECRAFT_ANALYTICS_RATINGS_HPP
