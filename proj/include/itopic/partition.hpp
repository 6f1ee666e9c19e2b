#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "itopic/error.hpp"
#include "itopic/io.hpp"

namespace itopic {

inline constexpr int kOutlier = -1;

/// Assignment of every document id in a universe to one label; -1 marks outliers.
struct Partition {
  std::vector<std::string> ids;
  std::vector<int> labels;

  std::size_t size() const noexcept { return ids.size(); }

  /// Number of non-outlier labels.
  std::size_t topic_count() const {
    int hi = -1;
    for (int l : labels) hi = std::max(hi, l);
    return static_cast<std::size_t>(hi + 1);
  }

  std::size_t outlier_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kOutlier));
  }

  /// Distinct groups including the outlier group when it is nonempty.
  std::size_t group_count() const { return topic_count() + (outlier_count() > 0 ? 1 : 0); }

  std::vector<std::string> members(int label) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (labels[i] == label) out.push_back(ids[i]);
    return out;
  }

  std::unordered_map<std::string, int> as_map() const {
    std::unordered_map<std::string, int> m;
    m.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], labels[i]);
    return m;
  }

  /// Throws unless ids are unique, labels are >= -1 and the topic labels are 0..T-1 with no gaps.
  void validate() const {
    if (ids.size() != labels.size()) throw Error(ErrorKind::InvalidArgument, "ids and labels differ in length");
    std::unordered_set<std::string_view> seen;
    for (const auto& id : ids)
      if (!seen.insert(id).second) throw Error(ErrorKind::DuplicateId, id);
    const std::size_t t = topic_count();
    std::vector<bool> used(t, false);
    for (int l : labels) {
      if (l < kOutlier) throw Error(ErrorKind::InvalidArgument, "label below -1");
      if (l >= 0) used[static_cast<std::size_t>(l)] = true;
    }
    if (std::find(used.begin(), used.end(), false) != used.end())
      throw Error(ErrorKind::InvalidArgument, "topic labels are not contiguous");
  }
};

/// Renumbers topic labels 0..T-1 by decreasing size, ties broken by the smallest member id.
/// The outlier label is left alone.
inline Partition relabel_by_size(Partition p) {
  std::map<int, std::pair<std::size_t, std::string>> stats;  // label -> (size, min id)
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.labels[i] == kOutlier) continue;
    auto [it, fresh] = stats.try_emplace(p.labels[i], 0, p.ids[i]);
    ++it->second.first;
    if (p.ids[i] < it->second.second) it->second.second = p.ids[i];
  }
  std::vector<int> order;
  for (const auto& [label, _] : stats) order.push_back(label);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& sa = stats.at(a);
    const auto& sb = stats.at(b);
    if (sa.first != sb.first) return sa.first > sb.first;
    return sa.second < sb.second;
  });
  std::unordered_map<int, int> remap;
  for (std::size_t i = 0; i < order.size(); ++i) remap.emplace(order[i], static_cast<int>(i));
  for (int& l : p.labels)
    if (l != kOutlier) l = remap.at(l);
  return p;
}

inline std::string partition_csv(const Partition& p) {
  std::string out = "id,label\n";
  for (std::size_t i = 0; i < p.size(); ++i) out += io::csv_escape(p.ids[i]) + "," + std::to_string(p.labels[i]) + "\n";
  return out;
}

inline Partition parse_partition_csv(std::string_view data) {
  const auto rows = io::parse_csv(data);
  if (rows.empty() || rows.front().fields.size() != 2 || rows.front().fields[0] != "id" ||
      rows.front().fields[1] != "label")
    throw Error(ErrorKind::ParseError, "line 1: header must be id,label");
  Partition p;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "line " + std::to_string(row.line);
    if (row.fields.size() != 2) throw Error(ErrorKind::ParseError, where + ": expected 2 fields");
    const auto& f = row.fields[1];
    int label = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
    if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty() || label < kOutlier)
      throw Error(ErrorKind::ParseError, where + ": bad label '" + f + "'");
    if (row.fields[0].empty()) throw Error(ErrorKind::ParseError, where + ": empty id");
    if (!seen.insert(row.fields[0]).second) throw Error(ErrorKind::DuplicateId, row.fields[0]);
    p.ids.push_back(row.fields[0]);
    p.labels.push_back(label);
  }
  return p;
}

}  // namespace itopic
