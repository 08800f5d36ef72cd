#include "qcluster/core.hpp"

#include <unordered_map>

namespace qcluster {

bool QuestionnaireMatrix::complete() const {
  for (const auto& v : values) {
    if (!v.has_value()) return false;
  }
  return true;
}

std::vector<std::string> QuestionnaireMatrix::group_order() const {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& label : group_labels) {
    if (seen.emplace(label, order.size()).second) order.push_back(label);
  }
  return order;
}

std::vector<std::size_t> QuestionnaireMatrix::group_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(group_labels.size());
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& label : group_labels) {
    auto [it, inserted] = seen.emplace(label, seen.size());
    idx.push_back(it->second);
  }
  return idx;
}

std::vector<Violation> validate(const QuestionnaireMatrix& m) {
  std::vector<Violation> out;
  if (m.n_rows == 0) {
    out.push_back({"no-rows", {}, {}, "matrix has no rows; group label set is empty"});
  }
  if (m.scale_min >= m.scale_max) {
    out.push_back({"scale", {}, {},
                   "scale_min must be below scale_max (got " + std::to_string(m.scale_min) +
                       ".." + std::to_string(m.scale_max) + ")"});
  }
  if (m.values.size() != m.n_rows * m.n_items) {
    out.push_back({"shape", {}, {},
                   "value grid is not rectangular: expected " +
                       std::to_string(m.n_rows * m.n_items) + " cells, have " +
                       std::to_string(m.values.size())});
    return out;  // cell coordinates below would be meaningless
  }
  if (m.group_labels.size() != m.n_rows) {
    out.push_back({"shape", {}, {},
                   "expected one group label per row: " + std::to_string(m.group_labels.size()) +
                       " labels for " + std::to_string(m.n_rows) + " rows"});
    return out;
  }
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    if (m.group_labels[r].empty()) {
      out.push_back({"empty-label", r, {}, "row " + std::to_string(r) + " has an empty group label"});
    }
    for (std::size_t c = 0; c < m.n_items; ++c) {
      const auto& v = m.at(r, c);
      if (v && (*v < m.scale_min || *v > m.scale_max)) {
        out.push_back({"out-of-scale", r, c,
                       "value " + std::to_string(*v) + " at row " + std::to_string(r) +
                           ", item " + std::to_string(c) + " is outside [" +
                           std::to_string(m.scale_min) + ", " + std::to_string(m.scale_max) + "]"});
      }
    }
  }
  return out;
}

}  // namespace qcluster
