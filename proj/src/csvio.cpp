#include "qcluster/csvio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace qcluster {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

double parse_value(const std::string& field, std::size_t line_no, std::size_t col_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw input_error("line " + std::to_string(line_no) + ", column " + std::to_string(col_no) +
                      ": \"" + field + "\" is not a number");
  return value;
}

}  // namespace

QuestionnaireMatrix read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw input_error("CSV input is empty");
  auto header = split_line(line);
  if (header.size() < 2 || header[0] != "group")
    throw input_error("CSV header must be \"group,item_1,...\"; got \"" + line + "\"");

  QuestionnaireMatrix m;
  m.n_items = header.size() - 1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size())
      throw input_error("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    if (fields[0].empty())
      throw input_error("line " + std::to_string(line_no) + ": empty group label");
    m.group_labels.push_back(fields[0]);
    for (std::size_t c = 0; c < m.n_items; ++c) {
      const std::string& f = fields[c + 1];
      if (f.empty()) m.values.emplace_back(std::nullopt);
      else m.values.emplace_back(parse_value(f, line_no, c + 2));
    }
    ++m.n_rows;
  }
  if (m.n_rows == 0) throw input_error("CSV has a header but no data rows");
  return m;
}

QuestionnaireMatrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path + " for reading");
  return read_csv(in);
}

void write_csv(std::ostream& out, const QuestionnaireMatrix& matrix) {
  out << "group";
  for (std::size_t c = 1; c <= matrix.n_items; ++c) out << ",item_" << c;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    out << matrix.group_labels[r];
    for (std::size_t c = 0; c < matrix.n_items; ++c) {
      out << ',';
      const auto& v = matrix.at(r, c);
      if (!v) continue;
      if (*v == std::floor(*v) && std::abs(*v) < 1e15) {
        out << static_cast<long long>(*v);
      } else {
        std::snprintf(buf, sizeof buf, "%.12g", *v);
        out << buf;
      }
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const QuestionnaireMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open " + path + " for writing");
  write_csv(out, matrix);
  if (!out.flush()) throw input_error("write to " + path + " failed");
}

}  // namespace qcluster
