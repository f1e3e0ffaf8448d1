#include "rnav/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rnav::harness {

namespace {

bool numeric(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789.-+e") == std::string::npos;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string Table::render() const {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) out << "  ";
      out << (numeric(cell) ? pad + cell : cell + (c + 1 < width.size() ? pad : ""));
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (const std::size_t w : width) total += w;
  out << std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') << '\n';
  for (const auto& row : rows) line(row);
  return out.str();
}

std::vector<std::string> metric_header() { return {"episodes", "NE", "SR", "OSR", "SPL", "ONE", "fail-rb", "rb/step"}; }

std::vector<std::string> metric_cells(const eval::MetricSummary& m) {
  return {std::to_string(m.episodes), fixed(m.ne, 2),  fixed(m.sr, 3),
          fixed(m.osr, 3),            fixed(m.spl, 3), fixed(m.one, 2),
          fixed(m.rollback.failures_with_rollback, 3), fixed(m.rollback.rollbacks_per_step, 3)};
}

void write_text(const std::filesystem::path& path, const std::string& text) { open_out(path) << text; }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { open_out(path) << j.dump(2) << '\n'; }

void write_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& records) {
  auto out = open_out(path);
  for (const auto& r : records) out << r.dump() << '\n';
}

}  // namespace rnav::harness
