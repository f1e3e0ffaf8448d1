#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnav/eval/metrics.hpp"

namespace rnav::harness {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Columns padded to their widest cell; text left-aligned, numbers right-aligned.
  std::string render() const;
};

// Header and cells for NE, SR, OSR, SPL, ONE and the rollback statistics.
std::vector<std::string> metric_header();
std::vector<std::string> metric_cells(const eval::MetricSummary& m);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
// One compact JSON document per line.
void write_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

}  // namespace rnav::harness
