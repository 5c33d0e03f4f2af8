#pragma once

#include <optional>
#include <string>
#include <vector>

#include "choral/diagnostic.hpp"

namespace choral {

struct MetricsRow {
  std::string program;
  int choralLoc = 0;
  int roles = 0;
  int conditionals = 0;  // if and switch statements
  int localLoc = 0;      // summed over every projected unit
  long expansionPct = 0;
  double typecheckMs = 0;
  double projectionMs = 0;
};

struct MetricsOptions {
  int warmup = 50;
  int iterations = 200;
};

// Lines that are neither blank, comment-only nor import/package headers.
int countLoc(const std::string &text);
long expansionPercent(int choralLoc, int localLoc);

// nullopt when the file does not check or project; diagnostics go to diags.
std::optional<MetricsRow> collectRow(const std::string &path, const MetricsOptions &opts, DiagnosticSink &diags);
std::vector<MetricsRow> collectMetrics(const std::vector<std::string> &paths, const MetricsOptions &opts,
                                       DiagnosticSink &diags);

extern const char *const kMetricsHeader;
std::string metricsCsv(const std::vector<MetricsRow> &rows);

}  // namespace choral
