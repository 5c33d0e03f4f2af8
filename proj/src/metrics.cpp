#include "choral/metrics.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "choral/checker.hpp"
#include "choral/printer.hpp"
#include "choral/projector.hpp"

namespace choral {

const char *const kMetricsHeader =
    "program,choral_loc,roles,conditionals,local_loc,expansion_pct,typecheck_ms,projection_ms";

int countLoc(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  bool inBlock = false;
  while (std::getline(in, line)) {
    size_t i = 0;
    bool code = false;
    while (i < line.size()) {
      if (inBlock) {
        auto end = line.find("*/", i);
        if (end == std::string::npos) {
          i = line.size();
          break;
        }
        inBlock = false;
        i = end + 2;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
        continue;
      }
      if (line.compare(i, 2, "//") == 0) break;
      if (line.compare(i, 2, "/*") == 0) {
        inBlock = true;
        i += 2;
        continue;
      }
      code = true;
      break;
    }
    if (!code) continue;
    auto first = line.find_first_not_of(" \t");
    if (line.compare(first, 7, "import ") == 0 || line.compare(first, 8, "package ") == 0) continue;
    ++n;
  }
  return n;
}

long expansionPercent(int choralLoc, int localLoc) {
  if (choralLoc <= 0) return 0;
  return std::lround(100.0 * (localLoc - choralLoc) / choralLoc);
}

namespace {

using Clock = std::chrono::steady_clock;

int conditionals(const Program &p) {
  int n = 0;
  auto count = [&](const StmP &s) {
    forEachStm(s, [&](const StmP &x) {
      if (x->kind == StmKind::If || x->kind == StmKind::Switch) ++n;
    });
  };
  for (auto &d : p.decls) {
    if (d->prelude) continue;
    for (auto &m : d->ctors) count(m->body);
    for (auto &m : d->methods) count(m->body);
  }
  return n;
}

template <class F>
double meanMs(const MetricsOptions &opts, F &&f) {
  for (int i = 0; i < opts.warmup; ++i) f();
  int n = std::max(1, opts.iterations);
  auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) f();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / n;
}

}  // namespace

std::optional<MetricsRow> collectRow(const std::string &path, const MetricsOptions &opts, DiagnosticSink &diags) {
  SourceRef src;
  try {
    src = loadSource(path);
  } catch (const std::exception &e) {
    diags.error(DiagCode::SyntaxError, Span{}, e.what());
    return std::nullopt;
  }
  DiagnosticSink local;
  auto cp = checkFiles({src}, local);
  if (local.hasErrors()) {
    diags.append(local.all());
    return std::nullopt;
  }
  auto lp = projectProgram(cp, local);
  if (local.hasErrors()) {
    diags.append(local.all());
    return std::nullopt;
  }
  MetricsRow r;
  r.program = std::filesystem::path(path).stem().string();
  r.choralLoc = countLoc(src->text());
  for (auto &d : cp.userDecls()) r.roles = std::max(r.roles, static_cast<int>(d->roles.size()));
  r.conditionals = conditionals(cp.program);
  for (auto &u : lp.units) r.localLoc += countLoc(printDecl(*u.decl));
  r.expansionPct = expansionPercent(r.choralLoc, r.localLoc);
  r.typecheckMs = meanMs(opts, [&] {
    DiagnosticSink s;
    auto again = checkFiles({src}, s);
  });
  r.projectionMs = meanMs(opts, [&] {
    DiagnosticSink s;
    auto again = projectProgram(cp, s);
  });
  return r;
}

std::vector<MetricsRow> collectMetrics(const std::vector<std::string> &paths, const MetricsOptions &opts,
                                       DiagnosticSink &diags) {
  std::vector<MetricsRow> rows;
  for (auto &p : paths)
    if (auto r = collectRow(p, opts, diags)) rows.push_back(*r);
  return rows;
}

std::string metricsCsv(const std::vector<MetricsRow> &rows) {
  std::ostringstream out;
  out << kMetricsHeader << "\n";
  out << std::fixed << std::setprecision(3);
  for (auto &r : rows)
    out << r.program << "," << r.choralLoc << "," << r.roles << "," << r.conditionals << "," << r.localLoc << ","
        << r.expansionPct << "," << r.typecheckMs << "," << r.projectionMs << "\n";
  return out.str();
}

}  // namespace choral
