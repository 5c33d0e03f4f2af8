#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "choral/checker.hpp"
#include "choral/interpreter.hpp"
#include "choral/metrics.hpp"
#include "choral/printer.hpp"
#include "choral/projector.hpp"
#include "choral/testkit.hpp"

namespace fs = std::filesystem;
using namespace choral;
using json = nlohmann::json;

namespace {

bool jsonDiags = false;

void printDiags(const DiagnosticSink &d) {
  for (auto &x : d.all()) {
    if (jsonDiags)
      std::cout << renderJson(x) << "\n";
    else
      std::cerr << renderBox(x) << "\n";
  }
}

// nullopt after reporting when a file is missing or the program does not check
std::optional<CheckedProgram> load(const std::vector<std::string> &files, DiagnosticSink &diags) {
  std::vector<SourceRef> srcs;
  for (auto &f : files) {
    try {
      srcs.push_back(loadSource(f));
    } catch (const std::exception &e) {
      std::cerr << "choralc: " << e.what() << "\n";
      return std::nullopt;
    }
  }
  auto cp = checkFiles(srcs, diags);
  printDiags(diags);
  if (diags.hasErrors()) return std::nullopt;
  return cp;
}

int cmdCheck(const std::vector<std::string> &files) {
  DiagnosticSink diags;
  auto cp = load(files, diags);
  if (!cp) return 1;
  if (!jsonDiags) std::cerr << "ok: " << cp->userDecls().size() << " declaration(s)\n";
  return 0;
}

int cmdProject(const std::vector<std::string> &files, const std::string &out, const std::string &role, bool annotate,
               bool courtesy) {
  DiagnosticSink diags;
  auto cp = load(files, diags);
  if (!cp) return 1;
  DiagnosticSink pd;
  ProjectOptions po;
  po.annotate = annotate;
  po.onlyRole = role;
  auto lp = projectProgram(*cp, pd, po);
  printDiags(pd);
  if (pd.hasErrors()) return 1;
  PrintOptions pr;
  pr.courtesy = courtesy;
  json manifest = json::array();
  for (auto &u : lp.units) {
    fs::path dir = fs::path(out) / u.role;
    fs::create_directories(dir);
    fs::path file = dir / (u.generatedName + ".lchor");
    std::ofstream(file) << printDecl(*u.decl, pr);
    manifest.push_back({{"sourceChoreography", u.sourceChoreography},
                        {"role", u.role},
                        {"file", fs::relative(file, out).generic_string()},
                        {"generatedName", u.generatedName}});
  }
  fs::create_directories(out);
  std::ofstream(fs::path(out) / "manifest.json") << manifest.dump(2) << "\n";
  std::cerr << "wrote " << lp.units.size() << " unit(s) to " << out << "\n";
  return 0;
}

std::optional<Manifest> loadManifest(const std::string &path) {
  try {
    return Manifest::load(path);
  } catch (const std::exception &e) {
    std::cerr << "choralc: " << e.what() << "\n";
    return std::nullopt;
  }
}

int cmdOracle(const std::string &file, const std::string &manifest, double deadline) {
  DiagnosticSink diags;
  auto cp = load({file}, diags);
  if (!cp) return 1;
  auto m = loadManifest(manifest);
  if (!m) return 2;
  auto r = evalGlobal(*cp, *m, {deadline});
  std::cout << reportJson(r).dump(2) << "\n";
  return r.status == RunStatus::Ok ? 0 : 1;
}

int cmdRun(const std::string &file, const std::string &manifest, double deadline, bool compare) {
  DiagnosticSink diags;
  auto cp = load({file}, diags);
  if (!cp) return 1;
  auto m = loadManifest(manifest);
  if (!m) return 2;
  DiagnosticSink pd;
  auto lp = projectProgram(*cp, pd);
  printDiags(pd);
  if (pd.hasErrors()) return 1;
  auto r = evalDistributed(*cp, lp, *m, {deadline});
  json out = reportJson(r);
  int code = r.status == RunStatus::Ok ? 0 : 1;
  if (compare) {
    auto d = compareReports(evalGlobal(*cp, *m, {deadline}), r);
    out["compliant"] = d.equal;
    if (!d.equal) {
      out["diff"] = d.diff;
      code = 1;
    }
  }
  std::cout << out.dump(2) << "\n";
  return code;
}

int cmdTest(const std::vector<std::string> &files, double deadline) {
  DiagnosticSink diags;
  auto cp = load(files, diags);
  if (!cp) return 1;
  DiagnosticSink td;
  auto cases = discoverTests(*cp, td);
  printDiags(td);
  DiagnosticSink pd;
  auto lp = projectProgram(*cp, pd);
  printDiags(pd);
  if (pd.hasErrors()) return 1;
  auto rep = runTests(*cp, lp, cases, {deadline});
  for (auto &t : rep.results) {
    std::cerr << (t.passed ? "PASS " : "FAIL ") << t.name << " (" << t.workers << " workers, " << t.ms << " ms)";
    if (!t.passed) std::cerr << ": " << t.message;
    std::cerr << "\n";
    json rec{{"name", t.name}, {"status", t.passed ? "pass" : "fail"}, {"ms", t.ms}, {"workers", t.workers}};
    if (!t.passed) rec["message"] = t.message;
    std::cout << rec.dump() << "\n";
  }
  std::cerr << rep.passed << " passed, " << rep.failed << " failed\n";
  return rep.failed == 0 && !td.hasErrors() ? 0 : 1;
}

int cmdBench(const std::vector<std::string> &files, const std::string &csv, int warmup, int iterations) {
  DiagnosticSink diags;
  auto rows = collectMetrics(files, {warmup, iterations}, diags);
  printDiags(diags);
  auto text = metricsCsv(rows);
  if (csv == "-") {
    std::cout << text;
  } else {
    std::ofstream out(csv);
    if (!out) {
      std::cerr << "choralc: cannot write '" << csv << "'\n";
      return 1;
    }
    out << text;
    std::cerr << "wrote " << rows.size() << " row(s) to " << csv << "\n";
  }
  return diags.hasErrors() ? 1 : 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"choralc: check, project and run choreographies"};
  app.require_subcommand(1);
  app.add_flag("--json-diagnostics", jsonDiags, "print diagnostics as JSON lines on stdout");

  std::vector<std::string> files;
  std::string out, role, manifest, csv;
  bool annotate = false, courtesy = false, compare = false;
  double deadline = 10;
  int warmup = 50, iterations = 200;

  auto *check = app.add_subcommand("check", "type-check choreographies");
  check->add_option("files", files, "source files")->required()->check(CLI::ExistingFile);

  auto *project = app.add_subcommand("project", "write one local unit per role");
  project->add_option("files", files, "source files")->required()->check(CLI::ExistingFile);
  project->add_option("--out", out, "output directory")->required();
  project->add_option("--role", role, "only this role");
  project->add_flag("--annotate", annotate, "add @Projected annotations");
  project->add_flag("--courtesy", courtesy, "add zero-argument wrappers");

  auto *oracle = app.add_subcommand("oracle", "run the choreography directly");
  oracle->add_option("file", files, "source file")->required()->check(CLI::ExistingFile)->expected(1);
  oracle->add_option("--manifest", manifest, "execution manifest")->required()->check(CLI::ExistingFile);
  oracle->add_option("--deadline", deadline, "seconds");

  auto *run = app.add_subcommand("run", "run the projected units, one thread per role");
  run->add_option("file", files, "source file")->required()->check(CLI::ExistingFile)->expected(1);
  run->add_option("--manifest", manifest, "execution manifest")->required()->check(CLI::ExistingFile);
  run->add_option("--deadline", deadline, "seconds");
  run->add_flag("--compare", compare, "also run the oracle and compare");

  auto *test = app.add_subcommand("test", "run @Test methods");
  test->add_option("files", files, "source files")->required()->check(CLI::ExistingFile);
  test->add_option("--deadline", deadline, "seconds per case");

  auto *bench = app.add_subcommand("bench", "compiler metrics as CSV");
  bench->add_option("files", files, "source files")->required()->check(CLI::ExistingFile);
  bench->add_option("--csv", csv, "output file, - for stdout")->required();
  bench->add_option("--warmup", warmup, "warmup iterations")->check(CLI::NonNegativeNumber);
  bench->add_option("--iterations", iterations, "measured iterations")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*check) return cmdCheck(files);
    if (*project) return cmdProject(files, out, role, annotate, courtesy);
    if (*oracle) return cmdOracle(files.at(0), manifest, deadline);
    if (*run) return cmdRun(files.at(0), manifest, deadline, compare);
    if (*test) return cmdTest(files, deadline);
    if (*bench) return cmdBench(files, csv, warmup, iterations);
  } catch (const std::exception &e) {
    std::cerr << "choralc: internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
