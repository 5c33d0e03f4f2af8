#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "choral/ast.hpp"
#include "choral/checker.hpp"
#include "choral/runtime.hpp"

namespace choral {

enum class RunStatus { Ok, DeadlockTimeout, Error };
const char *statusName(RunStatus s);

struct RoleOutcome {
  std::string ret = "unit";  // canonical return value as seen by the role
  std::vector<std::string> transcript;
  std::string error;
};

struct ExecutionReport {
  RunStatus status = RunStatus::Ok;
  std::string message;
  std::map<std::string, RoleOutcome> roles;
  double ms = 0;
};

// Entry point and inputs of one execution.
//   entry: class name; method: method name; roles: optional, defaults to the class roles
//   ctorArgs / args: arrays of argument specs. A spec is a JSON literal (arrays become
//   lists), {"channel": "key"}, {"new": "Class", "args": [...]} or {"enum": "E", "case": "C"}.
nlohmann::json reportJson(const ExecutionReport &r);

struct Manifest {
  std::string entry;
  std::string method;
  std::vector<std::string> roles;
  nlohmann::json ctorArgs = nlohmann::json::array();
  nlohmann::json args = nlohmann::json::array();  // ctorArgs are used when method is not static

  static Manifest fromJson(const nlohmann::json &j);
  static Manifest load(const std::string &path);
  nlohmann::json toJson() const;
};

struct RunOptions {
  double deadlineSeconds = 10;
};

// Canonical rendering of a value as seen by role; objects of several roles show the
// generated class for that role and only the fields located there.
std::string viewAt(const ValueP &v, const std::string &role);

// Runs the choreography directly, one program with per-role bindings.
ExecutionReport evalGlobal(const CheckedProgram &cp, const Manifest &m, const RunOptions &opts = {});

// One worker thread per role, each running its projected unit.
ExecutionReport evalDistributed(const CheckedProgram &cp, const LocalProgram &lp, const Manifest &m,
                                const RunOptions &opts = {});

struct DiffReport {
  bool equal = false;
  std::string diff;
  ExecutionReport global;
  ExecutionReport distributed;
};

// Global run, projection, distributed run, then per-role comparison.
DiffReport differentialRun(const CheckedProgram &cp, const Manifest &m, const RunOptions &opts = {});
DiffReport compareReports(const ExecutionReport &g, const ExecutionReport &d);

}  // namespace choral
