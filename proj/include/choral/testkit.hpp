#pragma once

#include <string>
#include <vector>

#include "choral/checker.hpp"
#include "choral/diagnostic.hpp"
#include "choral/interpreter.hpp"

namespace choral {

// A @Test method: static, void, no parameters.
struct TestCase {
  std::string cls;
  std::string method;
  std::vector<std::string> roles;
  std::vector<std::string> units;  // generated class per role, same order as roles
  Span span;
  std::string name() const { return cls + "." + method; }
};

// Malformed @Test methods are reported as BadTestShape and skipped.
std::vector<TestCase> discoverTests(const CheckedProgram &cp, DiagnosticSink &diags);

struct TestResult {
  std::string name;
  bool passed = false;
  std::string message;
  size_t workers = 0;
  double ms = 0;
};

struct TestRunReport {
  std::vector<TestResult> results;
  size_t passed = 0;
  size_t failed = 0;
};

// Each case runs its projected units in parallel with a fresh channel registry.
TestRunReport runTests(const CheckedProgram &cp, const LocalProgram &lp, const std::vector<TestCase> &cases,
                       const RunOptions &opts = {});

}  // namespace choral
