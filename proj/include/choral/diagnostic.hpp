#pragma once

#include <optional>
#include <string>
#include <vector>

#include "choral/source.hpp"

namespace choral {

enum class DiagCode {
  SyntaxError,
  TypeMismatch,
  RoleAliasing,
  CyclicInheritance,
  IllegalOverload,
  RoleSetMismatch,
  MergeFailure,
  UnknownName,
  BadSelectionAnnotation,
  KindError,
  AmbiguousCall,
  NoApplicableMethod,
  BadGuard,
  DuplicateDeclaration,
  MissingImplementation,
  BadTestShape,
  UnusedRole,
};

enum class Severity { Error, Warning };

const char *codeName(DiagCode c);

struct Diagnostic {
  DiagCode code = DiagCode::SyntaxError;
  Severity severity = Severity::Error;
  Span span;
  std::string message;
  std::optional<std::pair<std::string, std::string>> expectingFound;
  std::string role;    // set for projection failures
  std::string detail;  // extra rendered text, e.g. the irreconcilable fragments

  int line() const { return span.line(); }
};

// Box rendering: location, source excerpt, caret line, then "Code: message".
std::string renderBox(const Diagnostic &d);
std::string renderJson(const Diagnostic &d);

class DiagnosticSink {
 public:
  void report(Diagnostic d) { diags_.push_back(std::move(d)); }
  void error(DiagCode c, const Span &s, std::string msg) {
    report(Diagnostic{c, Severity::Error, s, std::move(msg), std::nullopt, "", ""});
  }
  void warning(DiagCode c, const Span &s, std::string msg) {
    report(Diagnostic{c, Severity::Warning, s, std::move(msg), std::nullopt, "", ""});
  }
  bool hasErrors() const;
  size_t errorCount() const;
  const std::vector<Diagnostic> &all() const { return diags_; }
  std::vector<Diagnostic> take() { return std::move(diags_); }
  void append(const std::vector<Diagnostic> &ds) { diags_.insert(diags_.end(), ds.begin(), ds.end()); }

 private:
  std::vector<Diagnostic> diags_;
};

}  // namespace choral
