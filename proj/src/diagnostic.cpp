#include "choral/diagnostic.hpp"

#include <sstream>

#include "json.hpp"

namespace choral {

const char *codeName(DiagCode c) {
  switch (c) {
    case DiagCode::SyntaxError: return "SyntaxError";
    case DiagCode::TypeMismatch: return "TypeMismatch";
    case DiagCode::RoleAliasing: return "RoleAliasing";
    case DiagCode::CyclicInheritance: return "CyclicInheritance";
    case DiagCode::IllegalOverload: return "IllegalOverload";
    case DiagCode::RoleSetMismatch: return "RoleSetMismatch";
    case DiagCode::MergeFailure: return "MergeFailure";
    case DiagCode::UnknownName: return "UnknownName";
    case DiagCode::BadSelectionAnnotation: return "BadSelectionAnnotation";
    case DiagCode::KindError: return "KindError";
    case DiagCode::AmbiguousCall: return "AmbiguousCall";
    case DiagCode::NoApplicableMethod: return "NoApplicableMethod";
    case DiagCode::BadGuard: return "BadGuard";
    case DiagCode::DuplicateDeclaration: return "DuplicateDeclaration";
    case DiagCode::MissingImplementation: return "MissingImplementation";
    case DiagCode::BadTestShape: return "BadTestShape";
    case DiagCode::UnusedRole: return "UnusedRole";
  }
  return "Unknown";
}

bool DiagnosticSink::hasErrors() const { return errorCount() > 0; }

size_t DiagnosticSink::errorCount() const {
  size_t n = 0;
  for (auto &d : diags_)
    if (d.severity == Severity::Error) ++n;
  return n;
}

std::string renderBox(const Diagnostic &d) {
  std::ostringstream out;
  const char *sev = d.severity == Severity::Error ? "error" : "warning";
  if (d.span.valid()) {
    auto [line, col] = d.span.file->lineCol(d.span.start);
    out << d.span.file->name() << ":" << line << ":" << col << ": " << sev << "\n";
    std::string text = d.span.file->lineText(line);
    out << text << "\n";
    std::string caret;
    for (int i = 1; i < col; ++i) caret += '-';
    out << caret << "^\n";
  } else {
    out << "<unknown>: " << sev << "\n";
  }
  out << codeName(d.code) << ": " << d.message << "\n";
  if (!d.detail.empty()) out << d.detail;
  if (!d.detail.empty() && d.detail.back() != '\n') out << "\n";
  return out.str();
}

std::string renderJson(const Diagnostic &d) {
  nlohmann::json j;
  j["code"] = codeName(d.code);
  j["severity"] = d.severity == Severity::Error ? "error" : "warning";
  j["message"] = d.message;
  if (d.span.valid()) {
    auto [line, col] = d.span.file->lineCol(d.span.start);
    j["file"] = d.span.file->name();
    j["line"] = line;
    j["column"] = col;
    j["start"] = d.span.start;
    j["end"] = d.span.end;
  }
  if (d.expectingFound) {
    j["expecting"] = d.expectingFound->first;
    j["found"] = d.expectingFound->second;
  }
  if (!d.role.empty()) j["role"] = d.role;
  return j.dump();
}

}  // namespace choral
