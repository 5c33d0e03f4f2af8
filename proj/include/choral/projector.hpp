#pragma once

#include <optional>
#include <string>
#include <vector>

#include "choral/ast.hpp"
#include "choral/checker.hpp"
#include "choral/diagnostic.hpp"

namespace choral {

struct ProjectOptions {
  bool annotate = false;  // add @Projected(choreography, role) to each unit
  std::string onlyRole;   // empty projects every role
  // when set, receives the normalised branches of every merge the projector attempts
  std::vector<std::vector<StmP>> *mergeLog = nullptr;
};

// Unit normalisation.
bool isNoop(const ExpP &e);
ExpP normalizeExp(const ExpP &e);
StmP normalizeStm(const StmP &s);

// The first pair of statements that could not be reconciled.
struct MergeConflict {
  StmP left, right;
};

// Partial merge of two normalised statement sequences. nullopt on failure.
std::optional<StmP> merge(const StmP &a, const StmP &b, MergeConflict *conflict = nullptr);
std::optional<ExpP> mergeExp(const ExpP &a, const ExpP &b);

// One local unit for role of a checked declaration.
LocalDecl projectDecl(const CheckedProgram &cp, const Decl &d, const std::string &role, DiagnosticSink &diags,
                      const ProjectOptions &opts = {});

// Every (user declaration, role) pair. Single-role declarations yield one unit.
LocalProgram projectProgram(const CheckedProgram &cp, DiagnosticSink &diags, const ProjectOptions &opts = {});

// Local units as a program, for printing and local execution.
Program asProgram(const LocalProgram &lp);

}  // namespace choral
