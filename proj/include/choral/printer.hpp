#pragma once

#include <string>

#include "choral/ast.hpp"

namespace choral {

struct PrintOptions {
  bool courtesy = false;  // add zero-parameter wrappers for all-Unit methods
  int indent = 2;
};

std::string printRoles(const std::vector<RoleRef> &roles);
std::string printTE(const TypeExprP &te);
std::string printExp(const ExpP &e);
std::string printStm(const StmP &s, int depth = 0, int indent = 2);
std::string printDecl(const Decl &d, const PrintOptions &opts = {});
std::string printProgram(const Program &p, const PrintOptions &opts = {});

// Whitespace-free rendering used for "equal modulo whitespace" comparisons.
std::string squash(const std::string &text);

}  // namespace choral
