#pragma once

#include <functional>
#include <string>
#include <vector>

#include "choral/ast.hpp"

namespace choral {

// Declared role parameter names of a class or type parameter; empty when unknown.
using RoleNamesFn = std::function<std::vector<std::string>(const std::string &name)>;

// name for one-role declarations, name_R for the R-th role of several
std::string generatedName(const std::string &name, const std::vector<std::string> &declRoles, size_t index);

// Role projection of a type expression: kept, suffixed, or Unit.
TypeExprP projectTE(const TypeExprP &te, const std::string &role, const RoleNamesFn &roleNames);

// Drops every role annotation; used for type arguments.
TypeExprP eraseTE(const TypeExprP &te);

}  // namespace choral
