#include "choral/tproj.hpp"

namespace choral {

std::string generatedName(const std::string &name, const std::vector<std::string> &declRoles, size_t index) {
  if (declRoles.size() <= 1 || index >= declRoles.size()) return name;
  return name + "_" + declRoles[index];
}

TypeExprP eraseTE(const TypeExprP &te) {
  if (!te) return nullptr;
  auto out = mkTE(te->name, {}, {}, te->span);
  out->isVoid = te->isVoid;
  for (auto &a : te->args) out->args.push_back(eraseTE(a));
  return out;
}

TypeExprP projectTE(const TypeExprP &te, const std::string &role, const RoleNamesFn &roleNames) {
  if (!te) return nullptr;
  if (te->isVoid || te->roles.empty()) return eraseTE(te);
  std::vector<TypeExprP> args;
  for (auto &a : te->args) args.push_back(eraseTE(a));
  if (te->roles.size() == 1 && te->roles[0].name == role) return mkTE(te->name, {}, args, te->span);
  for (size_t i = 0; i < te->roles.size(); ++i) {
    if (te->roles[i].name != role) continue;
    auto declRoles = roleNames(te->name);
    return mkTE(generatedName(te->name, declRoles, i), {}, args, te->span);
  }
  return mkTE("Unit", {}, {}, te->span);
}

}  // namespace choral
