#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace choral {

struct Type;
using TypeP = std::shared_ptr<const Type>;
struct Kind;
using KindP = std::shared_ptr<const Kind>;

enum class KindTag { Role, Star, Ctor };

// Role | Star(bound) | Ctor(var : param) => result
struct Kind {
  KindTag tag = KindTag::Role;
  TypeP bound;        // Star; may be null for void/unbounded
  std::string var;    // Ctor binder
  KindP param;        // Ctor
  KindP result;       // Ctor
};

KindP roleKind();
KindP starKind(TypeP bound);
KindP ctorKind(const std::string &var, KindP param, KindP result);

enum class TypeTag { Role, Var, Sym, Abs, App, Inter, Fun, Void, Null };

struct Type {
  TypeTag tag = TypeTag::Sym;
  std::string name;         // Role, Var, Sym, Abs binder
  int roleArity = 0;        // Sym: number of leading role arguments
  KindP kind;               // Abs binder kind
  TypeP fn, arg;            // App
  TypeP body;               // Abs
  std::vector<TypeP> parts; // Inter members, Fun params
  TypeP result;             // Fun
  std::vector<std::string> roles;  // Null located at these roles
};

TypeP tRole(const std::string &n);
TypeP tVar(const std::string &n);
TypeP tSym(const std::string &n, int roleArity);
TypeP tAbs(const std::string &var, KindP k, TypeP body);
TypeP tApp(TypeP f, TypeP a);
TypeP tApps(TypeP f, const std::vector<TypeP> &as);
TypeP tInter(std::vector<TypeP> parts);
TypeP tFun(std::vector<TypeP> params, TypeP result);
TypeP tVoid();
TypeP tNull(std::vector<std::string> roles);

std::string freshName(const std::string &hint);

// Separate maps because roles and types live in different namespaces.
struct Subst {
  std::map<std::string, TypeP> roles;
  std::map<std::string, TypeP> vars;
  bool empty() const { return roles.empty() && vars.empty(); }
};

TypeP subst(const TypeP &t, const Subst &s);
KindP substKind(const KindP &k, const Subst &s);

// Beta/eta normal form.
TypeP reduce(const TypeP &t);

bool alphaEq(const TypeP &a, const TypeP &b);
bool kindShapeEq(const KindP &a, const KindP &b);

std::set<std::string> freeRoles(const TypeP &t);
std::set<std::string> freeVars(const TypeP &t);

struct Spine {
  TypeP head;
  std::vector<TypeP> args;
};
Spine spine(const TypeP &t);

// Role arguments of a fully applied Sym (first roleArity args).
std::vector<std::string> spineRoles(const Spine &s);
std::vector<TypeP> spineTypeArgs(const Spine &s);

// Renders X@A, X@(A,B)<T>, hiding role binders of abstracted arguments.
std::string show(const TypeP &t);
std::string showKind(const KindP &k);

using KindEnv = std::map<std::string, KindP>;

// Implements Abs/App kinding; error receives a message on failure.
KindP kindOf(const KindEnv &theta, const TypeP &t, std::string *error);

}  // namespace choral
