#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "choral/ast.hpp"
#include "choral/diagnostic.hpp"
#include "choral/types.hpp"

namespace choral {

struct FTPInfo {
  std::string name;
  std::vector<std::string> roles;
  std::vector<TypeP> bounds;
  KindP kind;
};

struct FieldInfo {
  std::string name;
  TypeP type;
  bool isStatic = false;
  const Field *decl = nullptr;
};

struct MethodInfo {
  const ClassInfo *owner = nullptr;
  MethodP decl;
  std::string name;
  bool isStatic = false;
  bool isCtor = false;
  bool isAbstract = false;
  bool isBuiltin = false;  // bodiless member of a concrete prelude class
  bool selection = false;
  std::vector<FTPInfo> ftps;
  std::vector<TypeP> params;
  TypeP ret;
};

struct ClassInfo {
  DeclP decl;
  std::string name;
  DeclKind declKind = DeclKind::Class;
  std::vector<std::string> roles;
  std::vector<FTPInfo> ftps;
  TypeP sym;
  KindP kind;
  std::vector<TypeP> supers;  // in terms of the class's own roles and type parameters
  std::vector<FieldInfo> fields;
  std::vector<std::unique_ptr<MethodInfo>> methods;
  std::vector<std::unique_ptr<MethodInfo>> ctors;
  bool prelude = false;

  bool isEnum() const { return declKind == DeclKind::Enum; }
  bool isAbstract() const;
  bool hasCase(const std::string &c) const;
  // The class applied to its own roles and type parameters.
  TypeP selfType() const;
  TypeP applied(const std::vector<std::string> &roles, const std::vector<TypeP> &targs) const;
};

class SymbolTable {
 public:
  const ClassInfo *find(const std::string &name) const;
  ClassInfo *findMut(const std::string &name);
  const KindEnv &theta() const { return kinds; }

  std::map<std::string, std::unique_ptr<ClassInfo>> classes;
  KindEnv kinds;  // declared symbols, filled once signatures are known
};

// A class instance in a supertype closure: roles and type parameters substituted.
struct Instance {
  const ClassInfo *cls = nullptr;
  Subst subst;
  TypeP type;
};

class TypeOps {
 public:
  explicit TypeOps(const SymbolTable &table, KindEnv vars = {});

  bool isSubtype(const TypeP &a, const TypeP &b) const;
  bool isAssignable(const TypeP &a, const TypeP &b) const;
  std::optional<Instance> instanceOf(const TypeP &t) const;
  // The type itself first, then its supertypes breadth-first.
  std::vector<Instance> closure(const TypeP &t) const;
  const ClassInfo *classOf(const TypeP &t) const;
  TypeP upperBound(const TypeP &t) const;
  KindEnv &vars() { return vars_; }

 private:
  bool sub(const TypeP &a, const TypeP &b, int depth) const;
  std::vector<Instance> closureAt(const TypeP &t, int depth) const;
  const SymbolTable &table_;
  KindEnv vars_;
};

struct CheckedProgram {
  Program program;  // user declarations followed by the prelude declarations in use
  std::shared_ptr<SymbolTable> table;
  bool ok = false;

  const ClassInfo *find(const std::string &name) const { return table ? table->find(name) : nullptr; }
  std::vector<DeclP> userDecls() const;
};

const std::string &preludeSource();
const Program &preludeProgram();

CheckedProgram checkProgram(Program user, DiagnosticSink &diags);
CheckedProgram checkFiles(const std::vector<SourceRef> &files, DiagnosticSink &diags);
CheckedProgram checkText(const std::string &name, const std::string &text, DiagnosticSink &diags);

// Roles of an expression's type and of all its subterms.
std::set<std::string> rolesOf(const ExpP &e);
TypeP typeOf(const ExpP &e);

}  // namespace choral
