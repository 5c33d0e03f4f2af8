#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "choral/source.hpp"

namespace choral {

struct Type;
using TypeP = std::shared_ptr<const Type>;
struct MethodInfo;
struct ClassInfo;

struct RoleRef {
  std::string name;
  Span span;
};

struct TypeExpr;
using TypeExprP = std::shared_ptr<TypeExpr>;

// id@(R1..Rn)<TE..>, or void. Roles are empty in the local language.
struct TypeExpr {
  Span span;
  std::string name;
  std::vector<RoleRef> roles;
  std::vector<TypeExprP> args;
  bool isVoid = false;
};

struct Exp;
using ExpP = std::shared_ptr<Exp>;
struct Stm;
using StmP = std::shared_ptr<Stm>;

enum class ExpKind {
  Literal,
  Name,      // bare identifier; checker resolves it to a local, a field or a class
  Field,     // target.name, target may be a ClassRef (static field)
  Call,      // [target.]<typeArgs>name(args); target null means unqualified
  New,       // new <typeArgs> name@(roles)<classTypeArgs>(args)
  Binary,
  This,
  ClassRef,  // Id@(roles)<typeArgs> used as a receiver
  Chain,     // e >> link >> link, removed by desugarChain
  UnitLit,   // Unit.id
};

enum class LitKind { Int, Double, String, Bool, Char, Null };

enum class NameRes { Unresolved, Local, Field, Class };

struct ChainLink {
  ExpP target;  // null for constructor references
  std::vector<TypeExprP> typeArgs;
  std::string name;  // method name, or "new"
  TypeExprP ctor;    // class for ::new
  Span span;
};

struct Exp {
  ExpKind kind = ExpKind::Literal;
  Span span;

  // Literal
  LitKind lit = LitKind::Int;
  std::string text;  // literal value (unescaped for strings), name for Name/Field/Call
  std::vector<RoleRef> roles;
  bool roleList = false;  // "x"@[A,B] before expansion

  std::string name;
  ExpP target;
  std::vector<TypeExprP> typeArgs;
  std::vector<ExpP> args;

  // New / ClassRef
  std::vector<TypeExprP> classTypeArgs;

  // Binary
  std::string op;
  ExpP lhs, rhs;

  // Chain
  std::vector<ChainLink> links;

  // checker annotations
  TypeP type;
  std::set<std::string> rolesOf;  // roles of the type and of all subterms
  NameRes res = NameRes::Unresolved;
  const MethodInfo *method = nullptr;
  const ClassInfo *cls = nullptr;  // class for New/ClassRef/static access
  std::set<std::string> keepRoles;  // roles at which a call/new keeps its structure
};

enum class StmKind { Return, ExpStm, VarDecl, Assign, If, Block, Switch, Try, Throw };

struct SwitchCase {
  std::string label;
  Span span;
  StmP body;
};

struct CatchClause {
  TypeExprP te;
  std::string name;
  StmP body;
  Span span;
};

struct Stm {
  StmKind kind = StmKind::ExpStm;
  Span span;
  ExpP exp;  // Return value (may be null), ExpStm, VarDecl init, Assign lhs, If/Switch guard, Throw
  TypeExprP te;
  std::string name;
  std::string op;  // assignment operator
  ExpP rhs;
  StmP thenS, elseS, body;
  std::vector<SwitchCase> cases;
  bool hasDefault = false;
  StmP defaultBody;
  bool defaultThrow = false;  // generated selection switch
  std::vector<CatchClause> catches;
  StmP next;  // continuation, null is nil
  Span opSpan;  // '=' of VarDecl/Assign, used for caret placement

  TypeP declType;  // VarDecl
};

struct Annotation {
  std::string name;
  std::vector<std::pair<std::string, std::string>> args;
  Span span;
};

struct FTP {
  std::string name;
  std::vector<RoleRef> roles;
  std::vector<TypeExprP> bounds;
  Span span;
};

struct Param {
  TypeExprP te;
  std::string name;
  Span span;
};

struct Method {
  std::vector<Annotation> annotations;
  std::vector<std::string> modifiers;
  std::vector<FTP> ftps;
  TypeExprP ret;  // null for constructors
  std::string name;
  std::vector<Param> params;
  bool hasBody = false;
  StmP body;
  bool isCtor = false;
  Span span;
  Span nameSpan;

  bool isStatic() const;
  bool hasAnnotation(const std::string &n) const;
};
using MethodP = std::shared_ptr<Method>;

struct Field {
  std::vector<Annotation> annotations;
  std::vector<std::string> modifiers;
  TypeExprP te;
  std::string name;
  Span span;
  bool isStatic() const;
};

enum class DeclKind { Class, Interface, Enum };

struct Decl {
  DeclKind kind = DeclKind::Class;
  std::vector<Annotation> annotations;
  std::vector<std::string> modifiers;
  std::string name;
  std::vector<RoleRef> roles;
  std::vector<FTP> ftps;
  std::vector<TypeExprP> extends;
  std::vector<TypeExprP> implements;
  std::vector<Field> fields;
  std::vector<MethodP> ctors;
  std::vector<MethodP> methods;
  std::vector<std::string> enumCases;
  Span span;
  Span nameSpan;
  bool prelude = false;

  std::vector<std::string> roleNames() const;
  bool hasAnnotation(const std::string &n) const;
  bool isAbstract() const;
};
using DeclP = std::shared_ptr<Decl>;

struct Program {
  std::vector<DeclP> decls;
};

// One projected unit of the local language.
struct LocalDecl {
  std::string generatedName;
  std::string sourceChoreography;
  std::string role;
  DeclP decl;
};

struct LocalProgram {
  std::vector<LocalDecl> units;
};

// Node constructors used by the parser, projector and tests.
ExpP mkName(const std::string &n, Span s = {});
ExpP mkLit(LitKind k, const std::string &text, std::vector<RoleRef> roles = {}, Span s = {});
ExpP mkUnit(Span s = {});
ExpP mkCall(ExpP target, const std::string &name, std::vector<ExpP> args,
            std::vector<TypeExprP> typeArgs = {}, Span s = {});
ExpP mkUnitCall(std::vector<ExpP> args, Span s = {});
ExpP mkField(ExpP target, const std::string &name, Span s = {});
ExpP mkClassRef(const std::string &name, std::vector<RoleRef> roles = {}, Span s = {});
TypeExprP mkTE(const std::string &name, std::vector<RoleRef> roles = {},
               std::vector<TypeExprP> args = {}, Span s = {});
StmP mkExpStm(ExpP e, StmP next = nullptr);

bool isUnitLit(const ExpP &e);
bool isUnitCall(const ExpP &e);  // Unit.id(args)

// Structural equality ignoring spans and checker annotations.
bool equalTE(const TypeExprP &a, const TypeExprP &b);
bool equalExp(const ExpP &a, const ExpP &b);
bool equalStm(const StmP &a, const StmP &b);

ExpP cloneExp(const ExpP &e);
StmP cloneStm(const StmP &s);
TypeExprP cloneTE(const TypeExprP &t);

// Appends s2 after the last statement of s1 (s1 is copied along its spine).
StmP appendStm(const StmP &s1, const StmP &s2);

// Visitors over every node; used by erasure checks and metrics.
void forEachExp(const StmP &s, const std::function<void(const ExpP &)> &f);
void forEachExpIn(const ExpP &e, const std::function<void(const ExpP &)> &f);
void forEachStm(const StmP &s, const std::function<void(const StmP &)> &f);
void forEachTE(const Decl &d, const std::function<void(const TypeExprP &)> &f);

}  // namespace choral
