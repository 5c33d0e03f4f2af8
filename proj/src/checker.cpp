#include "choral/checker.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>

#include "choral/parser.hpp"
#include "choral/printer.hpp"
#include "choral/tproj.hpp"

namespace choral {

extern const char *const kPreludeText;

// ---------------------------------------------------------------- classes

bool ClassInfo::isAbstract() const { return decl && decl->isAbstract(); }

bool ClassInfo::hasCase(const std::string &c) const {
  if (!decl) return false;
  return std::find(decl->enumCases.begin(), decl->enumCases.end(), c) != decl->enumCases.end();
}

TypeP ClassInfo::selfType() const {
  std::vector<TypeP> targs;
  for (auto &f : ftps) targs.push_back(tVar(f.name));
  return applied(roles, targs);
}

TypeP ClassInfo::applied(const std::vector<std::string> &rs, const std::vector<TypeP> &targs) const {
  std::vector<TypeP> args;
  for (auto &r : rs) args.push_back(tRole(r));
  for (auto &t : targs) args.push_back(t);
  return tApps(sym, args);
}

const ClassInfo *SymbolTable::find(const std::string &name) const {
  auto it = classes.find(name);
  return it == classes.end() ? nullptr : it->second.get();
}

ClassInfo *SymbolTable::findMut(const std::string &name) {
  auto it = classes.find(name);
  return it == classes.end() ? nullptr : it->second.get();
}

std::vector<DeclP> CheckedProgram::userDecls() const {
  std::vector<DeclP> out;
  for (auto &d : program.decls)
    if (!d->prelude) out.push_back(d);
  return out;
}

// ---------------------------------------------------------------- type operations

TypeOps::TypeOps(const SymbolTable &table, KindEnv vars) : table_(table), vars_(std::move(vars)) {}

static KindP applyKind(KindP k, const std::vector<TypeP> &args) {
  for (auto &a : args) {
    if (!k || k->tag != KindTag::Ctor) return nullptr;
    Subst s;
    if (k->param->tag == KindTag::Role)
      s.roles[k->var] = a;
    else
      s.vars[k->var] = a;
    k = substKind(k->result, s);
  }
  return k;
}

TypeP TypeOps::upperBound(const TypeP &t0) const {
  auto t = reduce(t0);
  auto sp = spine(t);
  if (!sp.head || sp.head->tag != TypeTag::Var) return nullptr;
  auto it = vars_.find(sp.head->name);
  if (it == vars_.end()) return nullptr;
  auto k = applyKind(it->second, sp.args);
  if (!k || k->tag != KindTag::Star || !k->bound) return nullptr;
  return reduce(k->bound);
}

std::optional<Instance> TypeOps::instanceOf(const TypeP &t0) const {
  auto t = reduce(t0);
  auto sp = spine(t);
  if (!sp.head || sp.head->tag != TypeTag::Sym) return std::nullopt;
  auto *c = table_.find(sp.head->name);
  if (!c) return std::nullopt;
  if (sp.args.size() != c->roles.size() + c->ftps.size()) return std::nullopt;
  Instance in;
  in.cls = c;
  in.type = t;
  for (size_t i = 0; i < c->roles.size(); ++i) in.subst.roles[c->roles[i]] = sp.args[i];
  for (size_t j = 0; j < c->ftps.size(); ++j) in.subst.vars[c->ftps[j].name] = sp.args[c->roles.size() + j];
  return in;
}

const ClassInfo *TypeOps::classOf(const TypeP &t) const {
  auto in = instanceOf(t);
  return in ? in->cls : nullptr;
}

std::vector<Instance> TypeOps::closure(const TypeP &t) const { return closureAt(t, 0); }

std::vector<Instance> TypeOps::closureAt(const TypeP &t0, int depth) const {
  std::vector<Instance> out;
  if (depth > 16 || !t0) return out;
  auto t = reduce(t0);
  if (t->tag == TypeTag::Inter) {
    for (auto &p : t->parts)
      for (auto &i : closureAt(p, depth + 1)) out.push_back(i);
    return out;
  }
  auto sp = spine(t);
  if (sp.head && sp.head->tag == TypeTag::Var) {
    auto ub = upperBound(t);
    return ub ? closureAt(ub, depth + 1) : out;
  }
  auto first = instanceOf(t);
  if (!first) return out;
  std::deque<Instance> work{*first};
  while (!work.empty() && out.size() < 200) {
    auto cur = work.front();
    work.pop_front();
    bool seen = false;
    for (auto &o : out)
      if (alphaEq(o.type, cur.type)) seen = true;
    if (seen) continue;
    out.push_back(cur);
    for (auto &s : cur.cls->supers) {
      auto st = reduce(subst(s, cur.subst));
      if (auto in = instanceOf(st)) work.push_back(*in);
    }
  }
  return out;
}

bool TypeOps::isSubtype(const TypeP &a, const TypeP &b) const { return sub(a, b, 0); }

bool TypeOps::sub(const TypeP &a0, const TypeP &b0, int depth) const {
  if (!a0 || !b0 || depth > 32) return false;
  auto a = reduce(a0);
  auto b = reduce(b0);
  if (alphaEq(a, b)) return true;
  if (b->tag == TypeTag::Inter) {
    for (auto &p : b->parts)
      if (!sub(a, p, depth + 1)) return false;
    return true;
  }
  if (a->tag == TypeTag::Null) {
    if (b->tag == TypeTag::Void) return false;
    if (a->roles.empty()) return true;
    std::set<std::string> ra(a->roles.begin(), a->roles.end());
    return ra == freeRoles(b);
  }
  if (a->tag == TypeTag::Inter) {
    for (auto &p : a->parts)
      if (sub(p, b, depth + 1)) return true;
    return false;
  }
  if (a->tag == TypeTag::Void || b->tag == TypeTag::Void) return false;
  auto sp = spine(a);
  if (!sp.head) return false;
  if (sp.head->tag == TypeTag::Var) {
    auto ub = upperBound(a);
    return ub && sub(ub, b, depth + 1);
  }
  if (sp.head->tag == TypeTag::Sym) {
    auto cl = closure(a);
    for (size_t i = 1; i < cl.size(); ++i)
      if (alphaEq(cl[i].type, b)) return true;
  }
  return false;
}

static int numericRank(const TypeP &t) {
  auto sp = spine(reduce(t));
  if (!sp.head || sp.head->tag != TypeTag::Sym || sp.args.size() != 1) return 0;
  if (sp.head->name == "Integer") return 1;
  if (sp.head->name == "Long") return 2;
  if (sp.head->name == "Double") return 3;
  return 0;
}

bool TypeOps::isAssignable(const TypeP &a, const TypeP &b) const {
  if (isSubtype(a, b)) return true;
  int ra = numericRank(a), rb = numericRank(b);
  return ra && rb && ra < rb && freeRoles(a) == freeRoles(b);
}

std::set<std::string> rolesOf(const ExpP &e) { return e ? e->rolesOf : std::set<std::string>{}; }

TypeP typeOf(const ExpP &e) {
  if (!e || !e->type) throw std::logic_error("expression has no type annotation");
  return e->type;
}

// ---------------------------------------------------------------- prelude

const std::string &preludeSource() {
  static const std::string text(kPreludeText);
  return text;
}

const Program &preludeProgram() {
  static const Program prog = [] {
    DiagnosticSink d;
    auto p = parseText("prelude.chor", preludeSource(), d);
    if (d.hasErrors()) throw std::logic_error("prelude does not parse: " + d.all().front().message);
    for (auto &decl : p.decls) decl->prelude = true;
    return p;
  }();
  return prog;
}

// ---------------------------------------------------------------- checker

namespace {

struct Scope {
  std::set<std::string> roles;
  std::map<std::string, int> vars;  // type parameter -> role arity
  std::map<std::string, std::vector<std::string>> varRoles;
};

struct Ctx {
  ClassInfo *cls = nullptr;
  const MethodInfo *method = nullptr;
  bool isStatic = false;
  bool isCtor = false;
  TypeP ret;
  Scope scope;
  KindEnv vars;
  std::vector<std::map<std::string, TypeP>> locals;
};

struct Cand {
  const MethodInfo *m = nullptr;
  std::vector<TypeP> params;
  TypeP ret;
};

std::string rolesText(const std::set<std::string> &rs) {
  std::string s;
  for (auto &r : rs) s += (s.empty() ? "" : ", ") + r;
  return s;
}

class Checker {
 public:
  Checker(SymbolTable &t, DiagnosticSink &d) : T(t), D(d) {}

  void run(Program &prog) {
    for (auto &decl : prog.decls) shell(decl);
    for (auto &decl : prog.decls)
      if (!decl->prelude) roleConstraints(*decl);
    for (auto &[n, c] : T.classes) header(*c);
    T.kinds["Unit"] = starKind(nullptr);
    for (auto &[n, c] : T.classes) T.kinds[n] = classKind(*c);
    for (auto &[n, c] : T.classes) members(*c);
    for (auto &[n, c] : T.classes)
      if (!c->prelude) kindCheck(*c);
    for (auto &[n, c] : T.classes)
      if (!c->prelude && !broken.count(c->decl.get())) {
        bodies(*c);
        implementations(*c);
        unusedRoles(*c);
      }
  }

 private:
  SymbolTable &T;
  DiagnosticSink &D;
  std::set<const Decl *> broken;

  void err(const Decl *d, DiagCode c, const Span &s, const std::string &m) {
    D.error(c, s, m);
    if (d) broken.insert(d);
  }

  void mismatch(const Span &s, const TypeP &expecting, const TypeP &found) {
    Diagnostic dg{DiagCode::TypeMismatch, Severity::Error, s,
                  "Incompatible types: expecting '" + show(expecting) + "' found '" + show(found) + "'.",
                  std::make_pair(show(expecting), show(found)), "", ""};
    D.report(dg);
  }

  // ---------------------------------------------------------- symbol table

  void shell(const DeclP &decl) {
    if (T.classes.count(decl->name)) {
      D.error(DiagCode::DuplicateDeclaration, decl->nameSpan,
              "Duplicate declaration of '" + decl->name + "'.");
      return;
    }
    auto c = std::make_unique<ClassInfo>();
    c->decl = decl;
    c->name = decl->name;
    c->declKind = decl->kind;
    c->roles = decl->roleNames();
    c->prelude = decl->prelude;
    c->sym = tSym(decl->name, static_cast<int>(decl->roles.size()));
    for (auto &f : decl->ftps) {
      FTPInfo fi;
      fi.name = f.name;
      for (auto &r : f.roles) fi.roles.push_back(r.name);
      c->ftps.push_back(fi);
    }
    T.classes[decl->name] = std::move(c);
  }

  // ---------------------------------------------------------- role constraints

  void roleConstraints(const Decl &d) {
    // aliasing
    auto aliasing = [&](const std::vector<RoleRef> &rs, const std::string &name) {
      for (size_t i = 0; i < rs.size(); ++i)
        for (size_t j = 0; j < i; ++j)
          if (rs[i].name == rs[j].name) {
            err(&d, DiagCode::RoleAliasing, rs[i].span,
                "Illegal type instantiation: role '" + rs[i].name + "' must play exactly one role in '" + name +
                    "'.");
            return;
          }
    };
    aliasing(d.roles, d.name);
    forEachTE(d, [&](const TypeExprP &te) { aliasing(te->roles, te->name); });
    auto bodyAliasing = [&](const std::vector<MethodP> &ms) {
      for (auto &m : ms)
        forEachExp(m->body, [&](const ExpP &e) {
          if (e->kind == ExpKind::New || e->kind == ExpKind::ClassRef) aliasing(e->roles, e->name);
        });
    };
    bodyAliasing(d.ctors);
    bodyAliasing(d.methods);

    // cyclic inheritance
    std::vector<TypeExprP> supers = d.extends;
    supers.insert(supers.end(), d.implements.begin(), d.implements.end());
    for (auto &s : supers) {
      if (reaches(s->name, d.name)) {
        err(&d, DiagCode::CyclicInheritance, s->span,
            "Cyclic inheritance: '" + d.name + "' cannot extend '" + s->name + "'.");
        break;
      }
    }

    // supertypes keep the role set
    auto rn = d.roleNames();
    std::set<std::string> own(rn.begin(), rn.end());
    for (auto &s : supers) {
      std::set<std::string> rs;
      for (auto &r : s->roles) rs.insert(r.name);
      if (rs != own) {
        err(&d, DiagCode::RoleSetMismatch, s->span,
            "Illegal inheritance: '" + d.name + "' has roles (" + rolesText(own) + ") but its supertype '" +
                s->name + "' has roles (" + rolesText(rs) + ").");
      }
    }

    // overloads that collide after projection
    for (size_t j = 0; j < d.methods.size(); ++j) {
      auto &mj = d.methods[j];
      bool reported = false;
      for (size_t i = 0; i < j && !reported; ++i) {
        auto &mi = d.methods[i];
        if (mi->name != mj->name || mi->params.size() != mj->params.size()) continue;
        for (auto &role : d.roleNames()) {
          if (projectedParams(d, *mi, role) == projectedParams(d, *mj, role)) {
            err(&d, DiagCode::IllegalOverload, mj->nameSpan,
                "Illegal overload: '" + sigText(*mj) + "' and '" + sigText(*mi) +
                    "' have the same signature for role '" + role + "'.");
            reported = true;
            break;
          }
        }
      }
    }
  }

  bool reaches(const std::string &from, const std::string &target) {
    std::set<std::string> seen;
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      auto n = stack.back();
      stack.pop_back();
      if (n == target) return true;
      if (!seen.insert(n).second) continue;
      auto *c = T.find(n);
      if (!c) continue;
      for (auto &s : c->decl->extends) stack.push_back(s->name);
      for (auto &s : c->decl->implements) stack.push_back(s->name);
    }
    return false;
  }

  static std::string sigText(const Method &m) {
    std::string s = m.name + "(";
    for (size_t i = 0; i < m.params.size(); ++i)
      s += (i ? ", " : "") + printTE(m.params[i].te) + " " + m.params[i].name;
    return s + ")";
  }

  std::string projectedParams(const Decl &d, const Method &m, const std::string &role) {
    RoleNamesFn rn = [&](const std::string &n) -> std::vector<std::string> {
      for (auto &f : m.ftps)
        if (f.name == n) {
          std::vector<std::string> out;
          for (auto &r : f.roles) out.push_back(r.name);
          return out;
        }
      for (auto &f : d.ftps)
        if (f.name == n) {
          std::vector<std::string> out;
          for (auto &r : f.roles) out.push_back(r.name);
          return out;
        }
      if (auto *c = T.find(n)) return c->roles;
      return {};
    };
    std::string s;
    for (auto &p : m.params) s += printTE(projectTE(p.te, role, rn)) + ";";
    return s;
  }

  // ---------------------------------------------------------- denotation

  TypeP denote(const TypeExprP &te, const Scope &sc, const Decl *owner) {
    if (!te) return nullptr;
    if (te->isVoid) return tVoid();
    if (te->name == "Unit" && te->roles.empty() && te->args.empty()) return tSym("Unit", 0);
    for (auto &r : te->roles)
      if (!sc.roles.count(r.name)) {
        err(owner, DiagCode::UnknownName, r.span, "Cannot resolve role '" + r.name + "'.");
        return nullptr;
      }
    auto vit = sc.vars.find(te->name);
    if (vit != sc.vars.end()) {
      if (static_cast<int>(te->roles.size()) != vit->second || !te->args.empty()) {
        err(owner, DiagCode::KindError, te->span,
            "Type parameter '" + te->name + "' expects " + std::to_string(vit->second) + " role(s) and no type arguments.");
        return nullptr;
      }
      std::vector<TypeP> rs;
      for (auto &r : te->roles) rs.push_back(tRole(r.name));
      return tApps(tVar(te->name), rs);
    }
    auto *c = T.find(te->name);
    if (!c) {
      err(owner, DiagCode::UnknownName, te->span, "Cannot resolve type '" + te->name + "'.");
      return nullptr;
    }
    if (te->roles.size() != c->roles.size()) {
      err(owner, DiagCode::KindError, te->span,
          "Type '" + c->name + "' expects " + std::to_string(c->roles.size()) + " role(s) but got " +
              std::to_string(te->roles.size()) + ".");
      return nullptr;
    }
    if (te->args.size() != c->ftps.size()) {
      err(owner, DiagCode::KindError, te->span,
          "Type '" + c->name + "' expects " + std::to_string(c->ftps.size()) + " type argument(s) but got " +
              std::to_string(te->args.size()) + ".");
      return nullptr;
    }
    std::vector<TypeP> args;
    for (auto &r : te->roles) args.push_back(tRole(r.name));
    for (size_t i = 0; i < te->args.size(); ++i) {
      auto a = denoteArg(te->args[i], static_cast<int>(c->ftps[i].roles.size()), sc, owner);
      if (!a) return nullptr;
      args.push_back(a);
    }
    return tApps(c->sym, args);
  }

  // A type argument is a constructor over the parameter's roles.
  TypeP denoteArg(const TypeExprP &te, int k, const Scope &sc, const Decl *owner) {
    if (!te || te->isVoid) {
      if (te) err(owner, DiagCode::KindError, te->span, "'void' cannot be a type argument.");
      return nullptr;
    }
    if (te->name == "Unit" && te->roles.empty()) return tSym("Unit", 0);
    std::vector<std::string> binders;
    TypeExprP body = te;
    if (!te->roles.empty()) {
      if (static_cast<int>(te->roles.size()) != k) {
        err(owner, DiagCode::KindError, te->span,
            "Type argument '" + printTE(te) + "' must be located at " + std::to_string(k) + " role(s).");
        return nullptr;
      }
      for (auto &r : te->roles) binders.push_back(r.name);
    } else {
      auto copy = std::make_shared<TypeExpr>(*te);
      for (int i = 0; i < k; ++i) {
        auto y = freshName("Y");
        binders.push_back(y);
        copy->roles.push_back(RoleRef{y, te->span});
      }
      body = copy;
    }
    Scope inner = sc;
    for (auto &b : binders) inner.roles.insert(b);
    auto t = denote(body, inner, owner);
    if (!t) return nullptr;
    for (auto it = binders.rbegin(); it != binders.rend(); ++it) t = tAbs(*it, roleKind(), t);
    return reduce(t);
  }

  bool kindCheck(const TypeP &t, const KindEnv &vars, const Span &s, const Decl *owner) {
    if (!t) return false;
    KindEnv theta = T.kinds;
    for (auto &[k, v] : vars) theta[k] = v;
    std::string e;
    auto k = kindOf(theta, t, &e);
    if (!k) {
      err(owner, DiagCode::KindError, s, "Ill-kinded type '" + show(t) + "': " + e + ".");
      return false;
    }
    if (k->tag != KindTag::Star) {
      err(owner, DiagCode::KindError, s, "Type '" + show(t) + "' is not fully applied.");
      return false;
    }
    return true;
  }

  // ---------------------------------------------------------- signatures

  Scope classScope(const ClassInfo &c) {
    Scope sc;
    for (auto &r : c.roles) sc.roles.insert(r);
    for (auto &f : c.ftps) {
      sc.vars[f.name] = static_cast<int>(f.roles.size());
      sc.varRoles[f.name] = f.roles;
    }
    return sc;
  }

  static KindP ftpKind(const FTPInfo &f) {
    TypeP bound;
    if (f.bounds.size() == 1)
      bound = f.bounds[0];
    else if (f.bounds.size() > 1)
      bound = tInter(f.bounds);
    else if (f.roles.size() == 1)
      bound = tApp(tSym("Object", 1), tRole(f.roles[0]));
    KindP k = starKind(bound);
    for (auto it = f.roles.rbegin(); it != f.roles.rend(); ++it) k = ctorKind(*it, roleKind(), k);
    return k;
  }

  void ftpInfos(const std::vector<FTP> &src, std::vector<FTPInfo> &dst, const Scope &sc, const Decl *owner) {
    for (size_t i = 0; i < src.size(); ++i) {
      Scope inner = sc;
      for (auto &r : src[i].roles) inner.roles.insert(r.name);
      for (auto &b : src[i].bounds) {
        auto t = denote(b, inner, owner);
        if (t) dst[i].bounds.push_back(reduce(t));
      }
      dst[i].kind = ftpKind(dst[i]);
    }
  }

  void header(ClassInfo &c) {
    auto sc = classScope(c);
    auto *d = c.decl.get();
    ftpInfos(d->ftps, c.ftps, sc, d);
    std::vector<TypeExprP> sups = d->extends;
    sups.insert(sups.end(), d->implements.begin(), d->implements.end());
    bool cyclic = false;
    for (auto &s : sups)
      if (reaches(s->name, c.name)) cyclic = true;
    if (!cyclic)
      for (auto &s : sups)
        if (auto t = denote(s, sc, d)) c.supers.push_back(reduce(t));
    if (c.isEnum() && c.roles.size() == 1) {
      c.supers.push_back(tApps(tSym("Enum", 1), {tRole(c.roles[0]), c.sym}));
    } else if (c.supers.empty() && c.roles.size() == 1 && c.name != "Object" && sups.empty()) {
      c.supers.push_back(tApp(tSym("Object", 1), tRole(c.roles[0])));
    }
  }

  static KindP classKind(const ClassInfo &c) {
    TypeP bound = c.supers.empty() ? nullptr : c.supers.front();
    KindP k = starKind(bound);
    for (auto it = c.ftps.rbegin(); it != c.ftps.rend(); ++it) k = ctorKind(it->name, it->kind, k);
    for (auto it = c.roles.rbegin(); it != c.roles.rend(); ++it) k = ctorKind(*it, roleKind(), k);
    return k;
  }

  std::unique_ptr<MethodInfo> methodInfo(ClassInfo &c, const MethodP &m) {
    auto mi = std::make_unique<MethodInfo>();
    mi->owner = &c;
    mi->decl = m;
    mi->name = m->name;
    mi->isStatic = m->isStatic();
    mi->isCtor = m->isCtor;
    mi->isAbstract = !m->hasBody && (c.isAbstract() || !c.prelude);
    mi->isBuiltin = !m->hasBody && c.prelude && !c.isAbstract();
    mi->selection = m->hasAnnotation("SelectionMethod");
    auto sc = classScope(c);
    for (auto &f : m->ftps) {
      FTPInfo fi;
      fi.name = f.name;
      for (auto &r : f.roles) fi.roles.push_back(r.name);
      mi->ftps.push_back(fi);
      sc.vars[f.name] = static_cast<int>(f.roles.size());
      sc.varRoles[f.name] = fi.roles;
    }
    ftpInfos(m->ftps, mi->ftps, sc, c.decl.get());
    for (auto &p : m->params) {
      auto t = denote(p.te, sc, c.decl.get());
      mi->params.push_back(t ? reduce(t) : nullptr);
    }
    mi->ret = m->isCtor ? tVoid() : denote(m->ret, sc, c.decl.get());
    if (mi->ret) mi->ret = reduce(mi->ret);
    return mi;
  }

  void members(ClassInfo &c) {
    auto sc = classScope(c);
    std::set<std::string> fieldNames;
    for (auto &f : c.decl->fields) {
      if (!fieldNames.insert(f.name).second)
        err(c.decl.get(), DiagCode::DuplicateDeclaration, f.span, "Duplicate field '" + f.name + "'.");
      FieldInfo fi;
      fi.name = f.name;
      fi.isStatic = f.isStatic();
      fi.decl = &f;
      auto t = denote(f.te, sc, c.decl.get());
      fi.type = t ? reduce(t) : nullptr;
      c.fields.push_back(fi);
    }
    for (auto &m : c.decl->methods) c.methods.push_back(methodInfo(c, m));
    for (auto &m : c.decl->ctors) c.ctors.push_back(methodInfo(c, m));
  }

  KindEnv varKinds(const ClassInfo &c, const MethodInfo *m) {
    KindEnv k;
    for (auto &f : c.ftps) k[f.name] = f.kind;
    if (m)
      for (auto &f : m->ftps) k[f.name] = f.kind;
    return k;
  }

  void kindCheck(ClassInfo &c) {
    auto *d = c.decl.get();
    auto base = varKinds(c, nullptr);
    std::vector<TypeExprP> sups = d->extends;
    sups.insert(sups.end(), d->implements.begin(), d->implements.end());
    for (size_t i = 0; i < c.supers.size() && i < sups.size(); ++i) kindCheck(c.supers[i], base, sups[i]->span, d);
    for (size_t i = 0; i < c.fields.size(); ++i)
      if (c.fields[i].type) kindCheck(c.fields[i].type, base, d->fields[i].te->span, d);
    auto method = [&](const MethodInfo &m) {
      auto vk = varKinds(c, &m);
      for (size_t i = 0; i < m.params.size(); ++i)
        if (m.params[i]) kindCheck(m.params[i], vk, m.decl->params[i].te->span, d);
      if (m.ret && !m.isCtor) kindCheck(m.ret, vk, m.decl->ret->span, d);
      if (m.selection) validateSelection(c, m);
    };
    for (auto &m : c.methods) method(*m);
    for (auto &m : c.ctors) method(*m);
  }

  // ---------------------------------------------------------- selection methods

  // Head name and role of a single-role enum-like type, or empty.
  std::pair<std::string, std::string> enumAt(const TypeP &t, const MethodInfo &m) {
    if (!t) return {};
    auto sp = spine(reduce(t));
    if (!sp.head || sp.args.size() != 1 || sp.args[0]->tag != TypeTag::Role) return {};
    if (sp.head->tag == TypeTag::Sym) {
      auto *c = T.find(sp.head->name);
      if (c && c->isEnum()) return {c->name, sp.args[0]->name};
      return {};
    }
    if (sp.head->tag == TypeTag::Var) {
      for (auto &f : m.ftps) {
        if (f.name != sp.head->name) continue;
        for (auto &b : f.bounds) {
          auto bs = spine(b);
          if (bs.head && bs.head->tag == TypeTag::Sym) {
            auto *bc = T.find(bs.head->name);
            if (bc && (bc->name == "Enum" || bc->isEnum())) return {f.name, sp.args[0]->name};
          }
        }
      }
    }
    return {};
  }

  void validateSelection(const ClassInfo &c, const MethodInfo &m) {
    auto fail = [&] {
      err(c.decl.get(), DiagCode::BadSelectionAnnotation, m.decl->nameSpan,
          "Selection method '" + m.name +
              "' must take one enumerated value located at one role and return it at another role.");
    };
    if (m.params.size() != 1) return fail();
    auto p = enumAt(m.params[0], m);
    auto r = enumAt(m.ret, m);
    if (p.first.empty() || r.first.empty() || p.first != r.first || p.second == r.second) return fail();
  }

  // ---------------------------------------------------------- bodies

  Ctx makeCtx(ClassInfo &c, const MethodInfo &m) {
    Ctx x;
    x.cls = &c;
    x.method = &m;
    x.isStatic = m.isStatic;
    x.isCtor = m.isCtor;
    x.ret = m.ret;
    x.scope = classScope(c);
    for (auto &f : m.ftps) {
      x.scope.vars[f.name] = static_cast<int>(f.roles.size());
      x.scope.varRoles[f.name] = f.roles;
    }
    x.vars = varKinds(c, &m);
    x.locals.emplace_back();
    for (size_t i = 0; i < m.params.size(); ++i)
      if (m.params[i]) x.locals.back()[m.decl->params[i].name] = m.params[i];
    return x;
  }

  void bodies(ClassInfo &c) {
    auto run = [&](const MethodInfo &m) {
      if (!m.decl->hasBody) return;
      for (auto &p : m.params)
        if (!p) return;
      if (!m.ret) return;
      auto x = makeCtx(c, m);
      checkStm(m.decl->body, x);
    };
    for (auto &m : c.methods) run(*m);
    for (auto &m : c.ctors) run(*m);
  }

  void implementations(ClassInfo &c) {
    if (c.isAbstract() || c.isEnum()) return;
    TypeOps ops(T, varKinds(c, nullptr));
    auto cl = ops.closure(c.selfType());
    struct Sig {
      std::string name;
      std::vector<TypeP> params;
    };
    auto inst = [&](const MethodInfo &m, const Instance &in) {
      Sig s{m.name, {}};
      for (auto &p : m.params) s.params.push_back(p ? reduce(subst(p, in.subst)) : nullptr);
      return s;
    };
    auto same = [](const Sig &a, const Sig &b) {
      if (a.name != b.name || a.params.size() != b.params.size()) return false;
      for (size_t i = 0; i < a.params.size(); ++i)
        if (!a.params[i] || !b.params[i] || !alphaEq(a.params[i], b.params[i])) return false;
      return true;
    };
    std::vector<Sig> concrete;
    for (auto &in : cl)
      for (auto &m : in.cls->methods)
        if (!m->isAbstract) concrete.push_back(inst(*m, in));
    for (auto &in : cl)
      for (auto &m : in.cls->methods) {
        if (!m->isAbstract || !m->ftps.empty()) continue;
        auto s = inst(*m, in);
        bool found = false;
        for (auto &k : concrete)
          if (same(k, s)) found = true;
        if (!found) {
          err(c.decl.get(), DiagCode::MissingImplementation, c.decl->nameSpan,
              "Class '" + c.name + "' does not implement '" + m->name + "' of '" + in.cls->name + "'.");
          return;
        }
      }
  }

  void unusedRoles(const ClassInfo &c) {
    if (c.isEnum() || c.roles.empty()) return;
    std::set<std::string> used;
    forEachTE(*c.decl, [&](const TypeExprP &te) {
      for (auto &r : te->roles) used.insert(r.name);
    });
    auto scan = [&](const std::vector<MethodP> &ms) {
      for (auto &m : ms)
        forEachExp(m->body, [&](const ExpP &e) {
          if (e->kind == ExpKind::Literal || e->kind == ExpKind::ClassRef || e->kind == ExpKind::New)
            for (auto &r : e->roles) used.insert(r.name);
        });
    };
    scan(c.decl->ctors);
    scan(c.decl->methods);
    for (auto &r : c.decl->roles)
      if (!used.count(r.name))
        D.warning(DiagCode::UnusedRole, r.span, "Role '" + r.name + "' is never used in '" + c.name + "'.");
  }

  // ---------------------------------------------------------- statements

  std::optional<TypeP> lookupLocal(const Ctx &x, const std::string &n) {
    for (auto it = x.locals.rbegin(); it != x.locals.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return f->second;
    }
    return std::nullopt;
  }

  void block(const StmP &s, Ctx &x) {
    x.locals.emplace_back();
    checkStm(s, x);
    x.locals.pop_back();
  }

  bool isBoolAtOne(const TypeP &t) {
    auto sp = spine(reduce(t));
    return sp.head && sp.head->tag == TypeTag::Sym && sp.head->name == "Boolean" && sp.args.size() == 1 &&
           sp.args[0]->tag == TypeTag::Role;
  }

  void checkStm(const StmP &first, Ctx &x) {
    TypeOps ops(T, x.vars);
    for (auto s = first; s; s = s->next) {
      switch (s->kind) {
        case StmKind::Return: {
          if (!s->exp) {
            if (x.ret && x.ret->tag != TypeTag::Void)
              D.error(DiagCode::TypeMismatch, s->span, "Missing return value of type '" + show(x.ret) + "'.");
            break;
          }
          auto t = synth(s->exp, x);
          if (!t || !x.ret) break;
          if (x.ret->tag == TypeTag::Void) {
            D.error(DiagCode::TypeMismatch, s->exp->span, "Cannot return a value from a void method.");
          } else if (!ops.isAssignable(t, x.ret)) {
            mismatch(s->exp->span, x.ret, t);
          }
          break;
        }
        case StmKind::ExpStm:
        case StmKind::Throw: synth(s->exp, x); break;
        case StmKind::VarDecl: {
          auto dt = denote(s->te, x.scope, nullptr);
          if (dt) {
            dt = reduce(dt);
            if (!kindCheck(dt, x.vars, s->te->span, nullptr)) dt = nullptr;
          }
          s->declType = dt;
          if (s->exp) {
            auto t = synth(s->exp, x);
            if (t && dt && !ops.isAssignable(t, dt)) mismatch(s->opSpan.valid() ? s->opSpan : s->exp->span, dt, t);
          }
          if (lookupLocal(x, s->name) && x.locals.back().count(s->name))
            D.error(DiagCode::DuplicateDeclaration, s->span, "Variable '" + s->name + "' is already defined.");
          x.locals.back()[s->name] = dt ? dt : tVoid();
          break;
        }
        case StmKind::Assign: {
          if (s->exp->kind != ExpKind::Name && s->exp->kind != ExpKind::Field) {
            D.error(DiagCode::TypeMismatch, s->exp->span, "Left side of an assignment must be a variable or a field.");
            synth(s->rhs, x);
            break;
          }
          auto tl = synth(s->exp, x);
          auto tr = synth(s->rhs, x);
          if (!tl || !tr) break;
          auto at = s->opSpan.valid() ? s->opSpan : s->rhs->span;
          if (s->op == "=") {
            if (!ops.isAssignable(tr, tl)) mismatch(at, tl, tr);
          } else {
            auto r = binaryType(s->op.substr(0, s->op.size() - 1), tl, tr, s->exp, s->rhs);
            if (r && !ops.isAssignable(r, tl)) mismatch(at, tl, r);
          }
          break;
        }
        case StmKind::If: {
          auto g = synth(s->exp, x);
          if (g && !isBoolAtOne(g))
            D.error(DiagCode::BadGuard, s->exp->span,
                    "Guard must be a Boolean located at exactly one role, found '" + show(g) + "'.");
          block(s->thenS, x);
          block(s->elseS, x);
          break;
        }
        case StmKind::Block: block(s->body, x); break;
        case StmKind::Switch: {
          auto g = synth(s->exp, x);
          const ClassInfo *ec = g ? ops.classOf(g) : nullptr;
          if (g && (!ec || !ec->isEnum() || freeRoles(g).size() != 1)) {
            D.error(DiagCode::BadGuard, s->exp->span,
                    "Switch guard must be an enum located at exactly one role, found '" + show(g) + "'.");
            ec = nullptr;
          }
          std::set<std::string> labels;
          for (auto &k : s->cases) {
            if (ec && !ec->hasCase(k.label))
              D.error(DiagCode::UnknownName, k.span, "'" + k.label + "' is not a case of '" + ec->name + "'.");
            if (!labels.insert(k.label).second)
              D.error(DiagCode::DuplicateDeclaration, k.span, "Duplicate case '" + k.label + "'.");
            block(k.body, x);
          }
          if (s->hasDefault) block(s->defaultBody, x);
          break;
        }
        case StmKind::Try: {
          block(s->body, x);
          for (auto &k : s->catches) {
            auto t = denote(k.te, x.scope, nullptr);
            x.locals.emplace_back();
            x.locals.back()[k.name] = t ? reduce(t) : tVoid();
            checkStm(k.body, x);
            x.locals.pop_back();
          }
          break;
        }
      }
    }
  }

  // ---------------------------------------------------------- expressions

  TypeP located(const std::string &cls, const std::string &role) { return tApp(tSym(cls, 1), tRole(role)); }

  static std::string headName(const TypeP &t) {
    auto sp = spine(reduce(t));
    return sp.head && sp.head->tag == TypeTag::Sym ? sp.head->name : "";
  }

  TypeP binaryType(const std::string &op, const TypeP &ta, const TypeP &tb, const ExpP &a, const ExpP &b) {
    auto ra = freeRoles(ta), rb = freeRoles(tb);
    if (ra.size() != 1) {
      D.error(DiagCode::TypeMismatch, a->span,
              "Operand of '" + op + "' must be located at exactly one role, found '" + show(ta) + "'.");
      return nullptr;
    }
    auto role = *ra.begin();
    bool nullB = reduce(tb)->tag == TypeTag::Null && (reduce(tb)->roles.empty());
    if (!nullB && ra != rb) {
      TypeP expect = tb;
      if (rb.size() == 1) {
        Subst s;
        s.roles[*rb.begin()] = tRole(role);
        expect = subst(tb, s);
      }
      mismatch(b->span, expect, tb);
      return nullptr;
    }
    auto ha = headName(ta), hb = headName(tb);
    int na = numericRank(ta), nb = numericRank(tb);
    auto numeric = [&]() -> TypeP {
      if (!na || !nb) {
        mismatch(na ? b->span : a->span, located("Integer", role), na ? tb : ta);
        return nullptr;
      }
      return na >= nb ? ta : tb;
    };
    if (op == "+") {
      if (ha == "String" || hb == "String") return located("String", role);
      return numeric();
    }
    if (op == "-" || op == "*" || op == "/" || op == "%") return numeric();
    if (op == "<" || op == ">" || op == "<=" || op == ">=") {
      if (!numeric()) return nullptr;
      return located("Boolean", role);
    }
    if (op == "==" || op == "!=") return located("Boolean", role);
    if (op == "&&" || op == "||" || op == "&" || op == "|") {
      if (ha != "Boolean") {
        mismatch(a->span, located("Boolean", role), ta);
        return nullptr;
      }
      if (hb != "Boolean") {
        mismatch(b->span, located("Boolean", role), tb);
        return nullptr;
      }
      return located("Boolean", role);
    }
    D.error(DiagCode::TypeMismatch, a->span, "Unsupported operator '" + op + "'.");
    return nullptr;
  }

  void finish(const ExpP &e, const TypeP &t) {
    e->type = t;
    std::set<std::string> rs = t ? freeRoles(t) : std::set<std::string>{};
    if (t && t->tag == TypeTag::Null) rs.insert(t->roles.begin(), t->roles.end());
    for (auto &r : e->roles)
      if (e->kind == ExpKind::ClassRef || e->kind == ExpKind::New || e->kind == ExpKind::Literal) rs.insert(r.name);
    auto add = [&](const ExpP &s) {
      if (s) rs.insert(s->rolesOf.begin(), s->rolesOf.end());
    };
    rs.insert(e->keepRoles.begin(), e->keepRoles.end());
    add(e->target);
    add(e->lhs);
    add(e->rhs);
    for (auto &a : e->args) add(a);
    e->rolesOf = rs;
  }

  bool rolesInScope(const std::vector<RoleRef> &rs, const Ctx &x) {
    for (auto &r : rs)
      if (!x.scope.roles.count(r.name)) {
        D.error(DiagCode::UnknownName, r.span, "Cannot resolve role '" + r.name + "'.");
        return false;
      }
    return true;
  }

  TypeP synth(const ExpP &e, Ctx &x) {
    if (!e) return nullptr;
    auto t = synthInner(e, x);
    finish(e, t);
    return t;
  }

  TypeP synthInner(const ExpP &e, Ctx &x) {
    TypeOps ops(T, x.vars);
    switch (e->kind) {
      case ExpKind::Literal: {
        if (e->roleList) {
          D.error(DiagCode::SyntaxError, e->span, "Role lists are only allowed in argument positions.");
          return nullptr;
        }
        if (!rolesInScope(e->roles, x)) return nullptr;
        if (e->lit == LitKind::Null) {
          std::vector<std::string> rs;
          for (auto &r : e->roles) rs.push_back(r.name);
          return tNull(rs);
        }
        if (e->roles.size() != 1) {
          D.error(DiagCode::TypeMismatch, e->span, "Literal must be located at exactly one role.");
          return nullptr;
        }
        auto role = e->roles[0].name;
        switch (e->lit) {
          case LitKind::Int:
            return located(!e->text.empty() && (e->text.back() == 'L' || e->text.back() == 'l') ? "Long" : "Integer",
                           role);
          case LitKind::Double: return located("Double", role);
          case LitKind::String: return located("String", role);
          case LitKind::Bool: return located("Boolean", role);
          case LitKind::Char: return located("Char", role);
          case LitKind::Null: break;
        }
        return nullptr;
      }
      case ExpKind::UnitLit: return tSym("Unit", 0);
      case ExpKind::This:
        if (x.isStatic) {
          D.error(DiagCode::UnknownName, e->span, "'this' cannot be used in a static method.");
          return nullptr;
        }
        return x.cls->selfType();
      case ExpKind::Name: {
        if (auto l = lookupLocal(x, e->name)) {
          e->res = NameRes::Local;
          return *l;
        }
        for (auto &in : ops.closure(x.cls->selfType()))
          for (auto &f : in.cls->fields)
            if (f.name == e->name) {
              if (x.isStatic && !f.isStatic) {
                D.error(DiagCode::UnknownName, e->span, "Field '" + f.name + "' needs an instance.");
                return nullptr;
              }
              e->res = NameRes::Field;
              return f.type ? reduce(subst(f.type, in.subst)) : nullptr;
            }
        if (T.find(e->name)) {
          D.error(DiagCode::KindError, e->span, "Class '" + e->name + "' must be given its roles here.");
          return nullptr;
        }
        D.error(DiagCode::UnknownName, e->span, "Cannot resolve symbol '" + e->name + "'.");
        return nullptr;
      }
      case ExpKind::ClassRef: return classRef(e, x);
      case ExpKind::Field: return fieldAccess(e, x);
      case ExpKind::Call: return call(e, x);
      case ExpKind::New: return newExp(e, x);
      case ExpKind::Binary: {
        if (!e->lhs) {
          auto t = synth(e->rhs, x);
          if (!t) return nullptr;
          auto rs = freeRoles(t);
          if (e->op == "!") {
            if (!isBoolAtOne(t)) {
              D.error(DiagCode::TypeMismatch, e->rhs->span, "Operand of '!' must be a Boolean at one role.");
              return nullptr;
            }
            return t;
          }
          if (!numericRank(t)) {
            D.error(DiagCode::TypeMismatch, e->rhs->span, "Operand of '" + e->op + "' must be numeric.");
            return nullptr;
          }
          return t;
        }
        auto a = synth(e->lhs, x);
        auto b = synth(e->rhs, x);
        if (!a || !b) return nullptr;
        return binaryType(e->op, a, b, e->lhs, e->rhs);
      }
      case ExpKind::Chain:
        D.error(DiagCode::SyntaxError, e->span, "Unexpected forward chain.");
        return nullptr;
    }
    return nullptr;
  }

  TypeP classRef(const ExpP &e, Ctx &x) {
    auto *c = T.find(e->name);
    if (!c) {
      D.error(DiagCode::UnknownName, e->span, "Cannot resolve class '" + e->name + "'.");
      return nullptr;
    }
    if (!rolesInScope(e->roles, x)) return nullptr;
    if (e->roles.size() != c->roles.size()) {
      D.error(DiagCode::KindError, e->span,
              "Class '" + c->name + "' expects " + std::to_string(c->roles.size()) + " role(s) but got " +
                  std::to_string(e->roles.size()) + ".");
      return nullptr;
    }
    std::vector<std::string> rs;
    for (auto &r : e->roles) rs.push_back(r.name);
    std::vector<TypeP> targs;
    if (!e->classTypeArgs.empty()) {
      if (e->classTypeArgs.size() != c->ftps.size()) {
        D.error(DiagCode::KindError, e->span, "Wrong number of type arguments for '" + c->name + "'.");
        return nullptr;
      }
      for (size_t i = 0; i < c->ftps.size(); ++i) {
        auto a = denoteArg(e->classTypeArgs[i], static_cast<int>(c->ftps[i].roles.size()), x.scope, nullptr);
        if (!a) return nullptr;
        targs.push_back(a);
      }
    } else {
      for (auto &f : c->ftps) targs.push_back(tVar(f.name));
    }
    e->cls = c;
    return c->applied(rs, targs);
  }

  TypeP fieldAccess(const ExpP &e, Ctx &x) {
    TypeOps ops(T, x.vars);
    if (e->target->kind == ExpKind::ClassRef) {
      auto ct = synth(e->target, x);
      if (!ct) return nullptr;
      auto *c = e->target->cls;
      if (c->isEnum()) {
        if (!c->hasCase(e->name)) {
          D.error(DiagCode::UnknownName, e->span, "'" + e->name + "' is not a case of '" + c->name + "'.");
          return nullptr;
        }
        e->cls = c;
        return ct;
      }
      for (auto &in : ops.closure(ct))
        for (auto &f : in.cls->fields)
          if (f.name == e->name && f.isStatic) {
            e->cls = in.cls;
            return f.type ? reduce(subst(f.type, in.subst)) : nullptr;
          }
      D.error(DiagCode::UnknownName, e->span, "Cannot resolve static field '" + e->name + "' in '" + c->name + "'.");
      return nullptr;
    }
    auto tt = synth(e->target, x);
    if (!tt) return nullptr;
    for (auto &in : ops.closure(tt))
      for (auto &f : in.cls->fields)
        if (f.name == e->name) return f.type ? reduce(subst(f.type, in.subst)) : nullptr;
    D.error(DiagCode::UnknownName, e->span, "Cannot resolve field '" + e->name + "' in '" + show(tt) + "'.");
    return nullptr;
  }

  std::optional<Cand> instantiate(const MethodInfo &m, const Instance &in, const std::vector<TypeP> &explicitArgs,
                                  const std::vector<TypeP> &argTypes, const TypeOps &ops) {
    Subst ren;
    std::vector<std::string> fresh;
    for (auto &f : m.ftps) {
      fresh.push_back(freshName(f.name));
      ren.vars[f.name] = tVar(fresh.back());
    }
    auto inst = [&](const TypeP &t) { return t ? reduce(subst(subst(t, ren), in.subst)) : nullptr; };
    Cand c;
    c.m = &m;
    for (auto &p : m.params) {
      if (!p) return std::nullopt;
      c.params.push_back(inst(p));
    }
    if (!m.ret) return std::nullopt;
    c.ret = inst(m.ret);
    Subst ms;
    if (!explicitArgs.empty()) {
      if (explicitArgs.size() != m.ftps.size()) return std::nullopt;
      for (size_t i = 0; i < fresh.size(); ++i) ms.vars[fresh[i]] = explicitArgs[i];
    } else {
      for (size_t i = 0; i < fresh.size(); ++i) {
        size_t k = m.ftps[i].roles.size();
        for (size_t j = 0; j < c.params.size() && j < argTypes.size(); ++j) {
          auto sp = spine(c.params[j]);
          if (!sp.head || sp.head->tag != TypeTag::Var || sp.head->name != fresh[i] || sp.args.size() != k) continue;
          auto a = argTypes[j] ? reduce(argTypes[j]) : nullptr;
          if (!a || a->tag == TypeTag::Null) continue;
          std::vector<std::string> ys;
          Subst rr;
          for (size_t q = 0; q < k; ++q) {
            ys.push_back(freshName("Y"));
            if (sp.args[q]->tag == TypeTag::Role) rr.roles[sp.args[q]->name] = tRole(ys.back());
          }
          auto body = subst(a, rr);
          for (auto it = ys.rbegin(); it != ys.rend(); ++it) body = tAbs(*it, roleKind(), body);
          ms.vars[fresh[i]] = reduce(body);
          break;
        }
        if (!ms.vars.count(fresh[i])) return std::nullopt;
      }
    }
    if (!ms.empty()) {
      for (auto &p : c.params) p = reduce(subst(p, ms));
      c.ret = reduce(subst(c.ret, ms));
    }
    // bounds, checked at fresh roles
    for (size_t i = 0; i < m.ftps.size(); ++i) {
      auto &f = m.ftps[i];
      if (f.bounds.empty()) continue;
      Subst pre = ren;
      std::vector<TypeP> zs;
      for (auto &r : f.roles) {
        auto z = tRole(freshName("Z"));
        pre.roles[r] = z;
        zs.push_back(z);
      }
      auto lhs = reduce(tApps(ms.vars[fresh[i]], zs));
      for (auto &b : f.bounds) {
        auto bt = reduce(subst(subst(subst(b, pre), in.subst), ms));
        if (!ops.isSubtype(lhs, bt)) return std::nullopt;
      }
    }
    return c;
  }

  // Candidate search and the most specific choice.
  const Cand *pick(std::vector<Cand> &cands, const std::string &name, const std::vector<TypeP> &argTypes,
                   const ExpP &site, const TypeOps &ops, size_t nameMatches, const std::vector<ExpP> &args) {
    std::vector<Cand> ok;
    for (auto &c : cands) {
      bool fits = c.params.size() == argTypes.size();
      for (size_t i = 0; fits && i < argTypes.size(); ++i) fits = ops.isAssignable(argTypes[i], c.params[i]);
      if (!fits) continue;
      bool dup = false;
      for (auto &o : ok) {
        bool same = o.params.size() == c.params.size();
        for (size_t i = 0; same && i < c.params.size(); ++i) same = alphaEq(o.params[i], c.params[i]);
        if (same) dup = true;
      }
      if (!dup) ok.push_back(c);
    }
    if (ok.empty()) {
      if (nameMatches == 0) {
        D.error(DiagCode::UnknownName, site->span, "Cannot resolve method '" + name + "'.");
      } else if (cands.size() == 1 && cands[0].params.size() == argTypes.size()) {
        for (size_t i = 0; i < argTypes.size(); ++i)
          if (!ops.isAssignable(argTypes[i], cands[0].params[i])) {
            mismatch(args[i]->span, cands[0].params[i], argTypes[i]);
            break;
          }
      } else {
        std::string ts;
        for (size_t i = 0; i < argTypes.size(); ++i) ts += (i ? ", " : "") + show(argTypes[i]);
        D.error(DiagCode::NoApplicableMethod, site->span,
                "No applicable method '" + name + "' for arguments (" + ts + ").");
      }
      return nullptr;
    }
    auto leq = [&](const Cand &a, const Cand &b) {
      for (size_t i = 0; i < a.params.size(); ++i)
        if (!ops.isSubtype(a.params[i], b.params[i])) return false;
      return true;
    };
    std::vector<size_t> minima;
    for (size_t i = 0; i < ok.size(); ++i) {
      bool min = true;
      for (size_t j = 0; j < ok.size(); ++j)
        if (i != j && !leq(ok[i], ok[j])) min = false;
      if (min) minima.push_back(i);
    }
    if (minima.size() != 1) {
      auto sig = [&](const Cand &c) {
        std::string s = name + "(";
        for (size_t i = 0; i < c.params.size(); ++i) s += (i ? ", " : "") + show(c.params[i]);
        return s + ")";
      };
      D.error(DiagCode::AmbiguousCall, site->span,
              "Ambiguous call to '" + name + "': '" + sig(ok[0]) + "' and '" + sig(ok[1]) + "' both match.");
      return nullptr;
    }
    cands = {ok[minima[0]]};
    return &cands[0];
  }

  std::vector<TypeP> explicitTypeArgs(const ExpP &e, const std::vector<Instance> &insts, Ctx &x, bool &okOut) {
    std::vector<TypeP> out;
    okOut = true;
    if (e->typeArgs.empty()) return out;
    // arity of the method type parameters decides the constructor shape
    const MethodInfo *any = nullptr;
    for (auto &in : insts)
      for (auto &m : in.cls->methods)
        if (m->name == e->name && m->ftps.size() == e->typeArgs.size() && !any) any = m.get();
    if (!any) {
      D.error(DiagCode::NoApplicableMethod, e->span, "No method '" + e->name + "' takes these type arguments.");
      okOut = false;
      return out;
    }
    for (size_t i = 0; i < e->typeArgs.size(); ++i) {
      auto a = denoteArg(e->typeArgs[i], static_cast<int>(any->ftps[i].roles.size()), x.scope, nullptr);
      if (!a) {
        okOut = false;
        return out;
      }
      out.push_back(a);
    }
    return out;
  }

  std::set<std::string> sigRoles(const Cand &c) {
    std::set<std::string> rs = freeRoles(c.ret);
    for (auto &p : c.params)
      for (auto &r : freeRoles(p)) rs.insert(r);
    return rs;
  }

  TypeP call(const ExpP &e, Ctx &x) {
    TypeOps ops(T, x.vars);
    // Unit.id(args)
    if (e->target && e->target->kind == ExpKind::Name && e->target->name == "Unit" && e->name == "id" &&
        !lookupLocal(x, "Unit")) {
      for (auto &a : e->args) synth(a, x);
      e->target->type = tSym("Unit", 0);
      return tSym("Unit", 0);
    }
    std::vector<TypeP> argTypes;
    bool argsOk = true;
    // receiver
    std::vector<Instance> insts;
    bool staticOnly = false;
    std::set<std::string> recvRoles;
    enum { Unqualified, Static, Instance_, Super } mode = Unqualified;
    if (!e->target && e->name == "super") {
      mode = Super;
      auto *d = x.cls->decl.get();
      if (!x.isCtor || d->extends.empty() || x.cls->supers.empty()) {
        D.error(DiagCode::UnknownName, e->span, "'super' is only allowed in constructors of subclasses.");
        return nullptr;
      }
      auto in = ops.instanceOf(x.cls->supers.front());
      if (!in) return nullptr;
      insts.push_back(*in);
    } else if (!e->target) {
      insts = ops.closure(x.cls->selfType());
      staticOnly = x.isStatic;
    } else if (e->target->kind == ExpKind::ClassRef) {
      mode = Static;
      auto ct = synth(e->target, x);
      if (!ct) return nullptr;
      insts = ops.closure(ct);
      staticOnly = true;
      for (auto &r : e->target->roles) recvRoles.insert(r.name);
    } else {
      mode = Instance_;
      auto tt = synth(e->target, x);
      if (!tt) return nullptr;
      insts = ops.closure(tt);
      recvRoles = freeRoles(tt);
      if (insts.empty()) {
        D.error(DiagCode::UnknownName, e->span, "Cannot call '" + e->name + "' on '" + show(tt) + "'.");
        return nullptr;
      }
    }
    for (auto &a : e->args) {
      auto t = synth(a, x);
      if (!t) argsOk = false;
      argTypes.push_back(t);
    }
    if (!argsOk) return nullptr;
    bool taOk = true;
    auto explicitArgs = mode == Super ? std::vector<TypeP>{} : explicitTypeArgs(e, insts, x, taOk);
    if (!taOk) return nullptr;
    std::vector<Cand> cands;
    size_t nameMatches = 0;
    for (auto &in : insts) {
      auto &pool = mode == Super ? in.cls->ctors : in.cls->methods;
      for (auto &m : pool) {
        if (mode != Super && m->name != e->name) continue;
        if (staticOnly && !m->isStatic) continue;
        ++nameMatches;
        if (m->params.size() != argTypes.size()) continue;
        if (auto c = instantiate(*m, in, explicitArgs, argTypes, ops)) cands.push_back(*c);
      }
      if (mode == Super) break;
    }
    if (mode == Super && nameMatches == 0 && argTypes.empty()) {
      e->cls = insts.front().cls;
      e->keepRoles = std::set<std::string>(x.cls->roles.begin(), x.cls->roles.end());
      return tVoid();
    }
    if (mode == Super) nameMatches = std::max<size_t>(nameMatches, 1);
    auto *c = pick(cands, e->name, argTypes, e, ops, nameMatches, e->args);
    if (!c) return nullptr;
    e->method = c->m;
    if (mode == Super) e->cls = c->m->owner;
    if (mode == Static) e->cls = e->target->cls;
    if (c->m->selection) {
      for (auto &a : e->args)
        if (!(a->kind == ExpKind::Field && a->target && a->target->kind == ExpKind::ClassRef && a->cls &&
              a->cls->isEnum())) {
          D.error(DiagCode::BadSelectionAnnotation, a->span,
                  "Selection label must be an enum case literal such as 'Choice@A.GO'.");
          return nullptr;
        }
    }
    // roles at which the call keeps its structure after projection
    std::set<std::string> keep = sigRoles(*c);
    switch (mode) {
      case Super: keep = std::set<std::string>(x.cls->roles.begin(), x.cls->roles.end()); break;
      case Static: keep = recvRoles; break;
      case Instance_:
        if (!c->m->isStatic || keep.empty()) keep.insert(recvRoles.begin(), recvRoles.end());
        break;
      case Unqualified:
        if (!c->m->isStatic || keep.empty()) keep.insert(x.cls->roles.begin(), x.cls->roles.end());
        break;
    }
    e->keepRoles = keep;
    return c->ret;
  }

  TypeP newExp(const ExpP &e, Ctx &x) {
    TypeOps ops(T, x.vars);
    auto *c = T.find(e->name);
    if (!c) {
      D.error(DiagCode::UnknownName, e->span, "Cannot resolve class '" + e->name + "'.");
      return nullptr;
    }
    if (!rolesInScope(e->roles, x)) return nullptr;
    if (e->roles.size() != c->roles.size()) {
      D.error(DiagCode::KindError, e->span,
              "Class '" + c->name + "' expects " + std::to_string(c->roles.size()) + " role(s) but got " +
                  std::to_string(e->roles.size()) + ".");
      return nullptr;
    }
    if (c->isAbstract() || c->isEnum()) {
      D.error(DiagCode::TypeMismatch, e->span, "'" + c->name + "' cannot be instantiated.");
      return nullptr;
    }
    if (e->classTypeArgs.size() != c->ftps.size()) {
      D.error(DiagCode::KindError, e->span, "Wrong number of type arguments for '" + c->name + "'.");
      return nullptr;
    }
    std::vector<std::string> rs;
    for (auto &r : e->roles) rs.push_back(r.name);
    std::vector<TypeP> targs;
    for (size_t i = 0; i < c->ftps.size(); ++i) {
      auto a = denoteArg(e->classTypeArgs[i], static_cast<int>(c->ftps[i].roles.size()), x.scope, nullptr);
      if (!a) return nullptr;
      targs.push_back(a);
    }
    auto t = reduce(c->applied(rs, targs));
    if (!kindCheck(t, x.vars, e->span, nullptr)) return nullptr;
    std::vector<TypeP> argTypes;
    for (auto &a : e->args) {
      auto at = synth(a, x);
      if (!at) return nullptr;
      argTypes.push_back(at);
    }
    e->cls = c;
    e->keepRoles = std::set<std::string>(rs.begin(), rs.end());
    if (c->ctors.empty()) {
      if (!argTypes.empty()) {
        D.error(DiagCode::NoApplicableMethod, e->span, "'" + c->name + "' has only the default constructor.");
        return nullptr;
      }
      return t;
    }
    auto in = ops.instanceOf(t);
    std::vector<Cand> cands;
    for (auto &m : c->ctors)
      if (m->params.size() == argTypes.size())
        if (auto cd = instantiate(*m, *in, {}, argTypes, ops)) cands.push_back(*cd);
    auto *cd = pick(cands, c->name, argTypes, e, ops, c->ctors.size(), e->args);
    if (!cd) return nullptr;
    e->method = cd->m;
    return t;
  }
};

}  // namespace

CheckedProgram checkProgram(Program user, DiagnosticSink &diags) {
  CheckedProgram out;
  out.table = std::make_shared<SymbolTable>();
  std::set<std::string> userNames;
  for (auto &d : user.decls) {
    d->prelude = false;
    userNames.insert(d->name);
    out.program.decls.push_back(d);
  }
  for (auto &d : preludeProgram().decls)
    if (!userNames.count(d->name)) out.program.decls.push_back(d);
  size_t before = diags.errorCount();
  Checker ck(*out.table, diags);
  ck.run(out.program);
  out.ok = diags.errorCount() == before;
  return out;
}

CheckedProgram checkFiles(const std::vector<SourceRef> &files, DiagnosticSink &diags) {
  auto p = parseProgram(files, diags);
  if (diags.hasErrors()) {
    CheckedProgram out;
    out.program = std::move(p);
    return out;
  }
  return checkProgram(std::move(p), diags);
}

CheckedProgram checkText(const std::string &name, const std::string &text, DiagnosticSink &diags) {
  return checkFiles({std::make_shared<SourceFile>(name, text)}, diags);
}

}  // namespace choral
