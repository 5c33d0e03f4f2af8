#include "choral/projector.hpp"

#include <map>

#include "choral/printer.hpp"
#include "choral/tproj.hpp"
#include "choral/types.hpp"

namespace choral {

// ---------------------------------------------------------------- normaliser

bool isNoop(const ExpP &e) {
  if (!e) return true;
  switch (e->kind) {
    case ExpKind::UnitLit:
    case ExpKind::Name:
    case ExpKind::This:
    case ExpKind::Literal:
    case ExpKind::ClassRef: return true;
    case ExpKind::Field: return isNoop(e->target);
    default: return false;
  }
}

ExpP normalizeExp(const ExpP &e) {
  if (!e) return e;
  switch (e->kind) {
    case ExpKind::Call: {
      std::vector<ExpP> args;
      for (auto &a : e->args) args.push_back(normalizeExp(a));
      if (isUnitCall(e)) {
        std::vector<ExpP> kept;
        for (auto &a : args)
          if (!isNoop(a)) kept.push_back(a);
        if (kept.empty()) return mkUnit(e->span);
        if (kept.size() == 1) return kept[0];
        return mkUnitCall(kept, e->span);
      }
      auto c = std::make_shared<Exp>(*e);
      c->target = normalizeExp(e->target);
      c->args = std::move(args);
      return c;
    }
    case ExpKind::New: {
      auto c = std::make_shared<Exp>(*e);
      for (auto &a : c->args) a = normalizeExp(a);
      return c;
    }
    case ExpKind::Binary: {
      auto c = std::make_shared<Exp>(*e);
      c->lhs = normalizeExp(e->lhs);
      c->rhs = normalizeExp(e->rhs);
      return c;
    }
    case ExpKind::Field: {
      auto c = std::make_shared<Exp>(*e);
      c->target = normalizeExp(e->target);
      return c;
    }
    default: return e;
  }
}

StmP normalizeStm(const StmP &s) {
  if (!s) return nullptr;
  auto next = normalizeStm(s->next);
  auto c = std::make_shared<Stm>(*s);
  c->next = next;
  switch (s->kind) {
    case StmKind::ExpStm: {
      c->exp = normalizeExp(s->exp);
      if (isNoop(c->exp)) return next;
      break;
    }
    case StmKind::Return:
    case StmKind::Throw:
    case StmKind::VarDecl: c->exp = normalizeExp(s->exp); break;
    case StmKind::Assign:
      c->exp = normalizeExp(s->exp);
      c->rhs = normalizeExp(s->rhs);
      break;
    case StmKind::If:
      c->exp = normalizeExp(s->exp);
      c->thenS = normalizeStm(s->thenS);
      c->elseS = normalizeStm(s->elseS);
      break;
    case StmKind::Block:
      c->body = normalizeStm(s->body);
      if (!c->body) return next;
      break;
    case StmKind::Switch:
      c->exp = normalizeExp(s->exp);
      for (auto &k : c->cases) k.body = normalizeStm(k.body);
      c->defaultBody = normalizeStm(s->defaultBody);
      break;
    case StmKind::Try:
      c->body = normalizeStm(s->body);
      for (auto &k : c->catches) k.body = normalizeStm(k.body);
      break;
  }
  return c;
}

// ---------------------------------------------------------------- merging

std::optional<ExpP> mergeExp(const ExpP &a, const ExpP &b) {
  if (!a || !b) {
    if (a == b) return a;
    return std::nullopt;
  }
  if (equalExp(a, b)) return a;
  return std::nullopt;
}

std::optional<StmP> merge(const StmP &a, const StmP &b, MergeConflict *conflict) {
  auto fail = [&]() -> std::optional<StmP> {
    if (conflict && !conflict->left && !conflict->right) {
      conflict->left = a;
      conflict->right = b;
    }
    return std::nullopt;
  };
  if (!a && !b) return StmP{};
  if (!a || !b || a->kind != b->kind) return fail();
  auto out = std::make_shared<Stm>(*a);
  auto sub = [&](const StmP &x, const StmP &y, StmP &dst) {
    auto m = merge(x, y, conflict);
    if (!m) return false;
    dst = *m;
    return true;
  };
  auto ex = [&](const ExpP &x, const ExpP &y, ExpP &dst) {
    auto m = mergeExp(x, y);
    if (!m) return false;
    dst = *m;
    return true;
  };
  switch (a->kind) {
    case StmKind::Return:
    case StmKind::ExpStm:
    case StmKind::Throw:
      if (!ex(a->exp, b->exp, out->exp)) return fail();
      break;
    case StmKind::VarDecl:
      if (a->name != b->name || !equalTE(a->te, b->te) || !ex(a->exp, b->exp, out->exp)) return fail();
      break;
    case StmKind::Assign:
      if (a->op != b->op || !ex(a->exp, b->exp, out->exp) || !ex(a->rhs, b->rhs, out->rhs)) return fail();
      break;
    case StmKind::If:
      if (!ex(a->exp, b->exp, out->exp)) return fail();
      if (!sub(a->thenS, b->thenS, out->thenS) || !sub(a->elseS, b->elseS, out->elseS)) return std::nullopt;
      break;
    case StmKind::Block:
      if (!sub(a->body, b->body, out->body)) return std::nullopt;
      break;
    case StmKind::Switch: {
      if (!ex(a->exp, b->exp, out->exp)) return fail();
      out->cases.clear();
      for (auto &ka : a->cases) {
        SwitchCase k = ka;
        for (auto &kb : b->cases)
          if (kb.label == ka.label && !sub(ka.body, kb.body, k.body)) return std::nullopt;
        out->cases.push_back(k);
      }
      for (auto &kb : b->cases) {
        bool shared = false;
        for (auto &ka : a->cases) shared = shared || ka.label == kb.label;
        if (!shared) out->cases.push_back(kb);
      }
      if (a->hasDefault != b->hasDefault) return fail();
      if (a->hasDefault && !sub(a->defaultBody, b->defaultBody, out->defaultBody)) return std::nullopt;
      out->defaultThrow = a->defaultThrow && b->defaultThrow;
      break;
    }
    case StmKind::Try: {
      if (a->catches.size() != b->catches.size()) return fail();
      if (!sub(a->body, b->body, out->body)) return std::nullopt;
      for (size_t i = 0; i < a->catches.size(); ++i) {
        if (!equalTE(a->catches[i].te, b->catches[i].te) || a->catches[i].name != b->catches[i].name) return fail();
        if (!sub(a->catches[i].body, b->catches[i].body, out->catches[i].body)) return std::nullopt;
      }
      break;
    }
  }
  if (!sub(a->next, b->next, out->next)) return std::nullopt;
  return out;
}

// ---------------------------------------------------------------- projection

namespace {

bool hasRole(const std::set<std::string> &rs, const std::string &r) { return rs.count(r) > 0; }

std::set<std::string> typeRoles(const ExpP &e) {
  if (!e || !e->type) return {};
  auto rs = freeRoles(e->type);
  if (e->type->tag == TypeTag::Null) rs.insert(e->type->roles.begin(), e->type->roles.end());
  return rs;
}

std::set<std::string> teRoles(const TypeExprP &te) {
  std::set<std::string> rs;
  if (te)
    for (auto &r : te->roles) rs.insert(r.name);
  return rs;
}

class Projector {
 public:
  Projector(const CheckedProgram &cp, DiagnosticSink &d, std::string role, std::string choreo)
      : cp_(cp), D(d), A(std::move(role)), choreo_(std::move(choreo)) {}

  DeclP decl(const Decl &d, const ProjectOptions &opts) {
    auto out = std::make_shared<Decl>();
    out->kind = d.kind;
    out->annotations = d.annotations;
    out->modifiers = d.modifiers;
    out->span = d.span;
    out->nameSpan = d.nameSpan;
    auto rn = d.roleNames();
    size_t idx = 0;
    for (size_t i = 0; i < rn.size(); ++i)
      if (rn[i] == A) idx = i;
    out->name = generatedName(d.name, rn, idx);
    genName_ = out->name;
    log_ = opts.mergeLog;
    if (opts.annotate)
      out->annotations.push_back(Annotation{"Projected", {{"choreography", choreo_}, {"role", A}}, {}});
    if (d.kind == DeclKind::Enum) {
      out->enumCases = d.enumCases;
      return out;
    }
    pushFtps(d.ftps);
    out->ftps = ftps(d.ftps);
    auto supers = [&](const std::vector<TypeExprP> &in, std::vector<TypeExprP> &dst) {
      for (auto &t : in)
        if (hasRole(teRoles(t), A)) dst.push_back(te(t));
    };
    supers(d.extends, out->extends);
    supers(d.implements, out->implements);
    for (auto &f : d.fields)
      if (hasRole(teRoles(f.te), A)) {
        Field g = f;
        g.te = te(f.te);
        out->fields.push_back(g);
      }
    for (auto &c : d.ctors) out->ctors.push_back(method(*c, true));
    for (auto &m : d.methods) out->methods.push_back(method(*m, false));
    scopes_.pop_back();
    return out;
  }

 private:
  const CheckedProgram &cp_;
  DiagnosticSink &D;
  std::string A;
  std::string choreo_;
  std::string genName_;
  std::vector<std::vector<StmP>> *log_ = nullptr;
  std::vector<std::map<std::string, std::vector<std::string>>> scopes_;

  std::vector<std::string> roleNames(const std::string &n) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return f->second;
    }
    if (auto *c = cp_.find(n)) return c->roles;
    return {};
  }

  TypeExprP te(const TypeExprP &t) const {
    return projectTE(t, A, [this](const std::string &n) { return roleNames(n); });
  }

  TypeExprP teAt(const TypeExprP &t, const std::string &r) const {
    return projectTE(t, r, [this](const std::string &n) { return roleNames(n); });
  }

  void pushFtps(const std::vector<FTP> &fs) {
    scopes_.emplace_back();
    for (auto &f : fs) {
      std::vector<std::string> rs;
      for (auto &r : f.roles) rs.push_back(r.name);
      scopes_.back()[f.name] = rs;
    }
  }

  std::vector<FTP> ftps(const std::vector<FTP> &fs) const {
    std::vector<FTP> out;
    for (auto &f : fs) {
      if (f.roles.size() <= 1) {
        FTP g{f.name, {}, {}, f.span};
        std::string r = f.roles.empty() ? A : f.roles[0].name;
        for (auto &b : f.bounds) g.bounds.push_back(teAt(b, r));
        out.push_back(g);
        continue;
      }
      for (auto &r : f.roles) {
        FTP g{f.name + "_" + r.name, {}, {}, f.span};
        for (auto &b : f.bounds)
          if (hasRole(teRoles(b), r.name)) g.bounds.push_back(teAt(b, r.name));
        out.push_back(g);
      }
    }
    return out;
  }

  MethodP method(const Method &m, bool ctor) {
    auto out = std::make_shared<Method>(m);
    pushFtps(m.ftps);
    out->ftps = ftps(m.ftps);
    if (m.ret) out->ret = te(m.ret);
    if (ctor) out->name = genName_;
    for (auto &p : out->params) p.te = te(p.te);
    if (m.hasBody) out->body = normalizeStm(stm(m.body));
    scopes_.pop_back();
    return out;
  }

  // ------------------------------------------------------------ expressions

  ExpP unitOf(std::vector<ExpP> args, const Span &s) { return mkUnitCall(std::move(args), s); }

  std::vector<ExpP> projArgs(const std::vector<ExpP> &as) {
    std::vector<ExpP> out;
    for (auto &a : as) out.push_back(exp(a));
    return out;
  }

  std::vector<TypeExprP> erased(const std::vector<TypeExprP> &ts) {
    std::vector<TypeExprP> out;
    for (auto &t : ts) out.push_back(eraseTE(t));
    return out;
  }

  ExpP classRef(const ExpP &e) {
    auto rn = e->cls ? e->cls->roles : roleNames(e->name);
    size_t idx = 0;
    for (size_t i = 0; i < e->roles.size(); ++i)
      if (e->roles[i].name == A) idx = i;
    auto out = mkClassRef(generatedName(e->name, rn, idx), {}, e->span);
    out->classTypeArgs = erased(e->classTypeArgs);
    return out;
  }

  ExpP exp(const ExpP &e) {
    if (!e) return e;
    switch (e->kind) {
      case ExpKind::Literal: {
        for (auto &r : e->roles)
          if (r.name == A) return mkLit(e->lit, e->text, {}, e->span);
        return mkUnit(e->span);
      }
      case ExpKind::UnitLit: return mkUnit(e->span);
      case ExpKind::This: {
        auto t = std::make_shared<Exp>();
        t->kind = ExpKind::This;
        t->span = e->span;
        return t;
      }
      case ExpKind::Name:
        if (hasRole(typeRoles(e), A)) return mkName(e->name, e->span);
        return mkUnit(e->span);
      case ExpKind::ClassRef:
        for (auto &r : e->roles)
          if (r.name == A) return classRef(e);
        return mkUnit(e->span);
      case ExpKind::Field: {
        if (e->target && e->target->kind == ExpKind::ClassRef) {
          if (hasRole(typeRoles(e), A)) return mkField(classRef(e->target), e->name, e->span);
          return mkUnit(e->span);
        }
        if (hasRole(typeRoles(e), A)) return mkField(exp(e->target), e->name, e->span);
        return unitOf({exp(e->target)}, e->span);
      }
      case ExpKind::Call: {
        if (isUnitCall(e)) return unitOf(projArgs(e->args), e->span);
        auto args = projArgs(e->args);
        if (hasRole(e->keepRoles, A)) {
          ExpP target;
          if (e->target) target = e->target->kind == ExpKind::ClassRef ? classRef(e->target) : exp(e->target);
          return mkCall(target, e->name, args, erased(e->typeArgs), e->span);
        }
        if (e->target && e->target->kind != ExpKind::ClassRef) args.insert(args.begin(), exp(e->target));
        return unitOf(args, e->span);
      }
      case ExpKind::New: {
        auto args = projArgs(e->args);
        for (size_t i = 0; i < e->roles.size(); ++i)
          if (e->roles[i].name == A) {
            auto rn = e->cls ? e->cls->roles : roleNames(e->name);
            auto n = std::make_shared<Exp>();
            n->kind = ExpKind::New;
            n->span = e->span;
            n->name = generatedName(e->name, rn, i);
            n->typeArgs = erased(e->typeArgs);
            n->classTypeArgs = erased(e->classTypeArgs);
            n->args = args;
            return n;
          }
        return unitOf(args, e->span);
      }
      case ExpKind::Binary: {
        if (hasRole(typeRoles(e), A)) {
          auto b = std::make_shared<Exp>();
          b->kind = ExpKind::Binary;
          b->span = e->span;
          b->op = e->op;
          b->lhs = e->lhs ? exp(e->lhs) : nullptr;
          b->rhs = exp(e->rhs);
          return b;
        }
        std::vector<ExpP> args;
        if (e->lhs) args.push_back(exp(e->lhs));
        args.push_back(exp(e->rhs));
        return unitOf(args, e->span);
      }
      case ExpKind::Chain: return mkUnit(e->span);
    }
    return mkUnit(e->span);
  }

  // ------------------------------------------------------------ statements

  bool isSelection(const ExpP &e) const {
    if (!e || e->kind != ExpKind::Call || !e->method || !e->method->selection) return false;
    auto rs = typeRoles(e);
    return rs.size() == 1 && *rs.begin() == A && e->args.size() == 1 && e->args[0]->kind == ExpKind::Field;
  }

  StmP throwUnexpected(const Span &s) {
    auto t = std::make_shared<Stm>();
    t->kind = StmKind::Throw;
    t->span = s;
    auto n = std::make_shared<Exp>();
    n->kind = ExpKind::New;
    n->name = "RuntimeException";
    n->span = s;
    n->args.push_back(mkLit(LitKind::String, "unexpected selection label", {}, s));
    t->exp = n;
    return t;
  }

  static StmP seq(StmP first, StmP rest) {
    if (!first) return rest;
    return appendStm(first, rest);
  }

  StmP mergeBranches(const std::vector<StmP> &branches, const Stm &at) {
    std::optional<StmP> acc;
    MergeConflict conflict;
    if (log_) {
      log_->emplace_back();
      for (auto &b : branches) log_->back().push_back(normalizeStm(b));
    }
    for (auto &b : branches) {
      auto n = normalizeStm(b);
      if (!acc) {
        acc = n;
        continue;
      }
      acc = merge(*acc, n, &conflict);
      if (!acc) break;
    }
    if (!acc) {
      Diagnostic d;
      d.code = DiagCode::MergeFailure;
      d.span = at.span;
      d.role = A;
      d.message = "Cannot merge the branches of this conditional for role '" + A +
                  "': role '" + A + "' cannot know which branch was taken.";
      auto show = [](const StmP &s) { return s ? printStm(s, 1) : std::string("  <nothing>\n"); };
      d.detail = "left branch at " + A + ":\n" + show(conflict.left) + "right branch at " + A + ":\n" +
                 show(conflict.right);
      D.report(d);
      return nullptr;
    }
    if (!*acc) return nullptr;
    bool declares = false;
    for (auto c = *acc; c; c = c->next) declares = declares || c->kind == StmKind::VarDecl;
    if (!declares) return *acc;
    auto blk = std::make_shared<Stm>();
    blk->kind = StmKind::Block;
    blk->span = at.span;
    blk->body = *acc;
    return blk;
  }

  StmP stm(const StmP &s) {
    if (!s) return nullptr;
    switch (s->kind) {
      case StmKind::Return: {
        auto r = std::make_shared<Stm>();
        r->kind = StmKind::Return;
        r->span = s->span;
        r->exp = s->exp ? exp(s->exp) : nullptr;
        r->next = stm(s->next);
        return r;
      }
      case StmKind::Throw: {
        if (!hasRole(s->exp->rolesOf, A)) return stm(s->next);
        auto r = std::make_shared<Stm>();
        r->kind = StmKind::Throw;
        r->span = s->span;
        r->exp = exp(s->exp);
        r->next = stm(s->next);
        return r;
      }
      case StmKind::ExpStm: {
        if (isSelection(s->exp)) {
          auto sw = std::make_shared<Stm>();
          sw->kind = StmKind::Switch;
          sw->span = s->span;
          sw->exp = exp(s->exp);
          sw->cases.push_back(SwitchCase{s->exp->args[0]->name, s->exp->args[0]->span, stm(s->next)});
          sw->hasDefault = true;
          sw->defaultThrow = true;
          sw->defaultBody = throwUnexpected(s->span);
          return sw;
        }
        if (!hasRole(s->exp->rolesOf, A)) return stm(s->next);
        auto r = mkExpStm(exp(s->exp), stm(s->next));
        r->span = s->span;
        return r;
      }
      case StmKind::VarDecl: {
        if (hasRole(teRoles(s->te), A)) {
          auto r = std::make_shared<Stm>();
          r->kind = StmKind::VarDecl;
          r->span = s->span;
          r->opSpan = s->opSpan;
          r->te = te(s->te);
          r->name = s->name;
          r->exp = s->exp ? exp(s->exp) : nullptr;
          r->next = stm(s->next);
          return r;
        }
        if (s->exp && hasRole(s->exp->rolesOf, A)) {
          auto r = mkExpStm(exp(s->exp), stm(s->next));
          r->span = s->span;
          return r;
        }
        return stm(s->next);
      }
      case StmKind::Assign: {
        if (hasRole(typeRoles(s->exp), A)) {
          auto r = std::make_shared<Stm>();
          r->kind = StmKind::Assign;
          r->span = s->span;
          r->opSpan = s->opSpan;
          r->op = s->op;
          r->exp = exp(s->exp);
          r->rhs = exp(s->rhs);
          r->next = stm(s->next);
          return r;
        }
        if (hasRole(s->exp->rolesOf, A) || hasRole(s->rhs->rolesOf, A)) {
          auto r = mkExpStm(unitOf({exp(s->exp), exp(s->rhs)}, s->span), stm(s->next));
          r->span = s->span;
          return r;
        }
        return stm(s->next);
      }
      case StmKind::If: {
        auto g = typeRoles(s->exp);
        if (g.size() == 1 && *g.begin() == A) {
          auto r = std::make_shared<Stm>();
          r->kind = StmKind::If;
          r->span = s->span;
          r->exp = exp(s->exp);
          r->thenS = stm(s->thenS);
          r->elseS = stm(s->elseS);
          r->next = stm(s->next);
          return r;
        }
        auto guard = mkExpStm(exp(s->exp));
        guard->span = s->exp->span;
        auto merged = mergeBranches({stm(s->thenS), stm(s->elseS)}, *s);
        return seq(guard, seq(merged, stm(s->next)));
      }
      case StmKind::Block: {
        auto r = std::make_shared<Stm>();
        r->kind = StmKind::Block;
        r->span = s->span;
        r->body = stm(s->body);
        r->next = stm(s->next);
        return r;
      }
      case StmKind::Switch: {
        if (hasRole(typeRoles(s->exp), A)) {
          auto r = std::make_shared<Stm>(*s);
          r->exp = exp(s->exp);
          for (auto &k : r->cases) k.body = stm(k.body);
          r->defaultBody = stm(s->defaultBody);
          r->next = stm(s->next);
          return r;
        }
        auto guard = mkExpStm(exp(s->exp));
        std::vector<StmP> bs;
        for (auto &k : s->cases) bs.push_back(stm(k.body));
        if (s->hasDefault) bs.push_back(stm(s->defaultBody));
        auto merged = mergeBranches(bs, *s);
        return seq(guard, seq(merged, stm(s->next)));
      }
      case StmKind::Try: {
        auto r = std::make_shared<Stm>();
        r->kind = StmKind::Try;
        r->span = s->span;
        r->body = stm(s->body);
        for (auto &k : s->catches)
          if (hasRole(teRoles(k.te), A)) r->catches.push_back(CatchClause{te(k.te), k.name, stm(k.body), k.span});
        r->next = stm(s->next);
        if (r->catches.empty()) {
          auto blk = std::make_shared<Stm>();
          blk->kind = StmKind::Block;
          blk->span = s->span;
          blk->body = r->body;
          blk->next = r->next;
          return blk;
        }
        return r;
      }
    }
    return stm(s->next);
  }
};

}  // namespace

LocalDecl projectDecl(const CheckedProgram &cp, const Decl &d, const std::string &role, DiagnosticSink &diags,
                      const ProjectOptions &opts) {
  Projector p(cp, diags, role, d.name);
  LocalDecl out;
  out.decl = p.decl(d, opts);
  out.generatedName = out.decl->name;
  out.sourceChoreography = d.name;
  out.role = role;
  return out;
}

LocalProgram projectProgram(const CheckedProgram &cp, DiagnosticSink &diags, const ProjectOptions &opts) {
  LocalProgram out;
  for (auto &d : cp.userDecls()) {
    auto rn = d->roleNames();
    for (auto &r : rn) {
      if (!opts.onlyRole.empty() && r != opts.onlyRole && rn.size() > 1) continue;
      out.units.push_back(projectDecl(cp, *d, r, diags, opts));
    }
  }
  return out;
}

Program asProgram(const LocalProgram &lp) {
  Program p;
  for (auto &u : lp.units) p.decls.push_back(u.decl);
  return p;
}

}  // namespace choral
