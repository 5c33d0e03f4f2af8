#include "choral/ast.hpp"

#include <algorithm>

namespace choral {

static bool hasMod(const std::vector<std::string> &mods, const char *m) {
  return std::find(mods.begin(), mods.end(), m) != mods.end();
}

bool Method::isStatic() const { return hasMod(modifiers, "static"); }

bool Method::hasAnnotation(const std::string &n) const {
  for (auto &a : annotations)
    if (a.name == n) return true;
  return false;
}

bool Field::isStatic() const { return hasMod(modifiers, "static"); }

std::vector<std::string> Decl::roleNames() const {
  std::vector<std::string> out;
  for (auto &r : roles) out.push_back(r.name);
  return out;
}

bool Decl::hasAnnotation(const std::string &n) const {
  for (auto &a : annotations)
    if (a.name == n) return true;
  return false;
}

bool Decl::isAbstract() const { return kind == DeclKind::Interface || hasMod(modifiers, "abstract"); }

ExpP mkName(const std::string &n, Span s) {
  auto e = std::make_shared<Exp>();
  e->kind = ExpKind::Name;
  e->name = n;
  e->span = s;
  return e;
}

ExpP mkLit(LitKind k, const std::string &text, std::vector<RoleRef> roles, Span s) {
  auto e = std::make_shared<Exp>();
  e->kind = ExpKind::Literal;
  e->lit = k;
  e->text = text;
  e->roles = std::move(roles);
  e->span = s;
  return e;
}

ExpP mkUnit(Span s) {
  auto e = std::make_shared<Exp>();
  e->kind = ExpKind::UnitLit;
  e->span = s;
  return e;
}

ExpP mkCall(ExpP target, const std::string &name, std::vector<ExpP> args,
            std::vector<TypeExprP> typeArgs, Span s) {
  auto e = std::make_shared<Exp>();
  e->kind = ExpKind::Call;
  e->target = std::move(target);
  e->name = name;
  e->args = std::move(args);
  e->typeArgs = std::move(typeArgs);
  e->span = s;
  return e;
}

ExpP mkClassRef(const std::string &name, std::vector<RoleRef> roles, Span s) {
  auto e = std::make_shared<Exp>();
  e->kind = ExpKind::ClassRef;
  e->name = name;
  e->roles = std::move(roles);
  e->span = s;
  return e;
}

ExpP mkUnitCall(std::vector<ExpP> args, Span s) {
  return mkCall(mkName("Unit", s), "id", std::move(args), {}, s);
}

ExpP mkField(ExpP target, const std::string &name, Span s) {
  auto e = std::make_shared<Exp>();
  e->kind = ExpKind::Field;
  e->target = std::move(target);
  e->name = name;
  e->span = s;
  return e;
}

TypeExprP mkTE(const std::string &name, std::vector<RoleRef> roles, std::vector<TypeExprP> args,
               Span s) {
  auto t = std::make_shared<TypeExpr>();
  t->name = name;
  t->roles = std::move(roles);
  t->args = std::move(args);
  t->span = s;
  t->isVoid = name == "void";
  return t;
}

StmP mkExpStm(ExpP e, StmP next) {
  auto s = std::make_shared<Stm>();
  s->kind = StmKind::ExpStm;
  s->span = e ? e->span : Span{};
  s->exp = std::move(e);
  s->next = std::move(next);
  return s;
}

bool isUnitLit(const ExpP &e) { return e && e->kind == ExpKind::UnitLit; }

bool isUnitCall(const ExpP &e) {
  if (!e || e->kind != ExpKind::Call || e->name != "id" || !e->target) return false;
  auto &t = e->target;
  return (t->kind == ExpKind::ClassRef || t->kind == ExpKind::Name) && t->name == "Unit";
}

static bool sameRoles(const std::vector<RoleRef> &a, const std::vector<RoleRef> &b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name) return false;
  return true;
}

template <class T, class F>
static bool sameList(const std::vector<T> &a, const std::vector<T> &b, F eq) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!eq(a[i], b[i])) return false;
  return true;
}

bool equalTE(const TypeExprP &a, const TypeExprP &b) {
  if (!a || !b) return a == b;
  return a->isVoid == b->isVoid && a->name == b->name && sameRoles(a->roles, b->roles) &&
         sameList(a->args, b->args, equalTE);
}

bool equalExp(const ExpP &a, const ExpP &b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExpKind::Literal:
      return a->lit == b->lit && a->text == b->text && sameRoles(a->roles, b->roles) &&
             a->roleList == b->roleList;
    case ExpKind::Name:
      return a->name == b->name;
    case ExpKind::Field:
      return a->name == b->name && equalExp(a->target, b->target);
    case ExpKind::Call:
      return a->name == b->name && equalExp(a->target, b->target) &&
             sameList(a->typeArgs, b->typeArgs, equalTE) && sameList(a->args, b->args, equalExp);
    case ExpKind::New:
      return a->name == b->name && sameRoles(a->roles, b->roles) &&
             sameList(a->typeArgs, b->typeArgs, equalTE) &&
             sameList(a->classTypeArgs, b->classTypeArgs, equalTE) &&
             sameList(a->args, b->args, equalExp);
    case ExpKind::Binary:
      return a->op == b->op && equalExp(a->lhs, b->lhs) && equalExp(a->rhs, b->rhs);
    case ExpKind::This:
    case ExpKind::UnitLit:
      return true;
    case ExpKind::ClassRef:
      return a->name == b->name && sameRoles(a->roles, b->roles) &&
             sameList(a->classTypeArgs, b->classTypeArgs, equalTE);
    case ExpKind::Chain: {
      if (!equalExp(a->target, b->target) || a->links.size() != b->links.size()) return false;
      for (size_t i = 0; i < a->links.size(); ++i) {
        auto &x = a->links[i];
        auto &y = b->links[i];
        if (x.name != y.name || !equalExp(x.target, y.target) || !equalTE(x.ctor, y.ctor) ||
            !sameList(x.typeArgs, y.typeArgs, equalTE))
          return false;
      }
      return true;
    }
  }
  return false;
}

bool equalStm(const StmP &a, const StmP &b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  bool head = false;
  switch (a->kind) {
    case StmKind::Return:
    case StmKind::ExpStm:
    case StmKind::Throw:
      head = equalExp(a->exp, b->exp);
      break;
    case StmKind::VarDecl:
      head = a->name == b->name && equalTE(a->te, b->te) && equalExp(a->exp, b->exp);
      break;
    case StmKind::Assign:
      head = a->op == b->op && equalExp(a->exp, b->exp) && equalExp(a->rhs, b->rhs);
      break;
    case StmKind::If:
      head = equalExp(a->exp, b->exp) && equalStm(a->thenS, b->thenS) &&
             equalStm(a->elseS, b->elseS);
      break;
    case StmKind::Block:
      head = equalStm(a->body, b->body);
      break;
    case StmKind::Switch: {
      head = equalExp(a->exp, b->exp) && a->hasDefault == b->hasDefault &&
             equalStm(a->defaultBody, b->defaultBody) &&
             a->cases.size() == b->cases.size();
      for (size_t i = 0; head && i < a->cases.size(); ++i)
        head = a->cases[i].label == b->cases[i].label &&
               equalStm(a->cases[i].body, b->cases[i].body);
      break;
    }
    case StmKind::Try: {
      head = equalStm(a->body, b->body) && a->catches.size() == b->catches.size();
      for (size_t i = 0; head && i < a->catches.size(); ++i)
        head = a->catches[i].name == b->catches[i].name &&
               equalTE(a->catches[i].te, b->catches[i].te) &&
               equalStm(a->catches[i].body, b->catches[i].body);
      break;
    }
  }
  return head && equalStm(a->next, b->next);
}

TypeExprP cloneTE(const TypeExprP &t) {
  if (!t) return nullptr;
  auto c = std::make_shared<TypeExpr>(*t);
  for (auto &a : c->args) a = cloneTE(a);
  return c;
}

ExpP cloneExp(const ExpP &e) {
  if (!e) return nullptr;
  auto c = std::make_shared<Exp>(*e);
  c->target = cloneExp(e->target);
  c->lhs = cloneExp(e->lhs);
  c->rhs = cloneExp(e->rhs);
  for (auto &a : c->args) a = cloneExp(a);
  for (auto &t : c->typeArgs) t = cloneTE(t);
  for (auto &t : c->classTypeArgs) t = cloneTE(t);
  for (auto &l : c->links) {
    l.target = cloneExp(l.target);
    l.ctor = cloneTE(l.ctor);
    for (auto &t : l.typeArgs) t = cloneTE(t);
  }
  return c;
}

StmP cloneStm(const StmP &s) {
  if (!s) return nullptr;
  auto c = std::make_shared<Stm>(*s);
  c->exp = cloneExp(s->exp);
  c->rhs = cloneExp(s->rhs);
  c->te = cloneTE(s->te);
  c->thenS = cloneStm(s->thenS);
  c->elseS = cloneStm(s->elseS);
  c->body = cloneStm(s->body);
  c->defaultBody = cloneStm(s->defaultBody);
  for (auto &k : c->cases) k.body = cloneStm(k.body);
  for (auto &k : c->catches) {
    k.body = cloneStm(k.body);
    k.te = cloneTE(k.te);
  }
  c->next = cloneStm(s->next);
  return c;
}

StmP appendStm(const StmP &s1, const StmP &s2) {
  if (!s1) return s2;
  auto c = std::make_shared<Stm>(*s1);
  c->next = appendStm(s1->next, s2);
  return c;
}

void forEachExpIn(const ExpP &e, const std::function<void(const ExpP &)> &f) {
  if (!e) return;
  f(e);
  forEachExpIn(e->target, f);
  forEachExpIn(e->lhs, f);
  forEachExpIn(e->rhs, f);
  for (auto &a : e->args) forEachExpIn(a, f);
  for (auto &l : e->links) forEachExpIn(l.target, f);
}

void forEachStm(const StmP &s, const std::function<void(const StmP &)> &f) {
  for (auto cur = s; cur; cur = cur->next) {
    f(cur);
    forEachStm(cur->thenS, f);
    forEachStm(cur->elseS, f);
    forEachStm(cur->body, f);
    forEachStm(cur->defaultBody, f);
    for (auto &k : cur->cases) forEachStm(k.body, f);
    for (auto &k : cur->catches) forEachStm(k.body, f);
  }
}

void forEachExp(const StmP &s, const std::function<void(const ExpP &)> &f) {
  forEachStm(s, [&](const StmP &st) {
    forEachExpIn(st->exp, f);
    forEachExpIn(st->rhs, f);
  });
}

static void walkTE(const TypeExprP &t, const std::function<void(const TypeExprP &)> &f) {
  if (!t) return;
  f(t);
  for (auto &a : t->args) walkTE(a, f);
}

void forEachTE(const Decl &d, const std::function<void(const TypeExprP &)> &f) {
  auto ftps = [&](const std::vector<FTP> &v) {
    for (auto &p : v)
      for (auto &b : p.bounds) walkTE(b, f);
  };
  ftps(d.ftps);
  for (auto &t : d.extends) walkTE(t, f);
  for (auto &t : d.implements) walkTE(t, f);
  for (auto &fl : d.fields) walkTE(fl.te, f);
  auto methods = [&](const std::vector<MethodP> &ms) {
    for (auto &m : ms) {
      ftps(m->ftps);
      walkTE(m->ret, f);
      for (auto &p : m->params) walkTE(p.te, f);
      forEachStm(m->body, [&](const StmP &s) {
        walkTE(s->te, f);
        for (auto &c : s->catches) walkTE(c.te, f);
      });
      forEachExp(m->body, [&](const ExpP &e) {
        for (auto &t : e->typeArgs) walkTE(t, f);
        for (auto &t : e->classTypeArgs) walkTE(t, f);
      });
    }
  };
  methods(d.ctors);
  methods(d.methods);
}

}  // namespace choral
