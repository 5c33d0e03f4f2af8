#include "choral/types.hpp"

#include <atomic>
#include <sstream>

namespace choral {

KindP roleKind() {
  static KindP k = std::make_shared<Kind>();
  return k;
}

KindP starKind(TypeP bound) {
  auto k = std::make_shared<Kind>();
  k->tag = KindTag::Star;
  k->bound = std::move(bound);
  return k;
}

KindP ctorKind(const std::string &var, KindP param, KindP result) {
  auto k = std::make_shared<Kind>();
  k->tag = KindTag::Ctor;
  k->var = var;
  k->param = std::move(param);
  k->result = std::move(result);
  return k;
}

static std::shared_ptr<Type> mk(TypeTag tag) {
  auto t = std::make_shared<Type>();
  t->tag = tag;
  return t;
}

TypeP tRole(const std::string &n) {
  auto t = mk(TypeTag::Role);
  t->name = n;
  return t;
}

TypeP tVar(const std::string &n) {
  auto t = mk(TypeTag::Var);
  t->name = n;
  return t;
}

TypeP tSym(const std::string &n, int roleArity) {
  auto t = mk(TypeTag::Sym);
  t->name = n;
  t->roleArity = roleArity;
  return t;
}

TypeP tAbs(const std::string &var, KindP k, TypeP body) {
  auto t = mk(TypeTag::Abs);
  t->name = var;
  t->kind = std::move(k);
  t->body = std::move(body);
  return t;
}

TypeP tApp(TypeP f, TypeP a) {
  auto t = mk(TypeTag::App);
  t->fn = std::move(f);
  t->arg = std::move(a);
  return t;
}

TypeP tApps(TypeP f, const std::vector<TypeP> &as) {
  for (auto &a : as) f = tApp(f, a);
  return f;
}

TypeP tInter(std::vector<TypeP> parts) {
  if (parts.size() == 1) return parts[0];
  auto t = mk(TypeTag::Inter);
  t->parts = std::move(parts);
  return t;
}

TypeP tFun(std::vector<TypeP> params, TypeP result) {
  auto t = mk(TypeTag::Fun);
  t->parts = std::move(params);
  t->result = std::move(result);
  return t;
}

TypeP tVoid() {
  static TypeP v = mk(TypeTag::Void);
  return v;
}

TypeP tNull(std::vector<std::string> roles) {
  auto t = mk(TypeTag::Null);
  t->roles = std::move(roles);
  return t;
}

std::string freshName(const std::string &hint) {
  static std::atomic<unsigned> counter{0};
  return hint + "'" + std::to_string(++counter);
}

static bool isRoleBinder(const TypeP &abs) { return abs->kind && abs->kind->tag == KindTag::Role; }

std::set<std::string> freeRoles(const TypeP &t) {
  std::set<std::string> out;
  if (!t) return out;
  switch (t->tag) {
    case TypeTag::Role: out.insert(t->name); break;
    case TypeTag::Abs: {
      out = freeRoles(t->body);
      if (isRoleBinder(t)) out.erase(t->name);
      if (t->kind && t->kind->tag == KindTag::Star)
        for (auto &r : freeRoles(t->kind->bound)) out.insert(r);
      break;
    }
    case TypeTag::App:
      out = freeRoles(t->fn);
      for (auto &r : freeRoles(t->arg)) out.insert(r);
      break;
    case TypeTag::Inter:
    case TypeTag::Fun:
      for (auto &p : t->parts)
        for (auto &r : freeRoles(p)) out.insert(r);
      if (t->result)
        for (auto &r : freeRoles(t->result)) out.insert(r);
      break;
    case TypeTag::Null: out.insert(t->roles.begin(), t->roles.end()); break;
    default: break;
  }
  return out;
}

std::set<std::string> freeVars(const TypeP &t) {
  std::set<std::string> out;
  if (!t) return out;
  switch (t->tag) {
    case TypeTag::Var: out.insert(t->name); break;
    case TypeTag::Abs:
      out = freeVars(t->body);
      if (!isRoleBinder(t)) out.erase(t->name);
      break;
    case TypeTag::App:
      out = freeVars(t->fn);
      for (auto &r : freeVars(t->arg)) out.insert(r);
      break;
    case TypeTag::Inter:
    case TypeTag::Fun:
      for (auto &p : t->parts)
        for (auto &r : freeVars(p)) out.insert(r);
      if (t->result)
        for (auto &r : freeVars(t->result)) out.insert(r);
      break;
    default: break;
  }
  return out;
}

KindP substKind(const KindP &k, const Subst &s) {
  if (!k || s.empty()) return k;
  switch (k->tag) {
    case KindTag::Role: return k;
    case KindTag::Star: return starKind(subst(k->bound, s));
    case KindTag::Ctor: {
      Subst inner = s;
      if (k->param->tag == KindTag::Role)
        inner.roles.erase(k->var);
      else
        inner.vars.erase(k->var);
      return ctorKind(k->var, substKind(k->param, s), substKind(k->result, inner));
    }
  }
  return k;
}

TypeP subst(const TypeP &t, const Subst &s) {
  if (!t || s.empty()) return t;
  switch (t->tag) {
    case TypeTag::Role: {
      auto it = s.roles.find(t->name);
      return it == s.roles.end() ? t : it->second;
    }
    case TypeTag::Var: {
      auto it = s.vars.find(t->name);
      return it == s.vars.end() ? t : it->second;
    }
    case TypeTag::Sym:
    case TypeTag::Void:
      return t;
    case TypeTag::Null: {
      std::vector<std::string> rs;
      for (auto &r : t->roles) {
        auto it = s.roles.find(r);
        rs.push_back(it != s.roles.end() && it->second->tag == TypeTag::Role ? it->second->name : r);
      }
      return tNull(rs);
    }
    case TypeTag::App: return tApp(subst(t->fn, s), subst(t->arg, s));
    case TypeTag::Inter: {
      std::vector<TypeP> ps;
      for (auto &p : t->parts) ps.push_back(subst(p, s));
      return tInter(ps);
    }
    case TypeTag::Fun: {
      std::vector<TypeP> ps;
      for (auto &p : t->parts) ps.push_back(subst(p, s));
      return tFun(ps, subst(t->result, s));
    }
    case TypeTag::Abs: {
      bool roleB = isRoleBinder(t);
      Subst inner = s;
      if (roleB)
        inner.roles.erase(t->name);
      else
        inner.vars.erase(t->name);
      // capture check: does any replacement mention the binder?
      bool capture = false;
      auto scan = [&](const std::map<std::string, TypeP> &m) {
        for (auto &[k, v] : m) {
          auto fr = roleB ? freeRoles(v) : freeVars(v);
          if (fr.count(t->name)) capture = true;
        }
      };
      scan(inner.roles);
      scan(inner.vars);
      std::string binder = t->name;
      TypeP body = t->body;
      if (capture) {
        binder = freshName(t->name);
        Subst ren;
        if (roleB)
          ren.roles[t->name] = tRole(binder);
        else
          ren.vars[t->name] = tVar(binder);
        body = subst(body, ren);
      }
      return tAbs(binder, substKind(t->kind, s), subst(body, inner));
    }
  }
  return t;
}

TypeP reduce(const TypeP &t) {
  if (!t) return t;
  switch (t->tag) {
    case TypeTag::App: {
      auto f = reduce(t->fn);
      auto a = reduce(t->arg);
      if (f->tag == TypeTag::Abs) {
        Subst s;
        if (isRoleBinder(f))
          s.roles[f->name] = a;
        else
          s.vars[f->name] = a;
        return reduce(subst(f->body, s));
      }
      if (f == t->fn && a == t->arg) return t;
      return tApp(f, a);
    }
    case TypeTag::Abs: {
      auto b = reduce(t->body);
      bool roleB = isRoleBinder(t);
      if (b->tag == TypeTag::App) {
        auto &x = b->arg;
        bool matches = roleB ? (x->tag == TypeTag::Role && x->name == t->name)
                             : (x->tag == TypeTag::Var && x->name == t->name);
        if (matches) {
          auto fr = roleB ? freeRoles(b->fn) : freeVars(b->fn);
          if (!fr.count(t->name)) return b->fn;
        }
      }
      return tAbs(t->name, t->kind, b);
    }
    case TypeTag::Inter: {
      std::vector<TypeP> ps;
      for (auto &p : t->parts) ps.push_back(reduce(p));
      return tInter(ps);
    }
    case TypeTag::Fun: {
      std::vector<TypeP> ps;
      for (auto &p : t->parts) ps.push_back(reduce(p));
      return tFun(ps, reduce(t->result));
    }
    default: return t;
  }
}

namespace {
struct AlphaEnv {
  std::map<std::string, int> l, r;
};

bool alpha(const TypeP &a, const TypeP &b, AlphaEnv &env, int depth);

bool alphaKind(const KindP &a, const KindP &b, AlphaEnv &env, int depth) {
  if (!a || !b) return a == b;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case KindTag::Role: return true;
    case KindTag::Star:
      if (!a->bound || !b->bound) return !a->bound && !b->bound;
      return alpha(a->bound, b->bound, env, depth);
    case KindTag::Ctor: {
      if (!alphaKind(a->param, b->param, env, depth)) return false;
      AlphaEnv inner = env;
      inner.l[a->var] = depth;
      inner.r[b->var] = depth;
      return alphaKind(a->result, b->result, inner, depth + 1);
    }
  }
  return false;
}

bool boundName(const std::string &n, const std::map<std::string, int> &m, int &idx) {
  auto it = m.find(n);
  if (it == m.end()) return false;
  idx = it->second;
  return true;
}

bool alpha(const TypeP &a, const TypeP &b, AlphaEnv &env, int depth) {
  if (!a || !b) return a == b;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case TypeTag::Role:
    case TypeTag::Var: {
      int ia = -1, ib = -1;
      bool ba = boundName(a->name, env.l, ia), bb = boundName(b->name, env.r, ib);
      if (ba != bb) return false;
      return ba ? ia == ib : a->name == b->name;
    }
    case TypeTag::Sym: return a->name == b->name;
    case TypeTag::Void: return true;
    case TypeTag::Null: {
      std::set<std::string> x(a->roles.begin(), a->roles.end()), y(b->roles.begin(), b->roles.end());
      return x == y;
    }
    case TypeTag::App: return alpha(a->fn, b->fn, env, depth) && alpha(a->arg, b->arg, env, depth);
    case TypeTag::Abs: {
      if (isRoleBinder(a) != isRoleBinder(b)) return false;
      if (!alphaKind(a->kind, b->kind, env, depth)) return false;
      AlphaEnv inner = env;
      inner.l[a->name] = depth;
      inner.r[b->name] = depth;
      return alpha(a->body, b->body, inner, depth + 1);
    }
    case TypeTag::Inter:
    case TypeTag::Fun: {
      if (a->parts.size() != b->parts.size()) return false;
      for (size_t i = 0; i < a->parts.size(); ++i)
        if (!alpha(a->parts[i], b->parts[i], env, depth)) return false;
      if (a->tag == TypeTag::Fun) return alpha(a->result, b->result, env, depth);
      return true;
    }
  }
  return false;
}
}  // namespace

bool alphaEq(const TypeP &a, const TypeP &b) {
  AlphaEnv env;
  return alpha(reduce(a), reduce(b), env, 0);
}

bool kindShapeEq(const KindP &a, const KindP &b) {
  if (!a || !b) return a == b;
  if (a->tag != b->tag) return false;
  if (a->tag == KindTag::Ctor) return kindShapeEq(a->param, b->param) && kindShapeEq(a->result, b->result);
  return true;
}

Spine spine(const TypeP &t) {
  Spine s;
  TypeP cur = t;
  while (cur && cur->tag == TypeTag::App) {
    s.args.insert(s.args.begin(), cur->arg);
    cur = cur->fn;
  }
  s.head = cur;
  return s;
}

std::vector<std::string> spineRoles(const Spine &s) {
  std::vector<std::string> out;
  size_t n = s.head && s.head->tag == TypeTag::Sym ? s.head->roleArity : s.args.size();
  for (size_t i = 0; i < s.args.size() && i < n; ++i) {
    if (s.args[i]->tag != TypeTag::Role) break;
    out.push_back(s.args[i]->name);
  }
  return out;
}

std::vector<TypeP> spineTypeArgs(const Spine &s) {
  size_t n = spineRoles(s).size();
  return std::vector<TypeP>(s.args.begin() + std::min(n, s.args.size()), s.args.end());
}

static std::string showH(const TypeP &t, const std::set<std::string> &hidden);

static std::string showArg(const TypeP &t, std::set<std::string> hidden) {
  TypeP cur = t;
  while (cur && cur->tag == TypeTag::Abs && isRoleBinder(cur)) {
    hidden.insert(cur->name);
    cur = cur->body;
  }
  return showH(cur, hidden);
}

static std::string showH(const TypeP &t, const std::set<std::string> &hidden) {
  if (!t) return "?";
  switch (t->tag) {
    case TypeTag::Role:
    case TypeTag::Var:
    case TypeTag::Sym: return t->name;
    case TypeTag::Void: return "void";
    case TypeTag::Null: {
      std::string s = "null";
      if (t->roles.size() == 1) s += "@" + t->roles[0];
      if (t->roles.size() > 1) {
        s += "@(";
        for (size_t i = 0; i < t->roles.size(); ++i) s += (i ? "," : "") + t->roles[i];
        s += ")";
      }
      return s;
    }
    case TypeTag::Abs: return showArg(t, hidden);
    case TypeTag::Inter: {
      std::string s;
      for (size_t i = 0; i < t->parts.size(); ++i) s += (i ? " & " : "") + showH(t->parts[i], hidden);
      return s;
    }
    case TypeTag::Fun: {
      std::string s = "(";
      for (size_t i = 0; i < t->parts.size(); ++i) s += (i ? "," : "") + showH(t->parts[i], hidden);
      return s + ") -> " + showH(t->result, hidden);
    }
    case TypeTag::App: {
      Spine sp = spine(t);
      auto roles = spineRoles(sp);
      auto targs = spineTypeArgs(sp);
      std::string s = showH(sp.head, hidden);
      bool allHidden = !roles.empty();
      for (auto &r : roles)
        if (!hidden.count(r)) allHidden = false;
      if (!allHidden) {
        if (roles.size() == 1) s += "@" + roles[0];
        if (roles.size() > 1) {
          s += "@(";
          for (size_t i = 0; i < roles.size(); ++i) s += (i ? "," : "") + roles[i];
          s += ")";
        }
      }
      if (!targs.empty()) {
        s += "<";
        for (size_t i = 0; i < targs.size(); ++i) s += (i ? "," : "") + showArg(targs[i], hidden);
        s += ">";
      }
      return s;
    }
  }
  return "?";
}

std::string show(const TypeP &t) { return showH(t, {}); }

std::string showKind(const KindP &k) {
  if (!k) return "?";
  switch (k->tag) {
    case KindTag::Role: return "Role";
    case KindTag::Star: return k->bound ? "*(" + show(k->bound) + ")" : "*";
    case KindTag::Ctor: return "(" + k->var + ":" + showKind(k->param) + ") => " + showKind(k->result);
  }
  return "?";
}

KindP kindOf(const KindEnv &theta, const TypeP &t, std::string *error) {
  auto fail = [&](const std::string &m) -> KindP {
    if (error && error->empty()) *error = m;
    return nullptr;
  };
  if (!t) return fail("missing type");
  switch (t->tag) {
    case TypeTag::Role: return roleKind();
    case TypeTag::Var:
    case TypeTag::Sym: {
      auto it = theta.find(t->name);
      if (it == theta.end()) return fail("unknown type '" + t->name + "'");
      return it->second;
    }
    case TypeTag::Void: return starKind(nullptr);
    case TypeTag::Null: return starKind(nullptr);
    case TypeTag::Abs: {
      KindEnv inner = theta;
      if (!isRoleBinder(t)) inner[t->name] = t->kind;
      auto kb = kindOf(inner, t->body, error);
      if (!kb) return nullptr;
      return ctorKind(t->name, t->kind, kb);
    }
    case TypeTag::App: {
      auto kf = kindOf(theta, t->fn, error);
      if (!kf) return nullptr;
      if (kf->tag != KindTag::Ctor)
        return fail("type '" + show(t->fn) + "' of kind " + showKind(kf) + " cannot be applied");
      auto ka = kindOf(theta, t->arg, error);
      if (!ka) return nullptr;
      if (!kindShapeEq(ka, kf->param))
        return fail("kind mismatch: '" + show(t->arg) + "' has kind " + showKind(ka) + ", expecting " +
                    showKind(kf->param));
      Subst s;
      if (kf->param->tag == KindTag::Role)
        s.roles[kf->var] = t->arg;
      else
        s.vars[kf->var] = t->arg;
      auto r = substKind(kf->result, s);
      if (r->tag == KindTag::Star && r->bound) return starKind(reduce(r->bound));
      return r;
    }
    case TypeTag::Inter: {
      for (auto &p : t->parts) {
        auto k = kindOf(theta, p, error);
        if (!k) return nullptr;
        if (k->tag != KindTag::Star) return fail("intersection member '" + show(p) + "' is not a type");
      }
      return starKind(t);
    }
    case TypeTag::Fun: return starKind(nullptr);
  }
  return fail("bad type");
}

}  // namespace choral
