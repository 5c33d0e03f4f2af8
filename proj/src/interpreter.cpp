#include "choral/interpreter.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "choral/projector.hpp"
#include "choral/tproj.hpp"

namespace choral {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

const char *statusName(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::DeadlockTimeout: return "deadlock-timeout";
    case RunStatus::Error: return "error";
  }
  return "?";
}

json reportJson(const ExecutionReport &r) {
  json roles = json::object();
  for (auto &[name, o] : r.roles) {
    json x{{"return", o.ret}, {"transcript", o.transcript}};
    if (!o.error.empty()) x["error"] = o.error;
    roles[name] = x;
  }
  json j{{"status", statusName(r.status)}, {"ms", r.ms}, {"roles", roles}};
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

// ------------------------------------------------------------ manifest

Manifest Manifest::fromJson(const json &j) {
  Manifest m;
  m.entry = j.at("entry").get<std::string>();
  m.method = j.at("method").get<std::string>();
  if (j.contains("roles")) m.roles = j.at("roles").get<std::vector<std::string>>();
  if (j.contains("ctorArgs")) m.ctorArgs = j.at("ctorArgs");
  if (j.contains("args")) m.args = j.at("args");
  if (!m.ctorArgs.is_array() || !m.args.is_array()) throw std::runtime_error("manifest: ctorArgs and args must be arrays");
  return m;
}

Manifest Manifest::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw std::runtime_error("manifest '" + path + "': " + e.what());
  }
  return fromJson(j);
}

json Manifest::toJson() const {
  json j{{"entry", entry}, {"method", method}, {"ctorArgs", ctorArgs}, {"args", args}};
  if (!roles.empty()) j["roles"] = roles;
  return j;
}

// ------------------------------------------------------------ rendering

namespace {

// role empty: the object as it is; otherwise the part of a global object located at role
std::string show(const ValueP &v, bool canon, const std::string &role) {
  if (!v) return "null";
  switch (v->kind) {
    case VK::String: return canon ? canonical(v) : v->s;
    case VK::Enum: return canon ? v->typeName + "." + v->s : v->s;
    case VK::List: {
      std::string s = "[";
      for (size_t i = 0; i < v->list->size(); ++i) s += (i ? ", " : "") + show((*v->list)[i], canon, role);
      return s + "]";
    }
    case VK::Optional: return v->opt ? "Optional[" + show(v->opt, canon, role) + "]" : "Optional.empty";
    case VK::Object: {
      auto &o = *v->obj;
      std::string name = o.cls;
      bool filter = !role.empty() && !o.binding.empty();
      if (filter) {
        const auto &declared = o.formals;
        for (size_t i = 0; i < declared.size(); ++i) {
          auto b = o.binding.find(o.cls + "." + declared[i]);
          if (b != o.binding.end() && b->second == role) {
            name = generatedName(o.cls, declared, i);
            break;
          }
        }
      }
      std::string s = name + "{";
      bool first = true;
      for (auto &[k, f] : o.fields) {
        if (filter) {
          auto fr = o.fieldRoles.find(k);
          if (fr != o.fieldRoles.end() && !fr->second.count(role)) continue;
        }
        s += (first ? "" : ", ") + k + "=" + show(f, canon, role);
        first = false;
      }
      return s + "}";
    }
    default: return canon ? canonical(v) : toJavaString(v);
  }
}

}  // namespace

std::string viewAt(const ValueP &v, const std::string &role) { return show(v, true, role); }

// ------------------------------------------------------------ machine

namespace {

enum class Mode { Global, Local };
enum class Flow { Normal, Return };

struct Frame {
  std::shared_ptr<ObjectData> self;
  const Decl *cls = nullptr;
  std::map<std::string, std::string> binding;  // "Class.Role" -> physical role
  std::vector<std::map<std::string, ValueP>> scopes;
  ValueP ret;
};

constexpr int kMaxDepth = 1500;

bool isTestUtils(const std::string &n) { return n == "TestUtils" || n.rfind("TestUtils_", 0) == 0; }

const std::set<std::string> &builtinClasses() {
  static const std::set<std::string> s{"Math",   "Integer", "Long",      "Double",           "Boolean", "String",
                                       "Optional", "Assert", "System",   "Unit",             "Object",  "ArrayList",
                                       "RuntimeException", "Exception", "Number"};
  return s;
}

class Machine {
 public:
  Machine(Mode mode, std::vector<DeclP> decls, std::string role, ChannelRegistry *reg, const CancelToken *cancel,
          Clock::time_point deadline)
      : mode_(mode), role_(std::move(role)), reg_(reg), cancel_(cancel), deadline_(deadline) {
    for (auto &d : decls) decls_[d->name] = d.get();
    keep_ = std::move(decls);
  }

  const std::map<std::string, const Decl *> &decls() const { return decls_; }
  std::map<std::string, std::vector<std::string>> transcripts;
  std::vector<std::shared_ptr<Endpoint>> endpoints;

  const Decl *find(const std::string &n) const {
    auto it = decls_.find(n);
    return it == decls_.end() ? nullptr : it->second;
  }

  const Decl *superOf(const Decl *d) const {
    if (!d || d->extends.empty()) return nullptr;
    return find(d->extends[0]->name);
  }

  // keys "Class.Role" for the class and its superclasses
  void chainBinding(const Decl *d, std::vector<std::string> phys, std::map<std::string, std::string> &out) const {
    if (mode_ == Mode::Local) return;
    for (int guard = 0; d && guard < 64; ++guard) {
      auto rs = d->roleNames();
      std::map<std::string, std::string> here;
      for (size_t i = 0; i < rs.size() && i < phys.size(); ++i) here[rs[i]] = phys[i];
      for (auto &[r, p] : here) out[d->name + "." + r] = p;
      auto *s = superOf(d);
      if (!s) break;
      std::vector<std::string> sp;
      for (auto &r : d->extends[0]->roles) {
        auto it = here.find(r.name);
        sp.push_back(it == here.end() ? r.name : it->second);
      }
      phys = std::move(sp);
      d = s;
    }
  }

  std::string phys(const Frame &f, const std::string &formal) const {
    if (mode_ == Mode::Local) return role_;
    if (f.cls) {
      auto it = f.binding.find(f.cls->name + "." + formal);
      if (it != f.binding.end()) return it->second;
    }
    return formal;
  }

  std::vector<std::string> physAll(const Frame &f, const std::vector<RoleRef> &rs) const {
    std::vector<std::string> out;
    for (auto &r : rs) out.push_back(phys(f, r.name));
    return out;
  }

  void tick() {
    if (cancel_) cancel_->check();
    if (Clock::now() > deadline_) throw Cancelled();
  }

  // ---------------------------------------------------------- objects

  std::shared_ptr<ObjectData> allocate(const Decl *d, const std::vector<std::string> &physRoles) {
    auto o = std::make_shared<ObjectData>();
    o->cls = d->name;
    if (mode_ == Mode::Global) o->formals = d->roleNames();
    chainBinding(d, physRoles, o->binding);
    for (const Decl *c = d; c; c = superOf(c)) {
      for (auto &fd : c->fields) {
        if (fd.isStatic()) continue;
        o->fields[fd.name] = vNull();
        if (mode_ == Mode::Global && fd.te) {
          std::set<std::string> rs;
          for (auto &r : fd.te->roles) {
            auto it = o->binding.find(c->name + "." + r.name);
            rs.insert(it == o->binding.end() ? r.name : it->second);
          }
          o->fieldRoles[fd.name] = rs;
        }
      }
    }
    return o;
  }

  static bool startsWithSuper(const MethodP &m) {
    auto &b = m->body;
    return b && b->kind == StmKind::ExpStm && b->exp && b->exp->kind == ExpKind::Call && !b->exp->target &&
           b->exp->name == "super";
  }

  void runCtor(const Decl *d, const MethodP &ctor, const std::shared_ptr<ObjectData> &obj,
               const std::vector<ValueP> &args) {
    if (!ctor || !startsWithSuper(ctor)) {
      if (auto *s = superOf(d)) runCtor(s, findCtor(s, 0), obj, {});
    }
    if (!ctor) return;
    invoke(d, ctor, obj, obj->binding, args);
  }

  static MethodP findCtor(const Decl *d, size_t arity) {
    for (auto &c : d->ctors)
      if (c->params.size() == arity) return c;
    return nullptr;
  }

  ValueP construct(const Decl *d, const std::vector<std::string> &physRoles, const std::vector<ValueP> &args) {
    if (d->kind != DeclKind::Class) throw RuntimeFailure("cannot instantiate '" + d->name + "'");
    auto ctor = findCtor(d, args.size());
    if (!ctor && !(args.empty() && d->ctors.empty()))
      throw RuntimeFailure("no constructor of '" + d->name + "' takes " + std::to_string(args.size()) + " argument(s)");
    auto obj = allocate(d, physRoles);
    runCtor(d, ctor, obj, args);
    return vObject(obj);
  }

  ValueP constructBuiltin(const std::string &n, const std::vector<ValueP> &args) {
    if (n == "ArrayList") return vList();
    if (n == "RuntimeException" || n == "Exception") {
      auto o = std::make_shared<ObjectData>();
      o->cls = "RuntimeException";
      o->fields["message"] = args.empty() ? vNull() : args[0];
      return vObject(o);
    }
    throw RuntimeFailure("cannot instantiate '" + n + "'");
  }

  // ---------------------------------------------------------- calls

  std::pair<const Decl *, MethodP> lookup(const Decl *d, const std::string &name, size_t arity) const {
    for (int guard = 0; d && guard < 64; ++guard, d = superOf(d))
      for (auto &m : d->methods)
        if (m->name == name && m->params.size() == arity && m->hasBody) return {d, m};
    return {nullptr, nullptr};
  }

  ValueP invoke(const Decl *d, const MethodP &m, std::shared_ptr<ObjectData> self,
                const std::map<std::string, std::string> &binding, const std::vector<ValueP> &args) {
    if (!m->hasBody) throw RuntimeFailure("method '" + m->name + "' has no body");
    if (++depth_ > kMaxDepth) {
      --depth_;
      throw RuntimeFailure("call depth exceeded in '" + d->name + "." + m->name + "'");
    }
    struct Dec {
      int &d;
      ~Dec() { --d; }
    } dec{depth_};
    Frame f;
    f.self = m->isStatic() ? nullptr : std::move(self);
    f.cls = d;
    f.binding = binding;
    f.scopes.emplace_back();
    for (size_t i = 0; i < m->params.size(); ++i) f.scopes.back()[m->params[i].name] = args[i];
    exec(m->body, f);
    return f.ret ? f.ret : vUnit();
  }

  // ---------------------------------------------------------- statements

  Flow exec(const StmP &s, Frame &f) {
    for (auto st = s; st; st = st->next) {
      tick();
      if (execOne(st, f) == Flow::Return) return Flow::Return;
    }
    return Flow::Normal;
  }

  Flow block(const StmP &s, Frame &f) {
    f.scopes.emplace_back();
    size_t depth = f.scopes.size();
    Flow r = exec(s, f);
    f.scopes.resize(depth - 1);
    return r;
  }

  static bool truthy(const ValueP &v) {
    if (!v || v->kind != VK::Bool) throw RuntimeFailure("condition is not a boolean: " + canonical(v));
    return v->b;
  }

  Flow execOne(const StmP &s, Frame &f) {
    switch (s->kind) {
      case StmKind::Return:
        f.ret = s->exp ? eval(s->exp, f) : vUnit();
        return Flow::Return;
      case StmKind::ExpStm: eval(s->exp, f); return Flow::Normal;
      case StmKind::VarDecl: {
        auto v = s->exp ? eval(s->exp, f) : vNull();
        f.scopes.back()[s->name] = v;
        return Flow::Normal;
      }
      case StmKind::Assign: assign(s, f); return Flow::Normal;
      case StmKind::If:
        if (truthy(eval(s->exp, f))) return block(s->thenS, f);
        if (s->elseS) return block(s->elseS, f);
        return Flow::Normal;
      case StmKind::Block: return block(s->body, f);
      case StmKind::Switch: {
        auto v = eval(s->exp, f);
        if (!v || v->kind != VK::Enum) throw RuntimeFailure("switch on a non-enum value " + canonical(v));
        for (auto &c : s->cases)
          if (c.label == v->s) return block(c.body, f);
        if (s->hasDefault) return block(s->defaultBody, f);
        return Flow::Normal;
      }
      case StmKind::Try: {
        size_t depth = f.scopes.size();
        try {
          return block(s->body, f);
        } catch (ThrownValue &tv) {
          f.scopes.resize(depth);
          for (auto &c : s->catches) {
            if (!catches(c.te, tv.value)) continue;
            f.scopes.emplace_back();
            f.scopes.back()[c.name] = tv.value;
            Flow r = exec(c.body, f);
            f.scopes.resize(depth);
            return r;
          }
          throw;
        }
      }
      case StmKind::Throw: throw ThrownValue(eval(s->exp, f));
    }
    return Flow::Normal;
  }

  bool catches(const TypeExprP &te, const ValueP &v) const {
    if (!te) return true;
    const std::string &n = te->name;
    if (n == "Exception" || n == "RuntimeException" || n == "Throwable") return true;
    if (!v || v->kind != VK::Object) return false;
    for (const Decl *d = find(v->obj->cls); d; d = superOf(d))
      if (d->name == n) return true;
    return v->obj->cls == n;
  }

  void assign(const StmP &s, Frame &f) {
    auto rhs = eval(s->rhs, f);
    const ExpP &l = s->exp;
    ValueP *slot = nullptr;
    if (l->kind == ExpKind::Name) {
      for (auto it = f.scopes.rbegin(); it != f.scopes.rend() && !slot; ++it) {
        auto v = it->find(l->name);
        if (v != it->end()) slot = &v->second;
      }
      if (!slot && f.self) {
        auto v = f.self->fields.find(l->name);
        if (v != f.self->fields.end()) slot = &v->second;
      }
    } else if (l->kind == ExpKind::Field) {
      auto t = eval(l->target, f);
      if (!t || t->kind != VK::Object) throw RuntimeFailure("field assignment on a non-object");
      slot = &t->obj->fields[l->name];
    }
    if (!slot) throw RuntimeFailure("cannot assign to '" + l->name + "'");
    if (s->op == "=" || s->op.empty()) {
      *slot = rhs;
      return;
    }
    *slot = binary(s->op.substr(0, s->op.size() - 1), *slot, rhs);
  }

  // ---------------------------------------------------------- expressions

  static ValueP literal(const ExpP &e) {
    const std::string &t = e->text;
    switch (e->lit) {
      case LitKind::Int: {
        std::string digits = t;
        if (!digits.empty() && (digits.back() == 'L' || digits.back() == 'l')) digits.pop_back();
        return vInt(std::stoll(digits));
      }
      case LitKind::Double: return vDouble(std::stod(t));
      case LitKind::String: return vString(t);
      case LitKind::Char: return vString(t);
      case LitKind::Bool: return vBool(t == "true");
      case LitKind::Null: return vNull();
    }
    return vNull();
  }

  const ValueP *lookupVar(const std::string &n, Frame &f) const {
    for (auto it = f.scopes.rbegin(); it != f.scopes.rend(); ++it) {
      auto v = it->find(n);
      if (v != it->end()) return &v->second;
    }
    if (f.self) {
      auto v = f.self->fields.find(n);
      if (v != f.self->fields.end()) return &v->second;
    }
    return nullptr;
  }

  // class name when the receiver denotes a class rather than a value
  std::optional<std::string> classTarget(const ExpP &t, Frame &f) const {
    if (!t) return std::nullopt;
    if (t->kind == ExpKind::ClassRef) return t->name;
    if (t->kind == ExpKind::Name && !lookupVar(t->name, f) &&
        (find(t->name) || builtinClasses().count(t->name) || isTestUtils(t->name) || t->name.find('_') != std::string::npos))
      return t->name;
    return std::nullopt;
  }

  ValueP eval(const ExpP &e, Frame &f) {
    switch (e->kind) {
      case ExpKind::Literal: return literal(e);
      case ExpKind::UnitLit: return vUnit();
      case ExpKind::This:
        if (!f.self) throw RuntimeFailure("'this' in a static context");
        return vObject(f.self);
      case ExpKind::Name: {
        if (auto *v = lookupVar(e->name, f)) return *v;
        throw RuntimeFailure("unbound name '" + e->name + "'");
      }
      case ExpKind::Field: {
        if (auto cn = classTarget(e->target, f)) return staticField(*cn, e, f);
        auto t = eval(e->target, f);
        if (!t || t->kind != VK::Object) throw RuntimeFailure("field '" + e->name + "' of a non-object " + canonical(t));
        auto it = t->obj->fields.find(e->name);
        if (it == t->obj->fields.end()) throw RuntimeFailure("no field '" + e->name + "' in " + t->obj->cls);
        return it->second;
      }
      case ExpKind::Call: return call(e, f);
      case ExpKind::New: {
        std::vector<ValueP> args;
        for (auto &a : e->args) args.push_back(eval(a, f));
        if (auto *d = find(e->name)) return construct(d, physAll(f, e->roles), args);
        return constructBuiltin(e->name, args);
      }
      case ExpKind::Binary: {
        if (e->op == "&&") return vBool(truthy(eval(e->lhs, f)) && truthy(eval(e->rhs, f)));
        if (e->op == "||") return vBool(truthy(eval(e->lhs, f)) || truthy(eval(e->rhs, f)));
        auto l = eval(e->lhs, f);
        auto r = eval(e->rhs, f);
        return binary(e->op, l, r);
      }
      case ExpKind::ClassRef: throw RuntimeFailure("class '" + e->name + "' used as a value");
      case ExpKind::Chain: throw RuntimeFailure("undesugared chain");
    }
    return vUnit();
  }

  ValueP staticField(const std::string &cn, const ExpP &e, Frame &f) {
    if (cn == "System" && e->name == "out") {
      if (mode_ == Mode::Local) return vStream(role_);
      auto &t = e->target;
      return vStream(t->roles.empty() ? role_ : phys(f, t->roles[0].name));
    }
    if (cn == "Unit" && e->name == "id") return vUnit();
    if (auto *d = find(cn)) {
      if (d->kind == DeclKind::Enum) {
        for (auto &c : d->enumCases)
          if (c == e->name) return vEnum(d->name, c);
        throw RuntimeFailure("enum '" + cn + "' has no case '" + e->name + "'");
      }
    }
    throw RuntimeFailure("unknown static field '" + cn + "." + e->name + "'");
  }

  static double num(const ValueP &v) {
    if (v && v->kind == VK::Int) return static_cast<double>(v->i);
    if (v && v->kind == VK::Double) return v->d;
    throw RuntimeFailure("expected a number, got " + canonical(v));
  }

  static int64_t integer(const ValueP &v) {
    if (v && v->kind == VK::Int) return v->i;
    if (v && v->kind == VK::Double) return static_cast<int64_t>(v->d);
    throw RuntimeFailure("expected an integer, got " + canonical(v));
  }

  std::string text(const ValueP &v) const { return show(v, false, ""); }

  ValueP binary(const std::string &op, const ValueP &l, const ValueP &r) {
    if (op == "+" && ((l && l->kind == VK::String) || (r && r->kind == VK::String))) return vString(text(l) + text(r));
    if (op == "==") return vBool(valueEquals(l, r));
    if (op == "!=") return vBool(!valueEquals(l, r));
    if (op == "&&") return vBool(truthy(l) && truthy(r));
    if (op == "||") return vBool(truthy(l) || truthy(r));
    bool ints = l && r && l->kind == VK::Int && r->kind == VK::Int;
    if (op == "<") return vBool(ints ? l->i < r->i : num(l) < num(r));
    if (op == ">") return vBool(ints ? l->i > r->i : num(l) > num(r));
    if (op == "<=") return vBool(ints ? l->i <= r->i : num(l) <= num(r));
    if (op == ">=") return vBool(ints ? l->i >= r->i : num(l) >= num(r));
    if (ints) {
      int64_t a = l->i, b = r->i;
      if (op == "+") return vInt(a + b);
      if (op == "-") return vInt(a - b);
      if (op == "*") return vInt(a * b);
      if (op == "/" || op == "%") {
        if (b == 0) throw RuntimeFailure("ArithmeticException: / by zero");
        return vInt(op == "/" ? a / b : a % b);
      }
    } else {
      double a = num(l), b = num(r);
      if (op == "+") return vDouble(a + b);
      if (op == "-") return vDouble(a - b);
      if (op == "*") return vDouble(a * b);
      if (op == "/") return vDouble(a / b);
      if (op == "%") return vDouble(std::fmod(a, b));
    }
    throw RuntimeFailure("unsupported operator '" + op + "'");
  }

  std::vector<ValueP> evalArgs(const ExpP &e, Frame &f) {
    std::vector<ValueP> args;
    for (auto &a : e->args) args.push_back(eval(a, f));
    return args;
  }

  ValueP call(const ExpP &e, Frame &f) {
    if (!e->target) {
      auto args = evalArgs(e, f);
      if (e->name == "super") {
        auto *s = superOf(f.cls);
        if (!s || !f.self) return vUnit();
        auto ctor = findCtor(s, args.size());
        runCtor(s, ctor, f.self, args);
        return vUnit();
      }
      auto [d, m] = lookup(f.cls, e->name, args.size());
      if (!m) throw RuntimeFailure("no method '" + e->name + "' in '" + f.cls->name + "'");
      return invoke(d, m, f.self, f.binding, args);
    }
    if (auto cn = classTarget(e->target, f)) {
      auto args = evalArgs(e, f);
      if (*cn == "Unit" && e->name == "id") return vUnit();
      if (auto *d = find(*cn)) {
        auto [owner, m] = lookup(d, e->name, args.size());
        if (!m) throw RuntimeFailure("no static method '" + e->name + "' in '" + *cn + "'");
        std::map<std::string, std::string> b;
        chainBinding(d, physAll(f, e->target->roles), b);
        return invoke(owner, m, nullptr, b, args);
      }
      return builtinStatic(*cn, e, args, f);
    }
    auto recv = eval(e->target, f);
    auto args = evalArgs(e, f);
    return callOn(recv, e->name, args, e, f);
  }

  ValueP callOn(const ValueP &v, const std::string &name, const std::vector<ValueP> &args, const ExpP &e, Frame &f) {
    if (!v || v->kind == VK::Null) throw RuntimeFailure("NullPointerException: calling '" + name + "' on null");
    auto argc = args.size();
    auto arg = [&](size_t i) { return args.at(i); };
    switch (v->kind) {
      case VK::Object: {
        if (auto *d = find(v->obj->cls)) {
          auto [owner, m] = lookup(d, name, argc);
          if (m) return invoke(owner, m, v->obj, v->obj->binding, args);
        }
        if (name == "getMessage" && argc == 0) {
          auto it = v->obj->fields.find("message");
          return it == v->obj->fields.end() ? vNull() : it->second;
        }
        if (name == "equals" && argc == 1) return vBool(valueEquals(v, arg(0)));
        if (name == "toString" && argc == 0) return vString(text(v));
        throw RuntimeFailure("no method '" + name + "' on " + v->obj->cls);
      }
      case VK::Channel: return channelOp(v, name, args, e, f);
      case VK::Stream:
        if (name == "println") {
          std::string line = argc ? show(arg(0), false, mode_ == Mode::Global ? v->s : "") : "";
          transcripts[v->s].push_back(line);
          return vUnit();
        }
        break;
      case VK::String:
        if (name == "equals") return vBool(arg(0) && arg(0)->kind == VK::String && arg(0)->s == v->s);
        if (name == "length") return vInt(static_cast<int64_t>(v->s.size()));
        if (name == "isEmpty") return vBool(v->s.empty());
        if (name == "toString") return v;
        break;
      case VK::Int:
      case VK::Double:
        if (name == "intValue" || name == "longValue") return vInt(integer(v));
        if (name == "doubleValue") return vDouble(num(v));
        if (name == "equals") return vBool(arg(0) && arg(0)->kind == v->kind && valueEquals(v, arg(0)));
        if (name == "toString") return vString(text(v));
        break;
      case VK::Bool:
        if (name == "booleanValue") return v;
        if (name == "equals") return vBool(valueEquals(v, arg(0)));
        if (name == "toString") return vString(text(v));
        break;
      case VK::Enum:
        if (name == "equals") return vBool(valueEquals(v, arg(0)));
        if (name == "toString" || name == "name") return vString(v->s);
        break;
      case VK::List: {
        auto &l = *v->list;
        auto index = [&](const ValueP &i) {
          auto k = integer(i);
          if (k < 0 || static_cast<size_t>(k) >= l.size())
            throw RuntimeFailure("IndexOutOfBoundsException: index " + std::to_string(k) + ", size " +
                                 std::to_string(l.size()));
          return static_cast<size_t>(k);
        };
        if (name == "size") return vInt(static_cast<int64_t>(l.size()));
        if (name == "isEmpty") return vBool(l.empty());
        if (name == "get") return l[index(arg(0))];
        if (name == "add") {
          l.push_back(arg(0));
          return vBool(true);
        }
        if (name == "addAll") {
          if (!arg(0) || arg(0)->kind != VK::List) throw RuntimeFailure("addAll expects a list");
          auto copy = *arg(0)->list;
          l.insert(l.end(), copy.begin(), copy.end());
          return vBool(true);
        }
        if (name == "subList") {
          auto a = integer(arg(0)), b = integer(arg(1));
          if (a < 0 || b < a || static_cast<size_t>(b) > l.size())
            throw RuntimeFailure("IndexOutOfBoundsException: subList(" + std::to_string(a) + ", " + std::to_string(b) +
                                 ")");
          return vList(std::vector<ValueP>(l.begin() + a, l.begin() + b));
        }
        if (name == "iterator") {
          auto it = std::make_shared<Value>();
          it->kind = VK::Iter;
          it->iter = std::make_shared<IterState>(IterState{v->list, 0});
          return it;
        }
        break;
      }
      case VK::Iter: {
        auto &st = *v->iter;
        if (name == "hasNext") return vBool(st.pos < st.list->size());
        if (name == "next") {
          if (st.pos >= st.list->size()) throw RuntimeFailure("NoSuchElementException");
          return (*st.list)[st.pos++];
        }
        break;
      }
      case VK::Optional:
        if (name == "isPresent") return vBool(v->opt != nullptr);
        if (name == "isEmpty") return vBool(v->opt == nullptr);
        if (name == "get") {
          if (!v->opt) throw RuntimeFailure("NoSuchElementException: No value present");
          return v->opt;
        }
        if (name == "orElse") return v->opt ? v->opt : arg(0);
        if (name == "ifPresent") {
          if (v->opt) callOn(arg(0), "accept", {v->opt}, e, f);
          return vUnit();
        }
        break;
      default: break;
    }
    throw RuntimeFailure("no method '" + name + "' on " + canonical(v));
  }

  static void relocate(const ValueP &v, const std::string &from, const std::string &to) {
    if (!v) return;
    switch (v->kind) {
      case VK::Object:
        for (auto &[k, p] : v->obj->binding)
          if (p == from) p = to;
        for (auto &[k, rs] : v->obj->fieldRoles)
          if (rs.erase(from)) rs.insert(to);
        for (auto &[k, x] : v->obj->fields) relocate(x, from, to);
        break;
      case VK::List:
        for (auto &x : *v->list) relocate(x, from, to);
        break;
      case VK::Optional: relocate(v->opt, from, to); break;
      default: break;
    }
  }

  ValueP channelOp(const ValueP &ch, const std::string &name, const std::vector<ValueP> &args, const ExpP &e,
                   Frame &f) {
    if (name != "com" && name != "select") throw RuntimeFailure("no method '" + name + "' on a channel");
    if (args.size() != 1) throw RuntimeFailure("channel operation '" + name + "' expects one argument");
    if (mode_ == Mode::Global) {
      if (name == "select") return args[0];
      auto copy = deepCopy(args[0]);
      auto fromT = typeOf(e->args[0]);
      auto toT = typeOf(e);
      if (fromT && toT) {
        auto fr = freeRoles(fromT), tr = freeRoles(toT);
        if (fr.size() == 1 && tr.size() == 1) relocate(copy, phys(f, *fr.begin()), phys(f, *tr.begin()));
      }
      return copy;
    }
    if (!ch->ep) throw RuntimeFailure("channel has no endpoint");
    bool receive = args[0] && args[0]->kind == VK::Unit;
    if (name == "com") return receive ? comReceive(*ch->ep, cancel_) : comSend(*ch->ep, args[0], cancel_);
    return receive ? selectReceive(*ch->ep, cancel_) : selectSend(*ch->ep, args[0], cancel_);
  }

  ValueP builtinStatic(const std::string &cn, const ExpP &e, const std::vector<ValueP> &args, Frame &f) {
    const std::string &n = e->name;
    auto argc = args.size();
    auto arg = [&](size_t i) { return args.at(i); };
    if (cn == "Math") {
      if (n == "floor") return vDouble(std::floor(num(arg(0))));
      if (n == "sqrt") return vDouble(std::sqrt(num(arg(0))));
      if (n == "pow") return vDouble(std::pow(num(arg(0)), num(arg(1))));
      if (n == "abs") return arg(0)->kind == VK::Int ? vInt(std::llabs(arg(0)->i)) : vDouble(std::fabs(num(arg(0))));
      if (n == "max" || n == "min") {
        bool mx = n == "max";
        if (arg(0)->kind == VK::Int && arg(1)->kind == VK::Int)
          return vInt(mx ? std::max(arg(0)->i, arg(1)->i) : std::min(arg(0)->i, arg(1)->i));
        return vDouble(mx ? std::max(num(arg(0)), num(arg(1))) : std::min(num(arg(0)), num(arg(1))));
      }
    }
    if ((cn == "Integer" || cn == "Long") && (n == "valueOf" || n == "parseInt" || n == "parseLong") && argc == 1) {
      if (arg(0)->kind == VK::String) return vInt(std::stoll(arg(0)->s));
      return vInt(integer(arg(0)));
    }
    if (cn == "Double" && n == "valueOf") return vDouble(num(arg(0)));
    if (cn == "Boolean" && n == "valueOf") return vBool(truthy(arg(0)));
    if (cn == "String" && n == "valueOf") return vString(text(arg(0)));
    if (cn == "Optional") {
      if (n == "of") {
        if (!arg(0) || arg(0)->kind == VK::Null) throw RuntimeFailure("NullPointerException: Optional.of(null)");
        return vOptional(arg(0));
      }
      if (n == "empty") return vOptional(nullptr);
    }
    if (cn == "Assert" && n == "assertTrue") {
      ValueP cond = argc == 2 ? arg(1) : arg(0);
      if (!truthy(cond)) throw AssertionFailure(argc == 2 ? text(arg(0)) : "assertion failed");
      return vUnit();
    }
    if (isTestUtils(cn) && n == "newLocalChannel" && argc == 2) {
      if (mode_ == Mode::Global) return vChannel(nullptr);
      int side = cn == "TestUtils_B" ? 1 : 0;
      ValueP key = arg(0)->kind == VK::Unit ? arg(1) : arg(0);
      if (!key || key->kind != VK::String) throw RuntimeFailure("newLocalChannel expects a string key");
      auto ep = reg_->newLocalChannel(key->s, role_, side);
      endpoints.push_back(ep);
      return vChannel(ep);
    }
    (void)f;
    throw RuntimeFailure("unknown static method '" + cn + "." + n + "'");
  }

 private:
  Mode mode_;
  std::string role_;
  ChannelRegistry *reg_;
  const CancelToken *cancel_;
  Clock::time_point deadline_;
  std::map<std::string, const Decl *> decls_;
  std::vector<DeclP> keep_;
  int depth_ = 0;
};

// ------------------------------------------------------------ entry points

struct Entry {
  const Decl *decl = nullptr;
  MethodP method;
  MethodP ctor;
  std::vector<std::string> roles;
};

Entry resolveEntry(const CheckedProgram &cp, const Manifest &m) {
  Entry en;
  for (auto &d : cp.userDecls())
    if (d->name == m.entry) en.decl = d.get();
  if (!en.decl) throw RuntimeFailure("entry class '" + m.entry + "' not found");
  for (auto &x : en.decl->methods)
    if (x->name == m.method && x->params.size() == m.args.size() && x->hasBody) en.method = x;
  if (!en.method)
    throw RuntimeFailure("entry method '" + m.entry + "." + m.method + "' with " + std::to_string(m.args.size()) +
                         " argument(s) not found");
  en.roles = en.decl->roleNames();
  if (!m.roles.empty() && m.roles != en.roles) throw RuntimeFailure("manifest roles do not match '" + m.entry + "'");
  if (!en.method->isStatic()) {
    for (auto &c : en.decl->ctors)
      if (c->params.size() == m.ctorArgs.size()) en.ctor = c;
    if (!en.ctor && !(m.ctorArgs.empty() && en.decl->ctors.empty()))
      throw RuntimeFailure("no constructor of '" + m.entry + "' takes " + std::to_string(m.ctorArgs.size()) +
                           " argument(s)");
  }
  return en;
}

std::vector<std::string> teRoles(const TypeExprP &te) {
  std::vector<std::string> out;
  if (te)
    for (auto &r : te->roles) out.push_back(r.name);
  return out;
}

// One manifest argument for role (empty role: global, every role of the parameter).
ValueP convertSpec(Machine &mc, const json &j, const std::vector<std::string> &roles, const std::string &role,
                   ChannelRegistry *reg) {
  if (j.is_object()) {
    if (j.contains("channel")) {
      if (!reg) return vChannel(nullptr);
      auto key = j.at("channel").get<std::string>();
      int side = 0;
      for (size_t i = 0; i < roles.size(); ++i)
        if (roles[i] == role) side = static_cast<int>(i);
      auto ep = reg->newLocalChannel(key, role, side);
      mc.endpoints.push_back(ep);
      return vChannel(ep);
    }
    if (j.contains("enum")) return vEnum(j.at("enum").get<std::string>(), j.at("case").get<std::string>());
    if (j.contains("new")) {
      auto cls = j.at("new").get<std::string>();
      const Decl *d = mc.find(cls);
      if (!d) throw RuntimeFailure("manifest: unknown class '" + cls + "'");
      if (!reg && d->roles.size() != 1) throw RuntimeFailure("manifest: 'new' supports single-role classes only");
      std::vector<ValueP> args;
      if (j.contains("args"))
        for (auto &a : j.at("args")) args.push_back(convertSpec(mc, a, roles, role, reg));
      return mc.construct(d, {reg ? role : (roles.empty() ? role : roles[0])}, args);
    }
    throw RuntimeFailure("manifest: unsupported argument " + j.dump());
  }
  if (j.is_array()) {
    std::vector<ValueP> items;
    for (auto &a : j) items.push_back(convertSpec(mc, a, roles, role, reg));
    return vList(std::move(items));
  }
  if (j.is_boolean()) return vBool(j.get<bool>());
  if (j.is_number_integer()) return vInt(j.get<int64_t>());
  if (j.is_number()) return vDouble(j.get<double>());
  if (j.is_string()) return vString(j.get<std::string>());
  return vNull();
}

std::vector<ValueP> convertArgs(Machine &mc, const json &specs, const std::vector<Param> &params,
                                const std::string &role, ChannelRegistry *reg) {
  std::vector<ValueP> out;
  for (size_t i = 0; i < params.size(); ++i) {
    auto rs = teRoles(params[i].te);
    bool here = !reg || std::find(rs.begin(), rs.end(), role) != rs.end();
    out.push_back(here ? convertSpec(mc, specs.at(i), rs, role, reg) : vUnit());
  }
  return out;
}

double msSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::set<std::string> retRoles(const Entry &en) {
  std::set<std::string> out;
  if (en.method->ret && !en.method->ret->isVoid)
    for (auto &r : en.method->ret->roles) out.insert(r.name);
  return out;
}

}  // namespace

ExecutionReport evalGlobal(const CheckedProgram &cp, const Manifest &m, const RunOptions &opts) {
  ExecutionReport rep;
  auto t0 = Clock::now();
  auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts.deadlineSeconds));
  Machine mc(Mode::Global, cp.userDecls(), "", nullptr, nullptr, deadline);
  std::vector<std::string> roles;
  try {
    auto en = resolveEntry(cp, m);
    roles = en.roles;
    for (auto &r : roles) rep.roles[r];
    std::map<std::string, std::string> binding;
    mc.chainBinding(en.decl, roles, binding);
    auto args = convertArgs(mc, m.args, en.method->params, "", nullptr);
    ValueP ret;
    if (en.method->isStatic()) {
      ret = mc.invoke(en.decl, en.method, nullptr, binding, args);
    } else {
      auto cargs = en.ctor ? convertArgs(mc, m.ctorArgs, en.ctor->params, "", nullptr) : std::vector<ValueP>{};
      auto obj = mc.construct(en.decl, roles, cargs);
      ret = mc.invoke(en.decl, en.method, obj->obj, obj->obj->binding, args);
    }
    auto rr = retRoles(en);
    for (auto &r : roles)
      if (rr.count(r)) rep.roles[r].ret = viewAt(ret, r);
  } catch (const Cancelled &) {
    rep.status = RunStatus::DeadlockTimeout;
    rep.message = "deadline of " + javaDouble(opts.deadlineSeconds) + " s exceeded";
  } catch (const std::exception &e) {
    rep.status = RunStatus::Error;
    rep.message = e.what();
  }
  for (auto &[r, lines] : mc.transcripts) rep.roles[r].transcript = lines;
  rep.ms = msSince(t0);
  return rep;
}

ExecutionReport evalDistributed(const CheckedProgram &cp, const LocalProgram &lp, const Manifest &m,
                                const RunOptions &opts) {
  ExecutionReport rep;
  auto t0 = Clock::now();
  // workers stop on the cancel token; the extra second only guards against a stuck poll
  auto hardDeadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts.deadlineSeconds + 1));
  Entry en;
  try {
    en = resolveEntry(cp, m);
  } catch (const std::exception &e) {
    rep.status = RunStatus::Error;
    rep.message = e.what();
    return rep;
  }
  auto locals = asProgram(lp).decls;
  ChannelRegistry reg;
  CancelToken cancel;
  struct Worker {
    std::string role;
    std::string ret = "unit";
    std::vector<std::string> transcript;
    std::string error;
    bool cancelled = false;
    bool channelClosed = false;
    std::atomic<bool> done{false};
  };
  std::vector<std::unique_ptr<Worker>> ws;
  for (auto &r : en.roles) {
    ws.push_back(std::make_unique<Worker>());
    ws.back()->role = r;
  }
  auto rr = retRoles(en);
  std::vector<std::thread> threads;
  for (size_t i = 0; i < ws.size(); ++i) {
    threads.emplace_back([&, i] {
      Worker &w = *ws[i];
      Machine mc(Mode::Local, locals, w.role, &reg, &cancel, hardDeadline);
      try {
        auto gen = generatedName(en.decl->name, en.roles, i);
        const Decl *d = mc.find(gen);
        if (!d) throw RuntimeFailure("projected class '" + gen + "' not found");
        MethodP method;
        for (auto &x : d->methods)
          if (x->name == en.method->name && x->params.size() == en.method->params.size() && x->hasBody) method = x;
        if (!method) throw RuntimeFailure("projected method '" + gen + "." + en.method->name + "' not found");
        auto args = convertArgs(mc, m.args, en.method->params, w.role, &reg);
        ValueP ret;
        if (method->isStatic()) {
          ret = mc.invoke(d, method, nullptr, {}, args);
        } else {
          auto cargs = en.ctor ? convertArgs(mc, m.ctorArgs, en.ctor->params, w.role, &reg) : std::vector<ValueP>{};
          auto obj = mc.construct(d, {}, cargs);
          ret = mc.invoke(d, method, obj->obj, {}, args);
        }
        if (rr.count(w.role)) w.ret = show(ret, true, "");
      } catch (const Cancelled &) {
        w.cancelled = true;
      } catch (const ChannelClosed &e) {
        w.channelClosed = true;
        w.error = e.what();
      } catch (const std::exception &e) {
        w.error = e.what();
      }
      for (auto &ep : mc.endpoints) ep->chan->close(ep->side);
      w.transcript = mc.transcripts[w.role];
      w.done = true;
    });
  }
  auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts.deadlineSeconds));
  bool timedOut = false;
  for (;;) {
    bool all = true;
    for (auto &w : ws) all = all && w->done;
    if (all) break;
    if (Clock::now() > deadline) {
      timedOut = true;
      cancel.cancel();
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  for (auto &t : threads) t.join();
  std::string firstError, closedError;
  for (auto &w : ws) {
    auto &o = rep.roles[w->role];
    o.ret = w->ret;
    o.transcript = w->transcript;
    o.error = w->error;
    if (w->cancelled) timedOut = true;
    if (!w->error.empty()) {
      auto &slot = w->channelClosed ? closedError : firstError;
      if (slot.empty()) slot = w->role + ": " + w->error;
    }
  }
  if (!firstError.empty()) {
    rep.status = RunStatus::Error;
    rep.message = firstError;
  } else if (timedOut) {
    rep.status = RunStatus::DeadlockTimeout;
    rep.message = "deadline of " + javaDouble(opts.deadlineSeconds) + " s exceeded";
  } else if (!closedError.empty()) {
    rep.status = RunStatus::Error;
    rep.message = closedError;
  }
  rep.ms = msSince(t0);
  return rep;
}

DiffReport compareReports(const ExecutionReport &g, const ExecutionReport &d) {
  DiffReport r;
  r.global = g;
  r.distributed = d;
  std::ostringstream out;
  if (g.status != d.status)
    out << "status: global " << statusName(g.status) << " (" << g.message << "), distributed " << statusName(d.status)
        << " (" << d.message << ")\n";
  std::set<std::string> roles;
  for (auto &[k, v] : g.roles) roles.insert(k);
  for (auto &[k, v] : d.roles) roles.insert(k);
  for (auto &role : roles) {
    auto gi = g.roles.find(role), di = d.roles.find(role);
    RoleOutcome empty;
    auto &a = gi == g.roles.end() ? empty : gi->second;
    auto &b = di == d.roles.end() ? empty : di->second;
    if (a.ret != b.ret) out << role << " return: global " << a.ret << ", distributed " << b.ret << "\n";
    if (a.transcript != b.transcript) {
      out << role << " transcript differs:\n";
      for (auto &l : a.transcript) out << "  global> " << l << "\n";
      for (auto &l : b.transcript) out << "  local>  " << l << "\n";
    }
  }
  r.diff = out.str();
  r.equal = r.diff.empty();
  return r;
}

DiffReport differentialRun(const CheckedProgram &cp, const Manifest &m, const RunOptions &opts) {
  auto g = evalGlobal(cp, m, opts);
  DiagnosticSink diags;
  auto lp = projectProgram(cp, diags, {});
  if (diags.hasErrors()) {
    DiffReport r;
    r.global = g;
    r.distributed.status = RunStatus::Error;
    r.distributed.message = "projection failed: " + diags.all().front().message;
    r.diff = r.distributed.message;
    return r;
  }
  auto d = evalDistributed(cp, lp, m, opts);
  return compareReports(g, d);
}

}  // namespace choral
