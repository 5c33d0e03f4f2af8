#include "choral/runtime.hpp"

#include <charconv>
#include <cmath>

namespace choral {

static ValueP make(VK k) {
  auto v = std::make_shared<Value>();
  v->kind = k;
  return v;
}

ValueP vUnit() {
  static const ValueP u = make(VK::Unit);
  return u;
}

ValueP vNull() {
  static const ValueP n = make(VK::Null);
  return n;
}

ValueP vInt(int64_t x) {
  auto v = make(VK::Int);
  v->i = x;
  return v;
}

ValueP vDouble(double x) {
  auto v = make(VK::Double);
  v->d = x;
  return v;
}

ValueP vBool(bool x) {
  auto v = make(VK::Bool);
  v->b = x;
  return v;
}

ValueP vString(std::string x) {
  auto v = make(VK::String);
  v->s = std::move(x);
  return v;
}

ValueP vEnum(std::string type, std::string label) {
  auto v = make(VK::Enum);
  v->typeName = std::move(type);
  v->s = std::move(label);
  return v;
}

ValueP vList(std::vector<ValueP> items) {
  auto v = make(VK::List);
  v->list = std::make_shared<std::vector<ValueP>>(std::move(items));
  return v;
}

ValueP vOptional(ValueP x) {
  auto v = make(VK::Optional);
  v->opt = std::move(x);
  return v;
}

ValueP vObject(std::shared_ptr<ObjectData> o) {
  auto v = make(VK::Object);
  v->obj = std::move(o);
  return v;
}

ValueP vStream(std::string role) {
  auto v = make(VK::Stream);
  v->s = std::move(role);
  return v;
}

ValueP vChannel(std::shared_ptr<Endpoint> ep) {
  auto v = make(VK::Channel);
  v->ep = std::move(ep);
  return v;
}

std::string javaDouble(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
  if (d == 0) return std::signbit(d) ? "-0.0" : "0.0";
  char buf[64];
  double a = std::fabs(d);
  if (a >= 1e-3 && a < 1e7) {
    auto r = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed);
    std::string s(buf, r.ptr);
    if (s.find('.') == std::string::npos) s += ".0";
    return s;
  }
  auto r = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::scientific);
  std::string s(buf, r.ptr);
  auto e = s.find('e');
  std::string mant = s.substr(0, e), ex = s.substr(e + 1);
  if (mant.find('.') == std::string::npos) mant += ".0";
  if (!ex.empty() && ex[0] == '+') ex = ex.substr(1);
  size_t nz = 0;
  bool neg = !ex.empty() && ex[0] == '-';
  if (neg) ex = ex.substr(1);
  while (nz + 1 < ex.size() && ex[nz] == '0') ++nz;
  return mant + "E" + (neg ? "-" : "") + ex.substr(nz);
}

static std::string quoted(const std::string &s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

static std::string render(const ValueP &v, bool canon) {
  if (!v) return "null";
  switch (v->kind) {
    case VK::Unit: return "unit";
    case VK::Null: return "null";
    case VK::Int: return std::to_string(v->i);
    case VK::Double: return javaDouble(v->d);
    case VK::Bool: return v->b ? "true" : "false";
    case VK::String: return canon ? quoted(v->s) : v->s;
    case VK::Enum: return canon ? v->typeName + "." + v->s : v->s;
    case VK::List: {
      std::string s = "[";
      for (size_t i = 0; i < v->list->size(); ++i) s += (i ? ", " : "") + render((*v->list)[i], canon);
      return s + "]";
    }
    case VK::Iter: return "<iterator>";
    case VK::Optional: return v->opt ? "Optional[" + render(v->opt, canon) + "]" : "Optional.empty";
    case VK::Object: {
      std::string s = v->obj->cls + "{";
      bool first = true;
      for (auto &[k, f] : v->obj->fields) {
        s += (first ? "" : ", ") + k + "=" + render(f, canon);
        first = false;
      }
      return s + "}";
    }
    case VK::Channel: return "<channel>";
    case VK::Stream: return "<stream>";
  }
  return "?";
}

std::string toJavaString(const ValueP &v) { return render(v, false); }
std::string canonical(const ValueP &v) { return render(v, true); }

bool valueEquals(const ValueP &a, const ValueP &b) {
  if (!a || !b) return a == b;
  if (a->kind == VK::Object || b->kind == VK::Object) return a->obj == b->obj;
  if ((a->kind == VK::Int || a->kind == VK::Double) && (b->kind == VK::Int || b->kind == VK::Double)) {
    double x = a->kind == VK::Int ? static_cast<double>(a->i) : a->d;
    double y = b->kind == VK::Int ? static_cast<double>(b->i) : b->d;
    if (a->kind == VK::Int && b->kind == VK::Int) return a->i == b->i;
    return x == y;
  }
  if (a->kind == VK::Channel || b->kind == VK::Channel) return a->ep == b->ep;
  return canonical(a) == canonical(b);
}

ValueP deepCopy(const ValueP &v) {
  if (!v) return v;
  switch (v->kind) {
    case VK::List: {
      std::vector<ValueP> items;
      for (auto &x : *v->list) items.push_back(deepCopy(x));
      return vList(std::move(items));
    }
    case VK::Optional: return vOptional(deepCopy(v->opt));
    case VK::Object: {
      auto o = std::make_shared<ObjectData>(*v->obj);
      for (auto &[k, f] : o->fields) f = deepCopy(f);
      return vObject(o);
    }
    case VK::Iter: {
      auto c = std::make_shared<Value>(*v);
      c->iter = std::make_shared<IterState>(*v->iter);
      return c;
    }
    default: return v;
  }
}

static std::string thrownMessage(const ValueP &v) {
  if (v && v->kind == VK::Object) {
    auto it = v->obj->fields.find("message");
    if (it != v->obj->fields.end()) return v->obj->cls + ": " + toJavaString(it->second);
  }
  return "uncaught exception: " + toJavaString(v);
}

ThrownValue::ThrownValue(ValueP v) : RuntimeFailure(thrownMessage(v)), value(std::move(v)) {}

// ------------------------------------------------------------ channels

static constexpr auto kPoll = std::chrono::milliseconds(20);

void Channel::send(int side, ValueP v, bool label, const CancelToken *cancel) {
  std::unique_lock<std::mutex> lk(mu_);
  while (q_[side].size() >= kCapacity) {
    if (cancel) cancel->check();
    if (closed_[1 - side]) throw ChannelClosed("send on channel '" + key_ + "': peer has terminated");
    cv_.wait_for(lk, kPoll);
  }
  q_[side].push_back(Msg{std::move(v), label});
  cv_.notify_all();
}

ValueP Channel::receive(int side, bool label, const CancelToken *cancel) {
  std::unique_lock<std::mutex> lk(mu_);
  auto &q = q_[1 - side];
  while (q.empty()) {
    if (cancel) cancel->check();
    if (closed_[1 - side]) throw ChannelClosed("receive on channel '" + key_ + "': peer has terminated");
    cv_.wait_for(lk, kPoll);
  }
  auto m = std::move(q.front());
  q.pop_front();
  cv_.notify_all();
  if (m.label != label)
    throw RuntimeFailure(std::string("channel '") + key_ + "': expected " + (label ? "a selection label" : "data") +
                         " but received " + (m.label ? "a selection label" : "data"));
  return m.v;
}

void Channel::close(int side) {
  std::lock_guard<std::mutex> lk(mu_);
  closed_[side] = true;
  cv_.notify_all();
}

ValueP comSend(const Endpoint &ep, const ValueP &v, const CancelToken *cancel) {
  ep.chan->send(ep.side, deepCopy(v), false, cancel);
  return vUnit();
}

ValueP comReceive(const Endpoint &ep, const CancelToken *cancel) { return ep.chan->receive(ep.side, false, cancel); }

ValueP selectSend(const Endpoint &ep, const ValueP &label, const CancelToken *cancel) {
  if (!label || label->kind != VK::Enum) throw RuntimeFailure("select expects an enum label, got " + canonical(label));
  ep.chan->send(ep.side, label, true, cancel);
  return vUnit();
}

ValueP selectReceive(const Endpoint &ep, const CancelToken *cancel) {
  auto v = ep.chan->receive(ep.side, true, cancel);
  if (!v || v->kind != VK::Enum) throw RuntimeFailure("received a non-enum selection label");
  return v;
}

std::shared_ptr<Endpoint> ChannelRegistry::newLocalChannel(const std::string &key, const std::string &role,
                                                           int preferredSide) {
  if (key.empty()) throw RuntimeFailure("channel key must not be empty");
  std::lock_guard<std::mutex> lk(mu_);
  auto &e = entries_[key];
  if (!e.chan) e.chan = std::make_shared<Channel>(key);
  auto it = e.claims.find(role);
  if (it != e.claims.end()) return it->second;
  if (e.claims.size() >= 2)
    throw RuntimeFailure("channel '" + key + "' already connects two roles; '" + role + "' cannot join");
  int side = 0;
  if (e.claims.size() == 1) {
    side = 1 - e.claims.begin()->second->side;
  } else if (preferredSide == 0 || preferredSide == 1) {
    side = preferredSide;
  }
  auto ep = std::make_shared<Endpoint>(Endpoint{e.chan, side});
  e.claims[role] = ep;
  return ep;
}

size_t ChannelRegistry::size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return entries_.size();
}

std::vector<std::string> ChannelRegistry::keys() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<std::string> out;
  for (auto &[k, e] : entries_) out.push_back(k);
  return out;
}

}  // namespace choral
