#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace choral {

struct Value;
using ValueP = std::shared_ptr<Value>;

enum class VK { Unit, Null, Int, Double, Bool, String, Enum, List, Iter, Optional, Object, Channel, Stream };

struct ObjectData {
  std::string cls;  // declared class (global) or generated class (local)
  std::map<std::string, ValueP> fields;
  // global evaluation only: formal role -> physical role, and physical roles of each field
  std::map<std::string, std::string> binding;
  std::map<std::string, std::set<std::string>> fieldRoles;
  std::vector<std::string> formals;  // declared roles of cls, in order
};

struct IterState {
  std::shared_ptr<std::vector<ValueP>> list;
  size_t pos = 0;
};

class Channel;

struct Endpoint {
  std::shared_ptr<Channel> chan;
  int side = 0;
};

struct Value {
  VK kind = VK::Unit;
  int64_t i = 0;
  double d = 0;
  bool b = false;
  std::string s;         // string payload, enum case, stream role
  std::string typeName;  // enum type
  std::shared_ptr<std::vector<ValueP>> list;
  std::shared_ptr<IterState> iter;
  ValueP opt;  // Optional payload; null when empty
  std::shared_ptr<ObjectData> obj;
  std::shared_ptr<Endpoint> ep;
};

ValueP vUnit();
ValueP vNull();
ValueP vInt(int64_t v);
ValueP vDouble(double v);
ValueP vBool(bool v);
ValueP vString(std::string v);
ValueP vEnum(std::string type, std::string label);
ValueP vList(std::vector<ValueP> items = {});
ValueP vOptional(ValueP v);  // null for empty
ValueP vObject(std::shared_ptr<ObjectData> o);
ValueP vStream(std::string role);
ValueP vChannel(std::shared_ptr<Endpoint> ep);

// Java-style string conversion, used by println and string concatenation.
std::string toJavaString(const ValueP &v);
std::string javaDouble(double d);
// Canonical structural rendering used to compare executions.
std::string canonical(const ValueP &v);
bool valueEquals(const ValueP &a, const ValueP &b);
// Structural copy: lists, optionals and objects are duplicated; channels are shared.
ValueP deepCopy(const ValueP &v);

// ------------------------------------------------------------ errors

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AssertionFailure : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};
struct Cancelled : RuntimeFailure {
  Cancelled() : RuntimeFailure("cancelled at deadline") {}
};
struct ChannelClosed : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};
// A value thrown by a throw statement.
struct ThrownValue : RuntimeFailure {
  ValueP value;
  explicit ThrownValue(ValueP v);
};

// Shared cancellation flag checked by blocking operations and the interpreters.
class CancelToken {
 public:
  void cancel() { flag_.store(true); }
  bool cancelled() const { return flag_.load(); }
  void check() const {
    if (cancelled()) throw Cancelled();
  }

 private:
  std::atomic<bool> flag_{false};
};

// ------------------------------------------------------------ channels

// Symmetric in-memory channel: one bounded FIFO per direction. Side s sends on
// queue s and receives on queue 1 - s.
class Channel {
 public:
  static constexpr size_t kCapacity = 16;
  explicit Channel(std::string key = "") : key_(std::move(key)) {}

  void send(int side, ValueP v, bool label, const CancelToken *cancel);
  ValueP receive(int side, bool label, const CancelToken *cancel);
  void close(int side);
  const std::string &key() const { return key_; }

 private:
  struct Msg {
    ValueP v;
    bool label = false;
  };
  std::string key_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Msg> q_[2];
  bool closed_[2] = {false, false};
};

ValueP comSend(const Endpoint &ep, const ValueP &v, const CancelToken *cancel);
ValueP comReceive(const Endpoint &ep, const CancelToken *cancel);
ValueP selectSend(const Endpoint &ep, const ValueP &label, const CancelToken *cancel);
ValueP selectReceive(const Endpoint &ep, const CancelToken *cancel);

// Key -> channel map shared by the workers of one execution.
class ChannelRegistry {
 public:
  // Endpoint of key for a role. The first role to claim gets side 0 unless
  // preferredSide says otherwise. A third distinct role is an error.
  std::shared_ptr<Endpoint> newLocalChannel(const std::string &key, const std::string &role, int preferredSide = -1);
  size_t size() const;
  std::vector<std::string> keys() const;

 private:
  struct Entry {
    std::shared_ptr<Channel> chan;
    std::map<std::string, std::shared_ptr<Endpoint>> claims;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

}  // namespace choral
