#include <doctest.h>

#include <regex>

#include "choral/interpreter.hpp"
#include "support.hpp"

using namespace choral;
using nlohmann::json;

namespace {

struct Loaded {
  DiagnosticSink d;
  CheckedProgram cp;
  LocalProgram lp;
  Manifest m;
  explicit Loaded(const std::string &name) {
    cp = support::checkPath(support::positive(name), d);
    REQUIRE_FALSE(d.hasErrors());
    lp = projectProgram(cp, d);
    REQUIRE_FALSE(d.hasErrors());
    m = Manifest::load(support::manifestOf(name));
  }
};

std::string listText(const std::vector<long long> &xs) {
  std::string s = "[";
  for (size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
  return s + "]";
}

// Optional[...] or Optional.empty inside a rendered AuthResult
std::string optionalPart(const std::string &ret) {
  std::smatch mt;
  if (std::regex_search(ret, mt, std::regex(R"(Optional(\.empty|\[.*\]))"))) return mt[0];
  return "";
}

json withoutTiming(const ExecutionReport &r) {
  auto j = reportJson(r);
  j.erase("ms");
  return j;
}

}  // namespace

TEST_CASE("HelloRoles transcripts") {
  Loaded l("HelloRoles");
  auto g = evalGlobal(l.cp, l.m);
  REQUIRE(g.status == RunStatus::Ok);
  CHECK(g.roles["A"].transcript == std::vector<std::string>{"Hello from A"});
  CHECK(g.roles["B"].transcript == std::vector<std::string>{"Hello from B"});
  auto d = evalDistributed(l.cp, l.lp, l.m);
  REQUIRE(d.status == RunStatus::Ok);
  CHECK(d.roles["A"].transcript == std::vector<std::string>{"Hello from A"});
  CHECK(d.roles["B"].transcript == std::vector<std::string>{"Hello from B"});
}

TEST_CASE("Mergesort sorts both ways") {
  Loaded l("Mergesort");
  l.m.args = json::array({json::array({15, 3, 14})});
  auto g = evalGlobal(l.cp, l.m);
  REQUIRE_MESSAGE(g.status == RunStatus::Ok, g.message);
  CHECK(g.roles["A"].ret == "[3, 14, 15]");
  auto d = evalDistributed(l.cp, l.lp, l.m);
  REQUIRE_MESSAGE(d.status == RunStatus::Ok, d.message);
  CHECK(d.roles["A"].ret == "[3, 14, 15]");
  CHECK(d.roles.size() == 3);
}

TEST_CASE("Mergesort on edge inputs") {
  Loaded l("Mergesort");
  for (auto input : std::vector<std::vector<long long>>{{}, {7}, {2, 1}, {4, 4, 4}, {9, 8, 7, 6, 5, 4, 3, 2, 1}}) {
    CAPTURE(listText(input));
    l.m.args = json::array({input});
    auto sorted = input;
    std::sort(sorted.begin(), sorted.end());
    auto r = differentialRun(l.cp, l.m);
    CHECK_MESSAGE(r.equal, r.diff);
    CHECK(r.global.roles["A"].ret == listText(sorted));
  }
}

TEST_CASE("Karatsuba multiplies") {
  Loaded l("Karatsuba");
  l.m.args = json::array({1234, 5678});
  auto g = evalGlobal(l.cp, l.m);
  REQUIRE_MESSAGE(g.status == RunStatus::Ok, g.message);
  CHECK(g.roles["A"].ret == std::to_string(1234LL * 5678LL));
  CHECK(g.roles["A"].ret == "7006652");
  for (auto [x, y] : std::vector<std::pair<long long, long long>>{{0, 5}, {-12, 34}, {999999, -999999}, {7, 1}}) {
    l.m.args = json::array({x, y});
    auto r = differentialRun(l.cp, l.m);
    CHECK_MESSAGE(r.equal, r.diff);
    CHECK(r.distributed.roles["A"].ret == std::to_string(x * y));
  }
}

TEST_CASE("every positive program runs the same both ways") {
  for (auto &name : support::positives()) {
    CAPTURE(name);
    Loaded l(name);
    auto r = differentialRun(l.cp, l.m);
    CHECK_MESSAGE(r.global.status == RunStatus::Ok, r.global.message);
    CHECK_MESSAGE(r.distributed.status == RunStatus::Ok, r.distributed.message);
    CHECK_MESSAGE(r.equal, r.diff);
  }
}

TEST_CASE("DistAuth hands out tokens to both or neither") {
  Loaded l("DistAuth");
  auto good = evalDistributed(l.cp, l.lp, l.m);
  REQUIRE_MESSAGE(good.status == RunStatus::Ok, good.message);
  auto c = optionalPart(good.roles["Client"].ret), s = optionalPart(good.roles["Service"].ret);
  CHECK(c == "Optional[AuthToken{id=\"token-42\"}]");
  CHECK(c == s);

  l.m.args = json::parse(R"([{"new": "Credentials", "args": ["alice", "wrong"]}])");
  auto bad = evalDistributed(l.cp, l.lp, l.m);
  REQUIRE_MESSAGE(bad.status == RunStatus::Ok, bad.message);
  CHECK(optionalPart(bad.roles["Client"].ret) == "Optional.empty");
  CHECK(optionalPart(bad.roles["Service"].ret) == "Optional.empty");
  auto g = evalGlobal(l.cp, l.m);
  CHECK(compareReports(g, bad).equal);
}

TEST_CASE("mismatched units time out instead of hanging") {
  DiagnosticSink d;
  auto cp = checkText("p.chor", R"(
class P@(A, B) {
  public static void run(SymChannel@(A, B)<Object> ch) { ch.<String>com("x"@A); }
}
)",
                      d);
  REQUIRE_FALSE(d.hasErrors());
  auto lp = projectProgram(cp, d);
  REQUIRE_FALSE(d.hasErrors());
  Manifest m;
  m.entry = "P";
  m.method = "run";
  m.args = json::parse(R"([{"channel": "p"}])");
  RunOptions fast{0.5};
  CHECK(evalDistributed(cp, lp, m, fast).status == RunStatus::Ok);

  // A now waits for a message too
  DiagnosticSink pd;
  auto parsed = parseText("P_A", "class P_A { public static void run(SymChannel_A<Object> ch) { ch.<String>com(Unit.id); } }", pd);
  REQUIRE_FALSE(pd.hasErrors());
  for (auto &u : lp.units)
    if (u.generatedName == "P_A") u.decl = parsed.decls[0];
  auto r = evalDistributed(cp, lp, m, fast);
  CHECK(r.status == RunStatus::DeadlockTimeout);
  CHECK(r.ms < 3000);
}

TEST_CASE("a worker error is reported") {
  DiagnosticSink d;
  auto cp = checkText("p.chor", R"(
class P@(A, B) {
  public static void run(SymChannel@(A, B)<Object> ch) { ch.<String>com("x"@A); }
}
)",
                      d);
  auto lp = projectProgram(cp, d);
  Manifest m;
  m.entry = "P";
  m.method = "run";
  m.args = json::parse(R"([{"channel": "p"}])");
  DiagnosticSink pd;
  // B expects a label where A sends data
  auto parsed = parseText("P_B", "class P_B { public static void run(SymChannel_B<Object> ch) { ch.<K>select(Unit.id); } }", pd);
  for (auto &u : lp.units)
    if (u.generatedName == "P_B") u.decl = parsed.decls[0];
  auto r = evalDistributed(cp, lp, m, {2});
  CHECK(r.status == RunStatus::Error);
  CHECK_FALSE(r.roles["B"].error.empty());
}

TEST_CASE("global evaluation is deterministic") {
  for (auto &name : support::positives()) {
    CAPTURE(name);
    Loaded l(name);
    auto a = withoutTiming(evalGlobal(l.cp, l.m));
    auto b = withoutTiming(evalGlobal(l.cp, l.m));
    CHECK(a == b);
  }
}

TEST_CASE("manifest round trip and errors") {
  auto m = Manifest::load(support::manifestOf("DistAuth"));
  CHECK(m.entry == "DistAuth");
  CHECK(m.method == "authenticate");
  auto back = Manifest::fromJson(m.toJson());
  CHECK(back.toJson() == m.toJson());
  CHECK_THROWS(Manifest::fromJson(json::parse(R"({"method": "x"})")));
  CHECK_THROWS(Manifest::load("/nonexistent/manifest.json"));
}

TEST_CASE("unknown entry is an error, not a crash") {
  Loaded l("HelloRoles");
  l.m.entry = "Nope";
  CHECK(evalGlobal(l.cp, l.m).status == RunStatus::Error);
  CHECK(evalDistributed(l.cp, l.lp, l.m).status == RunStatus::Error);
  l.m.entry = "HelloRoles";
  l.m.method = "nope";
  CHECK(evalGlobal(l.cp, l.m).status == RunStatus::Error);
}

TEST_CASE("report comparison spots a difference") {
  ExecutionReport a, b;
  a.roles["A"].ret = "1";
  b.roles["A"].ret = "2";
  auto r = compareReports(a, b);
  CHECK_FALSE(r.equal);
  CHECK(r.diff.find("A") != std::string::npos);
  b.roles["A"].ret = "1";
  CHECK(compareReports(a, b).equal);
  b.roles["A"].transcript.push_back("x");
  CHECK_FALSE(compareReports(a, b).equal);
}
