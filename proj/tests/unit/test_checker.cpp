#include <doctest.h>
#include <filesystem>

#include <json.hpp>

#include "support.hpp"

using namespace choral;

namespace {

struct Checked {
  DiagnosticSink d;
  CheckedProgram cp;
  explicit Checked(const std::string &text) { cp = checkText("t.chor", text, d); }
  bool ok() const { return !d.hasErrors(); }
  bool has(DiagCode c) const { return support::hasCode(d, c); }
  std::string dump() const {
    std::string s;
    for (auto &x : d.all()) s += renderBox(x) + "\n";
    return s;
  }
};

}  // namespace

TEST_CASE("every positive program checks without errors") {
  for (auto &name : support::positives()) {
    CAPTURE(name);
    DiagnosticSink d;
    auto cp = support::checkPath(support::positive(name), d);
    for (auto &x : d.all()) MESSAGE(renderBox(x));
    CHECK_FALSE(d.hasErrors());
    CHECK(cp.ok);
  }
}

TEST_CASE("negative corpus yields the designated code at the designated line") {
  for (auto &e : std::filesystem::directory_iterator(support::corpusPath("negative"))) {
    if (e.path().extension() != ".chor") continue;
    auto sidecar = e.path();
    sidecar.replace_extension(".expected.json");
    auto want = nlohmann::json::parse(support::readFile(sidecar.string()));
    CAPTURE(e.path().filename().string());
    DiagnosticSink d;
    auto cp = support::checkPath(e.path().string(), d);
    if (!d.hasErrors()) projectProgram(cp, d);
    REQUIRE(d.hasErrors());
    bool found = false;
    for (auto &x : d.all()) {
      if (x.severity != Severity::Error) continue;
      if (codeName(x.code) == want["code"].get<std::string>() && x.line() == want["line"].get<int>()) {
        found = true;
        if (want.contains("role")) CHECK(x.role == want["role"].get<std::string>());
      }
    }
    CHECK(found);
    // no spurious errors of another code at the same line
    for (auto &x : d.all())
      if (x.severity == Severity::Error && x.line() == want["line"].get<int>())
        CHECK(codeName(x.code) == want["code"].get<std::string>());
  }
}

TEST_CASE("incompatible initialiser message") {
  Checked c("class T@A { void m() { Integer@A x = \"foo\"@A; } }");
  REQUIRE(c.has(DiagCode::TypeMismatch));
  auto &x = c.d.all().at(0);
  CHECK(x.message == "Incompatible types: expecting 'Integer@A' found 'String@A'.");
  REQUIRE(x.expectingFound);
  CHECK(x.expectingFound->first == "Integer@A");
  CHECK(x.expectingFound->second == "String@A");
}

TEST_CASE("binary operands at different roles") {
  Checked c("class T@(A, B) { void m() { Integer@A x = 1@A + 1@B; } }");
  CHECK(c.has(DiagCode::TypeMismatch));
  Checked ok("class T@(A, B) { void m() { Integer@A x = 1@A + 1@A; Integer@B y = 2@B * 3@B; } }");
  CHECK_MESSAGE(ok.ok(), ok.dump());
}

TEST_CASE("synthesised expression types") {
  Checked c("class T@(A, B) { void m() { String@A s = \"foo\"@A; Boolean@B b = 1@B < 2@B; } }");
  REQUIRE_MESSAGE(c.ok(), c.dump());
  auto lit = support::findExp(c.cp, [](const ExpP &e) { return e->kind == ExpKind::Literal && e->text == "foo"; });
  REQUIRE(lit);
  CHECK(show(typeOf(lit)) == "String@A");
  CHECK(rolesOf(lit) == std::set<std::string>{"A"});
  auto cmp = support::findExp(c.cp, [](const ExpP &e) { return e->kind == ExpKind::Binary; });
  REQUIRE(cmp);
  CHECK(show(typeOf(cmp)) == "Boolean@B");
}

TEST_CASE("com moves a value to the receiving role") {
  DiagnosticSink d;
  auto cp = support::checkPath(support::positive("DistAuth"), d);
  REQUIRE_FALSE(d.hasErrors());
  auto com = support::findExp(cp, [](const ExpP &e) {
    return e->kind == ExpKind::Call && e->name == "com" && e->args.size() == 1 && e->args[0]->kind == ExpKind::Field &&
           e->args[0]->name == "username";
  });
  REQUIRE(com);
  CHECK(show(typeOf(com)) == "String@IP");
  CHECK(rolesOf(com) == std::set<std::string>{"Client", "IP"});
  CHECK(show(typeOf(com->args[0])) == "String@Client");
}

TEST_CASE("iterator guard and selection types in ConsumeItems") {
  DiagnosticSink d;
  auto cp = support::checkPath(support::positive("ConsumeItems"), d);
  REQUIRE_FALSE(d.hasErrors());
  auto hasNext = support::findExp(cp, [](const ExpP &e) { return e->kind == ExpKind::Call && e->name == "hasNext"; });
  REQUIRE(hasNext);
  CHECK(show(typeOf(hasNext)) == "Boolean@A");
  auto sel = support::findExp(cp, [](const ExpP &e) { return e->kind == ExpKind::Call && e->name == "select"; });
  REQUIRE(sel);
  CHECK(show(typeOf(sel)) == "Choice@B");
  REQUIRE(sel->method);
  CHECK(sel->method->selection);
}

TEST_CASE("literal lists type per role") {
  Checked c(R"(
class T@(A, B) {
  static void m() {
    SymChannel@(A, B)<Object> ch = TestUtils@(A, B).newLocalChannel("k"@[A, B]);
  }
}
)");
  CHECK_MESSAGE(c.ok(), c.dump());
}

TEST_CASE("every expression of an accepted program is annotated") {
  for (auto &name : support::positives()) {
    CAPTURE(name);
    DiagnosticSink d;
    auto cp = support::checkPath(support::positive(name), d);
    REQUIRE_FALSE(d.hasErrors());
    int missing = 0, total = 0;
    support::eachExp(cp, [&](const ExpP &e) {
      ++total;
      if (!typeOf(e)) ++missing;
    });
    CHECK(total > 0);
    CHECK(missing == 0);
  }
}

TEST_CASE("rolesOf is monotone over subterms") {
  for (auto &name : support::positives()) {
    CAPTURE(name);
    DiagnosticSink d;
    auto cp = support::checkPath(support::positive(name), d);
    REQUIRE_FALSE(d.hasErrors());
    support::eachExp(cp, [&](const ExpP &e) {
      auto outer = rolesOf(e);
      auto sub = [&](const ExpP &s) {
        if (!s) return;
        for (auto &r : rolesOf(s)) CHECK(outer.count(r));
      };
      sub(e->target);
      sub(e->lhs);
      sub(e->rhs);
      for (auto &a : e->args) sub(a);
      // the type's own roles are always included
      if (auto t = typeOf(e))
        for (auto &r : freeRoles(t)) CHECK(outer.count(r));
    });
  }
}

TEST_CASE("role applications in the corpus are never aliased") {
  for (auto &name : support::positives()) {
    DiagnosticSink d;
    auto cp = support::checkPath(support::positive(name), d);
    REQUIRE_FALSE(d.hasErrors());
    for (auto &decl : cp.userDecls())
      forEachTE(*decl, [&](const TypeExprP &te) {
        std::set<std::string> seen;
        for (auto &r : te->roles) CHECK(seen.insert(r.name).second);
      });
  }
}

TEST_CASE("overload resolution picks the most specific method") {
  Checked c(R"(
class T@A {
  static Integer@A m(Object@A x) { return 1@A; }
  static String@A m(String@A x) { return "s"@A; }
  static void use() { String@A r = m("q"@A); Integer@A i = m(3@A); }
}
)");
  CHECK_MESSAGE(c.ok(), c.dump());
}

TEST_CASE("incomparable overloads are ambiguous") {
  Checked c(R"(
class T@A {
  static void m(String@A x) { }
  static void m(Integer@A x) { }
  static void use() { m(null@A); }
}
)");
  CHECK(c.has(DiagCode::AmbiguousCall));
}

TEST_CASE("no applicable method") {
  Checked c("class T@A { static void m(String@A x) { } static void m(Boolean@A x) { } static void use() { m(1@A); } }");
  CHECK(c.has(DiagCode::NoApplicableMethod));
  // a single candidate reports the offending argument instead
  Checked one("class T@A { static void m(String@A x) { } static void use() { m(1@A); } }");
  CHECK(one.has(DiagCode::TypeMismatch));
}

TEST_CASE("com accepts a subtype of the channel's data type") {
  Checked c(R"(
class T@(A, B) {
  static Number@B send(DiDataChannel@(A, B)<Number> ch, Integer@A v) { return ch.<Integer>com(v); }
}
)");
  CHECK_MESSAGE(c.ok(), c.dump());
  auto com = support::findExp(c.cp, [](const ExpP &e) { return e->kind == ExpKind::Call && e->name == "com"; });
  REQUIRE(com);
  CHECK(show(typeOf(com)) == "Integer@B");
}

TEST_CASE("return statements") {
  Checked ok(R"(
class T@A {
  static List@A<Integer> id(List@A<Integer> a) { return a; }
  static void empty() { }
  static Integer@A implicit() { }
}
)");
  CHECK_MESSAGE(ok.ok(), ok.dump());

  Checked bad(R"(
class T@(A, B) {
  static String@A roundTrip(SymChannel@(A, B)<Object> ch, String@A m) { return ch.<String>com(m); }
}
)");
  CHECK(bad.has(DiagCode::TypeMismatch));
}

TEST_CASE("DistAuth authenticate checks against AuthResult") {
  DiagnosticSink d;
  auto cp = support::checkPath(support::positive("DistAuth"), d);
  REQUIRE_FALSE(d.hasErrors());
  auto ci = cp.find("DistAuth");
  REQUIRE(ci);
  bool found = false;
  for (auto &m : ci->methods)
    if (m->name == "authenticate") {
      found = true;
      CHECK(show(m->ret) == "AuthResult@(Client,Service)");
    }
  CHECK(found);
}

TEST_CASE("role constraints") {
  CHECK(Checked("class T@(A, B) { void m(DiChannel@(A, A)<String> c) { } }").has(DiagCode::RoleAliasing));
  CHECK(Checked("class T@(A, A) { }").has(DiagCode::RoleAliasing));
  CHECK(Checked("interface S@(A, B)<T@X> extends S@(B, A)<T> { }").has(DiagCode::CyclicInheritance));
  CHECK(Checked("class T@(A, B) { void m(Char@A x) { } void m(Long@A x) { } }").has(DiagCode::IllegalOverload));
  Checked fine("class T@(A, B) { void m(Char@B x) { } void m(Char@A x) { } }");
  CHECK_MESSAGE(fine.ok(), fine.dump());
  CHECK(Checked("class P@(A, B) { } class C@(A, B, C) extends P@(A, B) { }").has(DiagCode::RoleSetMismatch));
}

TEST_CASE("selection annotations") {
  CHECK(Checked(R"(
interface Bad@(A, B) { @SelectionMethod String@B com(String@A m); }
)")
            .has(DiagCode::BadSelectionAnnotation));
  CHECK(Checked(R"(
interface Bad@(A, B) { @SelectionMethod void ping(); }
)")
            .has(DiagCode::BadSelectionAnnotation));
  Checked ok(R"(
interface Good@(A, B) { @SelectionMethod <T@X extends Enum@X<T>> T@B select(T@A m); }
)");
  CHECK_MESSAGE(ok.ok(), ok.dump());
}

TEST_CASE("missing abstract implementation") {
  Checked c(R"(
interface I@A { Integer@A f(); }
class C@A implements I@A { }
)");
  CHECK(c.has(DiagCode::MissingImplementation));
}

TEST_CASE("unknown names") {
  CHECK(Checked("class T@A { void m() { Integer@A x = y; } }").has(DiagCode::UnknownName));
  CHECK(Checked("class T@A { void m(Nope@A x) { } }").has(DiagCode::UnknownName));
}

TEST_CASE("guards must be booleans") {
  CHECK(Checked("class T@A { void m() { if (1@A) { } } }").has(DiagCode::BadGuard));
}

TEST_CASE("unused role is only a warning") {
  Checked c("class U@(A, B) { void m(String@A x) { } }");
  CHECK(c.ok());
  CHECK(c.has(DiagCode::UnusedRole));
}

TEST_CASE("checking is deterministic") {
  for (auto &path : {support::positive("DistAuth"), support::corpusPath("negative/TypeMismatch.chor"),
                     support::corpusPath("negative/IllegalOverload.chor")}) {
    std::vector<std::string> runs;
    for (int i = 0; i < 3; ++i) {
      DiagnosticSink d;
      support::checkPath(path, d);
      std::string s;
      for (auto &x : d.all()) s += renderJson(x) + "\n";
      runs.push_back(s);
    }
    CHECK(runs[0] == runs[1]);
    CHECK(runs[1] == runs[2]);
  }
}

TEST_CASE("json diagnostics carry code, line and column") {
  Checked c("class T@A {\n  void m() { Integer@A x = \"foo\"@A; }\n}");
  REQUIRE(c.has(DiagCode::TypeMismatch));
  auto j = nlohmann::json::parse(renderJson(c.d.all().at(0)));
  CHECK(j["code"] == "TypeMismatch");
  CHECK(j["line"] == 2);
  CHECK(j.contains("column"));
}
