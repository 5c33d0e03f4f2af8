#include <doctest.h>

#include "choral/lexer.hpp"
#include "support.hpp"

using namespace choral;

namespace {

Program parseOk(const std::string &text) {
  DiagnosticSink d;
  auto p = parseText("t.chor", text, d);
  for (auto &x : d.all()) MESSAGE(renderBox(x));
  CHECK_FALSE(d.hasErrors());
  return p;
}

ExpP firstExp(const Program &p) { return p.decls.at(0)->methods.at(0)->body->exp; }

}  // namespace

TEST_CASE("HelloRoles parses to one class with two roles") {
  auto p = parseOk(support::readFile(support::positive("HelloRoles")));
  REQUIRE(p.decls.size() == 1);
  auto &d = *p.decls[0];
  CHECK(d.name == "HelloRoles");
  CHECK(d.roleNames() == std::vector<std::string>{"A", "B"});
  REQUIRE(d.methods.size() == 1);
  CHECK(d.methods[0]->name == "sayHello");
  CHECK(d.methods[0]->isStatic());
  CHECK(d.methods[0]->ret->isVoid);
}

TEST_CASE("empty input is an empty program") {
  auto p = parseOk("");
  CHECK(p.decls.empty());
  auto q = parseOk("  // only a comment\n/* and a block */\n");
  CHECK(q.decls.empty());
}

TEST_CASE("enum declaration") {
  auto p = parseOk("enum Choice@A { GO, STOP }");
  REQUIRE(p.decls.size() == 1);
  CHECK(p.decls[0]->kind == DeclKind::Enum);
  CHECK(p.decls[0]->enumCases == std::vector<std::string>{"GO", "STOP"});
  CHECK(p.decls[0]->roleNames() == std::vector<std::string>{"A"});
}

TEST_CASE("chains desugar into nested calls") {
  auto p = parseOk("class C@A { void m() { t >> ch::<T>com >> f::apply >> ch::<R>com; } }");
  CHECK(printExp(firstExp(p)) == "ch.<R>com(f.apply(ch.<T>com(t)))");

  auto q = parseOk("class C@A { void m() { x >> Foo@A::new; } }");
  auto e = firstExp(q);
  CHECK(e->kind == ExpKind::New);
  CHECK(e->name == "Foo");
  REQUIRE(e->args.size() == 1);
  CHECK(e->args[0]->kind == ExpKind::Name);

  // no chain survives parsing
  auto all = parseOk(support::readFile(support::positive("DistAuth")));
  for (auto &d : all.decls)
    for (auto &m : d->methods)
      if (m->body) forEachExp(m->body, [](const ExpP &x) { CHECK(x->kind != ExpKind::Chain); });
}

TEST_CASE("desugaring a chain-free expression is the identity") {
  auto p = parseOk("class C@A { void m() { f.g(1@A, h(x)); } }");
  auto e = firstExp(p);
  CHECK(equalExp(desugarChain(e), e));
}

TEST_CASE("literal role lists expand in argument position") {
  auto p = parseOk("class C@A { void m() { g(\"k\"@[A, B, C]); } }");
  auto e = firstExp(p);
  REQUIRE(e->args.size() == 3);
  std::vector<std::string> roles;
  for (auto &a : e->args) {
    CHECK(a->text == "k");
    REQUIRE(a->roles.size() == 1);
    roles.push_back(a->roles[0].name);
  }
  CHECK(roles == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("literal role list outside argument position is a syntax error") {
  DiagnosticSink d;
  parseText("t.chor", "class C@A { void m() { String@A x = \"k\"@[A, B]; } }", d);
  CHECK(support::hasCode(d, DiagCode::SyntaxError));
}

TEST_CASE("binary operator precedence") {
  auto p = parseOk("class C@A { void m() { g(1@A + 2@A * 3@A, 1@A < 2@A && true@A); } }");
  auto e = firstExp(p);
  CHECK(e->args[0]->op == "+");
  CHECK(e->args[0]->rhs->op == "*");
  CHECK(e->args[1]->op == "&&");
  CHECK(e->args[1]->lhs->op == "<");
}

TEST_CASE("syntax errors point at the offending token") {
  DiagnosticSink d;
  parseText("t.chor", "class C@A {\n  void m( { }\n}", d);
  REQUIRE(d.hasErrors());
  CHECK(d.all()[0].code == DiagCode::SyntaxError);
  CHECK(d.all()[0].line() == 2);
  CHECK(d.all()[0].span.valid());
}

TEST_CASE("grammar coverage") {
  auto p = parseOk(R"(
interface Shape@A<T@X extends Object@X> { T@A area(); }
@SomeAnnotation(key = "v")
public abstract class Box@(A, B)<T@X, S@Y> extends Base@(A, B)<T> implements Shape@A<T> {
  private final T@A t;
  protected static S@B s;
  public Box(T@A t) { super(); this.t = t; }
  public <R@Z extends Object@Z & Cmp@Z<R>> R@A m(Integer@A i, Double@B d) {
    Integer@A k = 0@A;
    k += 1@A;
    k = -k;
    if (i > 0@A || !false@A) { k = k * 2@A; } else { if (i == 0@A) { k = 1@A; } else { return null@A; } }
    switch (Choice@A.GO) {
      case GO -> { k = 1@A; }
      case STOP -> { }
      default -> { throw new RuntimeException@A("x"@A); }
    }
    try { g('c'@A, 1.5@B, 10L@A); } catch (RuntimeException@A e) { k = 2@A; }
    Foo@A.<T>bar(this.t, new ArrayList@A<T>());
    return null@A;
  }
}
)");
  CHECK(p.decls.size() == 2);
}

TEST_CASE("print and reparse round-trips every positive program") {
  for (auto &name : support::positives()) {
    CAPTURE(name);
    DiagnosticSink d1, d2;
    auto p1 = parseText(name, support::readFile(support::positive(name)), d1);
    REQUIRE_FALSE(d1.hasErrors());
    auto t1 = printProgram(p1);
    auto p2 = parseText(name, t1, d2);
    REQUIRE_FALSE(d2.hasErrors());
    CHECK(printProgram(p2) == t1);
  }
}

TEST_CASE("lexer splits >> and reads literals") {
  DiagnosticSink d;
  auto toks = lex(std::make_shared<SourceFile>("t", "a >> b List<List<T>> \"s\\n\" 'c' 1.5 42 class"), d);
  CHECK_FALSE(d.hasErrors());
  std::vector<std::string> texts;
  for (auto &t : toks) texts.push_back(t.text);
  REQUIRE(toks.back().kind == Tok::End);
  CHECK(texts[1] == ">");
  CHECK(texts[2] == ">");
  CHECK(toks[1].span.end == toks[2].span.start);
  int closers = 0;
  for (auto &t : texts) closers += t == ">";
  CHECK(closers == 4);
  bool sawString = false, sawKeyword = false, sawDouble = false;
  for (auto &t : toks) {
    if (t.kind == Tok::String) sawString = t.text == "s\n";
    if (t.kind == Tok::Keyword && t.text == "class") sawKeyword = true;
    if (t.kind == Tok::Double) sawDouble = t.text == "1.5";
  }
  CHECK(sawString);
  CHECK(sawKeyword);
  CHECK(sawDouble);
}

TEST_CASE("unterminated string is reported") {
  DiagnosticSink d;
  lex(std::make_shared<SourceFile>("t", "\"abc"), d);
  CHECK(d.hasErrors());
}
