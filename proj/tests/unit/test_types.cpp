#include <doctest.h>
#include <algorithm>

#include "support.hpp"

using namespace choral;

namespace {

// each probe method carries the types under test as parameters
const char *kProbe = R"(
interface Probe@(A, B)<T@X, R@Y> {
  void sym(SymChannel@(A, B)<T> x);
  void symBA(SymChannel@(B, A)<T> x);
  void diDataAB(DiDataChannel@(A, B)<T> x);
  void diDataBA(DiDataChannel@(B, A)<T> x);
  void diDataBAR(DiDataChannel@(B, A)<R> x);
  void diSelAB(DiSelectChannel@(A, B) x);
  void diSelBA(DiSelectChannel@(B, A) x);
  void diChanAB(DiChannel@(A, B)<T> x);
  void diChanBA(DiChannel@(B, A)<T> x);
  void biChanTT(BiChannel@(A, B)<T, T> x);
  void biDataTR(BiDataChannel@(A, B)<T, R> x);
  void biDataTT(BiDataChannel@(A, B)<T, T> x);
  void symData(SymDataChannel@(A, B)<T> x);
  void str(String@A x);
  void obj(Object@A x);
  void integer(Integer@A x);
  void number(Number@A x);
  void numberB(Number@B x);
  void notify(DiDataChannel@(A, B)<String> x);
}
)";

struct Probe {
  CheckedProgram cp;
  const ClassInfo *cls = nullptr;
  Probe() {
    DiagnosticSink d;
    cp = checkText("probe.chor", kProbe, d);
    for (auto &x : d.all()) MESSAGE(renderBox(x));
    REQUIRE_FALSE(d.hasErrors());
    cls = cp.find("Probe");
    REQUIRE(cls);
  }
  TypeP operator[](const std::string &m) const {
    for (auto &mi : cls->methods)
      if (mi->name == m) return mi->params.at(0);
    FAIL("no probe method " << m);
    return nullptr;
  }
  bool sub(const std::string &a, const std::string &b) const {
    TypeOps ops(*cp.table);
    for (auto &f : cls->ftps) ops.vars()[f.name] = f.kind;
    return ops.isSubtype((*this)[a], (*this)[b]);
  }
};

}  // namespace

TEST_CASE("SymChannel is a subtype of the six channel views") {
  Probe p;
  CHECK(p.sub("sym", "diDataAB"));
  CHECK(p.sub("sym", "diDataBA"));
  CHECK(p.sub("sym", "diSelAB"));
  CHECK(p.sub("sym", "diSelBA"));
  CHECK(p.sub("sym", "diChanAB"));
  CHECK(p.sub("sym", "biChanTT"));
}

TEST_CASE("SymChannel with swapped roles is not a subtype") {
  Probe p;
  CHECK_FALSE(p.sub("symBA", "sym"));
  CHECK_FALSE(p.sub("sym", "symBA"));
  CHECK(p.sub("sym", "sym"));
}

TEST_CASE("channel hierarchy edges") {
  Probe p;
  CHECK(p.sub("biDataTR", "diDataBAR"));
  CHECK(p.sub("biDataTR", "diDataAB"));
  CHECK_FALSE(p.sub("biDataTR", "diDataBA"));  // T flows A to B only
  CHECK(p.sub("diChanAB", "diSelAB"));
  CHECK_FALSE(p.sub("diChanAB", "diSelBA"));
  CHECK(p.sub("symData", "biDataTT"));
  CHECK_FALSE(p.sub("diDataAB", "sym"));
}

TEST_CASE("subtyping on lifted data types") {
  Probe p;
  CHECK(p.sub("integer", "number"));
  CHECK(p.sub("integer", "obj"));
  CHECK(p.sub("str", "obj"));
  CHECK_FALSE(p.sub("str", "integer"));
  CHECK_FALSE(p.sub("number", "integer"));
  CHECK_FALSE(p.sub("number", "numberB"));
  CHECK(p.sub("integer", "integer"));
}

TEST_CASE("supertype closure of BiDataChannel swaps roles for the second parent") {
  Probe p;
  TypeOps ops(*p.cp.table);
  for (auto &f : p.cls->ftps) ops.vars()[f.name] = f.kind;
  std::vector<std::string> shown;
  for (auto &i : ops.closure(p["biDataTR"])) shown.push_back(show(i.type));
  auto has = [&](const std::string &s) { return std::find(shown.begin(), shown.end(), s) != shown.end(); };
  CHECK(has(show(p["diDataAB"])));
  CHECK(has(show(p["diDataBAR"])));
  CHECK_FALSE(has(show(p["diDataBA"])));
  CHECK(show(p["biDataTR"]) == shown.front());
}

TEST_CASE("denotation of type expressions") {
  Probe p;
  auto s = p["str"];
  CHECK(s->tag == TypeTag::App);
  CHECK(show(s) == "String@A");
  CHECK(freeRoles(s) == std::set<std::string>{"A"});
  auto n = p["notify"];
  CHECK(show(n) == "DiDataChannel@(A,B)<String>");
  auto sp = spine(n);
  REQUIRE(sp.head->tag == TypeTag::Sym);
  CHECK(sp.head->name == "DiDataChannel");
  CHECK(spineRoles(sp) == std::vector<std::string>{"A", "B"});
  CHECK(spineTypeArgs(sp).size() == 1);
  auto m = p.cls->methods.at(0).get();
  CHECK(m->ret->tag == TypeTag::Void);
}

TEST_CASE("kinding") {
  Probe p;
  auto &theta = p.cp.table->theta();
  std::string err;

  auto role = kindOf(theta, tRole("A"), &err);
  REQUIRE(role);
  CHECK(role->tag == KindTag::Role);

  auto intB = kindOf(theta, tApp(tSym("Integer", 1), tRole("B")), &err);
  REQUIRE(intB);
  REQUIRE(intB->tag == KindTag::Star);
  REQUIRE(intB->bound);
  CHECK(show(intB->bound) == "Number@B");

  auto integer = kindOf(theta, tSym("Integer", 1), &err);
  REQUIRE(integer);
  CHECK(integer->tag == KindTag::Ctor);
  CHECK(integer->param->tag == KindTag::Role);

  auto chan = kindOf(theta, tApps(tSym("DiDataChannel", 2), {tRole("A"), tRole("B"), tSym("String", 1)}), &err);
  REQUIRE(chan);
  CHECK(chan->tag == KindTag::Star);

  err.clear();
  CHECK_FALSE(kindOf(theta, tApp(tSym("Integer", 1), tSym("String", 1)), &err));
  CHECK_FALSE(err.empty());
  err.clear();
  CHECK_FALSE(kindOf(theta, tApp(tApp(tSym("Integer", 1), tRole("A")), tRole("B")), &err));
  CHECK_FALSE(err.empty());
}

TEST_CASE("reduction") {
  auto id = tApp(tAbs("X", roleKind(), tRole("X")), tRole("A"));
  auto r = reduce(id);
  CHECK(alphaEq(r, tRole("A")));

  // eta: \Y. String@Y is String
  auto eta = tAbs("Y", roleKind(), tApp(tSym("String", 1), tRole("Y")));
  CHECK(alphaEq(reduce(eta), tSym("String", 1)));

  auto applied = tApp(tAbs("Y", roleKind(), tApp(tSym("String", 1), tRole("Y"))), tRole("B"));
  CHECK(show(reduce(applied)) == "String@B");

  // alpha equivalence ignores binder names
  CHECK(alphaEq(tAbs("P", roleKind(), tApp(tSym("Foo", 2), tRole("P"))),
                tAbs("Q", roleKind(), tApp(tSym("Foo", 2), tRole("Q")))));
}

TEST_CASE("reduction is idempotent on every signature type in the corpus") {
  int seen = 0;
  for (auto &name : support::positives()) {
    DiagnosticSink d;
    auto cp = support::checkPath(support::positive(name), d);
    REQUIRE_FALSE(d.hasErrors());
    for (auto &[_, ci] : cp.table->classes) {
      auto visit = [&](const TypeP &t) {
        if (!t) return;
        auto r = reduce(t);
        CHECK(alphaEq(reduce(r), r));
        ++seen;
      };
      for (auto &s : ci->supers) visit(s);
      for (auto &f : ci->fields) visit(f.type);
      for (auto &m : ci->methods) {
        for (auto &pt : m->params) visit(pt);
        visit(m->ret);
      }
    }
  }
  CHECK(seen > 100);
}
