#include <doctest.h>

#include "../common/merge_props.hpp"
#include "support.hpp"

using namespace choral;
using mergeprops::localStms;

namespace {

std::string norm(const std::string &body) { return squash(printStm(normalizeStm(localStms(body)))); }

}  // namespace

TEST_CASE("unit residue normalises away") {
  CHECK(normalizeStm(localStms("Unit.id;")) == nullptr);
  CHECK(normalizeStm(localStms("Unit.id(Unit.id);")) == nullptr);
  CHECK(mergeprops::residueExample());
  CHECK(norm("f(Unit.id(Unit.id(x)));") == squash("f(Unit.id);"));
  CHECK(norm("f(Unit.id(Unit.id(g())));") == squash("f(g());"));
  CHECK(norm("Unit.id(g(), h());") == squash("Unit.id(g(), h());"));
  CHECK(norm("Unit.id(ch.<T>com(Unit.id));") == squash("ch.<T>com(Unit.id);"));
  CHECK(norm("a.b(Unit.id); Unit.id;") == squash("a.b(Unit.id);"));
  CHECK(norm("{ Unit.id; }") == "");
}

TEST_CASE("noop detection") {
  auto e = [](const std::string &text) { return normalizeExp(localStms(text + ";")->exp); };
  CHECK(isNoop(e("Unit.id")));
  CHECK(isNoop(e("Unit.id(Unit.id)")));
  CHECK_FALSE(isNoop(e("ch.<T>com(Unit.id)")));
  CHECK_FALSE(isNoop(e("Unit.id(f())")));
  CHECK(isNoop(e("this.x")));
  CHECK(isNoop(e("null")));
}

TEST_CASE("merging equal statements is the identity") {
  auto s = normalizeStm(localStms("String s = a; ch.<T>com(s); return Unit.id;"));
  auto m = merge(s, s);
  REQUIRE(m);
  CHECK(printStm(*m) == printStm(s));
}

TEST_CASE("selection switches merge by case union") {
  auto a = normalizeStm(localStms("switch (ch.<L>select(Unit.id)) { case OK -> { x.f(); } default -> { throw new RuntimeException(\"u\"); } }"));
  auto b = normalizeStm(localStms("switch (ch.<L>select(Unit.id)) { case KO -> { x.g(); } default -> { throw new RuntimeException(\"u\"); } }"));
  auto m = merge(a, b);
  REQUIRE(m);
  REQUIRE((*m)->cases.size() == 2);
  CHECK((*m)->cases[0].label == "OK");
  CHECK((*m)->cases[1].label == "KO");
  CHECK((*m)->hasDefault);
}

TEST_CASE("irreconcilable statements do not merge") {
  MergeConflict c;
  auto a = normalizeStm(localStms("x.f();"));
  auto b = normalizeStm(localStms("x.g();"));
  CHECK_FALSE(merge(a, b, &c));
  CHECK(c.left);
  CHECK(c.right);
  CHECK_FALSE(merge(a, nullptr));
  // different guards
  auto s1 = normalizeStm(localStms("switch (c1.<L>select(Unit.id)) { case OK -> { } }"));
  auto s2 = normalizeStm(localStms("switch (c2.<L>select(Unit.id)) { case OK -> { } }"));
  CHECK_FALSE(merge(s1, s2));
  // shared label with different bodies
  auto t1 = normalizeStm(localStms("switch (c.<L>select(Unit.id)) { case OK -> { x.f(); } }"));
  auto t2 = normalizeStm(localStms("switch (c.<L>select(Unit.id)) { case OK -> { x.g(); } }"));
  CHECK_FALSE(merge(t1, t2));
}

TEST_CASE("merge properties on harvested and generated pairs") {
  std::vector<std::string> paths;
  for (auto &n : support::positives()) paths.push_back(support::positive(n));
  mergeprops::Outcome out;
  mergeprops::harvest(paths, out);
  CHECK(out.harvested > 0);
  mergeprops::generated(600, 7u, out);
  for (auto &m : out.messages) MESSAGE(m);
  CHECK(out.failures == 0);
  CHECK(out.instances >= 500);
  // both outcomes of merge are exercised
  CHECK(out.merged > 100);
  CHECK(out.merged < out.instances);
  MESSAGE("instances " << out.instances << ", harvested " << out.harvested << ", merged " << out.merged);
}
