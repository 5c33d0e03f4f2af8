#include <doctest.h>

#include <random>
#include <thread>

#include "choral/interpreter.hpp"
#include "choral/runtime.hpp"
#include "support.hpp"

using namespace choral;

TEST_CASE("send then receive") {
  ChannelRegistry reg;
  auto a = reg.newLocalChannel("k", "A");
  auto b = reg.newLocalChannel("k", "B");
  CHECK(a->chan == b->chan);
  CHECK(a->side != b->side);
  comSend(*a, vInt(5), nullptr);
  auto v = comReceive(*b, nullptr);
  CHECK(v->kind == VK::Int);
  CHECK(v->i == 5);
  comSend(*b, vString("Hello"), nullptr);
  CHECK(valueEquals(comReceive(*a, nullptr), vString("Hello")));
}

TEST_CASE("sent values are copies") {
  ChannelRegistry reg;
  auto a = reg.newLocalChannel("k", "A");
  auto b = reg.newLocalChannel("k", "B");
  auto list = vList({vInt(1), vInt(2)});
  comSend(*a, list, nullptr);
  list->list->push_back(vInt(3));
  auto got = comReceive(*b, nullptr);
  CHECK(got->list->size() == 2);
  CHECK(canonical(got) == "[1, 2]");
}

TEST_CASE("registry returns the same endpoint for a role") {
  ChannelRegistry reg;
  auto a1 = reg.newLocalChannel("k", "A");
  auto a2 = reg.newLocalChannel("k", "A");
  CHECK(a1 == a2);
  CHECK(reg.size() == 1);
  reg.newLocalChannel("k", "B");
  CHECK_THROWS_AS(reg.newLocalChannel("k", "C"), RuntimeFailure);
  CHECK_THROWS_AS(reg.newLocalChannel("", "A"), RuntimeFailure);
  auto p = reg.newLocalChannel("j", "B", 1);
  CHECK(p->side == 1);
  CHECK(reg.newLocalChannel("j", "A")->side == 0);
  CHECK(reg.keys() == std::vector<std::string>{"j", "k"});
}

TEST_CASE("selection labels") {
  ChannelRegistry reg;
  auto a = reg.newLocalChannel("k", "A");
  auto b = reg.newLocalChannel("k", "B");
  selectSend(*a, vEnum("Choice", "GO"), nullptr);
  auto l = selectReceive(*b, nullptr);
  CHECK(l->kind == VK::Enum);
  CHECK(l->s == "GO");
  CHECK(valueEquals(l, vEnum("Choice", "GO")));
  CHECK_THROWS_AS(selectSend(*a, vString("GO"), nullptr), RuntimeFailure);
  // data where a label is expected, and the other way round
  comSend(*a, vInt(1), nullptr);
  CHECK_THROWS_AS(selectReceive(*b, nullptr), RuntimeFailure);
  selectSend(*a, vEnum("Choice", "STOP"), nullptr);
  CHECK_THROWS_AS(comReceive(*b, nullptr), RuntimeFailure);
}

TEST_CASE("labels drive both switches on two channels") {
  ChannelRegistry reg;
  auto ipC = reg.newLocalChannel("c", "IP");
  auto cl = reg.newLocalChannel("c", "Client");
  auto ipS = reg.newLocalChannel("s", "IP");
  auto sv = reg.newLocalChannel("s", "Service");
  selectSend(*ipC, vEnum("AuthBranch", "OK"), nullptr);
  selectSend(*ipS, vEnum("AuthBranch", "OK"), nullptr);
  CHECK(selectReceive(*cl, nullptr)->s == "OK");
  CHECK(selectReceive(*sv, nullptr)->s == "OK");
}

TEST_CASE("receive after the peer exits") {
  ChannelRegistry reg;
  auto a = reg.newLocalChannel("k", "A");
  auto b = reg.newLocalChannel("k", "B");
  comSend(*a, vInt(1), nullptr);
  a->chan->close(a->side);
  // pending messages are still delivered
  CHECK(comReceive(*b, nullptr)->i == 1);
  CHECK_THROWS_AS(comReceive(*b, nullptr), ChannelClosed);
}

TEST_CASE("blocked receive is cancelled") {
  ChannelRegistry reg;
  auto a = reg.newLocalChannel("k", "A");
  reg.newLocalChannel("k", "B");
  CancelToken tok;
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    tok.cancel();
  });
  CHECK_THROWS_AS(comReceive(*a, &tok), Cancelled);
  t.join();
}

TEST_CASE("per-direction FIFO under concurrency") {
  std::mt19937 rng(11);
  for (int round = 0; round < 20; ++round) {
    ChannelRegistry reg;
    auto a = reg.newLocalChannel("k", "A");
    auto b = reg.newLocalChannel("k", "B");
    int n = 50 + static_cast<int>(rng() % 200);
    std::vector<int64_t> fromA, fromB;
    std::thread ta([&] {
      for (int i = 0; i < n; ++i) comSend(*a, vInt(i), nullptr);
      for (int i = 0; i < n; ++i) fromB.push_back(comReceive(*a, nullptr)->i);
    });
    std::thread tb([&] {
      for (int i = 0; i < n; ++i) fromA.push_back(comReceive(*b, nullptr)->i);
      for (int i = 0; i < n; ++i) comSend(*b, vInt(1000 + i), nullptr);
    });
    ta.join();
    tb.join();
    REQUIRE(fromA.size() == static_cast<size_t>(n));
    REQUIRE(fromB.size() == static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      CHECK(fromA[i] == i);
      CHECK(fromB[i] == 1000 + i);
    }
  }
}

TEST_CASE("canonical rendering") {
  CHECK(canonical(vInt(3)) == "3");
  CHECK(canonical(vString("x")) == "\"x\"");
  CHECK(canonical(vBool(true)) == "true");
  CHECK(canonical(vOptional(nullptr)) == "Optional.empty");
  CHECK(canonical(vList({vInt(1), vString("a")})) == "[1, \"a\"]");
  CHECK(toJavaString(vDouble(1.0)) == "1.0");
  CHECK(toJavaString(vString("x")) == "x");
  CHECK(valueEquals(vList({vInt(1)}), vList({vInt(1)})));
  CHECK_FALSE(valueEquals(vInt(1), vInt(2)));
}

TEST_CASE("prelude builtins") {
  DiagnosticSink d;
  auto cp = checkText("b.chor", R"(
class B@A {
  public static void run() {
    System@A.out.println(Optional@A.<String>empty().isPresent());
    List@A<Integer> xs = new ArrayList@A<Integer>();
    xs.add(15@A);
    xs.add(3@A);
    System@A.out.println(xs.subList(0@A, 1@A));
    System@A.out.println(Math@A.floor(3@A / 2@A));
    System@A.out.println(Math@A.floor(3.0@A / 2.0@A));
    Assert@A.assertTrue("x"@A, true@A);
    System@A.out.println(Optional@A.<Integer>of(4@A).get() + 1@A);
  }
}
)",
                      d);
  for (auto &x : d.all()) MESSAGE(renderBox(x));
  REQUIRE_FALSE(d.hasErrors());
  Manifest m;
  m.entry = "B";
  m.method = "run";
  auto r = evalGlobal(cp, m);
  CHECK_MESSAGE(r.status == RunStatus::Ok, r.message);
  auto &t = r.roles["A"].transcript;
  REQUIRE(t.size() == 5);
  CHECK(t[0] == "false");
  CHECK(t[1] == "[15]");
  CHECK(t[2] == "1.0");
  CHECK(t[3] == "1.0");
  CHECK(t[4] == "5");
}

TEST_CASE("assertTrue failure carries the message") {
  DiagnosticSink d;
  auto cp = checkText("a.chor", R"(
class F@A { public static void run() { Assert@A.assertTrue("bad pseudonymisation"@A, false@A); } }
)",
                      d);
  REQUIRE_FALSE(d.hasErrors());
  Manifest m;
  m.entry = "F";
  m.method = "run";
  auto r = evalGlobal(cp, m);
  CHECK(r.status == RunStatus::Error);
  CHECK(r.message.find("bad pseudonymisation") != std::string::npos);
}
