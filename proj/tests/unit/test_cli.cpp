#include <doctest.h>

#include <sys/wait.h>

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <filesystem>
#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// stdout only; stderr is discarded
Run choralc(const std::string &args) {
  Run r;
  std::string cmd = std::string(CHORALC_PATH) + " " + args + " 2>/dev/null";
  FILE *p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / ("choralc_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("check exit codes") {
  auto empty = scratch("empty.chor");
  { std::ofstream(empty) << ""; }
  CHECK(choralc("check " + empty.string()).code == 0);
  CHECK(choralc("check " + support::positive("DistAuth")).code == 0);
  CHECK(choralc("check " + support::corpusPath("negative/RoleAliasing.chor")).code == 1);
  CHECK(choralc("").code == 2);
  CHECK(choralc("frobnicate").code == 2);
  CHECK(choralc("check /nonexistent.chor").code == 2);
}

TEST_CASE("json diagnostics") {
  auto r = choralc("--json-diagnostics check " + support::corpusPath("negative/TypeMismatch.chor"));
  CHECK(r.code == 1);
  auto first = r.out.substr(0, r.out.find('\n'));
  auto j = nlohmann::json::parse(first);
  CHECK(j["code"] == "TypeMismatch");
  CHECK(j["line"] == 3);
}

TEST_CASE("project writes units and a manifest") {
  auto out = scratch("proj");
  fs::remove_all(out);
  REQUIRE(choralc("project " + support::positive("HelloRoles") + " --out " + out.string()).code == 0);
  CHECK(fs::exists(out / "A" / "HelloRoles_A.lchor"));
  CHECK(fs::exists(out / "B" / "HelloRoles_B.lchor"));
  auto m = nlohmann::json::parse(support::readFile((out / "manifest.json").string()));
  REQUIRE(m.size() == 2);
  CHECK(m[0]["sourceChoreography"] == "HelloRoles");
  CHECK(m[0]["file"] == "A/HelloRoles_A.lchor");
  CHECK(support::readFile((out / "A" / "HelloRoles_A.lchor").string()).find("Hello from A") != std::string::npos);
  CHECK(choralc("project " + support::corpusPath("negative/ConsumeItemsWrong.chor") + " --out " + out.string())
            .code == 1);
}

TEST_CASE("run and oracle agree") {
  auto file = support::positive("Mergesort");
  auto man = support::manifestOf("Mergesort");
  auto o = choralc("oracle " + file + " --manifest " + man);
  auto r = choralc("run " + file + " --manifest " + man + " --compare");
  REQUIRE(o.code == 0);
  REQUIRE(r.code == 0);
  auto jo = nlohmann::json::parse(o.out), jr = nlohmann::json::parse(r.out);
  CHECK(jr["compliant"] == true);
  CHECK(jo["roles"]["A"]["return"] == "[1, 2, 3, 4, 5, 6, 7, 8, 9]");
  CHECK(jr["roles"]["A"]["return"] == jo["roles"]["A"]["return"]);
}

TEST_CASE("test subcommand") {
  auto r = choralc("test " + support::positive("VitalsStreaming"));
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
  CHECK(j["name"] == "VitalsStreamingTest.test1");
  CHECK(j["status"] == "pass");
  CHECK(j["workers"] == 2);
}

TEST_CASE("bench to stdout") {
  auto r = choralc("bench " + support::positive("HelloRoles") + " " + support::positive("DistAuth") +
                   " --csv - --warmup 1 --iterations 2");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("program,choral_loc,roles,conditionals,local_loc,expansion_pct,typecheck_ms,projection_ms\n", 0) ==
        0);
  CHECK(r.out.find("\nHelloRoles,6,2,0,12,100,") != std::string::npos);
  CHECK(r.out.find("\nDistAuth,53,3,1,") != std::string::npos);
}
