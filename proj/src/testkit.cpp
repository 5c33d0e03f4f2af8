#include "choral/testkit.hpp"

#include "choral/tproj.hpp"

namespace choral {

std::vector<TestCase> discoverTests(const CheckedProgram &cp, DiagnosticSink &diags) {
  std::vector<TestCase> out;
  for (auto &d : cp.userDecls()) {
    for (auto &m : d->methods) {
      if (!m->hasAnnotation("Test")) continue;
      std::string why;
      if (!m->isStatic())
        why = "must be static";
      else if (!m->ret || !m->ret->isVoid)
        why = "must return void";
      else if (!m->params.empty())
        why = "must not take parameters";
      else if (!m->hasBody)
        why = "must have a body";
      if (!why.empty()) {
        diags.error(DiagCode::BadTestShape, m->nameSpan.valid() ? m->nameSpan : m->span,
                    "Test method '" + d->name + "." + m->name + "' " + why + ".");
        continue;
      }
      TestCase c{d->name, m->name, d->roleNames(), {}, m->nameSpan};
      for (size_t i = 0; i < c.roles.size(); ++i) c.units.push_back(generatedName(d->name, c.roles, i));
      out.push_back(std::move(c));
    }
  }
  return out;
}

TestRunReport runTests(const CheckedProgram &cp, const LocalProgram &lp, const std::vector<TestCase> &cases,
                       const RunOptions &opts) {
  TestRunReport rep;
  for (auto &c : cases) {
    TestResult t;
    t.name = c.name();
    t.workers = c.roles.size();
    bool projected = true;
    for (auto &u : c.units) {
      bool found = false;
      for (auto &x : lp.units) found = found || (x.generatedName == u && x.sourceChoreography == c.cls);
      if (!found) {
        t.message = "no projected unit '" + u + "'";
        projected = false;
      }
    }
    if (!projected) {
      rep.failed++;
      rep.results.push_back(std::move(t));
      continue;
    }
    Manifest m;
    m.entry = c.cls;
    m.method = c.method;
    auto r = evalDistributed(cp, lp, m, opts);
    t.ms = r.ms;
    t.passed = r.status == RunStatus::Ok;
    if (!t.passed) t.message = std::string(statusName(r.status)) + ": " + r.message;
    (t.passed ? rep.passed : rep.failed)++;
    rep.results.push_back(std::move(t));
  }
  return rep;
}

}  // namespace choral
