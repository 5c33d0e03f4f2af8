#pragma once

// Merge and normalisation properties over statement pairs harvested from the
// corpus plus randomly generated local statements.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "choral/checker.hpp"
#include "choral/parser.hpp"
#include "choral/printer.hpp"
#include "choral/projector.hpp"

namespace mergeprops {

using namespace choral;

// body of `void m() { ... }` parsed as local code
inline StmP localStms(const std::string &body) {
  DiagnosticSink d;
  auto p = parseText("gen", "class G { void m() { " + body + " } }", d);
  if (d.hasErrors() || p.decls.empty()) return nullptr;
  return p.decls[0]->methods.at(0)->body;
}

// switch cases sorted by label, recursively; the canonical form for symmetry
inline StmP sortCases(const StmP &s) {
  if (!s) return s;
  auto c = std::make_shared<Stm>(*s);
  c->thenS = sortCases(s->thenS);
  c->elseS = sortCases(s->elseS);
  c->body = sortCases(s->body);
  c->defaultBody = sortCases(s->defaultBody);
  for (auto &k : c->cases) k.body = sortCases(k.body);
  std::sort(c->cases.begin(), c->cases.end(),
            [](const SwitchCase &x, const SwitchCase &y) { return x.label < y.label; });
  for (auto &k : c->catches) k.body = sortCases(k.body);
  c->next = sortCases(s->next);
  return c;
}

inline bool sameStm(const StmP &a, const StmP &b) { return printStm(a) == printStm(b) && equalStm(a, b); }

class Generator {
 public:
  explicit Generator(unsigned seed) : rng_(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  // a statement that may carry unit residue
  std::string simple() {
    static const char *pool[] = {
        "Unit.id;",
        "Unit.id(Unit.id);",
        "Unit.id(Unit.id(x));",
        "x.f(Unit.id);",
        "ch.<T>com(v);",
        "ch.<T>com(Unit.id);",
        "String s = a;",
        "k = k + 1;",
        "Unit.id(ch.<T>com(Unit.id));",
        "System.out.println(\"p\");",
        "consumer.accept(ch.<T>com(Unit.id));",
        "{ Unit.id; }",
        "{ }",
    };
    return pool[pick(static_cast<int>(std::size(pool)))];
  }

  std::string seq(int maxLen) {
    std::string out;
    int n = pick(maxLen + 1);
    for (int i = 0; i < n; ++i) out += simple() + " ";
    return out;
  }

  std::string body(const std::string &label) { return label == "KO" ? "return Unit.id;" : seq(2); }

  // selection switch over a random subset of labels
  std::string selection(const std::vector<std::string> &labels, const std::vector<std::string> &bodies) {
    std::string s = "switch (ch.<L>select(Unit.id)) { ";
    for (size_t i = 0; i < labels.size(); ++i) s += "case " + labels[i] + " -> { " + bodies[i] + " } ";
    s += "default -> { throw new RuntimeException(\"unexpected selection label\"); } }";
    return s;
  }

  // two branches that share a prefix and end in selections on overlapping labels
  std::pair<std::string, std::string> pair() {
    static const std::vector<std::string> all{"A", "B", "C", "D", "KO"};
    std::string prefix = seq(2);
    auto subset = [&]() {
      std::vector<std::string> out;
      for (auto &l : all)
        if (pick(2)) out.push_back(l);
      if (out.empty()) out.push_back(all[pick(static_cast<int>(all.size()))]);
      return out;
    };
    // per-label bodies are fixed within a pair unless a conflict is wanted
    std::map<std::string, std::string> shared;
    for (auto &l : all) shared[l] = body(l);
    bool conflict = pick(4) == 0;
    auto bodies = [&](const std::vector<std::string> &ls) {
      std::vector<std::string> out;
      for (auto &l : ls) out.push_back(conflict && pick(2) ? body(l) : shared[l]);
      return out;
    };
    auto la = subset(), lb = subset();
    std::string a = prefix + selection(la, bodies(la));
    std::string b = prefix + selection(lb, bodies(lb));
    if (pick(5) == 0) b = seq(3);  // unrelated shapes
    return {a, b};
  }

 private:
  std::mt19937 rng_;
};

struct Outcome {
  int instances = 0;
  int harvested = 0;
  int merged = 0;  // pairs whose merge is defined
  int failures = 0;
  std::vector<std::string> messages;

  void fail(const std::string &what, const StmP &a, const StmP &b) {
    ++failures;
    if (messages.size() < 5) messages.push_back(what + "\n" + printStm(a) + "\n--\n" + printStm(b));
  }
};

inline void checkPair(const StmP &a, const StmP &b, Outcome &out) {
  ++out.instances;
  auto ma = merge(a, a);
  if (!ma || !sameStm(*ma, a)) out.fail("merge not idempotent", a, a);
  auto ab = merge(a, b), ba = merge(b, a);
  if (ab.has_value() != ba.has_value()) {
    out.fail("merge defined in one direction only", a, b);
  } else if (ab && !sameStm(sortCases(*ab), sortCases(*ba))) {
    out.fail("merge not symmetric up to case order", a, b);
  }
  if (ab) {
    ++out.merged;
    // the merge absorbs both of its inputs
    auto again = merge(*ab, a);
    if (!again || !sameStm(sortCases(*again), sortCases(*ab))) out.fail("merge does not absorb its input", *ab, a);
  }
}

inline void checkNormalize(const StmP &s, Outcome &out) {
  ++out.instances;
  auto n1 = normalizeStm(s);
  auto n2 = normalizeStm(n1);
  if (!sameStm(n1, n2)) out.fail("normalisation not idempotent", n1, n2);
}

// every branch list the projector tried to merge while projecting the corpus
inline void harvest(const std::vector<std::string> &paths, Outcome &out) {
  for (auto &path : paths) {
    DiagnosticSink d;
    auto cp = checkFiles({loadSource(path)}, d);
    if (d.hasErrors()) {
      ++out.failures;
      out.messages.push_back("corpus file does not check: " + path);
      continue;
    }
    std::vector<std::vector<StmP>> log;
    ProjectOptions po;
    po.mergeLog = &log;
    projectProgram(cp, d, po);
    for (auto &branches : log) {
      for (auto &x : branches) {
        checkNormalize(x, out);
        for (auto &y : branches) {
          checkPair(x, y, out);
          ++out.harvested;
        }
      }
    }
  }
}

inline void generated(int pairs, unsigned seed, Outcome &out) {
  Generator g(seed);
  for (int i = 0; i < pairs; ++i) {
    auto [ta, tb] = g.pair();
    auto ra = localStms(ta), rb = localStms(tb);
    if (!ra && !ta.empty()) {
      out.fail("generator produced unparsable text: " + ta, nullptr, nullptr);
      continue;
    }
    if (!rb && !tb.empty()) {
      out.fail("generator produced unparsable text: " + tb, nullptr, nullptr);
      continue;
    }
    checkNormalize(ra, out);
    checkNormalize(rb, out);
    checkPair(normalizeStm(ra), normalizeStm(rb), out);
  }
}

// the unit residue example: Unit.id(Unit.id) merged with nil is blank
inline bool residueExample() {
  auto s = localStms("Unit.id(Unit.id);");
  if (!s) return false;
  auto n = normalizeStm(s);
  auto m = merge(n, nullptr);
  return n == nullptr && m.has_value() && *m == nullptr;
}

}  // namespace mergeprops
