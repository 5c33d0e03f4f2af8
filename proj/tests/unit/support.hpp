#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "choral/checker.hpp"
#include "choral/parser.hpp"
#include "choral/printer.hpp"
#include "choral/projector.hpp"

namespace support {

inline std::string corpusPath(const std::string &rel) { return std::string(CHORAL_CORPUS_DIR) + "/" + rel; }

inline std::string readFile(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const std::vector<std::string> &positives() {
  static const std::vector<std::string> names{"BuyerSellerShipper", "ConsumeItems", "DistAuth",
                                              "DistAuth10",         "DistAuth5",    "HelloRoles",
                                              "Karatsuba",          "Mergesort",    "VitalsStreaming"};
  return names;
}

inline std::string positive(const std::string &name) { return corpusPath("positive/" + name + ".chor"); }
inline std::string manifestOf(const std::string &name) { return corpusPath("manifests/" + name + ".json"); }

inline choral::CheckedProgram checkPath(const std::string &path, choral::DiagnosticSink &d) {
  return choral::checkFiles({choral::loadSource(path)}, d);
}

inline const choral::Decl *declNamed(const choral::Program &p, const std::string &name) {
  for (auto &d : p.decls)
    if (d->name == name) return d.get();
  return nullptr;
}

inline const choral::Method *methodNamed(const choral::Decl &d, const std::string &name) {
  for (auto &m : d.methods)
    if (m->name == name) return m.get();
  return nullptr;
}

// every expression in every method and constructor body of the user declarations
inline void eachExp(const choral::CheckedProgram &cp, const std::function<void(const choral::ExpP &)> &f) {
  for (auto &d : cp.userDecls()) {
    for (auto &m : d->methods)
      if (m->body) choral::forEachExp(m->body, f);
    for (auto &m : d->ctors)
      if (m->body) choral::forEachExp(m->body, f);
  }
}

inline choral::ExpP findExp(const choral::CheckedProgram &cp, const std::function<bool(const choral::ExpP &)> &pred) {
  choral::ExpP hit;
  eachExp(cp, [&](const choral::ExpP &e) {
    if (!hit && pred(e)) hit = e;
  });
  return hit;
}

inline const choral::LocalDecl *unitNamed(const choral::LocalProgram &lp, const std::string &name) {
  for (auto &u : lp.units)
    if (u.generatedName == name) return &u;
  return nullptr;
}

inline bool hasCode(const choral::DiagnosticSink &d, choral::DiagCode c) {
  for (auto &x : d.all())
    if (x.code == c) return true;
  return false;
}

}  // namespace support
