#pragma once

#include <vector>

#include "choral/ast.hpp"
#include "choral/diagnostic.hpp"
#include "choral/source.hpp"

namespace choral {

// Parses one file as written; Chain nodes and literal role lists are kept.
Program parseRaw(const SourceRef &file, DiagnosticSink &diags);

// Rewrites every `e >> obj::m` into `obj.m(e)` (and `>> C::new` into a New).
ExpP desugarChain(const ExpP &e);
void desugarProgram(Program &p);

// Expands `lit@[R1,..,Rn]` arguments into n located copies.
void expandLiteralLists(Program &p, DiagnosticSink &diags);

// Full front end: parse every file, desugar chains and expand literal lists.
Program parseProgram(const std::vector<SourceRef> &files, DiagnosticSink &diags);
Program parseText(const std::string &name, const std::string &text, DiagnosticSink &diags);

}  // namespace choral
