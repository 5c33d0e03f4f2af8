#pragma once

#include <string>
#include <vector>

#include "choral/diagnostic.hpp"
#include "choral/source.hpp"

namespace choral {

enum class Tok { Ident, Keyword, Int, Double, String, Char, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // lexeme; unescaped value for strings/chars
  Span span;
};

// '>' is always emitted alone so that '>>' can close nested type arguments;
// the parser recognises the chain operator as two adjacent '>' tokens.
std::vector<Token> lex(const SourceRef &file, DiagnosticSink &diags);

bool isKeyword(const std::string &s);

}  // namespace choral
