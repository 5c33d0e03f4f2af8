#include "choral/lexer.hpp"

#include <cctype>
#include <set>

namespace choral {

bool isKeyword(const std::string &s) {
  static const std::set<std::string> kw = {
      "class",  "interface", "enum",      "extends", "implements", "return", "if",
      "else",   "switch",    "case",      "default", "try",        "catch",  "throw",
      "new",    "this",      "null",      "true",    "false",      "void",   "public",
      "private", "protected", "static",   "abstract", "final",     "super"};
  return kw.count(s) > 0;
}

namespace {

class Lexer {
 public:
  Lexer(const SourceRef &f, DiagnosticSink &d) : file_(f), src_(f->text()), diags_(d) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skipTrivia();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = Tok::End;
    end.span = span(static_cast<uint32_t>(src_.size()), static_cast<uint32_t>(src_.size()));
    out.push_back(end);
    return out;
  }

 private:
  Span span(uint32_t a, uint32_t b) const { return Span{file_, a, b}; }

  void skipTrivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && peek(1) == '*') {
        uint32_t start = static_cast<uint32_t>(pos_);
        pos_ += 2;
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) ++pos_;
        if (pos_ >= src_.size()) {
          diags_.error(DiagCode::SyntaxError, span(start, start + 2), "Unterminated comment.");
          return;
        }
        pos_ += 2;
      } else {
        return;
      }
    }
  }

  char peek(size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  Token make(Tok k, std::string text, size_t start) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.span = span(static_cast<uint32_t>(start), static_cast<uint32_t>(pos_));
    return t;
  }

  char escape(char c) {
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '0': return '\0';
      default: return c;
    }
  }

  Token next() {
    size_t start = pos_;
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '$'))
        ++pos_;
      std::string w = src_.substr(start, pos_ - start);
      return make(isKeyword(w) ? Tok::Keyword : Tok::Ident, w, start);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      bool dbl = false;
      if (peek(0) == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        dbl = true;
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      std::string w = src_.substr(start, pos_ - start);
      if (peek(0) == 'L' || peek(0) == 'l') ++pos_;  // long suffix
      return make(dbl ? Tok::Double : Tok::Int, w, start);
    }
    if (c == '"' || c == '\'') {
      char q = c;
      ++pos_;
      std::string v;
      while (pos_ < src_.size() && src_[pos_] != q && src_[pos_] != '\n') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
          v += escape(src_[pos_ + 1]);
          pos_ += 2;
        } else {
          v += src_[pos_++];
        }
      }
      if (pos_ >= src_.size() || src_[pos_] != q) {
        diags_.error(DiagCode::SyntaxError, span(static_cast<uint32_t>(start), static_cast<uint32_t>(pos_)),
                     "Unterminated literal.");
      } else {
        ++pos_;
      }
      return make(q == '"' ? Tok::String : Tok::Char, v, start);
    }
    static const char *two[] = {"::", "->", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%="};
    for (auto *op : two) {
      if (c == op[0] && peek(1) == op[1]) {
        pos_ += 2;
        return make(Tok::Punct, op, start);
      }
    }
    static const std::string single = "@.,;(){}[]<>+-*/%&|!=?:";
    if (single.find(c) != std::string::npos) {
      ++pos_;
      return make(Tok::Punct, std::string(1, c), start);
    }
    ++pos_;
    diags_.error(DiagCode::SyntaxError, span(static_cast<uint32_t>(start), static_cast<uint32_t>(pos_)),
                 std::string("Unexpected character '") + c + "'.");
    return next_or_end();
  }

  Token next_or_end() {
    skipTrivia();
    if (pos_ >= src_.size()) return make(Tok::End, "", pos_);
    return next();
  }

  SourceRef file_;
  const std::string &src_;
  DiagnosticSink &diags_;
  size_t pos_ = 0;
};

}  // namespace

std::vector<Token> lex(const SourceRef &file, DiagnosticSink &diags) {
  auto toks = Lexer(file, diags).run();
  // an End produced by error recovery mid-stream is dropped
  std::vector<Token> out;
  for (size_t i = 0; i < toks.size(); ++i)
    if (toks[i].kind != Tok::End || i + 1 == toks.size()) out.push_back(toks[i]);
  return out;
}

}  // namespace choral
