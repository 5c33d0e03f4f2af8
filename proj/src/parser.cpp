#include "choral/parser.hpp"

#include <set>

#include "choral/lexer.hpp"

namespace choral {

namespace {

struct ParseError {};

const std::set<std::string> kModifiers = {"public", "private", "protected", "static", "abstract", "final"};
const std::set<std::string> kAsgOps = {"=", "+=", "-=", "*=", "/=", "%="};

class Parser {
 public:
  Parser(SourceRef file, DiagnosticSink &d) : file_(std::move(file)), diags_(d) {
    toks_ = lex(file_, diags_);
  }

  Program program() {
    Program p;
    while (!atEnd()) {
      size_t before = pos_;
      try {
        p.decls.push_back(decl());
      } catch (ParseError &) {
        syncDecl();
        if (pos_ == before) ++pos_;
      }
    }
    return p;
  }

 private:
  // ---- token helpers
  const Token &cur() const { return toks_[pos_]; }
  const Token &at(size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool atEnd() const { return cur().kind == Tok::End; }
  bool is(const char *t) const {
    return (cur().kind == Tok::Punct || cur().kind == Tok::Keyword) && cur().text == t;
  }
  bool isAt(size_t k, const char *t) const {
    auto &tk = at(k);
    return (tk.kind == Tok::Punct || tk.kind == Tok::Keyword) && tk.text == t;
  }
  bool isIdent() const { return cur().kind == Tok::Ident; }
  Token advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(const char *t) {
    if (!is(t)) return false;
    advance();
    return true;
  }

  std::string describe(const Token &t) const {
    if (t.kind == Tok::End) return "end of file";
    if (t.kind == Tok::String) return "\"" + t.text + "\"";
    return t.text;
  }

  [[noreturn]] void fail(const std::string &expected) {
    if (!speculating_)
      diags_.error(DiagCode::SyntaxError, cur().span,
                   "Syntax error: expected " + expected + " but found '" + describe(cur()) + "'.");
    throw ParseError{};
  }

  Token expect(const char *t) {
    if (!is(t)) fail(std::string("'") + t + "'");
    return advance();
  }

  Token ident(const char *what = "identifier") {
    if (!isIdent()) fail(what);
    return advance();
  }

  Span spanFrom(size_t startTok) const {
    size_t last = pos_ > 0 ? pos_ - 1 : 0;
    if (last < startTok) last = startTok;
    return toks_[startTok].span.to(toks_[last].span);
  }

  bool chainOp() const {
    return is(">") && isAt(1, ">") && cur().span.end == at(1).span.start;
  }

  void syncDecl() {
    int depth = 0;
    while (!atEnd()) {
      if (is("{")) ++depth;
      if (is("}")) {
        --depth;
        if (depth <= 0) {
          advance();
          return;
        }
      }
      advance();
    }
  }

  void syncStm() {
    int depth = 0;
    while (!atEnd()) {
      if (is("{")) ++depth;
      if (is("}")) {
        if (depth == 0) return;
        --depth;
      }
      if (is(";") && depth == 0) {
        advance();
        return;
      }
      advance();
    }
  }

  // ---- roles, types
  std::vector<RoleRef> roleArgs() {
    std::vector<RoleRef> rs;
    expect("@");
    if (accept("(")) {
      do {
        auto t = ident("role name");
        rs.push_back({t.text, t.span});
      } while (accept(","));
      expect(")");
    } else {
      auto t = ident("role name");
      rs.push_back({t.text, t.span});
    }
    return rs;
  }

  TypeExprP typeExpr() {
    size_t start = pos_;
    auto te = std::make_shared<TypeExpr>();
    if (accept("void")) {
      te->name = "void";
      te->isVoid = true;
      te->span = spanFrom(start);
      return te;
    }
    te->name = ident("type").text;
    if (is("@")) te->roles = roleArgs();
    if (is("<")) te->args = typeArgs();
    if (te->roles.empty() && is("@")) te->roles = roleArgs();
    te->span = spanFrom(start);
    return te;
  }

  std::vector<TypeExprP> typeArgs() {
    std::vector<TypeExprP> out;
    expect("<");
    if (is(">")) {
      advance();
      return out;
    }
    do out.push_back(typeExpr());
    while (accept(","));
    expect(">");
    return out;
  }

  std::vector<FTP> ftps() {
    std::vector<FTP> out;
    expect("<");
    do {
      size_t start = pos_;
      FTP f;
      f.name = ident("type parameter").text;
      if (is("@")) f.roles = roleArgs();
      if (accept("extends")) {
        do f.bounds.push_back(typeExpr());
        while (accept("&"));
      }
      f.span = spanFrom(start);
      out.push_back(std::move(f));
    } while (accept(","));
    expect(">");
    return out;
  }

  // ---- annotations, modifiers
  std::vector<Annotation> annotations() {
    std::vector<Annotation> out;
    while (is("@") && at(1).kind == Tok::Ident) {
      size_t start = pos_;
      advance();
      Annotation a;
      a.name = advance().text;
      if (accept("(")) {
        if (!is(")")) {
          do {
            std::string key = "value";
            if (isIdent() && isAt(1, "=")) {
              key = advance().text;
              advance();
            }
            auto v = advance();
            a.args.push_back({key, v.text});
          } while (accept(","));
        }
        expect(")");
      }
      a.span = spanFrom(start);
      out.push_back(std::move(a));
    }
    return out;
  }

  std::vector<std::string> modifiers() {
    std::vector<std::string> out;
    while ((cur().kind == Tok::Keyword || cur().kind == Tok::Ident) && kModifiers.count(cur().text))
      out.push_back(advance().text);
    return out;
  }

  // ---- declarations
  DeclP decl() {
    size_t start = pos_;
    auto d = std::make_shared<Decl>();
    d->annotations = annotations();
    d->modifiers = modifiers();
    if (accept("class"))
      d->kind = DeclKind::Class;
    else if (accept("interface"))
      d->kind = DeclKind::Interface;
    else if (accept("enum"))
      d->kind = DeclKind::Enum;
    else
      fail("'class', 'interface' or 'enum'");
    auto nameTok = ident("declaration name");
    d->name = nameTok.text;
    d->nameSpan = nameTok.span;
    if (is("@")) d->roles = roleArgs();
    if (is("<")) d->ftps = ftps();
    if (d->kind == DeclKind::Enum) {
      expect("{");
      if (!is("}")) {
        do {
          if (is("}")) break;
          d->enumCases.push_back(ident("enum case").text);
        } while (accept(","));
      }
      accept(";");
      expect("}");
      d->span = spanFrom(start);
      return d;
    }
    if (accept("extends")) {
      do d->extends.push_back(typeExpr());
      while (accept(","));
    }
    if (accept("implements")) {
      do d->implements.push_back(typeExpr());
      while (accept(","));
    }
    expect("{");
    while (!is("}") && !atEnd()) {
      size_t before = pos_;
      try {
        member(*d);
      } catch (ParseError &) {
        syncStm();
        if (pos_ == before) advance();
      }
    }
    expect("}");
    d->span = spanFrom(start);
    return d;
  }

  void member(Decl &d) {
    size_t start = pos_;
    auto anns = annotations();
    auto mods = modifiers();
    if (isIdent() && cur().text == d.name && isAt(1, "(")) {
      auto m = std::make_shared<Method>();
      m->annotations = anns;
      m->modifiers = mods;
      m->isCtor = true;
      auto nt = advance();
      m->name = nt.text;
      m->nameSpan = nt.span;
      m->params = params();
      if (accept(";")) {
        m->hasBody = false;
      } else {
        m->hasBody = true;
        m->body = block();
      }
      m->span = spanFrom(start);
      d.ctors.push_back(m);
      return;
    }
    std::vector<FTP> mftps;
    if (is("<")) mftps = ftps();
    auto te = typeExpr();
    auto nt = ident("member name");
    if (is("(")) {
      auto m = std::make_shared<Method>();
      m->annotations = anns;
      m->modifiers = mods;
      m->ftps = std::move(mftps);
      m->ret = te;
      m->name = nt.text;
      m->nameSpan = nt.span;
      m->params = params();
      if (accept(";")) {
        m->hasBody = false;
      } else {
        m->hasBody = true;
        m->body = block();
      }
      m->span = spanFrom(start);
      d.methods.push_back(m);
      return;
    }
    Field f;
    f.annotations = anns;
    f.modifiers = mods;
    f.te = te;
    f.name = nt.text;
    expect(";");
    f.span = spanFrom(start);
    d.fields.push_back(std::move(f));
  }

  std::vector<Param> params() {
    std::vector<Param> out;
    expect("(");
    if (accept(")")) return out;
    do {
      size_t start = pos_;
      Param p;
      p.te = typeExpr();
      p.name = ident("parameter name").text;
      p.span = spanFrom(start);
      out.push_back(std::move(p));
    } while (accept(","));
    expect(")");
    return out;
  }

  // ---- statements
  StmP block() {
    expect("{");
    StmP s = stmList();
    expect("}");
    return s;
  }

  StmP stmList() {
    StmP head, tail;
    while (!is("}") && !atEnd()) {
      size_t before = pos_;
      StmP s;
      try {
        s = stm();
      } catch (ParseError &) {
        syncStm();
        if (pos_ == before) advance();
        continue;
      }
      if (!head)
        head = tail = s;
      else {
        tail->next = s;
        tail = s;
      }
    }
    return head;
  }

  StmP newStm(StmKind k) {
    auto s = std::make_shared<Stm>();
    s->kind = k;
    return s;
  }

  StmP stm() {
    size_t start = pos_;
    if (accept("return")) {
      auto s = newStm(StmKind::Return);
      if (!is(";")) s->exp = exp();
      expect(";");
      s->span = spanFrom(start);
      return s;
    }
    if (accept("throw")) {
      auto s = newStm(StmKind::Throw);
      s->exp = exp();
      expect(";");
      s->span = spanFrom(start);
      return s;
    }
    if (accept("if")) {
      auto s = newStm(StmKind::If);
      expect("(");
      s->exp = exp();
      expect(")");
      s->thenS = block();
      if (accept("else")) {
        if (is("if")) fail("'{' (write 'else { if ... }')");
        s->elseS = block();
      }
      s->span = spanFrom(start);
      return s;
    }
    if (is("{")) {
      auto s = newStm(StmKind::Block);
      s->body = block();
      s->span = spanFrom(start);
      return s;
    }
    if (accept("switch")) {
      auto s = newStm(StmKind::Switch);
      expect("(");
      s->exp = exp();
      expect(")");
      expect("{");
      while (!is("}")) {
        if (accept("default")) {
          expect("->");
          s->hasDefault = true;
          s->defaultBody = block();
          continue;
        }
        size_t cs = pos_;
        expect("case");
        SwitchCase c;
        c.label = ident("case label").text;
        expect("->");
        c.body = block();
        c.span = spanFrom(cs);
        s->cases.push_back(std::move(c));
      }
      expect("}");
      s->span = spanFrom(start);
      return s;
    }
    if (accept("try")) {
      auto s = newStm(StmKind::Try);
      s->body = block();
      while (is("catch")) {
        size_t cs = pos_;
        advance();
        CatchClause c;
        expect("(");
        c.te = typeExpr();
        c.name = ident("exception name").text;
        expect(")");
        c.body = block();
        c.span = spanFrom(cs);
        s->catches.push_back(std::move(c));
      }
      s->span = spanFrom(start);
      return s;
    }
    if (auto vd = tryVarDecl(start)) return vd;
    auto e = exp();
    if ((cur().kind == Tok::Punct) && kAsgOps.count(cur().text)) {
      auto s = newStm(StmKind::Assign);
      s->opSpan = cur().span;
      s->op = advance().text;
      s->exp = e;
      s->rhs = exp();
      expect(";");
      s->span = spanFrom(start);
      return s;
    }
    auto s = newStm(StmKind::ExpStm);
    s->exp = e;
    expect(";");
    s->span = spanFrom(start);
    return s;
  }

  StmP tryVarDecl(size_t start) {
    if (!isIdent()) return nullptr;
    size_t save = pos_;
    ++speculating_;
    TypeExprP te;
    bool ok = false;
    try {
      te = typeExpr();
      ok = isIdent() && (isAt(1, "=") || isAt(1, ";"));
    } catch (ParseError &) {
      ok = false;
    }
    --speculating_;
    if (!ok) {
      pos_ = save;
      return nullptr;
    }
    auto s = newStm(StmKind::VarDecl);
    s->te = te;
    s->name = advance().text;
    if (is("=")) {
      s->opSpan = cur().span;
      advance();
      s->exp = exp();
    }
    expect(";");
    s->span = spanFrom(start);
    return s;
  }

  // ---- expressions
  ExpP newExp(ExpKind k) {
    auto e = std::make_shared<Exp>();
    e->kind = k;
    return e;
  }

  ExpP exp() {
    size_t start = pos_;
    auto e = binary(0);
    if (!chainOp()) return e;
    auto c = newExp(ExpKind::Chain);
    c->target = e;
    while (chainOp()) {
      advance();
      advance();
      c->links.push_back(link());
    }
    c->span = spanFrom(start);
    return c;
  }

  ChainLink link() {
    size_t start = pos_;
    ChainLink l;
    ExpP t;
    if (accept("this")) {
      t = newExp(ExpKind::This);
      t->span = spanFrom(start);
    } else {
      auto id = ident("method reference target");
      if (is("@")) {
        t = newExp(ExpKind::ClassRef);
        t->name = id.text;
        t->roles = roleArgs();
        if (is("<") && !isAt(1, ">")) t->classTypeArgs = typeArgs();
      } else {
        t = newExp(ExpKind::Name);
        t->name = id.text;
      }
      t->span = spanFrom(start);
      while (is(".") && at(1).kind == Tok::Ident) {
        advance();
        auto f = advance();
        auto fe = newExp(ExpKind::Field);
        fe->target = t;
        fe->name = f.text;
        fe->span = spanFrom(start);
        t = fe;
      }
    }
    expect("::");
    if (is("<")) l.typeArgs = typeArgs();
    if (accept("new")) {
      if (t->kind != ExpKind::ClassRef && t->kind != ExpKind::Name) fail("class name before '::new'");
      l.name = "new";
      l.ctor = std::make_shared<TypeExpr>();
      l.ctor->name = t->name;
      l.ctor->roles = t->roles;
      l.ctor->args = t->classTypeArgs;
      l.ctor->span = t->span;
    } else {
      l.name = ident("method name").text;
      l.target = t;
    }
    l.span = spanFrom(start);
    return l;
  }

  static const std::vector<std::vector<std::string>> &levels() {
    static const std::vector<std::vector<std::string>> L = {
        {"||"}, {"&&"}, {"|"}, {"&"}, {"==", "!="}, {"<", ">", "<=", ">="}, {"+", "-"}, {"*", "/", "%"}};
    return L;
  }

  bool atLevelOp(size_t lvl) const {
    if (cur().kind != Tok::Punct) return false;
    for (auto &op : levels()[lvl])
      if (cur().text == op) {
        if (op == ">" && chainOp()) return false;
        return true;
      }
    return false;
  }

  ExpP binary(size_t lvl) {
    if (lvl >= levels().size()) return unary();
    size_t start = pos_;
    auto lhs = binary(lvl + 1);
    while (atLevelOp(lvl)) {
      auto op = advance().text;
      auto rhs = binary(lvl + 1);
      auto b = newExp(ExpKind::Binary);
      b->op = op;
      b->lhs = lhs;
      b->rhs = rhs;
      b->span = spanFrom(start);
      lhs = b;
    }
    return lhs;
  }

  ExpP unary() {
    size_t start = pos_;
    if (is("!") || is("-")) {
      auto op = advance().text;
      if (op == "-" && (cur().kind == Tok::Int || cur().kind == Tok::Double)) {
        auto lit = literal();
        lit->text = "-" + lit->text;
        lit->span = spanFrom(start);
        return postfix(lit, start);
      }
      auto operand = unary();
      auto b = newExp(ExpKind::Binary);
      b->op = op;
      b->rhs = operand;
      b->span = spanFrom(start);
      return b;
    }
    return postfix(primary(), start);
  }

  ExpP postfix(ExpP e, size_t start) {
    while (is(".")) {
      advance();
      std::vector<TypeExprP> targs;
      if (is("<")) targs = typeArgs();
      auto nt = ident("member name");
      if (is("(")) {
        auto c = newExp(ExpKind::Call);
        c->target = e;
        c->name = nt.text;
        c->typeArgs = std::move(targs);
        c->args = args();
        c->span = spanFrom(start);
        e = c;
      } else {
        if (!targs.empty()) fail("'(' after type arguments");
        if (e->kind == ExpKind::Name && e->name == "Unit" && nt.text == "id") {
          e = newExp(ExpKind::UnitLit);
          e->span = spanFrom(start);
          continue;
        }
        auto f = newExp(ExpKind::Field);
        f->target = e;
        f->name = nt.text;
        f->span = spanFrom(start);
        e = f;
      }
    }
    return e;
  }

  std::vector<ExpP> args() {
    std::vector<ExpP> out;
    expect("(");
    if (accept(")")) return out;
    do out.push_back(exp());
    while (accept(","));
    expect(")");
    return out;
  }

  ExpP literal() {
    size_t start = pos_;
    auto e = newExp(ExpKind::Literal);
    auto t = advance();
    switch (t.kind) {
      case Tok::Int: e->lit = LitKind::Int; break;
      case Tok::Double: e->lit = LitKind::Double; break;
      case Tok::String: e->lit = LitKind::String; break;
      case Tok::Char: e->lit = LitKind::Char; break;
      default:
        if (t.text == "true" || t.text == "false")
          e->lit = LitKind::Bool;
        else
          e->lit = LitKind::Null;
    }
    e->text = t.text;
    if (is("@")) {
      if (isAt(1, "[")) {
        advance();
        advance();
        do {
          auto r = ident("role name");
          e->roles.push_back({r.text, r.span});
        } while (accept(","));
        expect("]");
        e->roleList = true;
      } else {
        e->roles = roleArgs();
      }
    }
    e->span = spanFrom(start);
    return e;
  }

  bool speculativeClassTypeArgs(std::vector<TypeExprP> &out) {
    size_t save = pos_;
    ++speculating_;
    bool ok = false;
    try {
      out = typeArgs();
      ok = is(".") || is("::");
    } catch (ParseError &) {
      ok = false;
    }
    --speculating_;
    if (!ok) {
      pos_ = save;
      out.clear();
    }
    return ok;
  }

  ExpP primary() {
    size_t start = pos_;
    auto k = cur().kind;
    if (k == Tok::Int || k == Tok::Double || k == Tok::String || k == Tok::Char || is("true") || is("false") ||
        is("null"))
      return literal();
    if (accept("this")) {
      auto e = newExp(ExpKind::This);
      e->span = spanFrom(start);
      return e;
    }
    if (is("super") && isAt(1, "(")) {
      advance();
      auto c = newExp(ExpKind::Call);
      c->name = "super";
      c->args = args();
      c->span = spanFrom(start);
      return c;
    }
    if (accept("new")) {
      auto e = newExp(ExpKind::New);
      if (is("<")) e->typeArgs = typeArgs();
      auto nt = ident("class name");
      e->name = nt.text;
      if (is("@")) e->roles = roleArgs();
      if (is("<")) e->classTypeArgs = typeArgs();
      if (e->roles.empty() && is("@")) e->roles = roleArgs();
      e->args = args();
      e->span = spanFrom(start);
      return e;
    }
    if (accept("(")) {
      auto e = exp();
      expect(")");
      return e;
    }
    if (isIdent()) {
      auto nt = advance();
      if (is("@")) {
        auto e = newExp(ExpKind::ClassRef);
        e->name = nt.text;
        e->roles = roleArgs();
        if (is("<")) speculativeClassTypeArgs(e->classTypeArgs);
        e->span = spanFrom(start);
        return e;
      }
      if (is("(")) {
        auto c = newExp(ExpKind::Call);
        c->name = nt.text;
        c->args = args();
        c->span = spanFrom(start);
        return c;
      }
      auto e = newExp(ExpKind::Name);
      e->name = nt.text;
      e->span = nt.span;
      return e;
    }
    fail("expression");
  }

  SourceRef file_;
  DiagnosticSink &diags_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
  int speculating_ = 0;
};

void eachExpSlot(Program &p, const std::function<void(ExpP &)> &f) {
  for (auto &d : p.decls) {
    auto visitM = [&](const MethodP &m) {
      forEachStm(m->body, [&](const StmP &s) {
        if (s->exp) f(s->exp);
        if (s->rhs) f(s->rhs);
      });
    };
    for (auto &m : d->ctors) visitM(m);
    for (auto &m : d->methods) visitM(m);
  }
}

}  // namespace

ExpP desugarChain(const ExpP &e) {
  if (!e) return e;
  auto c = std::make_shared<Exp>(*e);
  c->target = desugarChain(e->target);
  c->lhs = desugarChain(e->lhs);
  c->rhs = desugarChain(e->rhs);
  for (auto &a : c->args) a = desugarChain(a);
  if (e->kind != ExpKind::Chain) return c;
  ExpP acc = c->target;
  for (auto &l : e->links) {
    auto n = std::make_shared<Exp>();
    n->span = acc->span.valid() ? acc->span.to(l.span) : l.span;
    n->args = {acc};
    if (l.name == "new") {
      n->kind = ExpKind::New;
      n->name = l.ctor->name;
      n->roles = l.ctor->roles;
      n->classTypeArgs = l.ctor->args;
      n->typeArgs = l.typeArgs;
    } else {
      n->kind = ExpKind::Call;
      n->target = desugarChain(l.target);
      n->name = l.name;
      n->typeArgs = l.typeArgs;
    }
    acc = n;
  }
  return acc;
}

void desugarProgram(Program &p) {
  eachExpSlot(p, [](ExpP &e) { e = desugarChain(e); });
}

static void expandIn(ExpP &e, DiagnosticSink &diags, bool argPosition) {
  if (!e) return;
  if (e->kind == ExpKind::Literal && e->roleList && !argPosition)
    diags.error(DiagCode::SyntaxError, e->span,
                "Syntax error: a literal role list '@[...]' is only allowed as a method or constructor argument.");
  expandIn(e->target, diags, false);
  expandIn(e->lhs, diags, false);
  expandIn(e->rhs, diags, false);
  for (auto &l : e->links) expandIn(l.target, diags, false);
  std::vector<ExpP> out;
  for (auto &a : e->args) {
    if (a->kind == ExpKind::Literal && a->roleList) {
      for (auto &r : a->roles) {
        auto copy = std::make_shared<Exp>(*a);
        copy->roleList = false;
        copy->roles = {r};
        out.push_back(copy);
      }
    } else {
      expandIn(a, diags, false);
      out.push_back(a);
    }
  }
  e->args = std::move(out);
}

void expandLiteralLists(Program &p, DiagnosticSink &diags) {
  eachExpSlot(p, [&](ExpP &e) { expandIn(e, diags, false); });
}

Program parseRaw(const SourceRef &file, DiagnosticSink &diags) { return Parser(file, diags).program(); }

Program parseProgram(const std::vector<SourceRef> &files, DiagnosticSink &diags) {
  Program all;
  for (auto &f : files) {
    auto p = parseRaw(f, diags);
    for (auto &d : p.decls) all.decls.push_back(d);
  }
  desugarProgram(all);
  expandLiteralLists(all, diags);
  return all;
}

Program parseText(const std::string &name, const std::string &text, DiagnosticSink &diags) {
  return parseProgram({std::make_shared<SourceFile>(name, text)}, diags);
}

}  // namespace choral
