#include "choral/printer.hpp"

#include <cctype>
#include <sstream>

namespace choral {

std::string printRoles(const std::vector<RoleRef> &roles) {
  if (roles.empty()) return "";
  if (roles.size() == 1) return "@" + roles[0].name;
  std::string s = "@(";
  for (size_t i = 0; i < roles.size(); ++i) s += (i ? ", " : "") + roles[i].name;
  return s + ")";
}

static std::string typeArgList(const std::vector<TypeExprP> &args) {
  if (args.empty()) return "";
  std::string s = "<";
  for (size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + printTE(args[i]);
  return s + ">";
}

std::string printTE(const TypeExprP &te) {
  if (!te) return "?";
  if (te->isVoid) return "void";
  return te->name + printRoles(te->roles) + typeArgList(te->args);
}

static std::string quote(const std::string &v, char q) {
  std::string s(1, q);
  for (char c : v) {
    switch (c) {
      case '\n': s += "\\n"; break;
      case '\t': s += "\\t"; break;
      case '\\': s += "\\\\"; break;
      default:
        if (c == q) s += '\\';
        s += c;
    }
  }
  return s + q;
}

static std::string argList(const std::vector<ExpP> &args) {
  std::string s = "(";
  for (size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + printExp(args[i]);
  return s + ")";
}

static std::string operand(const ExpP &e) {
  if (e && e->kind == ExpKind::Binary) return "(" + printExp(e) + ")";
  if (e && e->kind == ExpKind::Chain) return "(" + printExp(e) + ")";
  return printExp(e);
}

static int precedence(const std::string &op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "&") return 4;
  if (op == "==" || op == "!=") return 5;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 6;
  if (op == "+" || op == "-") return 7;
  return 8;
}

// lhs binds at equal precedence (left associativity), rhs only at strictly higher
static std::string binOperand(const ExpP &e, int prec, bool right) {
  if (e && e->kind == ExpKind::Binary && e->lhs) {
    int p = precedence(e->op);
    if (p > prec || (p == prec && !right)) return printExp(e);
  }
  return operand(e);
}

std::string printExp(const ExpP &e) {
  if (!e) return "";
  switch (e->kind) {
    case ExpKind::Literal: {
      std::string v;
      switch (e->lit) {
        case LitKind::String: v = quote(e->text, '"'); break;
        case LitKind::Char: v = quote(e->text, '\''); break;
        default: v = e->text;
      }
      if (e->roleList) {
        v += "@[";
        for (size_t i = 0; i < e->roles.size(); ++i) v += (i ? ", " : "") + e->roles[i].name;
        return v + "]";
      }
      return v + printRoles(e->roles);
    }
    case ExpKind::Name: return e->name;
    case ExpKind::This: return "this";
    case ExpKind::UnitLit: return "Unit.id";
    case ExpKind::ClassRef: return e->name + printRoles(e->roles) + typeArgList(e->classTypeArgs);
    case ExpKind::Field: return operand(e->target) + "." + e->name;
    case ExpKind::Call: {
      std::string s;
      if (e->target) s = operand(e->target) + ".";
      return s + typeArgList(e->typeArgs) + e->name + argList(e->args);
    }
    case ExpKind::New:
      return "new " + typeArgList(e->typeArgs) + e->name + printRoles(e->roles) + typeArgList(e->classTypeArgs) +
             argList(e->args);
    case ExpKind::Binary:
      if (!e->lhs) return e->op + operand(e->rhs);
      return binOperand(e->lhs, precedence(e->op), false) + " " + e->op + " " +
             binOperand(e->rhs, precedence(e->op), true);
    case ExpKind::Chain: {
      std::string s = operand(e->target);
      for (auto &l : e->links) {
        s += " >> ";
        if (l.name == "new")
          s += printTE(l.ctor) + "::" + typeArgList(l.typeArgs) + "new";
        else
          s += printExp(l.target) + "::" + typeArgList(l.typeArgs) + l.name;
      }
      return s;
    }
  }
  return "";
}

static std::string pad(int depth, int indent) { return std::string(static_cast<size_t>(depth * indent), ' '); }

static std::string blockText(const StmP &body, int depth, int indent) {
  if (!body) return "{ }";
  return "{\n" + printStm(body, depth + 1, indent) + pad(depth, indent) + "}";
}

std::string printStm(const StmP &s, int depth, int indent) {
  std::string out;
  for (auto cur = s; cur; cur = cur->next) {
    out += pad(depth, indent);
    switch (cur->kind) {
      case StmKind::Return:
        out += cur->exp ? "return " + printExp(cur->exp) + ";" : "return;";
        break;
      case StmKind::Throw: out += "throw " + printExp(cur->exp) + ";"; break;
      case StmKind::ExpStm: out += printExp(cur->exp) + ";"; break;
      case StmKind::VarDecl:
        out += printTE(cur->te) + " " + cur->name;
        if (cur->exp) out += " = " + printExp(cur->exp);
        out += ";";
        break;
      case StmKind::Assign: out += printExp(cur->exp) + " " + cur->op + " " + printExp(cur->rhs) + ";"; break;
      case StmKind::If:
        out += "if (" + printExp(cur->exp) + ") " + blockText(cur->thenS, depth, indent);
        if (cur->elseS) out += " else " + blockText(cur->elseS, depth, indent);
        break;
      case StmKind::Block: out += blockText(cur->body, depth, indent); break;
      case StmKind::Switch:
        out += "switch (" + printExp(cur->exp) + ") {\n";
        for (auto &c : cur->cases)
          out += pad(depth + 1, indent) + "case " + c.label + " -> " + blockText(c.body, depth + 1, indent) + "\n";
        if (cur->hasDefault)
          out += pad(depth + 1, indent) + "default -> " + blockText(cur->defaultBody, depth + 1, indent) + "\n";
        out += pad(depth, indent) + "}";
        break;
      case StmKind::Try:
        out += "try " + blockText(cur->body, depth, indent);
        for (auto &c : cur->catches)
          out += " catch (" + printTE(c.te) + " " + c.name + ") " + blockText(c.body, depth, indent);
        break;
    }
    out += "\n";
  }
  return out;
}

static std::string annotationsText(const std::vector<Annotation> &as) {
  std::string s;
  for (auto &a : as) {
    s += "@" + a.name;
    if (!a.args.empty()) {
      s += "(";
      for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ", ";
        if (!(a.args.size() == 1 && a.args[i].first == "value")) s += a.args[i].first + " = ";
        s += quote(a.args[i].second, '"');
      }
      s += ")";
    }
    s += " ";
  }
  return s;
}

static std::string modsText(const std::vector<std::string> &ms) {
  std::string s;
  for (auto &m : ms) s += m + " ";
  return s;
}

static std::string ftpText(const std::vector<FTP> &fs) {
  if (fs.empty()) return "";
  std::string s = "<";
  for (size_t i = 0; i < fs.size(); ++i) {
    if (i) s += ", ";
    s += fs[i].name + printRoles(fs[i].roles);
    for (size_t j = 0; j < fs[i].bounds.size(); ++j) s += (j ? " & " : " extends ") + printTE(fs[i].bounds[j]);
  }
  return s + ">";
}

static std::string paramsText(const std::vector<Param> &ps) {
  std::string s = "(";
  for (size_t i = 0; i < ps.size(); ++i) s += (i ? ", " : "") + printTE(ps[i].te) + " " + ps[i].name;
  return s + ")";
}

static std::string methodText(const Method &m, int depth, int indent) {
  std::string s = pad(depth, indent) + annotationsText(m.annotations) + modsText(m.modifiers);
  if (!m.ftps.empty()) s += ftpText(m.ftps) + " ";
  if (!m.isCtor) s += printTE(m.ret) + " ";
  s += m.name + paramsText(m.params);
  if (!m.hasBody) return s + ";\n";
  return s + " " + blockText(m.body, depth, indent) + "\n";
}

static bool allUnitParams(const Method &m) {
  if (m.params.empty()) return false;
  for (auto &p : m.params)
    if (p.te->name != "Unit" || !p.te->roles.empty()) return false;
  return true;
}

static std::string courtesyText(const Decl &d, const Method &m, int depth, int indent) {
  std::string s = pad(depth, indent) + modsText(m.modifiers);
  if (!m.ftps.empty()) s += ftpText(m.ftps) + " ";
  s += printTE(m.ret) + " " + m.name + "()";
  if (d.kind == DeclKind::Interface || !m.hasBody) return s + ";\n";
  std::string call = m.name + "(";
  for (size_t i = 0; i < m.params.size(); ++i) call += (i ? ", " : "") + std::string("Unit.id");
  call += ")";
  bool isVoid = m.ret && m.ret->isVoid;
  return s + " { " + (isVoid ? call + ";" : "return " + call + ";") + " }\n";
}

std::string printDecl(const Decl &d, const PrintOptions &opts) {
  int ind = opts.indent;
  std::string s = annotationsText(d.annotations) + modsText(d.modifiers);
  switch (d.kind) {
    case DeclKind::Class: s += "class "; break;
    case DeclKind::Interface: s += "interface "; break;
    case DeclKind::Enum: s += "enum "; break;
  }
  s += d.name + printRoles(d.roles) + ftpText(d.ftps);
  if (d.kind == DeclKind::Enum) {
    s += " { ";
    for (size_t i = 0; i < d.enumCases.size(); ++i) s += (i ? ", " : "") + d.enumCases[i];
    return s + " }\n";
  }
  for (size_t i = 0; i < d.extends.size(); ++i) s += (i ? ", " : " extends ") + printTE(d.extends[i]);
  for (size_t i = 0; i < d.implements.size(); ++i) s += (i ? ", " : " implements ") + printTE(d.implements[i]);
  s += " {\n";
  for (auto &f : d.fields)
    s += pad(1, ind) + annotationsText(f.annotations) + modsText(f.modifiers) + printTE(f.te) + " " + f.name + ";\n";
  for (auto &c : d.ctors) s += methodText(*c, 1, ind);
  for (auto &m : d.methods) {
    s += methodText(*m, 1, ind);
    if (opts.courtesy && allUnitParams(*m)) {
      bool clash = false;
      for (auto &o : d.methods)
        if (o->name == m->name && o->params.empty()) clash = true;
      if (!clash) s += courtesyText(d, *m, 1, ind);
    }
  }
  return s + "}\n";
}

std::string printProgram(const Program &p, const PrintOptions &opts) {
  std::string s;
  for (size_t i = 0; i < p.decls.size(); ++i) {
    if (i) s += "\n";
    s += printDecl(*p.decls[i], opts);
  }
  return s;
}

std::string squash(const std::string &text) {
  std::string out;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

}  // namespace choral
