#include "sesub/syntax.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace sesub {

namespace {

std::string describe(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::SyntaxError: return "syntax error";
    case ParseErrorKind::DuplicateLabel: return "duplicate label";
    case ParseErrorKind::UnboundVariable: return "unbound variable";
    case ParseErrorKind::NonContractive: return "non-contractive recursion";
  }
  return "parse error";
}

std::string format_message(ParseErrorKind kind, const std::string& message,
                           ParsePosition pos) {
  std::ostringstream os;
  os << describe(kind) << " at " << pos.line << ":" << pos.column << ": "
     << message;
  return os.str();
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' ||
         c == '$';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  TypePtr run() {
    TypePtr t = parse_type();
    skip_ws();
    if (pos_ != text_.size())
      fail(ParseErrorKind::SyntaxError, "trailing input after type");
    return t;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  ParsePosition at_{1, 1};
  std::vector<std::string> scope_;

  [[noreturn]] void fail(ParseErrorKind kind, const std::string& msg) {
    fail_at(kind, msg, at_);
  }

  [[noreturn]] void fail_at(ParseErrorKind kind, const std::string& msg,
                            ParsePosition where) {
    throw ParseError(kind, msg, where);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++at_.line;
      at_.column = 1;
    } else {
      ++at_.column;
    }
    return c;
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      advance();
  }

  void expect(char c, const char* what) {
    skip_ws();
    if (peek() != c)
      fail(ParseErrorKind::SyntaxError,
           std::string("expected '") + c + "' " + what);
    advance();
  }

  std::string word() {
    skip_ws();
    if (!ident_start(peek()))
      fail(ParseErrorKind::SyntaxError, "expected an identifier");
    std::string w;
    while (pos_ < text_.size() && ident_char(peek())) w.push_back(advance());
    return w;
  }

  TypePtr parse_type() {
    skip_ws();
    ParsePosition start = at_;
    char c = peek();
    if (c == '+') {
      advance();
      expect('{', "after '+'");
      return make_select(parse_choices());
    }
    if (c == '&') {
      advance();
      skip_ws();
      if (peek() == '@') {  // rendered annotation; accepted and dropped
        advance();
        if (!std::isdigit(static_cast<unsigned char>(peek())))
          fail(ParseErrorKind::SyntaxError, "expected digits after '@'");
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
      expect('{', "after '&'");
      return make_branch(parse_choices());
    }
    if (!ident_start(c))
      fail(ParseErrorKind::SyntaxError, "expected a type");
    std::string w = word();
    if (w == "end") return make_end();
    if (w == "rec") {
      skip_ws();
      ParsePosition name_at = at_;
      std::string name = word();
      if (name == "end" || name == "rec")
        fail_at(ParseErrorKind::SyntaxError,
                "'" + name + "' is reserved and cannot name a variable",
                name_at);
      expect('.', "after the recursion variable");
      scope_.push_back(name);
      TypePtr body = parse_type();
      scope_.pop_back();
      if (!rec_guarded(name, body))
        fail_at(ParseErrorKind::NonContractive,
                "every occurrence of '" + name +
                    "' must sit under a selection or branching",
                start);
      return make_rec(name, std::move(body));
    }
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (*it == w) return make_var(w);
    fail_at(ParseErrorKind::UnboundVariable,
            "variable '" + w + "' is not bound by any enclosing rec", start);
  }

  std::vector<Choice> parse_choices() {
    std::vector<Choice> out;
    for (;;) {
      skip_ws();
      ParsePosition label_at = at_;
      std::string label = word();
      if (label == "end" || label == "rec")
        fail_at(ParseErrorKind::SyntaxError,
                "'" + label + "' is reserved and cannot be a label", label_at);
      for (const Choice& c : out)
        if (c.label == label)
          fail_at(ParseErrorKind::DuplicateLabel,
                  "label '" + label + "' appears twice in one choice",
                  label_at);
      expect(':', "after a label");
      out.push_back({std::move(label), parse_type()});
      skip_ws();
      if (peek() == ',') {
        advance();
        continue;
      }
      expect('}', "to close the choice list");
      return out;
    }
  }

  // Contractivity of one binder: every free occurrence of `name` in `body`
  // must be below at least one Select or Branch.
  static bool rec_guarded(const std::string& name, const TypePtr& body) {
    struct Walk {
      const std::string& name;
      bool check(const Node* n, bool guarded) const {
        switch (n->kind) {
          case TypeKind::Var:
            return n->name != name || guarded;
          case TypeKind::Rec:
            if (n->name == name) return true;  // shadowed
            return check(n->body.get(), guarded);
          case TypeKind::Select:
          case TypeKind::Branch:
            for (const Choice& c : n->choices)
              if (!check(c.type.get(), true)) return false;
            return true;
          default:
            return true;
        }
      }
    };
    return Walk{name}.check(body.get(), false);
  }
};

}  // namespace

ParseError::ParseError(ParseErrorKind kind, const std::string& message,
                       ParsePosition pos)
    : std::runtime_error(format_message(kind, message, pos)),
      kind_(kind),
      pos_(pos) {}

TypePtr parse(std::string_view text) { return Parser(text).run(); }

TypePtr parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string render(const TypePtr& t) {
  std::string out;
  struct Item {
    const Node* node = nullptr;
    std::string lit;
  };
  std::vector<Item> stack;
  stack.push_back({t.get(), {}});
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    if (!item.node) {
      out += item.lit;
      continue;
    }
    const Node* n = item.node;
    switch (n->kind) {
      case TypeKind::End:
        out += "end";
        break;
      case TypeKind::Var:
        out += n->name;
        break;
      case TypeKind::Rec:
        out += "rec " + n->name + ". ";
        stack.push_back({n->body.get(), {}});
        break;
      case TypeKind::Select:
      case TypeKind::Branch: {
        if (n->kind == TypeKind::Select) {
          out += "+{";
        } else if (n->annotation) {
          out += "&@" + std::to_string(*n->annotation) + "{";
        } else {
          out += "&{";
        }
        std::vector<Item> seq;
        for (std::size_t i = 0; i < n->choices.size(); ++i) {
          if (i > 0) seq.push_back({nullptr, ", "});
          seq.push_back({nullptr, n->choices[i].label + ": "});
          seq.push_back({n->choices[i].type.get(), {}});
        }
        seq.push_back({nullptr, "}"});
        for (auto it = seq.rbegin(); it != seq.rend(); ++it)
          stack.push_back(std::move(*it));
        break;
      }
      case TypeKind::Hole:
        out += "[]^" + std::to_string(n->hole_index);
        break;
    }
  }
  return out;
}

}  // namespace sesub
