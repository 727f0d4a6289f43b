#ifndef SESUB_SYNTAX_HPP
#define SESUB_SYNTAX_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "sesub/type.hpp"

namespace sesub {

struct ParsePosition {
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based, in code units
};

enum class ParseErrorKind {
  SyntaxError,
  DuplicateLabel,
  UnboundVariable,
  NonContractive,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& message, ParsePosition pos);

  ParseErrorKind kind() const { return kind_; }
  ParsePosition position() const { return pos_; }

 private:
  ParseErrorKind kind_;
  ParsePosition pos_;
};

/// Parses the textual form:
///
///   type    := "end" | ident | "rec" ident "." type
///            | "+{" choices "}" | "&{" choices "}"
///   choices := label ":" type ("," label ":" type)*
///   ident, label := [A-Za-z_$][A-Za-z0-9_'$]*
///
/// Annotated branchings ("&@7{...}") are accepted and their annotations
/// dropped. The result is closed, contractive and un-annotated; violations
/// raise ParseError with a position.
TypePtr parse(std::string_view text);

/// parse() over the contents of a file.
TypePtr parse_file(const std::string& path);

/// Canonical textual form; inverse of parse up to annotation erasure.
/// Holes render as "[]^k" and do not re-parse.
std::string render(const TypePtr& t);

}  // namespace sesub

#endif  // SESUB_SYNTAX_HPP
