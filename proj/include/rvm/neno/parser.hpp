#pragma once

#include <string>
#include <string_view>

#include "rvm/error.hpp"
#include "rvm/neno/ast.hpp"

namespace rvm::neno {

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, std::string expected)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": expected " + expected),
        line_(line),
        col_(col),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::string expected_;
};

class UnknownPrefix : public Error {
 public:
  UnknownPrefix(std::string prefix, int line)
      : Error(std::to_string(line) + ": unknown prefix '" + prefix + "'"), prefix_(std::move(prefix)), line_(line) {}

  const std::string& prefix() const { return prefix_; }
  int line() const { return line_; }

 private:
  std::string prefix_;
  int line_;
};

/// Parses one compilation unit. The rdf, rdfs, xsd, owl and rvm prefixes
/// are always in scope; every other prefix must be declared.
Unit parse(std::string_view source);

/// Pretty-prints a unit back to source. parse(print(u)) == u.
std::string print(const Unit& unit);
std::string print(const Expr& expr, const Unit& context);

}  // namespace rvm::neno
