#pragma once

#include <string>
#include <vector>

#include "rvm/error.hpp"
#include "rvm/neno/ast.hpp"

namespace rvm::neno {

/// Static type of a URI constant: it may denote an instance of any class.
inline const std::string kAnyType = "http://example.com/rvm#Any";

enum class TypeErrorKind {
  TypeMismatch,
  UnknownField,
  ArityError,
  UnknownMethod,
  UnknownVariable,
  DuplicateDeclaration,
  MissingReturn,
  UnreachableCode,
  CardinalityViolation,
  InvalidTarget,
};

const char* to_string(TypeErrorKind kind);

class TypeError : public Error {
 public:
  TypeError(TypeErrorKind kind, SourceLoc loc, const std::string& detail)
      : Error(std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + to_string(kind) + ": " + detail),
        kind_(kind),
        loc_(loc) {}

  TypeErrorKind kind() const { return kind_; }
  int line() const { return loc_.line; }
  int col() const { return loc_.col; }

 private:
  TypeErrorKind kind_;
  SourceLoc loc_;
};

/// A unit whose expressions carry static types and whose calls carry the
/// resolved method template URI.
struct CheckedUnit {
  Unit unit;

  const ClassDecl* find_class(const std::string& iri) const;
  // Searches the class and its in-unit superclasses.
  const FieldDecl* find_field(const std::string& cls, const std::string& predicate) const;
  const MethodDecl* find_method(const std::string& cls, const std::string& name, std::string* owner = nullptr) const;
  // All methods visible on a class, nearest declaration winning.
  std::vector<std::pair<std::string, const MethodDecl*>> methods_of(const std::string& cls) const;
};

std::string method_uri(const std::string& cls, const std::string& name);
std::string field_uri(const std::string& cls, std::size_t index);

CheckedUnit typecheck(Unit unit);

}  // namespace rvm::neno
