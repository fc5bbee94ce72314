#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rvm/term.hpp"

namespace rvm::neno {

/// Source position. Positions do not take part in structural equality, so
/// two trees parsed from differently formatted text compare equal.
struct SourceLoc {
  int line = 0;
  int col = 0;
  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

/// Owning pointer with value semantics (deep copy, deep equality).
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

/// Unbounded maximum cardinality.
inline constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

struct Cardinality {
  std::size_t min = 0;
  std::size_t max = kUnbounded;
  friend bool operator==(const Cardinality&, const Cardinality&) = default;
};

enum class StepDir { Forward, Inverse };

struct PathStep {
  StepDir dir = StepDir::Forward;
  std::string predicate;  // full IRI
  SourceLoc loc;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct ThisBase {
  friend bool operator==(const ThisBase&, const ThisBase&) = default;
};
struct VarBase {
  std::string name;
  friend bool operator==(const VarBase&, const VarBase&) = default;
};
struct UriBase {
  std::string iri;
  friend bool operator==(const UriBase&, const UriBase&) = default;
};
struct LiteralBase {
  Term value;
  friend bool operator==(const LiteralBase&, const LiteralBase&) = default;
};

/// base.step.step...; a zero-step path is a plain variable, constant, or `this`.
struct PathExpr {
  std::variant<ThisBase, VarBase, UriBase, LiteralBase> base;
  std::vector<PathStep> steps;
  SourceLoc loc;
  friend bool operator==(const PathExpr&, const PathExpr&) = default;
};

enum class ArithOp { Add, Sub, Mul, Div };

struct Expr;

struct SetQueryExpr {
  PathExpr target;
  Box<Expr> value;
  friend bool operator==(const SetQueryExpr&, const SetQueryExpr&) = default;
};

struct ArithExpr {
  ArithOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  friend bool operator==(const ArithExpr&, const ArithExpr&) = default;
};

/// receiver.method(args). `implicit_this` marks an unqualified call.
struct CallExpr {
  PathExpr receiver;
  bool implicit_this = false;
  std::string method;
  std::vector<Expr> args;
  // Filled by the type checker: the API method template being invoked.
  std::string resolved_method;
  friend bool operator==(const CallExpr& a, const CallExpr& b) {
    return a.receiver == b.receiver && a.implicit_this == b.implicit_this && a.method == b.method && a.args == b.args;
  }
};

struct Expr {
  std::variant<PathExpr, SetQueryExpr, ArithExpr, CallExpr> node;
  SourceLoc loc;
  // Static type IRI filled by the type checker; empty before checking.
  std::string type;
  friend bool operator==(const Expr& a, const Expr& b) { return a.node == b.node; }
};

enum class SetOp { Set, SetPlus, SetMinus, SetClear };

struct Stmt;

struct SetStmt {
  PathExpr target;
  SetOp op = SetOp::Set;
  std::optional<Expr> value;
  friend bool operator==(const SetStmt&, const SetStmt&) = default;
};

struct VarDecl {
  std::string type;
  std::string name;
  std::optional<Expr> init;
  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

struct IfStmt {
  Expr cond;
  std::vector<Stmt> then_body;
  std::vector<Stmt> else_body;
  bool has_else = false;
  friend bool operator==(const IfStmt&, const IfStmt&) = default;
};

struct WhileStmt {
  Expr cond;
  std::vector<Stmt> body;
  friend bool operator==(const WhileStmt&, const WhileStmt&) = default;
};

struct ReturnStmt {
  std::optional<Expr> value;
  friend bool operator==(const ReturnStmt&, const ReturnStmt&) = default;
};

struct CallStmt {
  CallExpr call;
  // The receiver path ends with an inverse (`..`) step.
  bool inverse = false;
  friend bool operator==(const CallStmt&, const CallStmt&) = default;
};

struct Stmt {
  std::variant<SetStmt, VarDecl, IfStmt, WhileStmt, ReturnStmt, CallStmt> node;
  SourceLoc loc;
  friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct FieldDecl {
  std::string predicate;
  std::string range;
  Cardinality card;
  SourceLoc loc;
  friend bool operator==(const FieldDecl&, const FieldDecl&) = default;
};

struct Param {
  std::string type;
  std::string name;
  friend bool operator==(const Param&, const Param&) = default;
};

struct MethodDecl {
  std::string name;
  std::optional<std::string> return_type;
  std::vector<Param> params;
  std::vector<Stmt> body;
  SourceLoc loc;
  friend bool operator==(const MethodDecl&, const MethodDecl&) = default;
};

struct ClassDecl {
  std::string uri;
  std::string super_class;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  SourceLoc loc;
  friend bool operator==(const ClassDecl&, const ClassDecl&) = default;
};

/// One `.neno` file.
struct Unit {
  // Declared prefixes only, in declaration order.
  std::vector<std::pair<std::string, std::string>> prefixes;
  std::vector<ClassDecl> classes;
  friend bool operator==(const Unit&, const Unit&) = default;
};

}  // namespace rvm::neno
