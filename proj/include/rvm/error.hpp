#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rvm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuotaExceeded : public Error {
 public:
  QuotaExceeded(std::string graph, std::size_t limit)
      : Error("quota exceeded for graph " + graph + " (limit " + std::to_string(limit) + ")"),
        graph_(std::move(graph)),
        limit_(limit) {}

  const std::string& graph() const { return graph_; }
  std::size_t limit() const { return limit_; }

 private:
  std::string graph_;
  std::size_t limit_;
};

class MalformedQuery : public Error {
 public:
  using Error::Error;
};

/// N-Quads syntax error; line is 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MalformedState : public Error {
 public:
  using Error::Error;
};

class UnknownClass : public Error {
 public:
  explicit UnknownClass(const std::string& cls) : Error("unknown class " + cls), cls_(cls) {}
  const std::string& class_uri() const { return cls_; }

 private:
  std::string cls_;
};

class MemoConflict : public Error {
 public:
  using Error::Error;
};

}  // namespace rvm
