#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fntag {

// Malformed input. offset is a byte offset into the offending line or text,
// line is 1-based; either is npos when it does not apply.
class ParseError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(std::string reason, std::size_t offset = npos,
                      std::size_t line = npos);

  const std::string& reason() const { return reason_; }
  std::size_t offset() const { return offset_; }
  std::size_t line() const { return line_; }

 private:
  std::string reason_;
  std::size_t offset_;
  std::size_t line_;
};

// Failure inside one stage of the tag-then-parse pipeline.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace fntag
