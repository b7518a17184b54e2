#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qfsum {

enum class ErrorKind {
  malformed_input,
  missing_field,
  unknown_question_type,
  duplicate_id,
  invalid_argument,
  dimension_mismatch,
  truncated_record,
  bad_magic,
  missing_embedding,
  not_found,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All recoverable data and argument errors raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qfsum
