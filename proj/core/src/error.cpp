#include "qfsum/error.hpp"

namespace qfsum {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::malformed_input: return "malformed input";
    case ErrorKind::missing_field: return "missing field";
    case ErrorKind::unknown_question_type: return "unknown question type";
    case ErrorKind::duplicate_id: return "duplicate id";
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::truncated_record: return "truncated record";
    case ErrorKind::bad_magic: return "bad magic";
    case ErrorKind::missing_embedding: return "missing embedding";
    case ErrorKind::not_found: return "not found";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace qfsum
