#include "attralign/error.hpp"

#include <iostream>

namespace attralign {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroNormVector: return "ZeroNormVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyPool: return "EmptyPool";
    case ErrorKind::EmptyPhrase: return "EmptyPhrase";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateBatch: return "DegenerateBatch";
    case ErrorKind::NoRelevantItems: return "NoRelevantItems";
    case ErrorKind::PhraseUnassignable: return "PhraseUnassignable";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

void warn(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

}  // namespace attralign
