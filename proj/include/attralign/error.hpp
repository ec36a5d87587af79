#ifndef ATTRALIGN_ERROR_HPP
#define ATTRALIGN_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace attralign {

enum class ErrorKind {
  ZeroNormVector,
  DimensionMismatch,
  EmptyPool,
  EmptyPhrase,
  EmptyBatch,
  TargetOutOfRange,
  ShapeMismatch,
  DegenerateBatch,
  NoRelevantItems,
  PhraseUnassignable,
  InvalidSpec,
  InvalidParams,
  MalformedInput,
  Io,
  Usage,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries a kind so the CLI can map it
// onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Non-fatal diagnostics (lenient zero-norm scoring and the like) go to stderr.
void warn(std::string_view message);

}  // namespace attralign

#endif  // ATTRALIGN_ERROR_HPP
