#pragma once

#include <stdexcept>
#include <string>

namespace varembed {

/// Broad failure class; the CLI maps each onto a process exit code.
enum class ErrorCategory {
  Config,   // exit 1
  Data,     // exit 2
  Backend,  // exit 3
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define VAREMBED_DECLARE_ERROR(Name, Category)                         \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what)                             \
        : Error(ErrorCategory::Category, #Name ": " + what) {}         \
  }

VAREMBED_DECLARE_ERROR(ConfigError, Config);
VAREMBED_DECLARE_ERROR(PreconditionError, Data);
VAREMBED_DECLARE_ERROR(UnknownChromosome, Data);
VAREMBED_DECLARE_ERROR(InvalidVariant, Data);
VAREMBED_DECLARE_ERROR(DuplicateKey, Data);
VAREMBED_DECLARE_ERROR(UnsortedInput, Data);
VAREMBED_DECLARE_ERROR(VocabLoadError, Config);
VAREMBED_DECLARE_ERROR(EmptyCorpus, Data);
VAREMBED_DECLARE_ERROR(IoError, Data);
VAREMBED_DECLARE_ERROR(FormatError, Data);
VAREMBED_DECLARE_ERROR(ChecksumError, Data);
VAREMBED_DECLARE_ERROR(KeyNotInStore, Data);
VAREMBED_DECLARE_ERROR(AllZeroDosage, Data);
VAREMBED_DECLARE_ERROR(InsufficientData, Data);
VAREMBED_DECLARE_ERROR(DegenerateLabels, Data);
VAREMBED_DECLARE_ERROR(BackendUnavailable, Backend);
VAREMBED_DECLARE_ERROR(DimMismatch, Backend);
VAREMBED_DECLARE_ERROR(PartialBatch, Backend);

#undef VAREMBED_DECLARE_ERROR

/// Row-level parse failure. `reason` is the short tag used in skip reports
/// ("position", "significance", ...).
class MalformedRow : public Error {
 public:
  MalformedRow(std::string reason, const std::string& detail)
      : Error(ErrorCategory::Data, "MalformedRow(" + reason + "): " + detail),
        reason_(std::move(reason)) {}

  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

}  // namespace varembed
