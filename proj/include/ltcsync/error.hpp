#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltcsync {

enum class ErrorCode {
  InvalidArgument,
  UnsupportedRate,
  InvalidTimecode,
  SyncWordMismatch,
  InvalidBcdDigit,
  NoCarrierDetected,
  NoEventsFound,
  SampleRateMismatch,
  SignalTooShort,
  NoOverlap,
  TooFewEvents,
  LengthMismatch,
  InvalidConfig,
  EmptyTrace,
  Io,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedRate: return "UnsupportedRate";
    case ErrorCode::InvalidTimecode: return "InvalidTimecode";
    case ErrorCode::SyncWordMismatch: return "SyncWordMismatch";
    case ErrorCode::InvalidBcdDigit: return "InvalidBcdDigit";
    case ErrorCode::NoCarrierDetected: return "NoCarrierDetected";
    case ErrorCode::NoEventsFound: return "NoEventsFound";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::TooFewEvents: return "TooFewEvents";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// All library failures are reported through this exception; `code()` lets
/// callers branch on the failure kind without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ltcsync
