#pragma once

#include <stdexcept>
#include <string>

namespace pd {

enum class Errc {
  Parse,
  BoundaryMismatch,
  StaleSite,
  InvalidRule,
  NotApplicable,
  BadIndex,
  NonTwistGate,
  UnknownPolygraph,
  FuelExhausted,
  MissingInterpretation,
  NotSequentializable,
  MalformedBranch,
  NotIrreducible,
  NoCrossingSplit,
  ConclusionMismatch,
  Contract,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}
  Errc code() const { return code_; }
  /// The message without the error name.
  const std::string& detail() const { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace pd
