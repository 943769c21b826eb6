#pragma once

#include <stdexcept>
#include <string>

namespace mammobot {

// Failure classes surfaced by the calibration, registration and motion
// pipelines. Each maps to one documented error condition of a public
// operation; anything else is a plain std::invalid_argument.
enum class Errc {
  LengthMismatch,
  TooFewPoses,
  TooFewSamples,
  DegenerateMotion,
  DegenerateMarkers,
  DegenerateConfiguration,
  RankAmbiguity,
  RankDeficient,
  PointAtInfinity,
  Diverged,
  JointLimit,
  NotConverged,
  PlanningTimeout,
  Timeout,
  MarkerBehindCamera,
  ShapeMismatch,
  AllZeroFrame,
  ZeroBackgroundVariance,
  IoError,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace mammobot
