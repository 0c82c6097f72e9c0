#pragma once

#include <stdexcept>
#include <string>

namespace alacs {

/// Machine-readable failure categories. The CLI maps these to exit codes.
enum class ErrorCode {
  DegenerateDepth,          // normalization with |z| below tolerance
  NonConvergence,           // iterative solve exceeded its iteration cap
  SingularRay,              // ray nearly parallel to the laser plane
  NegativeDepth,            // model produced a point behind the camera
  NonPositiveBaseline,      // slide offset meets or exceeds the home baseline
  BehindCamera,             // target corner with non-positive depth
  DegenerateConfiguration,  // collinear corners / rank-deficient homography
  ParallelRay,              // ray parallel to the target plane
  RankDeficient,            // calibration design matrix not full rank
  InsufficientSamples,      // fewer samples than the fit requires
  NoConsensus,              // RANSAC found no inlier set of usable size
  NoIntersection,           // laser line misses the target board
  AllOccluded,              // every scan batch masked out
  InvalidConfig,            // malformed or out-of-range configuration
  IoFailure,                // missing or unreadable file
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace alacs
