#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace distcomp {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Thrown when an argument violates an operation's precondition.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a model fails one of the structural assumptions a routine
// relies on (monotonicity, range, majorization, ...).
struct AssumptionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical procedure cannot reach its accuracy target.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an iterative routine exhausts its budget with the residual
// above threshold and the caller demanded a converged result.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic uniform generator. The raw 64-bit stream comes from
// mt19937_64; the float mapping is fixed here so results do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Index uniform_index(Index n) {
    return static_cast<Index>(gen_() % static_cast<std::uint64_t>(n));
  }
  std::uint64_t next_seed() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace distcomp
