#pragma once

#include <stdexcept>
#include <string>

namespace profmc {

/*
 * Error taxonomy for the library. Each type marks a distinct contract
 * violation so callers can catch exactly what they can handle: numeric
 * preconditions (singular or indefinite information), model-domain failures
 * (no radial maximizer), statistical preconditions (too few samples), and
 * configuration problems.
 */

struct SingularNuisanceInformation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoLocalMaximizer : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyGroup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace profmc
