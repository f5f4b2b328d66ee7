#pragma once

#include <stdexcept>
#include <string>

namespace coevo {

// Bad user input: parameters, networks, states, config documents.
// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Division by beta_i + lambda_i with both weights zero.
class DegenerateWeightsError : public ValidationError {
 public:
  explicit DegenerateWeightsError(int player)
      : ValidationError("player " + std::to_string(player + 1) +
                        ": beta + lambda = 0, best-response opinion is undefined"),
        player_(player) {}
  int player() const noexcept { return player_; }

 private:
  int player_;
};

// Something that should be impossible under the checked preconditions
// (e.g. a singular opinion system). Exit code 2.
class InternalFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace coevo
