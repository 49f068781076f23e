#include "aex/errors.h"

namespace aex {

void Require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace aex
