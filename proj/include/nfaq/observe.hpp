#pragma once

#include <string>
#include <vector>

#include "nfaq/intent.hpp"

namespace nfaq {

// What the runtime is allowed to see: folded text chunks and element
// tokens, deduplicated in render order. Deliberately carries no page
// identity, so the executor can never peek at simulator ground truth.
struct Observation {
  std::vector<std::string> visible_text;
  std::vector<std::string> elements;

  friend bool operator==(const Observation&, const Observation&) = default;
};

std::string observation_digest(const Observation& obs);

// Interface the executor drives. apply() receives the concrete action with
// templates already substituted; failed actuation is the environment's
// business (it simply leaves the next observation unchanged).
class Environment {
 public:
  virtual ~Environment() = default;
  virtual Observation observe() = 0;
  virtual void apply(const ActionCall& action) = 0;
};

}  // namespace nfaq
