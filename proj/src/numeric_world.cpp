#include "pbml/numeric_world.hpp"

#include "pbml/error.hpp"

namespace pbml {

NumericGenome NumericWorld::decode(std::span<const double> v) {
  if (v.size() != 2) throw ConfigError("numeric genome: expected 2 parameters, got " + std::to_string(v.size()));
  if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw ConfigError("numeric genome: non-finite parameter");
  return {v[0], v[1]};
}

}  // namespace pbml
