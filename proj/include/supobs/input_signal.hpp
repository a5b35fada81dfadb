#pragma once

// Plant input signals.
//
// Random inputs use MT19937-64 (the 64-bit Mersenne twister, seeded with the
// configured integer through the standard init_genrand64 rule) and map each
// draw to [0, 1) as (draw >> 11) * 2^-53. A uniform_hold signal takes one
// such draw per component per hold interval, in time order, and scales it
// to [low, high).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "supobs/linalg.hpp"

namespace supobs {

struct InputSpec {
  enum class Kind { Zero, Constant, Sine, UniformHold };

  Kind kind = Kind::Zero;
  std::size_t nu = 1;
  double value = 0.0;      // constant
  double amplitude = 1.0;  // sine: amplitude * sin(frequency * t + phase) + offset
  double frequency = 1.0;  // rad/s
  double phase = 0.0;
  double offset = 0.0;
  double low = 0.0;  // uniform_hold range
  double high = 1.0;
  double hold = 1e-3;  // seconds
  std::uint64_t seed = 1;

  static Kind parse_kind(const std::string& s);
  static std::string kind_name(Kind k);
  void validate() const;
  bool operator==(const InputSpec&) const = default;
};

double unit_draw(std::mt19937_64& gen);

class InputSignal {
 public:
  explicit InputSignal(InputSpec spec);

  const InputSpec& spec() const { return spec_; }
  /// Piecewise-constant signals are latched once per integration step.
  bool piecewise_constant() const { return spec_.kind != InputSpec::Kind::Sine; }
  /// u(t). UniformHold values are generated lazily and cached, so any t can
  /// be queried in any order with identical results.
  Vec value(double t);

 private:
  InputSpec spec_;
  std::mt19937_64 gen_;
  std::vector<Vec> held_;
};

}  // namespace supobs
