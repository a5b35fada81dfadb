#include "supobs/input_signal.hpp"

#include <cmath>

#include "supobs/errors.hpp"

namespace supobs {

InputSpec::Kind InputSpec::parse_kind(const std::string& s) {
  if (s == "zero") return Kind::Zero;
  if (s == "constant") return Kind::Constant;
  if (s == "sine") return Kind::Sine;
  if (s == "uniform_hold") return Kind::UniformHold;
  throw Error(Errc::ConfigError, "input.kind must be one of zero, constant, sine, uniform_hold (got '" + s + "')");
}

std::string InputSpec::kind_name(Kind k) {
  switch (k) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::Sine: return "sine";
    case Kind::UniformHold: return "uniform_hold";
  }
  return "zero";
}

void InputSpec::validate() const {
  if (nu < 1) throw Error(Errc::ConfigError, "input dimension must be >= 1");
  for (double v : {value, amplitude, frequency, phase, offset, low, high, hold}) {
    if (!std::isfinite(v)) throw Error(Errc::ConfigError, "input parameters must be finite");
  }
  if (kind == Kind::UniformHold) {
    if (!(low <= high)) throw Error(Errc::ConfigError, "input.low must not exceed input.high");
    if (!(hold > 0.0)) throw Error(Errc::ConfigError, "input.hold must be > 0");
  }
}

double unit_draw(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

InputSignal::InputSignal(InputSpec spec) : spec_(spec), gen_(spec.seed) { spec_.validate(); }

Vec InputSignal::value(double t) {
  const auto nu = static_cast<Eigen::Index>(spec_.nu);
  switch (spec_.kind) {
    case InputSpec::Kind::Zero: return Vec::Zero(nu);
    case InputSpec::Kind::Constant: return Vec::Constant(nu, spec_.value);
    case InputSpec::Kind::Sine:
      return Vec::Constant(nu, spec_.amplitude * std::sin(spec_.frequency * t + spec_.phase) + spec_.offset);
    case InputSpec::Kind::UniformHold: {
      // slack keeps t = k*hold on the new interval despite rounding in t/hold
      const double q = std::floor(t / spec_.hold + 1e-9);
      const auto k = static_cast<std::size_t>(std::max(0.0, q));
      while (held_.size() <= k) {
        Vec v(nu);
        for (Eigen::Index j = 0; j < nu; ++j) v(j) = spec_.low + (spec_.high - spec_.low) * unit_draw(gen_);
        held_.push_back(std::move(v));
      }
      return held_[k];
    }
  }
  return Vec::Zero(nu);
}

}  // namespace supobs
