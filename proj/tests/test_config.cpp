#include <doctest.h>

#include <sstream>
#include <string>

#include "supobs/config.hpp"
#include "supobs/errors.hpp"

using namespace supobs;

namespace {

const std::string kSource = SUPOBS_SOURCE_DIR;

std::string config_error(const std::string& text) {
  std::istringstream is(text);
  try {
    parse_config(is).validate();
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigError);
    return e.what();
  }
  return {};
}

const char* kScalar = R"(
[plant]
model = scalar_linear
[theta]
lower = 1
upper = 2
[sampling]
mode = dynamic
m = 5
alpha = 0.5
Td = 10
[truth]
p_star = 1.5
[init]
x0 = 1
xhat0 = 0
[observer]
class = luenberger
poles = -3
)";

}  // namespace

TEST_CASE("shipped configs load and validate") {
  for (const char* name : {"jansen_rit_dynamic.cfg", "jansen_rit_static.cfg", "scalar_linear_static.cfg",
                           "scalar_linear_dynamic.cfg"}) {
    CAPTURE(name);
    const ExperimentConfig cfg = load_config(kSource + "/configs/" + name);
    CHECK_NOTHROW(cfg.validate());
  }
  const ExperimentConfig jr = load_config(kSource + "/configs/jansen_rit_dynamic.cfg");
  CHECK(jr.mode == SamplingMode::Dynamic);
  CHECK(jr.m == 5);
  CHECK(*jr.alpha == 0.8);
  CHECK(*jr.Td == 10.0);
  CHECK(jr.lambda == 0.005);
  CHECK(jr.t_final == 100.0);
  CHECK(jr.theta_lower(0) == 4.0);
  CHECK(jr.theta_upper(1) == 28.0);
}

TEST_CASE("config round trip: parse, serialize, parse") {
  for (const char* name : {"jansen_rit_dynamic.cfg", "scalar_linear_static.cfg"}) {
    const ExperimentConfig a = load_config(kSource + "/configs/" + name);
    std::istringstream is(serialize_config(a));
    const ExperimentConfig b = parse_config(is);
    CHECK(a == b);
    CHECK(serialize_config(b) == serialize_config(a));
  }
  std::istringstream is(kScalar);
  const ExperimentConfig a = parse_config(is);
  std::istringstream again(serialize_config(a));
  CHECK(parse_config(again) == a);
}

TEST_CASE("validation names the violated constraint") {
  std::string text = kScalar;
  text.replace(text.find("alpha = 0.5"), 11, "alpha = 1.2");
  const std::string msg = config_error(text);
  CHECK(msg.find("sampling.alpha") != std::string::npos);
  CHECK(msg.find("(0,1)") != std::string::npos);

  CHECK(config_error(std::string(kScalar) + "[bogus]\nx = 1\n").find("unknown section") != std::string::npos);
  CHECK(config_error(std::string(kScalar) + "[sim]\ndtt = 1\n").find("dtt") != std::string::npos);

  text = kScalar;
  text.replace(text.find("class = luenberger"), 18, "class = circle_criterion");
  CHECK(config_error(text).find("observer.class") != std::string::npos);

  text = kScalar;
  text.replace(text.find("lower = 1"), 9, "lower = 3");
  CHECK(config_error(text).find("theta") != std::string::npos);

  text = kScalar;
  text.replace(text.find("Td = 10"), 7, "");
  CHECK(config_error(text).find("dynamic mode requires") != std::string::npos);

  CHECK_FALSE(config_error(std::string(kScalar) + "[sim]\ndt = abc\n").empty());
}

TEST_CASE("missing config file is an error") {
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), Error);
}
