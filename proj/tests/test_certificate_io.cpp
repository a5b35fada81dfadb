#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "supobs/certificate_io.hpp"
#include "supobs/errors.hpp"

using namespace supobs;

namespace {

Mat random_mat(std::mt19937_64& gen, int r, int c) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-30, 30);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = d(gen) * std::pow(10.0, e(gen));
  return m;
}

GainCertificateFile random_file(std::mt19937_64& gen, bool with_plant) {
  GainCertificateFile f;
  f.parameter = random_mat(gen, 2, 1);
  Mat q = random_mat(gen, 6, 6);
  f.lmi.P = q * q.transpose();
  f.lmi.M = Mat::Identity(2, 2) * 3.25;
  f.lmi.K = random_mat(gen, 2, 1);
  f.lmi.L = random_mat(gen, 6, 1);
  f.lmi.lmi_nu = 0.1 / 3.0;
  f.lmi.lmi_mu = 1e300;
  f.lmi.sector_upper = Vec::Constant(2, 0.7);
  f.max_eig = -1e-300;
  f.equilibrated_max_eig = -0.1234567890123456789;
  f.created = "round trip";
  if (with_plant) f.plant = LureMatrices{random_mat(gen, 6, 6), random_mat(gen, 6, 2), random_mat(gen, 1, 6),
                                         random_mat(gen, 2, 6)};
  return f;
}

}  // namespace

TEST_CASE("matrix encoding is column-major and bit-exact") {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  CHECK(encode_matrix(m) == "2 2 1 3 2 4");
  CHECK(decode_matrix("2 2 1 3 2 4") == m);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 20; ++i) {
    const Mat r = random_mat(gen, 1 + i % 4, 1 + i % 3);
    CHECK(decode_matrix(encode_matrix(r)) == r);
  }
  CHECK_THROWS_AS(decode_matrix("2 2 1 2 3"), Error);
  CHECK_THROWS_AS(decode_matrix("x"), Error);
}

TEST_CASE("certificate files round-trip bit for bit") {
  std::mt19937_64 gen(42);
  std::vector<GainCertificateFile> files{random_file(gen, true), random_file(gen, false), random_file(gen, true)};
  files[1].class_tag = "luenberger";
  std::stringstream ss;
  write_certificates(ss, files);
  const auto back = read_certificates(ss);
  REQUIRE(back.size() == files.size());
  for (std::size_t i = 0; i < files.size(); ++i) CHECK(back[i] == files[i]);
}

TEST_CASE("malformed certificate files name the fault") {
  std::istringstream missing("[certificate_0]\nclass = circle_criterion\nparameter = 1 1 2\n");
  try {
    read_certificates(missing);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigError);
    CHECK(std::string(e.what()).find("certificate_0") != std::string::npos);
  }
  CHECK_THROWS_AS(read_certificates(std::string("/nonexistent/gains.cert")), Error);
}

TEST_CASE("the shipped hand certificate verifies") {
  const auto certs = read_certificates(std::string(SUPOBS_SOURCE_DIR) + "/configs/hand_scalar.cert");
  REQUIRE(certs.size() == 2);
  REQUIRE(certs[0].plant.has_value());
  const CCCertificate ok = verify_cc_gains(certs[0].lmi, *certs[0].plant);
  CHECK(ok.max_eig == doctest::Approx(-0.977435).epsilon(1e-6));
  try {
    verify_cc_gains(certs[1].lmi, *certs[1].plant);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotNSD);
  }
}
