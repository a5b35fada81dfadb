#pragma once

// Gain certificate files: INI-style text, one [certificate_N] section per
// observer. Matrices are written as "rows cols v11 v21 ..." (column-major)
// with 17 significant digits, so a write/read cycle is bit-exact.
//
//   [certificate_0]
//   class = circle_criterion
//   parameter = 2 1 6.5 25.5
//   P = 6 6 ...
//   M = 2 2 ...
//   ...

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "supobs/gain_design.hpp"

namespace supobs {

struct GainCertificateFile {
  std::string class_tag = "circle_criterion";  // or "luenberger"
  Vec parameter;
  CCLmiData lmi;  // Luenberger entries use P, L and lmi_nu only
  double max_eig = 0.0;
  double equilibrated_max_eig = 0.0;
  std::string created;
  /// Plant matrices at `parameter`, for self-contained instances.
  std::optional<LureMatrices> plant;

  bool operator==(const GainCertificateFile& o) const;
};

std::string format_double(double v);
std::string encode_matrix(const Mat& m);
Mat decode_matrix(const std::string& s);

void write_certificates(std::ostream& os, const std::vector<GainCertificateFile>& certs);
void write_certificates(const std::string& path, const std::vector<GainCertificateFile>& certs);
/// Throws ConfigError with the offending section/key, IoError if unreadable.
std::vector<GainCertificateFile> read_certificates(std::istream& is);
std::vector<GainCertificateFile> read_certificates(const std::string& path);

GainCertificateFile to_file(const CCCertificate& cert, const Vec& parameter, std::string created);

}  // namespace supobs
