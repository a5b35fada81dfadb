#include "supobs/certificate_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "supobs/errors.hpp"

namespace supobs {

namespace pt = boost::property_tree;

namespace {

bool same(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || (a.array() == b.array()).all());
}

std::string need(const pt::ptree& sec, const std::string& section, const char* key) {
  auto v = sec.get_optional<std::string>(key);
  if (!v) throw Error(Errc::ConfigError, "[" + section + "] missing key '" + key + "'");
  return *v;
}

double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  while (end && *end == ' ') ++end;
  if (end == s.c_str() || (end && *end != '\0') || errno == ERANGE) {
    throw Error(Errc::ConfigError, where + ": not a number: '" + s + "'");
  }
  return v;
}

Mat matrix_key(const pt::ptree& sec, const std::string& section, const char* key) {
  try {
    return decode_matrix(need(sec, section, key));
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError && std::string(e.what()).find("missing key") != std::string::npos) throw;
    throw Error(Errc::ConfigError, "[" + section + "] " + key + ": " + e.what());
  }
}

}  // namespace

bool GainCertificateFile::operator==(const GainCertificateFile& o) const {
  auto lmi_eq = [](const CCLmiData& a, const CCLmiData& b) {
    return same(a.P, b.P) && same(a.M, b.M) && same(a.K, b.K) && same(a.L, b.L) && a.lmi_nu == b.lmi_nu &&
           a.lmi_mu == b.lmi_mu && same(a.sector_upper, b.sector_upper);
  };
  auto plant_eq = [](const std::optional<LureMatrices>& a, const std::optional<LureMatrices>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (same(a->A, b->A) && same(a->G, b->G) && same(a->C, b->C) && same(a->H, b->H));
  };
  return class_tag == o.class_tag && same(parameter, o.parameter) && lmi_eq(lmi, o.lmi) && max_eig == o.max_eig &&
         equilibrated_max_eig == o.equilibrated_max_eig && created == o.created && plant_eq(plant, o.plant);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string encode_matrix(const Mat& m) {
  std::string s = std::to_string(m.rows()) + " " + std::to_string(m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    s += ' ';
    s += format_double(m.data()[i]);
  }
  return s;
}

Mat decode_matrix(const std::string& s) {
  std::istringstream is(s);
  long rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) throw Error(Errc::ConfigError, "matrix needs 'rows cols' prefix");
  Mat m(rows, cols);
  std::string tok;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!(is >> tok)) throw Error(Errc::ConfigError, "matrix has fewer entries than rows*cols");
    m.data()[i] = parse_double(tok, "matrix entry");
  }
  if (is >> tok) throw Error(Errc::ConfigError, "matrix has more entries than rows*cols");
  return m;
}

void write_certificates(std::ostream& os, const std::vector<GainCertificateFile>& certs) {
  pt::ptree root;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const auto& c = certs[i];
    pt::ptree sec;
    sec.put("class", c.class_tag);
    sec.put("parameter", encode_matrix(c.parameter));
    sec.put("P", encode_matrix(c.lmi.P));
    sec.put("M", encode_matrix(c.lmi.M));
    sec.put("K", encode_matrix(c.lmi.K));
    sec.put("L", encode_matrix(c.lmi.L));
    sec.put("lmi_nu", format_double(c.lmi.lmi_nu));
    sec.put("lmi_mu", format_double(c.lmi.lmi_mu));
    sec.put("sector_upper", encode_matrix(c.lmi.sector_upper));
    sec.put("max_eig", format_double(c.max_eig));
    sec.put("equilibrated_max_eig", format_double(c.equilibrated_max_eig));
    sec.put("created", c.created);
    if (c.plant) {
      sec.put("A", encode_matrix(c.plant->A));
      sec.put("G", encode_matrix(c.plant->G));
      sec.put("C", encode_matrix(c.plant->C));
      sec.put("H", encode_matrix(c.plant->H));
    }
    root.push_back({"certificate_" + std::to_string(i), sec});
  }
  pt::write_ini(os, root);
}

void write_certificates(const std::string& path, const std::vector<GainCertificateFile>& certs) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::IoError, "cannot write " + path);
  write_certificates(os, certs);
  if (!os) throw Error(Errc::IoError, "write failed: " + path);
}

std::vector<GainCertificateFile> read_certificates(std::istream& is) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<GainCertificateFile> out;
  for (const auto& [name, sec] : root) {
    if (name.rfind("certificate", 0) != 0) continue;
    GainCertificateFile c;
    c.class_tag = need(sec, name, "class");
    if (c.class_tag != "circle_criterion" && c.class_tag != "luenberger") {
      throw Error(Errc::ConfigError, "[" + name + "] class must be circle_criterion or luenberger");
    }
    c.parameter = matrix_key(sec, name, "parameter");
    c.lmi.P = matrix_key(sec, name, "P");
    c.lmi.L = matrix_key(sec, name, "L");
    c.lmi.lmi_nu = parse_double(need(sec, name, "lmi_nu"), "[" + name + "] lmi_nu");
    if (c.class_tag == "circle_criterion") {
      c.lmi.M = matrix_key(sec, name, "M");
      c.lmi.K = matrix_key(sec, name, "K");
      c.lmi.lmi_mu = parse_double(need(sec, name, "lmi_mu"), "[" + name + "] lmi_mu");
      c.lmi.sector_upper = matrix_key(sec, name, "sector_upper");
    } else {
      if (sec.count("M")) c.lmi.M = matrix_key(sec, name, "M");
      if (sec.count("K")) c.lmi.K = matrix_key(sec, name, "K");
      if (sec.count("lmi_mu")) c.lmi.lmi_mu = parse_double(need(sec, name, "lmi_mu"), "[" + name + "] lmi_mu");
      if (sec.count("sector_upper")) c.lmi.sector_upper = matrix_key(sec, name, "sector_upper");
    }
    if (sec.count("max_eig")) c.max_eig = parse_double(need(sec, name, "max_eig"), "[" + name + "] max_eig");
    if (sec.count("equilibrated_max_eig")) {
      c.equilibrated_max_eig =
          parse_double(need(sec, name, "equilibrated_max_eig"), "[" + name + "] equilibrated_max_eig");
    }
    c.created = sec.get<std::string>("created", "");
    const int plant_keys = static_cast<int>(sec.count("A") + sec.count("G") + sec.count("C") + sec.count("H"));
    if (plant_keys == 4) {
      c.plant = LureMatrices{matrix_key(sec, name, "A"), matrix_key(sec, name, "G"), matrix_key(sec, name, "C"),
                             matrix_key(sec, name, "H")};
    } else if (plant_keys != 0) {
      throw Error(Errc::ConfigError, "[" + name + "] plant matrices need all of A, G, C, H");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<GainCertificateFile> read_certificates(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot open " + path);
  return read_certificates(is);
}

GainCertificateFile to_file(const CCCertificate& cert, const Vec& parameter, std::string created) {
  GainCertificateFile f;
  f.class_tag = "circle_criterion";
  f.parameter = parameter;
  f.lmi = cert.data;
  f.max_eig = cert.max_eig;
  f.equilibrated_max_eig = cert.equilibrated_max_eig;
  f.created = std::move(created);
  return f;
}

}  // namespace supobs
