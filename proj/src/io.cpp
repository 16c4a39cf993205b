#include "pacmet/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "pacmet/phase.hpp"

namespace pacmet {

double round_sig(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json number_json(double x) {
  if (!std::isfinite(x)) return format_number(x);
  return round_sig(x);
}

json matrix_to_json(const CMatrix& m) {
  json re = json::array(), im = json::array();
  bool complex = false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(number_json(m(i, j).real()));
      ri.push_back(number_json(m(i, j).imag()));
      complex = complex || m(i, j).imag() != 0.0;
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  json out = {{"re", std::move(re)}};
  if (complex) out["im"] = std::move(im);
  return out;
}

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

// Drops the "ConfigError: " prefix so rethrown messages do not repeat it.
std::string bare(const ConfigError& e) {
  const std::string s = e.what();
  const std::string tag = "ConfigError: ";
  return s.rfind(tag, 0) == 0 ? s.substr(tag.size()) : s;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema_error(where, std::string("missing key '") + key + "'");
  return j.at(key);
}

double as_number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    // "pi", "2pi", "0.5pi"
    const std::string s = j.get<std::string>();
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
      const std::string head = s.substr(0, s.size() - 2);
      if (head.empty()) return std::numbers::pi;
      char* end = nullptr;
      const double f = std::strtod(head.c_str(), &end);
      if (end && *end == '\0') return f * std::numbers::pi;
    }
  }
  schema_error(where, "expected a number");
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where, "expected an integer");
  return j.get<int>();
}

Domain domain_from_json(const json& j) {
  const std::string kind = require(j, "kind", "domain").get<std::string>();
  const double T = as_number(require(j, "T", "domain"), "domain.T");
  if (kind == "periodic") return Domain::periodic(T);
  if (kind == "bounded") return Domain::bounded(T);
  schema_error("domain.kind", "expected 'periodic' or 'bounded'");
}

json domain_to_json(const Domain& d) {
  return {{"kind", d.periodic() ? "periodic" : "bounded"}, {"T", number_json(d.T)}};
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

CMatrix matrix_from_json(const json& j) {
  const json& re = require(j, "re", "matrix");
  if (!re.is_array() || re.empty()) schema_error("matrix.re", "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(re.size());
  const auto cols = static_cast<Eigen::Index>(re[0].size());
  CMatrix m = CMatrix::Zero(rows, cols);
  const json* im = j.contains("im") ? &j.at("im") : nullptr;
  if (im && (!im->is_array() || static_cast<Eigen::Index>(im->size()) != rows)) {
    schema_error("matrix.im", "shape differs from matrix.re");
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!re[r].is_array() || static_cast<Eigen::Index>(re[r].size()) != cols) schema_error("matrix.re", "ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      double x = as_number(re[r][c], "matrix.re");
      double y = 0.0;
      if (im) {
        if (!(*im)[r].is_array() || static_cast<Eigen::Index>((*im)[r].size()) != cols) {
          schema_error("matrix.im", "ragged rows");
        }
        y = as_number((*im)[r][c], "matrix.im");
      }
      m(r, c) = cplx(x, y);
    }
  }
  return m;
}

FamilySpec family_from_json(const json& j, std::optional<int> grid) {
  if (!j.is_object()) schema_error("family", "expected an object");
  const std::string kind = j.value("kind", std::string("states"));
  std::optional<Prior> prior;
  if (j.contains("prior")) prior = Prior::tabulated(number_list(j.at("prior"), "prior"));

  auto grid_size = [&]() {
    const int N = grid ? *grid : as_int(require(j, "N", kind), "N");
    if (N < 2) schema_error("N", "grid needs at least two points");
    return N;
  };
  auto finish = [&](FamilySpec spec) {
    if (spec.prior && spec.prior->size() != spec.family.size()) {
      schema_error("prior", "length differs from the grid size");
    }
    return spec;
  };

  if (kind == "states") {
    const Domain domain = domain_from_json(require(j, "domain", "family"));
    const json& states = require(j, "states", "family");
    if (!states.is_array()) schema_error("states", "expected an array");
    std::vector<DensityMatrix> list;
    for (size_t i = 0; i < states.size(); ++i) {
      try {
        list.emplace_back(matrix_from_json(states[i]));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        schema_error("states[" + std::to_string(i) + "]", e.what());
      }
    }
    std::optional<double> lip;
    if (j.contains("lipschitz")) lip = as_number(j.at("lipschitz"), "lipschitz");
    return finish({kind, StateFamily(domain, std::move(list), lip), prior, {}, std::nullopt});
  }
  if (kind == "dephasing") {
    const double omega = as_number(require(j, "omega", kind), "omega");
    const Domain domain = domain_from_json(require(j, "domain", kind));
    const int copies = j.contains("copies") ? as_int(j.at("copies"), "copies") : 1;
    if (copies < 1) schema_error("copies", "must be positive");
    StateFamily fam = build_dephasing_family(omega, grid_size(), domain);
    std::function<DensityMatrix(double)> at = [omega, copies](double t) {
      return DensityMatrix(tensor_power(dephasing_state(omega, t), copies));
    };
    if (copies > 1) fam = tensor_power_family(fam, copies);
    return finish({kind, std::move(fam), prior, std::move(at), std::nullopt});
  }
  if (kind == "covariant") {
    const std::string name = require(j, "probe", kind).get<std::string>();
    if (!is_probe_name(name)) schema_error("probe", "unknown probe '" + name + "'");
    const int n = as_int(require(j, "n", kind), "n");
    const double delta = j.contains("delta") ? as_number(j.at("delta"), "delta") : 0.1;
    const ProbeSpectrum probe = probe_by_name(name, n, delta);
    std::vector<int> support;
    for (int lam = 0; lam <= n; ++lam) {
      if (probe.precise()[lam] > 0.0L) support.push_back(lam);
    }
    std::function<DensityMatrix(double)> at = [probe, support](double t) {
      CVector psi(static_cast<Eigen::Index>(support.size()));
      for (size_t i = 0; i < support.size(); ++i) {
        psi(static_cast<Eigen::Index>(i)) = std::polar(probe[support[i]], -support[i] * t);
      }
      return DensityMatrix::pure(psi);
    };
    return finish({kind, covariant_family(probe, grid_size()), prior, std::move(at), probe});
  }
  schema_error("kind", "expected 'states', 'dephasing' or 'covariant'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

FamilySpec load_family(const std::string& path, std::optional<int> grid) {
  const json j = read_json_file(path);
  try {
    return family_from_json(j, grid);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + bare(e));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json family_to_json(const StateFamily& fam) {
  json states = json::array();
  for (const auto& s : fam.states()) states.push_back(matrix_to_json(s.matrix()));
  json out = {{"kind", "states"}, {"domain", domain_to_json(fam.domain())}, {"states", std::move(states)}};
  if (fam.lipschitz()) out["lipschitz"] = number_json(*fam.lipschitz());
  return out;
}

json povm_to_json(const PovmGrid& povm) {
  json preds = json::array(), effects = json::array();
  for (double t : povm.predictions()) preds.push_back(number_json(t));
  for (const auto& e : povm.effects()) effects.push_back(matrix_to_json(e.matrix()));
  return {{"predictions", std::move(preds)}, {"effects", std::move(effects)}};
}

namespace {

std::vector<HermitianOperator> effects_from_json(const json& j) {
  const json& list = require(j, "effects", "povm");
  if (!list.is_array() || list.empty()) schema_error("effects", "expected a nonempty array");
  std::vector<HermitianOperator> out;
  for (size_t i = 0; i < list.size(); ++i) {
    try {
      out.emplace_back(matrix_from_json(list[i]), 1e-9);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      schema_error("effects[" + std::to_string(i) + "]", e.what());
    }
  }
  return out;
}

}  // namespace

PovmGrid povm_from_json(const json& j) {
  auto effects = effects_from_json(j);
  const auto preds = number_list(require(j, "predictions", "povm"), "predictions");
  if (preds.size() != effects.size()) schema_error("predictions", "length differs from effects");
  return PovmGrid(std::move(effects), preds);
}

std::vector<HermitianOperator> load_measurement(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return effects_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + bare(e));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json probe_to_json(const ProbeSpectrum& probe) {
  json a = json::array();
  for (double x : probe.amps()) a.push_back(number_json(x));
  return {{"n", probe.n()}, {"amplitudes", std::move(a)}};
}

AtomicFile::AtomicFile(std::string path) : path_(std::move(path)) {
  std::ostringstream os;
  os << path_ << ".tmp." << ::getpid();
  tmp_ = os.str();
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw ConfigError("cannot write '" + tmp_ + "'");
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw ConfigError("write to '" + tmp_ + "' failed");
  out_.close();
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw ConfigError("cannot move output into '" + path_ + "': " + ec.message());
  committed_ = true;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  AtomicFile f(path);
  f.stream() << text;
  f.commit();
}

}  // namespace pacmet
