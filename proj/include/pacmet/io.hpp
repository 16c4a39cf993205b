#pragma once

// JSON and CSV plumbing: family, POVM and probe files, number formatting, and
// write-to-temp-then-rename output files.

#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "pacmet/optimize.hpp"
#include "pacmet/probe.hpp"

namespace pacmet {

using json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so JSON output prints at most 12.
double round_sig(double x);
/// "%.12g" in the C locale; non-finite values print as inf, -inf, nan.
std::string format_number(double x);
/// Number or string ("inf", "-inf", "nan") after rounding.
json number_json(double x);

/// {"re": [[...]], "im": [[...]]}; "im" may be omitted on input.
json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j);

/// A family as loaded from disk, with its continuous curve when the file
/// names a generator.
struct FamilySpec {
  std::string kind;  // states, dephasing, covariant
  StateFamily family;
  std::optional<Prior> prior;
  std::function<DensityMatrix(double)> state_at;  // empty for explicit state lists
  std::optional<ProbeSpectrum> probe;             // covariant families
};

/// Schemas:
///   {"kind": "states", "domain": {"kind": "periodic"|"bounded", "T": x},
///    "states": [matrix, ...], "lipschitz": x?, "prior": [..]?}
///   {"kind": "dephasing", "omega": x, "N": n, "domain": {...}, "copies": n?}
///   {"kind": "covariant", "probe": name, "n": n, "N": n, "delta": x?}
/// `grid` overrides N for generator families. Throws ConfigError on schema
/// problems, with the offending key in the message.
FamilySpec family_from_json(const json& j, std::optional<int> grid = std::nullopt);
FamilySpec load_family(const std::string& path, std::optional<int> grid = std::nullopt);
json family_to_json(const StateFamily& fam);

/// {"predictions": [..], "effects": [matrix, ...]}.
json povm_to_json(const PovmGrid& povm);
PovmGrid povm_from_json(const json& j);
/// Measurement effects without grid predictions: {"effects": [matrix, ...]}.
std::vector<HermitianOperator> load_measurement(const std::string& path);

json probe_to_json(const ProbeSpectrum& probe);

json read_json_file(const std::string& path);

/// Streams into a temporary file next to `path`; commit() renames it into
/// place. The temporary is removed if commit() is never called.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace pacmet
