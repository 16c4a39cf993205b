#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include <unistd.h>

#include "pacmet/errors.hpp"
#include "pacmet/io.hpp"

using namespace pacmet;
namespace fs = std::filesystem;

namespace {

std::string message_of(const json& j) {
  try {
    family_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / ("pacmet_io_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(round_sig(0.1234567890123456) == 0.123456789012);
  CHECK(number_json(std::nan("")) == json("nan"));
  CHECK(number_json(2.5) == json(2.5));
}

TEST_CASE("matrix roundtrip") {
  CMatrix m(2, 2);
  m << 1.0, cplx(0.5, -0.25), cplx(0.5, 0.25), 2.0;
  CHECK((matrix_from_json(matrix_to_json(m)) - m).norm() == 0.0);
  const json real = {{"re", {{1.0, 0.0}, {0.0, 1.0}}}};
  CHECK((matrix_from_json(real) - CMatrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("family files") {
  const FamilySpec d = load_family(std::string(PACMET_TEST_DATA) + "/dephasing.json");
  CHECK(d.kind == "dephasing");
  CHECK(d.family.size() == 16);
  CHECK_FALSE(d.family.domain().periodic());
  CHECK(d.family.domain().T == doctest::Approx(std::numbers::pi));
  REQUIRE(d.state_at);
  CHECK((d.state_at(d.family.time(5)).matrix() - d.family.state(5).matrix()).norm() < 1e-14);

  const FamilySpec g = load_family(std::string(PACMET_TEST_DATA) + "/dephasing.json", 32);
  CHECK(g.family.size() == 32);

  const FamilySpec c = load_family(std::string(PACMET_TEST_DATA) + "/covariant_qubit.json");
  REQUIRE(c.probe.has_value());
  CHECK(c.probe->n() == 1);
  CHECK(c.family.size() == 64);

  // Explicit states survive a write/read cycle.
  const FamilySpec k = load_family(std::string(PACMET_TEST_DATA) + "/constant.json");
  const FamilySpec back = family_from_json(family_to_json(k.family));
  REQUIRE(back.family.size() == k.family.size());
  for (int l = 0; l < k.family.size(); ++l) {
    CHECK((back.family.state(l).matrix() - k.family.state(l).matrix()).norm() < 1e-12);
  }
}

TEST_CASE("schema errors name the offending key") {
  CHECK(message_of(json{{"kind", "weird"}}).find("kind") != std::string::npos);
  CHECK(message_of(json{{"kind", "dephasing"}, {"N", 16}, {"domain", {{"kind", "bounded"}, {"T", 3.0}}}})
            .find("omega") != std::string::npos);
  CHECK(message_of(json{{"kind", "dephasing"}, {"omega", 1.0}, {"N", 16}, {"domain", {{"kind", "ring"}, {"T", 3.0}}}})
            .find("domain") != std::string::npos);
  CHECK(message_of(json{{"kind", "covariant"}, {"probe", "fancy"}, {"n", 2}, {"N", 8}}).find("probe") !=
        std::string::npos);
  CHECK_THROWS_AS(load_family("/nonexistent/family.json"), ConfigError);
}

TEST_CASE("POVM roundtrip") {
  std::vector<HermitianOperator> q(4, HermitianOperator::identity(2) * 0.25);
  const PovmGrid p(q, {0.0, 1.0, 2.0, 3.0});
  const PovmGrid back = povm_from_json(povm_to_json(p));
  REQUIRE(back.size() == 4);
  CHECK(back.predictions()[2] == 2.0);
  CHECK((back.effect(1).matrix() - q[1].matrix()).norm() == 0.0);

  const auto m = load_measurement(std::string(PACMET_TEST_DATA) + "/plus_minus.json");
  CHECK(m.size() == 2);
}

TEST_CASE("atomic files") {
  const fs::path dir = scratch_dir();
  const fs::path target = dir / "out.txt";
  {
    AtomicFile f(target.string());
    f.stream() << "partial";
  }
  CHECK_FALSE(fs::exists(target));
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 0);
  {
    AtomicFile f(target.string());
    f.stream() << "done\n";
    f.commit();
  }
  CHECK(fs::exists(target));
  write_text_atomic(target.string(), "again\n");
  std::ifstream in(target);
  std::string line;
  std::getline(in, line);
  CHECK(line == "again");
  fs::remove_all(dir);
}
