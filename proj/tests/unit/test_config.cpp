#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "examini/config/config.hpp"

using namespace examini;
using namespace examini::config;

namespace {

std::vector<std::string> violations_of(auto&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& field) {
  return std::any_of(v.begin(), v.end(), [&](auto& s) { return s.rfind(field + ":", 0) == 0; });
}

}  // namespace

TEST_CASE("mhd schema") {
  SUBCASE("defaults are injected into a minimal config") {
    const auto c = mhd_from_json(json::object(), 1);
    CHECK(c.cfl == 0.3);
    CHECK(c.gamma == 5.0 / 3.0);
    const json eff = to_json(c);
    CHECK(eff.at("cfl") == 0.3);
    CHECK(eff.at("problem") == "orszag_tang");
    CHECK(eff.at("seed") == 1);
  }
  SUBCASE("cfl out of range names the field") {
    const auto v = violations_of([] { mhd_from_json(json{{"cfl", 1.5}}, 1); });
    REQUIRE(v.size() == 1);
    CHECK(mentions(v, "cfl"));
  }
  SUBCASE("every violation is listed") {
    const json j{{"cfl", 1.5}, {"gamma", 0.5}, {"cells", {16, -2, 16}}, {"bogus", 1},
                 {"divb", "XX"}, {"max_steps", "ten"}};
    const auto v = violations_of([&] { mhd_from_json(j, 1); });
    CHECK(v.size() == 6);
    for (const char* f : {"cfl", "gamma", "cells[1]", "bogus", "divb", "max_steps"})
      CHECK_MESSAGE(mentions(v, f), f);
  }
  SUBCASE("cross-field checks see the rank count") {
    const json j{{"cells", {32, 32, 32}}};
    CHECK_NOTHROW(mhd_from_json(j, 8));
    const auto v = violations_of([&] { mhd_from_json(j, 3); });
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("divisible") != std::string::npos);
  }
  SUBCASE("effective config is a fixed point") {
    const json j{{"problem", "cp_alfven"}, {"cells", {16, 8, 8}}, {"divb", "GLM"}, {"cfl", 0.2}};
    const json eff = to_json(mhd_from_json(j, 2));
    CHECK(to_json(mhd_from_json(eff, 2)) == eff);
    CHECK(eff.at("divb") == "GLM");
  }
  SUBCASE("not an object") {
    const auto v = violations_of([] { mhd_from_json(json::array(), 1); });
    CHECK(v.size() == 1);
  }
}

TEST_CASE("pic schema") {
  const auto c = pic_from_json(json::object(), 1);
  CHECK(c.theta == 0.5);
  CHECK(c.mover_iterations == 3);
  CHECK(c.gmres.tolerance == 1e-8);
  CHECK(c.gmres.restart == 20);

  const json bad{{"theta", 0.2},
                 {"gmres", {{"restart", 0}}},
                 {"species", {{{"qom", 0.0}}, {{"ppc_x", 0}, {"color", "red"}}}}};
  const auto v = violations_of([&] { pic_from_json(bad, 1); });
  CHECK(v.size() == 5);
  for (const char* f : {"theta", "gmres.restart", "species[0].qom", "species[1].ppc_x",
                        "species[1].color"})
    CHECK_MESSAGE(mentions(v, f), f);

  const json eff = to_json(c);
  CHECK(to_json(pic_from_json(eff, 4)) == eff);
  CHECK(violations_of([] { pic_from_json(json{{"nx", 7}, {"ny", 7}}, 4); }).size() == 1);
}

TEST_CASE("gravity schema") {
  const auto c = gravity_from_json(json{{"bodies", 100}, {"walk", "classic"}}, 2);
  CHECK(c.bodies == 100);
  CHECK(c.walk == gravity::Walk::Classic);
  const json eff = to_json(c);
  CHECK(to_json(gravity_from_json(eff, 2)) == eff);
  const auto v = violations_of([] {
    gravity_from_json(json{{"bodies", 1}, {"theta", -1.0}, {"sph_params", {{"n_ngb", 2}}}}, 1);
  });
  CHECK(v.size() == 3);
  CHECK(mentions(v, "sph_params.n_ngb"));
}

TEST_CASE("json files and ranks") {
  const auto dir = std::filesystem::temp_directory_path() / "examini_test_config";
  std::filesystem::create_directories(dir);
  const json j{{"cfl", 0.25}, {"ranks", 2}};
  write_json(j, dir / "a.json");
  CHECK(load_json(dir / "a.json") == j);
  CHECK(ranks_from_json(j) == 2);
  CHECK(ranks_from_json(json::object()) == 1);
  CHECK_THROWS_AS(ranks_from_json(json{{"ranks", 0}}), ValidationError);
  CHECK_THROWS_AS(load_json(dir / "missing.json"), IoFailure);
  {
    std::ofstream os(dir / "bad.json");
    os << "{not json";
  }
  CHECK_THROWS_AS(load_json(dir / "bad.json"), ValidationError);
  std::filesystem::remove_all(dir);
}
