#include <doctest.h>

#include <fstream>
#include <numbers>

#include "orthoshell/bench.hpp"
#include "orthoshell/config.hpp"
#include "orthoshell/run.hpp"

using namespace orthoshell;

namespace {

const char* kMinimal = R"(
[geometry]
generator = sheet
nx = 4
ny = 2
lx = 4
ly = 2

[material]
h = 0.1
E1 = 100
nu1 = 0.3

[phase]
prescribe = edge:right x 0.01
)";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  s.replace(p, from.size(), to);
  return s;
}

int error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config and defaults") {
  const RunConfig c = parse_config_text(kMinimal);
  CHECK(c.material.E2 == 100);
  CHECK(c.material.G12 == doctest::Approx(100 / 2.6));
  CHECK(c.material.rho == 1);
  CHECK(c.material.mode == ConstitutiveMode::Voigt);
  CHECK(c.phases.size() == 1);
  CHECK(c.phases[0].steps == 10);
  CHECK(c.solver.mode == "static");
  CHECK(c.solver.tol_rel == 1e-6);
  CHECK(c.output.metrics == "none");
  CHECK(c.notes.size() == 2);
  CHECK(c.fixes.empty());
}

TEST_CASE("nu2 is rejected with its line") {
  const std::string text = with(kMinimal, "nu1 = 0.3", "nu1 = 0.3\nnu2 = 0.3");
  CHECK(error_line(text) == 13);
  CHECK(error_text(text).find("E1 nu2 = E2 nu1") != std::string::npos);
}

TEST_CASE("syntax and key errors carry line numbers") {
  CHECK(error_line(with(kMinimal, "nx = 4", "nx = 4\nnz = 3")) == 5);
  CHECK(error_line(with(kMinimal, "nx = 4", "nx = 4\nnx = 5")) == 5);
  CHECK(error_line(with(kMinimal, "ny = 2", "ny = two")) == 5);
  CHECK(error_line(with(kMinimal, "[phase]", "[phases]")) == 14);
  CHECK(error_line(with(kMinimal, "lx = 4", "lx 4")) == 6);
  CHECK(error_line(with(kMinimal, "[geometry]", "[geometry")) == 2);
  CHECK(error_line("x = 1\n") == 1);
  CHECK(error_line(with(kMinimal, "E1 = 100", "E1 = -100")) > 0);
  CHECK(error_line(with(kMinimal, "prescribe = edge:right x 0.01", "prescribe = edge:front x 0.01")) == 15);
  CHECK(error_line(with(kMinimal, "prescribe = edge:right x 0.01", "prescribe = edge:right w 0.01")) == 15);
  CHECK(error_text(with(kMinimal, "h = 0.1\n", "")).find("'h'") != std::string::npos);
  CHECK(error_text(with(kMinimal, "[phase]\nprescribe = edge:right x 0.01", "")).find("[phase]") !=
        std::string::npos);
  // G12 has no default for unequal moduli
  CHECK(error_text(with(kMinimal, "E1 = 100", "E1 = 100\nE2 = 50")).find("G12") != std::string::npos);
  // d and alpha_degrees are exclusive
  CHECK(error_line(with(kMinimal, "nu1 = 0.3", "nu1 = 0.3\nd = 1 0 0\nalpha_degrees = 10")) == 14);
  // isotropic mode needs equal moduli; align = never only with isotropic
  CHECK(error_line(with(kMinimal, "nu1 = 0.3", "nu1 = 0.3\nE2 = 50\nG12 = 10\nconstitutive = isotropic")) > 0);
  CHECK(error_line(with(kMinimal, "nu1 = 0.3", "nu1 = 0.3\nalign = never")) == 13);
  // dynamic mode needs dt
  CHECK(error_text(with(kMinimal, "[phase]", "[solver]\nmode = dynamic\n\n[phase]")).find("dt") != std::string::npos);
  // metrics must match the generator
  CHECK(error_text(with(kMinimal, "[phase]", "[output]\nmetrics = hemisphere\n\n[phase]")).find("generator") !=
        std::string::npos);
}

TEST_CASE("presets reproduce the tabulated materials") {
  for (const auto& row : hemisphere_table()) {
    char name[32];
    std::snprintf(name, sizeof name, "hemisphere-%.1f", row.lambda);
    const MaterialConfig m = material_preset(name);
    CHECK(m.E1 == row.E_m);
    CHECK(m.E2 == 6.825e7);
    CHECK(m.G12 == row.G);
    CHECK(m.h == 0.04);
    CHECK(m.nu1 * m.E2 / m.E1 == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(m.d == Vec3::UnitZ());
  }
  const MaterialConfig wi = material_preset("wrinkle-iso");
  CHECK(wi.E1 == 600);
  CHECK(wi.nu1 == 0.45);
  CHECK(wi.h == 0.2);
  const MaterialConfig wo = material_preset("wrinkle-ortho");
  CHECK(wo.E1 == 106.6);
  CHECK(wo.E2 == 106.6);
  CHECK(wo.nu1 == 0.22);
  CHECK(wo.G12 == 11.3);
  CHECK(*wo.alpha_degrees == 30);
  CHECK_THROWS_AS(material_preset("steel"), ConfigError);
  for (const auto& n : material_preset_names()) CHECK_NOTHROW(material_preset(n).to_material().validate());
}

TEST_CASE("alpha_degrees convention") {
  MaterialConfig m = material_preset("wrinkle-ortho");
  const Vec3 d = m.to_material().d;
  const double a = 30 * std::numbers::pi / 180;
  CHECK((d - Vec3(-std::sin(a), std::cos(a), 0)).norm() < 1e-15);
  m.alpha_degrees = 90;
  CHECK((m.to_material().d - Vec3(-1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("serialization round trip") {
  for (const RunConfig& c : {parse_config_text(kMinimal), hemisphere_config({}), wrinkle_config({})}) {
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config_text(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
  }
  HemisphereCase hc;
  hc.lambda = 0.1;
  const RunConfig h = hemisphere_config(hc);
  CHECK(parse_config_text(serialize_config(h)).material.nu1 == h.material.nu1);
}

TEST_CASE("selectors") {
  const ControlMesh sheet = gen_rect_sheet(4, 2, 4, 2);
  auto sel = [&](const std::string& t) { return resolve_selector({t, 0}, sheet); };
  CHECK(sel("all").size() == 15);
  CHECK(sel("boundary").size() == 12);
  CHECK(sel("edge:bottom") == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(sel("edge:top") == std::vector<int>{10, 11, 12, 13, 14});
  CHECK(sel("edge:left") == std::vector<int>{0, 5, 10});
  CHECK(sel("edge:right") == std::vector<int>{4, 9, 14});
  CHECK(sel("node:7") == std::vector<int>{7});
  CHECK(sel("nearest:2.9,1.2,0") == std::vector<int>{8});
  CHECK_THROWS_AS(sel("node:99"), ConfigError);
  CHECK_THROWS_AS(sel("nearest:1,2"), ConfigError);
  const ControlMesh hemi = gen_hemisphere(4, 16, 10, 18);
  CHECK(resolve_selector({"edge:equator", 0}, hemi).size() == 16);
  CHECK(resolve_selector({"edge:rim", 0}, hemi).size() == 16);
}

TEST_CASE("config files and mesh paths") {
  const auto dir = std::filesystem::temp_directory_path() / "orthoshell_config_test";
  std::filesystem::create_directories(dir);
  std::filesystem::copy_file(std::string(TEST_DATA_DIR) + "/icosphere.off", dir / "sphere.off",
                             std::filesystem::copy_options::overwrite_existing);
  {
    std::ofstream out(dir / "run.cfg");
    out << "[geometry]\ngenerator = file\npath = sphere.off\n\n[material]\nh = 0.01\nE1 = 1\nnu1 = 0.3\n\n"
           "[phase]\nload = node:0 0 0 1\n";
  }
  const RunConfig c = parse_config(dir / "run.cfg");
  CHECK(build_mesh(c.geometry, c.base_dir).node_count() == 42);
  CHECK_THROWS_AS(parse_config(dir / "missing.cfg"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("documented example configs parse") {
  for (const char* name : {"hemisphere.cfg", "wrinkle.cfg"}) {
    CAPTURE(name);
    const RunConfig c = parse_config(std::filesystem::path(DOCS_DIR) / "examples" / name);
    CHECK(!c.phases.empty());
  }
  const RunConfig h = parse_config(std::filesystem::path(DOCS_DIR) / "examples" / "hemisphere.cfg");
  CHECK(h.output.metrics == "hemisphere");
  const RunConfig w = parse_config(std::filesystem::path(DOCS_DIR) / "examples" / "wrinkle.cfg");
  CHECK(w.output.metrics == "wrinkle");
}
