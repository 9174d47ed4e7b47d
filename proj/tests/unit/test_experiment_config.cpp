#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "ca43/experiment_config.hpp"

namespace {

using namespace ca43;

ExperimentConfig from_text(const std::string& text) { return experiment_config_from(KeyValueFile::parse(text)); }

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("ca43_cfg_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

TEST(ExperimentConfig, PresetsAreListedAndDescribed) {
  const auto& names = preset_names();
  ASSERT_EQ(names.size(), 7u);
  for (const auto& n : names) {
    EXPECT_FALSE(preset_description(n).empty()) << n;
    const auto c = preset_config(n);
    EXPECT_EQ(c.preset, n);
    EXPECT_NO_THROW(c.validate()) << n;
  }
  EXPECT_THROW(preset_description("bell_quantum"), UnknownPresetError);
  EXPECT_THROW(preset_config("nope"), UnknownPresetError);
  EXPECT_THROW(from_text("[experiment]\npreset = nope\n"), UsageError);
}

TEST(ExperimentConfig, PresetDefaults) {
  EXPECT_EQ(preset_config("bell_optical").qubit, QubitKind::optical);
  EXPECT_EQ(preset_config("bell_hyperfine").qubit, QubitKind::hyperfine);
  EXPECT_EQ(preset_config("bell_optical").shots, 4000);
  EXPECT_FALSE(preset_config("decay_optical").wait_times.empty());
  EXPECT_FALSE(preset_config("decay_hyperfine").wait_times.empty());
  EXPECT_GT(preset_config("decay_hyperfine").wait_times.back(), preset_config("decay_optical").wait_times.back());
}

TEST(ExperimentConfig, FileKeysOverridePreset) {
  const auto c = from_text(
      "[experiment]\npreset = bell_optical\nfield = 5.5\nshots = 123\nseed = 77\nqubit = hyperfine\n"
      "[gate]\ndetuning = 12.5\nnbar = 0.1\n"
      "[decay]\nwait_times = 0, 1.5, 3\n"
      "[clock]\nlower = S(4,1)\nupper = S(3,2)\n");
  EXPECT_DOUBLE_EQ(c.field, 5.5);
  EXPECT_EQ(c.shots, 123);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.qubit, QubitKind::hyperfine);
  EXPECT_DOUBLE_EQ(c.gate_detuning, 12.5);
  EXPECT_DOUBLE_EQ(c.nbar, 0.1);
  EXPECT_EQ(c.wait_times, (std::vector<double>{0.0, 1.5, 3.0}));
  EXPECT_EQ(c.clock_lower, (LevelLabel{Manifold::S12, 4, 1}));
  EXPECT_EQ(c.clock_upper, (LevelLabel{Manifold::S12, 3, 2}));
  // The override wins over the preset named in the file.
  const auto o = experiment_config_from(KeyValueFile::parse("[experiment]\npreset = bell_optical\n"), "clock_point");
  EXPECT_EQ(o.preset, "clock_point");
}

TEST(ExperimentConfig, RejectsUnknownKeysAndMissingPreset) {
  EXPECT_THROW(from_text("[experiment]\npreset = bell_optical\nfeild = 6\n"), ConfigError);
  EXPECT_THROW(from_text("[gate]\ndetuning = 10\n"), ConfigError);
  EXPECT_THROW(from_text("[experiment]\npreset = bell_optical\nseed = -2\n"), ConfigError);
  EXPECT_THROW(from_text("[experiment]\npreset = bell_optical\nqubit = qutrit\n"), ConfigError);
  EXPECT_THROW(from_text("[experiment]\npreset = bell_optical\n[noise]\nb_field_rms = 1e-5\n"), ConfigError);
  EXPECT_NO_THROW(from_text("[experiment]\npreset = bell_optical\n[noise]\ncalibrate = false\nb_field_rms = 1e-5\n"));
}

TEST(ExperimentConfig, ValidationRanges) {
  const char* bad[] = {
      "[experiment]\npreset = bell_optical\nfield = -1\n",
      "[experiment]\npreset = bell_optical\nshots = 0\n",
      "[experiment]\npreset = bell_optical\nphases = 2\n",
      "[experiment]\npreset = bell_optical\nimpurity_target = 1\n",
      "[experiment]\npreset = bell_optical\n[errors]\nms1 = 0.6\n",
      "[experiment]\npreset = bell_optical\n[errors]\npmt_fidelity = 0\n",
      "[experiment]\npreset = bell_optical\n[gate]\ndetuning = 0\n",
      "[experiment]\npreset = bell_optical\n[noise]\nt_half_optical = 0\n",
      "[experiment]\npreset = clock_point\n[clock]\nlo = 10\nhi = 5\n",
      "[experiment]\npreset = decay_optical\n[decay]\nwait_times = 1, -2\n",
      "[experiment]\npreset = spectrum_report\n[spectrum]\nspan = 0\n",
      "[experiment]\npreset = spectrum_report\n[levels]\nfield_points = 3\nmin_field = 8\n",
  };
  for (const char* text : bad) EXPECT_THROW(from_text(text), ConfigError) << text;
}

TEST(ExperimentConfig, LevelLabels) {
  EXPECT_EQ(parse_level_label("S(4,0)"), (LevelLabel{Manifold::S12, 4, 0}));
  EXPECT_EQ(parse_level_label(" D(6, -1) "), (LevelLabel{Manifold::D52, 6, -1}));
  for (const char* t : {"S4,0", "S(4,0", "S(4;0)", "S(4,0)x", "S(a,0)", "S(3,4)", "X(4,0)", "S(,0)"})
    EXPECT_THROW(parse_level_label(t), ConfigError) << t;
}

TEST(ExperimentConfig, NumberLists) {
  EXPECT_EQ(parse_number_list("1"), (std::vector<double>{1.0}));
  EXPECT_EQ(parse_number_list(" 0.5, 2 ,1e1"), (std::vector<double>{0.5, 2.0, 10.0}));
  for (const char* t : {"", "1,,2", "1,", "1, x", "2.5.1"}) EXPECT_THROW(parse_number_list(t), ConfigError) << t;
  EXPECT_EQ(parse_qubit_kind(to_string(QubitKind::hyperfine)), QubitKind::hyperfine);
}

TEST(ExperimentConfig, DerivedQuantities) {
  const auto c = preset_config("bell_optical");
  const auto g = c.beam_geometry();
  const auto ref = BeamGeometry::beam1();
  EXPECT_NEAR(g.impurity, calibrate_impurity(c.species, named::down, named::upsilon, ref, c.field, 38.0), 1e-15);
  EXPECT_GT(g.impurity, 0.0);
  auto fixed = c;
  fixed.impurity = 0.01;
  EXPECT_DOUBLE_EQ(fixed.beam_geometry().impurity, 0.01);

  const auto m = c.motional_mode();
  EXPECT_NEAR(m.lamb_dicke_eta, lamb_dicke_com(729.347, c.species.mass_amu, 1.2, ref.angle_k_to_axis), 1e-15);
  auto explicit_eta = c;
  explicit_eta.lamb_dicke_eta = 0.05;
  EXPECT_DOUBLE_EQ(explicit_eta.motional_mode().lamb_dicke_eta, 0.05);

  const auto n = c.resolved_noise();
  EXPECT_NEAR(analytic_t_half(n, qubit_couplings(c.species, optical_qubit(), c.field)), c.t_half_optical, 1e-9);
  EXPECT_NEAR(analytic_t_half(n, qubit_couplings(c.species, hyperfine_qubit(), c.field)), c.t_half_hyperfine, 1e-9);
  auto raw = c;
  raw.calibrate_noise = false;
  EXPECT_EQ(raw.resolved_noise().b_field_rms, raw.noise.b_field_rms);

  EXPECT_EQ(c.optical_upper(), named::upsilon);
  auto b2 = c;
  b2.beam = BeamId::beam2;
  EXPECT_EQ(b2.optical_upper(), named::upsilon_prime);
}

TEST(ExperimentConfig, SpeciesPathIsRelativeToConfigFile) {
  TempDir dir;
  std::ifstream src(std::string(CA43_DATA_DIR) + "/ca43.species");
  ASSERT_TRUE(src.good());
  std::string species((std::istreambuf_iterator<char>(src)), std::istreambuf_iterator<char>());
  const auto pos = species.find("d_lifetime = 1.2");
  ASSERT_NE(pos, std::string::npos);
  species.replace(pos, 16, "d_lifetime = 1.1");
  dir.write("data/alt.species", species);
  const auto cfg = dir.write("cfg.ini", "[experiment]\npreset = bell_optical\nspecies = data/alt.species\n");
  const auto c = load_experiment_config(cfg);
  EXPECT_DOUBLE_EQ(c.species.d_lifetime, 1.1);
  EXPECT_DOUBLE_EQ(c.detection.d_decay_lifetime, 1.1);
  EXPECT_EQ(c.source, cfg.string());

  dir.write("bad.ini", "[experiment]\npreset = bell_optical\nspecies = data/missing.species\n");
  EXPECT_THROW(load_experiment_config(dir.path() / "bad.ini"), ConfigError);
  EXPECT_THROW(load_experiment_config(dir.path() / "absent.ini"), ConfigError);
}

TEST(ExperimentConfig, ShippedConfigsLoad) {
  int count = 0;
  for (const auto& e : std::filesystem::directory_iterator(CA43_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    ++count;
    const auto c = load_experiment_config(e.path());
    EXPECT_EQ(c.preset, e.path().stem().string());
  }
  EXPECT_EQ(count, static_cast<int>(preset_names().size()));
}

}  // namespace
