#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rfob/config.hpp"
#include "rfob/csv.hpp"

using namespace rfob;

namespace {

const char* kMinimal = R"([plant]
mass_kg = 2
thrust_N_per_A = 0.5

[environment]
damping_Ns_per_m = 1
stiffness_N_per_m = 100

[dob]
nominal_mass_kg = 2
nominal_thrust_N_per_A = 0.5
bandwidth_rad_s = 100
velocity_cutoff_rad_s = 1000

[rfob]
mass_kg = 2
thrust_N_per_A = 0.5
bandwidth_rad_s = 100

[scenario]
dt_s = 1e-4
force_gain = 1

[phase2]
kind = position
duration_s = 0.2

[phase10]
kind = force
duration_s = 0.3

[phase1]
kind = force
duration_s = 0.1
offset = 4
)";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST(Config, ParsesTypedScenario) {
  const auto sc = scenario_from(ConfigDocument::parse(kMinimal));
  EXPECT_EQ(sc.plant.M_m, 2.0);
  EXPECT_EQ(sc.env.K_env, 100.0);
  EXPECT_EQ(sc.contact_model, ContactModel::Unilateral);
  EXPECT_EQ(sc.adaptation, Adaptation::Off);
  EXPECT_EQ(sc.identify.cap_factor, IdentifyConfig{}.cap_factor);
}

TEST(Config, PhasesRunInNumericOrder) {
  const auto sc = scenario_from(ConfigDocument::parse(kMinimal));
  ASSERT_EQ(sc.phases.size(), 3u);
  EXPECT_EQ(sc.phases[0].duration, 0.1);
  EXPECT_EQ(sc.phases[0].ref.offset, 4.0);
  EXPECT_EQ(sc.phases[1].kind, PhaseKind::Position);
  EXPECT_EQ(sc.phases[2].duration, 0.3);
}

TEST(Config, SerializeRoundTrip) {
  const auto doc = ConfigDocument::parse(kMinimal);
  const auto again = ConfigDocument::parse(doc.serialize());
  EXPECT_EQ(doc, again);
  const auto a = scenario_from(doc), b = scenario_from(again);
  EXPECT_EQ(a.duration(), b.duration());
  EXPECT_EQ(a.C_f, b.C_f);
}

TEST(Config, EveryFixtureRoundTrips) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(RFOB_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    const auto doc = ConfigDocument::load(entry.path());
    EXPECT_EQ(doc, ConfigDocument::parse(doc.serialize())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 10);
}

TEST(Config, RejectsUnknownKeysAndSections) {
  std::string text = kMinimal;
  EXPECT_THROW(ConfigDocument::parse(text + "\n[plant2]\nmass_kg = 1\n"), ConfigError);
  text.replace(text.find("mass_kg = 2"), 11, "mass = 2");
  EXPECT_THROW(ConfigDocument::parse(text), ConfigError);
  EXPECT_THROW(ConfigDocument::parse("[phase0]\nkind = force\n"), ConfigError);
  EXPECT_THROW(ConfigDocument::parse("mass_kg = 1\n"), ConfigError);
}

TEST(Config, SetChecksTheSchema) {
  auto doc = ConfigDocument::parse(kMinimal);
  doc.set("environment", "stiffness_N_per_m", "250");
  EXPECT_EQ(scenario_from(doc).env.K_env, 250.0);
  EXPECT_THROW(doc.set("environment", "stiffness", "1"), ConfigError);
}

TEST(Config, ReportsMissingAndMalformedValues) {
  std::string text = kMinimal;
  text.erase(text.find("force_gain = 1"), 14);
  EXPECT_THROW(scenario_from(ConfigDocument::parse(text)), ConfigError);

  std::string bad = kMinimal;
  bad.replace(bad.find("dt_s = 1e-4"), 11, "dt_s = fast");
  EXPECT_THROW(scenario_from(ConfigDocument::parse(bad)), ConfigError);

  std::string adapt = std::string(kMinimal) + "";
  adapt.replace(adapt.find("force_gain = 1"), 14, "force_gain = 1\nadaptation = sometimes");
  EXPECT_THROW(scenario_from(ConfigDocument::parse(adapt)), ConfigError);
}

TEST(Config, ScenarioValidationBecomesConfigError) {
  std::string text = kMinimal;
  text.replace(text.find("dt_s = 1e-4"), 11, "dt_s = 1e-2");
  EXPECT_THROW(scenario_from(ConfigDocument::parse(text)), ConfigError);
}

TEST(Config, EmptyEnvironmentIsRejectedForDesign) {
  EXPECT_THROW(design_inputs_from(ConfigDocument::load(std::string(RFOB_CONFIG_DIR) +
                                                       "/design_empty_env.ini")),
               ConfigError);
}

TEST(Csv, HeaderAndRowsHaveMatchingWidth) {
  auto sc = scenario_from(ConfigDocument::parse(kMinimal));
  sc.phases.resize(1);
  sc.phases[0].duration = 0.001;
  const auto res = run(sc);
  std::ostringstream os;
  write_csv(os, res.rows);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  ASSERT_EQ(header.size(), kCsvColumns.size());
  for (std::size_t i = 0; i < header.size(); ++i) EXPECT_EQ(header[i], kCsvColumns[i]);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(split(line).size(), kCsvColumns.size());
    ++rows;
  }
  EXPECT_EQ(rows, res.rows.size());
}

TEST(Csv, ColumnNamesAreUnique) {
  std::vector<std::string_view> names(kCsvColumns.begin(), kCsvColumns.end());
  std::sort(names.begin(), names.end());
  EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());
}

TEST(Csv, IdentifyTraceIsASubsetOfTheFullSchema) {
  for (auto name : kIdentifyCsvColumns)
    EXPECT_NE(std::find(kCsvColumns.begin(), kCsvColumns.end(), name), kCsvColumns.end()) << name;
  std::ostringstream os;
  write_identify_csv(os, {Row{}});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(split(line).size(), kIdentifyCsvColumns.size());
}
