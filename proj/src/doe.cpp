#include "sdg/doe.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sdg/common.hpp"

namespace sdg {

namespace {

void require_distinct(const std::vector<double>& values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j)
      require(std::abs(values[i] - values[j]) > 1e-9, Errc::domain,
              std::string("duplicate level in ") + what);
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

void DOESpec::validate() const {
  require(!pass_angles_deg.empty() && !fail_angles_deg.empty() && !roughness_levels.empty() &&
              !power_levels.empty() && !background_ids.empty() && !exposure_levels.empty(),
          Errc::domain, "every DOE factor needs at least one level");
  require(images_per_config >= 1, Errc::domain, "images_per_config must be >= 1");
  require_distinct(pass_angles_deg, "pass angles");
  require_distinct(fail_angles_deg, "fail angles");
  require_distinct(roughness_levels, "roughness levels");
  require_distinct(power_levels, "power levels");
  require_distinct(exposure_levels, "exposure levels");
  for (double p : pass_angles_deg)
    for (double f : fail_angles_deg)
      require(std::abs(p - f) > 1e-9, Errc::domain,
              "pass/fail angle sets overlap at " + std::to_string(p) + " deg");
  for (double r : roughness_levels)
    require(r > 0.0 && r <= 1.0, Errc::domain, "roughness level out of (0,1]");
  for (double w : power_levels) require(w >= 0.0, Errc::domain, "light power must be non-negative");
  for (double e : exposure_levels) require(e > 0.0, Errc::domain, "exposure multiplier must be positive");
  require(std::set<int>(background_ids.begin(), background_ids.end()).size() == background_ids.size(),
          Errc::domain, "duplicate background id");
}

std::size_t DOESpec::plan_count() const {
  return (pass_angles_deg.size() + fail_angles_deg.size()) * roughness_levels.size() * power_levels.size() *
         background_ids.size() * exposure_levels.size() * static_cast<std::size_t>(images_per_config);
}

AngleClassSpec make_class_spec(const DOESpec& spec, double decision_threshold_deg) {
  AngleClassSpec cls;
  cls.pass_angles_deg = spec.pass_angles_deg;
  cls.fail_angles_deg = spec.fail_angles_deg;
  cls.decision_threshold_deg = decision_threshold_deg;
  cls.validate();
  return cls;
}

std::vector<PartConfig> enumerate_part_configs(const DOESpec& spec) {
  spec.validate();
  std::vector<PartConfig> configs;
  configs.reserve((spec.pass_angles_deg.size() + spec.fail_angles_deg.size()) * spec.roughness_levels.size() *
                  spec.power_levels.size());

  const auto roughness = sorted(spec.roughness_levels);
  const auto power = sorted(spec.power_levels);
  auto emit_class = [&](const std::vector<double>& angles, Label label) {
    for (double a : sorted(angles))
      for (double r : roughness)
        for (double w : power) {
          PartConfig c;
          c.config_id = static_cast<int>(configs.size());
          c.bend_angle_deg = a;
          c.roughness = r;
          c.power_watts = w;
          c.label = label;
          configs.push_back(c);
        }
  };
  emit_class(spec.pass_angles_deg, Label::pass);
  emit_class(spec.fail_angles_deg, Label::fail);
  return configs;
}

std::vector<CompositePlan> enumerate_composite_plans(const DOESpec& spec,
                                                     const std::vector<PartConfig>& configs) {
  spec.validate();
  std::vector<CompositePlan> plans;
  plans.reserve(configs.size() * spec.background_ids.size() * spec.exposure_levels.size() *
                static_cast<std::size_t>(spec.images_per_config));
  for (const PartConfig& config : configs)
    for (int bg : spec.background_ids)
      for (std::size_t ei = 0; ei < spec.exposure_levels.size(); ++ei)
        for (int rep = 0; rep < spec.images_per_config; ++rep) {
          CompositePlan plan;
          plan.plan_id = static_cast<int>(plans.size());
          plan.part = config;
          plan.background_id = bg;
          plan.exposure_index = static_cast<int>(ei);
          plan.exposure_level = spec.exposure_levels[ei];
          plan.replicate_index = rep;
          plan.derived_seed =
              plan_seed(spec.master_seed, config.config_id, bg, static_cast<int>(ei), rep);
          plans.push_back(plan);
        }
  return plans;
}

}  // namespace sdg
