#pragma once

#include <cstdint>
#include <vector>

#include "sdg/geometry.hpp"
#include "sdg/rng.hpp"

namespace sdg {

// Full factorial domain-randomization design: per class, bend angle x
// roughness x light power; crossed with background x exposure x replicate
// at composite time. Defaults give 72 part configurations and 12,960 plans.
struct DOESpec {
  std::vector<double> pass_angles_deg{15.0, 20.0, 25.0, 30.0};
  std::vector<double> fail_angles_deg{-5.0, 0.0, 5.0, 10.0};
  std::vector<double> roughness_levels{0.2, 0.4, 0.6};
  std::vector<double> power_levels{5.0, 10.0, 15.0};
  std::vector<int> background_ids{0, 1, 2};
  std::vector<double> exposure_levels{0.8, 1.0, 1.2};
  int images_per_config = 20;
  std::uint64_t master_seed = 20260501ull;

  void validate() const;
  std::size_t plan_count() const;
};

struct PartConfig {
  int config_id = 0;
  double bend_angle_deg = 0.0;
  double roughness = 0.4;
  double power_watts = 10.0;
  Label label = Label::pass;
};

struct CompositePlan {
  int plan_id = 0;
  PartConfig part;
  int background_id = 0;
  int exposure_index = 0;
  double exposure_level = 1.0;
  int replicate_index = 0;
  std::uint64_t derived_seed = 0;
};

AngleClassSpec make_class_spec(const DOESpec& spec, double decision_threshold_deg = 12.5);

// Cartesian product per class in lexicographic (angle, roughness, power)
// order, pass block before fail block. config_id is the position.
std::vector<PartConfig> enumerate_part_configs(const DOESpec& spec);

// configs x backgrounds x exposures x replicates, in that nesting order.
// derived_seed is a pure function of (master_seed, config_id, background_id,
// exposure_index, replicate_index).
std::vector<CompositePlan> enumerate_composite_plans(const DOESpec& spec,
                                                     const std::vector<PartConfig>& configs);

inline std::uint64_t plan_seed(std::uint64_t master_seed, int config_id, int background_id,
                               int exposure_index, int replicate_index) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(config_id), static_cast<std::uint64_t>(background_id),
                                   static_cast<std::uint64_t>(exposure_index),
                                   static_cast<std::uint64_t>(replicate_index)});
}

}  // namespace sdg
