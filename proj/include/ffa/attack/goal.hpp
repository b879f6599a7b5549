#pragma once

#include <cstddef>
#include <string>

namespace ffa::attack {

enum class GoalMode { targeted, untargeted };

// Targeted: the attacked sample must be classified as `target_class`.
// Untargeted: it must be classified as anything but `attack_class`.
struct AttackGoal {
  GoalMode mode = GoalMode::targeted;
  int attack_class = 1;
  int target_class = 0;

  static AttackGoal targeted(int attack_class, int target_class) {
    return {GoalMode::targeted, attack_class, target_class};
  }
  static AttackGoal untargeted(int attack_class) {
    return {GoalMode::untargeted, attack_class, -1};
  }

  // Throws ConfigError for a targeted goal with target == attack class or
  // classes outside [0, class_count).
  void validate(std::size_t class_count) const;
  bool fooled(int predicted_class) const {
    return mode == GoalMode::targeted ? predicted_class == target_class
                                      : predicted_class != attack_class;
  }
  std::string describe() const;
};

// Constraint set for an attack: at most `max_changed` features changed
// (a count when >= 1, a fraction of the dimension when in (0,1)), every
// |delta_i| <= max_amplitude, entries with |delta_i| <= dead_zone count as
// unchanged.
struct AttackConstraints {
  double max_changed = 0.075;
  double max_amplitude = 1.0;
  double dead_zone = 1e-6;
  // Keep only the max_changed largest |delta_i| per sample at evaluation.
  bool truncate_top_k = false;

  void validate() const;
  std::size_t max_changed_count(std::size_t dimension) const;
};

}  // namespace ffa::attack
