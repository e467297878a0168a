#pragma once

#include "camp/errors.hpp"
#include "camp/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace camp {

enum class GaitId : int { Trot = 0, Pace = 1, Bound = 2, Pronk = 3 };

inline const char* gait_name(GaitId g) {
  switch (g) {
    case GaitId::Trot: return "trot";
    case GaitId::Pace: return "pace";
    case GaitId::Bound: return "bound";
    case GaitId::Pronk: return "pronk";
  }
  return "?";
}

GaitId gait_from_name(const std::string& name);

// One periodic gait pattern. Phase offsets are per leg (FL, FR, RL, RR) in
// cycle fractions [0,1); a leg is in stance while frac(f*t + offset) < duty.
struct GaitSpec {
  GaitId gait_id = GaitId::Trot;
  double frequency = 2.0;      // cycles/s
  double duty_factor = 0.55;   // stance fraction, in (0,1)
  std::array<double, kNumLegs> phase_offsets{0.0, 0.5, 0.5, 0.0};
  double step_length = 0.12;   // m, stride per cycle at the default velocity
  double step_height = 0.06;   // m, swing apex
  double body_height = 0.30;   // m
  Vec3 command_velocity{0.0, 0.0, 0.0};  // (vx, vy, wz) body frame

  void validate() const {
    if (!(duty_factor > 0.0 && duty_factor < 1.0)) throw ConfigError("duty_factor must be in (0,1)");
    if (!(frequency > 0.0)) throw ConfigError("frequency must be > 0");
    if (!(step_height > 0.0)) throw ConfigError("step_height must be > 0");
    for (double p : phase_offsets) {
      if (p < 0.0 || p >= 1.0) throw ConfigError("phase offsets must lie in [0,1)");
    }
  }
};

// Standard quadruped footfall patterns; forward velocity chosen so stance feet
// stay anchored to the ground (v = step_length * f / duty).
GaitSpec default_gait_spec(GaitId gait, double frequency_hz);

// A named skill: (gait, frequency) pair. The index of a skill in a catalog is
// its integer label everywhere (clip store, discriminators, one-hot commands).
struct Skill {
  std::string name;
  GaitSpec spec;
};

// Builds skills for the cross product gaits x frequencies, gait-major, named
// e.g. "trot_2Hz".
std::vector<Skill> make_skill_catalog(const std::vector<GaitId>& gaits,
                                      const std::vector<double>& frequencies_hz);

// The eight default skills: {trot,pace,bound,pronk} x {2Hz,4Hz}.
std::vector<Skill> default_skill_catalog();

}  // namespace camp
