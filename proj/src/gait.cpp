#include "camp/gait.hpp"

#include <cmath>
#include <sstream>

namespace camp {

GaitId gait_from_name(const std::string& name) {
  if (name == "trot") return GaitId::Trot;
  if (name == "pace") return GaitId::Pace;
  if (name == "bound") return GaitId::Bound;
  if (name == "pronk") return GaitId::Pronk;
  throw ConfigError("unknown gait '" + name + "' (expected trot|pace|bound|pronk)");
}

GaitSpec default_gait_spec(GaitId gait, double frequency_hz) {
  GaitSpec s;
  s.gait_id = gait;
  s.frequency = frequency_hz;
  switch (gait) {
    case GaitId::Trot:
      s.duty_factor = 0.55;
      s.phase_offsets = {0.0, 0.5, 0.5, 0.0};
      break;
    case GaitId::Pace:
      s.duty_factor = 0.55;
      s.phase_offsets = {0.0, 0.5, 0.0, 0.5};
      break;
    case GaitId::Bound:
      s.duty_factor = 0.45;
      s.phase_offsets = {0.0, 0.0, 0.5, 0.5};
      break;
    case GaitId::Pronk:
      s.duty_factor = 0.40;
      s.phase_offsets = {0.0, 0.0, 0.0, 0.0};
      break;
  }
  // anchored stance: foot sweeps step_length during duty/f seconds
  s.command_velocity = Vec3(s.step_length * s.frequency / s.duty_factor, 0.0, 0.0);
  s.validate();
  return s;
}

std::vector<Skill> make_skill_catalog(const std::vector<GaitId>& gaits,
                                      const std::vector<double>& frequencies_hz) {
  if (gaits.empty() || frequencies_hz.empty()) throw ConfigError("empty gait or frequency list");
  std::vector<Skill> skills;
  for (GaitId g : gaits) {
    for (double f : frequencies_hz) {
      std::ostringstream name;
      name << gait_name(g) << "_" << f << "Hz";
      skills.push_back(Skill{name.str(), default_gait_spec(g, f)});
    }
  }
  return skills;
}

std::vector<Skill> default_skill_catalog() {
  return make_skill_catalog({GaitId::Trot, GaitId::Pace, GaitId::Bound, GaitId::Pronk}, {2.0, 4.0});
}

}  // namespace camp
