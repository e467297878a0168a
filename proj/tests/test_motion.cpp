#include "camp/errors.hpp"
#include "camp/motion.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace camp;

namespace {

bool frames_equal(const MotionFrame& a, const MotionFrame& b) {
  return a.body_position == b.body_position &&
         a.body_orientation.coeffs() == b.body_orientation.coeffs() &&
         a.joint_positions == b.joint_positions && a.joint_velocities == b.joint_velocities &&
         a.foot_positions == b.foot_positions && a.foot_velocities == b.foot_velocities;
}

}  // namespace

TEST_SUITE("motion") {

TEST_CASE("trot clip at 2 Hz: 201 frames, periodic joints one cycle apart") {
  const GaitSpec spec = default_gait_spec(GaitId::Trot, 2.0);
  const MotionClip clip = generate_clip(spec, 4.0, 0.02);
  REQUIRE(clip.frames.size() == 201);
  const int cycle = 25;  // 0.5 s at 50 Hz
  for (std::size_t k = 0; k + cycle < clip.frames.size(); k += 7) {
    const JointVec diff =
        clip.frames[k].joint_positions - clip.frames[k + cycle].joint_positions;
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("pronk keeps all four legs in phase") {
  const GaitSpec spec = default_gait_spec(GaitId::Pronk, 2.0);
  const MotionClip clip = generate_clip(spec, 4.0, 0.02);
  for (const MotionFrame& fr : clip.frames) {
    // identical world foot heights imply identical contact states
    const double z0 = fr.foot_positions(0, 2);
    for (int leg = 1; leg < kNumLegs; ++leg) {
      CHECK(std::abs(fr.foot_positions(leg, 2) - z0) < 1e-12);
    }
  }
}

TEST_CASE("zero command velocity keeps the body stationary") {
  GaitSpec spec = default_gait_spec(GaitId::Trot, 2.0);
  spec.command_velocity.setZero();
  spec.step_length = 0.0;
  const MotionClip clip = generate_clip(spec, 2.0, 0.02);
  for (const MotionFrame& fr : clip.frames) {
    CHECK((fr.body_position - clip.frames[0].body_position).norm() < 1e-12);
  }
}

TEST_CASE("stance feet sit on the ground plane and oppose the body velocity") {
  const GaitSpec spec = default_gait_spec(GaitId::Trot, 2.0);
  const MotionClip clip = generate_clip(spec, 4.0, 0.02);
  int stance_checked = 0;
  for (std::size_t k = 0; k < clip.frames.size(); ++k) {
    const double t = double(k) * clip.dt;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double phi = wrap_unit(spec.frequency * t + spec.phase_offsets[std::size_t(leg)]);
      if (phi < spec.duty_factor) {
        const double world_z =
            clip.frames[k].body_position.z() + clip.frames[k].foot_positions(leg, 2);
        CHECK(std::abs(world_z) < 1e-9);
        // interior stance: body-frame foot velocity cancels the body velocity
        if (phi > 0.1 && phi < spec.duty_factor - 0.1 && k > 0 && k + 1 < clip.frames.size()) {
          const Vec3 v = clip.frames[k].foot_velocities.row(leg).transpose();
          CHECK((v + spec.command_velocity).norm() < 1e-6);
          ++stance_checked;
        }
      }
    }
  }
  CHECK(stance_checked > 100);
}

TEST_CASE("swing apex reaches exactly step_height") {
  // dt chosen so the FL apex phase 0.775 falls on the sample grid
  const GaitSpec spec = default_gait_spec(GaitId::Trot, 2.0);
  const double t_apex = (spec.duty_factor + 0.5 * (1.0 - spec.duty_factor)) / spec.frequency;
  const double dt = t_apex / 31.0;
  const MotionClip clip = generate_clip(spec, 1.0, dt);
  const double world_z = clip.frames[31].body_position.z() + clip.frames[31].foot_positions(0, 2);
  CHECK(world_z == doctest::Approx(spec.step_height).epsilon(1e-6));
}

TEST_CASE("generate_clip validates its inputs") {
  GaitSpec spec = default_gait_spec(GaitId::Trot, 2.0);
  CHECK_THROWS_AS(generate_clip(spec, 4.0, 0.0), ConfigError);
  CHECK_THROWS_AS(generate_clip(spec, 0.1, 0.02), ConfigError);
  spec.step_length = 1.5;  // far outside leg reach
  spec.command_velocity.x() = spec.step_length * spec.frequency / spec.duty_factor;
  CHECK_THROWS_AS(generate_clip(spec, 4.0, 0.02), UnreachableTargetError);
}

TEST_CASE("amp feature flattening is 43-dimensional and invertible") {
  AmpFeature f;
  for (int i = 0; i < 12; ++i) {
    f.joint_positions(i) = i;
    f.joint_velocities(i) = 100 + i;
    f.foot_positions(i) = 200 + i;
  }
  f.base_linear_velocity = Vec3(1, 2, 3);
  f.base_angular_velocity = Vec3(4, 5, 6);
  f.base_height = 7;
  const auto v = f.flatten();
  REQUIRE(v.size() == 43);
  CHECK(v(0) == 0);
  CHECK(v(12) == 100);
  CHECK(v(24) == 1);
  CHECK(v(27) == 4);
  CHECK(v(30) == 7);
  CHECK(v(31) == 200);
  const AmpFeature g = AmpFeature::unflatten(v);
  CHECK((g.flatten() - v).norm() == 0.0);
}

TEST_CASE("extract_amp_feature: static, identity-motion and yawed-motion cases") {
  MotionFrame prev, cur;
  prev.body_position = Vec3(0, 0, 0.3);
  cur = prev;
  const double dt = 0.02;

  SUBCASE("identical consecutive frames give zero velocities") {
    const AmpFeature f = extract_amp_feature(cur, prev, dt);
    CHECK(f.base_linear_velocity.norm() == 0.0);
    CHECK(f.base_angular_velocity.norm() == 0.0);
    CHECK(f.base_height == doctest::Approx(0.3));
  }

  SUBCASE("motion at (1,0,0) with identity orientation") {
    cur.body_position = prev.body_position + dt * Vec3(1, 0, 0);
    const AmpFeature f = extract_amp_feature(cur, prev, dt);
    CHECK((f.base_linear_velocity - Vec3(1, 0, 0)).norm() < 1e-12);
  }

  SUBCASE("motion at (1,0,0) with 90-degree yaw maps to (0,-1,0) body frame") {
    cur.body_position = prev.body_position + dt * Vec3(1, 0, 0);
    prev.body_orientation = Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()));
    cur.body_orientation = prev.body_orientation;
    const AmpFeature f = extract_amp_feature(cur, prev, dt);
    CHECK((f.base_linear_velocity - Vec3(0, -1, 0)).norm() < 1e-12);
  }

  SUBCASE("pure yaw rotation appears in the angular velocity") {
    const double wz = 0.7;
    cur.body_orientation = Quat(Eigen::AngleAxisd(wz * dt, Vec3::UnitZ()));
    const AmpFeature f = extract_amp_feature(cur, prev, dt);
    CHECK(f.base_angular_velocity.z() == doctest::Approx(wz).epsilon(1e-9));
  }
}

TEST_CASE("preload_transitions counts and labels pairs per clip") {
  const MotionClip trot = generate_clip(default_gait_spec(GaitId::Trot, 2.0), 4.0, 0.02, 3);
  Rng rng(1);

  SUBCASE("single clip") {
    const TransitionBuffer buf = preload_transitions({trot}, 100, rng);
    CHECK(buf.size() == 100);
    for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf.pair(i).label == 3);
  }

  SUBCASE("eight skills, 500 pairs each") {
    std::vector<MotionClip> clips;
    const auto catalog = default_skill_catalog();
    for (std::size_t label = 0; label < catalog.size(); ++label) {
      clips.push_back(generate_clip(catalog[label].spec, 4.0, 0.02, int(label)));
    }
    const TransitionBuffer buf = preload_transitions(clips, 500, rng);
    CHECK(buf.size() == 4000);
    for (int label = 0; label < 8; ++label) {
      CHECK(buf.indices_for_label(label).size() == 500);
    }
  }

  SUBCASE("fixed seed gives identical buffers") {
    Rng r1(7), r2(7);
    const TransitionBuffer a = preload_transitions({trot}, 50, r1);
    const TransitionBuffer b = preload_transitions({trot}, 50, r2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK((a.pair(i).s_t.flatten() - b.pair(i).s_t.flatten()).norm() == 0.0);
      CHECK((a.pair(i).s_next.flatten() - b.pair(i).s_next.flatten()).norm() == 0.0);
    }
  }

  SUBCASE("empty clip list is an error") {
    CHECK_THROWS_AS(preload_transitions({}, 10, rng), DataError);
  }
}

TEST_CASE("sample_expert: filters, uniformity, edge cases") {
  std::vector<MotionClip> clips;
  const auto catalog = default_skill_catalog();
  for (std::size_t label = 0; label < catalog.size(); ++label) {
    clips.push_back(generate_clip(catalog[label].spec, 4.0, 0.02, int(label)));
  }
  Rng rng(5);
  const TransitionBuffer buf = preload_transitions(clips, 200, rng);

  SUBCASE("label filter returns only that label") {
    const auto batch = buf.sample(16, 0, rng);
    CHECK(batch.size() == 16);
    for (const auto& p : batch) CHECK(p.label == 0);
  }

  SUBCASE("draws over the whole buffer are uniform within 2 percent of 1/8") {
    std::array<int, 8> counts{};
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
      counts[std::size_t(buf.sample(1, std::nullopt, rng)[0].label)]++;
    }
    for (int label = 0; label < 8; ++label) {
      const double freq = double(counts[std::size_t(label)]) / double(n);
      CHECK(freq == doctest::Approx(0.125).epsilon(0.02));
    }
  }

  SUBCASE("single-pair buffer returns that pair") {
    const MotionClip two = generate_clip(default_gait_spec(GaitId::Pace, 2.0), 0.5, 0.02, 9);
    Rng r(1);
    const TransitionBuffer single = preload_transitions({two}, 1, r);
    REQUIRE(single.size() == 1);
    const auto batch = single.sample(1, std::nullopt, r);
    CHECK(batch[0].label == 9);
  }

  SUBCASE("filter matching zero pairs is an error") {
    CHECK_THROWS_AS(buf.sample(4, 99, rng), DataError);
  }
  SUBCASE("empty buffer draw is an error") {
    TransitionBuffer empty;
    CHECK_THROWS_AS(empty.sample(1, std::nullopt, rng), DataError);
  }
}

TEST_CASE("clip store round-trips bit-exactly") {
  const MotionClip clip = generate_clip(default_gait_spec(GaitId::Bound, 4.0), 4.0, 0.02, 5);
  const auto path = std::filesystem::temp_directory_path() / "camp_test_clip.clip";
  write_clip(path, clip);
  const MotionClip loaded = read_clip(path);
  CHECK(loaded.label == 5);
  CHECK(loaded.dt == clip.dt);
  REQUIRE(loaded.frames.size() == clip.frames.size());
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    CHECK(frames_equal(clip.frames[i], loaded.frames[i]));
  }
  std::filesystem::remove(path);
}

TEST_CASE("read_clip rejects foreign files") {
  const auto path = std::filesystem::temp_directory_path() / "camp_bogus.clip";
  {
    std::ofstream os(path);
    os << "not a clip";
  }
  CHECK_THROWS_AS(read_clip(path), DataError);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
