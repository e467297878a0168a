#include "camp/analysis.hpp"
#include "camp/errors.hpp"

#include <doctest.h>

using namespace camp;

namespace {

MatX scalar_seq(std::initializer_list<double> values) {
  MatX m(1, Eigen::Index(values.size()));
  Eigen::Index i = 0;
  for (double v : values) m(0, i++) = v;
  return m;
}

MatX randn(Eigen::Index r, Eigen::Index c, Rng& rng) {
  MatX m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  }
  return m;
}

std::vector<std::array<bool, 4>> synthetic_contacts(const GaitSpec& spec, double duration, double dt) {
  std::vector<std::array<bool, 4>> out;
  for (double t = 0.0; t < duration; t += dt) {
    std::array<bool, 4> c{};
    for (int leg = 0; leg < 4; ++leg) {
      c[std::size_t(leg)] =
          wrap_unit(spec.frequency * t + spec.phase_offsets[std::size_t(leg)]) < spec.duty_factor;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("dtw: identical sequences, hand-evaluated DP table, symmetry") {
  Rng rng(1);
  const MatX a = randn(3, 10, rng);
  CHECK(dtw_distance(a, a) == 0.0);

  // scalar [0,1,2] vs [0,2] with absolute-difference local cost
  CHECK(dtw_distance(scalar_seq({0, 1, 2}), scalar_seq({0, 2})) == doctest::Approx(1.0));

  for (int i = 0; i < 20; ++i) {
    const MatX x = randn(2, 5 + int(rng.index(6)), rng);
    const MatX y = randn(2, 4 + int(rng.index(7)), rng);
    CHECK(dtw_distance(x, y) == doctest::Approx(dtw_distance(y, x)));
    CHECK(dtw_distance(x, y) >= 0.0);
  }

  CHECK_THROWS_AS(dtw_distance(MatX(3, 0), a), DataError);
}

TEST_CASE("dtw tolerates time warping: a stretched copy stays near zero") {
  Rng rng(2);
  const MatX base = randn(2, 20, rng);
  MatX stretched(2, 40);
  for (int i = 0; i < 40; ++i) stretched.col(i) = base.col(i / 2);
  CHECK(dtw_distance(base, stretched) == doctest::Approx(0.0));
}

TEST_CASE("latent sequences: lengths, constant clip, standardization") {
  Rng rng(3);
  const Mlp f = make_skill_discriminator(4, rng, {16, 16});
  FeatureNormalizer norm(kAmpFeatureDim);
  MatX warm = randn(kAmpFeatureDim, 100, rng);
  norm.update(warm);

  // a 500-frame clip yields 499 transition latents
  MotionClip clip = generate_clip(default_gait_spec(GaitId::Trot, 2.0), 9.98, 0.02, 0);
  REQUIRE(clip.frames.size() == 500);
  auto seqs = latent_sequences({clip}, f, norm);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].latents.cols() == 499);
  CHECK(seqs[0].label == 0);

  // constant clip -> constant latents
  MotionClip frozen = clip;
  for (auto& fr : frozen.frames) fr = frozen.frames[0];
  auto const_seq = latent_sequences({frozen}, f, norm);
  const MatX& l = const_seq[0].latents;
  for (Eigen::Index c = 1; c < l.cols(); ++c) CHECK((l.col(c) - l.col(0)).norm() < 1e-12);

  // standardization: pooled mean 0, variance 1 per dimension
  auto pooled = latent_sequences({clip, frozen}, f, norm);
  standardize_latents(pooled);
  const Eigen::Index total = pooled[0].latents.cols() + pooled[1].latents.cols();
  VecX mean = VecX::Zero(4), var = VecX::Zero(4);
  for (const auto& s : pooled) {
    for (Eigen::Index c = 0; c < s.latents.cols(); ++c) mean += s.latents.col(c);
  }
  mean /= double(total);
  for (const auto& s : pooled) {
    for (Eigen::Index c = 0; c < s.latents.cols(); ++c) {
      var += (s.latents.col(c) - mean).cwiseAbs2();
    }
  }
  var /= double(total);
  CHECK(mean.cwiseAbs().maxCoeff() < 1e-6);
  CHECK((var - VecX::Ones(4)).cwiseAbs().maxCoeff() < 1e-6);

  CHECK_THROWS_AS(latent_sequences({MotionClip{}}, f, norm), DataError);
}

TEST_CASE("dtw matrix is symmetric with a zero diagonal") {
  Rng rng(4);
  std::vector<LatentSequence> seqs(3);
  for (int i = 0; i < 3; ++i) {
    seqs[std::size_t(i)].latents = randn(4, 30 + 5 * i, rng);
    seqs[std::size_t(i)].label = i;
  }
  const MatX d = dtw_matrix(seqs, 2);
  CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(d(0, 1) > 0.0);
}

TEST_CASE("kmeans: separated clouds reach purity 1, degenerate data reduces to majority") {
  Rng rng(5);

  SUBCASE("four well-separated clouds") {
    const int per = 50;
    MatX features(2, 4 * per);
    std::vector<int> labels(4 * per);
    const double centers[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
    for (int c = 0; c < 4; ++c) {
      for (int i = 0; i < per; ++i) {
        features(0, c * per + i) = centers[c][0] + 0.3 * rng.normal();
        features(1, c * per + i) = centers[c][1] + 0.3 * rng.normal();
        labels[std::size_t(c * per + i)] = c;
      }
    }
    const KmeansResult res = kmeans_purity(features, labels, 4);
    CHECK(res.purity == doctest::Approx(1.0));
  }

  SUBCASE("identical points: purity equals the majority-label fraction") {
    MatX features = MatX::Zero(3, 10);
    std::vector<int> labels{0, 0, 0, 0, 0, 0, 0, 1, 1, 1};
    const KmeansResult res = kmeans_purity(features, labels, 2);
    CHECK(res.purity == doctest::Approx(0.7));
  }

  SUBCASE("k out of range") {
    CHECK_THROWS_AS(kmeans_purity(MatX::Zero(2, 3), {0, 1, 0}, 5), ConfigError);
    CHECK_THROWS_AS(kmeans_purity(MatX::Zero(2, 3), {0, 1, 0}, 0), ConfigError);
  }
}

TEST_CASE("purity is monotone under label-preserving cluster refinement") {
  // splitting a cluster can only keep or increase the majority mass
  Rng rng(6);
  const int n = 120;
  MatX features(2, n);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = i % 3;
    features(0, i) = 6.0 * c + 0.5 * rng.normal();
    features(1, i) = 0.5 * rng.normal();
    labels[std::size_t(i)] = (i % 7 == 0) ? (c + 1) % 3 : c;  // noisy ground truth
  }
  double prev = 0.0;
  for (int k = 2; k <= 6; ++k) {
    const double p = kmeans_purity(features, labels, k).purity;
    if (k > 2) CHECK(p >= prev - 1e-9);
    prev = p;
  }
}

TEST_CASE("pca: collinear data, rotation invariance, reconstruction identity") {
  Rng rng(7);

  SUBCASE("data on a line has zero variance on the second component") {
    const int n = 40;
    MatX features(3, n);
    const Vec3 dir = Vec3(1, 2, -1).normalized();
    for (int i = 0; i < n; ++i) features.col(i) = dir * rng.normal() + Vec3(5, 5, 5);
    const MatX proj = pca_project(features, 2);
    const double var2 = (proj.row(1).array() - proj.row(1).mean()).square().mean();
    CHECK(var2 < 1e-18);
  }

  SUBCASE("orthogonal input transformation preserves the spectrum") {
    const MatX features = randn(4, 60, rng);
    MatX gauss = randn(4, 4, rng);
    const MatX q = Eigen::HouseholderQR<MatX>(gauss).householderQ();
    const VecX s1 = pca_spectrum(features);
    const VecX s2 = pca_spectrum(q * features);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("discarded variance equals the sum of trailing eigenvalues") {
    const MatX features = randn(5, 80, rng);
    const VecX spectrum = pca_spectrum(features);
    const MatX proj = pca_project(features, 2);
    const MatX centered = features.colwise() - features.rowwise().mean();
    const double total_var = centered.squaredNorm() / double(features.cols());
    const double kept_var = proj.squaredNorm() / double(features.cols());
    CHECK(total_var - kept_var == doctest::Approx(spectrum.tail(3).sum()).epsilon(1e-9));
  }

  SUBCASE("dims must not exceed the sample count") {
    CHECK_THROWS_AS(pca_project(MatX::Zero(3, 1), 2), DataError);
  }
}

TEST_CASE("contact metrics recover generator phase offsets and duty factors") {
  const double dt = 0.02;

  SUBCASE("trot offsets within 0.05 cycle") {
    const GaitSpec spec = default_gait_spec(GaitId::Trot, 2.0);
    const ContactMetrics m = contact_metrics(synthetic_contacts(spec, 6.0, dt), 2.0, dt);
    for (int leg = 0; leg < 4; ++leg) {
      CHECK(circular_distance(m.phase_offset[std::size_t(leg)],
                              spec.phase_offsets[std::size_t(leg)]) < 0.05);
      CHECK(m.duty_factor[std::size_t(leg)] == doctest::Approx(spec.duty_factor).epsilon(0.05));
    }
  }

  SUBCASE("pronk offsets all zero") {
    const GaitSpec spec = default_gait_spec(GaitId::Pronk, 2.0);
    const ContactMetrics m = contact_metrics(synthetic_contacts(spec, 6.0, dt), 2.0, dt);
    for (int leg = 0; leg < 4; ++leg) {
      CHECK(circular_distance(m.phase_offset[std::size_t(leg)], 0.0) < 0.05);
    }
  }

  SUBCASE("55%-stance square wave has duty factor 0.55 within 0.02") {
    GaitSpec spec = default_gait_spec(GaitId::Trot, 2.0);
    spec.duty_factor = 0.55;
    const ContactMetrics m = contact_metrics(synthetic_contacts(spec, 10.0, dt), 2.0, dt);
    CHECK(m.duty_factor[0] == doctest::Approx(0.55).epsilon(0.02 / 0.55));
  }

  SUBCASE("a leg that never touches down is an error") {
    auto contacts = synthetic_contacts(default_gait_spec(GaitId::Trot, 2.0), 6.0, dt);
    for (auto& c : contacts) c[2] = false;
    CHECK_THROWS_AS(contact_metrics(contacts, 2.0, dt), DataError);
  }

  SUBCASE("less than two cycles is an error") {
    const auto contacts = synthetic_contacts(default_gait_spec(GaitId::Trot, 2.0), 0.6, dt);
    CHECK_THROWS_AS(contact_metrics(contacts, 2.0, dt), DataError);
  }
}

TEST_CASE("signature distance is the worst per-leg circular mismatch") {
  const std::array<double, 4> trot{0.0, 0.5, 0.5, 0.0};
  const std::array<double, 4> pace{0.0, 0.5, 0.0, 0.5};
  CHECK(signature_distance(trot, trot) == 0.0);
  CHECK(signature_distance(trot, pace) == doctest::Approx(0.5));
  const std::array<double, 4> wrap_a{0.0, 0.95, 0.0, 0.0};
  const std::array<double, 4> wrap_b{0.0, 0.05, 0.0, 0.0};
  CHECK(signature_distance(wrap_a, wrap_b) == doctest::Approx(0.1));
}

TEST_CASE("tracking accuracy: exact, offset, and degenerate cases") {
  Rng rng(8);
  MatX target(12, 100);
  for (int j = 0; j < 12; ++j) {
    for (int t = 0; t < 100; ++t) {
      target(j, t) = std::sin(0.13 * t + j);
    }
  }
  CHECK(tracking_accuracy(target, target) == doctest::Approx(100.0));

  // constant offset of 10% of each joint's range costs exactly 10 points
  MatX offset = target;
  for (int j = 0; j < 12; ++j) {
    const double range = target.row(j).maxCoeff() - target.row(j).minCoeff();
    offset.row(j).array() += 0.1 * range;
  }
  CHECK(tracking_accuracy(target, offset) == doctest::Approx(90.0).epsilon(1e-9));

  // flat joints are skipped, a fully constant target is an error
  MatX with_flat = target;
  with_flat.row(0).setConstant(1.0);
  MatX actual = with_flat;
  actual.row(0).array() += 100.0;  // must not affect the score
  CHECK(tracking_accuracy(with_flat, actual) == doctest::Approx(100.0));
  CHECK_THROWS_AS(tracking_accuracy(MatX::Ones(12, 50), MatX::Zero(12, 50)), DataError);
  CHECK_THROWS_AS(tracking_accuracy(target, MatX::Zero(12, 99)), DataError);
}

TEST_CASE("ablation report marks missing runs and renders the table") {
  const AblationReport report = ablation_report(
      {{"Ours", std::filesystem::temp_directory_path() / "definitely_missing_run"}},
      default_skill_catalog(), EnvConfig{}, 0);
  REQUIRE(report.rows.size() == 1);
  CHECK_FALSE(report.rows[0].completed);
  CHECK_FALSE(report.complete());
  CHECK(report.to_table().find("missing") != std::string::npos);
}

}  // TEST_SUITE
