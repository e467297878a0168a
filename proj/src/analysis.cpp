#include "camp/analysis.hpp"

#include "camp/checkpoint.hpp"
#include "camp/errors.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace camp {

namespace fs = std::filesystem;

double dtw_distance(const MatX& a, const MatX& b) {
  if (a.cols() == 0 || b.cols() == 0) throw DataError("dtw_distance: empty sequence");
  if (a.rows() != b.rows()) throw DataError("dtw_distance: dimension mismatch");
  const Eigen::Index n = a.cols(), m = b.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  VecX prev = VecX::Constant(m + 1, inf), cur = VecX::Constant(m + 1, inf);
  prev(0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    cur.setConstant(inf);
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double cost = (a.col(i - 1) - b.col(j - 1)).norm();
      cur(j) = cost + std::min({prev(j), cur(j - 1), prev(j - 1)});
    }
    std::swap(prev, cur);
  }
  return prev(m);
}

std::vector<LatentSequence> latent_sequences(const std::vector<MotionClip>& clips,
                                             const Mlp& skill_disc,
                                             const FeatureNormalizer& normalizer) {
  std::vector<LatentSequence> out;
  out.reserve(clips.size());
  for (const MotionClip& clip : clips) {
    if (clip.frames.size() < 2) throw DataError("latent_sequences: clip shorter than 2 frames");
    const std::vector<AmpFeature> feats = amp_features_from_clip(clip);
    MatX inputs(kPairDim, Eigen::Index(feats.size() - 1));
    for (std::size_t i = 0; i + 1 < feats.size(); ++i) {
      TransitionPair raw{feats[i], feats[i + 1], clip.label};
      inputs.col(Eigen::Index(i)) = normalizer.normalize(raw).x;
    }
    LatentSequence seq;
    seq.latents = skill_disc.forward(inputs);
    seq.label = clip.label;
    out.push_back(std::move(seq));
  }
  return out;
}

void standardize_latents(std::vector<LatentSequence>& sequences) {
  if (sequences.empty()) return;
  const Eigen::Index d = sequences.front().latents.rows();
  double n = 0.0;
  VecX mean = VecX::Zero(d), m2 = VecX::Zero(d);
  for (const LatentSequence& s : sequences) {
    for (Eigen::Index j = 0; j < s.latents.cols(); ++j) {
      n += 1.0;
      const VecX delta = s.latents.col(j) - mean;
      mean += delta / n;
      m2 += delta.cwiseProduct(s.latents.col(j) - mean);
    }
  }
  const VecX sd = (m2 / n).cwiseMax(1e-12).cwiseSqrt();
  for (LatentSequence& s : sequences) {
    s.latents = (s.latents.colwise() - mean).array().colwise() / sd.array();
  }
}

MatX dtw_matrix(const std::vector<LatentSequence>& sequences, int stride) {
  if (stride < 1) throw ConfigError("dtw_matrix: stride must be >= 1");
  const Eigen::Index n = Eigen::Index(sequences.size());
  std::vector<MatX> decimated(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const MatX& full = sequences[std::size_t(i)].latents;
    const Eigen::Index cols = (full.cols() + stride - 1) / stride;
    MatX dec(full.rows(), cols);
    for (Eigen::Index c = 0; c < cols; ++c) dec.col(c) = full.col(c * stride);
    decimated[std::size_t(i)] = std::move(dec);
  }
  MatX dist = MatX::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = dtw_distance(decimated[std::size_t(i)], decimated[std::size_t(j)]);
    }
  }
  return dist;
}

namespace {
Eigen::Index farthest_point(const MatX& features, const std::function<double(Eigen::Index)>& dist) {
  Eigen::Index best = 0;
  double best_d = -1.0;
  for (Eigen::Index i = 0; i < features.cols(); ++i) {
    const double d = dist(i);
    if (d > best_d + 1e-15) {
      best_d = d;
      best = i;
    }
  }
  return best;
}
}  // namespace

KmeansResult kmeans_purity(const MatX& features, const std::vector<int>& labels, int k,
                           int max_iterations) {
  const Eigen::Index n = features.cols(), d = features.rows();
  if (k < 1 || Eigen::Index(k) > n) throw ConfigError("kmeans_purity: k out of range");
  if (labels.size() != std::size_t(n)) throw ConfigError("kmeans_purity: label count mismatch");

  // greedy spread seeding: start farthest from the mean, then maximize the
  // distance to the nearest chosen center
  MatX centroids(d, k);
  const VecX mean = features.rowwise().mean();
  std::vector<Eigen::Index> chosen;
  chosen.push_back(farthest_point(features, [&](Eigen::Index i) { return (features.col(i) - mean).norm(); }));
  centroids.col(0) = features.col(chosen[0]);
  for (int c = 1; c < k; ++c) {
    chosen.push_back(farthest_point(features, [&](Eigen::Index i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int cc = 0; cc < c; ++cc) nearest = std::min(nearest, (features.col(i) - centroids.col(cc)).norm());
      return nearest;
    }));
    centroids.col(c) = features.col(chosen.back());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (features.col(i) - centroids.col(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dd = (features.col(i) - centroids.col(c)).squaredNorm();
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      if (assign[std::size_t(i)] != best) {
        assign[std::size_t(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    for (int c = 0; c < k; ++c) {
      VecX sum = VecX::Zero(d);
      Eigen::Index count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (assign[std::size_t(i)] == c) {
          sum += features.col(i);
          ++count;
        }
      }
      if (count > 0) {
        centroids.col(c) = sum / double(count);
      } else {
        // reseed an empty cluster at the point farthest from its centroid
        centroids.col(c) = features.col(farthest_point(features, [&](Eigen::Index i) {
          return (features.col(i) - centroids.col(assign[std::size_t(i)])).norm();
        }));
      }
    }
  }

  // purity: majority ground-truth label per cluster
  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  double correct = 0.0;
  for (int c = 0; c < k; ++c) {
    std::vector<int> counts(std::size_t(max_label + 1), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (assign[std::size_t(i)] == c) ++counts[std::size_t(labels[std::size_t(i)])];
    }
    correct += *std::max_element(counts.begin(), counts.end());
  }

  KmeansResult res;
  res.assignments = std::move(assign);
  res.centroids = std::move(centroids);
  res.purity = correct / double(n);
  return res;
}

VecX pca_spectrum(const MatX& features) {
  const Eigen::Index n = features.cols();
  if (n < 1) throw DataError("pca_spectrum: no samples");
  const MatX centered = features.colwise() - features.rowwise().mean();
  const MatX cov = centered * centered.transpose() / double(n);
  Eigen::SelfAdjointEigenSolver<MatX> es(cov);
  return es.eigenvalues().reverse();
}

MatX pca_project(const MatX& features, int dims) {
  const Eigen::Index n = features.cols(), d = features.rows();
  if (n < dims) throw DataError("pca_project: fewer samples than requested dimensions");
  const MatX centered = features.colwise() - features.rowwise().mean();
  const MatX cov = centered * centered.transpose() / double(n);
  Eigen::SelfAdjointEigenSolver<MatX> es(cov);
  MatX components(d, dims);
  for (int c = 0; c < dims; ++c) {
    VecX v = es.eigenvectors().col(d - 1 - c);
    // deterministic sign: the largest-magnitude loading is positive
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    components.col(c) = v;
  }
  return components.transpose() * centered;
}

ContactMetrics contact_metrics(const std::vector<std::array<bool, kNumLegs>>& contacts,
                               double frequency_hz, double dt) {
  if (frequency_hz <= 0.0 || dt <= 0.0) throw ConfigError("contact_metrics: bad frequency or dt");
  const double duration = double(contacts.size()) * dt;
  if (duration * frequency_hz < 2.0) throw DataError("contact_metrics: need at least two gait cycles");

  ContactMetrics m;
  std::array<double, kNumLegs> onset_cos{}, onset_sin{};
  std::array<int, kNumLegs> onset_count{};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    int stance = 0;
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      if (contacts[i][std::size_t(leg)]) ++stance;
      if (i > 0 && contacts[i][std::size_t(leg)] && !contacts[i - 1][std::size_t(leg)]) {
        const double phase = wrap_unit(double(i) * dt * frequency_hz);
        onset_cos[std::size_t(leg)] += std::cos(2.0 * M_PI * phase);
        onset_sin[std::size_t(leg)] += std::sin(2.0 * M_PI * phase);
        ++onset_count[std::size_t(leg)];
      }
    }
    if (stance == 0) throw DataError(std::string("contact_metrics: leg ") + kLegNames[leg] + " never touches down");
    if (onset_count[std::size_t(leg)] == 0) {
      throw DataError(std::string("contact_metrics: leg ") + kLegNames[leg] + " has no stance onset");
    }
    m.duty_factor[std::size_t(leg)] = double(stance) / double(contacts.size());
  }
  std::array<double, kNumLegs> onset_phase{};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    onset_phase[std::size_t(leg)] =
        wrap_unit(std::atan2(onset_sin[std::size_t(leg)], onset_cos[std::size_t(leg)]) / (2.0 * M_PI));
  }
  for (int leg = 0; leg < kNumLegs; ++leg) {
    m.phase_offset[std::size_t(leg)] = wrap_unit(onset_phase[std::size_t(leg)] - onset_phase[0]);
  }
  return m;
}

double signature_distance(const std::array<double, kNumLegs>& a,
                          const std::array<double, kNumLegs>& b) {
  double worst = 0.0;
  for (int leg = 1; leg < kNumLegs; ++leg) {
    worst = std::max(worst, circular_distance(a[std::size_t(leg)], b[std::size_t(leg)]));
  }
  return worst;
}

double tracking_accuracy(const MatX& target, const MatX& actual) {
  if (target.rows() != actual.rows() || target.cols() != actual.cols()) {
    throw DataError("tracking_accuracy: trajectory shape mismatch");
  }
  if (target.cols() < 2) throw DataError("tracking_accuracy: trajectory too short");
  double sum = 0.0;
  int used = 0;
  for (Eigen::Index j = 0; j < target.rows(); ++j) {
    const double range = target.row(j).maxCoeff() - target.row(j).minCoeff();
    if (range < 1e-9) continue;  // joint never commanded to move
    const double mae = (target.row(j) - actual.row(j)).cwiseAbs().mean();
    sum += 100.0 * (1.0 - mae / range);
    ++used;
  }
  if (used == 0) throw DataError("tracking_accuracy: constant target trajectory");
  return sum / double(used);
}

ContactMetrics measure_rollout_contacts(const std::vector<TraceRow>& trace, double frequency_hz,
                                        double dt, double settle_seconds) {
  const std::size_t skip = std::size_t(std::lround(settle_seconds / dt));
  if (trace.size() <= skip + 4) throw DataError("measure_rollout_contacts: trace too short");
  std::vector<std::array<bool, kNumLegs>> contacts;
  contacts.reserve(trace.size() - skip);
  for (std::size_t i = skip; i < trace.size(); ++i) contacts.push_back(trace[i].contacts);
  return contact_metrics(contacts, frequency_hz, dt);
}

std::string AblationReport::to_table() const {
  std::ostringstream os;
  os << "| Benchmarks           | Multiple gaits | Gait control switch |\n";
  os << "|----------------------|----------------|---------------------|\n";
  for (const AblationRow& r : rows) {
    std::string multi = r.completed ? (r.multiple_gaits ? "Yes" : "No") : "missing";
    std::string sw = r.completed ? (r.switch_success ? "Yes" : "No") : "missing";
    os << "| " << r.name;
    for (std::size_t i = r.name.size(); i < 20; ++i) os << ' ';
    os << " | " << multi;
    for (std::size_t i = multi.size(); i < 14; ++i) os << ' ';
    os << " | " << sw;
    for (std::size_t i = sw.size(); i < 19; ++i) os << ' ';
    os << " |\n";
  }
  return os.str();
}

bool AblationReport::complete() const {
  for (const AblationRow& r : rows) {
    if (!r.completed) return false;
  }
  return true;
}

AblationReport ablation_report(const std::vector<std::pair<std::string, fs::path>>& runs,
                               const std::vector<Skill>& catalog, const EnvConfig& env_config,
                               std::uint64_t eval_seed) {
  AblationReport report;
  for (const auto& [name, dir] : runs) {
    AblationRow row;
    row.name = name;
    const fs::path ckpt = dir / "checkpoint_final";
    const fs::path cfg_path = dir / "resolved_config.json";
    if (!fs::exists(ckpt / "actor.net") || !fs::exists(cfg_path)) {
      report.rows.push_back(row);
      continue;
    }
    try {
      std::ifstream cfg_in(cfg_path);
      nlohmann::json j = nlohmann::json::parse(cfg_in);
      const auto active = j.at("active_skills").get<std::vector<int>>();
      AblationFlags flags;
      flags.no_skill_obs = j.at("ablation").at("no_skill_obs").get<bool>();

      Mlp actor = load_network(ckpt / "actor.net");
      GaussianPolicy policy(std::move(actor), 1.0);
      policy.log_std() = load_vector(ckpt / "log_std.vec");

      EnvConfig eval_cfg = env_config;
      eval_cfg.randomization = DomainRandomizationConfig::disabled();
      QuadrupedEnv env(eval_cfg, eval_seed, 0);

      // (a) per-skill rollouts: do commanded skills express distinct contacts?
      std::vector<std::array<double, kNumLegs>> signatures;
      bool all_measured = true;
      for (int label : active) {
        SkillSchedule schedule;
        schedule.duration = 10.0;
        schedule.entries = {ScheduleEntry{0.0, label, std::nullopt}};
        const auto trace = rollout_policy(policy, env, schedule, catalog, active, flags);
        try {
          const ContactMetrics cm = measure_rollout_contacts(
              trace, catalog[std::size_t(label)].spec.frequency, eval_cfg.control_dt);
          signatures.push_back(cm.phase_offset);
        } catch (const DataError&) {
          all_measured = false;
        }
      }
      double max_pairwise = 0.0;
      for (std::size_t i = 0; i < signatures.size(); ++i) {
        for (std::size_t j2 = i + 1; j2 < signatures.size(); ++j2) {
          max_pairwise = std::max(max_pairwise, signature_distance(signatures[i], signatures[j2]));
        }
      }
      row.max_pairwise_distance = max_pairwise;
      row.multiple_gaits = all_measured && signatures.size() >= 2 && max_pairwise > 0.2;

      // (b) mid-episode switch toward the new skill's signature
      if (active.size() >= 2) {
        const int from = active[0], to = active[1];
        SkillSchedule schedule;
        schedule.duration = 10.0;
        schedule.entries = {ScheduleEntry{0.0, from, std::nullopt}, ScheduleEntry{5.0, to, std::nullopt}};
        const auto trace = rollout_policy(policy, env, schedule, catalog, active, flags);
        const bool survived = trace.size() >= std::size_t(std::lround(10.0 / eval_cfg.control_dt)) &&
                              !trace.back().terminated;
        if (survived) {
          std::vector<TraceRow> after(trace.begin() + std::ptrdiff_t(std::lround(7.0 / eval_cfg.control_dt)),
                                      trace.end());
          try {
            const ContactMetrics cm = contact_metrics(
                [&] {
                  std::vector<std::array<bool, kNumLegs>> c;
                  for (const TraceRow& r : after) c.push_back(r.contacts);
                  return c;
                }(),
                catalog[std::size_t(to)].spec.frequency, eval_cfg.control_dt);
            const auto to_sig = catalog[std::size_t(to)].spec.phase_offsets;
            const auto from_sig = catalog[std::size_t(from)].spec.phase_offsets;
            row.switch_success = signature_distance(cm.phase_offset, to_sig) <
                                 signature_distance(cm.phase_offset, from_sig);
          } catch (const DataError&) {
            row.switch_success = false;
          }
        }
      }
      row.completed = true;
    } catch (const std::exception&) {
      row.completed = false;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace camp
