/* Copyright 2026 The Playseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "suites.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <Eigen/Geometry>

#include "oracles.h"
#include "playseg/box.h"
#include "playseg/error.h"
#include "playseg/geometry.h"
#include "playseg/mask.h"

namespace playseg::testing {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  double Uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int Int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double Normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(gen_); }
  bool Chance(double p) { return Uniform(0.0, 1.0) < p; }

 private:
  std::mt19937_64 gen_;
};

void Note(OracleTally& t, double err) {
  ++t.instances;
  if (!(err <= t.max_error)) t.max_error = std::isnan(err) ? INFINITY : err;
}

void NoteExact(OracleTally& t, bool same) {
  ++t.instances;
  if (!same) ++t.mismatches;
}

Box RandomBox(Rng& rng) {
  // Quarter-pixel lattice coordinates keep many exact ties and touches.
  auto q = [&](double lo, double hi) { return std::round(rng.Uniform(lo, hi) * 4.0) / 4.0; };
  const double x1 = q(0, 40), y1 = q(0, 40);
  return {x1, y1, x1 + q(0.25, 30), y1 + q(0.25, 30)};
}

std::vector<uint8_t> RandomBlobs(Rng& rng, uint32_t w, uint32_t h) {
  std::vector<uint8_t> px(w * h);
  const int blobs = rng.Int(0, 4);
  for (int b = 0; b < blobs; ++b) {
    const int cx = rng.Int(0, w - 1), cy = rng.Int(0, h - 1), r = rng.Int(0, 5);
    for (uint32_t y = 0; y < h; ++y) {
      for (uint32_t x = 0; x < w; ++x) {
        if (std::abs(int(x) - cx) + std::abs(int(y) - cy) <= r) px[y * w + x] = 1;
      }
    }
  }
  for (auto& p : px) {
    if (rng.Chance(0.08)) p = !p;
  }
  return px;
}

void IouOps(Rng& rng, int n, OracleTally& iou) {
  for (int i = 0; i < n; ++i) {
    const Box a = RandomBox(rng);
    const Box b = rng.Chance(0.1) ? a : RandomBox(rng);
    const double lib = Iou(a, b);
    const double ref = oracle::RectIou({a.x1, a.y1, a.x2, a.y2}, {b.x1, b.y1, b.x2, b.y2});
    Note(iou, std::abs(lib - ref) + std::abs(lib - Iou(b, a)));
  }
}

void MaskOps(Rng& rng, int n, OracleTally& mask_iou, OracleTally& components) {
  for (int i = 0; i < n; ++i) {
    const uint32_t w = rng.Int(1, 24), h = rng.Int(1, 24);
    const auto da = RandomBlobs(rng, w, h);
    const auto db = rng.Chance(0.1) ? da : RandomBlobs(rng, w, h);
    const Mask a = Mask::FromDense(w, h, da), b = Mask::FromDense(w, h, db);
    Note(mask_iou, std::abs(MaskIou(a, b) - oracle::DenseIou(da, db)));

    const auto ref = oracle::FloodComponents(da, w, h);
    const auto lib = ConnectedComponents(a);
    bool same = ref.size() == lib.size();
    for (size_t c = 0; same && c < ref.size(); ++c) {
      const auto dense = lib[c].first.ToDense();
      std::vector<uint32_t> idx;
      for (uint32_t p = 0; p < dense.size(); ++p) {
        if (dense[p]) idx.push_back(p);
      }
      same = idx == ref[c] && lib[c].second == ref[c].size();
    }
    NoteExact(components, same);
  }
}

void DbscanOps(Rng& rng, int n, OracleTally& t) {
  for (int i = 0; i < n; ++i) {
    const int dim = rng.Int(1, 4);
    const int count = rng.Int(1, 40);
    const int centers = rng.Int(1, 4);
    std::vector<std::vector<double>> c(centers, std::vector<double>(dim));
    for (auto& v : c) {
      for (double& x : v) x = rng.Uniform(-10, 10);
    }
    std::vector<std::vector<double>> ref_pts;
    std::vector<Eigen::VectorXd> lib_pts;
    for (int p = 0; p < count; ++p) {
      const auto& base = c[rng.Int(0, centers - 1)];
      std::vector<double> v(dim);
      Eigen::VectorXd e(dim);
      for (int k = 0; k < dim; ++k) {
        v[k] = rng.Chance(0.1) ? rng.Uniform(-15, 15) : base[k] + rng.Normal(1.0);
        if (rng.Chance(0.05) && p > 0) v[k] = ref_pts.back()[k];  // duplicates
        e(k) = v[k];
      }
      ref_pts.push_back(v);
      lib_pts.push_back(e);
    }
    const double eps = rng.Uniform(0.2, 3.0);
    const int min_pts = rng.Int(1, 6);
    NoteExact(t, Dbscan(lib_pts, eps, min_pts) == oracle::Dbscan(ref_pts, eps, min_pts));
  }
}

void HomographyOps(Rng& rng, int n, OracleTally& fit, OracleTally& project) {
  for (int i = 0; i < n; ++i) {
    // Random well-conditioned projective map of a random convex quad.
    std::array<double, 9> g{1 + rng.Uniform(-0.3, 0.3), rng.Uniform(-0.3, 0.3), rng.Uniform(-0.5, 0.5),
                            rng.Uniform(-0.3, 0.3), 1 + rng.Uniform(-0.3, 0.3), rng.Uniform(-0.5, 0.5),
                            rng.Uniform(-0.3, 0.3), rng.Uniform(-0.3, 0.3), 1.0};
    std::array<std::array<double, 2>, 4> src{{{rng.Uniform(0, 0.3), rng.Uniform(0, 0.3)},
                                               {rng.Uniform(0.7, 1), rng.Uniform(0, 0.3)},
                                               {rng.Uniform(0.7, 1), rng.Uniform(0.7, 1)},
                                               {rng.Uniform(0, 0.3), rng.Uniform(0.7, 1)}}};
    std::array<std::array<double, 2>, 4> dst;
    Quad qs, qd;
    for (int k = 0; k < 4; ++k) {
      dst[k] = oracle::Project(g, src[k][0], src[k][1]);
      qs[k] = {src[k][0], src[k][1]};
      qd[k] = {dst[k][0], dst[k][1]};
    }
    bool ok = false;
    const auto ref = oracle::SolveHomography(src, dst, &ok);
    const Homography h = HomographyFromCorners(qs, qd);
    double err = ok ? 0.0 : INFINITY;
    for (int k = 0; k < 4; ++k) {
      const Eigen::Vector2d p = ProjectPoint(h, qs[k]);
      err = std::max({err, std::abs(p.x() - dst[k][0]), std::abs(p.y() - dst[k][1])});
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) err = std::max(err, std::abs(h.matrix()(r, c) - ref[3 * r + c]));
    }
    Note(fit, err);

    const double x = rng.Uniform(-2, 2), y = rng.Uniform(-2, 2);
    const auto want = oracle::Project(ref, x, y);
    const Eigen::Vector2d got = ProjectPoint(h, {x, y});
    // Relative to magnitude: points near the horizon line blow up.
    const double scale = std::max({1.0, std::abs(want[0]), std::abs(want[1])});
    Note(project, std::max(std::abs(got.x() - want[0]), std::abs(got.y() - want[1])) / scale);
  }
}

void PlaneOps(Rng& rng, int n, OracleTally& tls, OracleTally& robust) {
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d normal(rng.Normal(1), rng.Normal(1), rng.Normal(1));
    normal.normalize();
    const Eigen::Vector3d center(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(1.5, 4));
    const Eigen::Vector3d u = normal.unitOrthogonal(), v = normal.cross(u);
    const int count = rng.Int(6, 60);
    std::vector<std::array<double, 3>> pts;
    PointCloud cloud;
    for (int p = 0; p < count; ++p) {
      Eigen::Vector3d q = center + rng.Uniform(-0.5, 0.5) * u + rng.Uniform(-0.5, 0.5) * v +
                          rng.Normal(0.01) * normal;
      if (p >= 5 && rng.Chance(0.1)) q += rng.Uniform(0.5, 3.0) * normal;  // gross outlier
      cloud.points.push_back(q);
      pts.push_back({q.x(), q.y(), q.z()});
    }
    auto err_of = [](const Plane& lib, const oracle::PlaneFit& ref) {
      double e = std::abs(lib.offset - ref.offset);
      for (int k = 0; k < 3; ++k) e = std::max(e, std::abs(lib.normal(k) - ref.normal[k]));
      return e;
    };
    Note(tls, err_of(FitPlaneTls(cloud.points), oracle::TlsPlane(pts)));
    Note(robust, err_of(FitPlane(cloud), oracle::RobustPlane(pts, 0.05, 3.0)));
  }
}

void GridOps(Rng& rng, int n, OracleTally& t) {
  const double special[] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, -0.5, 1.5};
  for (int i = 0; i < n; ++i) {
    const double x = rng.Chance(0.3) ? special[rng.Int(0, 5)] : rng.Uniform(-0.2, 1.2);
    const double y = rng.Chance(0.3) ? special[rng.Int(0, 5)] : rng.Uniform(-0.2, 1.2);
    NoteExact(t, GridCell({x, y}) == oracle::GridCell(x, y));
  }
}

void BackprojectOps(Rng& rng, int n, OracleTally& t) {
  for (int i = 0; i < n; ++i) {
    DepthMap d;
    d.width = rng.Int(1, 9);
    d.height = rng.Int(1, 9);
    for (uint32_t k = 0; k < d.width * d.height; ++k) d.values.push_back(static_cast<float>(rng.Uniform(0.05, 1.0)));
    Intrinsics in{rng.Uniform(2, 10), rng.Uniform(2, 10), rng.Uniform(0, d.width), rng.Uniform(0, d.height)};
    BackprojectOptions opt;
    opt.stride = rng.Int(1, 3);
    opt.outlier_k = 0;
    std::vector<uint8_t> dense = RandomBlobs(rng, d.width, d.height);
    const bool use_mask = rng.Chance(0.5);
    const Mask mask = Mask::FromDense(d.width, d.height, dense);
    const PointCloud cloud = Backproject(d, in, use_mask ? &mask : nullptr, opt);
    std::vector<Eigen::Vector3d> want;
    for (uint32_t v = 0; v < d.height; v += opt.stride) {
      for (uint32_t u = 0; u < d.width; u += opt.stride) {
        if (use_mask && !dense[v * d.width + u]) continue;
        const double z = d.values[v * d.width + u];
        want.emplace_back((u - in.cx) / in.fx * z, (v - in.cy) / in.fy * z, z);
      }
    }
    double err = cloud.points.size() == want.size() ? 0.0 : INFINITY;
    // Compare as sets ordered lexicographically; traversal order is free.
    auto order = [](std::vector<Eigen::Vector3d> p) {
      std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
        return std::tie(a.z(), a.y(), a.x()) < std::tie(b.z(), b.y(), b.x());
      });
      return p;
    };
    if (std::isfinite(err)) {
      const auto a = order(cloud.points), b = order(want);
      for (size_t k = 0; k < a.size(); ++k) err = std::max(err, (a[k] - b[k]).cwiseAbs().maxCoeff());
    }
    Note(t, err);
  }
}

}  // namespace

size_t NumericsSuiteResult::MinInstances() const {
  size_t m = SIZE_MAX;
  for (const auto& t : ops) m = std::min(m, t.instances);
  return ops.empty() ? 0 : m;
}

size_t NumericsSuiteResult::TotalMismatches() const {
  size_t m = 0;
  for (const auto& t : ops) m += t.mismatches;
  return m;
}

double NumericsSuiteResult::MaxError() const {
  double e = 0.0;
  for (const auto& t : ops) e = std::max(e, t.max_error);
  return e;
}

NumericsSuiteResult RunNumericsSuite(uint64_t seed, int instances_per_op) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  OracleTally iou{"iou"}, mask_iou{"mask_iou"}, comps{"connected_components"}, dbscan{"dbscan"},
      homography{"homography_from_corners"}, project{"project_point"}, tls{"fit_plane_tls"},
      robust{"fit_plane"}, grid{"grid_cell"}, back{"backproject"};
  IouOps(rng, instances_per_op, iou);
  MaskOps(rng, instances_per_op, mask_iou, comps);
  DbscanOps(rng, instances_per_op, dbscan);
  HomographyOps(rng, instances_per_op, homography, project);
  PlaneOps(rng, instances_per_op, tls, robust);
  GridOps(rng, instances_per_op, grid);
  BackprojectOps(rng, instances_per_op, back);
  NumericsSuiteResult r;
  r.ops = {iou, mask_iou, comps, dbscan, homography, project, tls, robust, grid, back};
  r.seconds = Seconds(t0);
  return r;
}

Eq1SuiteResult RunEq1Suite(uint64_t seed, int instances, int theta_pairs) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  Eq1SuiteResult r;
  std::vector<std::vector<Keystate>> pools;
  for (int inst = 0; inst < instances; ++inst) {
    const int K = 1 + inst % 5;
    std::vector<Heuristic> all(std::begin(kAllHeuristics), std::end(kAllHeuristics));
    for (size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.Int(0, int(i) - 1)]);
    HeuristicWeights weights;
    if (rng.Chance(0.5)) {
      weights = EqualWeights(std::set<Heuristic>(all.begin(), all.begin() + K));
    } else {
      double total = 0.0;
      std::vector<double> raw(K);
      for (double& w : raw) total += (w = rng.Uniform(0.05, 1.0));
      for (int k = 0; k < K; ++k) weights[all[k]] = raw[k] / total;
    }
    const int window = rng.Int(0, 12);
    std::vector<KeystateCandidate> cands;
    struct Expected {
      int object;
      int64_t frame;
      double score;
    };
    std::vector<Expected> expected;
    const int objects = rng.Int(1, 3);
    for (int o = 0; o < objects; ++o) {
      int64_t cursor = rng.Int(0, 20);
      const int clusters = rng.Int(1, 3);
      for (int c = 0; c < clusters; ++c) {
        std::map<Heuristic, double> best;
        int64_t last_weighted = -1;
        const int firings = rng.Int(1, 6);
        for (int f = 0; f < firings; ++f) {
          KeystateCandidate k;
          k.object_id = o;
          k.frame_index = cursor + rng.Int(0, window);
          k.heuristic = kAllHeuristics[rng.Int(0, 4)];
          k.confidence = rng.Chance(0.3) ? 1.0 : rng.Uniform(0.0, 1.0);
          cands.push_back(k);
          if (weights.count(k.heuristic)) {
            best[k.heuristic] = std::max(best[k.heuristic], k.confidence);
            last_weighted = std::max(last_weighted, k.frame_index);
          }
        }
        if (last_weighted >= 0) {
          double s = 0.0;
          for (const auto& [h, conf] : best) s += weights.at(h) * conf;
          expected.push_back({o, last_weighted, s});
        }
        cursor += 2 * window + rng.Int(1, 30);
      }
    }
    for (size_t i = cands.size(); i > 1; --i) std::swap(cands[i - 1], cands[rng.Int(0, int(i) - 1)]);
    const std::vector<Keystate> got = ScoreCandidates(cands, weights, window);
    ++r.instances;
    std::vector<bool> used(got.size());
    for (const Expected& e : expected) {
      bool found = false;
      for (size_t g = 0; g < got.size(); ++g) {
        if (used[g] || got[g].object_id != e.object || got[g].frame_index != e.frame) continue;
        used[g] = true;
        found = true;
        r.max_error = std::max(r.max_error, std::abs(got[g].score - e.score));
        ++r.keystates_checked;
        break;
      }
      if (!found) ++r.missing;
    }
    r.missing += std::count(used.begin(), used.end(), false);
    pools.push_back(got);
  }

  auto key = [](const Keystate& k) { return std::make_pair(k.frame_index, k.object_id); };
  auto subset = [&](const std::vector<Keystate>& small, const std::vector<Keystate>& big) {
    std::set<std::pair<int64_t, int>> b;
    for (const Keystate& k : big) b.insert(key(k));
    for (const Keystate& k : small) {
      if (!b.count(key(k))) return false;
    }
    return true;
  };
  for (int p = 0; p < theta_pairs; ++p) {
    const auto& pool = pools[rng.Int(0, int(pools.size()) - 1)];
    double t1 = rng.Uniform(0, 1), t2 = rng.Uniform(0, 1);
    // Include thresholds sitting exactly on scores and equal pairs.
    if (!pool.empty() && rng.Chance(0.3)) t1 = pool[rng.Int(0, int(pool.size()) - 1)].score;
    if (rng.Chance(0.1)) t2 = t1;
    if (t1 > t2) std::swap(t1, t2);
    const auto a1 = Threshold(pool, t1), a2 = Threshold(pool, t2);
    bool ok = subset(a2, a1);
    for (const Keystate& k : a2) ok = ok && k.score >= t2;
    ok = ok && a1.size() == static_cast<size_t>(std::count_if(pool.begin(), pool.end(),
                                                              [&](const Keystate& k) { return k.score >= t1; }));
    ok = ok && subset(Aggregate(a2, 8), Aggregate(a1, 8));
    ++r.theta_pairs;
    if (!ok) ++r.violations;
  }
  r.seconds = Seconds(t0);
  return r;
}

RandomScriptOptions NoiseFreeOptions() { return RandomScriptOptions{}; }

RandomScriptOptions NoisyOptions() {
  RandomScriptOptions o;
  o.noise.box_sigma = 3.0;
  o.noise.dropout = 0.1;
  o.noise.spurious_rate = 0.1;
  return o;
}

EpisodeRun RunSynthEpisode(uint64_t seed, const RandomScriptOptions& options, const Config& config,
                           bool with_labels) {
  EpisodeRun run;
  run.script = RandomScript(seed, options);
  SynthOutput gen = Generate(run.script);
  run.truth = std::move(gen.truth);
  ScriptedMockClient client(run.script);
  PipelineOptions po;
  po.skip_labels = !with_labels;
  run.result = RunPipeline(gen.episode, config, client, po);
  CandidateOptions co;
  co.graded_movement = config.keystates.graded_movement;
  run.candidates = CollectCandidates(run.result.signals, co);
  return run;
}

std::vector<Keystate> Rescore(const EpisodeRun& run, const KeystateConfig& config) {
  const HeuristicWeights w = EffectiveWeights(config, AvailableHeuristics(run.result.signals, config.enabled));
  return Aggregate(Threshold(ScoreCandidates(run.candidates, w, config.window), config.theta), config.window);
}

BatchScore ScoreBatch(const std::vector<EpisodeRun>& runs, const KeystateConfig& config, int64_t epsilon) {
  BatchScore b;
  for (const EpisodeRun& run : runs) {
    std::vector<Keystate> ks = Rescore(run, config);
    std::vector<int64_t> pred;
    for (const Keystate& k : ks) pred.push_back(k.frame_index);
    const KeystateMatch m = MatchKeystates(pred, run.truth.keystates, epsilon);
    b.tp += m.tp();
    b.fp += m.fp();
    b.fn += m.fn();
    b.mean_precision += Precision(m.tp(), m.fp(), m.fn());
    b.mean_recall += Recall(m.tp(), m.fp(), m.fn());
    b.keystates.push_back(std::move(ks));
  }
  b.precision = Precision(b.tp, b.fp, b.fn);
  b.recall = Recall(b.tp, b.fp, b.fn);
  if (!runs.empty()) {
    b.mean_precision /= static_cast<double>(runs.size());
    b.mean_recall /= static_cast<double>(runs.size());
  }
  return b;
}

GroundingReport GroundBatch(const std::vector<EpisodeRun>& runs, GroundingMode mode, int64_t epsilon) {
  std::vector<EpisodeGrounding> eps;
  for (const EpisodeRun& run : runs) {
    EpisodeGrounding e;
    e.episode_id = run.truth.episode_id;
    for (const LabeledSegment& s : run.result.labels.segments) e.pred.push_back({s.end_frame, s.tasks});
    for (const TaskLabel& t : run.truth.tasks) e.gt.push_back({t.end, t.text});
    eps.push_back(std::move(e));
  }
  return EvaluateGrounding(eps, epsilon, mode);
}

}  // namespace playseg::testing
