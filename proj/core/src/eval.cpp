#include "superdiff/eval.hpp"

#include <json.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

namespace superdiff {

namespace {

void check_pair(const GrayMap& map, const Mask& gt) {
  if (!map.same_shape(gt)) throw Error(ErrorCode::ShapeMismatch, "map and ground truth differ in size");
}

struct Histograms {
  std::array<long, 256> fg{};
  std::array<long, 256> bg{};
  long n_fg = 0;
  long n_bg = 0;
};

Histograms histograms(const GrayMap& map, const Mask& gt) {
  Histograms h;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (gt.data[i]) {
      ++h.fg[map.data[i]];
      ++h.n_fg;
    } else {
      ++h.bg[map.data[i]];
      ++h.n_bg;
    }
  }
  return h;
}

struct Binarized {
  long tp = 0;
  long predicted = 0;
  long positives = 0;
};

Binarized binarize_at(const GrayMap& map, const Mask& gt, double threshold) {
  Binarized b;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const bool pred = map.data[i] >= threshold;
    b.predicted += pred;
    b.positives += gt.data[i] != 0;
    b.tp += pred && gt.data[i];
  }
  return b;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double f_beta(double precision, double recall, double beta2) {
  const double denom = beta2 * precision + recall;
  return denom > 0.0 ? (1.0 + beta2) * precision * recall / denom : 0.0;
}

double adaptive_threshold(const GrayMap& map) {
  if (map.size() == 0) return 0.0;
  double sum = 0.0;
  for (const auto v : map.data) sum += v;
  return std::min(2.0 * sum / static_cast<double>(map.size()), 255.0);
}

MetricReport f_measure(const GrayMap& map, const Mask& gt) {
  check_pair(map, gt);
  const Binarized b = binarize_at(map, gt, adaptive_threshold(map));
  if (b.positives == 0) throw Error(ErrorCode::EmptyGroundTruth, "ground truth has no salient pixel");
  MetricReport r;
  r.precision = b.predicted > 0 ? static_cast<double>(b.tp) / b.predicted : 1.0;
  r.recall = static_cast<double>(b.tp) / b.positives;
  r.f_measure = f_beta(r.precision, r.recall);
  return r;
}

double auc(const GrayMap& map, const Mask& gt) {
  check_pair(map, gt);
  const Histograms h = histograms(map, gt);
  if (h.n_fg == 0) throw Error(ErrorCode::EmptyGroundTruth, "ground truth has no salient pixel");
  if (h.n_bg == 0) return 1.0;
  // Thresholds from 256 (nothing predicted) down to 0 trace the ROC from (0,0) to (1,1).
  double area = 0.0;
  double prev_fpr = 0.0;
  double prev_tpr = 0.0;
  long tp = 0;
  long fp = 0;
  for (int t = 255; t >= 0; --t) {
    tp += h.fg[static_cast<std::size_t>(t)];
    fp += h.bg[static_cast<std::size_t>(t)];
    const double tpr = static_cast<double>(tp) / h.n_fg;
    const double fpr = static_cast<double>(fp) / h.n_bg;
    area += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return area;
}

double mor(const GrayMap& map, const Mask& gt) {
  check_pair(map, gt);
  const double t = adaptive_threshold(map);
  long inter = 0;
  long uni = 0;
  long positives = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const bool pred = map.data[i] >= t;
    const bool truth = gt.data[i] != 0;
    positives += truth;
    inter += pred && truth;
    uni += pred || truth;
  }
  if (positives == 0) throw Error(ErrorCode::EmptyGroundTruth, "ground truth has no salient pixel");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MetricReport evaluate_image(const GrayMap& map, const Mask& gt) {
  MetricReport r = f_measure(map, gt);
  r.auc = auc(map, gt);
  r.mor = mor(map, gt);
  return r;
}

bool PrAccumulator::add(const GrayMap& map, const Mask& gt) {
  check_pair(map, gt);
  const Histograms h = histograms(map, gt);
  if (h.n_fg == 0) return false;
  long tp = 0;
  long fp = 0;
  for (int t = 255; t >= 0; --t) {
    tp += h.fg[static_cast<std::size_t>(t)];
    fp += h.bg[static_cast<std::size_t>(t)];
    precision_[static_cast<std::size_t>(t)] += tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
    recall_[static_cast<std::size_t>(t)] += static_cast<double>(tp) / h.n_fg;
  }
  ++count_;
  return true;
}

void PrAccumulator::merge(const PrAccumulator& other) {
  for (std::size_t t = 0; t < 256; ++t) {
    precision_[t] += other.precision_[t];
    recall_[t] += other.recall_[t];
  }
  count_ += other.count_;
}

std::pair<double, double> PrAccumulator::at(int threshold) const {
  if (count_ == 0) return {0.0, 0.0};
  const auto t = static_cast<std::size_t>(threshold);
  return {precision_[t] / count_, recall_[t] / count_};
}

CurveSeries PrAccumulator::curve() const {
  CurveSeries c;
  c.kind = CurveKind::PR;
  c.n_samples_averaged = count_;
  if (count_ == 0) return c;
  for (int t = 0; t < 256; ++t) {
    const auto [p, r] = at(t);
    c.points.emplace_back(r, p);
  }
  std::stable_sort(c.points.begin(), c.points.end());
  return c;
}

CurveSeries pr_curve(std::span<const GrayMap> maps, std::span<const Mask> gts) {
  if (maps.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "one ground truth per map expected");
  PrAccumulator acc;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!acc.add(maps[i], gts[i])) std::cerr << "warning: image " << i << " has empty ground truth, skipped\n";
  }
  return acc.curve();
}

bool MetricAccumulator::add(const GrayMap& map, const Mask& gt) {
  try {
    const MetricReport r = evaluate_image(map, gt);
    sum_.precision += r.precision;
    sum_.recall += r.recall;
    sum_.auc += r.auc;
    sum_.mor += r.mor;
    ++count_;
    return true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyGroundTruth) throw;
    return false;
  }
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
  sum_.precision += other.sum_.precision;
  sum_.recall += other.sum_.recall;
  sum_.auc += other.sum_.auc;
  sum_.mor += other.sum_.mor;
  count_ += other.count_;
}

MetricReport MetricAccumulator::mean() const {
  MetricReport r;
  if (count_ == 0) return r;
  r.precision = sum_.precision / count_;
  r.recall = sum_.recall / count_;
  r.auc = sum_.auc / count_;
  r.mor = sum_.mor / count_;
  r.f_measure = f_beta(r.precision, r.recall);
  return r;
}

MetricReport evaluate_dataset(std::span<const GrayMap> maps, std::span<const Mask> gts) {
  if (maps.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "one ground truth per map expected");
  MetricAccumulator acc;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!acc.add(maps[i], gts[i])) std::cerr << "warning: image " << i << " has empty ground truth, skipped\n";
  }
  return acc.mean();
}

Vector binarize(const Vector& x, double threshold) {
  Vector out(x.size());
  const double lo = x.size() ? x.minCoeff() : 0.0;
  const double hi = x.size() ? x.maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out(i) = hi > lo ? ((x(i) - lo) / (hi - lo) >= threshold ? 1.0 : 0.0) : (x(i) > 0.0 ? 1.0 : 0.0);
  }
  return out;
}

Vector nnls(const Matrix& a, const Vector& b, int max_iterations) {
  const Eigen::Index n = a.cols();
  if (a.rows() != b.size()) throw Error(ErrorCode::ShapeMismatch, "nnls: rows of A differ from b");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n + 10);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * std::max<double>(1.0, a.cwiseAbs().colwise().sum().maxCoeff()) *
                     static_cast<double>(std::max(a.rows(), n));

  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Vector w = a.transpose() * (b - a * x);

  auto solve_passive = [&](Vector& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Matrix sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Vector zp = sub.colPivHouseholderQr().solve(b);
    z = Vector::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };

  for (int outer = 0; outer < max_iterations; ++outer) {
    Eigen::Index t = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        t = j;
      }
    }
    if (t < 0) break;
    passive[static_cast<std::size_t>(t)] = true;

    Vector z;
    for (int inner = 0; inner < max_iterations; ++inner) {
      solve_passive(z);
      bool feasible = true;
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= tol) {
          feasible = false;
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
        }
      }
      if (feasible) break;
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) x(j) = passive[static_cast<std::size_t>(j)] ? z(j) : 0.0;
    w = a.transpose() * (b - a * x);
  }
  return x;
}

OmpResult adapted_omp(const Matrix& a_inv, const Vector& gt_nodes, const OmpParams& params) {
  const Eigen::Index n = gt_nodes.size();
  if (a_inv.rows() != n || a_inv.cols() != n) throw Error(ErrorCode::ShapeMismatch, "dictionary must be N x N");
  std::vector<int> remaining;
  for (Eigen::Index i = 0; i < n; ++i)
    if (gt_nodes(i) > 0.5) remaining.push_back(static_cast<int>(i));
  if (remaining.empty()) throw Error(ErrorCode::EmptyForeground, "ground truth has no foreground node");

  const Vector gt = gt_nodes.unaryExpr([](double v) { return v > 0.5 ? 1.0 : 0.0; });
  const double fg_count = static_cast<double>(remaining.size());
  const double gt_norm = std::sqrt(fg_count);

  OmpResult out;
  out.seed = Vector::Zero(n);
  Vector res = gt;
  out.trace.push_back({0.0, (gt_norm - res.norm()) / gt_norm});

  for (int it = 0; it < params.max_iterations && !remaining.empty(); ++it) {
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      const double score = std::abs(res.dot(a_inv.col(remaining[k])));
      if (score > best) {
        best = score;
        pick = k;
      }
    }
    out.selected.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));

    Matrix sub(n, static_cast<Eigen::Index>(out.selected.size()));
    for (std::size_t k = 0; k < out.selected.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a_inv.col(out.selected[k]);
    const Vector coef = nnls(sub, gt);
    out.seed.setZero();
    for (std::size_t k = 0; k < out.selected.size(); ++k) out.seed(out.selected[k]) = coef(static_cast<Eigen::Index>(k));
    out.ls_residual.push_back((gt - sub * coef).norm());

    res = gt - binarize(a_inv * out.seed, params.bin_threshold);
    const double nnz = static_cast<double>((out.seed.array() > 0.0).count());
    out.trace.push_back({100.0 * nnz / fg_count, (gt_norm - res.norm()) / gt_norm});
    if (res.norm() < params.stop_c) break;
  }
  return out;
}

std::vector<double> interpolate_trace(std::span<const OmpStep> trace) {
  std::vector<OmpStep> pts(trace.begin(), trace.end());
  std::stable_sort(pts.begin(), pts.end(), [](const OmpStep& a, const OmpStep& b) { return a.r < b.r; });
  // Equal r: the later iteration wins.
  std::vector<OmpStep> uniq;
  for (const OmpStep& p : pts) {
    if (!uniq.empty() && uniq.back().r == p.r) {
      uniq.back() = p;
    } else {
      uniq.push_back(p);
    }
  }
  std::vector<double> out(100, 0.0);
  if (uniq.empty()) return out;
  for (int g = 1; g <= 100; ++g) {
    const double r = g;
    if (r <= uniq.front().r) {
      out[static_cast<std::size_t>(g - 1)] = uniq.front().a;
    } else if (r >= uniq.back().r) {
      out[static_cast<std::size_t>(g - 1)] = uniq.back().a;
    } else {
      std::size_t k = 1;
      while (uniq[k].r < r) ++k;
      const OmpStep& lo = uniq[k - 1];
      const OmpStep& hi = uniq[k];
      out[static_cast<std::size_t>(g - 1)] = lo.a + (hi.a - lo.a) * (r - lo.r) / (hi.r - lo.r);
    }
  }
  return out;
}

CurveSeries cose_curve(std::span<const std::vector<OmpStep>> traces) {
  CurveSeries c;
  c.kind = CurveKind::COSE;
  c.n_samples_averaged = static_cast<int>(traces.size());
  std::vector<double> sum(100, 0.0);
  for (const auto& t : traces) {
    const auto v = interpolate_trace(t);
    for (std::size_t g = 0; g < 100; ++g) sum[g] += v[g];
  }
  for (std::size_t g = 0; g < 100; ++g) {
    c.points.emplace_back(static_cast<double>(g + 1), traces.empty() ? 0.0 : sum[g] / static_cast<double>(traces.size()));
  }
  return c;
}

std::string curve_header(CurveKind kind) {
  switch (kind) {
    case CurveKind::PR: return "recall,precision";
    case CurveKind::ROC: return "fpr,tpr";
    case CurveKind::COSE: return "seed_percent,accuracy";
  }
  return "x,y";
}

std::string curve_csv(const CurveSeries& curve) {
  std::string out = curve_header(curve.kind) + "\n";
  for (const auto& [x, y] : curve.points) out += fmt(x) + "," + fmt(y) + "\n";
  return out;
}

void write_curve_csv(const std::filesystem::path& path, const CurveSeries& curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << curve_csv(curve);
}

void write_metrics_json(const std::filesystem::path& path, const MetricReport& report,
                        const std::string& settings_hash) {
  nlohmann::json j;
  j["settings_hash"] = settings_hash;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f_measure"] = report.f_measure;
  j["auc"] = report.auc;
  j["mor"] = report.mor;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace superdiff
