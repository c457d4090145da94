#include "cu3d/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace cu3d {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<std::int32_t, std::int32_t>& p) const {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.first)) << 32) ^
           static_cast<std::uint32_t>(p.second);
  }
};

using Contingency = std::unordered_map<std::pair<std::int32_t, std::int32_t>, std::size_t, PairHash>;

void check_universe(const InstancePartition& pred, const InstancePartition& gt) {
  if (pred.labels.size() != gt.labels.size())
    throw DimensionError("metric: partitions must share the element universe");
}

double comb2(double n) { return n < 2 ? 0.0 : n * (n - 1) / 2.0; }

/// Same equivalence relation on the universe (labels may be renamed).
bool identical_partitions(const InstancePartition& a, const InstancePartition& b) {
  std::unordered_map<std::int32_t, std::int32_t> fwd, bwd;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const std::int32_t la = a.labels[i], lb = b.labels[i];
    auto itf = fwd.try_emplace(la, lb).first;
    if (itf->second != lb) return false;
    auto itb = bwd.try_emplace(lb, la).first;
    if (itb->second != la) return false;
  }
  return true;
}

struct ClusterStats {
  Contingency joint;
  std::unordered_map<std::int32_t, std::size_t> sizes_a, sizes_b;
};

ClusterStats cluster_stats(const InstancePartition& a, const InstancePartition& b) {
  ClusterStats s;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    s.joint[{a.labels[i], b.labels[i]}] += 1;
    s.sizes_a[a.labels[i]] += 1;
    s.sizes_b[b.labels[i]] += 1;
  }
  return s;
}

}  // namespace

InstancePartition partition_from_maps(std::span<const InstanceMap> maps) {
  InstancePartition p;
  std::size_t total = 0;
  for (const InstanceMap& m : maps) total += m.size();
  p.labels.reserve(total);
  for (const InstanceMap& m : maps) p.labels.insert(p.labels.end(), m.pixels.begin(), m.pixels.end());
  return p;
}

namespace {

struct ApProblem {
  struct PredEntry {
    std::int32_t id;
    double conf;
    std::size_t size;
  };
  std::vector<PredEntry> ranked;                          // conf desc, id asc
  std::vector<std::pair<std::int32_t, std::size_t>> gts;  // id, size (id asc)
  Contingency inter;

  double iou(std::int32_t pid, std::size_t psize, std::int32_t gid, std::size_t gsize) const {
    auto it = inter.find({pid, gid});
    const double i = it == inter.end() ? 0.0 : static_cast<double>(it->second);
    return i == 0.0 ? 0.0 : i / (static_cast<double>(psize) + static_cast<double>(gsize) - i);
  }
};

ApProblem build_ap_problem(const InstancePartition& pred, const InstancePartition& gt) {
  ApProblem prob;
  std::unordered_map<std::int32_t, std::size_t> pred_sizes, gt_sizes;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const std::int32_t p = pred.labels[i], g = gt.labels[i];
    if (p >= 1) pred_sizes[p] += 1;
    if (g >= 1) gt_sizes[g] += 1;
    if (p >= 1 && g >= 1) prob.inter[{p, g}] += 1;
  }
  for (const auto& [id, size] : pred_sizes) {
    auto it = pred.confidences.find(id);
    prob.ranked.push_back({id, it == pred.confidences.end() ? 1.0 : it->second, size});
  }
  std::sort(prob.ranked.begin(), prob.ranked.end(), [](const auto& a, const auto& b) {
    if (a.conf != b.conf) return a.conf > b.conf;
    return a.id < b.id;
  });
  for (const auto& [id, size] : gt_sizes) prob.gts.emplace_back(id, size);
  std::sort(prob.gts.begin(), prob.gts.end());
  return prob;
}

double ap_from_problem(const ApProblem& prob, double threshold) {
  if (prob.gts.empty()) return prob.ranked.empty() ? 1.0 : 0.0;
  if (prob.ranked.empty()) return 0.0;

  std::unordered_map<std::int32_t, bool> gt_matched;
  std::vector<char> tp(prob.ranked.size(), 0);
  for (std::size_t r = 0; r < prob.ranked.size(); ++r) {
    const auto& p = prob.ranked[r];
    double best_iou = 0.0;
    std::int32_t best_gt = 0;
    bool found = false;
    for (const auto& [gid, gsize] : prob.gts) {
      if (gt_matched[gid]) continue;
      const double iou = prob.iou(p.id, p.size, gid, gsize);
      if (iou >= threshold && iou > best_iou) {  // gts scanned ascending: ties keep smaller id
        best_iou = iou;
        best_gt = gid;
        found = true;
      }
    }
    if (found) {
      gt_matched[best_gt] = true;
      tp[r] = 1;
    }
  }

  const double num_gt = static_cast<double>(prob.gts.size());
  std::vector<double> precision(prob.ranked.size()), recall(prob.ranked.size());
  std::size_t cum_tp = 0;
  for (std::size_t r = 0; r < prob.ranked.size(); ++r) {
    cum_tp += tp[r];
    precision[r] = static_cast<double>(cum_tp) / static_cast<double>(r + 1);
    recall[r] = static_cast<double>(cum_tp) / num_gt;
  }
  for (std::size_t r = precision.size() - 1; r-- > 0;)
    precision[r] = std::max(precision[r], precision[r + 1]);

  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t r = 0; r < precision.size(); ++r) {
    ap += (recall[r] - prev_recall) * precision[r];
    prev_recall = recall[r];
  }
  return ap;
}

}  // namespace

double average_precision_at(const InstancePartition& pred, const InstancePartition& gt,
                            double iou_threshold) {
  check_universe(pred, gt);
  return ap_from_problem(build_ap_problem(pred, gt), iou_threshold);
}

ApResult average_precision(const InstancePartition& pred, const InstancePartition& gt,
                           std::span<const double> map_thresholds) {
  check_universe(pred, gt);
  const ApProblem prob = build_ap_problem(pred, gt);
  std::vector<double> grid(map_thresholds.begin(), map_thresholds.end());
  if (grid.empty())
    for (double t = 0.50; t < 0.951; t += 0.05) grid.push_back(t);
  ApResult res;
  for (const double t : grid) res.ap += ap_from_problem(prob, t);
  res.ap /= static_cast<double>(grid.size());
  res.ap50 = ap_from_problem(prob, 0.50);
  res.ap25 = ap_from_problem(prob, 0.25);
  return res;
}

double ari(const InstancePartition& pred, const InstancePartition& gt) {
  check_universe(pred, gt);
  const double n = static_cast<double>(pred.labels.size());
  if (comb2(n) == 0.0) return 1.0;  // zero or one element: nothing to disagree on

  const ClusterStats s = cluster_stats(pred, gt);
  double sum_ij = 0, sum_a = 0, sum_b = 0;
  for (const auto& [key, c] : s.joint) sum_ij += comb2(static_cast<double>(c));
  for (const auto& [id, c] : s.sizes_a) sum_a += comb2(static_cast<double>(c));
  for (const auto& [id, c] : s.sizes_b) sum_b += comb2(static_cast<double>(c));

  const double expected = sum_a * sum_b / comb2(n);
  const double denom = 0.5 * (sum_a + sum_b) - expected;
  if (denom == 0.0) return identical_partitions(pred, gt) ? 1.0 : 0.0;
  return (sum_ij - expected) / denom;
}

double nmi(const InstancePartition& pred, const InstancePartition& gt) {
  check_universe(pred, gt);
  const double n = static_cast<double>(pred.labels.size());
  if (n == 0) return 1.0;

  const ClusterStats s = cluster_stats(pred, gt);
  double h_a = 0, h_b = 0, mi = 0;
  for (const auto& [id, c] : s.sizes_a) {
    const double p = c / n;
    h_a -= p * std::log(p);
  }
  for (const auto& [id, c] : s.sizes_b) {
    const double p = c / n;
    h_b -= p * std::log(p);
  }
  if (h_a == 0.0 || h_b == 0.0) return identical_partitions(pred, gt) ? 1.0 : 0.0;
  for (const auto& [key, c] : s.joint) {
    const double p = c / n;
    const double pa = s.sizes_a.at(key.first) / n;
    const double pb = s.sizes_b.at(key.second) / n;
    mi += p * std::log(p / (pa * pb));
  }
  return mi / (0.5 * (h_a + h_b));
}

std::pair<double, double> miou_macc(std::span<const SemanticMap> pred,
                                    std::span<const SemanticMap> gt, int num_classes) {
  if (pred.size() != gt.size()) throw DimensionError("miou_macc: view counts differ");
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!pred[i].same_shape(gt[i])) throw DimensionError("miou_macc: map shapes differ");

  std::vector<std::size_t> inter(num_classes + 1, 0), uni(num_classes + 1, 0),
      gt_count(num_classes + 1, 0);
  for (std::size_t v = 0; v < pred.size(); ++v) {
    for (std::size_t i = 0; i < pred[v].size(); ++i) {
      const std::int32_t p = pred[v].pixels[i], g = gt[v].pixels[i];
      if (g >= 1 && g <= num_classes) {
        gt_count[g] += 1;
        uni[g] += 1;
        if (p == g) inter[g] += 1;
      }
      if (p >= 1 && p <= num_classes && p != g) uni[p] += 1;
    }
  }

  double sum_iou = 0, sum_acc = 0;
  int present = 0;
  for (int c = 1; c <= num_classes; ++c) {
    if (gt_count[c] == 0) continue;
    ++present;
    sum_iou += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    sum_acc += static_cast<double>(inter[c]) / static_cast<double>(gt_count[c]);
  }
  if (present == 0) return {0.0, 0.0};
  return {sum_iou / present, sum_acc / present};
}

}  // namespace cu3d
