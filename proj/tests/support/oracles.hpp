// Independent reference implementations used to check the library. These
// deliberately take the slow, obvious route (exhaustive scans, per-element
// loops) and share no code with the implementations they verify.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "cu3d/geometry.hpp"

namespace oracle {

/// O(n^2) fixed-radius nearest-neighbor scan mirroring the contract of
/// radius_match: iterate the smaller cloud, match each point independently.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> radius_match(
    const cu3d::LabeledPointCloud& a, const cu3d::LabeledPointCloud& b, double tau_d) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (a.empty() || b.empty()) return pairs;
  const bool a_is_query = a.size() <= b.size();
  const auto& query = a_is_query ? a : b;
  const auto& data = a_is_query ? b : a;
  for (std::uint32_t i = 0; i < query.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_j = 0;
    for (std::uint32_t j = 0; j < data.size(); ++j) {
      const double dx = query.points[i].x - data.points[j].x;
      const double dy = query.points[i].y - data.points[j].y;
      const double dz = query.points[i].z - data.points[j].z;
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best < tau_d * tau_d) {
      if (a_is_query)
        pairs.emplace_back(i, best_j);
      else
        pairs.emplace_back(best_j, i);
    }
  }
  return pairs;
}

/// Count of distinct occupied voxels via a plain key set.
inline std::size_t occupied_voxels(const cu3d::LabeledPointCloud& cloud, double voxel) {
  std::set<std::tuple<long long, long long, long long>> keys;
  for (const auto& p : cloud.points)
    keys.insert({static_cast<long long>(std::floor(p.x / voxel)),
                 static_cast<long long>(std::floor(p.y / voxel)),
                 static_cast<long long>(std::floor(p.z / voxel))});
  return keys.size();
}

inline double comb2(long double n) { return n < 2 ? 0.0L : static_cast<double>(n * (n - 1) / 2); }

/// Adjusted Rand index straight from the contingency table.
inline double ari(const std::vector<std::int32_t>& x, const std::vector<std::int32_t>& y) {
  std::map<std::pair<std::int32_t, std::int32_t>, long long> joint;
  std::map<std::int32_t, long long> ax, by;
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[{x[i], y[i]}] += 1;
    ax[x[i]] += 1;
    by[y[i]] += 1;
  }
  long double sum_ij = 0, sum_a = 0, sum_b = 0;
  for (const auto& [k, c] : joint) sum_ij += comb2(c);
  for (const auto& [k, c] : ax) sum_a += comb2(c);
  for (const auto& [k, c] : by) sum_b += comb2(c);
  const long double total = comb2(static_cast<long double>(x.size()));
  const long double expected = sum_a * sum_b / total;
  const long double denom = (sum_a + sum_b) / 2 - expected;
  return static_cast<double>((sum_ij - expected) / denom);
}

/// Mutual information normalized by the mean of the entropies.
inline double nmi(const std::vector<std::int32_t>& x, const std::vector<std::int32_t>& y) {
  std::map<std::pair<std::int32_t, std::int32_t>, long long> joint;
  std::map<std::int32_t, long long> ax, by;
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[{x[i], y[i]}] += 1;
    ax[x[i]] += 1;
    by[y[i]] += 1;
  }
  const long double n = static_cast<long double>(x.size());
  long double mi = 0, ha = 0, hb = 0;
  for (const auto& [k, c] : joint)
    mi += (c / n) * std::log((c / n) / ((ax[k.first] / n) * (by[k.second] / n)));
  for (const auto& [k, c] : ax) ha -= (c / n) * std::log(c / n);
  for (const auto& [k, c] : by) hb -= (c / n) * std::log(c / n);
  return static_cast<double>(mi / ((ha + hb) / 2));
}

/// Instance AP at one IoU threshold, built on std::set intersections and the
/// "max precision to the right of each true positive" formulation.
inline double average_precision(const std::vector<std::int32_t>& pred,
                                const std::vector<std::int32_t>& gt,
                                const std::map<std::int32_t, double>& confidences,
                                double threshold) {
  std::map<std::int32_t, std::set<std::size_t>> pred_masks, gt_masks;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= 1) pred_masks[pred[i]].insert(i);
    if (gt[i] >= 1) gt_masks[gt[i]].insert(i);
  }
  if (gt_masks.empty()) return pred_masks.empty() ? 1.0 : 0.0;
  if (pred_masks.empty()) return 0.0;

  std::vector<std::int32_t> order;
  for (const auto& [id, mask] : pred_masks) order.push_back(id);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t l, std::int32_t r) {
    const double cl = confidences.count(l) ? confidences.at(l) : 1.0;
    const double cr = confidences.count(r) ? confidences.at(r) : 1.0;
    if (cl != cr) return cl > cr;
    return l < r;
  });

  auto iou = [&](std::int32_t p, std::int32_t g) {
    std::size_t inter = 0;
    for (const std::size_t e : pred_masks[p])
      if (gt_masks[g].count(e)) ++inter;
    return static_cast<double>(inter) /
           static_cast<double>(pred_masks[p].size() + gt_masks[g].size() - inter);
  };

  std::set<std::int32_t> taken;
  std::vector<int> tp;
  for (const std::int32_t p : order) {
    double best = 0;
    std::int32_t best_g = 0;
    bool found = false;
    for (const auto& [g, mask] : gt_masks) {
      if (taken.count(g)) continue;
      const double v = iou(p, g);
      if (v >= threshold && v > best) {
        best = v;
        best_g = g;
        found = true;
      }
    }
    if (found) taken.insert(best_g);
    tp.push_back(found ? 1 : 0);
  }

  std::vector<double> precision(tp.size());
  int cum = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    cum += tp[i];
    precision[i] = static_cast<double>(cum) / static_cast<double>(i + 1);
  }
  double ap = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (!tp[i]) continue;
    double best = 0;
    for (std::size_t j = i; j < tp.size(); ++j) best = std::max(best, precision[j]);
    ap += best / static_cast<double>(gt_masks.size());
  }
  return ap;
}

/// Per-class IoU/accuracy with explicit pixel sets.
inline std::pair<double, double> miou_macc(const std::vector<std::int32_t>& pred,
                                           const std::vector<std::int32_t>& gt, int num_classes) {
  double sum_iou = 0, sum_acc = 0;
  int present = 0;
  for (int c = 1; c <= num_classes; ++c) {
    std::size_t inter = 0, uni = 0, total_gt = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool in_p = pred[i] == c, in_g = gt[i] == c;
      if (in_p && in_g) ++inter;
      if (in_p || in_g) ++uni;
      if (in_g) ++total_gt;
    }
    if (total_gt == 0) continue;
    ++present;
    sum_iou += static_cast<double>(inter) / static_cast<double>(uni);
    sum_acc += static_cast<double>(inter) / static_cast<double>(total_gt);
  }
  if (present == 0) return {0.0, 0.0};
  return {sum_iou / present, sum_acc / present};
}

}  // namespace oracle
