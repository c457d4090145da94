#include "cu3d/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace cu3d {

namespace {

void check_shapes(const ProbabilityMap& pred, const InstanceMap& label) {
  if (pred.height != label.height || pred.width != label.width)
    throw DimensionError("cost: prediction and label shapes differ");
  if (pred.slots < 1) throw InputError("cost: prediction has no slots");
}

}  // namespace

CostMatrix siou_cost(const ProbabilityMap& pred, const InstanceMap& label) {
  check_shapes(pred, label);
  const int num_slots = pred.slots - 1;           // u in [1, slots-1]
  const int num_labels = max_value(label);        // t in [1, T]
  CostMatrix cost(num_slots, num_labels);

  std::vector<double> sum_y(num_slots, 0.0);
  std::vector<double> sum_m(num_labels, 0.0);
  std::vector<double> inter(static_cast<std::size_t>(num_slots) * num_labels, 0.0);

  for (int v = 0; v < label.height; ++v) {
    for (int u = 0; u < label.width; ++u) {
      const std::int32_t t = label.at(v, u);
      for (int s = 1; s <= num_slots; ++s) {
        const double y = pred.at(v, u, s);
        sum_y[s - 1] += y;
        if (t >= 1) inter[static_cast<std::size_t>(s - 1) * num_labels + (t - 1)] += y;
      }
      if (t >= 1) sum_m[t - 1] += 1.0;
    }
  }

  for (int r = 0; r < num_slots; ++r) {
    for (int c = 0; c < num_labels; ++c) {
      const double i = inter[static_cast<std::size_t>(r) * num_labels + c];
      const double denom = sum_y[r] + sum_m[c] - i;
      cost.at(r, c) = denom == 0.0 ? 0.0 : -i / denom;
    }
  }
  return cost;
}

CostMatrix ce_cost(const ProbabilityMap& pred, const InstanceMap& label) {
  check_shapes(pred, label);
  constexpr double kEps = 1e-7;
  const int num_slots = pred.slots - 1;
  const int num_labels = max_value(label);
  CostMatrix cost(num_slots, num_labels);

  const double j_count = static_cast<double>(label.size());
  if (j_count == 0) return cost;

  // entry(u,t) = -1/J [ sum_{p in t} log y  +  sum_{p not in t} log(1-y) ]
  //            = -1/J [ sum_{p in t} (log y - log(1-y)) + sum_all log(1-y) ]
  std::vector<double> total_log1my(num_slots, 0.0);
  std::vector<double> mask_logit(static_cast<std::size_t>(num_slots) * num_labels, 0.0);

  for (int v = 0; v < label.height; ++v) {
    for (int u = 0; u < label.width; ++u) {
      const std::int32_t t = label.at(v, u);
      for (int s = 1; s <= num_slots; ++s) {
        const double y = std::clamp(static_cast<double>(pred.at(v, u, s)), kEps, 1.0 - kEps);
        total_log1my[s - 1] += std::log1p(-y);
        if (t >= 1)
          mask_logit[static_cast<std::size_t>(s - 1) * num_labels + (t - 1)] +=
              std::log(y) - std::log1p(-y);
      }
    }
  }

  for (int r = 0; r < num_slots; ++r)
    for (int c = 0; c < num_labels; ++c)
      cost.at(r, c) =
          -(mask_logit[static_cast<std::size_t>(r) * num_labels + c] + total_log1my[r]) / j_count;
  return cost;
}

std::vector<int> hungarian_assign(const CostMatrix& cost) {
  const int num_rows = cost.rows;  // slots
  const int num_cols = cost.cols;  // labels, each must receive a distinct row
  if (num_cols > num_rows)
    throw CapacityError("hungarian_assign: more labels than instance slots");
  for (double v : cost.values)
    if (!std::isfinite(v)) throw InputError("hungarian_assign: cost entries must be finite");
  if (num_cols == 0) return {};

  // Potentials formulation over the transposed matrix: the small side (labels)
  // plays the rows so every label ends up assigned.
  const int n = num_cols, m = num_rows;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pot_u(n + 1, 0.0), pot_v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);

  auto a = [&](int i, int j) { return cost.at(j - 1, i - 1); };  // i: label, j: slot

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - pot_u[i0] - pot_v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          pot_u[match[j]] += delta;
          pot_v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_of_col(num_cols, -1);
  for (int j = 1; j <= m; ++j)
    if (match[j] > 0) row_of_col[match[j] - 1] = j - 1;
  return row_of_col;
}

InstanceMap overlap_fill(const InstanceMap& label, const InstanceMap& rendered,
                         std::int32_t& next_fresh_id) {
  if (!label.same_shape(rendered))
    throw DimensionError("overlap_fill: label and rendered shapes differ");

  // overlap counts per (label id, rendered id), rendered background excluded
  std::map<std::int32_t, std::map<std::int32_t, std::size_t>> counts;
  for (std::size_t i = 0; i < label.size(); ++i) {
    const std::int32_t t = label.pixels[i];
    if (t < 1) continue;
    counts.try_emplace(t);
    const std::int32_t u = rendered.pixels[i];
    if (u >= 1) counts[t][u] += 1;
  }

  std::map<std::int32_t, std::int32_t> fill_id;
  for (const auto& [t, per_u] : counts) {
    std::int32_t best_u = 0;
    std::size_t best_count = 0;
    for (const auto& [u, c] : per_u) {
      if (c > best_count) {  // ordered map: ties keep the smallest id
        best_count = c;
        best_u = u;
      }
    }
    fill_id[t] = best_count > 0 ? best_u : next_fresh_id++;
  }

  InstanceMap out(label.height, label.width, 0);
  for (std::size_t i = 0; i < label.size(); ++i) {
    const std::int32_t t = label.pixels[i];
    if (t >= 1) out.pixels[i] = fill_id[t];
  }
  return out;
}

}  // namespace cu3d
