#include "cu3d/semantics.hpp"

#include <map>

namespace cu3d {

VoteMatrix vote_single_view(const InstanceMap& instances, const SemanticMap& classes,
                            int num_instances, int num_classes) {
  if (!instances.same_shape(classes))
    throw DimensionError("vote_single_view: instance and semantic map shapes differ");

  std::map<std::int32_t, std::map<std::int32_t, std::size_t>> overlap;  // instance -> class -> px
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::int32_t u = instances.pixels[i];
    if (u < 1) continue;
    if (u > num_instances) throw InputError("vote_single_view: instance id exceeds matrix size");
    overlap.try_emplace(u);
    const std::int32_t c = classes.pixels[i];
    if (c < 1) continue;
    if (c > num_classes) throw InputError("vote_single_view: class id exceeds matrix size");
    overlap[u][c] += 1;
  }

  VoteMatrix votes(num_instances, num_classes);
  for (const auto& [u, per_class] : overlap) {
    std::int32_t best_class = 0;
    std::size_t best_count = 0;
    for (const auto& [c, count] : per_class) {
      if (count > best_count) {  // ordered map: ties keep the smallest class
        best_count = count;
        best_class = c;
      }
    }
    if (best_class >= 1) votes.at(u, best_class) = 1;
  }
  return votes;
}

VoteMatrix aggregate_votes(std::span<const VoteMatrix> votes) {
  if (votes.empty()) return {};
  VoteMatrix sum(votes.front().instances, votes.front().classes);
  for (const VoteMatrix& v : votes) {
    if (!v.same_shape(sum)) throw DimensionError("aggregate_votes: vote matrix shapes differ");
    for (std::size_t i = 0; i < sum.tallies.size(); ++i) sum.tallies[i] += v.tallies[i];
  }
  return sum;
}

std::vector<std::int32_t> assign_classes(const VoteMatrix& votes) {
  std::vector<std::int32_t> assignment(votes.instances + 1, 0);
  for (int u = 1; u <= votes.instances; ++u) {
    std::int32_t best_class = 0, best_votes = 0;
    for (int c = 1; c <= votes.classes; ++c) {
      if (votes.at(u, c) > best_votes) {
        best_votes = votes.at(u, c);
        best_class = c;
      }
    }
    assignment[u] = best_class;
  }
  return assignment;
}

std::vector<std::int32_t> aggregate_and_assign(std::span<const VoteMatrix> votes) {
  return assign_classes(aggregate_votes(votes));
}

}  // namespace cu3d
