#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cu3d/image.hpp"

namespace cu3d {

/// Instance-to-class tallies, 1-based on both axes.
struct VoteMatrix {
  int instances = 0;
  int classes = 0;
  std::vector<std::int32_t> tallies;

  VoteMatrix() = default;
  VoteMatrix(int num_instances, int num_classes)
      : instances(num_instances), classes(num_classes) {
    if (num_instances < 0 || num_classes < 0)
      throw InputError("vote matrix dimensions must be non-negative");
    tallies.assign(static_cast<std::size_t>(num_instances) * num_classes, 0);
  }

  std::int32_t at(int instance, int cls) const {
    return tallies[static_cast<std::size_t>(instance - 1) * classes + (cls - 1)];
  }
  std::int32_t& at(int instance, int cls) {
    return tallies[static_cast<std::size_t>(instance - 1) * classes + (cls - 1)];
  }
  bool same_shape(const VoteMatrix& o) const {
    return instances == o.instances && classes == o.classes;
  }
};

/// One view's votes: each instance present in the view votes once for the
/// class it overlaps most (ties go to the smallest class id). Instances that
/// overlap only unlabeled pixels abstain.
VoteMatrix vote_single_view(const InstanceMap& instances, const SemanticMap& classes,
                            int num_instances, int num_classes);

/// Element-wise sum; all matrices must share shape.
VoteMatrix aggregate_votes(std::span<const VoteMatrix> votes);

/// Row argmax per instance (ties go to the smallest class id); an all-zero
/// row maps to class 0 (unknown). Index 0 of the result is unused.
std::vector<std::int32_t> assign_classes(const VoteMatrix& votes);

/// aggregate_votes followed by assign_classes.
std::vector<std::int32_t> aggregate_and_assign(std::span<const VoteMatrix> votes);

}  // namespace cu3d
