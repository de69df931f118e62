#include <algorithm>
#include <set>

#include "tlb/error.hpp"
#include "tlb/models.hpp"

namespace tlb {

Var cross_entropy_loss(const Var& log_probs, const LabelVector& labels) {
  std::vector<std::size_t> targets;
  targets.reserve(labels.size());
  for (NodeId a : labels) {
    if (a < 1 || static_cast<std::size_t>(a) > kNumClasses) {
      throw InputError("label " + std::to_string(a) + " outside 1.." + std::to_string(kNumClasses));
    }
    targets.push_back(static_cast<std::size_t>(a) - 1);
  }
  return ops::nll(log_probs, targets);
}

Var distillation_loss(const ForwardOutput& student, const ForwardOutput& teacher) {
  if (!student.encoder1_node_reps.defined() || !teacher.encoder1_node_reps.defined()) {
    throw ShapeError("distillation needs encoder-1 representations from Tri models");
  }
  const std::vector<Var> s{student.encoder1_node_reps, student.encoder1_video_reps};
  const std::vector<Var> t{teacher.encoder1_node_reps, teacher.encoder1_video_reps};
  const Var target = Var::constant(ops::concat_rows(t).value());
  return ops::mean_squared_distance(ops::concat_rows(s), target);
}

LabelVector predict_assignments(const Tensor& scores) {
  LabelVector out;
  const std::size_t r = scores.rows();
  out.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    const auto row = scores.row(i);
    // max_element keeps the first maximum, i.e. the smaller ID.
    out.push_back(static_cast<NodeId>(std::max_element(row.begin(), row.end()) - row.begin()) + 1);
  }
  return out;
}

LabelVector postprocess_skip_empty(const LabelVector& raw) {
  const std::set<NodeId> present(raw.begin(), raw.end());
  const std::vector<NodeId> sorted(present.begin(), present.end());
  LabelVector out;
  out.reserve(raw.size());
  for (NodeId a : raw) {
    out.push_back(static_cast<NodeId>(std::lower_bound(sorted.begin(), sorted.end(), a) - sorted.begin()) + 1);
  }
  return out;
}

LabelVector predict_sample(const Model& m, const TimelineSample& s) {
  const auto order = order_videos_by_release(s);
  const TimelineSample ordered = permute_sample(s, order);
  const ForwardOutput out = model_forward(ordered, m, ForwardMode{});
  const LabelVector refined = postprocess_skip_empty(predict_assignments(out.log_probs.value()));
  LabelVector stored(s.videos.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) stored[order[pos]] = refined[pos];
  return stored;
}

}  // namespace tlb
