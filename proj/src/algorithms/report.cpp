#include "catrl/algorithms/report.hpp"

#include <ostream>

#include "catrl/csv.hpp"
#include "catrl/errors.hpp"

namespace catrl::algorithms {

void Budget::validate() const {
  if (episodes == 0 && steps == 0) throw ConfigError("budget: set episodes or steps");
}

double TrainReport::mean_return() const {
  if (curve.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : curve) sum += p.ret;
  return sum / static_cast<double>(curve.size());
}

void write_curve_csv(std::ostream& out, const TrainReport& report) {
  out << (report.unit == CurveUnit::kEpisode ? "episode" : "step") << ",return,max_q_change\n";
  for (const auto& p : report.curve) {
    out << p.index << ',' << format_number(p.ret) << ',' << format_number(p.max_q_change)
        << '\n';
  }
}

void CurveBuilder::record(double reward, bool episode_end, const QTable& q) {
  ++steps_;
  running_ += reward;
  ++length_;
  const bool close = unit_ == CurveUnit::kStep || episode_end;
  if (episode_end) ++episodes_;
  if (!close) return;
  const std::size_t index = unit_ == CurveUnit::kStep ? steps_ - 1 : episodes_ - 1;
  curve_.push_back({index, running_, max_abs_difference(reference_, q), length_});
  reference_ = q;
  running_ = 0.0;
  length_ = 0;
}

}  // namespace catrl::algorithms
