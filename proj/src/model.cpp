#include "subvec/model.hpp"

#include <algorithm>

namespace subvec {

NoiseDistribution::NoiseDistribution(std::span<const double> weights) {
  weight_by_id_.assign(weights.begin(), weights.end());
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (weights[c] <= 0) continue;
    total_ += weights[c];
    cum_.push_back(total_);
    ids_.push_back(static_cast<std::uint32_t>(c));
  }
  if (!(total_ > 0))
    throw DataError("noise distribution has no positive weight");
}

std::uint32_t NoiseDistribution::sample(SplitMix64& rng) const {
  double u = rng.next_unit() * total_;
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) --it;
  return ids_[static_cast<std::size_t>(it - cum_.begin())];
}

double NoiseDistribution::prob(std::uint32_t context_id) const {
  if (context_id >= weight_by_id_.size()) return 0;
  return weight_by_id_[context_id] / total_;
}

std::vector<std::uint32_t> sample_negatives(int k, const NoiseDistribution& dist,
                                            SplitMix64& rng) {
  std::vector<std::uint32_t> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(dist.sample(rng));
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw DataError("learning rate must be positive");
  if (negatives < 0) throw DataError("negative sample count must be >= 0");
  if (epochs < 0) throw DataError("epoch count must be >= 0");
  if (!(cds_alpha > 0 && cds_alpha <= 1))
    throw DataError("smoothing exponent must be in (0, 1]");
  if (window < 1) throw DataError("window must be >= 1");
  if (dims < 1) throw DataError("dimensionality must be >= 1");
  if (min_count < 1) throw DataError("min count must be >= 1");
  if (!std::isfinite(subsample_threshold))
    throw DataError("subsampling threshold must be finite (<= 0 disables)");
  if (threads < 1) throw DataError("thread count must be >= 1");
  if (!(lr_floor_ratio > 0 && lr_floor_ratio <= 1))
    throw DataError("learning rate floor ratio must be in (0, 1]");
}

}  // namespace subvec
