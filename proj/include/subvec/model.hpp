#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "subvec/cooccur.hpp"
#include "subvec/error.hpp"
#include "subvec/rng.hpp"
#include "subvec/subword.hpp"

namespace subvec {

template <class S>
using RowMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

// Learnable state: word vectors (rows of `word`), context vectors (rows of
// `context`, one per context id), shared subword vectors (rows of `subword`,
// bucket b lives in row b-1). Templated on scalar so the same update code
// runs in float for training and in double for numeric verification.
template <class S>
struct ParamsT {
  using Scalar = S;
  using Matrix = RowMatrix<S>;
  using Vector = RowVec<S>;

  Matrix word;
  Matrix context;
  Matrix subword;

  Eigen::Index dims() const { return word.cols(); }

  static ParamsT init(std::int32_t vocab_size, std::uint32_t context_size,
                      std::uint64_t buckets, int dims, std::uint64_t seed);
};

using Params = ParamsT<float>;

// Initialization draws each entry uniformly from [-0.5/d, +0.5/d], keyed by
// (seed, matrix, flat index) so any row can be regenerated independently.
template <class S>
void init_matrix_row(RowMatrix<S>& m, Eigen::Index row, std::uint64_t seed,
                     std::uint64_t tag) {
  const Eigen::Index d = m.cols();
  const double inv_d = 1.0 / static_cast<double>(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    std::uint64_t key = static_cast<std::uint64_t>(row) * d + c;
    m(row, c) = static_cast<S>((to_unit(mix64(seed, tag, key)) - 0.5) * inv_d);
  }
}

template <class S>
void init_matrix(RowMatrix<S>& m, std::uint64_t seed, std::uint64_t tag) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) init_matrix_row(m, r, seed, tag);
}

template <class S>
ParamsT<S> ParamsT<S>::init(std::int32_t vocab_size, std::uint32_t context_size,
                            std::uint64_t buckets, int dims,
                            std::uint64_t seed) {
  ParamsT<S> p;
  p.word.resize(vocab_size, dims);
  p.context.resize(static_cast<Eigen::Index>(context_size), dims);
  p.subword.resize(static_cast<Eigen::Index>(buckets), dims);
  init_matrix(p.word, seed, rng_stream::kInitWord);
  init_matrix(p.context, seed, rng_stream::kInitContext);
  init_matrix(p.subword, seed, rng_stream::kInitSubword);
  return p;
}

// In-vocabulary composition: (u_w + sum of subword rows) / (|S_w| + 1).
template <class S>
RowVec<S> compose_iv(const ParamsT<S>& p, std::int32_t word_id,
                     std::span<const std::uint32_t> buckets) {
  RowVec<S> v = p.word.row(word_id);
  for (std::uint32_t b : buckets) v += p.subword.row(b - 1);
  return v / static_cast<S>(buckets.size() + 1);
}

// Out-of-vocabulary composition: plain average of the subword rows.
template <class S>
RowVec<S> compose_oov(const ParamsT<S>& p,
                      std::span<const std::uint32_t> buckets) {
  if (buckets.empty())
    throw DataError("word has no subwords, no representation can be composed");
  RowVec<S> v = RowVec<S>::Zero(p.dims());
  for (std::uint32_t b : buckets) v += p.subword.row(b - 1);
  return v / static_cast<S>(buckets.size());
}

// Half squared reconstruction error of one (word, context) cell.
template <class S>
double loss_pair(const RowVec<S>& composed, const ParamsT<S>& p,
                 std::uint32_t context_id, double target) {
  double g = static_cast<double>(composed.dot(p.context.row(context_id))) -
             target;
  return 0.5 * g * g;
}

// Cumulative-weight sampler over the smoothed context distribution.
// Zero-weight contexts are excluded, so the cumulative array is strictly
// increasing.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(std::span<const double> weights);

  std::uint32_t sample(SplitMix64& rng) const;
  double total() const { return total_; }
  std::size_t support() const { return ids_.size(); }
  double prob(std::uint32_t context_id) const;

 private:
  std::vector<double> cum_;
  std::vector<std::uint32_t> ids_;
  std::vector<double> weight_by_id_;
  double total_ = 0;
};

std::vector<std::uint32_t> sample_negatives(int k, const NoiseDistribution& dist,
                                            SplitMix64& rng);

struct TrainConfig {
  double learning_rate = 0.025;
  int negatives = 5;
  int epochs = 5;
  double cds_alpha = 0.75;
  int window = 2;
  bool positional = true;
  int dims = 300;
  std::uint64_t min_count = 100;
  double subsample_threshold = 1e-5;
  bool shared_subsample_stream = false;
  std::uint64_t seed = 1;
  int threads = 1;
  // Linear decay floor: the rate ends at learning_rate * lr_floor_ratio.
  double lr_floor_ratio = 1e-4;

  void validate() const;
};

// One stochastic update for an observed pair plus its negative samples.
// The composed vector and every pair residual are evaluated at the entry
// state, then all rows are moved at once: the applied step is exactly
// -lr times the gradient of the summed pair losses. Touches only row
// `word_id`, the subword rows of `buckets`, and the context rows involved.
// Returns the observed pair's loss at entry. Throws NumericError on a
// non-finite residual.
template <class S>
double sgd_step(ParamsT<S>& p, std::int32_t word_id,
                std::span<const std::uint32_t> buckets,
                std::uint32_t observed_context,
                std::span<const std::uint32_t> negatives,
                const PpmiMatrix& targets, S lr) {
  using Vector = typename ParamsT<S>::Vector;
  const Vector composed = compose_iv(p, word_id, buckets);
  Vector acc = Vector::Zero(p.dims());

  const std::size_t pairs = 1 + negatives.size();
  std::vector<std::pair<std::uint32_t, S>> residuals;
  residuals.reserve(pairs);

  double observed_loss = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    std::uint32_t c = i == 0 ? observed_context : negatives[i - 1];
    S g = composed.dot(p.context.row(c)) -
          static_cast<S>(targets.value(static_cast<std::uint32_t>(word_id), c));
    if (!std::isfinite(static_cast<double>(g)))
      throw NumericError("non-finite gradient");
    if (i == 0) observed_loss = 0.5 * static_cast<double>(g) * g;
    acc += g * p.context.row(c);
    residuals.emplace_back(c, g);
  }

  for (const auto& [c, g] : residuals) p.context.row(c) -= lr * g * composed;
  const S scale = lr / static_cast<S>(buckets.size() + 1);
  p.word.row(word_id) -= scale * acc;
  for (std::uint32_t b : buckets) p.subword.row(b - 1) -= scale * acc;
  return observed_loss;
}

// Composed vectors for the whole vocabulary, one row per word.
template <class S>
RowMatrix<S> compose_all(const ParamsT<S>& p, const SubwordIndex& index) {
  RowMatrix<S> out(index.words(), p.dims());
  for (std::int32_t w = 0; w < index.words(); ++w)
    out.row(w) = compose_iv(p, w, index.buckets_of(w));
  return out;
}

// A trained model: everything needed to compose vectors for IV and OOV words.
struct Model {
  Params params;
  Vocabulary vocab;
  SubwordIndex subwords;
  SubwordSpec spec;
  int window = 2;
  bool positional = true;
  std::uint64_t seed = 1;

  RowVec<float> vector_of(std::int32_t word_id) const {
    return compose_iv(params, word_id, subwords.buckets_of(word_id));
  }

  // Composes an OOV vector from hashed subwords; IV words go through
  // vector_of instead. Throws DataError when no subwords exist (mode none,
  // or a strict morpheme miss).
  RowVec<float> oov_vector(std::string_view word,
                           const SegmentationTable* table = nullptr) const {
    if (spec.mode == SubwordMode::kNone)
      throw DataError("word '" + std::string(word) +
                      "' is out of vocabulary and subwords are disabled");
    return compose_oov(params, subwords_of(word, spec, table));
  }
};

}  // namespace subvec
