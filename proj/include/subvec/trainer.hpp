#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subvec/model.hpp"

namespace subvec {

struct TrainReport {
  int epochs_completed = 0;
  std::uint64_t pair_updates = 0;
  // Running mean of the observed-pair loss, measured as each pair is visited.
  std::vector<double> mean_epoch_loss;
  std::vector<double> epoch_seconds;
  double final_learning_rate = 0;
  // Frozen-parameter sweeps over the counting stream's observed pairs.
  double initial_mean_loss = 0;
  double final_mean_loss = 0;
  std::uint64_t observed_pairs_per_sweep = 0;
};

struct TrainOutput {
  Model model;
  TrainReport report;
};

// Full pipeline: vocabulary, counting pass, PPMI, subword index, then
// epoch-wise SGD sweeps. The PPMI matrix is computed once and fixed.
TrainOutput train(std::span<const std::string> corpus_paths,
                  const TrainConfig& config, const SubwordSpec& spec,
                  const SegmentationTable* table = nullptr);

// Same pipeline starting from an already-loaded stream and vocabulary.
TrainOutput train_stream(const IdStream& stream, Vocabulary vocab,
                         const TrainConfig& config, const SubwordSpec& spec,
                         const SegmentationTable* table = nullptr);

// Mean reconstruction loss over the stream's observed pairs under frozen
// parameters.
double mean_sweep_loss(const FilteredStream& stream, const Params& params,
                       const SubwordIndex& index,
                       const ContextVocabulary& contexts,
                       const PpmiMatrix& targets);

}  // namespace subvec
