#include "subvec/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

namespace subvec {

namespace {

struct LrSchedule {
  double initial;
  double floor_ratio;
  std::uint64_t planned_updates;

  double at(std::uint64_t step) const {
    if (planned_updates == 0) return initial;
    double progress = std::min(1.0, static_cast<double>(step) /
                                        static_cast<double>(planned_updates));
    return initial * (1.0 - (1.0 - floor_ratio) * progress);
  }
};

struct SweepResult {
  double loss_sum = 0;
  std::uint64_t steps = 0;
  double last_lr = 0;
};

// One training sweep over [begin, end) of a segment. Each observed
// (target, context) pair gets one sgd_step carrying k fresh negatives.
SweepResult sweep_range(Params& params, const FilteredStream& stream,
                        std::size_t seg_begin, std::size_t seg_end,
                        std::size_t begin, std::size_t end,
                        const ContextVocabulary& contexts,
                        const PpmiMatrix& targets, const SubwordIndex& index,
                        const NoiseDistribution& noise, int negatives,
                        const LrSchedule& schedule,
                        std::atomic<std::uint64_t>& global_step,
                        SplitMix64& rng) {
  SweepResult result;
  const int window = contexts.window;
  for (std::size_t i = begin; i < end; ++i) {
    std::int32_t target = static_cast<std::int32_t>(stream.ids[i]);
    std::span<const std::uint32_t> buckets = index.buckets_of(target);
    std::size_t lo = i - seg_begin >= static_cast<std::size_t>(window)
                         ? i - window
                         : seg_begin;
    std::size_t hi = std::min(seg_end, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (j == i) continue;
      int offset = static_cast<int>(static_cast<std::int64_t>(j) -
                                    static_cast<std::int64_t>(i));
      std::uint32_t context = contexts.context_id(stream.ids[j], offset);
      std::vector<std::uint32_t> negs = sample_negatives(negatives, noise, rng);
      std::uint64_t step = global_step.fetch_add(1, std::memory_order_relaxed);
      double lr = schedule.at(step);
      try {
        result.loss_sum += sgd_step(params, target, buckets, context,
                                    std::span<const std::uint32_t>(negs),
                                    targets, static_cast<float>(lr));
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at pair update " +
                           std::to_string(step) + ", pair (" +
                           std::to_string(target) + ", " +
                           std::to_string(context) + ")");
      }
      result.last_lr = lr;
      ++result.steps;
    }
  }
  return result;
}

SweepResult run_sweep(Params& params, const FilteredStream& stream,
                      const ContextVocabulary& contexts,
                      const PpmiMatrix& targets, const SubwordIndex& index,
                      const NoiseDistribution& noise, const TrainConfig& config,
                      const LrSchedule& schedule,
                      std::atomic<std::uint64_t>& global_step, int epoch) {
  if (config.threads <= 1) {
    SplitMix64 rng(mix64(config.seed, rng_stream::kNegatives,
                         static_cast<std::uint64_t>(epoch), 0));
    SweepResult total;
    for (std::size_t seg = 0; seg < stream.segments(); ++seg) {
      auto [begin, end] = stream.segment(seg);
      SweepResult r =
          sweep_range(params, stream, begin, end, begin, end, contexts, targets,
                      index, noise, config.negatives, schedule, global_step, rng);
      total.loss_sum += r.loss_sum;
      total.steps += r.steps;
      if (r.steps > 0) total.last_lr = r.last_lr;
    }
    return total;
  }

  // Hogwild workers: rows may race, the contract is statistical convergence.
  std::vector<SweepResult> results(config.threads);
  std::vector<std::thread> workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int t = 0; t < config.threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        SplitMix64 rng(mix64(config.seed, rng_stream::kNegatives,
                             static_cast<std::uint64_t>(epoch),
                             static_cast<std::uint64_t>(t)));
        for (std::size_t seg = 0; seg < stream.segments(); ++seg) {
          auto [begin, end] = stream.segment(seg);
          std::size_t n = end - begin;
          std::size_t lo = begin + n * t / config.threads;
          std::size_t hi = begin + n * (t + 1) / config.threads;
          SweepResult r = sweep_range(params, stream, begin, end, lo, hi,
                                      contexts, targets, index, noise,
                                      config.negatives, schedule, global_step,
                                      rng);
          results[t].loss_sum += r.loss_sum;
          results[t].steps += r.steps;
          if (r.steps > 0) results[t].last_lr = r.last_lr;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);

  SweepResult total;
  for (const SweepResult& r : results) {
    total.loss_sum += r.loss_sum;
    total.steps += r.steps;
    if (r.steps > 0) total.last_lr = r.last_lr;
  }
  return total;
}

}  // namespace

double mean_sweep_loss(const FilteredStream& stream, const Params& params,
                       const SubwordIndex& index,
                       const ContextVocabulary& contexts,
                       const PpmiMatrix& targets) {
  double loss_sum = 0;
  std::uint64_t pairs = 0;
  const int window = contexts.window;
  for (std::size_t seg = 0; seg < stream.segments(); ++seg) {
    auto [begin, end] = stream.segment(seg);
    for (std::size_t i = begin; i < end; ++i) {
      std::int32_t target = static_cast<std::int32_t>(stream.ids[i]);
      RowVec<float> composed =
          compose_iv(params, target, index.buckets_of(target));
      std::size_t lo = i - begin >= static_cast<std::size_t>(window)
                           ? i - window
                           : begin;
      std::size_t hi = std::min(end, i + window + 1);
      for (std::size_t j = lo; j < hi; ++j) {
        if (j == i) continue;
        int offset = static_cast<int>(static_cast<std::int64_t>(j) -
                                      static_cast<std::int64_t>(i));
        std::uint32_t context = contexts.context_id(stream.ids[j], offset);
        loss_sum += loss_pair(
            composed, params, context,
            targets.value(static_cast<std::uint32_t>(target), context));
        ++pairs;
      }
    }
  }
  return pairs == 0 ? 0.0 : loss_sum / static_cast<double>(pairs);
}

TrainOutput train_stream(const IdStream& stream, Vocabulary vocab,
                         const TrainConfig& config, const SubwordSpec& spec,
                         const SegmentationTable* table) {
  config.validate();

  ContextVocabulary contexts(vocab.size(), config.window, config.positional);
  SubsampleConfig subsample{config.subsample_threshold, config.seed,
                            config.shared_subsample_stream};

  FilteredStream counting_stream =
      subsample_stream(stream, vocab, subsample, subsample.pass_key(0));
  CooccurrenceCounts counts =
      count_cooccurrences(counting_stream, contexts, config.threads);
  PpmiMatrix targets = PpmiMatrix::from_counts(counts, config.cds_alpha);
  NoiseDistribution noise(targets.context_noise_weights());

  SubwordIndex index = SubwordIndex::build(vocab, spec, table);
  std::uint64_t q_rows = spec.mode == SubwordMode::kNone ? 0 : spec.buckets;
  Params params = Params::init(vocab.size(), contexts.size(), q_rows,
                               config.dims, config.seed);

  TrainReport report;
  report.observed_pairs_per_sweep =
      static_cast<std::uint64_t>(std::llround(counts.grand_total()));
  report.initial_mean_loss =
      mean_sweep_loss(counting_stream, params, index, contexts, targets);
  report.final_learning_rate = config.learning_rate;

  LrSchedule schedule{config.learning_rate, config.lr_floor_ratio,
                      static_cast<std::uint64_t>(config.epochs) *
                          report.observed_pairs_per_sweep};
  std::atomic<std::uint64_t> global_step{0};

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto start = std::chrono::steady_clock::now();
    FilteredStream epoch_stream =
        config.shared_subsample_stream
            ? FilteredStream{}  // placeholder, replaced below
            : subsample_stream(stream, vocab, subsample,
                               subsample.pass_key(epoch + 1));
    const FilteredStream& sweep_stream =
        config.shared_subsample_stream ? counting_stream : epoch_stream;

    SweepResult r = run_sweep(params, sweep_stream, contexts, targets, index,
                              noise, config, schedule, global_step, epoch);
    auto elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    report.mean_epoch_loss.push_back(
        r.steps == 0 ? 0.0 : r.loss_sum / static_cast<double>(r.steps));
    report.epoch_seconds.push_back(elapsed);
    report.pair_updates += r.steps;
    if (r.steps > 0) report.final_learning_rate = r.last_lr;
    ++report.epochs_completed;
  }

  report.final_mean_loss =
      mean_sweep_loss(counting_stream, params, index, contexts, targets);

  Model model{std::move(params), std::move(vocab), std::move(index), spec,
              config.window,     config.positional, config.seed};
  return {std::move(model), std::move(report)};
}

TrainOutput train(std::span<const std::string> corpus_paths,
                  const TrainConfig& config, const SubwordSpec& spec,
                  const SegmentationTable* table) {
  config.validate();
  Vocabulary vocab = build_vocab_files(corpus_paths, config.min_count);
  IdStream stream = load_id_stream(corpus_paths, vocab);
  return train_stream(stream, std::move(vocab), config, spec, table);
}

}  // namespace subvec
