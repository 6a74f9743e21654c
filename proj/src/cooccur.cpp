#include "subvec/cooccur.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "subvec/error.hpp"

namespace subvec {

ContextVocabulary::ContextVocabulary(std::int32_t vocab_size, int window,
                                     bool positional)
    : vocab_size(vocab_size), window(window), positional(positional) {
  if (window < 1) throw DataError("window must be >= 1");
  if (vocab_size < 1) throw DataError("vocabulary is empty");
  if (positional) {
    std::uint64_t span = static_cast<std::uint64_t>(vocab_size) * 2 * window;
    if (span > 0xFFFFFFFFULL)
      throw DataError("positional context space exceeds 2^32 ids");
  }
}

CooccurrenceCounts::CooccurrenceCounts(std::int32_t vocab_size,
                                       std::uint32_t context_size)
    : vocab_size_(vocab_size), context_size_(context_size) {}

void CooccurrenceCounts::add(std::uint32_t target, std::uint32_t context,
                             double count) {
  map_[(static_cast<std::uint64_t>(target) << 32) | context] += count;
}

void CooccurrenceCounts::merge(const CooccurrenceCounts& other) {
  for (const auto& [key, count] : other.map_) map_[key] += count;
}

void CooccurrenceCounts::finalize() {
  cells_.clear();
  cells_.reserve(map_.size());
  for (const auto& [key, count] : map_)
    cells_.push_back({static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(key & 0xFFFFFFFFULL), count});
  map_.clear();
  std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) {
    return a.target != b.target ? a.target < b.target : a.context < b.context;
  });
  row_sums_.assign(vocab_size_, 0.0);
  col_sums_.assign(context_size_, 0.0);
  grand_total_ = 0;
  for (const Cell& c : cells_) {
    row_sums_[c.target] += c.count;
    col_sums_[c.context] += c.count;
    grand_total_ += c.count;
  }
}

namespace {

// Counts pairs whose target index lies in [begin, end) of one segment.
void count_range(const FilteredStream& stream, std::size_t seg_begin,
                 std::size_t seg_end, std::size_t begin, std::size_t end,
                 const ContextVocabulary& contexts, CooccurrenceCounts& out) {
  int window = contexts.window;
  for (std::size_t i = begin; i < end; ++i) {
    std::uint32_t target = stream.ids[i];
    std::size_t lo = i - seg_begin >= static_cast<std::size_t>(window)
                         ? i - window
                         : seg_begin;
    std::size_t hi = std::min(seg_end, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (j == i) continue;
      int offset = static_cast<int>(static_cast<std::int64_t>(j) -
                                    static_cast<std::int64_t>(i));
      out.add(target, contexts.context_id(stream.ids[j], offset));
    }
  }
}

}  // namespace

CooccurrenceCounts count_cooccurrences(const FilteredStream& stream,
                                       const ContextVocabulary& contexts,
                                       int threads) {
  CooccurrenceCounts counts(contexts.vocab_size, contexts.size());
  if (threads <= 1) {
    for (std::size_t seg = 0; seg < stream.segments(); ++seg) {
      auto [begin, end] = stream.segment(seg);
      count_range(stream, begin, end, begin, end, contexts, counts);
    }
    counts.finalize();
    return counts;
  }

  std::vector<CooccurrenceCounts> shards(
      threads, CooccurrenceCounts(contexts.vocab_size, contexts.size()));
  std::vector<std::thread> workers;
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t seg = 0; seg < stream.segments(); ++seg) {
        auto [begin, end] = stream.segment(seg);
        std::size_t n = end - begin;
        std::size_t lo = begin + n * t / threads;
        std::size_t hi = begin + n * (t + 1) / threads;
        count_range(stream, begin, end, lo, hi, contexts, shards[t]);
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (int t = 1; t < threads; ++t) shards[0].merge(shards[t]);
  shards[0].finalize();
  return shards[0];
}

CooccurrenceCounts count_cooccurrences(const IdStream& stream,
                                       const Vocabulary& vocab, int window,
                                       bool positional,
                                       const SubsampleConfig& subsample,
                                       std::uint64_t pass_key, int threads) {
  ContextVocabulary contexts(vocab.size(), window, positional);
  FilteredStream filtered = subsample_stream(stream, vocab, subsample, pass_key);
  return count_cooccurrences(filtered, contexts, threads);
}

SmoothedContexts smooth_context_counts(const CooccurrenceCounts& counts,
                                       double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DataError("smoothing exponent must be in (0, 1]");
  SmoothedContexts out;
  out.weights.resize(counts.col_sums().size());
  for (std::size_t c = 0; c < out.weights.size(); ++c) {
    double w = counts.col_sums()[c];
    out.weights[c] = w > 0 ? std::pow(w, alpha) : 0.0;
    out.total += out.weights[c];
  }
  return out;
}

PpmiMatrix PpmiMatrix::from_counts(const CooccurrenceCounts& counts,
                                   double alpha) {
  if (!(counts.grand_total() > 0))
    throw DataError("co-occurrence matrix is empty");
  SmoothedContexts smoothed = smooth_context_counts(counts, alpha);

  PpmiMatrix m;
  m.rows_ = counts.vocab_size();
  m.cols_ = counts.context_size();
  m.noise_weights_ = std::move(smoothed.weights);
  m.row_ptr_.assign(m.rows_ + 1, 0);

  // Smoothing replaces the context marginal and the grand total; the target
  // marginal stays raw.
  std::vector<Cell> kept;
  kept.reserve(counts.cells().size());
  for (const CooccurrenceCounts::Cell& c : counts.cells()) {
    double value = std::log(c.count * smoothed.total /
                            (counts.row_sums()[c.target] *
                             m.noise_weights_[c.context]));
    if (value > 0) kept.push_back({c.target, c.context, value});
  }
  m.cols_idx_.reserve(kept.size());
  m.values_.reserve(kept.size());
  for (const Cell& c : kept) m.row_ptr_[c.target + 1]++;
  for (std::int32_t r = 0; r < m.rows_; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  for (const Cell& c : kept) {
    m.cols_idx_.push_back(c.context);
    m.values_.push_back(c.value);
  }
  return m;
}

double PpmiMatrix::value(std::uint32_t target, std::uint32_t context) const {
  auto begin = cols_idx_.begin() + row_ptr_[target];
  auto end = cols_idx_.begin() + row_ptr_[target + 1];
  auto it = std::lower_bound(begin, end, context);
  if (it == end || *it != context) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
}

void PpmiMatrix::dump(std::ostream& out) const {
  out << "#ppmi v1\n";
  char buf[64];
  for_each([&](const Cell& c) {
    std::snprintf(buf, sizeof(buf), "%.17g", c.value);
    out << c.target << ' ' << c.context << ' ' << buf << "\n";
  });
}

}  // namespace subvec
