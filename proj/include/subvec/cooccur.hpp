#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "subvec/corpus.hpp"

namespace subvec {

// Context id space. Positional contexts key (word, relative offset) pairs;
// otherwise context ids coincide with word ids.
struct ContextVocabulary {
  std::int32_t vocab_size = 0;
  int window = 2;
  bool positional = true;

  ContextVocabulary() = default;
  ContextVocabulary(std::int32_t vocab_size, int window, bool positional);

  std::uint32_t size() const {
    return positional ? static_cast<std::uint32_t>(vocab_size) * slots()
                      : static_cast<std::uint32_t>(vocab_size);
  }

  // offset in [-window, window] \ {0}; ignored in the non-positional case.
  std::uint32_t context_id(std::uint32_t word_id, int offset) const {
    if (!positional) return word_id;
    return word_id * slots() + offset_slot(offset);
  }

  // Inverse mapping, for dumps and diagnostics.
  std::pair<std::uint32_t, int> decode(std::uint32_t context_id) const {
    if (!positional) return {context_id, 0};
    std::uint32_t word = context_id / slots();
    int slot = static_cast<int>(context_id % slots());
    return {word, slot < window ? slot - window : slot - window + 1};
  }

  std::uint32_t slots() const { return 2 * static_cast<std::uint32_t>(window); }
  std::uint32_t offset_slot(int offset) const {
    return static_cast<std::uint32_t>(offset < 0 ? offset + window
                                                 : offset + window - 1);
  }
};

// Sparse (target, context) counts with the marginals Eq-style PPMI needs.
class CooccurrenceCounts {
 public:
  struct Cell {
    std::uint32_t target;
    std::uint32_t context;
    double count;
  };

  CooccurrenceCounts(std::int32_t vocab_size, std::uint32_t context_size);

  void add(std::uint32_t target, std::uint32_t context, double count = 1.0);
  void merge(const CooccurrenceCounts& other);

  // Sorts cells by (target, context) and freezes the marginals.
  void finalize();

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<double>& row_sums() const { return row_sums_; }
  const std::vector<double>& col_sums() const { return col_sums_; }
  double grand_total() const { return grand_total_; }
  std::int32_t vocab_size() const { return vocab_size_; }
  std::uint32_t context_size() const { return context_size_; }

 private:
  std::int32_t vocab_size_;
  std::uint32_t context_size_;
  std::unordered_map<std::uint64_t, double> map_;
  std::vector<Cell> cells_;
  std::vector<double> row_sums_;
  std::vector<double> col_sums_;
  double grand_total_ = 0;
};

// Symmetric window over the filtered stream; every in-window neighbor of a
// target adds one count. Windows stay inside segments. Sharded counting
// merges to exactly the sequential result.
CooccurrenceCounts count_cooccurrences(const FilteredStream& stream,
                                       const ContextVocabulary& contexts,
                                       int threads = 1);

// Spec-shaped convenience: subsamples, filters, then counts.
CooccurrenceCounts count_cooccurrences(const IdStream& stream,
                                       const Vocabulary& vocab, int window,
                                       bool positional,
                                       const SubsampleConfig& subsample,
                                       std::uint64_t pass_key = 0,
                                       int threads = 1);

struct SmoothedContexts {
  std::vector<double> weights;  // M_*c^alpha
  double total = 0;             // sum over contexts
};

SmoothedContexts smooth_context_counts(const CooccurrenceCounts& counts,
                                       double alpha);

// Sparse PPMI matrix, CSR over sorted (target, context) keys; clipped-to-zero
// cells are elided and read back as 0.
class PpmiMatrix {
 public:
  struct Cell {
    std::uint32_t target;
    std::uint32_t context;
    double value;
  };

  static PpmiMatrix from_counts(const CooccurrenceCounts& counts, double alpha);

  double value(std::uint32_t target, std::uint32_t context) const;
  std::int32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  std::size_t nonzeros() const { return cols_idx_.size(); }

  // Smoothed context mass, the negative-sampling noise weights.
  const std::vector<double>& context_noise_weights() const {
    return noise_weights_;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::int32_t r = 0; r < rows_; ++r)
      for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
        fn(Cell{static_cast<std::uint32_t>(r), cols_idx_[i], values_[i]});
  }

  void dump(std::ostream& out) const;

 private:
  std::int32_t rows_ = 0;
  std::uint32_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_idx_;
  std::vector<double> values_;
  std::vector<double> noise_weights_;
};

}  // namespace subvec
