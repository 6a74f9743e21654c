#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subvec/rng.hpp"

namespace subvec {

// Transparent hashing so vocab maps can be probed with string_view.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

using TokenCounts =
    std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>;

// Splits UTF-8 text into lowercase alphanumeric runs. Any byte outside
// [0-9a-zA-Z] separates tokens; uppercase ASCII is folded. Multi-byte
// sequences are validated and consumed as separators; a malformed sequence
// raises DataError naming the byte offset (base_offset + local position).
void tokenize(std::string_view text,
              const std::function<void(std::string_view)>& emit,
              std::uint64_t base_offset = 0);

std::vector<std::string> tokenize(std::string_view text);

// Streams every corpus file through the tokenizer in order.
void tokenize_files(std::span<const std::string> paths,
                    const std::function<void(std::string_view token)>& emit);

// min(1, sqrt(t / f)) with f = word_count / total.
double keep_probability(std::uint64_t word_count, std::uint64_t total,
                        double threshold);

struct SubsampleConfig {
  double threshold = 1e-5;
  std::uint64_t seed = 1;
  // When true every pass replays the same kept-token stream; otherwise each
  // pass draws independently (still deterministic under the seed).
  bool shared_stream = false;

  std::uint64_t pass_key(std::uint64_t pass) const {
    return shared_stream ? 0 : pass;
  }
};

// Keyed per-occurrence decision so any pass can reproduce it from the raw
// stream position alone.
inline bool keep_occurrence(const SubsampleConfig& cfg, std::uint64_t pass_key,
                            std::uint64_t position, double keep_prob) {
  if (keep_prob >= 1.0) return true;
  return to_unit(mix64(cfg.seed, rng_stream::kSubsample, pass_key, position)) <
         keep_prob;
}

class Vocabulary {
 public:
  Vocabulary() = default;

  // Keeps words with count >= min_count; ids by descending count, ties
  // lexicographic. Throws DataError when nothing survives.
  static Vocabulary from_counts(const TokenCounts& counts,
                                std::uint64_t min_count);

  // Assigns ids by the given order, as stored in vocabulary files and model
  // bundles.
  static Vocabulary from_ordered(std::vector<std::string> words,
                                 std::vector<std::uint64_t> counts);

  std::int32_t size() const { return static_cast<std::int32_t>(words_.size()); }
  std::int32_t id_of(std::string_view word) const;  // -1 when absent
  const std::string& word(std::int32_t id) const { return words_[id]; }
  std::uint64_t count(std::int32_t id) const { return counts_[id]; }
  std::uint64_t total_tokens() const { return total_; }
  const std::vector<std::string>& words() const { return words_; }

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static Vocabulary load(std::istream& in, std::string_view name = "<stream>");
  static Vocabulary load_file(const std::string& path);

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::int32_t, StringHash, std::equal_to<>>
      ids_;
  std::uint64_t total_ = 0;
};

TokenCounts count_tokens(std::span<const std::string> corpus_paths);

// Shard-merge for parallel counting; summing preserves the sequential result.
void merge_counts(TokenCounts& into, const TokenCounts& from);

Vocabulary build_vocab(std::span<const std::string> tokens,
                       std::uint64_t min_count);
Vocabulary build_vocab_files(std::span<const std::string> corpus_paths,
                             std::uint64_t min_count);

// In-vocabulary occurrences of a corpus, with the raw token positions that
// key subsampling decisions. Windows never cross segment (file) boundaries.
struct IdStream {
  std::vector<std::uint32_t> ids;
  std::vector<std::uint64_t> positions;
  std::vector<std::size_t> segment_starts;  // offsets into ids, one per file

  std::size_t segments() const { return segment_starts.size(); }
  std::pair<std::size_t, std::size_t> segment(std::size_t i) const {
    std::size_t begin = segment_starts[i];
    std::size_t end =
        i + 1 < segment_starts.size() ? segment_starts[i + 1] : ids.size();
    return {begin, end};
  }
};

IdStream load_id_stream(std::span<const std::string> corpus_paths,
                        const Vocabulary& vocab);

// Kept tokens of one subsampling pass, segment structure preserved.
struct FilteredStream {
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> segment_starts;

  std::size_t segments() const { return segment_starts.size(); }
  std::pair<std::size_t, std::size_t> segment(std::size_t i) const {
    std::size_t begin = segment_starts[i];
    std::size_t end =
        i + 1 < segment_starts.size() ? segment_starts[i + 1] : ids.size();
    return {begin, end};
  }
};

// Per-word keep probabilities under the vocabulary totals.
std::vector<double> keep_probabilities(const Vocabulary& vocab,
                                       double threshold);

FilteredStream subsample_stream(const IdStream& stream, const Vocabulary& vocab,
                                const SubsampleConfig& cfg,
                                std::uint64_t pass_key);

}  // namespace subvec
