#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subvec/corpus.hpp"

namespace subvec {

enum class SubwordMode { kNone, kNgrams, kMorphemes };

std::string_view to_string(SubwordMode mode);
SubwordMode subword_mode_from_string(std::string_view name);

struct SubwordSpec {
  SubwordMode mode = SubwordMode::kNgrams;
  int n_min = 3;
  int n_max = 6;
  std::uint64_t buckets = 2000000;
  // With morphemes, words missing from the table fall back to n-grams unless
  // strict is set, in which case the lookup fails.
  bool strict_morphemes = false;
};

// 32-bit FNV-1a over the UTF-8 bytes.
inline std::uint32_t fnv1a(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

// 64-bit variant, used for input-file digests in run manifests. The
// two-argument form chains across buffers.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Maps a subword into [1, buckets].
inline std::uint64_t bucket_of(std::string_view subword, std::uint64_t buckets) {
  return 1 + fnv1a(subword) % buckets;
}

// All n-grams of "<word>" with length in [n_min, n_max], shorter lengths
// first, left to right within a length. The bracketed whole word appears only
// when its length fits the range.
std::vector<std::string> extract_ngrams(std::string_view word, int n_min,
                                        int n_max);

// word -> ordered morphemes, loaded from "word<TAB>m1 m2 ..." lines.
class SegmentationTable {
 public:
  static SegmentationTable load(std::istream& in,
                                std::string_view name = "<stream>");
  static SegmentationTable load_file(const std::string& path);

  void add(std::string word, std::vector<std::string> morphemes);
  const std::vector<std::string>* find(std::string_view word) const;
  std::size_t size() const { return table_.size(); }
  const std::unordered_map<std::string, std::vector<std::string>, StringHash,
                           std::equal_to<>>&
  entries() const {
    return table_;
  }

 private:
  std::unordered_map<std::string, std::vector<std::string>, StringHash,
                     std::equal_to<>>
      table_;
};

// The table's morphemes with '<' prefixed to the first and '>' suffixed to
// the last. Throws DataError when the word is not in the table.
std::vector<std::string> segment_morphemes(std::string_view word,
                                           const SegmentationTable& table);

// Subword strings of a word under the spec; empty for mode none.
std::vector<std::string> subword_strings(std::string_view word,
                                         const SubwordSpec& spec,
                                         const SegmentationTable* table);

// Bucket ids in [1, buckets], in extraction order.
std::vector<std::uint32_t> subwords_of(std::string_view word,
                                       const SubwordSpec& spec,
                                       const SegmentationTable* table = nullptr);

// Precomputed bucket lists for every vocabulary word, CSR-packed.
class SubwordIndex {
 public:
  SubwordIndex() { offsets_.push_back(0); }

  static SubwordIndex build(const Vocabulary& vocab, const SubwordSpec& spec,
                            const SegmentationTable* table = nullptr);

  std::span<const std::uint32_t> buckets_of(std::int32_t word_id) const {
    return {data_.data() + offsets_[word_id],
            data_.data() + offsets_[word_id + 1]};
  }
  std::int32_t words() const {
    return static_cast<std::int32_t>(offsets_.size()) - 1;
  }
  std::size_t total_entries() const { return data_.size(); }

  void append(std::span<const std::uint32_t> buckets);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> data_;
};

}  // namespace subvec
