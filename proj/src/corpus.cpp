#include "subvec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "subvec/error.hpp"

namespace subvec {

namespace {

inline bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

inline char fold(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

[[noreturn]] void bad_encoding(std::uint64_t offset) {
  throw DataError("invalid UTF-8 sequence at byte offset " +
                  std::to_string(offset));
}

// Validates one multi-byte sequence starting at i, returns its length.
std::size_t utf8_sequence_length(std::string_view text, std::size_t i,
                                 std::uint64_t base_offset) {
  unsigned char lead = static_cast<unsigned char>(text[i]);
  std::size_t len;
  unsigned int min_cp;
  if ((lead & 0xE0) == 0xC0) {
    len = 2;
    min_cp = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    min_cp = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    min_cp = 0x10000;
  } else {
    bad_encoding(base_offset + i);  // stray continuation or invalid lead
  }
  if (i + len > text.size()) bad_encoding(base_offset + i);
  unsigned int cp = lead & (0x7F >> len);
  for (std::size_t k = 1; k < len; ++k) {
    unsigned char c = static_cast<unsigned char>(text[i + k]);
    if ((c & 0xC0) != 0x80) bad_encoding(base_offset + i + k);
    cp = (cp << 6) | (c & 0x3F);
  }
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
    bad_encoding(base_offset + i);
  return len;
}

}  // namespace

void tokenize(std::string_view text,
              const std::function<void(std::string_view)>& emit,
              std::uint64_t base_offset) {
  std::string token;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_token_byte(c)) {
      token.push_back(fold(c));
      ++i;
    } else {
      if (!token.empty()) {
        emit(token);
        token.clear();
      }
      i += (c < 0x80) ? 1 : utf8_sequence_length(text, i, base_offset);
    }
  }
  if (!token.empty()) emit(token);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  tokenize(text, [&](std::string_view t) { out.emplace_back(t); });
  return out;
}

void tokenize_files(std::span<const std::string> paths,
                    const std::function<void(std::string_view)>& emit) {
  for (const std::string& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(in, line)) {
      tokenize(line, emit, offset);
      offset += line.size() + 1;
    }
    if (in.bad()) throw DataError("I/O error while reading: " + path);
  }
}

double keep_probability(std::uint64_t word_count, std::uint64_t total,
                        double threshold) {
  if (threshold <= 0) return 1.0;  // subsampling disabled
  double f = static_cast<double>(word_count) / static_cast<double>(total);
  return std::min(1.0, std::sqrt(threshold / f));
}

Vocabulary Vocabulary::from_counts(const TokenCounts& counts,
                                   std::uint64_t min_count) {
  std::vector<std::pair<std::string_view, std::uint64_t>> kept;
  kept.reserve(counts.size());
  for (const auto& [word, count] : counts)
    if (count >= min_count) kept.emplace_back(word, count);
  if (kept.empty())
    throw DataError("empty vocabulary: no word reaches min_count " +
                    std::to_string(min_count));
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.words_.reserve(kept.size());
  v.counts_.reserve(kept.size());
  for (const auto& [word, count] : kept) {
    v.ids_.emplace(std::string(word), static_cast<std::int32_t>(v.words_.size()));
    v.words_.emplace_back(word);
    v.counts_.push_back(count);
    v.total_ += count;
  }
  return v;
}

Vocabulary Vocabulary::from_ordered(std::vector<std::string> words,
                                    std::vector<std::uint64_t> counts) {
  if (words.empty()) throw DataError("vocabulary has no entries");
  if (words.size() != counts.size())
    throw DataError("vocabulary words and counts differ in length");
  Vocabulary v;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto [it, inserted] =
        v.ids_.emplace(words[i], static_cast<std::int32_t>(i));
    if (!inserted) throw DataError("duplicate vocabulary word: " + words[i]);
    v.total_ += counts[i];
  }
  v.words_ = std::move(words);
  v.counts_ = std::move(counts);
  return v;
}

std::int32_t Vocabulary::id_of(std::string_view word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? -1 : it->second;
}

void Vocabulary::save(std::ostream& out) const {
  out << "#vocab v1 total=" << total_ << "\n";
  for (std::size_t i = 0; i < words_.size(); ++i)
    out << words_[i] << '\t' << counts_[i] << "\n";
}

void Vocabulary::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  save(out);
  if (!out) throw DataError("I/O error while writing: " + path);
}

Vocabulary Vocabulary::load(std::istream& in, std::string_view name) {
  auto fail = [&](std::size_t line_no, const std::string& what) -> void {
    throw DataError(std::string(name) + ":" + std::to_string(line_no) + ": " +
                    what);
  };

  std::string line;
  if (!std::getline(in, line)) fail(1, "missing vocabulary header");
  constexpr std::string_view prefix = "#vocab v1 total=";
  if (line.rfind(prefix, 0) != 0) fail(1, "bad vocabulary header: " + line);
  std::uint64_t declared_total = 0;
  try {
    declared_total = std::stoull(line.substr(prefix.size()));
  } catch (const std::exception&) {
    fail(1, "bad total in vocabulary header: " + line);
  }

  Vocabulary v;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      fail(line_no, "expected word<TAB>count: " + line);
    std::string word = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      fail(line_no, "bad count: " + line);
    }
    if (v.ids_.contains(word)) fail(line_no, "duplicate word: " + word);
    v.ids_.emplace(word, static_cast<std::int32_t>(v.words_.size()));
    v.words_.push_back(std::move(word));
    v.counts_.push_back(count);
    v.total_ += count;
  }
  if (v.words_.empty()) fail(line_no, "vocabulary has no entries");
  if (v.total_ != declared_total)
    fail(line_no, "total mismatch: header says " +
                      std::to_string(declared_total) + ", entries sum to " +
                      std::to_string(v.total_));
  return v;
}

Vocabulary Vocabulary::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  return load(in, path);
}

TokenCounts count_tokens(std::span<const std::string> corpus_paths) {
  TokenCounts counts;
  tokenize_files(corpus_paths, [&](std::string_view token) {
    auto it = counts.find(token);
    if (it == counts.end())
      counts.emplace(std::string(token), 1);
    else
      ++it->second;
  });
  return counts;
}

void merge_counts(TokenCounts& into, const TokenCounts& from) {
  for (const auto& [word, count] : from) {
    auto it = into.find(std::string_view(word));
    if (it == into.end())
      into.emplace(word, count);
    else
      it->second += count;
  }
}

Vocabulary build_vocab(std::span<const std::string> tokens,
                       std::uint64_t min_count) {
  TokenCounts counts;
  for (const std::string& t : tokens) {
    auto it = counts.find(std::string_view(t));
    if (it == counts.end())
      counts.emplace(t, 1);
    else
      ++it->second;
  }
  return Vocabulary::from_counts(counts, min_count);
}

Vocabulary build_vocab_files(std::span<const std::string> corpus_paths,
                             std::uint64_t min_count) {
  return Vocabulary::from_counts(count_tokens(corpus_paths), min_count);
}

IdStream load_id_stream(std::span<const std::string> corpus_paths,
                        const Vocabulary& vocab) {
  IdStream stream;
  std::uint64_t position = 0;
  for (const std::string& path : corpus_paths) {
    stream.segment_starts.push_back(stream.ids.size());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(in, line)) {
      tokenize(
          line,
          [&](std::string_view token) {
            std::int32_t id = vocab.id_of(token);
            if (id >= 0) {
              stream.ids.push_back(static_cast<std::uint32_t>(id));
              stream.positions.push_back(position);
            }
            ++position;
          },
          offset);
      offset += line.size() + 1;
    }
    if (in.bad()) throw DataError("I/O error while reading: " + path);
  }
  return stream;
}

std::vector<double> keep_probabilities(const Vocabulary& vocab,
                                       double threshold) {
  std::vector<double> probs(vocab.size());
  for (std::int32_t id = 0; id < vocab.size(); ++id)
    probs[id] = keep_probability(vocab.count(id), vocab.total_tokens(), threshold);
  return probs;
}

FilteredStream subsample_stream(const IdStream& stream, const Vocabulary& vocab,
                                const SubsampleConfig& cfg,
                                std::uint64_t pass_key) {
  std::vector<double> probs = keep_probabilities(vocab, cfg.threshold);
  FilteredStream out;
  out.ids.reserve(stream.ids.size());
  for (std::size_t seg = 0; seg < stream.segments(); ++seg) {
    out.segment_starts.push_back(out.ids.size());
    auto [begin, end] = stream.segment(seg);
    for (std::size_t i = begin; i < end; ++i) {
      std::uint32_t id = stream.ids[i];
      if (keep_occurrence(cfg, pass_key, stream.positions[i], probs[id]))
        out.ids.push_back(id);
    }
  }
  return out;
}

}  // namespace subvec
