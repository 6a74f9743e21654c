#include "subvec/subword.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "subvec/error.hpp"

namespace subvec {

std::string_view to_string(SubwordMode mode) {
  switch (mode) {
    case SubwordMode::kNone:
      return "none";
    case SubwordMode::kNgrams:
      return "ngrams";
    case SubwordMode::kMorphemes:
      return "morphemes";
  }
  return "none";
}

SubwordMode subword_mode_from_string(std::string_view name) {
  if (name == "none") return SubwordMode::kNone;
  if (name == "ngrams") return SubwordMode::kNgrams;
  if (name == "morphemes") return SubwordMode::kMorphemes;
  throw DataError("unknown subword mode: " + std::string(name));
}

std::vector<std::string> extract_ngrams(std::string_view word, int n_min,
                                        int n_max) {
  std::string wrapped;
  wrapped.reserve(word.size() + 2);
  wrapped.push_back('<');
  wrapped.append(word);
  wrapped.push_back('>');

  std::vector<std::string> out;
  int len = static_cast<int>(wrapped.size());
  for (int n = n_min; n <= n_max && n <= len; ++n)
    for (int start = 0; start + n <= len; ++start)
      out.emplace_back(wrapped.substr(start, n));
  return out;
}

void SegmentationTable::add(std::string word,
                            std::vector<std::string> morphemes) {
  if (morphemes.empty())
    throw DataError("segmentation for '" + word + "' has no morphemes");
  std::string joined;
  for (const std::string& m : morphemes) joined += m;
  if (joined != word)
    throw DataError("segmentation for '" + word +
                    "' does not reconstruct the word: " + joined);
  table_.insert_or_assign(std::move(word), std::move(morphemes));
}

const std::vector<std::string>* SegmentationTable::find(
    std::string_view word) const {
  auto it = table_.find(word);
  return it == table_.end() ? nullptr : &it->second;
}

SegmentationTable SegmentationTable::load(std::istream& in,
                                          std::string_view name) {
  SegmentationTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw DataError(std::string(name) + ":" + std::to_string(line_no) +
                      ": expected word<TAB>morphemes: " + line);
    std::string word = line.substr(0, tab);
    std::vector<std::string> morphemes;
    std::istringstream rest(line.substr(tab + 1));
    std::string m;
    while (rest >> m) morphemes.push_back(m);
    try {
      table.add(std::move(word), std::move(morphemes));
    } catch (const DataError& e) {
      throw DataError(std::string(name) + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return table;
}

SegmentationTable SegmentationTable::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open segmentation file: " + path);
  return load(in, path);
}

std::vector<std::string> segment_morphemes(std::string_view word,
                                           const SegmentationTable& table) {
  const std::vector<std::string>* morphemes = table.find(word);
  if (!morphemes)
    throw DataError("no segmentation for word: " + std::string(word));
  std::vector<std::string> out = *morphemes;
  out.front().insert(out.front().begin(), '<');
  out.back().push_back('>');
  return out;
}

std::vector<std::string> subword_strings(std::string_view word,
                                         const SubwordSpec& spec,
                                         const SegmentationTable* table) {
  switch (spec.mode) {
    case SubwordMode::kNone:
      return {};
    case SubwordMode::kNgrams:
      return extract_ngrams(word, spec.n_min, spec.n_max);
    case SubwordMode::kMorphemes: {
      if (!table) throw DataError("morpheme mode requires a segmentation table");
      if (table->find(word)) return segment_morphemes(word, *table);
      if (spec.strict_morphemes)
        throw DataError("no segmentation for word: " + std::string(word));
      std::cerr << "warning: no segmentation for '" << word
                << "', falling back to n-grams\n";
      return extract_ngrams(word, spec.n_min, spec.n_max);
    }
  }
  return {};
}

std::vector<std::uint32_t> subwords_of(std::string_view word,
                                       const SubwordSpec& spec,
                                       const SegmentationTable* table) {
  if (spec.buckets < 1 || spec.buckets > 0xFFFFFFFFULL)
    throw DataError("bucket count out of range: " + std::to_string(spec.buckets));
  std::vector<std::uint32_t> out;
  for (const std::string& s : subword_strings(word, spec, table))
    out.push_back(static_cast<std::uint32_t>(bucket_of(s, spec.buckets)));
  return out;
}

void SubwordIndex::append(std::span<const std::uint32_t> buckets) {
  data_.insert(data_.end(), buckets.begin(), buckets.end());
  offsets_.push_back(data_.size());
}

SubwordIndex SubwordIndex::build(const Vocabulary& vocab,
                                 const SubwordSpec& spec,
                                 const SegmentationTable* table) {
  SubwordIndex index;
  for (std::int32_t id = 0; id < vocab.size(); ++id) {
    std::vector<std::uint32_t> buckets = subwords_of(vocab.word(id), spec, table);
    index.append(buckets);
  }
  return index;
}

}  // namespace subvec
