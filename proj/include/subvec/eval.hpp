#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "subvec/error.hpp"
#include "subvec/model.hpp"

namespace subvec {

// Cosine similarity, accumulated in double. Zero-norm input is undefined.
template <class DA, class DB>
double cosine(const Eigen::MatrixBase<DA>& x, const Eigen::MatrixBase<DB>& y) {
  Eigen::RowVectorXd xd = x.derived().template cast<double>();
  Eigen::RowVectorXd yd = y.derived().template cast<double>();
  double nx = xd.norm();
  double ny = yd.norm();
  if (nx == 0 || ny == 0)
    throw NumericError("cosine similarity of a zero-norm vector is undefined");
  return xd.dot(yd) / (nx * ny);
}

// Average ranks (ties share the mean of their positions), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman's rho: Pearson correlation of the average-ranked series.
// Throws DataError on length mismatch or fewer than 2 points, NumericError
// when either series is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct SimilarityPair {
  std::string word1;
  std::string word2;
  double score;
};

struct SimilarityDataset {
  std::vector<SimilarityPair> rows;

  // "w1<TAB>w2<TAB>score" lines; words are lowercased on load.
  static SimilarityDataset load(std::istream& in,
                                std::string_view name = "<stream>");
  static SimilarityDataset load_file(const std::string& path);
};

struct AnalogyRow {
  std::string a, b, c, d;
  std::int32_t section;
};

struct AnalogyDataset {
  std::vector<std::string> sections;
  std::vector<AnalogyRow> rows;

  // "a b c d" lines; ": name" headers open a new section.
  static AnalogyDataset load(std::istream& in,
                             std::string_view name = "<stream>");
  static AnalogyDataset load_file(const std::string& path);
};

enum class OovPolicy { kSkip, kCompose };

OovPolicy oov_policy_from_string(std::string_view name);
std::string_view to_string(OovPolicy policy);

struct SimilarityResult {
  double rho = 0;
  std::uint64_t pairs_used = 0;
  std::uint64_t pairs_skipped = 0;
};

SimilarityResult eval_similarity(const SimilarityDataset& dataset,
                                 const Model& model, OovPolicy policy,
                                 const SegmentationTable* table = nullptr);

struct SectionStats {
  std::string name;
  std::uint64_t used = 0;
  std::uint64_t correct = 0;
};

struct AnalogyResult {
  double accuracy = 0;
  std::uint64_t rows_used = 0;
  std::uint64_t rows_skipped = 0;
  std::vector<SectionStats> sections;
};

// 3CosAdd over unit-normalized composed vectors: the prediction maximizes
// cosine(x, b - a + c) over the vocabulary with a, b, c excluded.
AnalogyResult eval_analogy(const AnalogyDataset& dataset, const Model& model,
                           OovPolicy policy,
                           const SegmentationTable* table = nullptr);

struct Neighbor {
  std::int32_t word_id;
  double similarity;
};

// Top-k vocabulary words by cosine against the composed vectors, excluded
// ids removed, ties broken by vocabulary id.
std::vector<Neighbor> nearest_neighbors(
    const RowVec<float>& query, int k, const Model& model,
    const std::unordered_set<std::int32_t>& exclude = {});

}  // namespace subvec
