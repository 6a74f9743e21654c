#include "subvec/eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

namespace subvec {

namespace {

std::string lowered(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
  return out;
}

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_error(std::string_view name, std::size_t line,
                              const std::string& what) {
  throw DataError(std::string(name) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw DataError("rank correlation needs series of equal length, got " +
                    std::to_string(xs.size()) + " and " +
                    std::to_string(ys.size()));
  const std::size_t n = xs.size();
  if (n < 2)
    throw DataError("rank correlation needs at least 2 points, got " +
                    std::to_string(n));

  std::vector<double> rx = average_ranks(xs);
  std::vector<double> ry = average_ranks(ys);

  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = rx[i] - mx;
    double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0)
    throw NumericError("rank correlation is undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

SimilarityDataset SimilarityDataset::load(std::istream& in,
                                          std::string_view name) {
  SimilarityDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (trimmed(sv).empty()) continue;

    std::size_t t1 = sv.find('\t');
    std::size_t t2 = t1 == std::string_view::npos ? t1 : sv.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      parse_error(name, line_no, "expected word<TAB>word<TAB>score");
    std::string_view w1 = trimmed(sv.substr(0, t1));
    std::string_view w2 = trimmed(sv.substr(t1 + 1, t2 - t1 - 1));
    std::string_view sc = trimmed(sv.substr(t2 + 1));
    if (w1.empty() || w2.empty())
      parse_error(name, line_no, "empty word field");

    double score = 0;
    auto [ptr, ec] = std::from_chars(sc.data(), sc.data() + sc.size(), score);
    if (ec != std::errc() || ptr != sc.data() + sc.size())
      parse_error(name, line_no, "bad score '" + std::string(sc) + "'");
    ds.rows.push_back({lowered(w1), lowered(w2), score});
  }
  return ds;
}

SimilarityDataset SimilarityDataset::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open similarity dataset: " + path);
  return load(in, path);
}

AnalogyDataset AnalogyDataset::load(std::istream& in, std::string_view name) {
  AnalogyDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trimmed(line);
    if (sv.empty()) continue;
    if (sv.front() == ':') {
      ds.sections.emplace_back(trimmed(sv.substr(1)));
      continue;
    }

    std::istringstream fields{std::string(sv)};
    std::string a, b, c, d, extra;
    if (!(fields >> a >> b >> c >> d) || (fields >> extra))
      parse_error(name, line_no, "expected 4 words: a b c d");
    if (ds.sections.empty()) ds.sections.emplace_back("default");
    ds.rows.push_back({lowered(a), lowered(b), lowered(c), lowered(d),
                       static_cast<std::int32_t>(ds.sections.size() - 1)});
  }
  return ds;
}

AnalogyDataset AnalogyDataset::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open analogy dataset: " + path);
  return load(in, path);
}

OovPolicy oov_policy_from_string(std::string_view name) {
  if (name == "skip") return OovPolicy::kSkip;
  if (name == "compose") return OovPolicy::kCompose;
  throw DataError("unknown OOV policy '" + std::string(name) +
                  "' (expected skip or compose)");
}

std::string_view to_string(OovPolicy policy) {
  return policy == OovPolicy::kSkip ? "skip" : "compose";
}

namespace {

// Composed, unit-normalized vocabulary vectors in double, with a validity
// mask for the (degenerate) zero-norm case.
struct NormalizedVectors {
  Eigen::MatrixXd rows;
  std::vector<char> valid;

  explicit NormalizedVectors(const Model& model) {
    rows = compose_all(model.params, model.subwords).cast<double>();
    valid.assign(static_cast<std::size_t>(rows.rows()), 1);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      double n = rows.row(r).norm();
      if (n == 0)
        valid[static_cast<std::size_t>(r)] = 0;
      else
        rows.row(r) /= n;
    }
  }
};

// Unit vector for a dataset word: the composed vocabulary row when in
// vocabulary, otherwise (under the compose policy) the subword average.
// nullopt means the row cannot be used.
std::optional<Eigen::RowVectorXd> unit_vector_of(
    const std::string& word, const Model& model, const NormalizedVectors& nv,
    OovPolicy policy, const SegmentationTable* table,
    std::int32_t* id_out = nullptr) {
  std::int32_t id = model.vocab.id_of(word);
  if (id_out) *id_out = id;
  if (id >= 0) {
    if (!nv.valid[static_cast<std::size_t>(id)]) return std::nullopt;
    return Eigen::RowVectorXd(nv.rows.row(id));
  }
  if (policy != OovPolicy::kCompose) return std::nullopt;
  if (model.spec.mode == SubwordMode::kNone) return std::nullopt;
  Eigen::RowVectorXd v;
  try {
    v = model.oov_vector(word, table).cast<double>();
  } catch (const DataError&) {
    return std::nullopt;  // strict morpheme miss: nothing to compose
  }
  double n = v.norm();
  if (n == 0) return std::nullopt;
  return Eigen::RowVectorXd(v / n);
}

}  // namespace

SimilarityResult eval_similarity(const SimilarityDataset& dataset,
                                 const Model& model, OovPolicy policy,
                                 const SegmentationTable* table) {
  NormalizedVectors nv(model);
  std::vector<double> human, predicted;
  SimilarityResult result;
  for (const SimilarityPair& row : dataset.rows) {
    auto v1 = unit_vector_of(row.word1, model, nv, policy, table);
    auto v2 = unit_vector_of(row.word2, model, nv, policy, table);
    if (!v1 || !v2) {
      ++result.pairs_skipped;
      continue;
    }
    human.push_back(row.score);
    predicted.push_back(v1->dot(*v2));
    ++result.pairs_used;
  }
  if (result.pairs_used < 2)
    throw DataError("similarity evaluation needs at least 2 usable pairs, " +
                    std::to_string(result.pairs_used) + " found");
  result.rho = spearman(human, predicted);
  return result;
}

AnalogyResult eval_analogy(const AnalogyDataset& dataset, const Model& model,
                           OovPolicy policy, const SegmentationTable* table) {
  NormalizedVectors nv(model);
  AnalogyResult result;
  result.sections.reserve(dataset.sections.size());
  for (const std::string& s : dataset.sections)
    result.sections.push_back({s, 0, 0});

  std::uint64_t correct = 0;
  for (const AnalogyRow& row : dataset.rows) {
    std::int32_t ia = -1, ib = -1, ic = -1;
    auto va = unit_vector_of(row.a, model, nv, policy, table, &ia);
    auto vb = unit_vector_of(row.b, model, nv, policy, table, &ib);
    auto vc = unit_vector_of(row.c, model, nv, policy, table, &ic);
    std::int32_t id = model.vocab.id_of(row.d);
    if (!va || !vb || !vc || id < 0 ||
        !nv.valid[static_cast<std::size_t>(id)]) {
      ++result.rows_skipped;
      continue;
    }

    Eigen::RowVectorXd query = *vb - *va + *vc;
    Eigen::VectorXd scores = nv.rows * query.transpose();

    std::int32_t best = -1;
    double best_score = 0;
    for (std::int32_t w = 0; w < model.vocab.size(); ++w) {
      if (w == ia || w == ib || w == ic) continue;
      if (!nv.valid[static_cast<std::size_t>(w)]) continue;
      double s = scores[w];
      if (best < 0 || s > best_score) {  // ties keep the lowest id
        best = w;
        best_score = s;
      }
    }

    ++result.rows_used;
    auto& section = result.sections[static_cast<std::size_t>(row.section)];
    ++section.used;
    if (best == id) {
      ++correct;
      ++section.correct;
    }
  }

  if (result.rows_used == 0)
    throw DataError("analogy evaluation has no usable rows");
  result.accuracy = static_cast<double>(correct) /
                    static_cast<double>(result.rows_used);
  return result;
}

std::vector<Neighbor> nearest_neighbors(
    const RowVec<float>& query, int k, const Model& model,
    const std::unordered_set<std::int32_t>& exclude) {
  if (k < 1)
    throw DataError("neighbor count must be at least 1, got " +
                    std::to_string(k));
  Eigen::RowVectorXd q = query.cast<double>();
  double qn = q.norm();
  if (qn == 0)
    throw NumericError("cannot rank neighbors of a zero-norm query");
  q /= qn;

  NormalizedVectors nv(model);
  std::vector<Neighbor> all;
  all.reserve(static_cast<std::size_t>(model.vocab.size()));
  for (std::int32_t w = 0; w < model.vocab.size(); ++w) {
    if (exclude.contains(w) || !nv.valid[static_cast<std::size_t>(w)]) continue;
    all.push_back({w, nv.rows.row(w).dot(q)});
  }

  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.word_id < b.word_id;
  };
  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k),
                                           all.size());
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), better);
  all.resize(keep);
  return all;
}

}  // namespace subvec
