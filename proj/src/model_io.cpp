#include "subvec/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include "subvec/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "bundle format assumes a little-endian host");

namespace subvec {

namespace {

constexpr char kMagic[8] = {'S', 'U', 'B', 'V', 'E', 'C', '0', '1'};

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated model bundle: " + path);
  return value;
}

void put_matrix(std::ostream& out, const RowMatrix<float>& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(float)) * m.size());
}

void get_matrix(std::istream& in, RowMatrix<float>& m, const std::string& path) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(float)) * m.size());
  if (!in) throw DataError("truncated model bundle: " + path);
}

}  // namespace

void write_vectors_text(std::ostream& out, const Model& model) {
  out << model.vocab.size() << ' ' << model.params.dims() << "\n";
  char buf[64];
  for (std::int32_t w = 0; w < model.vocab.size(); ++w) {
    out << model.vocab.word(w);
    RowVec<float> v = model.vector_of(w);
    for (Eigen::Index c = 0; c < v.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.8g", static_cast<double>(v[c]));
      out << ' ' << buf;
    }
    out << "\n";
  }
}

void write_vectors_text_file(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vectors file: " + path);
  write_vectors_text(out, model);
  if (!out) throw DataError("I/O error while writing: " + path);
}

void save_model_bundle(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model bundle: " + path);

  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.params.dims()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.vocab.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.params.context.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.window));
  put<std::uint8_t>(out, model.positional ? 1 : 0);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(model.spec.mode));
  put<std::int32_t>(out, model.spec.n_min);
  put<std::int32_t>(out, model.spec.n_max);
  put<std::uint64_t>(out, model.spec.buckets);
  put<std::uint64_t>(out, model.seed);

  for (std::int32_t w = 0; w < model.vocab.size(); ++w) {
    const std::string& word = model.vocab.word(w);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(word.size()));
    out.write(word.data(), static_cast<std::streamsize>(word.size()));
    put<std::uint64_t>(out, model.vocab.count(w));
  }

  std::set<std::uint32_t> touched;
  for (std::int32_t w = 0; w < model.vocab.size(); ++w) {
    std::span<const std::uint32_t> buckets = model.subwords.buckets_of(w);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(buckets.size()));
    for (std::uint32_t b : buckets) {
      put<std::uint32_t>(out, b);
      touched.insert(b);
    }
  }

  put_matrix(out, model.params.word);
  put_matrix(out, model.params.context);

  put<std::uint64_t>(out, touched.size());
  for (std::uint32_t b : touched) {
    put<std::uint32_t>(out, b - 1);
    out.write(reinterpret_cast<const char*>(model.params.subword.row(b - 1).data()),
              static_cast<std::streamsize>(sizeof(float)) * model.params.dims());
  }
  if (!out) throw DataError("I/O error while writing: " + path);
}

Model load_model_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model bundle: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("not a model bundle: " + path);

  Model model;
  std::uint32_t dims = get<std::uint32_t>(in, path);
  std::uint32_t vocab_size = get<std::uint32_t>(in, path);
  std::uint32_t context_size = get<std::uint32_t>(in, path);
  model.window = static_cast<int>(get<std::uint32_t>(in, path));
  model.positional = get<std::uint8_t>(in, path) != 0;
  model.spec.mode = static_cast<SubwordMode>(get<std::uint8_t>(in, path));
  model.spec.n_min = get<std::int32_t>(in, path);
  model.spec.n_max = get<std::int32_t>(in, path);
  model.spec.buckets = get<std::uint64_t>(in, path);
  model.seed = get<std::uint64_t>(in, path);

  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(vocab_size);
  counts.reserve(vocab_size);
  for (std::uint32_t w = 0; w < vocab_size; ++w) {
    std::uint32_t len = get<std::uint32_t>(in, path);
    std::string word(len, '\0');
    in.read(word.data(), len);
    if (!in) throw DataError("truncated model bundle: " + path);
    counts.push_back(get<std::uint64_t>(in, path));
    words.push_back(std::move(word));
  }
  model.vocab = Vocabulary::from_ordered(std::move(words), std::move(counts));

  for (std::uint32_t w = 0; w < vocab_size; ++w) {
    std::uint32_t n = get<std::uint32_t>(in, path);
    std::vector<std::uint32_t> buckets(n);
    for (std::uint32_t i = 0; i < n; ++i)
      buckets[i] = get<std::uint32_t>(in, path);
    model.subwords.append(buckets);
  }

  model.params.word.resize(vocab_size, dims);
  model.params.context.resize(context_size, dims);
  get_matrix(in, model.params.word, path);
  get_matrix(in, model.params.context, path);

  std::uint64_t q_rows =
      model.spec.mode == SubwordMode::kNone ? 0 : model.spec.buckets;
  model.params.subword.resize(static_cast<Eigen::Index>(q_rows), dims);
  // Unstored rows are untouched by training, so their seeded initial values
  // are the exact originals.
  init_matrix(model.params.subword, model.seed, rng_stream::kInitSubword);

  std::uint64_t stored = get<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < stored; ++i) {
    std::uint32_t row = get<std::uint32_t>(in, path);
    if (row >= q_rows) throw DataError("subword row out of range: " + path);
    in.read(reinterpret_cast<char*>(model.params.subword.row(row).data()),
            static_cast<std::streamsize>(sizeof(float)) * dims);
    if (!in) throw DataError("truncated model bundle: " + path);
  }
  return model;
}

}  // namespace subvec
