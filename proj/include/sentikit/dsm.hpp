#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "sentikit/corpus.hpp"
#include "sentikit/lexicon.hpp"
#include "sentikit/random.hpp"

namespace sentikit {

enum class DsmArchitecture { cbow, skipgram };

inline constexpr std::string_view to_string(DsmArchitecture a) {
  return a == DsmArchitecture::cbow ? "cbow" : "skipgram";
}

inline std::optional<DsmArchitecture> parse_architecture(std::string_view s) {
  if (s == "cbow") return DsmArchitecture::cbow;
  if (s == "skipgram") return DsmArchitecture::skipgram;
  return std::nullopt;
}

struct DsmParams {
  int dim = 600;
  DsmArchitecture architecture = DsmArchitecture::cbow;
  int min_count = 10;
  int window = 5;
  int negative_samples = 5;
  double subsample_threshold = 1e-3;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
  int workers = 1;  // > 1 trades determinism for speed
};

struct DsmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyCorpus : DsmError {
  using DsmError::DsmError;
};
struct InvalidParams : DsmError {
  using DsmError::DsmError;
};
struct VectorParseError : DsmError {
  using DsmError::DsmError;
};
struct DimensionMismatch : DsmError {
  std::size_t declared, found;
  DimensionMismatch(std::size_t d, std::size_t f)
      : DsmError("vector file: declared dim " + std::to_string(d) + ", found " +
                 std::to_string(f)),
        declared(d),
        found(f) {}
};
struct LengthMismatch : DsmError {
  LengthMismatch(std::size_t a, std::size_t b)
      : DsmError("cosine: length mismatch " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

// Word -> dense vector map with case-folded keys. Rows are stored in one
// contiguous block; immutable after construction.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  EmbeddingSpace(int dim, std::vector<std::string> words, std::vector<float> data,
                 DsmParams params = {})
      : dim_(dim), words_(std::move(words)), data_(std::move(data)), params_(params) {
    params_.dim = dim;
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  }

  int dim() const { return dim_; }
  std::size_t vocab_size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const DsmParams& params() const { return params_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

  /// Case-folding lookup; nullopt for out-of-vocabulary words.
  std::optional<std::span<const float>> vector(std::string_view word) const {
    const auto it = index_.find(detail::ascii_lower(word));
    if (it == index_.end()) return std::nullopt;
    return row(it->second);
  }

  bool contains(std::string_view word) const {
    return index_.count(detail::ascii_lower(word)) > 0;
  }

 private:
  int dim_ = 0;
  std::vector<std::string> words_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
  DsmParams params_;
};

namespace dsm_detail {

constexpr double kMaxExp = 6.0;
constexpr std::size_t kMaxSentence = 1000;
constexpr std::size_t kNegativeTableSize = 1u << 20;

struct VocabEntry {
  std::string word;
  std::int64_t count = 0;
};

struct Corpus {
  std::vector<VocabEntry> vocab;                       // sorted: count desc, first-seen asc
  std::unordered_map<std::string, std::int32_t> index; // word -> vocab position
  std::int64_t train_words = 0;                        // total retained-token count
  std::vector<std::streamoff> chunk_offsets;           // per-worker byte starts + end
};

inline Corpus scan_corpus(const std::filesystem::path& path, int min_count, int workers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmptyCorpus("corpus: cannot open " + path.string());

  std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> counts;  // count, first
  std::int64_t order = 0;
  std::int64_t total_lines = 0;
  std::string line, word;
  while (std::getline(in, line)) {
    ++total_lines;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && detail::is_space(line[i])) ++i;
      std::size_t j = i;
      while (j < line.size() && !detail::is_space(line[j])) ++j;
      if (j > i) {
        word = detail::ascii_lower(std::string_view(line).substr(i, j - i));
        auto [it, inserted] = counts.emplace(word, std::make_pair(0, order));
        if (inserted) ++order;
        ++it->second.first;
      }
      i = j;
    }
  }
  if (counts.empty()) throw EmptyCorpus("corpus: no tokens in " + path.string());

  Corpus corpus;
  for (auto& [w, meta] : counts)
    if (meta.first >= min_count) corpus.vocab.push_back({w, meta.first});
  if (corpus.vocab.empty())
    throw EmptyCorpus("corpus: no word reaches min_count=" + std::to_string(min_count));
  std::vector<std::int64_t> first_seen(corpus.vocab.size());
  for (std::size_t i = 0; i < corpus.vocab.size(); ++i)
    first_seen[i] = counts[corpus.vocab[i].word].second;
  std::vector<std::size_t> perm(corpus.vocab.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (corpus.vocab[a].count != corpus.vocab[b].count)
      return corpus.vocab[a].count > corpus.vocab[b].count;
    return first_seen[a] < first_seen[b];
  });
  std::vector<VocabEntry> sorted;
  sorted.reserve(perm.size());
  for (auto p : perm) sorted.push_back(std::move(corpus.vocab[p]));
  corpus.vocab = std::move(sorted);

  for (std::size_t i = 0; i < corpus.vocab.size(); ++i) {
    corpus.index.emplace(corpus.vocab[i].word, static_cast<std::int32_t>(i));
    corpus.train_words += corpus.vocab[i].count;
  }

  // line-aligned byte ranges for the workers
  corpus.chunk_offsets.assign(1, 0);
  if (workers > 1) {
    std::ifstream scan(path, std::ios::binary);
    const std::int64_t per_chunk = (total_lines + workers - 1) / workers;
    std::int64_t line_no = 0;
    std::string skip;
    for (int w = 1; w < workers; ++w) {
      const std::int64_t target = per_chunk * w;
      while (line_no < target && std::getline(scan, skip)) ++line_no;
      corpus.chunk_offsets.push_back(scan.tellg());
    }
  }
  std::error_code ec;
  corpus.chunk_offsets.push_back(
      static_cast<std::streamoff>(std::filesystem::file_size(path, ec)));
  return corpus;
}

inline std::vector<std::int32_t> build_negative_table(const std::vector<VocabEntry>& vocab) {
  std::vector<std::int32_t> table(kNegativeTableSize);
  double total = 0;
  for (const auto& e : vocab) total += std::pow(static_cast<double>(e.count), 0.75);
  std::size_t i = 0;
  double cumulative = std::pow(static_cast<double>(vocab[0].count), 0.75) / total;
  for (std::size_t a = 0; a < table.size(); ++a) {
    table[a] = static_cast<std::int32_t>(i);
    if (static_cast<double>(a + 1) / table.size() > cumulative && i + 1 < vocab.size()) {
      ++i;
      cumulative += std::pow(static_cast<double>(vocab[i].count), 0.75) / total;
    }
  }
  return table;
}

}  // namespace dsm_detail

// Trains word embeddings over a token-line corpus file (CBOW or skip-gram
// with negative sampling, frequent-word subsampling, linearly decaying
// learning rate). Deterministic given the seed when workers == 1; extra
// workers run lock-free over line chunks.
inline EmbeddingSpace train_embeddings(const std::filesystem::path& corpus_path,
                                       const DsmParams& params) {
  using namespace dsm_detail;
  if (params.dim < 1) throw InvalidParams("dim must be >= 1");
  if (params.min_count < 1) throw InvalidParams("min_count must be >= 1");
  if (params.window < 1) throw InvalidParams("window must be >= 1");
  if (params.negative_samples < 0) throw InvalidParams("negative_samples must be >= 0");
  if (params.epochs < 1) throw InvalidParams("epochs must be >= 1");
  if (params.learning_rate <= 0) throw InvalidParams("learning_rate must be > 0");
  if (params.subsample_threshold < 0) throw InvalidParams("subsample_threshold must be >= 0");
  if (params.workers < 1) throw InvalidParams("workers must be >= 1");

  const Corpus corpus = scan_corpus(corpus_path, params.min_count, params.workers);
  const auto vocab_size = corpus.vocab.size();
  const auto dim = static_cast<std::size_t>(params.dim);

  std::vector<float> syn0(vocab_size * dim);
  std::vector<float> syn1(vocab_size * dim, 0.0f);
  {
    SplitMix64 init_rng(params.seed);
    for (auto& v : syn0)
      v = static_cast<float>((init_rng.unit() - 0.5) / static_cast<double>(dim));
  }
  const auto negative_table = build_negative_table(corpus.vocab);

  const double total_words =
      static_cast<double>(corpus.train_words) * params.epochs + 1.0;
  std::atomic<std::int64_t> words_processed{0};

  auto worker_fn = [&](int worker_id) {
    std::ifstream in(corpus_path, std::ios::binary);
    SplitMix64 rng(params.seed + 0x9e3779b9ull * static_cast<std::uint64_t>(worker_id + 1));
    std::vector<double> neu1(dim), neu1e(dim);
    std::vector<std::int32_t> sentence;
    std::string line;
    double alpha = params.learning_rate;
    std::int64_t local_since_update = 0;

    const std::streamoff begin = corpus.chunk_offsets[worker_id];
    const std::streamoff end = corpus.chunk_offsets[worker_id + 1];

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      in.clear();
      in.seekg(begin);
      while (in.tellg() < end && std::getline(in, line)) {
        sentence.clear();
        std::size_t i = 0;
        while (i < line.size() && sentence.size() < kMaxSentence) {
          while (i < line.size() && detail::is_space(line[i])) ++i;
          std::size_t j = i;
          while (j < line.size() && !detail::is_space(line[j])) ++j;
          if (j > i) {
            const auto it = corpus.index.find(
                detail::ascii_lower(std::string_view(line).substr(i, j - i)));
            if (it != corpus.index.end()) {
              ++local_since_update;
              bool keep = true;
              if (params.subsample_threshold > 0) {
                const double cn = static_cast<double>(corpus.vocab[it->second].count);
                const double threshold_count =
                    params.subsample_threshold * static_cast<double>(corpus.train_words);
                const double keep_prob =
                    (std::sqrt(cn / threshold_count) + 1.0) * threshold_count / cn;
                keep = keep_prob >= 1.0 || rng.unit() < keep_prob;
              }
              if (keep) sentence.push_back(it->second);
            }
          }
          i = j;
        }
        if (local_since_update >= 10000) {
          const auto processed = words_processed.fetch_add(local_since_update) +
                                 local_since_update;
          local_since_update = 0;
          alpha = params.learning_rate *
                  std::max(1.0 - static_cast<double>(processed) / total_words, 1e-4);
        }
        if (sentence.empty()) continue;

        const int window = params.window;
        for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
          const std::int32_t word = sentence[pos];
          const int reduced = static_cast<int>(rng.below(static_cast<std::uint64_t>(window)));

          if (params.architecture == DsmArchitecture::cbow) {
            std::fill(neu1.begin(), neu1.end(), 0.0);
            std::fill(neu1e.begin(), neu1e.end(), 0.0);
            int context_count = 0;
            for (int a = reduced; a < 2 * window + 1 - reduced; ++a) {
              if (a == window) continue;
              const std::int64_t c = static_cast<std::int64_t>(pos) - window + a;
              if (c < 0 || c >= static_cast<std::int64_t>(sentence.size())) continue;
              const float* vec = &syn0[static_cast<std::size_t>(sentence[c]) * dim];
              for (std::size_t k = 0; k < dim; ++k) neu1[k] += vec[k];
              ++context_count;
            }
            if (context_count == 0) continue;
            for (std::size_t k = 0; k < dim; ++k) neu1[k] /= context_count;

            for (int d = 0; d <= params.negative_samples; ++d) {
              std::int32_t target;
              double label;
              if (d == 0) {
                target = word;
                label = 1.0;
              } else {
                target = negative_table[rng.below(negative_table.size())];
                if (target == word) continue;
                label = 0.0;
              }
              float* out = &syn1[static_cast<std::size_t>(target) * dim];
              double f = 0;
              for (std::size_t k = 0; k < dim; ++k) f += neu1[k] * out[k];
              double g;
              if (f > kMaxExp) g = (label - 1.0) * alpha;
              else if (f < -kMaxExp) g = label * alpha;
              else g = (label - 1.0 / (1.0 + std::exp(-f))) * alpha;
              for (std::size_t k = 0; k < dim; ++k) neu1e[k] += g * out[k];
              for (std::size_t k = 0; k < dim; ++k)
                out[k] += static_cast<float>(g * neu1[k]);
            }
            for (int a = reduced; a < 2 * window + 1 - reduced; ++a) {
              if (a == window) continue;
              const std::int64_t c = static_cast<std::int64_t>(pos) - window + a;
              if (c < 0 || c >= static_cast<std::int64_t>(sentence.size())) continue;
              float* vec = &syn0[static_cast<std::size_t>(sentence[c]) * dim];
              for (std::size_t k = 0; k < dim; ++k)
                vec[k] += static_cast<float>(neu1e[k]);
            }
          } else {  // skip-gram
            for (int a = reduced; a < 2 * window + 1 - reduced; ++a) {
              if (a == window) continue;
              const std::int64_t c = static_cast<std::int64_t>(pos) - window + a;
              if (c < 0 || c >= static_cast<std::int64_t>(sentence.size())) continue;
              float* in_vec = &syn0[static_cast<std::size_t>(sentence[c]) * dim];
              std::fill(neu1e.begin(), neu1e.end(), 0.0);
              for (int d = 0; d <= params.negative_samples; ++d) {
                std::int32_t target;
                double label;
                if (d == 0) {
                  target = word;
                  label = 1.0;
                } else {
                  target = negative_table[rng.below(negative_table.size())];
                  if (target == word) continue;
                  label = 0.0;
                }
                float* out = &syn1[static_cast<std::size_t>(target) * dim];
                double f = 0;
                for (std::size_t k = 0; k < dim; ++k) f += in_vec[k] * out[k];
                double g;
                if (f > kMaxExp) g = (label - 1.0) * alpha;
                else if (f < -kMaxExp) g = label * alpha;
                else g = (label - 1.0 / (1.0 + std::exp(-f))) * alpha;
                for (std::size_t k = 0; k < dim; ++k) neu1e[k] += g * out[k];
                for (std::size_t k = 0; k < dim; ++k)
                  out[k] += static_cast<float>(g * in_vec[k]);
              }
              for (std::size_t k = 0; k < dim; ++k)
                in_vec[k] += static_cast<float>(neu1e[k]);
            }
          }
        }
      }
    }
  };

  if (params.workers == 1) {
    worker_fn(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(params.workers);
    for (int w = 0; w < params.workers; ++w) threads.emplace_back(worker_fn, w);
    for (auto& t : threads) t.join();
  }

  for (float v : syn0)
    if (!std::isfinite(v)) throw DsmError("training produced a non-finite component");

  std::vector<std::string> words;
  words.reserve(vocab_size);
  for (const auto& e : corpus.vocab) words.push_back(e.word);
  return EmbeddingSpace(params.dim, std::move(words), std::move(syn0), params);
}

// ---------------------------------------------------------------------------
// Vector text format: header "<vocab_size> <dim>", then one word per line
// followed by its components, all space-separated.

inline void save_embeddings(std::ostream& out, const EmbeddingSpace& space) {
  out << space.vocab_size() << ' ' << space.dim() << '\n';
  out << std::setprecision(9);
  for (std::size_t i = 0; i < space.vocab_size(); ++i) {
    out << space.words()[i];
    for (float v : space.row(i)) out << ' ' << v;
    out << '\n';
  }
}

inline void save_embeddings(const std::filesystem::path& path, const EmbeddingSpace& space) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DsmError("cannot write " + path.string());
  save_embeddings(out, space);
}

inline EmbeddingSpace load_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw VectorParseError("vector file: empty input");
  std::size_t vocab_size = 0, dim = 0;
  {
    const char* begin = line.data();
    const char* end = line.data() + line.size();
    auto r1 = std::from_chars(begin, end, vocab_size);
    if (r1.ec != std::errc{}) throw VectorParseError("vector file: bad header");
    const char* p = r1.ptr;
    while (p < end && *p == ' ') ++p;
    auto r2 = std::from_chars(p, end, dim);
    if (r2.ec != std::errc{} || dim == 0) throw VectorParseError("vector file: bad header");
  }

  std::vector<std::string> words;
  std::vector<float> data;
  words.reserve(vocab_size);
  data.reserve(vocab_size * dim);
  std::unordered_map<std::string, std::size_t> seen;

  for (std::size_t row = 0; row < vocab_size; ++row) {
    if (!std::getline(in, line))
      throw VectorParseError("vector file: expected " + std::to_string(vocab_size) +
                             " rows, found " + std::to_string(row));
    const char* p = line.data();
    const char* end = line.data() + line.size();
    const char* word_end = p;
    while (word_end < end && *word_end != ' ') ++word_end;
    if (word_end == p)
      throw VectorParseError("vector file: row " + std::to_string(row + 2) + ": missing word");
    std::string word = detail::ascii_lower(std::string_view(p, word_end - p));
    if (!seen.emplace(word, row).second)
      throw VectorParseError("vector file: duplicate word '" + word + "'");
    p = word_end;
    std::size_t found = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float value = 0;
      auto r = std::from_chars(p, end, value);
      if (r.ec != std::errc{})
        throw VectorParseError("vector file: row " + std::to_string(row + 2) +
                               ": bad component");
      if (!std::isfinite(value))
        throw VectorParseError("vector file: row " + std::to_string(row + 2) +
                               ": non-finite component");
      data.push_back(value);
      ++found;
      p = r.ptr;
    }
    if (found != dim) throw DimensionMismatch(dim, found);
    words.push_back(std::move(word));
  }
  return EmbeddingSpace(static_cast<int>(dim), std::move(words), std::move(data));
}

inline EmbeddingSpace load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VectorParseError("vector file: cannot open " + path.string());
  return load_embeddings(in);
}

// ---------------------------------------------------------------------------

/// Document vector by superposition: componentwise sum over in-vocabulary
/// tokens; out-of-vocabulary tokens are skipped, so an all-OOV document is
/// the zero vector.
inline std::vector<double> doc_vector(std::span<const Token> tokens, const EmbeddingSpace& space) {
  std::vector<double> sum(static_cast<std::size_t>(space.dim()), 0.0);
  for (const auto& token : tokens) {
    if (const auto vec = space.vector(token.normalized)) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += (*vec)[k];
    }
  }
  return sum;
}

/// Class profile vectors: each prototype is the sum of the vectors of all
/// in-vocabulary lexicon words of that class; the subjective prototype is
/// p_pos + p_neg. Prefix-pattern entries contribute through every vocabulary
/// word they match. A class with no in-vocabulary words yields a zero vector.
struct PrototypeSet {
  std::vector<double> pos, neg, neu, subj;
  int dim = 0;
};

inline PrototypeSet build_prototypes(const EmbeddingSpace& space, const Lexicon& lexicon) {
  PrototypeSet prototypes;
  prototypes.dim = space.dim();
  const auto d = static_cast<std::size_t>(space.dim());
  prototypes.pos.assign(d, 0.0);
  prototypes.neg.assign(d, 0.0);
  prototypes.neu.assign(d, 0.0);
  prototypes.subj.assign(d, 0.0);
  for (std::size_t i = 0; i < space.vocab_size(); ++i) {
    const auto match = lexicon.lookup_word(space.words()[i]);
    if (!match) continue;
    auto& target = match->cls == PolarityClass::positive ? prototypes.pos
                   : match->cls == PolarityClass::negative ? prototypes.neg
                                                           : prototypes.neu;
    const auto row = space.row(i);
    for (std::size_t k = 0; k < d; ++k) target[k] += row[k];
  }
  for (std::size_t k = 0; k < d; ++k) prototypes.subj[k] = prototypes.pos[k] + prototypes.neg[k];
  return prototypes;
}

/// Cosine similarity with the zero-vector convention: 0 when either norm
/// vanishes. Computed as dot/sqrt(|a||b|) so cosine(v,v) is exactly 1.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace sentikit
