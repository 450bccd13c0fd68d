// sentikit: sentiment polarity toolkit for developer text.
// One binary, one subcommand per pipeline stage; all outputs are
// deterministic given --seed.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sentikit/baseline.hpp"
#include "sentikit/corpus.hpp"
#include "sentikit/csv.hpp"
#include "sentikit/dsm.hpp"
#include "sentikit/evalkit.hpp"
#include "sentikit/features.hpp"
#include "sentikit/learner.hpp"
#include "sentikit/lexicon.hpp"
#include "sentikit/types.hpp"

namespace {

using namespace sentikit;

// ---------------------------------------------------------------------------
// Shared plumbing

/// JSON config file whose keys supply defaults for options not given on the
/// command line.
class ConfigDefaults {
 public:
  explicit ConfigDefaults(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    in >> values_;
  }

  template <class T>
  void apply(const CLI::Option* opt, const char* key, T& value) const {
    if (opt != nullptr && opt->count() > 0) return;
    if (auto it = values_.find(key); it != values_.end()) value = it->get<T>();
  }

 private:
  nlohmann::json values_ = nlohmann::json::object();
};

std::vector<RawPost> load_posts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open post file " + path);
  return read_posts_csv(in);
}

std::unordered_map<std::string, Polarity> load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open label file " + path);
  csv::skip_bom(in);
  std::size_t line = 1;
  auto header = csv::read_record(in, line);
  if (!header || *header != std::vector<std::string>{"id", "label"})
    throw std::runtime_error("label file: expected header id,label");
  std::unordered_map<std::string, Polarity> labels;
  while (auto record = csv::read_record(in, line)) {
    if (record->size() == 1 && (*record)[0].empty()) continue;
    if (record->size() != 2) throw std::runtime_error("label file: expected 2 fields per row");
    const auto polarity = parse_polarity((*record)[1]);
    if (!polarity)
      throw std::runtime_error("label file: unknown label '" + (*record)[1] + "' for id " +
                               (*record)[0]);
    if (!labels.emplace((*record)[0], *polarity).second)
      throw std::runtime_error("label file: duplicate id " + (*record)[0]);
  }
  return labels;
}

std::vector<Polarity> join_labels(const std::vector<RawPost>& posts,
                                  const std::unordered_map<std::string, Polarity>& labels) {
  std::vector<Polarity> out;
  out.reserve(posts.size());
  for (const auto& post : posts) {
    const auto it = labels.find(post.id);
    if (it == labels.end()) throw std::runtime_error("no label for post id " + post.id);
    out.push_back(it->second);
  }
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

Tokenizer make_tokenizer(const std::optional<Lexicon>& lexicon) {
  return lexicon ? Tokenizer(lexicon->emoticon_surfaces()) : Tokenizer();
}

std::optional<Lexicon> maybe_load_lexicon(const std::string& dir) {
  if (dir.empty()) return std::nullopt;
  return Lexicon::load_directory(dir);
}

Lexicon require_lexicon(const std::string& dir) {
  if (dir.empty()) throw std::runtime_error("--lexicon-dir is required");
  return Lexicon::load_directory(dir);
}

/// Index-stable parallel map over [0, n).
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> threads;
  const int count = std::min<int>(workers, static_cast<int>(n));
  threads.reserve(count);
  for (int t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

std::vector<CleanDocument> clean_all(const std::vector<RawPost>& posts,
                                     const Tokenizer& tokenizer, int workers) {
  std::vector<CleanDocument> docs(posts.size());
  parallel_for(posts.size(), workers, [&](std::size_t i) {
    docs[i] = clean_post(posts[i], tokenizer);
  });
  return docs;
}

struct PipelineResources {
  Lexicon lexicon;
  EmbeddingSpace space;
  PrototypeSet prototypes;
  Tokenizer tokenizer;
};

PipelineResources load_pipeline_resources(const std::string& lexicon_dir,
                                          const std::string& vectors_path) {
  PipelineResources r{require_lexicon(lexicon_dir), {}, {}, Tokenizer()};
  if (vectors_path.empty()) throw std::runtime_error("--vectors is required");
  r.space = load_embeddings(std::filesystem::path(vectors_path));
  r.prototypes = build_prototypes(r.space, r.lexicon);
  r.tokenizer = make_tokenizer(r.lexicon);
  return r;
}

// ---------------------------------------------------------------------------
// Subcommands

struct PreprocessOpts {
  std::string in, out, corpus_out, lexicon_dir;
  int workers = 1;
};

void cmd_preprocess(const PreprocessOpts& o) {
  const auto lexicon = maybe_load_lexicon(o.lexicon_dir);
  const auto tokenizer = make_tokenizer(lexicon);
  const auto posts = load_posts(o.in);
  const auto docs = clean_all(posts, tokenizer, o.workers);

  auto out = open_output(o.out);
  write_posts_csv_header(out);
  for (const auto& doc : docs) write_post_csv_row(out, doc.id, doc.type, doc.text);

  if (!o.corpus_out.empty()) {
    auto corpus = open_output(o.corpus_out);
    for (const auto& doc : docs) write_corpus_line(corpus, doc);
  }
  std::cerr << "preprocess: " << docs.size() << " posts\n";
}

struct BaselineOpts {
  std::string in, out, lexicon_dir;
  bool explain = false;
};

void cmd_baseline(const BaselineOpts& o) {
  const auto lexicon = require_lexicon(o.lexicon_dir);
  const auto tokenizer = make_tokenizer(lexicon);
  const auto posts = load_posts(o.in);
  auto out = open_output(o.out);
  out << "id,p,n,label\n";
  for (const auto& post : posts) {
    const auto doc = clean_post(post, tokenizer);
    const auto scores = score_document(doc, lexicon);
    csv::write_record(out, {doc.id, std::to_string(scores.p), std::to_string(scores.n),
                            std::string(to_string(trinary(scores)))});
    if (o.explain) std::cerr << doc.id << ": " << explain_document(doc, lexicon);
  }
  std::cerr << "baseline: " << posts.size() << " posts scored\n";
}

struct TrainDsmOpts {
  std::string corpus, out, arch = "cbow";
  DsmParams params;
};

void cmd_train_dsm(const TrainDsmOpts& o) {
  DsmParams params = o.params;
  const auto arch = parse_architecture(o.arch);
  if (!arch) throw std::runtime_error("unknown architecture '" + o.arch + "'");
  params.architecture = *arch;
  if (params.workers > 1)
    std::cerr << "train-dsm: workers > 1 trades determinism for speed\n";
  const auto space = train_embeddings(o.corpus, params);
  save_embeddings(std::filesystem::path(o.out), space);
  std::cerr << "train-dsm: vocabulary " << space.vocab_size() << ", dim " << space.dim() << "\n";
}

struct ExtractOpts {
  std::string in, labels, lexicon_dir, vectors, out, schema_out, schema_in;
  std::string feature_set = "full";
  int workers = 1;
};

void cmd_extract(const ExtractOpts& o) {
  const auto setting = parse_feature_setting(o.feature_set);
  if (!setting) throw std::runtime_error("unknown feature set '" + o.feature_set + "'");
  if (o.schema_out.empty() == o.schema_in.empty())
    throw std::runtime_error("exactly one of --schema-out (build) or --schema (reuse) required");

  const auto resources = load_pipeline_resources(o.lexicon_dir, o.vectors);
  const auto posts = load_posts(o.in);
  const auto label_map = load_labels(o.labels);
  const auto labels = join_labels(posts, label_map);
  const auto docs = clean_all(posts, resources.tokenizer, o.workers);

  FeatureSchema schema = o.schema_in.empty() ? FeatureSchema::build(docs)
                                             : FeatureSchema::load(o.schema_in);
  if (!o.schema_out.empty()) schema.save(o.schema_out);

  std::vector<FeatureVector> vectors(docs.size());
  parallel_for(docs.size(), o.workers, [&](std::size_t i) {
    vectors[i] = assemble(docs[i], resources.lexicon, schema, resources.space,
                          resources.prototypes, *setting);
  });

  auto out = open_output(o.out);
  for (std::size_t i = 0; i < vectors.size(); ++i)
    write_feature_line(out, labels[i], vectors[i]);
  std::cerr << "extract: " << docs.size() << " documents, " << schema.total_dim()
            << " feature columns\n";
}

struct TrainOpts {
  std::string features, schema, model_out;
  double c = 0.05;
  std::uint64_t seed = 1;
  double tolerance = 0.1;
  int max_passes = 1000;
};

LabeledDataset load_dataset(const std::string& features_path, const FeatureSchema& schema) {
  std::ifstream in(features_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file " + features_path);
  auto matrix = read_feature_matrix(in, schema.schema_id(), schema.total_dim());
  LabeledDataset data;
  data.vectors = std::move(matrix.vectors);
  data.labels = std::move(matrix.labels);
  data.schema_id = schema.schema_id();
  data.feature_dim = schema.total_dim();
  return data;
}

void cmd_train(const TrainOpts& o) {
  const auto schema = FeatureSchema::load(o.schema);
  const auto data = load_dataset(o.features, schema);
  TrainOptions options;
  options.tolerance = o.tolerance;
  options.max_passes = o.max_passes;
  const auto model = train(data, o.c, o.seed, options);
  model.save(o.model_out);
  std::cerr << "train: " << data.size() << " examples, C=" << o.c << "\n";
}

struct TuneOpts {
  std::string features, schema, out;
  std::vector<double> grid;
  int folds = 10;
  std::uint64_t seed = 1;
};

void cmd_tune(const TuneOpts& o) {
  const auto schema = FeatureSchema::load(o.schema);
  const auto data = load_dataset(o.features, schema);
  std::vector<double> grid = o.grid;
  if (grid.empty()) grid.assign(kDefaultCGrid.begin(), kDefaultCGrid.end());
  const auto result = tune_c(data, grid, o.folds, o.seed);
  for (const auto& [c, accuracy] : result.accuracy_by_c)
    std::cout << "C=" << c << " accuracy=" << accuracy << "\n";
  std::cout << "best_C=" << result.best_c << "\n";
  if (!o.out.empty()) {
    nlohmann::json j;
    j["best_c"] = result.best_c;
    for (const auto& [c, accuracy] : result.accuracy_by_c)
      j["grid"].push_back({{"c", c}, {"accuracy", accuracy}});
    open_output(o.out) << j.dump(2) << '\n';
  }
}

struct ClassifyOpts {
  std::string in, out, lexicon_dir, vectors, schema, model;
  std::string feature_set = "full";
  int workers = 1;
};

void cmd_classify(const ClassifyOpts& o) {
  const auto setting = parse_feature_setting(o.feature_set);
  if (!setting) throw std::runtime_error("unknown feature set '" + o.feature_set + "'");
  const auto resources = load_pipeline_resources(o.lexicon_dir, o.vectors);
  const auto schema = FeatureSchema::load(o.schema);
  const auto model = PolarityModel::load(o.model);
  const auto posts = load_posts(o.in);
  const auto docs = clean_all(posts, resources.tokenizer, o.workers);

  std::vector<Polarity> predictions(docs.size());
  parallel_for(docs.size(), o.workers, [&](std::size_t i) {
    const auto fv = assemble(docs[i], resources.lexicon, schema, resources.space,
                             resources.prototypes, *setting);
    predictions[i] = predict(model, fv).label;
  });

  auto out = open_output(o.out);
  out << "id,label\n";
  for (std::size_t i = 0; i < docs.size(); ++i)
    csv::write_record(out, {docs[i].id, std::string(to_string(predictions[i]))});
  std::cerr << "classify: " << docs.size() << " posts\n";
}

struct EvaluateOpts {
  std::string gold, pred, out;
};

/// Reads a prediction CSV: either id,label (classify output) or
/// id,p,n,label (baseline output). "undetermined" rows are dropped from the
/// evaluation set, per the trinary mapping rule.
std::unordered_map<std::string, std::string> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open prediction file " + path);
  csv::skip_bom(in);
  std::size_t line = 1;
  auto header = csv::read_record(in, line);
  std::size_t label_col;
  if (header && *header == std::vector<std::string>{"id", "label"}) label_col = 1;
  else if (header && *header == std::vector<std::string>{"id", "p", "n", "label"}) label_col = 3;
  else throw std::runtime_error("prediction file: expected header id,label or id,p,n,label");
  std::unordered_map<std::string, std::string> preds;
  while (auto record = csv::read_record(in, line)) {
    if (record->size() == 1 && (*record)[0].empty()) continue;
    if (record->size() != label_col + 1)
      throw std::runtime_error("prediction file: wrong field count");
    preds[(*record)[0]] = (*record)[label_col];
  }
  return preds;
}

void cmd_evaluate(const EvaluateOpts& o) {
  const auto gold_map = load_labels(o.gold);
  const auto pred_map = load_predictions(o.pred);
  std::vector<Polarity> gold, pred;
  std::size_t undetermined = 0;
  for (const auto& [id, gold_label] : gold_map) {
    const auto it = pred_map.find(id);
    if (it == pred_map.end()) throw std::runtime_error("no prediction for id " + id);
    if (it->second == "undetermined") {
      ++undetermined;  // removed from the evaluation set
      continue;
    }
    const auto p = parse_polarity(it->second);
    if (!p) throw std::runtime_error("prediction file: unknown label '" + it->second + "'");
    gold.push_back(gold_label);
    pred.push_back(*p);
  }
  if (undetermined > 0)
    std::cerr << "evaluate: removed " << undetermined << " undetermined prediction(s)\n";
  const auto cm = confusion(gold, pred);
  const auto report = prf(cm);
  std::cout << format_prf_table({{"model", report}});
  std::cout << "\nConfusion (rows gold, cols predicted; negative/neutral/positive):\n";
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t p2 = 0; p2 < 3; ++p2) std::cout << '\t' << cm.counts[g][p2];
    std::cout << '\n';
  }
  if (!o.out.empty()) {
    nlohmann::json j = to_json(report);
    j["removed_undetermined"] = undetermined;
    for (std::size_t g = 0; g < 3; ++g)
      for (std::size_t p2 = 0; p2 < 3; ++p2)
        j["confusion"][std::string(to_string(static_cast<Polarity>(g)))]
         [std::string(to_string(static_cast<Polarity>(p2)))] = cm.counts[g][p2];
    open_output(o.out) << j.dump(2) << '\n';
  }
}

struct AblateOpts {
  std::string in, labels, lexicon_dir, vectors, out;
  double train_fraction = 0.7;
  double c = 0.05;
  std::uint64_t seed = 1;
  int workers = 1;
};

void cmd_ablate(const AblateOpts& o) {
  const auto resources = load_pipeline_resources(o.lexicon_dir, o.vectors);
  const auto posts = load_posts(o.in);
  const auto label_map = load_labels(o.labels);
  const auto labels = join_labels(posts, label_map);
  const auto docs = clean_all(posts, resources.tokenizer, o.workers);

  const auto idx = stratified_split_indices(labels, o.train_fraction, o.seed);
  std::vector<CleanDocument> train_docs, test_docs;
  std::vector<Polarity> train_labels, test_labels;
  for (const auto i : idx.train) {
    train_docs.push_back(docs[i]);
    train_labels.push_back(labels[i]);
  }
  for (const auto i : idx.test) {
    test_docs.push_back(docs[i]);
    test_labels.push_back(labels[i]);
  }

  AblationConfig config;
  config.C = o.c;
  config.seed = o.seed;
  const auto rows = ablation_run(train_docs, train_labels, test_docs, test_labels,
                                 resources.lexicon, resources.space, resources.prototypes,
                                 config);

  std::vector<std::pair<std::string, PRFReport>> table;
  for (const auto& row : rows) table.emplace_back(std::string(to_string(row.setting)), row.report);
  std::cout << format_prf_table(table);
  std::cout << "\nChi-squared vs previous setting:\n";
  for (const auto& row : rows) {
    if (!row.vs_previous) continue;
    std::cout << "  " << to_string(row.setting) << ": statistic=" << row.vs_previous->statistic
              << " dof=" << row.vs_previous->dof << " p=" << row.vs_previous->p_value
              << (row.vs_previous->p_value < 0.05 ? " *" : "") << "\n";
  }
  if (!o.out.empty()) {
    nlohmann::json j;
    for (const auto& row : rows) {
      nlohmann::json r;
      r["setting"] = std::string(to_string(row.setting));
      r["report"] = to_json(row.report);
      if (row.vs_previous) {
        r["chi_squared_vs_previous"] = {{"statistic", row.vs_previous->statistic},
                                        {"dof", row.vs_previous->dof},
                                        {"p_value", row.vs_previous->p_value}};
      }
      j.push_back(std::move(r));
    }
    open_output(o.out) << j.dump(2) << '\n';
  }
}

struct KappaOpts {
  std::string annotations, out;
};

void cmd_kappa(const KappaOpts& o) {
  std::ifstream in(o.annotations, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open annotation file " + o.annotations);
  const auto records = read_annotations_csv(in);

  // align coder pairs over shared items
  std::map<std::string, std::map<std::string, AnnotationPolarity>> by_coder;
  for (const auto& r : records) by_coder[r.coder_id][r.item_id] = r.polarity;

  nlohmann::json j = nlohmann::json::array();
  std::cout << "coder_a\tcoder_b\titems\tweighted_kappa\tobserved_agreement\n";
  double kappa_sum = 0, agreement_sum = 0;
  std::size_t pair_count = 0;
  for (auto a = by_coder.begin(); a != by_coder.end(); ++a) {
    for (auto b = std::next(a); b != by_coder.end(); ++b) {
      std::vector<AnnotationPolarity> va, vb;
      for (const auto& [item, polarity] : a->second) {
        const auto it = b->second.find(item);
        if (it == b->second.end()) continue;
        va.push_back(polarity);
        vb.push_back(it->second);
      }
      if (va.empty()) continue;
      const auto kappa = weighted_kappa(va, vb);
      const double agreement = observed_agreement(va, vb);
      kappa_sum += kappa.value;
      agreement_sum += agreement;
      ++pair_count;
      std::cout << a->first << '\t' << b->first << '\t' << va.size() << '\t' << kappa.value
                << (kappa.degenerate ? " (degenerate)" : "") << '\t' << agreement << '\n';
      j.push_back({{"coder_a", a->first},
                   {"coder_b", b->first},
                   {"items", va.size()},
                   {"weighted_kappa", kappa.value},
                   {"degenerate", kappa.degenerate},
                   {"observed_agreement", agreement}});
    }
  }
  if (pair_count > 0) {
    std::cout << "average\t\t\t" << kappa_sum / pair_count << '\t' << agreement_sum / pair_count
              << '\n';
  }
  if (!o.out.empty()) {
    nlohmann::json report;
    report["pairs"] = std::move(j);
    if (pair_count > 0) {
      report["average_weighted_kappa"] = kappa_sum / pair_count;
      report["average_observed_agreement"] = agreement_sum / pair_count;
    }
    open_output(o.out) << report.dump(2) << '\n';
  }
}

struct VoteOpts {
  std::string annotations, out;
  bool keep_excluded = false;
};

void cmd_vote(const VoteOpts& o) {
  std::ifstream in(o.annotations, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open annotation file " + o.annotations);
  const auto records = read_annotations_csv(in);
  const auto gold = vote_items(records);

  auto out = open_output(o.out);
  out << "id,label\n";
  std::size_t excluded = 0;
  for (const auto& g : gold) {
    if (g.label) {
      csv::write_record(out, {g.item_id, std::string(to_string(*g.label))});
    } else {
      ++excluded;
      if (o.keep_excluded) csv::write_record(out, {g.item_id, "excluded"});
    }
  }
  std::cerr << "vote: " << gold.size() << " items, " << excluded << " excluded\n";
}

struct SampleOpts {
  std::string in, lexicon_dir, out;
  std::size_t n_per_cell = 400;
  std::uint64_t seed = 1;
};

void cmd_sample(const SampleOpts& o) {
  const auto lexicon = require_lexicon(o.lexicon_dir);
  const auto tokenizer = make_tokenizer(lexicon);
  const auto posts = load_posts(o.in);
  std::vector<ScoredPost> scored;
  scored.reserve(posts.size());
  for (const auto& post : posts) {
    const auto doc = clean_post(post, tokenizer);
    scored.push_back({post, trinary(score_document(doc, lexicon))});
  }
  const auto selected = sample_for_annotation(scored, o.n_per_cell, o.seed);
  auto out = open_output(o.out);
  write_posts_csv_header(out);
  for (const auto i : selected)
    write_post_csv_row(out, scored[i].post.id, scored[i].post.type, scored[i].post.body);
  std::cerr << "sample: " << selected.size() << " posts (" << o.n_per_cell << " per cell)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentiment polarity toolkit for developer text"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON file supplying defaults for options not given on the command line");

  auto config = [&config_path] { return ConfigDefaults(config_path); };

  // preprocess
  auto pre = std::make_shared<PreprocessOpts>();
  auto* pre_cmd = app.add_subcommand("preprocess", "strip markup and tokenize posts");
  pre_cmd->add_option("--in", pre->in, "input post CSV (id,post_type,text)")->required();
  pre_cmd->add_option("--out", pre->out, "cleaned post CSV")->required();
  pre_cmd->add_option("--corpus-out", pre->corpus_out, "token-line corpus for DSM training");
  auto* pre_lex = pre_cmd->add_option("--lexicon-dir", pre->lexicon_dir,
                                      "lexicon directory (emoticon inventory for the tokenizer)");
  auto* pre_workers = pre_cmd->add_option("--workers", pre->workers, "parallel workers");
  pre_cmd->callback([=] {
    const auto c = config();
    c.apply(pre_lex, "lexicon_dir", pre->lexicon_dir);
    c.apply(pre_workers, "workers", pre->workers);
    cmd_preprocess(*pre);
  });

  // baseline
  auto base = std::make_shared<BaselineOpts>();
  auto* base_cmd = app.add_subcommand("baseline", "lexicon-based polarity scores and labels");
  base_cmd->add_option("--in", base->in, "input post CSV")->required();
  base_cmd->add_option("--out", base->out, "output CSV id,p,n,label")->required();
  auto* base_lex = base_cmd->add_option("--lexicon-dir", base->lexicon_dir, "lexicon directory");
  base_cmd->add_flag("--explain", base->explain, "print per-token score traces to stderr");
  base_cmd->callback([=] {
    const auto c = config();
    c.apply(base_lex, "lexicon_dir", base->lexicon_dir);
    cmd_baseline(*base);
  });

  // train-dsm
  auto dsm = std::make_shared<TrainDsmOpts>();
  auto* dsm_cmd = app.add_subcommand("train-dsm", "train word embeddings on a token-line corpus");
  dsm_cmd->add_option("--corpus", dsm->corpus, "token-line corpus file")->required();
  dsm_cmd->add_option("--out", dsm->out, "output vector text file")->required();
  dsm_cmd->add_option("--dim", dsm->params.dim, "vector dimensionality");
  dsm_cmd->add_option("--arch", dsm->arch, "cbow or skipgram");
  dsm_cmd->add_option("--min-count", dsm->params.min_count, "discard rarer words");
  dsm_cmd->add_option("--window", dsm->params.window, "context window size");
  dsm_cmd->add_option("--negative", dsm->params.negative_samples, "negative samples per target");
  dsm_cmd->add_option("--sample", dsm->params.subsample_threshold,
                      "frequent-word subsampling threshold");
  dsm_cmd->add_option("--epochs", dsm->params.epochs, "training passes over the corpus");
  dsm_cmd->add_option("--alpha", dsm->params.learning_rate, "initial learning rate");
  auto* dsm_seed = dsm_cmd->add_option("--seed", dsm->params.seed, "RNG seed");
  auto* dsm_workers =
      dsm_cmd->add_option("--workers", dsm->params.workers, "training threads (1 = deterministic)");
  dsm_cmd->callback([=] {
    const auto c = config();
    c.apply(dsm_seed, "seed", dsm->params.seed);
    c.apply(dsm_workers, "workers", dsm->params.workers);
    cmd_train_dsm(*dsm);
  });

  // extract
  auto ext = std::make_shared<ExtractOpts>();
  auto* ext_cmd = app.add_subcommand("extract", "assemble sparse feature vectors");
  ext_cmd->add_option("--in", ext->in, "input post CSV")->required();
  ext_cmd->add_option("--labels", ext->labels, "label CSV (id,label)")->required();
  ext_cmd->add_option("--out", ext->out, "sparse feature matrix output")->required();
  ext_cmd->add_option("--schema-out", ext->schema_out, "build the schema and write it here");
  auto* ext_schema = ext_cmd->add_option("--schema", ext->schema_in, "reuse a frozen schema");
  auto* ext_lex = ext_cmd->add_option("--lexicon-dir", ext->lexicon_dir, "lexicon directory");
  auto* ext_vec = ext_cmd->add_option("--vectors", ext->vectors, "embedding vector file");
  auto* ext_set = ext_cmd->add_option("--feature-set", ext->feature_set,
                                      "ngrams|keyword|keyword+semantic|full");
  auto* ext_workers = ext_cmd->add_option("--workers", ext->workers, "parallel workers");
  ext_cmd->callback([=] {
    const auto c = config();
    c.apply(ext_lex, "lexicon_dir", ext->lexicon_dir);
    c.apply(ext_vec, "vectors", ext->vectors);
    c.apply(ext_schema, "schema", ext->schema_in);
    c.apply(ext_set, "feature_set", ext->feature_set);
    c.apply(ext_workers, "workers", ext->workers);
    cmd_extract(*ext);
  });

  // train
  auto tr = std::make_shared<TrainOpts>();
  auto* tr_cmd = app.add_subcommand("train", "train the linear SVM polarity model");
  tr_cmd->add_option("--features", tr->features, "sparse feature matrix")->required();
  auto* tr_schema = tr_cmd->add_option("--schema", tr->schema, "schema JSON");
  tr_cmd->add_option("--model-out", tr->model_out, "output model JSON")->required();
  auto* tr_c = tr_cmd->add_option("--c", tr->c, "SVM cost parameter");
  auto* tr_seed = tr_cmd->add_option("--seed", tr->seed, "RNG seed");
  tr_cmd->add_option("--tolerance", tr->tolerance, "solver stopping tolerance");
  tr_cmd->add_option("--max-passes", tr->max_passes, "solver pass cap");
  tr_cmd->callback([=] {
    const auto c = config();
    c.apply(tr_schema, "schema", tr->schema);
    c.apply(tr_c, "c", tr->c);
    c.apply(tr_seed, "seed", tr->seed);
    if (tr->schema.empty()) throw std::runtime_error("--schema is required");
    cmd_train(*tr);
  });

  // tune
  auto tu = std::make_shared<TuneOpts>();
  auto* tu_cmd = app.add_subcommand("tune", "grid-search C by cross-validated accuracy");
  tu_cmd->add_option("--features", tu->features, "sparse feature matrix")->required();
  auto* tu_schema = tu_cmd->add_option("--schema", tu->schema, "schema JSON");
  auto* tu_grid = tu_cmd->add_option("--c-grid", tu->grid, "candidate C values");
  auto* tu_folds = tu_cmd->add_option("--folds", tu->folds, "cross-validation folds");
  auto* tu_seed = tu_cmd->add_option("--seed", tu->seed, "RNG seed");
  tu_cmd->add_option("--out", tu->out, "tuning report JSON");
  tu_cmd->callback([=] {
    const auto c = config();
    c.apply(tu_schema, "schema", tu->schema);
    c.apply(tu_grid, "c_grid", tu->grid);
    c.apply(tu_folds, "folds", tu->folds);
    c.apply(tu_seed, "seed", tu->seed);
    if (tu->schema.empty()) throw std::runtime_error("--schema is required");
    cmd_tune(*tu);
  });

  // classify
  auto cl = std::make_shared<ClassifyOpts>();
  auto* cl_cmd = app.add_subcommand("classify", "predict polarity with a trained model");
  cl_cmd->add_option("--in", cl->in, "input post CSV")->required();
  cl_cmd->add_option("--out", cl->out, "output CSV id,label")->required();
  auto* cl_lex = cl_cmd->add_option("--lexicon-dir", cl->lexicon_dir, "lexicon directory");
  auto* cl_vec = cl_cmd->add_option("--vectors", cl->vectors, "embedding vector file");
  auto* cl_schema = cl_cmd->add_option("--schema", cl->schema, "schema JSON");
  auto* cl_model = cl_cmd->add_option("--model", cl->model, "model JSON");
  auto* cl_set = cl_cmd->add_option("--feature-set", cl->feature_set,
                                    "ngrams|keyword|keyword+semantic|full");
  auto* cl_workers = cl_cmd->add_option("--workers", cl->workers, "parallel workers");
  cl_cmd->callback([=] {
    const auto c = config();
    c.apply(cl_lex, "lexicon_dir", cl->lexicon_dir);
    c.apply(cl_vec, "vectors", cl->vectors);
    c.apply(cl_schema, "schema", cl->schema);
    c.apply(cl_model, "model", cl->model);
    c.apply(cl_set, "feature_set", cl->feature_set);
    c.apply(cl_workers, "workers", cl->workers);
    if (cl->schema.empty()) throw std::runtime_error("--schema is required");
    if (cl->model.empty()) throw std::runtime_error("--model is required");
    cmd_classify(*cl);
  });

  // evaluate
  auto ev = std::make_shared<EvaluateOpts>();
  auto* ev_cmd = app.add_subcommand("evaluate", "score predictions against gold labels");
  ev_cmd->add_option("--gold", ev->gold, "gold label CSV (id,label)")->required();
  ev_cmd->add_option("--pred", ev->pred, "prediction CSV (id,label or id,p,n,label)")->required();
  ev_cmd->add_option("--out", ev->out, "report JSON");
  ev_cmd->callback([=] { cmd_evaluate(*ev); });

  // ablate
  auto ab = std::make_shared<AblateOpts>();
  auto* ab_cmd = app.add_subcommand("ablate", "incremental feature-setting evaluation");
  ab_cmd->add_option("--in", ab->in, "input post CSV")->required();
  ab_cmd->add_option("--labels", ab->labels, "label CSV (id,label)")->required();
  auto* ab_lex = ab_cmd->add_option("--lexicon-dir", ab->lexicon_dir, "lexicon directory");
  auto* ab_vec = ab_cmd->add_option("--vectors", ab->vectors, "embedding vector file");
  auto* ab_frac = ab_cmd->add_option("--train-fraction", ab->train_fraction, "train split share");
  auto* ab_c = ab_cmd->add_option("--c", ab->c, "SVM cost parameter");
  auto* ab_seed = ab_cmd->add_option("--seed", ab->seed, "RNG seed");
  auto* ab_workers = ab_cmd->add_option("--workers", ab->workers, "parallel workers");
  ab_cmd->add_option("--out", ab->out, "report JSON");
  ab_cmd->callback([=] {
    const auto c = config();
    c.apply(ab_lex, "lexicon_dir", ab->lexicon_dir);
    c.apply(ab_vec, "vectors", ab->vectors);
    c.apply(ab_frac, "train_fraction", ab->train_fraction);
    c.apply(ab_c, "c", ab->c);
    c.apply(ab_seed, "seed", ab->seed);
    c.apply(ab_workers, "workers", ab->workers);
    cmd_ablate(*ab);
  });

  // kappa
  auto ka = std::make_shared<KappaOpts>();
  auto* ka_cmd = app.add_subcommand("kappa", "pairwise inter-rater agreement");
  ka_cmd->add_option("--annotations", ka->annotations, "annotation CSV")->required();
  ka_cmd->add_option("--out", ka->out, "report JSON");
  ka_cmd->callback([=] { cmd_kappa(*ka); });

  // vote
  auto vo = std::make_shared<VoteOpts>();
  auto* vo_cmd = app.add_subcommand("vote", "majority-vote gold labels from annotations");
  vo_cmd->add_option("--annotations", vo->annotations, "annotation CSV")->required();
  vo_cmd->add_option("--out", vo->out, "gold label CSV")->required();
  vo_cmd->add_flag("--keep-excluded", vo->keep_excluded, "write excluded items too");
  vo_cmd->callback([=] { cmd_vote(*vo); });

  // sample
  auto sa = std::make_shared<SampleOpts>();
  auto* sa_cmd = app.add_subcommand("sample", "draw an annotation sample by post type x polarity");
  sa_cmd->add_option("--in", sa->in, "input post CSV")->required();
  sa_cmd->add_option("--out", sa->out, "sampled post CSV")->required();
  auto* sa_lex = sa_cmd->add_option("--lexicon-dir", sa->lexicon_dir, "lexicon directory");
  sa_cmd->add_option("--n-per-cell", sa->n_per_cell, "posts per (type x polarity) cell");
  auto* sa_seed = sa_cmd->add_option("--seed", sa->seed, "RNG seed");
  sa_cmd->callback([=] {
    const auto c = config();
    c.apply(sa_lex, "lexicon_dir", sa->lexicon_dir);
    c.apply(sa_seed, "seed", sa->seed);
    cmd_sample(*sa);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
