#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sentikit/random.hpp"
#include "test_util.hpp"

using testutil::TempDir;
using testutil::read_file;
using testutil::write_file;

namespace {

const std::string kCli = SENTIKIT_CLI_PATH;

int run(const std::string& args) {
  const std::string command = kCli + " " + args + " >/dev/null 2>&1";
  return std::system(command.c_str());
}

void write_demo_lexicon(const TempDir& dir) {
  testutil::write_lexicon(dir.path(),
                          "good\t3\ngreat\t3\nbad\t-3\nawful\t-4\nthank\t2\nhelpful\t2\n"
                          "stupid\t-3\ntrouble\t-2\nok\t1\n",
                          ":)\t2\n:(\t-2\n",
                          "really\t1\nvery\t1\n",
                          "not\nnever\n",
                          "lol\n");
}

std::string generate_posts(int rows, std::uint64_t seed) {
  sentikit::SplitMix64 rng(seed);
  const std::string pos[] = {"good", "great", ":)", "thank"};
  const std::string neg[] = {"bad", "awful", ":(", "trouble"};
  const std::string neu[] = {"code", "file", "loop", "array", "value", "method"};
  const std::string types[] = {"q", "a", "qc", "ac"};
  std::ostringstream out;
  out << "id,post_type,text\n";
  for (int i = 0; i < rows; ++i) {
    std::ostringstream text;
    for (int w = 0; w < 5; ++w) text << neu[rng.below(6)] << ' ';
    const int cls = i % 3;
    if (cls == 0)
      for (int w = 0; w < 3; ++w) text << pos[rng.below(4)] << ' ';
    if (cls == 1)
      for (int w = 0; w < 3; ++w) text << neg[rng.below(4)] << ' ';
    out << i << ',' << types[i % 4] << ",\"" << text.str() << "\"\n";
  }
  return out.str();
}

std::string generate_labels(int rows) {
  std::ostringstream out;
  out << "id,label\n";
  const char* names[] = {"positive", "negative", "neutral"};
  for (int i = 0; i < rows; ++i) out << i << ',' << names[i % 3] << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("no subcommand fails with a diagnostic") { CHECK(run("") != 0); }

TEST_CASE("missing input file gives a non-zero exit") {
  TempDir dir;
  CHECK(run("preprocess --in " + dir.file("absent.csv").string() + " --out " +
            dir.file("out.csv").string()) != 0);
}

TEST_CASE("preprocess: empty input produces empty outputs") {
  TempDir dir;
  write_file(dir.file("posts.csv"), "id,post_type,text\n");
  REQUIRE(run("preprocess --in " + dir.file("posts.csv").string() + " --out " +
              dir.file("clean.csv").string() + " --corpus-out " +
              dir.file("corpus.txt").string()) == 0);
  CHECK(read_file(dir.file("clean.csv")) == "id,post_type,text\n");
  CHECK(read_file(dir.file("corpus.txt")).empty());
}

TEST_CASE("preprocess: rows are never dropped, even code-only ones") {
  TempDir dir;
  write_file(dir.file("posts.csv"),
             "id,post_type,text\n"
             "1,q,\"<pre><code>int main() {}</code></pre>\"\n"
             "2,a,plain words\n");
  REQUIRE(run("preprocess --in " + dir.file("posts.csv").string() + " --out " +
              dir.file("clean.csv").string() + " --corpus-out " +
              dir.file("corpus.txt").string()) == 0);
  CHECK(read_file(dir.file("clean.csv")) ==
        "id,post_type,text\n"
        "1,q,\n"
        "2,a,plain words\n");
  CHECK(read_file(dir.file("corpus.txt")) == "\nplain words\n");
}

TEST_CASE("preprocess: 1k rows, order preserved, byte-identical reruns") {
  TempDir dir;
  write_file(dir.file("posts.csv"), generate_posts(1000, 77));
  const auto once = dir.file("clean1.csv").string();
  const auto twice = dir.file("clean2.csv").string();
  REQUIRE(run("preprocess --in " + dir.file("posts.csv").string() + " --out " + once +
              " --corpus-out " + dir.file("c1.txt").string()) == 0);
  REQUIRE(run("preprocess --in " + dir.file("posts.csv").string() + " --out " + twice +
              " --corpus-out " + dir.file("c2.txt").string() + " --workers 4") == 0);
  const auto a = read_file(once);
  const auto b = read_file(twice);
  CHECK(a == b);
  CHECK(read_file(dir.file("c1.txt")) == read_file(dir.file("c2.txt")));
  // 1000 data rows + header, order preserved
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  CHECK(line == "id,post_type,text");
  int row = 0;
  while (std::getline(in, line)) {
    CHECK(line.substr(0, line.find(',')) == std::to_string(row));
    ++row;
  }
  CHECK(row == 1000);
}

TEST_CASE("baseline: worked sentences map to their labels") {
  TempDir dir;
  write_demo_lexicon(dir);
  write_file(dir.file("posts.csv"),
             "id,post_type,text\n"
             "1,q,I have very simple and stupid trouble\n"
             "2,a,\"Thank you, that was really helpful\"\n"
             "3,qc,I want them to resize based on the length of the data they're showing.\n");
  REQUIRE(run("baseline --in " + dir.file("posts.csv").string() + " --lexicon-dir " +
              dir.path().string() + " --out " + dir.file("scores.csv").string()) == 0);
  CHECK(read_file(dir.file("scores.csv")) ==
        "id,p,n,label\n"
        "1,1,-3,negative\n"
        "2,3,-1,positive\n"
        "3,1,-1,neutral\n");
}

TEST_CASE("full pipeline: extract, train, classify, evaluate") {
  TempDir dir;
  write_demo_lexicon(dir);
  const int rows = 90;
  write_file(dir.file("posts.csv"), generate_posts(rows, 101));
  write_file(dir.file("labels.csv"), generate_labels(rows));

  REQUIRE(run("preprocess --in " + dir.file("posts.csv").string() + " --out " +
              dir.file("clean.csv").string() + " --corpus-out " +
              dir.file("corpus.txt").string()) == 0);
  REQUIRE(run("train-dsm --corpus " + dir.file("corpus.txt").string() + " --out " +
              dir.file("vectors.txt").string() +
              " --dim 16 --min-count 1 --epochs 5 --window 3 --seed 5") == 0);
  REQUIRE(run("extract --in " + dir.file("clean.csv").string() + " --labels " +
              dir.file("labels.csv").string() + " --lexicon-dir " + dir.path().string() +
              " --vectors " + dir.file("vectors.txt").string() + " --schema-out " +
              dir.file("schema.json").string() + " --out " + dir.file("features.txt").string()) ==
          0);
  REQUIRE(run("train --features " + dir.file("features.txt").string() + " --schema " +
              dir.file("schema.json").string() + " --model-out " +
              dir.file("model.json").string() + " --c 1 --seed 5") == 0);
  REQUIRE(run("classify --in " + dir.file("posts.csv").string() + " --lexicon-dir " +
              dir.path().string() + " --vectors " + dir.file("vectors.txt").string() +
              " --schema " + dir.file("schema.json").string() + " --model " +
              dir.file("model.json").string() + " --out " + dir.file("pred.csv").string() +
              " --workers 3") == 0);
  REQUIRE(run("evaluate --gold " + dir.file("labels.csv").string() + " --pred " +
              dir.file("pred.csv").string() + " --out " + dir.file("report.json").string()) == 0);

  nlohmann::json report = nlohmann::json::parse(read_file(dir.file("report.json")));
  CHECK(report["accuracy"].get<double>() == 1.0);  // training set, linearly separable
  CHECK(report["overall"]["f1"].get<double>() == 1.0);

  // evaluate with gold as predictions: the degenerate all-ones sanity path
  REQUIRE(run("evaluate --gold " + dir.file("labels.csv").string() + " --pred " +
              dir.file("labels.csv").string() + " --out " + dir.file("self.json").string()) == 0);
  nlohmann::json self = nlohmann::json::parse(read_file(dir.file("self.json")));
  CHECK(self["accuracy"].get<double>() == 1.0);
}

TEST_CASE("classify reruns are byte-identical") {
  TempDir dir;
  write_demo_lexicon(dir);
  const int rows = 45;
  write_file(dir.file("posts.csv"), generate_posts(rows, 33));
  write_file(dir.file("labels.csv"), generate_labels(rows));
  REQUIRE(run("preprocess --in " + dir.file("posts.csv").string() + " --out " +
              dir.file("clean.csv").string() + " --corpus-out " +
              dir.file("corpus.txt").string()) == 0);
  REQUIRE(run("train-dsm --corpus " + dir.file("corpus.txt").string() + " --out " +
              dir.file("vectors.txt").string() +
              " --dim 8 --min-count 1 --epochs 3 --window 3 --seed 5") == 0);
  REQUIRE(run("extract --in " + dir.file("clean.csv").string() + " --labels " +
              dir.file("labels.csv").string() + " --lexicon-dir " + dir.path().string() +
              " --vectors " + dir.file("vectors.txt").string() + " --schema-out " +
              dir.file("schema.json").string() + " --out " + dir.file("features.txt").string()) ==
          0);
  REQUIRE(run("train --features " + dir.file("features.txt").string() + " --schema " +
              dir.file("schema.json").string() + " --model-out " +
              dir.file("model.json").string() + " --c 0.5 --seed 9") == 0);
  const std::string classify_common =
      "classify --in " + dir.file("posts.csv").string() + " --lexicon-dir " +
      dir.path().string() + " --vectors " + dir.file("vectors.txt").string() + " --schema " +
      dir.file("schema.json").string() + " --model " + dir.file("model.json").string();
  REQUIRE(run(classify_common + " --out " + dir.file("p1.csv").string()) == 0);
  REQUIRE(run(classify_common + " --out " + dir.file("p2.csv").string() + " --workers 4") == 0);
  CHECK(read_file(dir.file("p1.csv")) == read_file(dir.file("p2.csv")));
}

TEST_CASE("tune: singleton grid returns that C") {
  TempDir dir;
  write_demo_lexicon(dir);
  const int rows = 60;
  write_file(dir.file("posts.csv"), generate_posts(rows, 55));
  write_file(dir.file("labels.csv"), generate_labels(rows));
  REQUIRE(run("preprocess --in " + dir.file("posts.csv").string() + " --out " +
              dir.file("clean.csv").string() + " --corpus-out " +
              dir.file("corpus.txt").string()) == 0);
  REQUIRE(run("train-dsm --corpus " + dir.file("corpus.txt").string() + " --out " +
              dir.file("vectors.txt").string() +
              " --dim 8 --min-count 1 --epochs 2 --window 3 --seed 5") == 0);
  REQUIRE(run("extract --in " + dir.file("clean.csv").string() + " --labels " +
              dir.file("labels.csv").string() + " --lexicon-dir " + dir.path().string() +
              " --vectors " + dir.file("vectors.txt").string() + " --schema-out " +
              dir.file("schema.json").string() + " --out " + dir.file("features.txt").string()) ==
          0);
  REQUIRE(run("tune --features " + dir.file("features.txt").string() + " --schema " +
              dir.file("schema.json").string() +
              " --c-grid 0.25 --folds 3 --seed 4 --out " + dir.file("tuning.json").string()) == 0);
  nlohmann::json tuning = nlohmann::json::parse(read_file(dir.file("tuning.json")));
  CHECK(tuning["best_c"].get<double>() == 0.25);
  REQUIRE(tuning["grid"].size() == 1);
}

TEST_CASE("vote and kappa over an annotation file") {
  TempDir dir;
  write_file(dir.file("ann.csv"),
             "item_id,coder_id,emotions,polarity\n"
             "1,c1,joy,positive\n"
             "1,c2,love,positive\n"
             "1,c3,,neutral\n"
             "2,c1,anger,negative\n"
             "2,c2,joy,positive\n"
             "2,c3,,neutral\n"
             "3,c1,,neutral\n"
             "3,c2,,neutral\n"
             "3,c3,sadness,negative\n");
  REQUIRE(run("vote --annotations " + dir.file("ann.csv").string() + " --out " +
              dir.file("gold.csv").string()) == 0);
  CHECK(read_file(dir.file("gold.csv")) ==
        "id,label\n"
        "1,positive\n"
        "3,neutral\n");
  REQUIRE(run("vote --annotations " + dir.file("ann.csv").string() + " --out " +
              dir.file("gold_all.csv").string() + " --keep-excluded") == 0);
  CHECK(read_file(dir.file("gold_all.csv")) ==
        "id,label\n"
        "1,positive\n"
        "2,excluded\n"
        "3,neutral\n");
  REQUIRE(run("kappa --annotations " + dir.file("ann.csv").string() + " --out " +
              dir.file("kappa.json").string()) == 0);
  nlohmann::json kappa = nlohmann::json::parse(read_file(dir.file("kappa.json")));
  CHECK(kappa["pairs"].size() == 3);
}

TEST_CASE("sample draws per-cell counts using the baseline oracle") {
  TempDir dir;
  write_demo_lexicon(dir);
  write_file(dir.file("posts.csv"), generate_posts(240, 88));
  REQUIRE(run("sample --in " + dir.file("posts.csv").string() + " --lexicon-dir " +
              dir.path().string() + " --n-per-cell 3 --seed 2 --out " +
              dir.file("sample.csv").string()) == 0);
  const auto sample = read_file(dir.file("sample.csv"));
  CHECK(std::count(sample.begin(), sample.end(), '\n') == 37);  // header + 12 cells x 3
  // deterministic rerun
  REQUIRE(run("sample --in " + dir.file("posts.csv").string() + " --lexicon-dir " +
              dir.path().string() + " --n-per-cell 3 --seed 2 --out " +
              dir.file("sample2.csv").string()) == 0);
  CHECK(read_file(dir.file("sample2.csv")) == sample);
  // a cell cannot satisfy an oversized request
  CHECK(run("sample --in " + dir.file("posts.csv").string() + " --lexicon-dir " +
            dir.path().string() + " --n-per-cell 100 --seed 2 --out " +
            dir.file("sample3.csv").string()) != 0);
}

TEST_CASE("config file supplies defaults, flags override") {
  TempDir dir;
  write_demo_lexicon(dir);
  write_file(dir.file("posts.csv"),
             "id,post_type,text\n"
             "1,q,good stuff\n");
  write_file(dir.file("config.json"), "{\"lexicon_dir\": \"" + dir.path().string() + "\"}");
  // --lexicon-dir omitted: comes from the config
  REQUIRE(run("--config " + dir.file("config.json").string() + " baseline --in " +
              dir.file("posts.csv").string() + " --out " + dir.file("s1.csv").string()) == 0);
  CHECK(read_file(dir.file("s1.csv")) == "id,p,n,label\n1,3,-1,positive\n");
  // a bogus config value is overridden by the explicit flag
  write_file(dir.file("bad_config.json"), "{\"lexicon_dir\": \"/definitely/not/here\"}");
  REQUIRE(run("--config " + dir.file("bad_config.json").string() + " baseline --in " +
              dir.file("posts.csv").string() + " --lexicon-dir " + dir.path().string() +
              " --out " + dir.file("s2.csv").string()) == 0);
  CHECK(read_file(dir.file("s2.csv")) == read_file(dir.file("s1.csv")));
  // without the override the bogus config fails
  CHECK(run("--config " + dir.file("bad_config.json").string() + " baseline --in " +
            dir.file("posts.csv").string() + " --out " + dir.file("s3.csv").string()) != 0);
}
