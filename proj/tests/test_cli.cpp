#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "frosketch/frosketch.h"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("frosketch_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string file(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI with stdout captured to a file; returns the exit status.
  int run(const std::string& args, std::string* out = nullptr, const std::string& env = "") {
    const std::string captured = file("stdout.txt");
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(FROSKETCH_CLI_PATH) + " " + args + " > " +
                            captured + " 2> " + file("stderr.txt");
    const int raw = std::system(cmd.c_str());
    if (out) *out = slurp(captured);
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static json manifest(const std::string& output) { return json::parse(slurp(output + ".manifest.json")); }

  static std::vector<json> json_lines(const std::string& text) {
    std::vector<json> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) rows.push_back(json::parse(line));
    }
    return rows;
  }

  static bool same_model(const std::string& a, const std::string& b) {
    fsk_model* x = nullptr;
    fsk_model* y = nullptr;
    if (fsk_model_load(a.c_str(), &x) != FSK_OK || fsk_model_load(b.c_str(), &y) != FSK_OK) return false;
    const bool eq = fsk_model_equal(x, y) == 1;
    fsk_model_free(x);
    fsk_model_free(y);
    return eq;
  }

  void synth(const std::string& name, const std::string& args) {
    ASSERT_EQ(run("synth " + args + " --out " + file(name)), 0) << slurp(file("stderr.txt"));
  }

  fs::path dir_;
};

} // namespace

TEST_F(Cli, SynthDefaultsAndDeterminism) {
  synth("a.fsk", "--n 200 --d 16 --seed 3");
  synth("b.fsk", "--n 200 --d 16 --seed 3");
  EXPECT_EQ(slurp(file("a.fsk")), slurp(file("b.fsk")));
  const json m = manifest(file("a.fsk"));
  EXPECT_EQ(m["command"], "synth");
  EXPECT_EQ(m["params"]["k"], 10);
  EXPECT_EQ(m["params"]["gamma"], 10.0);
  EXPECT_EQ(m["seeds"]["master"], 3);
  EXPECT_TRUE(m.contains("version"));
  EXPECT_TRUE(m["timings_ms"].contains("generate"));
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  synth("flag.fsk", "--n 50 --d 8 --k 4 --seed 77");
  ASSERT_EQ(run("synth --n 50 --d 8 --k 4 --out " + file("env.fsk"), nullptr, "FROSKETCH_SEED=77"), 0);
  EXPECT_EQ(slurp(file("flag.fsk")), slurp(file("env.fsk")));
  EXPECT_EQ(manifest(file("env.fsk"))["seeds"]["source"], "env");
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("synth --n 10 --d 4 --k 5 --out " + file("x.fsk")), 2);
  EXPECT_EQ(run("synth --bogus"), 2);
  EXPECT_EQ(run("sketch --in " + file("missing.fsk") + " --out " + file("b.fsk")), 3);
  synth("a.fsk", "--n 100 --d 8 --k 4 --seed 1");
  EXPECT_EQ(run("sketch --in " + file("a.fsk") + " --ell 7 --out " + file("b.fsk")), 2);
  std::ofstream(file("junk.fsk")) << "not a matrix";
  EXPECT_EQ(run("sketch --in " + file("junk.fsk") + " --out " + file("b.fsk")), 3);
}

TEST_F(Cli, SketchReportAndFdBound) {
  synth("a.fsk", "--n 500 --d 32 --seed 2");
  std::string out;
  ASSERT_EQ(run("sketch --in " + file("a.fsk") + " --method fd --ell 16 --report exact --out " + file("b.fsk"), &out),
            0);
  const json report = json::parse(out);
  for (const char* key : {"method", "ell", "m", "relative_error", "time_ms"}) EXPECT_TRUE(report.contains(key)) << key;
  EXPECT_EQ(report["method"], "fd");
  EXPECT_LE(report["relative_error"].get<double>(), 0.125);
  const json m = manifest(file("b.fsk"));
  EXPECT_EQ(m["params"]["m"], 128);
  EXPECT_TRUE(m["timings_ms"].contains("sketch"));
}

TEST_F(Cli, SketchIsReproducible) {
  synth("a.fsk", "--n 700 --d 16 --seed 4");
  ASSERT_EQ(run("sketch --in " + file("a.fsk") + " --ell 8 --seed 5 --out " + file("b1.fsk")), 0);
  ASSERT_EQ(run("sketch --in " + file("a.fsk") + " --ell 8 --seed 5 --out " + file("b2.fsk")), 0);
  EXPECT_EQ(slurp(file("b1.fsk")), slurp(file("b2.fsk")));
  const json m = manifest(file("b1.fsk"));
  EXPECT_EQ(m["probe"]["compressions"], 10);
  EXPECT_LE(m["probe"]["max_in_core_rows"].get<int>(), 64);
}

TEST_F(Cli, CheckpointResumeMatchesSingleRun) {
  synth("a.fsk", "--n 300 --d 8 --k 4 --seed 6");
  synth("b.fsk", "--n 250 --d 8 --k 4 --seed 7");
  fsk_matrix *a = nullptr, *b = nullptr;
  ASSERT_EQ(fsk_matrix_load(file("a.fsk").c_str(), FSK_FORMAT_FSK1, &a), FSK_OK);
  ASSERT_EQ(fsk_matrix_load(file("b.fsk").c_str(), FSK_FORMAT_FSK1, &b), FSK_OK);
  std::vector<double> both(fsk_matrix_data(a), fsk_matrix_data(a) + 300 * 8);
  both.insert(both.end(), fsk_matrix_data(b), fsk_matrix_data(b) + 250 * 8);
  fsk_matrix* ab = nullptr;
  ASSERT_EQ(fsk_matrix_create(550, 8, both.data(), &ab), FSK_OK);
  ASSERT_EQ(fsk_matrix_save(ab, file("ab.fsk").c_str(), FSK_FORMAT_FSK1), FSK_OK);
  fsk_matrix_free(a);
  fsk_matrix_free(b);
  fsk_matrix_free(ab);

  const std::string common = " --ell 8 --m 32 --seed 9";
  ASSERT_EQ(run("sketch --in " + file("ab.fsk") + common + " --out " + file("whole.fsk")), 0);
  ASSERT_EQ(run("sketch --in " + file("a.fsk") + common + " --checkpoint " + file("ck") + " --out " + file("p.fsk")), 0);
  ASSERT_EQ(run("sketch --in " + file("b.fsk") + common + " --resume " + file("ck") + " --out " + file("r.fsk")), 0)
      << slurp(file("stderr.txt"));
  EXPECT_EQ(slurp(file("whole.fsk")), slurp(file("r.fsk")));
  EXPECT_EQ(run("sketch --in " + file("b.fsk") + common + " --resume " + file("ck") + " --report exact --out " +
                file("x.fsk")),
            2);
}

TEST_F(Cli, TrainDefaultsAndMethods) {
  synth("a.fsk", "--n 600 --d 32 --seed 8");
  ASSERT_EQ(run("train --in " + file("a.fsk") + " --method frosh --bits 32 --model-out " + file("f.model")), 0);
  const json m = manifest(file("f.model"));
  EXPECT_EQ(m["params"]["ell"], 64);
  EXPECT_EQ(m["params"]["m"], 128);

  ASSERT_EQ(run("train --in " + file("a.fsk") + " --method osh --bits 8 --model-out " + file("o.model")), 0);
  for (const char* name : {"f.model", "o.model"}) {
    fsk_model* model = nullptr;
    ASSERT_EQ(fsk_model_load(file(name).c_str(), &model), FSK_OK);
    fsk_matrix* w = nullptr;
    ASSERT_EQ(fsk_model_w(model, &w), FSK_OK);
    const size_t d = fsk_model_d(model), r = fsk_model_r(model);
    const double* v = fsk_matrix_data(w);
    for (size_t i = 0; i < r; ++i) {
      for (size_t j = 0; j < r; ++j) {
        double dot = 0;
        for (size_t k = 0; k < d; ++k) dot += v[k * r + i] * v[k * r + j];
        EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-8);
      }
    }
    fsk_matrix_free(w);
    fsk_model_free(model);
  }

  ASSERT_EQ(run("train --in " + file("a.fsk") + " --method lsh --bits 8 --model-out " + file("l.model")), 0);
  const json lsh = manifest(file("l.model"));
  EXPECT_EQ(lsh["timings_ms"]["sketch"], 0.0);
  EXPECT_EQ(lsh["params"]["passes"], 0);
}

TEST_F(Cli, TrainEtaWritesIntermediateModels) {
  synth("a.fsk", "--n 600 --d 8 --k 4 --seed 9");
  ASSERT_EQ(run("train --in " + file("a.fsk") + " --bits 4 --chunk 100 --eta 2 --model-out " + file("m.model")), 0);
  EXPECT_TRUE(fs::exists(file("m.model.1")));
  EXPECT_TRUE(fs::exists(file("m.model.3")));
  EXPECT_FALSE(fs::exists(file("m.model.4")));
  EXPECT_TRUE(same_model(file("m.model.3"), file("m.model")));
}

TEST_F(Cli, DfroshWithOneWorkerEqualsFrosh) {
  synth("a.fsk", "--n 900 --d 16 --seed 10");
  ASSERT_EQ(run("train --in " + file("a.fsk") + " --bits 8 --seed 4 --model-out " + file("f.model")), 0);
  ASSERT_EQ(run("dfrosh --in " + file("a.fsk") + " --workers 1 --bits 8 --seed 4 --model-out " + file("d.model")), 0);
  EXPECT_TRUE(same_model(file("f.model"), file("d.model")));
  EXPECT_EQ(slurp(file("f.model")), slurp(file("d.model")));
}

TEST_F(Cli, DfroshDefaultsToFiveWorkers) {
  synth("a.fsk", "--n 500 --d 8 --k 4 --seed 11");
  ASSERT_EQ(run("dfrosh --in " + file("a.fsk") + " --bits 4 --model-out " + file("d.model")), 0);
  EXPECT_EQ(manifest(file("d.model"))["params"]["workers"], 5);
}

TEST_F(Cli, WorkerFilesMergeToInProcessModel) {
  synth("a.fsk", "--n 1000 --d 16 --seed 12");
  ASSERT_EQ(run("dfrosh --in " + file("a.fsk") + " --workers 3 --threads 2 --bits 8 --seed 5 --model-out " +
                file("d.model")),
            0);
  std::string summaries;
  for (int id = 2; id >= 0; --id) {
    const std::string out = file("w" + std::to_string(id) + ".summary");
    ASSERT_EQ(run("worker --in " + file("a.fsk") + " --workers 3 --id " + std::to_string(id) +
                  " --bits 8 --seed 5 --out " + out),
              0);
    summaries += " " + out;
  }
  ASSERT_EQ(run("merge" + summaries + " --bits 8 --out " + file("m.model")), 0);
  EXPECT_EQ(slurp(file("d.model")), slurp(file("m.model")));
  EXPECT_EQ(slurp(file("d.model") + ".json"), slurp(file("m.model") + ".json"));
}

TEST_F(Cli, EvalSchemaAndSingleRound) {
  synth("a.fsk", "--kind clusters --n 1010 --d 32 --latent 8 --seed 13");
  std::string out;
  ASSERT_EQ(run("eval --db " + file("a.fsk") + " --method frosh --rounds 1 --bits 8 --seed 2 --out " +
                file("e.jsonl")),
            0)
      << slurp(file("stderr.txt"));
  const auto rows = json_lines(slurp(file("e.jsonl")));
  ASSERT_EQ(rows.size(), 2u);
  for (const char* key : {"round", "bits", "method", "map", "time_ms"}) EXPECT_TRUE(rows[0].contains(key)) << key;
  EXPECT_EQ(rows[0]["round"], 1);
  EXPECT_EQ(rows[0]["bits"], 8);
  const json& pr = rows[1]["pr_curve"];
  for (const char* key : {"method", "bits", "returned", "recall", "precision"}) EXPECT_TRUE(pr.contains(key)) << key;
  EXPECT_EQ(pr["returned"].size(), 20u);
  EXPECT_TRUE(fs::exists(file("e.jsonl.manifest.json")));

  // One round of training equals a single-shot model evaluated directly.
  ASSERT_EQ(run("dfrosh --in " + file("a.fsk") + " --workers 1 --bits 8 --seed 2 --model-out " + file("unused")), 0);
  fsk_matrix* all = nullptr;
  ASSERT_EQ(fsk_matrix_load(file("a.fsk").c_str(), FSK_FORMAT_FSK1, &all), FSK_OK);
  fsk_matrix *db = nullptr, *q = nullptr;
  ASSERT_EQ(fsk_matrix_slice_rows(all, 0, 999, &db), FSK_OK);
  ASSERT_EQ(fsk_matrix_slice_rows(all, 999, 1010, &q), FSK_OK);
  ASSERT_EQ(fsk_matrix_save(db, file("db.fsk").c_str(), FSK_FORMAT_FSK1), FSK_OK);
  ASSERT_EQ(fsk_matrix_save(q, file("q.fsk").c_str(), FSK_FORMAT_FSK1), FSK_OK);
  fsk_matrix_free(all);
  fsk_matrix_free(db);
  fsk_matrix_free(q);
  ASSERT_EQ(run("train --in " + file("db.fsk") + " --bits 8 --seed 2 --model-out " + file("single.model")), 0);
  ASSERT_EQ(run("eval --db " + file("db.fsk") + " --queries " + file("q.fsk") + " --model " + file("single.model"), &out),
            0);
  const auto single = json_lines(out);
  EXPECT_DOUBLE_EQ(single[0]["map"].get<double>(), rows[0]["map"].get<double>());
}

TEST_F(Cli, EvalRoundsImproveForFrosh) {
  synth("a.fsk", "--kind clusters --n 5050 --d 64 --seed 14");
  std::string out;
  ASSERT_EQ(run("eval --db " + file("a.fsk") + " --method frosh --rounds 10 --bits 16 --seed 3", &out), 0)
      << slurp(file("stderr.txt"));
  const auto rows = json_lines(out);
  ASSERT_EQ(rows.size(), 11u);
  double best = 0.0;
  for (int r = 0; r < 10; ++r) {
    const double map = rows[r]["map"].get<double>();
    EXPECT_GE(map, best - 0.01) << "round " << r + 1;
    best = std::max(best, map);
  }
  EXPECT_GT(rows[9]["map"].get<double>(), rows[0]["map"].get<double>() - 0.01);
}

TEST_F(Cli, EvalRejectsBadArguments) {
  synth("a.fsk", "--n 100 --d 8 --k 4 --seed 15");
  EXPECT_EQ(run("eval --db " + file("a.fsk") + " --method nope"), 2);
  EXPECT_EQ(run("eval --db " + file("a.fsk") + " --fraction 0"), 2);
}
