#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ksd/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string dir() {
  const std::string d = std::string(KSD_TEST_TMP) + "/cli";
  fs::create_directories(d);
  return d;
}

std::string p(const std::string& name) { return dir() + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run_cli(const std::string& args) {
  const std::string out = p("stdout.txt"), err = p("stderr.txt");
  const std::string cmd = std::string("\"") + KSD_CLI_PATH + "\" " + args + " > \"" + out + "\" 2> \"" + err + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Synthetic spec shared by the tests.
std::string write_spec() {
  const std::string path = p("spec.json");
  ksd::io::write_text_file(path, R"({"bases": ["ellipse", "polygon-4", "star-5"], "landmarks": 16, "copies": 10,
  "deformation": 0.05, "rotation": [0, 6.283185307179586], "seed": 2})");
  return path;
}

double percent_after(const std::string& text, const std::string& label) {
  const std::size_t at = text.find(label);
  EXPECT_NE(at, std::string::npos) << text;
  return std::stod(text.substr(at + label.size()));
}

}  // namespace

TEST(Cli, LearnCodeReconstructPipeline) {
  const std::string spec = write_spec();
  ASSERT_EQ(run_cli("synth --spec " + spec + " " + p("data.json")).code, 0);
  const Result learned = run_cli("learn --atoms 5 --sparsity 2 --iters 8 --seed 3 " + p("data.json") + " " + p("dict.json"));
  ASSERT_EQ(learned.code, 0) << learned.err;
  ASSERT_EQ(run_cli("code --sparsity 2 " + p("dict.json") + " " + p("data.json") + " " + p("codes.json")).code, 0);
  const Result rec = run_cli("reconstruct " + p("dict.json") + " " + p("codes.json") + " " + p("rec.json"));
  ASSERT_EQ(rec.code, 0) << rec.err;
  const ksd::io::DictionaryFile dict = ksd::io::load_dictionary(p("dict.json"));
  const ksd::io::json r = ksd::io::read_json_file(p("rec.json"));
  EXPECT_NEAR(r["rmse"].get<double>(), dict.final_rmse, 1e-9);
  // printed numbers agree with the files at two decimals of a percent
  EXPECT_NEAR(percent_after(learned.out, "final RMSE: "), 100.0 * dict.final_rmse, 0.005 + 1e-12);
  EXPECT_NEAR(percent_after(rec.out, "RMSE: "), 100.0 * r["rmse"].get<double>(), 0.005 + 1e-12);
  ASSERT_EQ(r["errors_percent"].size(), 30u);

  ASSERT_EQ(run_cli("render " + p("rec.json") + " " + p("rec.svg")).code, 0);
  EXPECT_NE(slurp(p("rec.svg")).find("class=\"reconstruction\""), std::string::npos);
}

TEST(Cli, AlignFirstPipeline) {
  const std::string spec = write_spec();
  ASSERT_EQ(run_cli("synth --spec " + spec + " " + p("af_data.json")).code, 0);
  ASSERT_EQ(run_cli("align-first --atoms 5 --sparsity 2 --iters 8 --seed 1 " + p("af_data.json") + " " + p("af.json")).code, 0);
  ASSERT_EQ(run_cli("code --sparsity 2 " + p("af.json") + " " + p("af_data.json") + " " + p("af_codes.json")).code, 0);
  ASSERT_EQ(run_cli("reconstruct " + p("af.json") + " " + p("af_codes.json") + " " + p("af_rec.json")).code, 0);
  const ksd::io::DictionaryFile dict = ksd::io::load_dictionary(p("af.json"));
  EXPECT_TRUE(dict.real_weights);
  EXPECT_NEAR(ksd::io::read_json_file(p("af_rec.json"))["rmse"].get<double>(), dict.final_rmse, 1e-9);
  const ksd::io::json codes = ksd::io::read_json_file(p("af_codes.json"));
  EXPECT_TRUE(codes["codes"][0]["coefficients"][0].is_number());
}

TEST(Cli, PreshapeIsIdempotent) {
  ksd::io::write_text_file(p("raw.json"), R"({"format": "ksd-dataset", "metric": {"kind": "bspline_closed", "n": 5},
  "shapes": [[[3,1],[5,2],[4,7],[0,6],[-1,2]], [[10,0],[0,10],[-10,0],[0,-10],[5,5]]]})");
  ASSERT_EQ(run_cli("preshape " + p("raw.json") + " " + p("pre1.json")).code, 0);
  ASSERT_EQ(run_cli("preshape " + p("pre1.json") + " " + p("pre2.json")).code, 0);
  const auto a = ksd::io::load_dataset(p("pre1.json"));
  const auto b = ksd::io::load_dataset(p("pre2.json"));
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LT((a.shapes[k] - b.shapes[k]).norm(), 1e-14);
}

TEST(Cli, DistMeanAndPca) {
  ksd::io::write_text_file(p("one.json"), R"({"format": "ksd-dataset", "metric": {"kind": "landmarks", "n": 3},
  "shapes": [[[0,0],[1,0],[0,1]]]})");
  const Result one = run_cli("dist --metric geodesic " + p("one.json"));
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, "i,j,distance\n");

  ASSERT_EQ(run_cli("synth --spec " + write_spec() + " " + p("d.json")).code, 0);
  const Result d = run_cli("dist --metric full " + p("d.json") + " --out " + p("d.csv"));
  ASSERT_EQ(d.code, 0);
  const std::string table = slurp(p("d.csv"));
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 1 + 30 * 29 / 2);
  const Result m = run_cli("mean " + p("d.json") + " --out " + p("mean.json"));
  ASSERT_EQ(m.code, 0);
  EXPECT_NE(m.out.find("unique: yes"), std::string::npos);
  EXPECT_EQ(ksd::io::load_dataset(p("mean.json")).shapes.size(), 1u);
  const Result pca = run_cli("pca --modes 3 " + p("d.json") + " --out " + p("pca.json"));
  ASSERT_EQ(pca.code, 0);
  EXPECT_EQ(pca.out.rfind("modes,eigenvalue,rmse_percent\n", 0), 0u);
  EXPECT_EQ(ksd::io::read_json_file(p("pca.json"))["eigenvalues"].size(), 3u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("learn --atoms 3 " + p("nothing.json") + " " + p("x.json")).code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  const Result missing = run_cli("preshape " + p("does-not-exist.json") + " " + p("x.json"));
  EXPECT_EQ(missing.code, 3);
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);
  EXPECT_EQ(missing.err.rfind("ksd: error: ", 0), 0u);

  ksd::io::write_text_file(p("bad.json"), R"({"format": "ksd-dataset", "metric": {"kind": "landmarks", "n": 3},
  "shapes": [[[0,0],[1,0]]]})");
  const Result bad = run_cli("preshape " + p("bad.json") + " " + p("x.json"));
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find("/shapes/0"), std::string::npos) << bad.err;

  ASSERT_EQ(run_cli("synth --spec " + write_spec() + " " + p("e.json")).code, 0);
  EXPECT_EQ(run_cli("learn --atoms 3 --sparsity 4 " + p("e.json") + " " + p("x.json")).code, 2);
  EXPECT_EQ(run_cli("compare --sweep-sparsity 3..1 " + p("e.json")).code, 2);
}

TEST(Cli, SeededCommandsAreByteReproducible) {
  const std::string spec = write_spec();
  ASSERT_EQ(run_cli("synth --spec " + spec + " --seed 9 " + p("s1.json")).code, 0);
  ASSERT_EQ(run_cli("synth --spec " + spec + " --seed 9 " + p("s2.json")).code, 0);
  EXPECT_EQ(slurp(p("s1.json")), slurp(p("s2.json")));
  ASSERT_EQ(run_cli("synth --spec " + spec + " --seed 10 " + p("s3.json")).code, 0);
  EXPECT_NE(slurp(p("s1.json")), slurp(p("s3.json")));

  for (const char* name : {"l1.json", "l2.json"}) {
    ASSERT_EQ(run_cli("learn --atoms 5 --sparsity 2 --iters 5 --seed 4 --threads 2 " + p("s1.json") + " " + p(name)).code, 0);
  }
  EXPECT_EQ(slurp(p("l1.json")), slurp(p("l2.json")));

  for (const char* name : {"c1.csv", "c2.csv"}) {
    ASSERT_EQ(run_cli("compare --sweep-sparsity 1..2 --atoms 4 --iters 4 --seed 4 " + p("s1.json") + " --out " + p(name)).code, 0);
  }
  EXPECT_EQ(slurp(p("c1.csv")), slurp(p("c2.csv")));
  const std::string csv = slurp(p("c1.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Cli, SweepWritesTablesAndPlot) {
  ksd::io::write_text_file(p("exp.json"), R"({"synth": {"bases": ["ellipse", "star-5"], "landmarks": 12, "copies": 6,
  "deformation": 0.05, "rotation": [0, 6.283185307179586]}, "sparsity": "1..2", "atoms": 3, "iterations": 4, "seeds": [0, 1]})");
  const std::string out = p("sweep");
  ASSERT_EQ(run_cli("sweep --spec " + p("exp.json") + " " + out).code, 0);
  EXPECT_TRUE(fs::exists(out + "/rows.csv"));
  EXPECT_TRUE(fs::exists(out + "/summary.csv"));
  EXPECT_NE(slurp(out + "/rmse.svg").find("<svg"), std::string::npos);
  const std::string rows = slurp(out + "/rows.csv");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 1 + 3 * 2 * 2);
}
