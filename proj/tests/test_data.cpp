#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vacgan/data.hpp"

using namespace vacgan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

}  // namespace

TEST_CASE("two_gaussians class means land near the configured centers") {
  DatasetSpec spec;
  spec.kind = DatasetKind::two_gaussians;
  spec.seed = 7;
  const LabeledBatch batch = generate(spec, 1000);
  REQUIRE(batch.samples.shape() == std::vector<std::size_t>{2000, 2});
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    REQUIRE(batch.labels[i] == 0);
    mx += batch.samples.at2(i, 0);
    my += batch.samples.at2(i, 1);
  }
  CHECK(std::fabs(mx / 1000.0 - (-2.0)) < 0.15);
  CHECK(std::fabs(my / 1000.0 - 0.0) < 0.15);
}

TEST_CASE("generate is balanced, minimal, and deterministic") {
  DatasetSpec spec;
  spec.kind = DatasetKind::gaussian_ring_pair;
  spec.seed = 3;

  const LabeledBatch tiny = generate(spec, 1);
  REQUIRE(tiny.labels.size() == 2);
  CHECK(tiny.labels[0] == 0);
  CHECK(tiny.labels[1] == 1);

  const LabeledBatch a = generate(spec, 50);
  const LabeledBatch b = generate(spec, 50);
  std::size_t zeros = 0;
  for (int l : a.labels) zeros += l == 0 ? 1 : 0;
  CHECK(zeros == 50);
  REQUIRE(a.samples.same_shape(b.samples));
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);

  CHECK_THROWS_AS(generate(spec, 0), InvalidSpec);
}

TEST_CASE("procedural glyphs are normalized and the two families differ") {
  DatasetSpec spec;
  spec.kind = DatasetKind::procedural_glyphs;
  spec.image_side = 8;
  spec.seed = 11;
  const LabeledBatch batch = generate(spec, 40);
  REQUIRE(batch.samples.shape() == std::vector<std::size_t>{80, 1, 8, 8});
  for (std::size_t i = 0; i < batch.samples.size(); ++i) {
    CHECK(batch.samples[i] >= 0.0);
    CHECK(batch.samples[i] <= 1.0);
  }
  // Mean images of the two families must be visibly different.
  std::vector<double> mean0(64, 0.0), mean1(64, 0.0);
  for (std::size_t i = 0; i < 80; ++i) {
    auto& acc = batch.labels[i] == 0 ? mean0 : mean1;
    for (std::size_t j = 0; j < 64; ++j) acc[j] += batch.samples[i * 64 + j] / 40.0;
  }
  double diff = 0.0;
  for (std::size_t j = 0; j < 64; ++j) diff += std::fabs(mean0[j] - mean1[j]);
  CHECK(diff > 0.5);
}

TEST_CASE("PGM round trip with exact endpoint mapping") {
  TempDir dir("vacgan_test_pgm");
  Tensor img({2, 3});
  const double values[6] = {0.0, 1.0, 0.5, 0.25, 0.75, 1.0};
  for (std::size_t i = 0; i < 6; ++i) img[i] = values[i];
  const std::string path = (dir.path / "img.pgm").string();
  write_pgm(img, path);
  const Tensor back = read_pgm(path);
  REQUIRE(back.shape() == std::vector<std::size_t>{1, 2, 3});
  CHECK(back[0] == 0.0);
  CHECK(back[1] == 1.0);
  CHECK(back[5] == 1.0);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::fabs(back[i] - values[i]) <= 0.5 / 255.0);
}

TEST_CASE("load_external reads a labeled corpus") {
  TempDir dir("vacgan_test_corpus");
  Tensor a({4, 4}), b({4, 4});
  for (std::size_t i = 0; i < 16; ++i) {
    a[i] = 0.0;
    b[i] = 1.0;
  }
  write_pgm(a, (dir.path / "a.pgm").string());
  write_pgm(b, (dir.path / "b.pgm").string());
  write_file(dir.path / "manifest.tsv", "a.pgm\t0\nb.pgm\t1\n");
  const LabeledBatch batch =
      load_external(dir.path.string(), (dir.path / "manifest.tsv").string());
  REQUIRE(batch.labels == std::vector<int>{0, 1});
  REQUIRE(batch.samples.shape() == std::vector<std::size_t>{2, 1, 4, 4});
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(batch.samples[i] == 0.0);
    CHECK(batch.samples[16 + i] == 1.0);
  }
}

TEST_CASE("load_external error contracts") {
  TempDir dir("vacgan_test_corpus_bad");
  write_file(dir.path / "empty.tsv", "");
  CHECK_THROWS_AS(load_external(dir.path.string(), (dir.path / "empty.tsv").string()),
                  BadLabel);

  Tensor a({4, 4});
  write_pgm(a, (dir.path / "a.pgm").string());
  write_file(dir.path / "badlabel.tsv", "a.pgm\t5\n");
  CHECK_THROWS_AS(load_external(dir.path.string(), (dir.path / "badlabel.tsv").string()),
                  BadLabel);

  Tensor small({2, 2});
  write_pgm(small, (dir.path / "small.pgm").string());
  write_file(dir.path / "mixed.tsv", "a.pgm\t0\nsmall.pgm\t1\n");
  CHECK_THROWS_AS(load_external(dir.path.string(), (dir.path / "mixed.tsv").string()),
                  BadFormat);

  write_file(dir.path / "notab.tsv", "a.pgm 0\n");
  CHECK_THROWS_AS(load_external(dir.path.string(), (dir.path / "notab.tsv").string()),
                  BadFormat);

  write_file(dir.path / "text.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  write_file(dir.path / "ascii.tsv", "text.pgm\t0\n");
  CHECK_THROWS_AS(load_external(dir.path.string(), (dir.path / "ascii.tsv").string()),
                  BadFormat);
}

TEST_CASE("points CSV export") {
  TempDir dir("vacgan_test_csv");
  LabeledBatch batch;
  batch.samples = Tensor({2, 2}, {1.0, 2.0, -3.0, 4.5});
  batch.labels = {0, 1};
  const std::string path = (dir.path / "pts.csv").string();
  write_points_csv(batch, path);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,y,label");
  std::getline(is, line);
  CHECK(line == "1,2,0");
  std::getline(is, line);
  CHECK(line == "-3,4.5,1");
}
