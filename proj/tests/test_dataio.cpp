#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hullnet/dataio.hpp"

using namespace hullnet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hullnet_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("idx round trip") {
  TempDir tmp;
  const std::vector<std::vector<unsigned char>> images = {
      {0, 255, 17, 4}, {9, 9, 9, 9}, {200, 0, 0, 50}};
  const std::vector<unsigned char> labels = {0, 1, 0};
  write_idx(tmp.file("img"), tmp.file("lab"), images, 2, 2, labels);

  const auto raw = load_idx(tmp.file("img"), tmp.file("lab"), {}, false);
  REQUIRE(raw.points.size() == 3);
  REQUIRE(raw.points.dim() == 4);
  REQUIRE(raw.points[0][1] == 255.0);
  REQUIRE(raw.points[2][3] == 50.0);
  REQUIRE(raw.labels == std::vector<int>{0, 1, 0});
  REQUIRE(raw.label_universe == std::vector<int>{0, 1});

  const auto scaled = load_idx(tmp.file("img"), tmp.file("lab"));
  REQUIRE(scaled.points[0][1] == 1.0);
  for (std::size_t i = 0; i < scaled.points.size(); ++i)
    for (double v : scaled.points[i]) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }

  const auto filtered = load_idx(tmp.file("img"), tmp.file("lab"), {1});
  REQUIRE(filtered.points.size() == 1);
  REQUIRE(filtered.labels == std::vector<int>{1});
}

TEST_CASE("idx error paths") {
  TempDir tmp;
  write_text(tmp.file("junk"), "not an idx file at all");
  write_idx(tmp.file("img"), tmp.file("lab"), {{1, 2, 3, 4}}, 2, 2, {7});

  REQUIRE_THROWS_WITH(load_idx(tmp.file("junk"), tmp.file("lab")),
                      Catch::Matchers::ContainsSubstring("bad magic"));
  REQUIRE_THROWS_WITH(load_idx(tmp.file("img"), tmp.file("junk")),
                      Catch::Matchers::ContainsSubstring("bad magic"));

  // truncate the image payload
  {
    std::ifstream in(tmp.file("img"), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() - 2);
    std::ofstream out(tmp.file("img_trunc"), std::ios::binary);
    out << bytes;
  }
  REQUIRE_THROWS_WITH(load_idx(tmp.file("img_trunc"), tmp.file("lab")),
                      Catch::Matchers::ContainsSubstring("truncated at byte"));

  // label/image count mismatch
  write_idx(tmp.file("img2"), tmp.file("lab2"), {{1, 2, 3, 4}, {5, 6, 7, 8}}, 2,
            2, {1, 2});
  REQUIRE_THROWS_WITH(load_idx(tmp.file("img"), tmp.file("lab2")),
                      Catch::Matchers::ContainsSubstring("count mismatch"));
  REQUIRE_THROWS_AS(load_idx(tmp.file("missing"), tmp.file("lab")), DataError);
}

TEST_CASE("csv with header") {
  TempDir tmp;
  write_text(tmp.file("d.csv"), "x,y,label\n0.5,1.5,0\n2.5,3.5,1\n4,5,0\n");
  const auto ds = load_csv(tmp.file("d.csv"), "label");
  REQUIRE(ds.points.size() == 3);
  REQUIRE(ds.points.dim() == 2);
  REQUIRE(ds.points[1][0] == 2.5);
  REQUIRE(ds.labels == std::vector<int>{0, 1, 0});
}

TEST_CASE("csv without header uses a column index") {
  TempDir tmp;
  write_text(tmp.file("d.csv"), "1,0,10\n0,1,20\n");
  const auto ds = load_csv(tmp.file("d.csv"), "0");
  REQUIRE(ds.points.dim() == 2);
  REQUIRE(ds.labels == std::vector<int>{1, 0});
  REQUIRE(ds.points[0][1] == 10.0);
}

TEST_CASE("csv error paths") {
  TempDir tmp;
  write_text(tmp.file("empty.csv"), "");
  REQUIRE_THROWS_WITH(load_csv(tmp.file("empty.csv"), "label"),
                      Catch::Matchers::ContainsSubstring("empty"));

  write_text(tmp.file("ragged.csv"), "x,y,label\n1,2,0\n1,2\n");
  REQUIRE_THROWS_WITH(load_csv(tmp.file("ragged.csv"), "label"),
                      Catch::Matchers::ContainsSubstring("row 3"));

  write_text(tmp.file("alpha.csv"), "x,y,label\n1,apple,0\n");
  REQUIRE_THROWS_WITH(load_csv(tmp.file("alpha.csv"), "label"),
                      Catch::Matchers::ContainsSubstring("non-numeric"));

  write_text(tmp.file("badcol.csv"), "x,y,label\n1,2,0\n");
  REQUIRE_THROWS_AS(load_csv(tmp.file("badcol.csv"), "klass"), DataError);

  // identical point under two labels violates disjointness
  write_text(tmp.file("dup.csv"), "x,y,label\n1,2,0\n1,2,1\n");
  REQUIRE_THROWS_WITH(load_csv(tmp.file("dup.csv"), "label"),
                      Catch::Matchers::ContainsSubstring("labels"));

  // same point, same label is allowed
  write_text(tmp.file("dup_ok.csv"), "x,y,label\n1,2,0\n1,2,0\n3,4,1\n");
  REQUIRE(load_csv(tmp.file("dup_ok.csv"), "label").points.size() == 3);
}

TEST_CASE("split_binary") {
  TempDir tmp;
  write_text(tmp.file("d.csv"), "x,y,label\n0,0,3\n1,1,5\n2,2,3\n");
  const auto ds = load_csv(tmp.file("d.csv"), "label");
  const auto [a, b] = split_binary(ds, 3, 5);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 1);
  REQUIRE(b[0][0] == 1.0);
  REQUIRE_THROWS_AS(split_binary(ds, 3, 9), DataError);
}

TEST_CASE("bundled mnist subset loads when present") {
  const char* data_dir = std::getenv("HULLNET_DATA");
  const fs::path dir = data_dir ? fs::path(data_dir) : fs::path("data");
  const auto img = dir / "mnist_subset" / "train-images-idx3-ubyte";
  const auto lab = dir / "mnist_subset" / "train-labels-idx1-ubyte";
  if (!fs::exists(img) || !fs::exists(lab)) {
    SKIP("mnist subset fixture not found");
  }
  const auto ds = load_idx(img.string(), lab.string(), {0, 1});
  REQUIRE(ds.points.dim() == 784);
  REQUIRE(ds.points.size() > 1000);
  REQUIRE(ds.label_universe == std::vector<int>{0, 1});
  for (double v : ds.points.data()) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
}
