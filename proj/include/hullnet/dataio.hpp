#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hullnet/geometry.hpp"

namespace hullnet {

// Labeled finite point sets; the same point under two different labels
// violates the disjointness the whole pipeline rests on and is rejected at
// ingestion.
struct LabeledDataset {
  PointSet points;
  std::vector<int> labels;
  std::vector<int> label_universe;  // distinct labels, ascending
  std::string name;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_u32_be(std::istream& in, const std::string& path,
                                 std::size_t offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in)
    throw DataError(path + ": truncated at byte " + std::to_string(offset));
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline void check_no_cross_label_duplicates(const LabeledDataset& ds) {
  std::map<std::vector<double>, int> seen;
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    auto p = ds.points[i];
    std::vector<double> key(p.begin(), p.end());
    auto [it, inserted] = seen.try_emplace(std::move(key), ds.labels[i]);
    if (!inserted && it->second != ds.labels[i])
      throw DataError(ds.name + ": point " + std::to_string(i) +
                      " appears under labels " + std::to_string(it->second) +
                      " and " + std::to_string(ds.labels[i]));
  }
}

inline void finish_universe(LabeledDataset& ds) {
  std::set<int> uni(ds.labels.begin(), ds.labels.end());
  ds.label_universe.assign(uni.begin(), uni.end());
}

}  // namespace detail

// MNIST-style IDX pair: big-endian, magic 0x00000803 for images and
// 0x00000801 for labels. Pixels are flattened row-major; scale01 divides by
// 255 so coordinates land in [0, 1]. keep_labels empty means keep everything.
inline LabeledDataset load_idx(const std::string& images_path,
                               const std::string& labels_path,
                               const std::set<int>& keep_labels = {},
                               bool scale01 = true) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot open " + labels_path);

  const std::uint32_t img_magic = detail::read_u32_be(img, images_path, 0);
  if (img_magic != 0x00000803u)
    throw DataError(images_path + ": bad magic " + std::to_string(img_magic) +
                    " (expected 2051)");
  const std::uint32_t n_img = detail::read_u32_be(img, images_path, 4);
  const std::uint32_t rows = detail::read_u32_be(img, images_path, 8);
  const std::uint32_t cols = detail::read_u32_be(img, images_path, 12);

  const std::uint32_t lab_magic = detail::read_u32_be(lab, labels_path, 0);
  if (lab_magic != 0x00000801u)
    throw DataError(labels_path + ": bad magic " + std::to_string(lab_magic) +
                    " (expected 2049)");
  const std::uint32_t n_lab = detail::read_u32_be(lab, labels_path, 4);
  if (n_img != n_lab)
    throw DataError("count mismatch: " + images_path + " has " +
                    std::to_string(n_img) + " images, " + labels_path + " has " +
                    std::to_string(n_lab) + " labels");

  const std::size_t dim = std::size_t(rows) * cols;
  LabeledDataset ds;
  ds.name = images_path;
  ds.points = PointSet(dim);
  std::vector<unsigned char> pixels(dim);
  std::vector<double> coords(dim);
  const double scale = scale01 ? 1.0 / 255.0 : 1.0;
  for (std::uint32_t i = 0; i < n_img; ++i) {
    char label_byte;
    lab.read(&label_byte, 1);
    if (!lab)
      throw DataError(labels_path + ": truncated at byte " +
                      std::to_string(8 + i));
    img.read(reinterpret_cast<char*>(pixels.data()),
             std::streamsize(pixels.size()));
    if (!img)
      throw DataError(images_path + ": truncated at byte " +
                      std::to_string(16 + std::size_t(i) * dim));
    const int label = static_cast<unsigned char>(label_byte);
    if (!keep_labels.empty() && !keep_labels.count(label)) continue;
    for (std::size_t k = 0; k < dim; ++k) coords[k] = pixels[k] * scale;
    ds.points.add(coords);
    ds.labels.push_back(label);
  }
  detail::finish_universe(ds);
  detail::check_no_cross_label_duplicates(ds);
  return ds;
}

// Writes the IDX pair (test fixtures, synthetic data).
inline void write_idx(const std::string& images_path,
                      const std::string& labels_path,
                      const std::vector<std::vector<unsigned char>>& images,
                      std::uint32_t rows, std::uint32_t cols,
                      const std::vector<unsigned char>& labels) {
  if (images.size() != labels.size())
    throw DataError("write_idx: image/label count mismatch");
  auto put_u32 = [](std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot write " + images_path);
  put_u32(img, 0x00000803u);
  put_u32(img, std::uint32_t(images.size()));
  put_u32(img, rows);
  put_u32(img, cols);
  for (const auto& image : images) {
    if (image.size() != std::size_t(rows) * cols)
      throw DataError("write_idx: image size mismatch");
    img.write(reinterpret_cast<const char*>(image.data()),
              std::streamsize(image.size()));
  }
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot write " + labels_path);
  put_u32(lab, 0x00000801u);
  put_u32(lab, std::uint32_t(labels.size()));
  lab.write(reinterpret_cast<const char*>(labels.data()),
            std::streamsize(labels.size()));
}

// Plain numeric CSV with an optional header row; label_column is a header
// name, or a 0-based column index when there is no header. No quoting.
inline LabeledDataset load_csv(const std::string& path,
                               const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto a = cell.find_first_not_of(" \t");
      const auto b = cell.find_last_not_of(" \t");
      cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw DataError(path + ": empty file");

  auto parse_double = [&](const std::string& s, std::size_t row, bool& ok) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    ok = end == s.c_str() + s.size() && !s.empty();
    if (ok && !std::isfinite(v))
      throw DataError(path + ": non-finite value in row " + std::to_string(row));
    return v;
  };

  bool has_header = false;
  for (const auto& c : rows.front()) {
    bool ok = false;
    parse_double(c, 0, ok);
    if (!ok) {
      has_header = true;
      break;
    }
  }

  std::size_t label_idx = 0;
  std::size_t ncols = rows.front().size();
  if (has_header) {
    const auto& header = rows.front();
    const auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end())
      throw DataError(path + ": no column named '" + label_column + "'");
    label_idx = std::size_t(it - header.begin());
  } else {
    try {
      label_idx = std::stoul(label_column);
    } catch (...) {
      throw DataError(path + ": headerless file needs a numeric label column, got '" +
                      label_column + "'");
    }
    if (label_idx >= ncols)
      throw DataError(path + ": label column " + std::to_string(label_idx) +
                      " out of range");
  }

  LabeledDataset ds;
  ds.name = path;
  ds.points = PointSet(ncols - 1);
  for (std::size_t r = has_header ? 1 : 0; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != ncols)
      throw DataError(path + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(ncols));
    std::vector<double> coords;
    coords.reserve(ncols - 1);
    int label = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      bool ok = false;
      const double v = parse_double(cells[c], r + 1, ok);
      if (!ok)
        throw DataError(path + ": non-numeric cell '" + cells[c] + "' in row " +
                        std::to_string(r + 1));
      if (c == label_idx) {
        label = static_cast<int>(v);
        if (double(label) != v)
          throw DataError(path + ": non-integer label in row " +
                          std::to_string(r + 1));
      } else {
        coords.push_back(v);
      }
    }
    ds.points.add(coords);
    ds.labels.push_back(label);
  }
  if (ds.points.empty()) throw DataError(path + ": no data rows");
  detail::finish_universe(ds);
  detail::check_no_cross_label_duplicates(ds);
  return ds;
}

// The two class point sets for a label pair, in (a, b) order.
inline std::pair<PointSet, PointSet> split_binary(const LabeledDataset& ds,
                                                  int label_a, int label_b) {
  PointSet a(ds.points.dim()), b(ds.points.dim());
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    if (ds.labels[i] == label_a)
      a.add(ds.points[i]);
    else if (ds.labels[i] == label_b)
      b.add(ds.points[i]);
  }
  if (a.empty())
    throw DataError(ds.name + ": label " + std::to_string(label_a) + " missing");
  if (b.empty())
    throw DataError(ds.name + ": label " + std::to_string(label_b) + " missing");
  return {std::move(a), std::move(b)};
}

}  // namespace hullnet
