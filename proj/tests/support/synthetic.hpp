#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "netadv/dataset.hpp"
#include "netadv/mlp.hpp"

namespace netadv::testing {

// NSL-KDD formatted text (41 features, label, difficulty). Labels cycle
// through normal, two DoS families and one probe family so the Normal/DoS
// filter has something to drop.
std::string nslkdd_text(std::size_t rows, std::uint64_t seed);

// Moore-style ARFF with quoted attribute names, occasional "?" values and raw
// class tokens (FTP-DATA, DATABASE, ...). Every one of the ten classes gets
// at least `min_per_class` rows.
std::string moore_arff_text(std::size_t rows, std::uint64_t seed, std::size_t min_per_class = 6);

// Gaussian blobs in [0,1]^dim, one per class, centres on a simplex-like grid.
Dataset blobs(std::size_t per_class, std::size_t classes, std::size_t dim, double spread, std::uint64_t seed);

// Normalized Normal/DoS stand-in: features 0 and 1 separate the classes
// cleanly but with a narrow gap, features 2.. are noisier and overlap.
Dataset fragile_ids(std::size_t per_class, std::size_t dim, std::uint64_t seed);

// Two-class XOR on the unit square.
Dataset xor_data(std::size_t n, std::uint64_t seed);

// Uniform weights and biases in [-scale, scale].
MlpModel random_mlp(std::size_t input_dim, std::size_t classes, const std::vector<std::size_t>& hidden,
                    std::uint64_t seed, double scale = 1.0);

// Deleted on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

}  // namespace netadv::testing
