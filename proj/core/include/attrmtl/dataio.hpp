#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"

namespace attrmtl {

// Feature file: magic "MTLF", u16 version 1, u32 n, u32 d, then n*d 32-bit
// little-endian floats row-major. A ".csv" extension switches to headerless
// comma-separated text. Values are widened to double in memory.
Matrix load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const Matrix& x);

struct LabelFile {
  std::vector<std::string> names;
  Matrix labels;  // n x m of +-1
};

// CSV with a header row of attribute names; entries are +1/-1, or 0/1 when
// map_zero_one is set (0 maps to -1).
LabelFile load_labels(const std::filesystem::path& path, bool map_zero_one = false);
void save_labels(const std::filesystem::path& path, const LabelFile& labels);

// Line-oriented "GroupName: attr1, attr2, ..." resolved against the label
// header; the result is checked to tile the attribute set.
GroupPartition load_groups(const std::filesystem::path& path,
                           const std::vector<std::string>& attr_names);
void save_groups(const std::filesystem::path& path, const GroupPartition& partition,
                 const std::vector<std::string>& attr_names);

// Model file: magic "MTLM", u16 version 1, u32 d, u32 k, u32 m, m task names
// (u32 byte length + UTF-8), then l and s as 64-bit little-endian doubles
// row-major. Save/load round-trips are bit-identical.
void save_model(const std::filesystem::path& path, const LatentModel& model);
LatentModel load_model(const std::filesystem::path& path);

struct SynthSpec {
  std::size_t d = 0;
  std::size_t k_true = 0;
  std::size_t m = 0;
  GroupPartition partition;
  std::vector<std::size_t> n_per_task;  // single entry broadcasts to all tasks
  std::size_t n_test_per_task = 1000;
  double latent_density = 0.3;  // fraction of nonzero entries in l_true
  double label_noise = 0.0;     // independent flip probability, < 0.5
  double margin_scale = 1.0;    // target median |<x, w>| over each train pool
  std::vector<std::string> task_names;  // empty: task00, task01, ...
};

struct SynthData {
  Dataset train;
  Dataset test;
  Matrix l_true;  // d x k_true
  Matrix s_true;  // k_true x m, supported on the owning group's latent band
  std::vector<std::string> task_names;
};

// Group-structured generator: each group owns a contiguous band of latent
// rows, its tasks' true combinations live only on that band, features are
// standard Gaussian, labels are the true signs with independent noise.
// Deterministic in (spec, seed) and in task names, not task order.
SynthData generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

}  // namespace attrmtl
