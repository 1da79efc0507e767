#include "attrmtl/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "attrmtl/errors.hpp"
#include "attrmtl/rng.hpp"

namespace attrmtl {
namespace {

// --- byte-level primitives; the on-disk formats are little-endian by fiat ---

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  const std::string& buf;
  const std::string name;
  std::size_t off = 0;

  void need(std::size_t n, const char* what) const {
    if (off + n > buf.size())
      throw DataError(name + ": truncated " + what + " at byte " + std::to_string(off) +
                      ": expected " + std::to_string(off + n) + " bytes, file has " +
                      std::to_string(buf.size()));
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint8_t>(buf[off]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[off + 1])) << 8);
    off += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | static_cast<std::uint8_t>(buf[off + static_cast<std::size_t>(i)]);
    off += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
      v = (v << 8) | static_cast<std::uint8_t>(buf[off + static_cast<std::size_t>(i)]);
    off += 8;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = buf.substr(off, n);
    off += n;
    return s;
  }
  void check_magic(const char* magic) {
    need(4, "magic");
    if (buf.compare(0, 4, magic) != 0)
      throw DataError(name + ": bad magic, want \"" + magic + "\"");
    off = 4;
  }
  void done() const {
    if (off != buf.size())
      throw DataError(name + ": " + std::to_string(buf.size() - off) +
                      " trailing bytes after byte " + std::to_string(off));
  }
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  return std::move(os).str();
}

void spit(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError(path.string() + ": short write");
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

Matrix load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::vector<double> values;
  std::size_t cols = 0, rows = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (cols == 0) cols = fields.size();
    if (fields.size() != cols)
      throw DataError(path.string() + ": line " + std::to_string(lineno) + " has " +
                      std::to_string(fields.size()) + " values, first row has " +
                      std::to_string(cols));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string f = trim(fields[j]);
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v))
        throw DataError(path.string() + ": line " + std::to_string(lineno) + " col " +
                        std::to_string(j + 1) + ": bad value '" + f + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + ": no rows");
  return Matrix(rows, cols, std::move(values));
}

}  // namespace

Matrix load_features(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_features_csv(path);
  const std::string buf = slurp(path);
  Reader r{buf, path.string()};
  r.check_magic("MTLF");
  const std::uint16_t version = r.u16("version");
  if (version != 1)
    throw DataError(path.string() + ": unsupported version " + std::to_string(version));
  const std::uint32_t n = r.u32("row count");
  const std::uint32_t d = r.u32("column count");
  Matrix x(n, d);
  auto xd = x.data();
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const std::size_t at = r.off;
    const float v = r.f32("payload");
    if (!std::isfinite(v))
      throw DataError(path.string() + ": non-finite value at byte offset " + std::to_string(at));
    xd[i] = static_cast<double>(v);
  }
  r.done();
  return x;
}

void save_features(const std::filesystem::path& path, const Matrix& x) {
  if (path.extension() == ".csv") {
    std::ostringstream os;
    os.precision(9);  // round-trips any float32
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        if (j) os << ',';
        os << static_cast<float>(x(i, j));
      }
      os << '\n';
    }
    spit(path, std::move(os).str());
    return;
  }
  std::string out;
  out.reserve(14 + 4 * x.size());
  out += "MTLF";
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(x.rows()));
  put_u32(out, static_cast<std::uint32_t>(x.cols()));
  for (double v : x.data()) put_f32(out, static_cast<float>(v));
  spit(path, out);
}

LabelFile load_labels(const std::filesystem::path& path, bool map_zero_one) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw DataError(path.string() + ": missing header row");
  LabelFile out;
  for (const auto& f : split(line, ',')) {
    const std::string name = trim(f);
    if (name.empty()) throw DataError(path.string() + ": empty attribute name in header");
    out.names.push_back(name);
  }

  std::vector<double> values;
  std::size_t rows = 0;
  for (std::size_t row = 1; std::getline(in, line); ++row) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != out.names.size())
      throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " values, header has " +
                      std::to_string(out.names.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string f = trim(fields[j]);
      double v = 0;
      if (f == "1" || f == "+1") {
        v = 1.0;
      } else if (f == "-1") {
        v = -1.0;
      } else if (f == "0" && map_zero_one) {
        v = -1.0;
      } else {
        throw DataError(path.string() + ": invalid label " + f + " at row " +
                        std::to_string(row) + " col " + std::to_string(j + 1));
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + ": no label rows");
  out.labels = Matrix(rows, out.names.size(), std::move(values));
  return out;
}

void save_labels(const std::filesystem::path& path, const LabelFile& labels) {
  if (labels.names.size() != labels.labels.cols())
    throw DataError("save_labels: " + std::to_string(labels.names.size()) + " names for " +
                    std::to_string(labels.labels.cols()) + " columns");
  std::ostringstream os;
  for (std::size_t j = 0; j < labels.names.size(); ++j) {
    if (j) os << ',';
    os << labels.names[j];
  }
  os << '\n';
  for (std::size_t i = 0; i < labels.labels.rows(); ++i) {
    for (std::size_t j = 0; j < labels.labels.cols(); ++j) {
      if (j) os << ',';
      os << (labels.labels(i, j) > 0 ? "1" : "-1");
    }
    os << '\n';
  }
  spit(path, std::move(os).str());
}

GroupPartition load_groups(const std::filesystem::path& path,
                           const std::vector<std::string>& attr_names) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < attr_names.size(); ++i) index[attr_names[i]] = i;

  GroupPartition partition;
  std::vector<bool> used(attr_names.size(), false);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t colon = t.find(':');
    if (colon == std::string::npos)
      throw DataError(path.string() + ": line " + std::to_string(lineno) +
                      ": expected 'GroupName: attr, ...'");
    GroupPartition::Group group;
    group.name = trim(t.substr(0, colon));
    if (group.name.empty())
      throw DataError(path.string() + ": line " + std::to_string(lineno) + ": empty group name");
    for (const auto& field : split(t.substr(colon + 1), ',')) {
      const std::string attr = trim(field);
      if (attr.empty()) continue;
      auto it = index.find(attr);
      if (it == index.end())
        throw DataError(path.string() + ": line " + std::to_string(lineno) +
                        ": unknown attribute '" + attr + "'");
      if (used[it->second])
        throw DataError(path.string() + ": line " + std::to_string(lineno) +
                        ": duplicate membership of '" + attr + "'");
      used[it->second] = true;
      group.members.push_back(it->second);
    }
    if (group.members.empty())
      throw DataError(path.string() + ": line " + std::to_string(lineno) + ": group '" +
                      group.name + "' has no attributes");
    partition.groups.push_back(std::move(group));
  }
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i])
      throw DataError(path.string() + ": uncovered attribute '" + attr_names[i] + "'");
  return partition;
}

void save_groups(const std::filesystem::path& path, const GroupPartition& partition,
                 const std::vector<std::string>& attr_names) {
  require_partition_over(partition, attr_names.size(), "save_groups");
  std::ostringstream os;
  for (const auto& g : partition.groups) {
    os << g.name << ": ";
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      if (i) os << ", ";
      os << attr_names[g.members[i]];
    }
    os << '\n';
  }
  spit(path, std::move(os).str());
}

void save_model(const std::filesystem::path& path, const LatentModel& model) {
  if (model.l.cols() != model.s.rows() || model.task_names.size() != model.s.cols())
    throw DataError("save_model: inconsistent model dimensions");
  std::string out;
  out += "MTLM";
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(model.l.rows()));
  put_u32(out, static_cast<std::uint32_t>(model.l.cols()));
  put_u32(out, static_cast<std::uint32_t>(model.s.cols()));
  for (const auto& name : model.task_names) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
  }
  for (double v : model.l.data()) put_f64(out, v);
  for (double v : model.s.data()) put_f64(out, v);
  spit(path, out);
}

LatentModel load_model(const std::filesystem::path& path) {
  const std::string buf = slurp(path);
  Reader r{buf, path.string()};
  r.check_magic("MTLM");
  const std::uint16_t version = r.u16("version");
  if (version != 1)
    throw DataError(path.string() + ": unsupported version " + std::to_string(version));
  const std::uint32_t d = r.u32("d");
  const std::uint32_t k = r.u32("k");
  const std::uint32_t m = r.u32("m");
  LatentModel model;
  for (std::uint32_t i = 0; i < m; ++i) {
    const std::uint32_t len = r.u32("name length");
    model.task_names.push_back(r.bytes(len, "task name"));
  }
  model.l = Matrix(d, k);
  for (double& v : model.l.data()) v = r.f64("l payload");
  model.s = Matrix(k, m);
  for (double& v : model.s.data()) v = r.f64("s payload");
  r.done();
  return model;
}

namespace {

double median_abs(std::vector<double> v) {
  if (v.empty()) return 0.0;
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix x(rows, cols);
  for (double& v : x.data()) v = rng.normal();
  return x;
}

}  // namespace

SynthData generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.d == 0 || spec.k_true == 0 || spec.m == 0)
    throw DataError("generate_synthetic: counts must be >= 1");
  if (spec.latent_density <= 0 || spec.latent_density > 1)
    throw DataError("generate_synthetic: latent density must be in (0, 1]");
  if (spec.label_noise < 0 || spec.label_noise >= 0.5)
    throw DataError("generate_synthetic: label noise must be in [0, 0.5)");
  if (spec.margin_scale <= 0) throw DataError("generate_synthetic: margin scale must be > 0");
  if (spec.n_test_per_task == 0) throw DataError("generate_synthetic: test counts must be >= 1");
  require_partition_over(spec.partition, spec.m, "generate_synthetic");
  const std::size_t g = spec.partition.num_groups();
  if (g > spec.k_true)
    throw DataError("generate_synthetic: infeasible spec: " + std::to_string(g) +
                    " groups need bands of >= 1 latent row each, k_true is " +
                    std::to_string(spec.k_true));

  std::vector<std::size_t> n_per_task = spec.n_per_task;
  if (n_per_task.size() == 1) n_per_task.assign(spec.m, spec.n_per_task[0]);
  if (n_per_task.size() != spec.m)
    throw DataError("generate_synthetic: " + std::to_string(spec.n_per_task.size()) +
                    " sample counts for " + std::to_string(spec.m) + " tasks");
  for (std::size_t n : n_per_task)
    if (n == 0) throw DataError("generate_synthetic: sample counts must be >= 1");

  std::vector<std::string> names = spec.task_names;
  if (names.empty()) {
    for (std::size_t t = 0; t < spec.m; ++t) {
      std::string idx = std::to_string(t);
      const std::size_t width = std::to_string(spec.m - 1).size();
      names.push_back("task" + std::string(width - idx.size(), '0') + idx);
    }
  }
  if (names.size() != spec.m)
    throw DataError("generate_synthetic: " + std::to_string(names.size()) + " names for " +
                    std::to_string(spec.m) + " tasks");

  // Contiguous latent bands, one per group, in partition order.
  std::vector<std::pair<std::size_t, std::size_t>> band(g);  // [start, end)
  {
    const std::size_t base = spec.k_true / g, extra = spec.k_true % g;
    std::size_t start = 0;
    for (std::size_t i = 0; i < g; ++i) {
      const std::size_t width = base + (i < extra ? 1 : 0);
      band[i] = {start, start + width};
      start += width;
    }
  }
  std::vector<std::size_t> group_of(spec.m);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t t : spec.partition.groups[i].members) group_of[t] = i;

  SynthData out;
  out.task_names = names;

  out.l_true = Matrix(spec.d, spec.k_true);
  {
    Rng rng = Rng::sub(seed, "synth:l");
    for (double& v : out.l_true.data())
      v = rng.uniform() < spec.latent_density ? rng.normal() : 0.0;
  }

  out.s_true = Matrix(spec.k_true, spec.m);
  for (std::size_t t = 0; t < spec.m; ++t) {
    Rng rng = Rng::sub(seed, "synth:s:" + names[t]);
    const auto [lo, hi] = band[group_of[t]];
    for (std::size_t k = lo; k < hi; ++k) out.s_true(k, t) = rng.normal();
  }

  out.train.d = spec.d;
  out.test.d = spec.d;
  for (std::size_t t = 0; t < spec.m; ++t) {
    Rng xtr = Rng::sub(seed, "synth:x:train:" + names[t]);
    Rng xte = Rng::sub(seed, "synth:x:test:" + names[t]);
    Matrix x_train = gaussian_matrix(n_per_task[t], spec.d, xtr);
    Matrix x_test = gaussian_matrix(spec.n_test_per_task, spec.d, xte);

    std::vector<double> w = matvec(out.l_true, col(out.s_true, t));
    std::vector<double> margins = matvec(x_train, w);
    const double med = median_abs(margins);
    if (med > 0) {
      const double scale = spec.margin_scale / med;
      for (std::size_t k = 0; k < spec.k_true; ++k) out.s_true(k, t) *= scale;
      for (double& v : w) v *= scale;
    }

    auto make_labels = [&](const Matrix& x, const std::string& tag) {
      Rng flip = Rng::sub(seed, "synth:flip:" + tag + ":" + names[t]);
      std::vector<double> y(x.rows());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const double score = dot(x.row(i), w);
        double label = score >= 0 ? 1.0 : -1.0;
        if (flip.uniform() < spec.label_noise) label = -label;
        y[i] = label;
      }
      return y;
    };

    std::vector<double> y_train = make_labels(x_train, "train");
    std::vector<double> y_test = make_labels(x_test, "test");
    out.train.tasks.emplace_back(names[t], std::move(x_train), std::move(y_train));
    out.test.tasks.emplace_back(names[t], std::move(x_test), std::move(y_test));
  }
  return out;
}

}  // namespace attrmtl
