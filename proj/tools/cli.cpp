#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "attrmtl/baselines.hpp"
#include "attrmtl/dataio.hpp"
#include "attrmtl/errors.hpp"
#include "attrmtl/eval.hpp"
#include "attrmtl/loss.hpp"
#include "attrmtl/model.hpp"
#include "attrmtl/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace attrmtl::cli {
namespace {

// ---------------------------------------------------------------- plumbing

using ConfigItems = std::vector<std::pair<std::string, std::string>>;

void echo_config(const std::string& subcommand, const ConfigItems& items) {
  std::ostringstream os;
  os << "config: " << subcommand;
  for (const auto& [k, v] : items) os << ' ' << k << '=' << v;
  std::cerr << os.str() << '\n';
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_grid(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v))
      throw UsageError(flag + ": bad value '" + field + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

// "--latent-k" takes a plain integer or the shorthand "d/2".
std::size_t resolve_latent_k(const std::string& text, std::size_t d) {
  if (text.empty() || text == "0") return 0;
  if (text == "d/2") {
    if (d < 2) throw DataError("--latent-k d/2: feature dimension is " + std::to_string(d));
    return d / 2;
  }
  char* end = nullptr;
  const unsigned long v = std::strtoul(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || v == 0)
    throw UsageError("--latent-k: want a positive integer or 'd/2', got '" + text + "'");
  return static_cast<std::size_t>(v);
}

// ------------------------------------------------------------ data loading

struct DataFlags {
  std::string features;
  std::string labels;
  std::string data_dir;
  std::string groups;
  bool zero_one = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool with_groups) {
  cmd->add_option("--features", f.features, "feature matrix (.mtlf or .csv)");
  cmd->add_option("--labels", f.labels, "label CSV with attribute-name header");
  cmd->add_option("--data-dir", f.data_dir,
                  "directory of per-task <name>.features.mtlf / <name>.labels.csv pairs");
  if (with_groups) cmd->add_option("--groups", f.groups, "group file (GroupName: attr, ...)");
  cmd->add_flag("--zero-one-labels", f.zero_one, "accept 0/1 labels, mapping 0 to -1");
}

struct LoadedData {
  Dataset ds;
  std::vector<std::string> names;  // task names in dataset order
  GroupPartition partition;        // empty when no group file was requested
};

LoadedData load_inputs(const DataFlags& f, bool need_groups) {
  LoadedData out;
  if (!f.data_dir.empty()) {
    if (!f.features.empty() || !f.labels.empty())
      throw UsageError("--data-dir excludes --features/--labels");
    std::vector<fs::path> label_files;
    if (!fs::is_directory(f.data_dir)) throw DataError(f.data_dir + ": not a directory");
    for (const auto& entry : fs::directory_iterator(f.data_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 11 && name.ends_with(".labels.csv")) label_files.push_back(entry.path());
    }
    if (label_files.empty()) throw DataError(f.data_dir + ": no *.labels.csv files");
    std::sort(label_files.begin(), label_files.end());

    for (const auto& lpath : label_files) {
      const std::string stem = lpath.filename().string().substr(
          0, lpath.filename().string().size() - std::string(".labels.csv").size());
      fs::path fpath = lpath.parent_path() / (stem + ".features.mtlf");
      if (!fs::exists(fpath)) fpath = lpath.parent_path() / (stem + ".features.csv");
      if (!fs::exists(fpath))
        throw DataError(lpath.string() + ": no matching " + stem + ".features.{mtlf,csv}");

      LabelFile lf = load_labels(lpath, f.zero_one);
      Matrix x = load_features(fpath);
      Dataset part = Dataset::from_shared_features(std::move(x), lf.names, lf.labels);
      if (out.ds.tasks.empty()) out.ds.d = part.d;
      if (part.d != out.ds.d)
        throw DataError(fpath.string() + ": " + std::to_string(part.d) +
                        " features, earlier files have " + std::to_string(out.ds.d));
      for (auto& task : part.tasks) out.ds.tasks.push_back(std::move(task));
    }
  } else {
    if (f.features.empty() || f.labels.empty())
      throw UsageError("need --features and --labels (or --data-dir)");
    Matrix x = load_features(f.features);
    LabelFile lf = load_labels(f.labels, f.zero_one);
    out.ds = Dataset::from_shared_features(std::move(x), lf.names, lf.labels);
  }
  out.names = out.ds.task_names();

  if (need_groups) {
    if (f.groups.empty()) throw UsageError("need --groups");
    out.partition = load_groups(f.groups, out.names);
    require_valid(out.ds, out.partition);
  } else {
    require_valid(out.ds, GroupPartition::all_in_one(out.ds.num_tasks()));
  }
  return out;
}

ConfigItems data_config(const DataFlags& f) {
  return {{"features", f.features},
          {"labels", f.labels},
          {"data-dir", f.data_dir},
          {"groups", f.groups},
          {"zero-one-labels", f.zero_one ? "1" : "0"}};
}

std::ostream& open_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path, std::ios::trunc);
  if (!file) throw DataError(path + ": cannot open for writing");
  return file;
}

// Model columns are matched to data tasks by name, not position.
std::vector<std::size_t> model_columns(const LatentModel& model,
                                       const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < model.task_names.size(); ++j) index[model.task_names[j]] = j;
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    auto it = index.find(n);
    if (it == index.end()) throw DataError("model has no task named '" + n + "'");
    cols.push_back(it->second);
  }
  return cols;
}

// ------------------------------------------------------------------ train

struct HyperFlags {
  double mu = 0.1;
  double gamma = 0.05;
  double lambda = 0.4;
  std::string latent_k = "0";
  double nu = 0.0;
  std::size_t outer_max = 50;
  double outer_tol = 1e-5;
  std::size_t inner_max = 500;
  double inner_tol = 1e-6;
  std::uint64_t seed = 42;
  bool squared_l21 = false;
  bool size_weighted = false;
  bool exact_s = false;
  bool nu_decay = false;
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& h) {
  cmd->add_option("--mu", h.mu, "group penalty weight on s");
  cmd->add_option("--gamma", h.gamma, "L1 weight on l");
  cmd->add_option("--lambda", h.lambda, "Frobenius weight on l");
  cmd->add_option("--latent-k", h.latent_k, "latent dimension: integer, 'd/2', or 0 for auto");
  cmd->add_option("--nu", h.nu, "smoothing scale (0 = auto from --inner-tol)");
  cmd->add_option("--outer-max", h.outer_max, "max outer alternations");
  cmd->add_option("--outer-tol", h.outer_tol, "outer relative objective tolerance");
  cmd->add_option("--inner-max", h.inner_max, "max inner solver iterations");
  cmd->add_option("--inner-tol", h.inner_tol, "inner relative objective tolerance");
  cmd->add_option("--seed", h.seed, "random seed");
  cmd->add_flag("--squared-l21", h.squared_l21, "penalize the squared group norm");
  cmd->add_flag("--size-weighted-groups", h.size_weighted, "weight blocks by sqrt(group size)");
  cmd->add_flag("--exact-s", h.exact_s, "exact-prox s-step instead of smoothing");
  cmd->add_flag("--nu-decay", h.nu_decay, "geometric nu schedule inside the s-step");
}

Hyperparams to_hyperparams(const HyperFlags& h, std::size_t d) {
  Hyperparams hp;
  hp.mu = h.mu;
  hp.gamma = h.gamma;
  hp.lambda = h.lambda;
  hp.k = resolve_latent_k(h.latent_k, d);
  hp.nu = h.nu;
  hp.outer_max = h.outer_max;
  hp.outer_tol = h.outer_tol;
  hp.inner_max = h.inner_max;
  hp.inner_tol = h.inner_tol;
  hp.seed = h.seed;
  hp.squared_l21 = h.squared_l21;
  hp.size_weighted_groups = h.size_weighted;
  hp.exact_s_step = h.exact_s;
  hp.nu_decay = h.nu_decay;
  return hp;
}

ConfigItems hyper_config(const HyperFlags& h, const Hyperparams& hp) {
  return {{"mu", fmt(h.mu)},
          {"gamma", fmt(h.gamma)},
          {"lambda", fmt(h.lambda)},
          {"latent-k", h.latent_k + "(resolved=" + std::to_string(hp.k) + ")"},
          {"nu", fmt(h.nu)},
          {"outer-max", std::to_string(h.outer_max)},
          {"outer-tol", fmt(h.outer_tol)},
          {"inner-max", std::to_string(h.inner_max)},
          {"inner-tol", fmt(h.inner_tol)},
          {"seed", std::to_string(h.seed)},
          {"squared-l21", h.squared_l21 ? "1" : "0"},
          {"size-weighted-groups", h.size_weighted ? "1" : "0"},
          {"exact-s", h.exact_s ? "1" : "0"},
          {"nu-decay", h.nu_decay ? "1" : "0"}};
}

int cmd_train(const DataFlags& data_flags, const HyperFlags& hyper, const std::string& out_path,
              const std::string& report_path) {
  LoadedData data = load_inputs(data_flags, true);
  Hyperparams hp = to_hyperparams(hyper, data.ds.d);
  hp.k = resolve_latent_dim(hp, data.ds);

  ConfigItems cfg = data_config(data_flags);
  ConfigItems hc = hyper_config(hyper, hp);
  cfg.insert(cfg.end(), hc.begin(), hc.end());
  cfg.emplace_back("out", out_path);
  cfg.emplace_back("report", report_path);
  echo_config("train", cfg);

  TrainResult res = train(data.ds, data.partition, hp);

  std::ofstream report_file;
  std::ostream& report = open_out(report_path, report_file, std::cout);
  for (std::size_t i = 0; i < res.report.iters.size(); ++i) {
    const auto& rec = res.report.iters[i];
    json line;
    line["iter"] = i + 1;
    line["objective"] = rec.obj_after_l;
    line["obj_after_s"] = rec.obj_after_s;
    line["loss"] = rec.terms.loss;
    line["group_l21"] = rec.terms.group_l21;
    line["l1"] = rec.terms.l1;
    line["frobenius"] = rec.terms.frobenius;
    line["s_iters"] = rec.s_iters;
    line["l_iters"] = rec.l_iters;
    report << line.dump() << '\n';
    std::cerr << "iter " << (i + 1) << ": objective=" << fmt(rec.obj_after_l) << " (s:"
              << rec.s_iters << " l:" << rec.l_iters << ")\n";
  }
  std::cerr << "trained: outer_iters=" << res.report.iters.size()
            << " converged=" << (res.report.converged ? "yes" : "no")
            << " objective=" << fmt(res.report.iters.empty() ? res.report.obj_initial
                                                             : res.report.iters.back().obj_after_l)
            << " wall=" << res.report.wall_seconds << "s\n";

  save_model(out_path, res.model);
  std::cerr << "model written to " << out_path << '\n';
  return 0;
}

// ---------------------------------------------------------------- predict

int cmd_predict(const std::string& model_path, const std::string& features_path,
                const std::string& out_path) {
  echo_config("predict",
              {{"model", model_path}, {"features", features_path}, {"out", out_path}});
  LatentModel model = load_model(model_path);
  Matrix x = load_features(features_path);
  Matrix scores = predict_scores(model, x);

  std::ofstream out_file;
  std::ostream& out = open_out(out_path, out_file, std::cout);
  for (std::size_t j = 0; j < model.task_names.size(); ++j)
    out << (j ? "," : "") << model.task_names[j];
  out << '\n';
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t j = 0; j < scores.cols(); ++j) out << (j ? "," : "") << fmt(scores(i, j));
    out << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------- eval

// Per-attribute accuracy/AP over possibly per-task test pools; group and
// total rows follow the same unweighted means as the matrix path.
struct EvalRows {
  std::vector<double> acc;
  std::vector<double> ap;
  std::vector<bool> ap_ok;
};

EvalRows eval_rows(const LatentModel& model, const LoadedData& data) {
  const Matrix w = compose_w(model);
  const std::vector<std::size_t> cols = model_columns(model, data.names);
  EvalRows rows;
  std::vector<double> wm(w.rows());
  for (std::size_t t = 0; t < data.ds.num_tasks(); ++t) {
    const TaskData& task = data.ds.tasks[t];
    for (std::size_t i = 0; i < w.rows(); ++i) wm[i] = w(i, cols[t]);
    Matrix scores(task.n(), 1);
    Matrix labels(task.n(), 1);
    std::size_t hits = 0, positives = 0;
    for (std::size_t i = 0; i < task.n(); ++i) {
      scores(i, 0) = dot(task.x().row(i), wm);
      labels(i, 0) = task.y()[i];
      if (task.y()[i] > 0) ++positives;
      const double pred = scores(i, 0) >= 0 ? 1.0 : -1.0;
      if (pred == task.y()[i]) ++hits;
    }
    rows.acc.push_back(static_cast<double>(hits) / static_cast<double>(task.n()));
    if (positives == 0) {
      rows.ap.push_back(0.0);
      rows.ap_ok.push_back(false);
      std::cerr << "warning: attribute '" << task.name()
                << "' has no positive test labels, excluded from mAP\n";
    } else {
      rows.ap.push_back(mean_average_precision(scores, labels).map);
      rows.ap_ok.push_back(true);
    }
  }
  return rows;
}

AccuracyTable assemble_table(const std::vector<double>& values, const std::vector<bool>& ok,
                             const LoadedData& data, const std::string& metric) {
  AccuracyTable table;
  table.metric = metric;
  for (std::size_t t = 0; t < values.size(); ++t)
    table.per_attribute.push_back({data.names[t], 1, ok[t] ? values[t] : 0.0});
  for (const auto& g : data.partition.groups) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t m : g.members) {
      if (!ok[m]) continue;
      sum += values[m];
      ++cnt;
    }
    table.per_group.push_back({g.name, g.members.size(), cnt ? sum / cnt : 0.0});
  }
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!ok[t]) continue;
    sum += values[t];
    ++cnt;
  }
  table.total = {"Total", values.size(), cnt ? sum / cnt : 0.0};
  return table;
}

int cmd_eval(const std::string& model_path, const DataFlags& data_flags,
             const std::string& metric, bool csv, const std::string& out_path) {
  ConfigItems cfg = data_config(data_flags);
  cfg.emplace_back("model", model_path);
  cfg.emplace_back("metric", metric);
  cfg.emplace_back("csv", csv ? "1" : "0");
  cfg.emplace_back("out", out_path);
  echo_config("eval", cfg);

  LatentModel model = load_model(model_path);
  LoadedData data = load_inputs(data_flags, true);
  EvalRows rows = eval_rows(model, data);
  const std::vector<bool> all_ok(rows.acc.size(), true);

  std::ofstream out_file;
  std::ostream& out = open_out(out_path, out_file, std::cout);
  if (metric == "acc" || metric == "both") {
    AccuracyTable t = assemble_table(rows.acc, all_ok, data, "Accuracy");
    out << (csv ? t.to_csv() : t.to_text());
  }
  if (metric == "map" || metric == "both") {
    AccuracyTable t = assemble_table(rows.ap, rows.ap_ok, data, "mAP");
    out << (csv ? t.to_csv() : t.to_text());
  }
  return 0;
}

// --------------------------------------------------------------- baseline

int cmd_baseline(const std::string& method, const DataFlags& data_flags, double mu, double gamma,
                 double lambda_r, std::size_t inner_max, double inner_tol,
                 const std::string& out_path) {
  ConfigItems cfg = data_config(data_flags);
  cfg.emplace_back("method", method);
  cfg.emplace_back("mu", fmt(mu));
  cfg.emplace_back("gamma", fmt(gamma));
  cfg.emplace_back("lambda-r", fmt(lambda_r));
  cfg.emplace_back("inner-max", std::to_string(inner_max));
  cfg.emplace_back("inner-tol", fmt(inner_tol));
  cfg.emplace_back("out", out_path);
  echo_config("baseline", cfg);

  LoadedData data = load_inputs(data_flags, false);
  SolverOpts opts;
  opts.max_iter = inner_max;
  opts.tol = inner_tol;

  Matrix w;
  if (method == "lasso") {
    w = train_single_lasso(data.ds, gamma, opts);
  } else if (method == "l21") {
    w = train_l21_all(data.ds, mu, opts);
  } else {
    w = train_ridge(data.ds, lambda_r);
  }
  save_model(out_path, as_latent(w, data.names));
  std::cerr << "baseline " << method << " model written to " << out_path << '\n';
  return 0;
}

// ------------------------------------------------------------------ synth

std::map<std::size_t, std::size_t> parse_undersample(const std::string& text) {
  std::map<std::size_t, std::size_t> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const std::size_t colon = field.find(':');
    char* e1 = nullptr;
    char* e2 = nullptr;
    if (colon == std::string::npos) throw UsageError("--undersample: want idx:count pairs");
    const std::string a = field.substr(0, colon), b = field.substr(colon + 1);
    const unsigned long idx = std::strtoul(a.c_str(), &e1, 10);
    const unsigned long cnt = std::strtoul(b.c_str(), &e2, 10);
    if (a.empty() || b.empty() || e1 != a.c_str() + a.size() || e2 != b.c_str() + b.size() ||
        cnt == 0)
      throw UsageError("--undersample: bad pair '" + field + "'");
    out[idx] = cnt;
  }
  return out;
}

int cmd_synth(std::size_t d, std::size_t m, std::size_t groups, std::size_t k_true,
              std::size_t n_per_task, const std::string& undersample, std::size_t n_test,
              double density, double noise, double margin_scale, std::uint64_t seed,
              const std::string& out_dir) {
  echo_config("synth", {{"d", std::to_string(d)},
                        {"m", std::to_string(m)},
                        {"groups", std::to_string(groups)},
                        {"k-true", std::to_string(k_true)},
                        {"n-per-task", std::to_string(n_per_task)},
                        {"undersample", undersample},
                        {"n-test", std::to_string(n_test)},
                        {"density", fmt(density)},
                        {"noise", fmt(noise)},
                        {"margin-scale", fmt(margin_scale)},
                        {"seed", std::to_string(seed)},
                        {"out-dir", out_dir}});

  SynthSpec spec;
  spec.d = d;
  spec.m = m;
  spec.k_true = k_true == 0 ? m : k_true;
  spec.partition = GroupPartition::contiguous(m, groups);
  spec.n_per_task.assign(m, n_per_task);
  for (const auto& [idx, cnt] : parse_undersample(undersample)) {
    if (idx >= m) throw UsageError("--undersample: task " + std::to_string(idx) + " of " +
                                   std::to_string(m));
    spec.n_per_task[idx] = cnt;
  }
  spec.n_test_per_task = n_test;
  spec.latent_density = density;
  spec.label_noise = noise;
  spec.margin_scale = margin_scale;

  SynthData data = generate_synthetic(spec, seed);

  const fs::path root(out_dir);
  fs::create_directories(root / "train");
  fs::create_directories(root / "test");
  save_groups(root / "groups.txt", spec.partition, data.task_names);
  LatentModel truth;
  truth.l = data.l_true;
  truth.s = data.s_true;
  truth.task_names = data.task_names;
  save_model(root / "truth.mtlm", truth);

  auto dump = [&](const Dataset& ds, const fs::path& dir) {
    for (const auto& task : ds.tasks) {
      save_features(dir / (task.name() + ".features.mtlf"), task.x());
      LabelFile lf;
      lf.names = {task.name()};
      Matrix y(task.n(), 1);
      for (std::size_t i = 0; i < task.n(); ++i) y(i, 0) = task.y()[i];
      lf.labels = std::move(y);
      save_labels(dir / (task.name() + ".labels.csv"), lf);
    }
  };
  dump(data.train, root / "train");
  dump(data.test, root / "test");
  std::cerr << "synthetic dataset written to " << out_dir << " (" << m << " tasks, " << groups
            << " groups)\n";
  return 0;
}

// --------------------------------------------------------------------- cv

int cmd_cv(const DataFlags& data_flags, const HyperFlags& hyper, const std::string& method,
           const std::string& mu_grid_text, const std::string& gamma_grid_text, std::size_t folds,
           std::size_t threads, const std::string& out_path) {
  LoadedData data = load_inputs(data_flags, true);
  Hyperparams hp = to_hyperparams(hyper, data.ds.d);

  ConfigItems cfg = data_config(data_flags);
  ConfigItems hc = hyper_config(hyper, hp);
  cfg.insert(cfg.end(), hc.begin(), hc.end());
  cfg.emplace_back("method", method);
  cfg.emplace_back("mu-grid", mu_grid_text);
  cfg.emplace_back("gamma-grid", gamma_grid_text);
  cfg.emplace_back("folds", std::to_string(folds));
  cfg.emplace_back("threads", std::to_string(threads));
  cfg.emplace_back("out", out_path);
  echo_config("cv", cfg);

  const CvMethod cv_method = method == "lasso" ? CvMethod::lasso : CvMethod::mtl;
  std::vector<double> mu_grid;
  if (cv_method == CvMethod::mtl) mu_grid = parse_grid(mu_grid_text, "--mu-grid");
  const std::vector<double> gamma_grid = parse_grid(gamma_grid_text, "--gamma-grid");

  CvResult res = cross_validate(data.ds, data.partition, mu_grid, gamma_grid, folds, hp,
                                cv_method, threads);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';

  std::ofstream out_file;
  std::ostream& out = open_out(out_path, out_file, std::cout);
  for (const auto& cell : res.table) {
    out << "mu=" << fmt(cell.mu) << " gamma=" << fmt(cell.gamma)
        << " mean_accuracy=" << fmt(cell.mean_accuracy) << " folds=";
    for (std::size_t f = 0; f < cell.fold_accuracy.size(); ++f)
      out << (f ? "," : "") << fmt(cell.fold_accuracy[f]);
    out << '\n';
  }
  out << "best: mu=" << fmt(res.best_mu) << " gamma=" << fmt(res.best_gamma) << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"attrmtl: latent group-structured multi-task attribute classifiers"};
  app.require_subcommand(1);

  // train
  DataFlags train_data;
  HyperFlags train_hyper;
  std::string train_out = "model.mtlm", train_report;
  auto* t = app.add_subcommand("train", "fit the latent multi-task model");
  add_data_flags(t, train_data, true);
  add_hyper_flags(t, train_hyper);
  t->add_option("--out", train_out, "model output path");
  t->add_option("--report", train_report, "JSON-lines training report path (default stdout)");

  // predict
  std::string pr_model, pr_features, pr_out;
  auto* p = app.add_subcommand("predict", "score a feature matrix with a saved model");
  p->add_option("--model", pr_model)->required();
  p->add_option("--features", pr_features)->required();
  p->add_option("--out", pr_out, "score CSV path (default stdout)");

  // eval
  std::string ev_model, ev_metric = "acc", ev_out;
  bool ev_csv = false;
  DataFlags ev_data;
  auto* e = app.add_subcommand("eval", "accuracy / mAP tables on labeled data");
  e->add_option("--model", ev_model)->required();
  add_data_flags(e, ev_data, true);
  e->add_option("--metric", ev_metric, "acc | map | both")
      ->check(CLI::IsMember({"acc", "map", "both"}));
  e->add_flag("--csv", ev_csv, "emit CSV instead of the text table");
  e->add_option("--out", ev_out, "output path (default stdout)");

  // baseline
  std::string bl_method, bl_out = "baseline.mtlm";
  DataFlags bl_data;
  double bl_mu = 0.1, bl_gamma = 0.05, bl_lambda_r = 1.0;
  std::size_t bl_inner_max = 500;
  double bl_inner_tol = 1e-6;
  auto* b = app.add_subcommand("baseline", "flat single-task / shared-sparsity baselines");
  b->add_option("method", bl_method, "lasso | l21 | ridge")
      ->required()
      ->check(CLI::IsMember({"lasso", "l21", "ridge"}));
  add_data_flags(b, bl_data, false);
  b->add_option("--mu", bl_mu, "row-L21 weight (l21)");
  b->add_option("--gamma", bl_gamma, "L1 weight (lasso)");
  b->add_option("--lambda-r", bl_lambda_r, "ridge weight (ridge)");
  b->add_option("--inner-max", bl_inner_max);
  b->add_option("--inner-tol", bl_inner_tol);
  b->add_option("--out", bl_out, "model output path");

  // synth
  std::size_t sy_d = 100, sy_m = 12, sy_groups = 3, sy_k_true = 0, sy_n = 100, sy_n_test = 1000;
  std::string sy_undersample, sy_out_dir = "synth";
  double sy_density = 0.3, sy_noise = 0.0, sy_margin = 1.0;
  std::uint64_t sy_seed = 42;
  auto* s = app.add_subcommand("synth", "write a group-structured synthetic dataset");
  s->add_option("--d", sy_d, "feature dimension");
  s->add_option("--m", sy_m, "tasks");
  s->add_option("--groups", sy_groups, "groups (contiguous task ranges)");
  s->add_option("--k-true", sy_k_true, "true latent dimension (0 = m)");
  s->add_option("--n-per-task", sy_n, "train samples per task");
  s->add_option("--undersample", sy_undersample, "idx:count overrides, e.g. 0:15,1:15");
  s->add_option("--n-test", sy_n_test, "test samples per task");
  s->add_option("--density", sy_density, "nonzero fraction of the true latent basis");
  s->add_option("--noise", sy_noise, "label flip probability");
  s->add_option("--margin-scale", sy_margin, "target median unsigned margin");
  s->add_option("--seed", sy_seed);
  s->add_option("--out-dir", sy_out_dir);

  // cv
  DataFlags cv_data;
  HyperFlags cv_hyper;
  std::string cv_method = "mtl", cv_mu_grid, cv_gamma_grid, cv_out;
  std::size_t cv_folds = 5, cv_threads = 1;
  auto* c = app.add_subcommand("cv", "stratified cross-validation over (mu, gamma)");
  add_data_flags(c, cv_data, true);
  add_hyper_flags(c, cv_hyper);
  c->add_option("--method", cv_method, "mtl | lasso")->check(CLI::IsMember({"mtl", "lasso"}));
  c->add_option("--mu-grid", cv_mu_grid, "comma-separated mu values");
  c->add_option("--gamma-grid", cv_gamma_grid, "comma-separated gamma values")->required();
  c->add_option("--folds", cv_folds);
  c->add_option("--threads", cv_threads, "parallel fold/cell jobs (1 = serial)");
  c->add_option("--out", cv_out, "output path (default stdout)");

  try {
    app.parse(argc, const_cast<char**>(argv));
    if (t->parsed()) return cmd_train(train_data, train_hyper, train_out, train_report);
    if (p->parsed()) return cmd_predict(pr_model, pr_features, pr_out);
    if (e->parsed()) return cmd_eval(ev_model, ev_data, ev_metric, ev_csv, ev_out);
    if (b->parsed())
      return cmd_baseline(bl_method, bl_data, bl_mu, bl_gamma, bl_lambda_r, bl_inner_max,
                          bl_inner_tol, bl_out);
    if (s->parsed())
      return cmd_synth(sy_d, sy_m, sy_groups, sy_k_true, sy_n, sy_undersample, sy_n_test,
                       sy_density, sy_noise, sy_margin, sy_seed, sy_out_dir);
    if (c->parsed())
      return cmd_cv(cv_data, cv_hyper, cv_method, cv_mu_grid, cv_gamma_grid, cv_folds, cv_threads,
                    cv_out);
    return 1;
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return 1;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return 2;
  } catch (const SolverError& err) {
    std::cerr << "solver error: " << err.what() << '\n';
    return 3;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("attrmtl");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& a : full) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace attrmtl::cli
