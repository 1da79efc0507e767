#include "attrmtl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "attrmtl/errors.hpp"

namespace attrmtl {

Matrix predict_scores(const LatentModel& model, const Matrix& x) {
  if (x.cols() != model.d())
    throw DataError("predict_scores: " + std::to_string(x.cols()) + " features vs model d=" +
                    std::to_string(model.d()));
  if (model.l.cols() != model.s.rows())
    throw DataError("predict_scores: model l/s inner dimensions disagree");
  return x * compose_w(model);
}

Matrix predict_labels(const Matrix& scores) {
  Matrix labels = scores;
  for (double& v : labels.data()) v = v >= 0.0 ? 1.0 : -1.0;
  return labels;
}

namespace {

void check_eval_inputs(const Matrix& scores, const Matrix& labels,
                       const std::vector<std::string>* attr_names) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols())
    throw DataError("eval: scores " + std::to_string(scores.rows()) + "x" +
                    std::to_string(scores.cols()) + " vs labels " + std::to_string(labels.rows()) +
                    "x" + std::to_string(labels.cols()));
  if (scores.rows() == 0) throw DataError("eval: empty test set");
  if (attr_names && attr_names->size() != scores.cols())
    throw DataError("eval: " + std::to_string(attr_names->size()) + " names for " +
                    std::to_string(scores.cols()) + " attributes");
  for (double v : labels.data())
    if (v != 1.0 && v != -1.0) throw DataError("eval: labels must be +1 or -1");
}

std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

}  // namespace

std::string AccuracyTable::to_text() const {
  std::ostringstream os;
  os << "Group | Attributes | " << metric << "\n";
  for (const auto& g : per_group)
    os << g.name << " | " << g.attributes << " | " << format_pct(g.value) << "\n";
  os << "Total | " << total.attributes << " | " << format_pct(total.value) << "\n";
  return os.str();
}

std::string AccuracyTable::to_csv() const {
  std::ostringstream os;
  os << "kind,name,attributes," << metric << "\n";
  char buf[32];
  auto line = [&](const char* kind, const AccuracyRow& r) {
    std::snprintf(buf, sizeof(buf), "%.4f", 100.0 * r.value);
    os << kind << ',' << r.name << ',' << r.attributes << ',' << buf << "\n";
  };
  for (const auto& a : per_attribute) line("attribute", a);
  for (const auto& g : per_group) line("group", g);
  line("total", total);
  return os.str();
}

AccuracyTable accuracy_table(const Matrix& scores, const Matrix& labels,
                             const GroupPartition& partition,
                             const std::vector<std::string>& attr_names) {
  check_eval_inputs(scores, labels, &attr_names);
  require_partition_over(partition, scores.cols(), "accuracy_table");

  AccuracyTable table;
  const std::size_t n = scores.rows();
  for (std::size_t m = 0; m < scores.cols(); ++m) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pred = scores(i, m) >= 0.0 ? 1.0 : -1.0;
      if (pred == labels(i, m)) ++hits;
    }
    table.per_attribute.push_back(
        {attr_names[m], 1, static_cast<double>(hits) / static_cast<double>(n)});
  }

  for (const auto& g : partition.groups) {
    double sum = 0.0;
    for (std::size_t m : g.members) sum += table.per_attribute[m].value;
    table.per_group.push_back({g.name, g.members.size(),
                               sum / static_cast<double>(g.members.size())});
  }

  double sum = 0.0;
  for (const auto& a : table.per_attribute) sum += a.value;
  table.total = {"Total", scores.cols(), sum / static_cast<double>(scores.cols())};
  return table;
}

ApResult mean_average_precision(const Matrix& scores, const Matrix& labels) {
  check_eval_inputs(scores, labels, nullptr);
  const std::size_t n = scores.rows();
  ApResult result;
  result.per_attribute.assign(scores.cols(), std::numeric_limits<double>::quiet_NaN());

  std::vector<std::size_t> order(n);
  double sum = 0.0;
  std::size_t included = 0;
  for (std::size_t m = 0; m < scores.cols(); ++m) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores(a, m) > scores(b, m);
    });
    std::size_t hits = 0;
    double prec_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (labels(order[r], m) > 0) {
        ++hits;
        prec_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      }
    }
    if (hits == 0) {
      result.excluded.push_back(m);
      continue;
    }
    result.per_attribute[m] = prec_sum / static_cast<double>(hits);
    sum += result.per_attribute[m];
    ++included;
  }
  if (included == 0) throw DataError("mean_average_precision: no attribute has a positive label");
  result.map = sum / static_cast<double>(included);
  return result;
}

AccuracyTable map_table(const Matrix& scores, const Matrix& labels,
                        const GroupPartition& partition,
                        const std::vector<std::string>& attr_names) {
  check_eval_inputs(scores, labels, &attr_names);
  require_partition_over(partition, scores.cols(), "map_table");
  const ApResult ap = mean_average_precision(scores, labels);

  AccuracyTable table;
  table.metric = "mAP";
  for (std::size_t m = 0; m < scores.cols(); ++m) {
    const double v = std::isnan(ap.per_attribute[m]) ? 0.0 : ap.per_attribute[m];
    table.per_attribute.push_back({attr_names[m], 1, v});
  }
  for (const auto& g : partition.groups) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t m : g.members) {
      if (std::isnan(ap.per_attribute[m])) continue;
      sum += ap.per_attribute[m];
      ++cnt;
    }
    table.per_group.push_back({g.name, g.members.size(), cnt ? sum / cnt : 0.0});
  }
  table.total = {"Total", scores.cols(), ap.map};
  return table;
}

}  // namespace attrmtl
