#pragma once

#include <string>
#include <vector>

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"

namespace attrmtl {

// scores = x * (l * s); the predicted label is sign(score) with sign(0) = +1.
Matrix predict_scores(const LatentModel& model, const Matrix& x);
Matrix predict_labels(const Matrix& scores);

struct AccuracyRow {
  std::string name;
  std::size_t attributes = 0;
  double value = 0.0;  // fraction in [0, 1]
};

struct AccuracyTable {
  std::string metric = "Accuracy";
  std::vector<AccuracyRow> per_attribute;
  std::vector<AccuracyRow> per_group;
  AccuracyRow total;

  // "<name> | <#attributes> | <value%>" rows: header, groups, then Total.
  std::string to_text() const;
  // kind,name,attributes,<metric>: one row per attribute, per group, total.
  std::string to_csv() const;
};

// Unweighted means everywhere: a group's accuracy averages its member
// attributes, the total averages all attributes regardless of grouping.
AccuracyTable accuracy_table(const Matrix& scores, const Matrix& labels,
                             const GroupPartition& partition,
                             const std::vector<std::string>& attr_names);

struct ApResult {
  std::vector<double> per_attribute;  // NaN where excluded
  std::vector<std::size_t> excluded;  // attributes with no positive label
  double map = 0.0;                   // mean over included attributes
};

// Average precision per attribute: scores sorted descending, ties kept in
// original row order, AP = mean of precision at each positive rank.
ApResult mean_average_precision(const Matrix& scores, const Matrix& labels);

// The same table shape for AP: group rows average member APs (excluded
// members are skipped).
AccuracyTable map_table(const Matrix& scores, const Matrix& labels,
                        const GroupPartition& partition,
                        const std::vector<std::string>& attr_names);

}  // namespace attrmtl
