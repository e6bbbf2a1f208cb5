#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topicreg/ingest.hpp"

namespace topicreg {

/// Regression inputs. Column order:
///   const, dem_debate, rep_debate, followers_millions, weekend,
///   topic_<k> for every k except the baseline topic,
///   hour_<hh> for every hour except the baseline hour.
struct DesignMatrix {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;
  std::vector<std::string> row_ids;
  std::optional<int> baseline_topic;  // unset when no topic columns
  std::optional<int> baseline_hour;   // unset when hour controls are off
  int num_topics = 0;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  /// Index of a named column, if present.
  std::optional<Eigen::Index> column(std::string_view name) const;
};

struct DesignOptions {
  int baseline_topic = 0;
  bool hour_controls = true;
  int baseline_hour = 0;
};

inline constexpr const char* kInterceptName = "const";

std::string topic_column_name(int k);
std::string hour_column_name(int hour);

/// Covariates only (no topic columns). Rows without a follower value are
/// rejected; filter with complete_rows first.
DesignMatrix build_design(const std::vector<AnalysisRow>& rows, const DesignOptions& options);

/// Covariates plus topic weights. `theta` is D x K with rows aligned to
/// `theta_ids`; every analysis row must have a matching id.
DesignMatrix build_design(const std::vector<AnalysisRow>& rows, const Eigen::MatrixXd& theta,
                          std::span<const std::string> theta_ids, const DesignOptions& options);

struct PrunedDesign {
  DesignMatrix design;
  std::vector<std::string> dropped;  // all-zero columns removed
};

/// Removes columns that are identically zero (e.g. an hour with no posts).
PrunedDesign drop_zero_columns(const DesignMatrix& design);

/// Same rows, keeping only the named columns in the given order.
DesignMatrix select_columns(const DesignMatrix& design, std::span<const std::string> names);

void save_design_csv(const std::filesystem::path& path, const DesignMatrix& design);
DesignMatrix load_design_csv(const std::filesystem::path& path);

struct SummaryRow {
  std::string variable;
  double min = 0, max = 0, mean = 0, sd = 0;
  std::size_t n = 0;
};

/// Likes, Democratic Debates, Republican Debates, Followers (million).
/// Followers statistics use only rows that carry a value.
std::vector<SummaryRow> summary_stats(const std::vector<AnalysisRow>& rows);

/// min/max/mean/sample-sd of a single series; throws on empty input.
SummaryRow describe(std::string variable, std::span<const double> values);

}  // namespace topicreg
