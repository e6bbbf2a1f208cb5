#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicreg/countreg.hpp"
#include "topicreg/design.hpp"
#include "topicreg/lda.hpp"

namespace topicreg {

enum class TableFormat { Text, Csv, Markdown };

std::optional<TableFormat> parse_table_format(std::string_view name);

/// |v| < 1: three significant figures ("0.0368", "-0.225");
/// otherwise three decimals ("4.688", "-1.270").
std::string format_coef(double v);

struct RegressionRow {
  std::string column;  // design column name
  std::string label;   // display name
  double coef = 0.0;
  double se = 0.0;
  double p_value = 1.0;
  std::string stars;
};

struct RegressionTable {
  std::string title;
  std::vector<RegressionRow> rows;  // design-column order
  std::optional<RegressionRow> ln_alpha;
  std::size_t n = 0;
  double aic = 0.0;
  bool cov_reliable = true;
  bool converged = true;
  bool hour_controls = false;
};

struct TableOptions {
  /// Display names for topic_<k> columns, keyed by topic index.
  std::map<int, std::string> topic_labels;
  bool show_hour_rows = false;
};

/// "Democratic Debates", "Topic 2", "Hour 14", ...
std::string display_label(const std::string& column, const TableOptions& options = {});

RegressionTable make_regression_table(const NbFit& fit, std::string title,
                                      const TableOptions& options = {});

/// Throws UsageError when the fit has no coefficients.
std::string render_regression_table(const NbFit& fit, TableFormat format,
                                    const TableOptions& options = {});

/// Several specifications side by side (e.g. baseline vs topics); rows are
/// the union of columns in first-appearance order.
std::string render_regression_tables(std::span<const RegressionTable> tables, TableFormat format,
                                     const TableOptions& options = {});

struct CiPoint {
  std::string name;
  double estimate = 0, lo = 0, hi = 0;
};

/// Writes `<stem>.svg` and `<stem>.csv` for the selected coefficients
/// (default: all topic columns) against a zero baseline line.
std::vector<CiPoint> render_ci_plot(const NbFit& fit, std::span<const std::string> columns,
                                    const std::filesystem::path& stem,
                                    const TableOptions& options = {},
                                    std::string baseline_label = "baseline");

std::string render_ci_svg(std::span<const CiPoint> points, const std::string& baseline_label);

/// One line per topic: "Topic k: w1 w2 ...". n_words > V is clamped with a warning.
std::string render_topic_table(const TopicModel& model, std::size_t n_words = 20,
                               const TableOptions& options = {});

std::string render_summary_table(std::span<const SummaryRow> rows, TableFormat format);

}  // namespace topicreg
