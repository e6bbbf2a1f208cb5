#include "topicreg/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "topicreg/csv.hpp"
#include "topicreg/error.hpp"
#include "topicreg/log.hpp"

namespace topicreg {
namespace {

constexpr int kFixedColumns = 5;

DesignMatrix build_impl(const std::vector<AnalysisRow>& rows, const Eigen::MatrixXd* theta,
                        std::span<const std::string> theta_ids, const DesignOptions& opt) {
  if (rows.empty()) throw DataError("no analysis rows to build a design from");
  const int K = theta ? static_cast<int>(theta->cols()) : 0;
  if (theta) {
    if (K < 2) throw UsageError("topic weights need at least 2 topics");
    if (opt.baseline_topic < 0 || opt.baseline_topic >= K) {
      throw UsageError("baseline topic " + std::to_string(opt.baseline_topic) + " out of range");
    }
    if (static_cast<std::size_t>(theta->rows()) != theta_ids.size()) {
      throw DataError("topic weights and document ids are misaligned");
    }
  }
  if (opt.hour_controls && (opt.baseline_hour < 0 || opt.baseline_hour > 23)) {
    throw UsageError("baseline hour must be in [0, 23]");
  }

  DesignMatrix dm;
  dm.num_topics = K;
  dm.column_names = {kInterceptName, "dem_debate", "rep_debate", "followers_millions", "weekend"};
  if (theta) {
    dm.baseline_topic = opt.baseline_topic;
    for (int k = 0; k < K; ++k) {
      if (k != opt.baseline_topic) dm.column_names.push_back(topic_column_name(k));
    }
  }
  if (opt.hour_controls) {
    dm.baseline_hour = opt.baseline_hour;
    for (int h = 0; h < 24; ++h) {
      if (h != opt.baseline_hour) dm.column_names.push_back(hour_column_name(h));
    }
  }
  std::unordered_set<std::string> unique(dm.column_names.begin(), dm.column_names.end());
  if (unique.size() != dm.column_names.size()) throw UsageError("duplicate column names");

  std::unordered_map<std::string_view, Eigen::Index> theta_row;
  if (theta) {
    for (std::size_t i = 0; i < theta_ids.size(); ++i) {
      theta_row.emplace(theta_ids[i], static_cast<Eigen::Index>(i));
    }
  }

  const auto N = static_cast<Eigen::Index>(rows.size());
  const auto P = static_cast<Eigen::Index>(dm.column_names.size());
  dm.X = Eigen::MatrixXd::Zero(N, P);
  dm.y.resize(N);
  dm.row_ids.reserve(rows.size());
  for (Eigen::Index i = 0; i < N; ++i) {
    const AnalysisRow& r = rows[static_cast<std::size_t>(i)];
    if (!r.followers_millions) {
      throw DataError("row '" + r.tweet.id + "' has no follower count; drop incomplete rows first");
    }
    dm.y(i) = static_cast<double>(r.tweet.likes);
    dm.row_ids.push_back(r.tweet.id);
    dm.X(i, 0) = 1.0;
    dm.X(i, 1) = r.dem_debate ? 1.0 : 0.0;
    dm.X(i, 2) = r.rep_debate ? 1.0 : 0.0;
    dm.X(i, 3) = *r.followers_millions;
    dm.X(i, 4) = r.is_weekend ? 1.0 : 0.0;
    Eigen::Index col = kFixedColumns;
    if (theta) {
      auto it = theta_row.find(r.tweet.id);
      if (it == theta_row.end()) throw DataError("no topic weights for tweet '" + r.tweet.id + "'");
      for (int k = 0; k < K; ++k) {
        if (k != opt.baseline_topic) dm.X(i, col++) = (*theta)(it->second, k);
      }
    }
    if (opt.hour_controls) {
      if (r.local_hour != opt.baseline_hour) {
        const int offset = r.local_hour < opt.baseline_hour ? r.local_hour : r.local_hour - 1;
        dm.X(i, col + offset) = 1.0;
      }
    }
  }
  return dm;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::optional<Eigen::Index> DesignMatrix::column(std::string_view name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - column_names.begin());
}

std::string topic_column_name(int k) { return "topic_" + std::to_string(k); }

std::string hour_column_name(int hour) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "hour_%02d", hour);
  return buf;
}

DesignMatrix build_design(const std::vector<AnalysisRow>& rows, const DesignOptions& options) {
  return build_impl(rows, nullptr, {}, options);
}

DesignMatrix build_design(const std::vector<AnalysisRow>& rows, const Eigen::MatrixXd& theta,
                          std::span<const std::string> theta_ids, const DesignOptions& options) {
  return build_impl(rows, &theta, theta_ids, options);
}

PrunedDesign drop_zero_columns(const DesignMatrix& design) {
  std::vector<std::string> keep;
  PrunedDesign out;
  for (Eigen::Index c = 0; c < design.cols(); ++c) {
    if (design.X.col(c).cwiseAbs().maxCoeff() == 0.0) {
      out.dropped.push_back(design.column_names[static_cast<std::size_t>(c)]);
    } else {
      keep.push_back(design.column_names[static_cast<std::size_t>(c)]);
    }
  }
  if (!out.dropped.empty()) {
    std::string list;
    for (const auto& n : out.dropped) list += (list.empty() ? "" : ", ") + n;
    warn("dropping all-zero design column(s): " + list);
  }
  out.design = select_columns(design, keep);
  return out;
}

DesignMatrix select_columns(const DesignMatrix& design, std::span<const std::string> names) {
  DesignMatrix out;
  out.y = design.y;
  out.row_ids = design.row_ids;
  out.baseline_topic = design.baseline_topic;
  out.baseline_hour = design.baseline_hour;
  out.num_topics = design.num_topics;
  out.X.resize(design.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto c = design.column(names[j]);
    if (!c) throw UsageError("unknown design column '" + names[j] + "'");
    out.X.col(static_cast<Eigen::Index>(j)) = design.X.col(*c);
    out.column_names.push_back(names[j]);
  }
  return out;
}

void save_design_csv(const std::filesystem::path& path, const DesignMatrix& design) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  std::vector<std::string> header{"id", "y"};
  header.insert(header.end(), design.column_names.begin(), design.column_names.end());
  csv::write_row(out, header);
  std::vector<std::string> fields;
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    fields.clear();
    fields.push_back(design.row_ids[static_cast<std::size_t>(i)]);
    fields.push_back(format_double(design.y(i)));
    for (Eigen::Index c = 0; c < design.cols(); ++c) fields.push_back(format_double(design.X(i, c)));
    csv::write_row(out, fields);
  }
}

DesignMatrix load_design_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  csv::Reader reader(in);
  csv::Record rec;
  if (!reader.next(rec) || rec.fields.size() < 3 || rec.fields[0] != "id" || rec.fields[1] != "y") {
    throw DataError("design CSV must start with id,y,<columns>");
  }
  DesignMatrix dm;
  dm.column_names.assign(rec.fields.begin() + 2, rec.fields.end());
  std::vector<std::vector<double>> values;
  std::vector<double> ys;
  while (reader.next(rec)) {
    if (csv::is_blank(rec)) continue;
    if (rec.fields.size() != dm.column_names.size() + 2) {
      throw DataError("wrong field count, line " + std::to_string(rec.line));
    }
    dm.row_ids.push_back(rec.fields[0]);
    std::vector<double> row;
    try {
      ys.push_back(std::stod(rec.fields[1]));
      for (std::size_t c = 2; c < rec.fields.size(); ++c) row.push_back(std::stod(rec.fields[c]));
    } catch (const std::exception&) {
      throw DataError("invalid number, line " + std::to_string(rec.line));
    }
    values.push_back(std::move(row));
  }
  const auto N = static_cast<Eigen::Index>(values.size());
  const auto P = static_cast<Eigen::Index>(dm.column_names.size());
  dm.X.resize(N, P);
  dm.y.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    dm.y(i) = ys[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < P; ++c) {
      dm.X(i, c) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    }
  }
  int max_topic = -1;
  std::vector<int> topics, hours;
  for (const auto& name : dm.column_names) {
    if (name.rfind("topic_", 0) == 0) topics.push_back(std::stoi(name.substr(6)));
    if (name.rfind("hour_", 0) == 0) hours.push_back(std::stoi(name.substr(5)));
  }
  for (int k : topics) max_topic = std::max(max_topic, k);
  if (!topics.empty()) {
    dm.num_topics = std::max<int>(max_topic + 1, static_cast<int>(topics.size()) + 1);
    for (int k = 0; k < dm.num_topics; ++k) {
      if (std::find(topics.begin(), topics.end(), k) == topics.end()) {
        dm.baseline_topic = k;
        break;
      }
    }
  }
  if (!hours.empty()) {
    for (int h = 0; h < 24; ++h) {
      if (std::find(hours.begin(), hours.end(), h) == hours.end()) {
        dm.baseline_hour = h;
        break;
      }
    }
  }
  return dm;
}

SummaryRow describe(std::string variable, std::span<const double> values) {
  if (values.empty()) throw DataError("cannot summarize an empty series: " + variable);
  SummaryRow row;
  row.variable = std::move(variable);
  row.n = values.size();
  row.min = *std::min_element(values.begin(), values.end());
  row.max = *std::max_element(values.begin(), values.end());
  row.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(row.n);
  double ss = 0.0;
  for (double v : values) ss += (v - row.mean) * (v - row.mean);
  row.sd = row.n > 1 ? std::sqrt(ss / static_cast<double>(row.n - 1)) : 0.0;
  return row;
}

std::vector<SummaryRow> summary_stats(const std::vector<AnalysisRow>& rows) {
  if (rows.empty()) throw DataError("cannot summarize zero rows");
  std::vector<double> likes, dem, rep, followers;
  for (const auto& r : rows) {
    likes.push_back(static_cast<double>(r.tweet.likes));
    dem.push_back(r.dem_debate ? 1.0 : 0.0);
    rep.push_back(r.rep_debate ? 1.0 : 0.0);
    if (r.followers_millions) followers.push_back(*r.followers_millions);
  }
  std::vector<SummaryRow> out;
  out.push_back(describe("Likes", likes));
  out.push_back(describe("Democratic Debates", dem));
  out.push_back(describe("Republican Debates", rep));
  if (!followers.empty()) out.push_back(describe("Followers (million)", followers));
  return out;
}

}  // namespace topicreg
