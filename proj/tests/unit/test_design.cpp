#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "topicreg/countreg.hpp"
#include "topicreg/design.hpp"
#include "topicreg/error.hpp"
#include "topicreg/synth.hpp"

using namespace topicreg;

namespace {

std::vector<AnalysisRow> random_rows(std::size_t n, std::uint64_t seed,
                                     const std::vector<std::string>& ids = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<AnalysisRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    AnalysisRow r;
    r.tweet.id = ids.empty() ? "r" + std::to_string(i) : ids[i];
    r.tweet.likes = static_cast<std::int64_t>(rng() % 50);
    r.followers_millions = 4.5 + u(rng);
    r.local_hour = static_cast<int>(rng() % 24);
    r.is_weekend = u(rng) < 0.3;
    r.dem_debate = u(rng) < 0.1;
    r.rep_debate = u(rng) < 0.1;
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::string> ids_of(const std::vector<AnalysisRow>& rows) {
  std::vector<std::string> ids;
  for (const auto& r : rows) ids.push_back(r.tweet.id);
  return ids;
}

}  // namespace

TEST(BuildDesign, DropsBaselineTopic) {
  auto rows = random_rows(1, 1);
  Eigen::MatrixXd theta(1, 4);
  theta << 0.1, 0.2, 0.3, 0.4;
  const auto ids = ids_of(rows);
  DesignOptions o;
  o.hour_controls = false;
  const DesignMatrix d = build_design(rows, theta, ids, o);
  EXPECT_EQ(d.column_names, (std::vector<std::string>{"const", "dem_debate", "rep_debate",
                                                      "followers_millions", "weekend", "topic_1",
                                                      "topic_2", "topic_3"}));
  EXPECT_DOUBLE_EQ(d.X(0, *d.column("topic_1")), 0.2);
  EXPECT_DOUBLE_EQ(d.X(0, *d.column("topic_2")), 0.3);
  EXPECT_DOUBLE_EQ(d.X(0, *d.column("topic_3")), 0.4);
  EXPECT_EQ(d.baseline_topic, 0);
}

TEST(BuildDesign, FullSpecificationHasThirtyOneColumns) {
  auto rows = random_rows(50, 2);
  const Eigen::MatrixXd theta = Eigen::MatrixXd::Constant(50, 4, 0.25);
  const auto ids = ids_of(rows);
  const DesignMatrix d = build_design(rows, theta, ids, DesignOptions{});
  // intercept + 2 debate flags + followers + weekend + 3 topics + 23 hours
  EXPECT_EQ(d.cols(), 1 + 2 + 1 + 1 + 3 + 23);
  EXPECT_EQ(d.column_names.back(), "hour_23");
  EXPECT_FALSE(d.column("hour_00").has_value());
  EXPECT_TRUE((d.X.col(0).array() == 1.0).all());
}

TEST(BuildDesign, ColumnValuesFollowRows) {
  auto rows = random_rows(30, 3);
  const DesignMatrix d = build_design(rows, DesignOptions{});
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    EXPECT_EQ(d.y(i), static_cast<double>(r.tweet.likes));
    EXPECT_EQ(d.X(i, *d.column("dem_debate")), r.dem_debate ? 1.0 : 0.0);
    EXPECT_EQ(d.X(i, *d.column("followers_millions")), *r.followers_millions);
    EXPECT_EQ(d.X(i, *d.column("weekend")), r.is_weekend ? 1.0 : 0.0);
    double hours = 0.0;
    for (int h = 1; h < 24; ++h) hours += d.X(i, *d.column(hour_column_name(h)));
    EXPECT_EQ(hours, r.local_hour == 0 ? 0.0 : 1.0);
  }
}

TEST(BuildDesign, BaselineTopicReconstruction) {
  SynthSpec s;
  s.num_docs = 100;
  s.num_topics = 4;
  const auto sc = gen_corpus(s);
  auto rows = random_rows(100, 4, sc.corpus.doc_ids);
  for (int b = 0; b < 4; ++b) {
    DesignOptions o;
    o.baseline_topic = b;
    const DesignMatrix d = build_design(rows, sc.theta, sc.corpus.doc_ids, o);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      double included = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (k == b) continue;
        const double v = d.X(i, *d.column(topic_column_name(k)));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        included += v;
      }
      EXPECT_LE(included, 1.0 + 1e-8);
      EXPECT_NEAR(1.0 - included, sc.theta(i, b), 1e-8);
    }
  }
}

TEST(BuildDesign, AllRowsAtBaselineHourGiveZeroColumns) {
  auto rows = random_rows(20, 5);
  for (auto& r : rows) r.local_hour = 0;
  testsupport::CaptureWarnings w;
  const DesignMatrix d = build_design(rows, DesignOptions{});
  const PrunedDesign p = drop_zero_columns(d);
  EXPECT_EQ(p.dropped.size(), 23u);
  EXPECT_EQ(p.design.cols(), d.cols() - 23);
  EXPECT_EQ(w.messages.size(), 1u);
  EXPECT_THROW(check_full_rank(d), NumericalError);
}

TEST(BuildDesign, Errors) {
  auto rows = random_rows(3, 6);
  const auto ids = ids_of(rows);
  EXPECT_THROW(build_design(rows, Eigen::MatrixXd::Ones(3, 1), ids, DesignOptions{}), UsageError);
  DesignOptions o;
  o.baseline_topic = 4;
  EXPECT_THROW(build_design(rows, Eigen::MatrixXd::Ones(3, 4), ids, o), UsageError);
  const std::vector<std::string> wrong{"x", "y", "z"};
  EXPECT_THROW(build_design(rows, Eigen::MatrixXd::Ones(3, 4), wrong, DesignOptions{}), DataError);
  rows[1].followers_millions.reset();
  EXPECT_THROW(build_design(rows, DesignOptions{}), DataError);
  EXPECT_THROW(build_design({}, DesignOptions{}), DataError);
}

TEST(BuildDesign, BaselineInvarianceOfFittedMeans) {
  SynthSpec s;
  s.num_docs = 1500;
  s.num_topics = 4;
  s.seed = 12;
  const auto sc = gen_corpus(s);
  auto rows = random_rows(1500, 7, sc.corpus.doc_ids);
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(1500, 1.5);
  eta += 0.8 * sc.theta.col(1) - 0.5 * sc.theta.col(3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].tweet.likes = gen_counts_at(std::exp(eta(static_cast<Eigen::Index>(i))), 0.4, 1, i)[0];
  }
  DesignOptions o;
  o.hour_controls = false;
  Eigen::VectorXd reference;
  for (int b = 0; b < 4; ++b) {
    o.baseline_topic = b;
    const DesignMatrix d = build_design(rows, sc.theta, sc.corpus.doc_ids, o);
    const NbFit f = fit_nb(d);
    ASSERT_TRUE(f.converged);
    const Eigen::VectorXd mu = fitted_means(d, f.coef);
    if (b == 0) {
      reference = mu;
      continue;
    }
    const double rel = ((mu - reference).array() / reference.array()).abs().maxCoeff();
    EXPECT_LT(rel, 1e-6) << "baseline " << b;
  }
}

TEST(SelectColumns, KeepsRequestedOrder) {
  const DesignMatrix d = build_design(random_rows(5, 8), DesignOptions{});
  const std::vector<std::string> names{"weekend", "const"};
  const DesignMatrix s = select_columns(d, names);
  EXPECT_EQ(s.column_names, names);
  EXPECT_EQ(s.X.col(1), d.X.col(0));
  const std::vector<std::string> bad{"nope"};
  EXPECT_THROW(select_columns(d, bad), UsageError);
}

TEST(DesignCsv, RoundTripIsBitExact) {
  testsupport::TempDir dir;
  SynthSpec s;
  s.num_docs = 40;
  s.num_topics = 3;
  const auto sc = gen_corpus(s);
  auto rows = random_rows(40, 9, sc.corpus.doc_ids);
  DesignOptions o;
  o.baseline_topic = 2;
  const DesignMatrix d = build_design(rows, sc.theta, sc.corpus.doc_ids, o);
  save_design_csv(dir / "x.csv", d);
  const DesignMatrix back = load_design_csv(dir / "x.csv");
  EXPECT_EQ(back.X, d.X);
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.column_names, d.column_names);
  EXPECT_EQ(back.row_ids, d.row_ids);
  EXPECT_EQ(back.baseline_topic, 2);
  EXPECT_EQ(back.baseline_hour, 0);
  testsupport::write_file(dir / "bad.csv", "foo,bar\n");
  EXPECT_THROW(load_design_csv(dir / "bad.csv"), DataError);
}

TEST(Describe, Examples) {
  const std::vector<double> flat{5, 5, 5};
  EXPECT_DOUBLE_EQ(describe("x", flat).sd, 0.0);
  const std::vector<double> likes{741, 30612};
  const SummaryRow r = describe("Likes", likes);
  EXPECT_EQ(r.min, 741);
  EXPECT_EQ(r.max, 30612);
  EXPECT_EQ(r.n, 2u);
  std::vector<double> flag(1000, 0.0);
  for (int i = 0; i < 88; ++i) flag[static_cast<std::size_t>(i) * 11] = 1.0;
  EXPECT_NEAR(describe("Democratic Debates", flag).mean, 0.088, 1e-15);
  EXPECT_THROW(describe("x", std::vector<double>{}), DataError);
}

TEST(SummaryStats, FourVariableLayout) {
  auto rows = random_rows(10, 10);
  rows[3].followers_millions.reset();
  const auto table = summary_stats(rows);
  ASSERT_EQ(table.size(), 4u);
  EXPECT_EQ(table[0].variable, "Likes");
  EXPECT_EQ(table[1].variable, "Democratic Debates");
  EXPECT_EQ(table[2].variable, "Republican Debates");
  EXPECT_EQ(table[3].variable, "Followers (million)");
  EXPECT_EQ(table[0].n, 10u);
  EXPECT_EQ(table[3].n, 9u);
  EXPECT_THROW(summary_stats({}), DataError);
}
