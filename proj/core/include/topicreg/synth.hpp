#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "topicreg/ingest.hpp"
#include "topicreg/textproc.hpp"

namespace topicreg {

/// LDA generative parameters for a synthetic corpus.
struct SynthSpec {
  std::size_t num_docs = 1000;
  std::size_t vocab_size = 500;
  int num_topics = 3;
  double doc_len = 12.0;  // Poisson mean, floored at 1
  double lda_alpha = 0.1;
  double lda_beta = 0.05;
  std::uint64_t seed = 1;
  bool fixed_length = false;  // every doc gets exactly max(1, round(doc_len)) tokens
};

struct SyntheticCorpus {
  Corpus corpus;
  Eigen::MatrixXd theta;  // D x K, true document-topic weights
  Eigen::MatrixXd phi;    // K x V, true topic-word distributions
};

/// Terms are rendered "w0000", "w0001", ...; doc ids "d000000", ...
SyntheticCorpus gen_corpus(const SynthSpec& spec);

/// y_i ~ Poisson(λ_i), λ_i ~ Gamma(shape 1/α, scale α μ_i), μ_i = exp(x_i·β).
/// alpha == 0 draws y_i ~ Poisson(μ_i) directly.
Eigen::VectorXd gen_counts(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta, double alpha,
                           std::uint64_t seed);

/// n draws at a single mean.
std::vector<std::int64_t> gen_counts_at(double mu, double alpha, std::size_t n, std::uint64_t seed);

/// Intercept column followed by `num_covariates` standard-normal columns.
Eigen::MatrixXd gen_gaussian_design(std::size_t n, std::size_t num_covariates, std::uint64_t seed);

/// One symmetric Dirichlet draw, computed in log space so tiny
/// concentrations do not underflow.
std::vector<double> dirichlet_draw(std::mt19937_64& rng, std::size_t dim, double concentration);

/// Campaign-shaped dataset: tweets over a date range with debate days,
/// follower snapshots with a collection gap, and likes driven by covariates
/// and true topic mixtures.
struct CampaignPreset {
  std::size_t num_tweets = 2120;
  std::chrono::sys_days start = std::chrono::sys_days{std::chrono::year{2015} / 9 / 18};
  int num_days = 100;
  std::vector<DebateEntry> debates = default_debates();
  double followers_start = 4.50e6;
  double followers_end = 5.45e6;
  int snapshot_gap_start_day = 40;  // snapshots missing for days [start, start + len)
  int snapshot_gap_days = 4;
  SynthSpec text{2120, 600, 4, 10.0, 0.1, 0.05, 7};
  // Coefficients: const, dem_debate, rep_debate, followers_millions, weekend.
  std::vector<double> covariate_coef{4.878, 0.286, -0.165, 0.629, -0.113};
  // Topic effects relative to topic 0.
  std::vector<double> topic_coef{0.0, 0.0368, 0.545, 0.084};
  double hour_amplitude = 0.1;
  double alpha = 0.26;
  std::uint64_t seed = 2015;

  static std::vector<DebateEntry> default_debates();
};

struct CampaignData {
  std::vector<Tweet> tweets;
  std::vector<FollowerSnapshot> snapshots;
  DebateSchedule schedule;
  Eigen::MatrixXd theta_true;
  Eigen::MatrixXd phi_true;
};

CampaignData gen_campaign(const CampaignPreset& preset);

/// True parameters of a preset, for the run directory.
nlohmann::json describe_preset(const CampaignPreset& preset);

}  // namespace topicreg
