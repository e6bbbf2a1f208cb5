#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "topicreg/textproc.hpp"

namespace topicreg {

struct LdaConfig {
  int num_topics = 4;
  /// Symmetric doc-topic prior; unset means 50 / num_topics.
  std::optional<double> alpha;
  double beta = 0.01;
  int iters = 1000;
  int burnin = 500;
  int thin = 10;
  std::uint64_t seed = 20151218;

  double resolved_alpha() const { return alpha ? *alpha : 50.0 / num_topics; }
  /// Throws UsageError on K < 2, non-positive priors, burnin >= iters or thin < 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const LdaConfig& cfg);
void from_json(const nlohmann::json& j, LdaConfig& cfg);

inline constexpr const char* kRngName = "mt19937_64";

class GibbsState;
struct TopicModel;

/// Called after every sweep (1-based sweep index).
using SweepObserver = std::function<void(int sweep, const GibbsState& state)>;

/// Collapsed Gibbs bookkeeping: assignments plus the three count tables.
class GibbsState {
 public:
  GibbsState(const Corpus& corpus, int num_topics);

  int num_topics() const { return k_; }
  std::size_t vocab_size() const { return v_; }
  std::size_t num_docs() const { return z_.size(); }

  int n_dk(std::size_t d, int k) const { return n_dk_[d * k_ + k]; }
  int n_kw(int k, std::size_t w) const { return n_kw_[static_cast<std::size_t>(k) * v_ + w]; }
  int n_k(int k) const { return n_k_[k]; }
  const std::vector<std::vector<std::uint16_t>>& assignments() const { return z_; }

  void assign(std::size_t d, std::size_t i, std::uint32_t w, int k);
  void unassign(std::size_t d, std::size_t i, std::uint32_t w);

  /// Σ_k n_dk = doc length, Σ_w n_kw = n_k, counts nonnegative, and the
  /// tables equal a rebuild from z. Returns a description of the first
  /// violation, or nullopt.
  std::optional<std::string> check_invariants(const Corpus& corpus) const;

 private:
  friend TopicModel fit_lda(const Corpus&, const LdaConfig&, const SweepObserver&);
  int k_;
  std::size_t v_;
  std::vector<std::vector<std::uint16_t>> z_;
  std::vector<int> n_dk_;
  std::vector<int> n_kw_;
  std::vector<int> n_k_;
};

/// Unnormalized full conditional of one token's topic, with the token
/// already removed from the counts:
///   (n_dk + alpha) (n_kw + beta) / (n_k + V beta).
std::vector<double> gibbs_conditional(const GibbsState& state, std::size_t d, std::uint32_t w,
                                      double alpha, double beta);

struct TopicModel {
  int num_topics = 0;
  Eigen::MatrixXd phi;    // K x V
  Eigen::MatrixXd theta;  // D x K
  LdaConfig config;
  std::vector<double> loglik_trace;
  Vocabulary vocab;
  std::vector<std::string> doc_ids;
};

TopicModel fit_lda(const Corpus& corpus, const LdaConfig& config,
                   const SweepObserver& observer = {});

/// Collapsed log p(w, z) for the current state.
double collapsed_loglik(const GibbsState& state, double alpha, double beta);

/// Top `n` terms of topic `k` by phi, ties by term.
std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int k,
                                                      std::size_t n = 20);

void save_topic_model(const std::filesystem::path& path, const TopicModel& model);
/// Restores a model; `vocab` must match the fingerprint recorded at save time.
TopicModel load_topic_model(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace topicreg
