#include "topicreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "topicreg/design.hpp"
#include "topicreg/error.hpp"

namespace topicreg {
namespace {

std::string term_name(std::size_t w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "w%04zu", w);
  return buf;
}

std::size_t draw_categorical(std::mt19937_64& rng, const double* probs, std::size_t n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

std::int64_t draw_count(std::mt19937_64& rng, double mu, double alpha) {
  double lambda = mu;
  if (alpha > 0.0) {
    std::gamma_distribution<double> mix(1.0 / alpha, alpha * mu);
    lambda = mix(rng);
  }
  if (lambda <= 0.0) return 0;
  std::poisson_distribution<std::int64_t> pois(lambda);
  return pois(rng);
}

}  // namespace

std::vector<double> dirichlet_draw(std::mt19937_64& rng, std::size_t dim, double concentration) {
  // log G for G ~ Gamma(a, 1) as log Gamma(a + 1, 1) + log(U) / a.
  std::gamma_distribution<double> boosted(concentration + 1.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> logs(dim);
  for (auto& l : logs) {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    l = std::log(boosted(rng)) + std::log(u) / concentration;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (auto& l : logs) {
    l = std::exp(l - top);
    total += l;
  }
  for (auto& l : logs) l /= total;
  return logs;
}

SyntheticCorpus gen_corpus(const SynthSpec& spec) {
  if (spec.num_docs == 0 || spec.vocab_size == 0 || spec.num_topics < 1 || spec.doc_len <= 0.0 ||
      spec.lda_alpha <= 0.0 || spec.lda_beta <= 0.0) {
    throw UsageError("synthetic corpus parameters must be positive");
  }
  std::mt19937_64 rng(spec.seed);
  const auto K = static_cast<std::size_t>(spec.num_topics);
  const std::size_t V = spec.vocab_size;
  const std::size_t D = spec.num_docs;

  SyntheticCorpus out;
  out.phi.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(V));
  std::vector<std::vector<double>> phi_rows;
  for (std::size_t k = 0; k < K; ++k) {
    phi_rows.push_back(dirichlet_draw(rng, V, spec.lda_beta));
    for (std::size_t w = 0; w < V; ++w) {
      out.phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) = phi_rows[k][w];
    }
  }

  std::vector<std::string> terms;
  for (std::size_t w = 0; w < V; ++w) terms.push_back(term_name(w));
  out.corpus.vocab = Vocabulary(std::move(terms));

  out.theta.resize(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(K));
  std::poisson_distribution<int> length(spec.doc_len);
  for (std::size_t d = 0; d < D; ++d) {
    const auto theta = dirichlet_draw(rng, K, spec.lda_alpha);
    for (std::size_t k = 0; k < K; ++k) {
      out.theta(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) = theta[k];
    }
    const int len = std::max(1, spec.fixed_length ? static_cast<int>(std::lround(spec.doc_len))
                                                  : length(rng));
    std::vector<std::uint32_t> doc;
    doc.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
      const std::size_t k = draw_categorical(rng, theta.data(), K);
      doc.push_back(static_cast<std::uint32_t>(draw_categorical(rng, phi_rows[k].data(), V)));
    }
    out.corpus.docs.push_back(std::move(doc));
    char id[32];
    std::snprintf(id, sizeof id, "d%06zu", d);
    out.corpus.doc_ids.emplace_back(id);
  }
  return out;
}

Eigen::VectorXd gen_counts(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta, double alpha,
                           std::uint64_t seed) {
  if (X.cols() != beta.size()) throw UsageError("coefficient length does not match design");
  if (alpha < 0.0) throw UsageError("dispersion must be >= 0");
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (!(eta(i) <= 700.0)) throw NumericalError("linear predictor out of range");
    y(i) = static_cast<double>(draw_count(rng, std::exp(eta(i)), alpha));
  }
  return y;
}

std::vector<std::int64_t> gen_counts_at(double mu, double alpha, std::size_t n,
                                        std::uint64_t seed) {
  if (!(mu > 0.0) || alpha < 0.0) throw UsageError("need mu > 0 and alpha >= 0");
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = draw_count(rng, mu, alpha);
  return out;
}

Eigen::MatrixXd gen_gaussian_design(std::size_t n, std::size_t num_covariates,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(num_covariates + 1));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < X.cols(); ++j) X(i, j) = normal(rng);
  }
  return X;
}

std::vector<DebateEntry> CampaignPreset::default_debates() {
  using namespace std::chrono;
  return {{sys_days{year{2015} / 10 / 13}, Party::Democratic},
          {sys_days{year{2015} / 10 / 28}, Party::Republican},
          {sys_days{year{2015} / 11 / 10}, Party::Republican},
          {sys_days{year{2015} / 11 / 14}, Party::Democratic},
          {sys_days{year{2015} / 12 / 15}, Party::Republican},
          {sys_days{year{2015} / 12 / 19}, Party::Democratic}};
}

CampaignData gen_campaign(const CampaignPreset& preset) {
  using namespace std::chrono;
  if (preset.num_days < 1 || preset.num_tweets == 0) throw UsageError("empty campaign preset");
  if (preset.covariate_coef.size() != 5) throw UsageError("campaign needs 5 covariate coefficients");
  if (preset.topic_coef.size() != static_cast<std::size_t>(preset.text.num_topics)) {
    throw UsageError("campaign needs one topic coefficient per topic");
  }

  SynthSpec text = preset.text;
  text.num_docs = preset.num_tweets;
  const SyntheticCorpus corpus = gen_corpus(text);

  CampaignData data;
  data.schedule = DebateSchedule(preset.debates);
  data.theta_true = corpus.theta;
  data.phi_true = corpus.phi;

  std::mt19937_64 rng(preset.seed);
  const auto start = time_point_cast<seconds>(preset.start);
  const std::int64_t span = std::int64_t{preset.num_days} * 86400;
  std::uniform_int_distribution<std::int64_t> offset(0, span - 1);
  std::vector<std::int64_t> offsets(preset.num_tweets);
  for (auto& o : offsets) o = offset(rng);
  std::sort(offsets.begin(), offsets.end());

  // Daily snapshots at midnight UTC with a collection gap.
  std::normal_distribution<double> jitter(0.0, 2000.0);
  for (int day = 0; day <= preset.num_days; ++day) {
    if (day >= preset.snapshot_gap_start_day &&
        day < preset.snapshot_gap_start_day + preset.snapshot_gap_days) {
      continue;
    }
    const double frac = static_cast<double>(day) / preset.num_days;
    const double count =
        preset.followers_start + frac * (preset.followers_end - preset.followers_start) + jitter(rng);
    data.snapshots.push_back(
        {start + days{day}, static_cast<std::int64_t>(std::llround(std::max(0.0, count)))});
  }
  auto followers_at = [&](Timestamp ts) {
    const double frac = static_cast<double>((ts - start).count()) / static_cast<double>(span);
    return (preset.followers_start + frac * (preset.followers_end - preset.followers_start)) / 1e6;
  };

  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < preset.num_tweets; ++i) {
    Tweet t;
    char id[32];
    std::snprintf(id, sizeof id, "t%06zu", i);
    t.id = id;
    t.created_at = start + seconds{offsets[i]};
    std::string text_out;
    for (auto w : corpus.corpus.docs[i]) {
      if (!text_out.empty()) text_out.push_back(' ');
      text_out += corpus.corpus.vocab.term(w);
    }
    t.text = std::move(text_out);

    const CovariateFlags f = flag_covariates(t, data.schedule, UtcOffset{});
    const auto& c = preset.covariate_coef;
    double eta = c[0] + c[1] * f.dem_debate + c[2] * f.rep_debate +
                 c[3] * followers_at(t.created_at) + c[4] * f.is_weekend;
    for (int k = 0; k < preset.text.num_topics; ++k) {
      eta += preset.topic_coef[static_cast<std::size_t>(k)] *
             corpus.theta(static_cast<Eigen::Index>(i), k);
    }
    eta += preset.hour_amplitude * std::sin(2.0 * pi * f.local_hour / 24.0);
    t.likes = draw_count(rng, std::exp(eta), preset.alpha);
    data.tweets.push_back(std::move(t));
  }
  return data;
}

nlohmann::json describe_preset(const CampaignPreset& preset) {
  nlohmann::json debates = nlohmann::json::array();
  for (const auto& d : preset.debates) {
    debates.push_back({{"date", format_date(d.date)}, {"party", std::string(to_string(d.party))}});
  }
  return {{"num_tweets", preset.num_tweets},
          {"start", format_date(preset.start)},
          {"num_days", preset.num_days},
          {"debates", debates},
          {"followers_start", preset.followers_start},
          {"followers_end", preset.followers_end},
          {"snapshot_gap_start_day", preset.snapshot_gap_start_day},
          {"snapshot_gap_days", preset.snapshot_gap_days},
          {"text",
           {{"vocab_size", preset.text.vocab_size},
            {"num_topics", preset.text.num_topics},
            {"doc_len", preset.text.doc_len},
            {"fixed_length", preset.text.fixed_length},
            {"lda_alpha", preset.text.lda_alpha},
            {"lda_beta", preset.text.lda_beta},
            {"seed", preset.text.seed}}},
          {"covariate_coef", preset.covariate_coef},
          {"topic_coef", preset.topic_coef},
          {"hour_amplitude", preset.hour_amplitude},
          {"alpha", preset.alpha},
          {"seed", preset.seed}};
}

}  // namespace topicreg
