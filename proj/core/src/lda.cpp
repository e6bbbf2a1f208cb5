#include "topicreg/lda.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "topicreg/error.hpp"

namespace topicreg {
namespace {

class LogGammaTable {
 public:
  LogGammaTable(double offset, std::size_t max_n) : values_(max_n + 1) {
    for (std::size_t n = 0; n <= max_n; ++n) values_[n] = std::lgamma(static_cast<double>(n) + offset);
  }
  double operator()(int n) const { return values_[static_cast<std::size_t>(n)]; }

 private:
  std::vector<double> values_;
};

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw DataError("matrix data length does not match its shape");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

}  // namespace

void LdaConfig::validate() const {
  if (num_topics < 2) throw UsageError("number of topics must be >= 2");
  if (num_topics > 65535) throw UsageError("number of topics too large");
  if (resolved_alpha() <= 0.0 || beta <= 0.0) throw UsageError("LDA priors must be positive");
  if (iters < 1 || burnin < 0 || burnin >= iters) throw UsageError("need 0 <= burnin < iters");
  if (thin < 1) throw UsageError("thin must be >= 1");
}

void to_json(nlohmann::json& j, const LdaConfig& cfg) {
  j = nlohmann::json{{"num_topics", cfg.num_topics}, {"alpha", cfg.resolved_alpha()},
                     {"beta", cfg.beta},             {"iters", cfg.iters},
                     {"burnin", cfg.burnin},         {"thin", cfg.thin},
                     {"seed", cfg.seed},             {"rng", kRngName}};
}

void from_json(const nlohmann::json& j, LdaConfig& cfg) {
  if (j.contains("num_topics")) cfg.num_topics = j.at("num_topics").get<int>();
  if (j.contains("alpha") && !j.at("alpha").is_null()) cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("iters")) cfg.iters = j.at("iters").get<int>();
  if (j.contains("burnin")) cfg.burnin = j.at("burnin").get<int>();
  if (j.contains("thin")) cfg.thin = j.at("thin").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
}

GibbsState::GibbsState(const Corpus& corpus, int num_topics)
    : k_(num_topics),
      v_(corpus.vocab.size()),
      n_dk_(corpus.num_docs() * static_cast<std::size_t>(num_topics), 0),
      n_kw_(static_cast<std::size_t>(num_topics) * corpus.vocab.size(), 0),
      n_k_(static_cast<std::size_t>(num_topics), 0) {
  z_.reserve(corpus.num_docs());
  for (const auto& doc : corpus.docs) z_.emplace_back(doc.size(), 0);
}

void GibbsState::assign(std::size_t d, std::size_t i, std::uint32_t w, int k) {
  z_[d][i] = static_cast<std::uint16_t>(k);
  ++n_dk_[d * k_ + k];
  ++n_kw_[static_cast<std::size_t>(k) * v_ + w];
  ++n_k_[k];
}

void GibbsState::unassign(std::size_t d, std::size_t i, std::uint32_t w) {
  const int k = z_[d][i];
  --n_dk_[d * k_ + k];
  --n_kw_[static_cast<std::size_t>(k) * v_ + w];
  --n_k_[k];
}

std::optional<std::string> GibbsState::check_invariants(const Corpus& corpus) const {
  std::vector<int> dk(n_dk_.size(), 0), kw(n_kw_.size(), 0), kk(n_k_.size(), 0);
  for (std::size_t d = 0; d < z_.size(); ++d) {
    for (std::size_t i = 0; i < z_[d].size(); ++i) {
      const int k = z_[d][i];
      if (k >= k_) return "assignment out of range in doc " + std::to_string(d);
      ++dk[d * k_ + k];
      ++kw[static_cast<std::size_t>(k) * v_ + corpus.docs[d][i]];
      ++kk[k];
    }
  }
  if (dk != n_dk_) return std::string("doc-topic counts differ from rebuild");
  if (kw != n_kw_) return std::string("topic-word counts differ from rebuild");
  if (kk != n_k_) return std::string("topic totals differ from rebuild");
  for (std::size_t d = 0; d < z_.size(); ++d) {
    long row = 0;
    for (int k = 0; k < k_; ++k) {
      if (n_dk(d, k) < 0) return "negative doc-topic count in doc " + std::to_string(d);
      row += n_dk(d, k);
    }
    if (row != static_cast<long>(corpus.docs[d].size())) {
      return "doc-topic row sum != length for doc " + std::to_string(d);
    }
  }
  for (int k = 0; k < k_; ++k) {
    long row = 0;
    for (std::size_t w = 0; w < v_; ++w) row += n_kw(k, w);
    if (row != n_k(k)) return "topic-word row sum != n_k for topic " + std::to_string(k);
  }
  return std::nullopt;
}

std::vector<double> gibbs_conditional(const GibbsState& state, std::size_t d, std::uint32_t w,
                                      double alpha, double beta) {
  const double vbeta = static_cast<double>(state.vocab_size()) * beta;
  std::vector<double> weights(static_cast<std::size_t>(state.num_topics()));
  for (int k = 0; k < state.num_topics(); ++k) {
    weights[static_cast<std::size_t>(k)] = (state.n_dk(d, k) + alpha) * (state.n_kw(k, w) + beta) /
                                           (state.n_k(k) + vbeta);
  }
  return weights;
}

double collapsed_loglik(const GibbsState& state, double alpha, double beta) {
  const int K = state.num_topics();
  const auto V = static_cast<double>(state.vocab_size());
  double ll = 0.0;
  for (int k = 0; k < K; ++k) {
    double row = std::lgamma(V * beta) - V * std::lgamma(beta);
    for (std::size_t w = 0; w < state.vocab_size(); ++w) row += std::lgamma(state.n_kw(k, w) + beta);
    row -= std::lgamma(state.n_k(k) + V * beta);
    ll += row;
  }
  for (std::size_t d = 0; d < state.num_docs(); ++d) {
    double row = std::lgamma(K * alpha) - K * std::lgamma(alpha);
    int len = 0;
    for (int k = 0; k < K; ++k) {
      row += std::lgamma(state.n_dk(d, k) + alpha);
      len += state.n_dk(d, k);
    }
    row -= std::lgamma(len + K * alpha);
    ll += row;
  }
  return ll;
}

TopicModel fit_lda(const Corpus& corpus, const LdaConfig& config, const SweepObserver& observer) {
  config.validate();
  corpus.validate();
  if (corpus.num_docs() == 0) throw DataError("cannot fit LDA on an empty corpus");
  const std::size_t total_tokens = corpus.num_tokens();
  if (static_cast<std::size_t>(config.num_topics) > total_tokens) {
    throw DataError("number of topics (" + std::to_string(config.num_topics) +
                    ") exceeds total token count (" + std::to_string(total_tokens) + ")");
  }

  const int K = config.num_topics;
  const std::size_t V = corpus.vocab.size();
  const std::size_t D = corpus.num_docs();
  const double alpha = config.resolved_alpha();
  const double beta = config.beta;
  const double vbeta = static_cast<double>(V) * beta;
  const double kalpha = K * alpha;

  std::mt19937_64 rng(config.seed);
  GibbsState state(corpus, K);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
      const int k = std::min(K - 1, static_cast<int>(uniform01(rng) * K));
      state.assign(d, i, corpus.docs[d][i], k);
    }
  }

  std::size_t max_len = 0;
  for (const auto& doc : corpus.docs) max_len = std::max(max_len, doc.size());
  const LogGammaTable lg_alpha(alpha, max_len);
  const LogGammaTable lg_beta(beta, total_tokens);
  const double topic_const = std::lgamma(vbeta) - static_cast<double>(V) * std::lgamma(beta);
  const double doc_const = std::lgamma(kalpha) - K * std::lgamma(alpha);

  auto loglik = [&] {
    double ll = 0.0;
    for (int k = 0; k < K; ++k) {
      ll += topic_const - std::lgamma(state.n_k(k) + vbeta);
      const int* row = &state.n_kw_[static_cast<std::size_t>(k) * V];
      for (std::size_t w = 0; w < V; ++w) ll += lg_beta(row[w]);
    }
    for (std::size_t d = 0; d < D; ++d) {
      ll += doc_const - std::lgamma(static_cast<double>(corpus.docs[d].size()) + kalpha);
      const int* row = &state.n_dk_[d * K];
      for (int k = 0; k < K; ++k) ll += lg_alpha(row[k]);
    }
    return ll;
  };

  TopicModel model;
  model.num_topics = K;
  model.config = config;
  model.config.alpha = alpha;
  model.vocab = corpus.vocab;
  model.doc_ids = corpus.doc_ids;
  model.loglik_trace.reserve(static_cast<std::size_t>(config.iters));
  model.theta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(D), K);
  model.phi = Eigen::MatrixXd::Zero(K, static_cast<Eigen::Index>(V));

  int retained = 0;
  auto accumulate = [&] {
    for (std::size_t d = 0; d < D; ++d) {
      const double denom = static_cast<double>(corpus.docs[d].size()) + kalpha;
      for (int k = 0; k < K; ++k) {
        model.theta(static_cast<Eigen::Index>(d), k) += (state.n_dk(d, k) + alpha) / denom;
      }
    }
    for (int k = 0; k < K; ++k) {
      const double denom = state.n_k(k) + vbeta;
      for (std::size_t w = 0; w < V; ++w) {
        model.phi(k, static_cast<Eigen::Index>(w)) += (state.n_kw(k, w) + beta) / denom;
      }
    }
    ++retained;
  };

  std::vector<double> weights(static_cast<std::size_t>(K));
  for (int sweep = 1; sweep <= config.iters; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& doc = corpus.docs[d];
      int* doc_counts = &state.n_dk_[d * K];
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::uint32_t w = doc[i];
        state.unassign(d, i, w);
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          total += (doc_counts[k] + alpha) *
                   (state.n_kw_[static_cast<std::size_t>(k) * V + w] + beta) /
                   (state.n_k_[k] + vbeta);
          weights[static_cast<std::size_t>(k)] = total;
        }
        const double u = uniform01(rng) * total;
        int k_new = 0;
        while (k_new < K - 1 && weights[static_cast<std::size_t>(k_new)] <= u) ++k_new;
        state.assign(d, i, w, k_new);
      }
    }
#ifndef NDEBUG
    if (auto violation = state.check_invariants(corpus)) {
      throw NumericalError("Gibbs invariant violated after sweep " + std::to_string(sweep) + ": " +
                           *violation);
    }
#endif
    model.loglik_trace.push_back(loglik());
    if (sweep > config.burnin && (sweep - config.burnin) % config.thin == 0) accumulate();
    if (observer) observer(sweep, state);
  }
  if (retained == 0) accumulate();

  model.theta /= retained;
  model.phi /= retained;
  return model;
}

std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int k,
                                                      std::size_t n) {
  if (k < 0 || k >= model.num_topics) throw UsageError("topic index out of range");
  const auto V = static_cast<std::size_t>(model.phi.cols());
  n = std::min(n, V);
  std::vector<std::size_t> order(V);
  for (std::size_t w = 0; w < V; ++w) order[w] = w;
  auto better = [&](std::size_t a, std::size_t b) {
    const double pa = model.phi(k, static_cast<Eigen::Index>(a));
    const double pb = model.phi(k, static_cast<Eigen::Index>(b));
    if (pa != pb) return pa > pb;
    return model.vocab.term(a) < model.vocab.term(b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    better);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(model.vocab.term(order[i]), model.phi(k, static_cast<Eigen::Index>(order[i])));
  }
  return out;
}

void save_topic_model(const std::filesystem::path& path, const TopicModel& model) {
  nlohmann::json j;
  j["config"] = model.config;
  j["num_topics"] = model.num_topics;
  j["vocab_size"] = model.vocab.size();
  j["vocab_fingerprint"] = hex64(model.vocab.fingerprint());
  j["doc_ids"] = model.doc_ids;
  j["phi"] = matrix_to_json(model.phi);
  j["theta"] = matrix_to_json(model.theta);
  j["loglik_trace"] = model.loglik_trace;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump() << '\n';
}

TopicModel load_topic_model(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file " + path.string() + ": " + e.what());
  }
  if (j.at("vocab_fingerprint").get<std::string>() != hex64(vocab.fingerprint())) {
    throw DataError("topic model was trained on a different vocabulary");
  }
  TopicModel m;
  m.config = j.at("config").get<LdaConfig>();
  m.num_topics = j.at("num_topics").get<int>();
  m.vocab = vocab;
  m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  m.phi = matrix_from_json(j.at("phi"));
  m.theta = matrix_from_json(j.at("theta"));
  m.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
  if (m.phi.rows() != m.num_topics || static_cast<std::size_t>(m.phi.cols()) != vocab.size() ||
      m.theta.cols() != m.num_topics ||
      static_cast<std::size_t>(m.theta.rows()) != m.doc_ids.size()) {
    throw DataError("topic model dimensions are inconsistent");
  }
  return m;
}

}  // namespace topicreg
