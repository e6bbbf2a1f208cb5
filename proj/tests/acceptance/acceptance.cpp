// One PASS/FAIL line per acceptance criterion. Optional arguments select
// criteria by number, e.g. `acceptance 1 4 7`.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "support.hpp"
#include "topicreg/countreg.hpp"
#include "topicreg/design.hpp"
#include "topicreg/lda.hpp"
#include "topicreg/log.hpp"
#include "topicreg/modelsel.hpp"
#include "topicreg/synth.hpp"

using namespace topicreg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DesignMatrix gaussian_design(std::size_t n, std::size_t ncov, std::uint64_t seed) {
  DesignMatrix d;
  d.X = gen_gaussian_design(n, ncov, seed);
  d.column_names.push_back(kInterceptName);
  for (std::size_t j = 1; j <= ncov; ++j) d.column_names.push_back("x" + std::to_string(j));
  d.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) d.row_ids.push_back(std::to_string(i));
  return d;
}

// --- 1 ----------------------------------------------------------------------

Outcome likelihood_correctness() {
  const auto t0 = Clock::now();
  Outcome o;
  struct Worked {
    double y, mu, alpha, prob;
  };
  double worst = 0.0;
  for (const Worked w : {Worked{0, 1, 1, 0.5}, Worked{1, 1, 1, 0.25}, Worked{2, 3, 0.5, 0.1728}}) {
    worst = std::max(worst, std::abs(nb_log_pmf(w.y, w.mu, w.alpha) - std::log(w.prob)));
  }
  if (worst > 1e-12) o.pass = false;

  double min_sum = 2.0, max_sum = 0.0;
  for (double mu : {0.5, 1.0, 5.0, 50.0, 3411.0}) {
    for (double alpha : {0.01, 0.3, 1.0}) {
      const double cap = std::ceil(10.0 * mu * (1.0 + alpha * mu)) + 100.0;
      long double sum = 0.0L;
      for (double y = 0; y <= cap; ++y) {
        const double term = std::exp(nb_log_pmf(y, mu, alpha));
        sum += term;
        // Past the mean the terms fall geometrically; the rest cannot move the sum.
        if (y > mu && term < 1e-17) break;
      }
      min_sum = std::min(min_sum, static_cast<double>(sum));
      max_sum = std::max(max_sum, static_cast<double>(sum));
    }
  }
  if (min_sum < 0.9999 || max_sum > 1.0 + 1e-9) o.pass = false;
  const double t = seconds_since(t0);
  if (t >= 5.0) o.pass = false;
  o.detail = fmt("worst log error %.2e (tol 1e-12); pmf sums in [%.10f, %.10f] (need >= 0.9999); %.2fs (< 5s)",
                 worst, min_sum, max_sum, t);
  return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome poisson_nesting() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DesignMatrix d = gaussian_design(1000, 3, 500 + seed);
    Eigen::VectorXd beta(4);
    beta << 1.0, 0.4, -0.3, 0.2;
    d.y = gen_counts(d.X, beta, 0.0, 900 + seed);
    const PoissonFit p = fit_poisson(d);
    const double nb = nb_loglik(d, p.coef, kLnAlphaMin);
    const double pois = poisson_loglik(d, p.coef);
    worst = std::max(worst, std::abs(nb - pois) / std::abs(pois));
  }
  o.pass = worst < 1e-6;
  o.detail = fmt("max relative gap %.2e over 5 designs (tol 1e-6)", worst);
  return o;
}

// --- 3 ----------------------------------------------------------------------

Outcome gradient_fidelity() {
  Outcome o;
  std::mt19937_64 rng(33);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    DesignMatrix d = gaussian_design(400, 3, 70 + static_cast<std::uint64_t>(point));
    Eigen::VectorXd beta(4);
    beta << 1.0 + 0.5 * z(rng), 0.3 * z(rng), 0.3 * z(rng), 0.3 * z(rng);
    d.y = gen_counts(d.X, beta, 0.5, 170 + static_cast<std::uint64_t>(point));
    // Evaluate away from the optimum so the score is not near zero.
    Eigen::VectorXd coef = beta;
    for (Eigen::Index j = 0; j < coef.size(); ++j) coef(j) += 0.2 * z(rng);
    const double ln_alpha = std::log(0.5) + 0.5 * z(rng);

    const Eigen::VectorXd g = nb_score(d, coef, ln_alpha);
    Eigen::VectorXd fd(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      const bool is_alpha = j == coef.size();
      const double x = is_alpha ? ln_alpha : coef(j);
      const double h = 1e-5 * std::max(1.0, std::abs(x));
      auto ll = [&](double v) {
        Eigen::VectorXd c = coef;
        double la = ln_alpha;
        (is_alpha ? la : c(j)) = v;
        return nb_loglik(d, c, la);
      };
      fd(j) = (ll(x + h) - ll(x - h)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(1.0, fd.norm()));
  }
  o.pass = worst < 1e-5;
  o.detail = fmt("max relative error %.2e over 10 points (tol 1e-5)", worst);
  return o;
}

// --- 4 and 5 ------------------------------------------------------------------

DesignMatrix recovery_design(std::uint64_t seed, double alpha) {
  DesignMatrix d = gaussian_design(5000, 2, 1000 + seed);
  Eigen::VectorXd beta(3);
  beta << 1.0, 0.5, -0.3;
  d.y = gen_counts(d.X, beta, alpha, 2000 + seed);
  return d;
}

Outcome recovery() {
  Outcome o;
  const double beta[] = {1.0, 0.5, -0.3};
  int good = 0;
  double slowest = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DesignMatrix d = recovery_design(seed, 0.3);
    const auto t0 = Clock::now();
    const NbFit f = fit_nb(d);
    const double t = seconds_since(t0);
    slowest = std::max(slowest, t);
    bool ok = f.converged && f.iterations < 200 && f.cov_reliable && t < 10.0;
    double worst_z = 0.0;
    for (Eigen::Index j = 0; j < 3 && f.cov_reliable; ++j) {
      worst_z = std::max(worst_z, std::abs(f.coef(j) - beta[j]) / std::sqrt(f.cov(j, j)));
    }
    ok = ok && worst_z < 3.0 && f.alpha() >= 0.2 && f.alpha() <= 0.4;
    good += ok;
    per_seed += fmt(" [%d it, max|err|/SE %.2f, alpha %.3f%s]", f.iterations, worst_z, f.alpha(), ok ? "" : " x");
  }
  o.pass = good >= 4;
  o.detail = fmt("%d/5 seeds recovered (need >= 4); slowest fit %.2fs (< 10s);", good, slowest) + per_seed;
  return o;
}

Outcome overdispersion_power() {
  Outcome o;
  double worst_p = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DesignMatrix d = recovery_design(seed, 0.3);
    worst_p = std::max(worst_p, lr_test_overdispersion(fit_nb(d), fit_poisson(d)).p_value);
  }
  int rejections = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DesignMatrix d = gaussian_design(1000, 2, 3000 + seed);
    Eigen::VectorXd beta(3);
    beta << 1.0, 0.5, -0.3;
    d.y = gen_counts(d.X, beta, 0.0, 4000 + seed);
    rejections += lr_test_overdispersion(fit_nb(d), fit_poisson(d)).p_value < 0.05;
  }
  o.pass = worst_p < 0.001 && rejections <= 2;
  o.detail = fmt("largest LR p on overdispersed data %.2e (< 0.001); %d/20 rejections at 0.05 on Poisson data "
                 "(<= 10%%)",
                 worst_p, rejections);
  return o;
}

// --- 6 ----------------------------------------------------------------------

Corpus two_block_corpus() {
  std::mt19937_64 rng(6);
  Corpus c;
  c.vocab = Vocabulary({"a", "b", "c", "d"});
  for (std::size_t d = 0; d < 200; ++d) {
    const std::uint32_t base = d % 2 == 0 ? 0 : 2;
    std::vector<std::uint32_t> doc;
    for (int i = 0; i < 15; ++i) doc.push_back(base + static_cast<std::uint32_t>(rng() % 2));
    c.docs.push_back(doc);
    c.doc_ids.push_back("d" + std::to_string(d));
  }
  return c;
}

Outcome lda_sanity() {
  const auto t0 = Clock::now();
  Outcome o;
  const Corpus c = two_block_corpus();
  LdaConfig cfg;
  cfg.num_topics = 2;
  cfg.alpha = 0.1;
  int sweeps = 0, violations = 0;
  const TopicModel m = fit_lda(c, cfg, [&](int, const GibbsState& s) {
    ++sweeps;
    violations += s.check_invariants(c).has_value();
  });
  Eigen::Index even_topic = 0;
  m.theta.row(0).maxCoeff(&even_topic);
  double min_mass = 1.0;
  for (Eigen::Index d = 0; d < m.theta.rows(); ++d) {
    min_mass = std::min(min_mass, m.theta(d, d % 2 == 0 ? even_topic : 1 - even_topic));
  }
  const TopicModel again = fit_lda(c, cfg);
  const bool identical = again.theta == m.theta && again.phi == m.phi && again.loglik_trace == m.loglik_trace;
  const double t = seconds_since(t0);
  o.pass = min_mass >= 0.9 && violations == 0 && sweeps == cfg.iters && identical && t < 30.0;
  o.detail = fmt("min block-aligned theta %.4f (>= 0.9); invariant violations %d over %d sweeps; rerun %s; %.2fs (< 30s)",
                 min_mass, violations, sweeps, identical ? "bit-identical" : "DIFFERS", t);
  return o;
}

// --- 7 ----------------------------------------------------------------------

// Three true topics; counts depend on two of the topic weights.
Outcome sweep_shape() {
  Outcome o;
  std::map<int, int> votes;
  double slowest = 0.0;
  std::string chosen;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthSpec spec;
    spec.num_docs = 3000;
    spec.num_topics = 3;
    spec.doc_len = 20.0;
    spec.lda_alpha = 0.1;
    spec.lda_beta = 0.05;
    spec.seed = seed;
    const SyntheticCorpus sc = gen_corpus(spec);

    std::mt19937_64 rng(seed * 77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<AnalysisRow> rows;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(spec.num_docs), 3);
    for (std::size_t d = 0; d < spec.num_docs; ++d) {
      AnalysisRow r;
      r.tweet.id = sc.corpus.doc_ids[d];
      r.followers_millions = 1.0 + u(rng);
      r.local_hour = static_cast<int>(u(rng) * 24);
      r.is_weekend = u(rng) < 0.3;
      rows.push_back(r);
      const auto i = static_cast<Eigen::Index>(d);
      X.row(i) << 1.0, sc.theta(i, 1), sc.theta(i, 2);
    }
    Eigen::VectorXd beta(3);
    beta << 4.0, 1.5, -1.0;
    const Eigen::VectorXd y = gen_counts(X, beta, 0.01, seed + 100);
    for (std::size_t d = 0; d < spec.num_docs; ++d) {
      rows[d].tweet.likes = static_cast<std::int64_t>(y(static_cast<Eigen::Index>(d)));
    }

    SweepOptions opts;
    opts.design.hour_controls = false;
    opts.lda.alpha = 0.1;
    opts.lda.iters = 2000;
    opts.lda.burnin = 1000;
    opts.lda.seed = seed;
    const auto t0 = Clock::now();
    const SweepResult res = sweep_topics(sc.corpus, rows, opts);
    const double t = seconds_since(t0);
    slowest = std::max(slowest, t);
    ++votes[res.chosen_k];
    chosen += (chosen.empty() ? "" : ",") + std::to_string(res.chosen_k);
    if (res.entries.size() != 8) o.pass = false;
  }
  int modal = votes.begin()->first;
  for (const auto& [k, n] : votes) {
    if (n > votes[modal]) modal = k;
  }
  o.pass = o.pass && modal == 3 && slowest < 120.0;
  o.detail = fmt("chosen K per seed {%s}, modal %d (want 3); slowest sweep %.1fs (< 120s)", chosen.c_str(), modal,
                 slowest);
  return o;
}

// --- 8 ----------------------------------------------------------------------

Outcome baseline_invariance() {
  Outcome o;
  SynthSpec s;
  s.num_docs = 1500;
  s.num_topics = 4;
  s.seed = 12;
  const SyntheticCorpus sc = gen_corpus(s);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<AnalysisRow> rows;
  for (std::size_t i = 0; i < s.num_docs; ++i) {
    AnalysisRow r;
    r.tweet.id = sc.corpus.doc_ids[i];
    r.followers_millions = 4.5 + u(rng);
    r.local_hour = static_cast<int>(rng() % 24);
    r.is_weekend = u(rng) < 0.3;
    r.dem_debate = u(rng) < 0.1;
    r.rep_debate = u(rng) < 0.1;
    const auto d = static_cast<Eigen::Index>(i);
    const double eta = 1.5 + 0.8 * sc.theta(d, 1) - 0.5 * sc.theta(d, 3) + 0.1 * *r.followers_millions;
    r.tweet.likes = gen_counts_at(std::exp(eta), 0.4, 1, 50 + i)[0];
    rows.push_back(r);
  }
  Eigen::VectorXd reference;
  double worst = 0.0;
  for (int b = 0; b < s.num_topics; ++b) {
    DesignOptions opts;
    opts.baseline_topic = b;
    const DesignMatrix d = drop_zero_columns(build_design(rows, sc.theta, sc.corpus.doc_ids, opts)).design;
    const NbFit f = fit_nb(d);
    if (!f.converged) o.pass = false;
    const Eigen::VectorXd mu = fitted_means(d, f.coef);
    if (b == 0) {
      reference = mu;
      continue;
    }
    worst = std::max(worst, ((mu - reference).array() / reference.array()).abs().maxCoeff());
  }
  o.pass = o.pass && worst < 1e-6;
  o.detail = fmt("max relative change in fitted mean across 4 baselines %.2e (tol 1e-6)", worst);
  return o;
}

// --- 9 and 10 -----------------------------------------------------------------

bool run_stage(const fs::path& out, std::vector<std::string> args, std::string& log) {
  args.insert(args.begin(), {"--out", out.string()});
  std::ostringstream so, se;
  const int code = cli::run_cli(args, so, se);
  if (code != 0) log += args[2] + " exited " + std::to_string(code) + ": " + se.str();
  return code == 0;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

Outcome format_fidelity() {
  Outcome o;
  testsupport::TempDir dir;
  std::string log;
  for (auto args : std::vector<std::vector<std::string>>{
           {"synth", "--preset", "campaign"}, {"lda", "--topics", "4"}, {"fit"}, {"report"}}) {
    if (!run_stage(dir.path(), args, log)) {
      o.pass = false;
      o.detail = log;
      return o;
    }
  }
  const std::string table = testsupport::read_file(dir / "report" / "table.txt");
  std::vector<std::string> missing;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) missing.push_back(what);
  };
  need(table.find("* p<0.05, ** p<0.01, *** p<0.001") != std::string::npos, "star legend");
  need(table.find("Standard errors in parentheses") != std::string::npos, "SE note");
  need(std::regex_search(table, std::regex(R"(\d\*{1,3}\s+\(\d+\.\d+\))")), "starred coefficient with (SE)");
  need(std::regex_search(table, std::regex(R"(ln\(alpha\)\s*\nConstant\s+-?\d)")), "ln(alpha) row");
  need(std::regex_search(table, std::regex(R"(\nAIC\s+\d+\.\d\s+\d+\.\d)")), "AIC row");
  need(std::regex_search(table, std::regex(R"(\nObservations\s+\d+\s+\d+)")), "Observations row");
  std::size_t topic_rows = 0;
  for (int k = 1; k <= 3; ++k) {
    topic_rows += std::regex_search(table, std::regex("\\nTopic " + std::to_string(k) + "\\s+\\S"));
  }
  need(topic_rows == 3, "3 topic coefficient rows");
  need(table.find("\nTopic 0 ") == std::string::npos, "no baseline topic row");

  const std::string svg = testsupport::read_file(dir / "report" / "ci.svg");
  need(svg.find("<svg") != std::string::npos, "svg root");
  need(count_of(svg, "class=\"baseline\"") == 1, "zero baseline line");
  need(count_of(svg, "class=\"whisker\"") == 3, "3 CI whiskers");
  need(svg.find("href=\"http") == std::string::npos, "self-contained svg");

  o.pass = missing.empty();
  if (missing.empty()) {
    o.detail = "table has star legend, SEs, ln(alpha), AIC, Observations, 3 topic rows; CI plot has baseline and 3 whiskers";
  } else {
    o.detail = "missing:";
    for (const auto& m : missing) o.detail += " [" + m + "]";
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  testsupport::TempDir a, b;
  std::string log;
  const std::vector<std::vector<std::string>> pipeline{
      {"synth", "--preset", "campaign"}, {"lda", "--topics", "4"}, {"fit"}, {"sweep", "--kmin", "2", "--kmax", "9"},
      {"report"}};
  for (const auto& dir : {a.path(), b.path()}) {
    for (const auto& args : pipeline) {
      if (!run_stage(dir, args, log)) {
        o.pass = false;
        o.detail = log;
        return o;
      }
    }
  }
  std::size_t compared = 0;
  std::vector<std::string> differ;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    const fs::path rel = fs::relative(e.path(), a.path());
    ++compared;
    if (!fs::exists(b.path() / rel) ||
        testsupport::read_file(e.path()) != testsupport::read_file(b.path() / rel)) {
      differ.push_back(rel.string());
    }
  }
  o.pass = differ.empty() && compared > 0;
  o.detail = fmt("%zu artifacts compared, %zu differ", compared, differ.size());
  for (const auto& d : differ) o.detail += " " + d;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  set_warning_sink([](std::string_view) {});
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"likelihood correctness", likelihood_correctness},
      {"Poisson nesting", poisson_nesting},
      {"gradient fidelity", gradient_fidelity},
      {"recovery", recovery},
      {"over-dispersion test power", overdispersion_power},
      {"LDA sanity", lda_sanity},
      {"sweep shape", sweep_shape},
      {"baseline invariance", baseline_invariance},
      {"end-to-end format fidelity", format_fidelity},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
