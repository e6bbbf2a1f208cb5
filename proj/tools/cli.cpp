#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "topicreg/countreg.hpp"
#include "topicreg/design.hpp"
#include "topicreg/error.hpp"
#include "topicreg/ingest.hpp"
#include "topicreg/log.hpp"
#include "topicreg/modelsel.hpp"
#include "topicreg/report.hpp"
#include "topicreg/synth.hpp"

#ifndef TOPICREG_VERSION
#define TOPICREG_VERSION "unknown"
#endif

namespace topicreg::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string hex(const unsigned char* bytes, unsigned len) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    s.push_back(digits[bytes[i] >> 4]);
    s.push_back(digits[bytes[i] & 0xf]);
  }
  return s;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json versions() {
  return {
      {"topicreg", TOPICREG_VERSION},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"openssl", OPENSSL_VERSION_TEXT},
      {"compiler", __VERSION__},
      {"rng", kRngName},
  };
}

/// One output directory plus the bookkeeping that ends up in its manifest.
class Stage {
 public:
  Stage(std::string name, const RunConfig& cfg, std::vector<std::string> argv)
      : name_(std::move(name)),
        dir_(cfg.out / name_),
        cfg_(cfg),
        argv_(std::move(argv)),
        started_(std::chrono::system_clock::now()),
        t0_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
  }

  fs::path file(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  const fs::path& dir() const { return dir_; }

  void seed(const std::string& key, std::uint64_t value) { seeds_[key] = value; }

  void finish() {
    const json config = to_json(cfg_);
    json files = json::array();
    for (const auto& f : files_) {
      const fs::path p = dir_ / f;
      files.push_back({{"path", (fs::path(name_) / f).generic_string()},
                       {"bytes", fs::file_size(p)},
                       {"sha256", sha256_file(p)}});
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    const json manifest = {
        {"stage", name_},
        {"argv", argv_},
        {"config", config},
        {"config_sha256", sha256_hex(config.dump())},
        {"seeds", seeds_},
        {"versions", versions()},
        {"started_at", format_iso8601(std::chrono::floor<std::chrono::seconds>(started_))},
        {"elapsed_seconds", elapsed},
        {"files", files},
    };
    write_text(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string name_;
  fs::path dir_;
  const RunConfig& cfg_;
  std::vector<std::string> argv_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::string> files_;
  json seeds_ = json::object();
};

fs::path require(const RunConfig& cfg, const std::string& stage, const std::string& name,
                 const std::string& producer) {
  const fs::path p = cfg.out / stage / name;
  if (!fs::exists(p)) throw DataError("missing " + p.string() + "; run " + producer + " first");
  return p;
}

Corpus load_stage_corpus(const RunConfig& cfg) {
  return load_corpus(require(cfg, "corpus", "corpus.json", "ingest"));
}

std::vector<AnalysisRow> load_stage_rows(const RunConfig& cfg) {
  auto rows = complete_rows(load_rows(require(cfg, "corpus", "rows.csv", "ingest")));
  if (rows.empty()) throw DataError("no analysis rows carry a follower count");
  return rows;
}

TopicModel load_stage_model(const RunConfig& cfg, const Corpus& corpus) {
  return load_topic_model(require(cfg, "lda", "model.json", "lda"), corpus.vocab);
}

TableOptions table_options(const RunConfig& cfg) {
  TableOptions o;
  o.topic_labels = cfg.topic_labels;
  return o;
}

unsigned resolved_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

// --- commands ---------------------------------------------------------------

void cmd_ingest(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out) {
  const fs::path synth = cfg.out / "synth";
  if (!cfg.tweets && fs::exists(synth / "tweets.jsonl")) {
    cfg.tweets = synth / "tweets.jsonl";
    if (!cfg.snapshots) cfg.snapshots = synth / "snapshots.csv";
    if (!cfg.debates) cfg.debates = synth / "debates.csv";
  }
  if (!cfg.tweets) throw UsageError("--tweets is required (or run synth first)");
  if (!cfg.snapshots) throw UsageError("--snapshots is required");
  if (!cfg.debates) throw UsageError("--debates is required");
  for (const auto& p : {*cfg.tweets, *cfg.snapshots, *cfg.debates}) {
    if (!fs::exists(p)) throw UsageError("input not found: " + p.string());
  }
  const auto offset = parse_utc_offset(cfg.timezone);
  if (!offset) throw UsageError("bad --tz '" + cfg.timezone + "'");
  if (cfg.max_staleness_hours <= 0) throw UsageError("--max-staleness-hours must be positive");

  Stage stage("corpus", cfg, argv);
  const auto tweets = load_tweets(*cfg.tweets, tweet_format_for(*cfg.tweets));
  const auto rows = build_rows(tweets, load_snapshots(*cfg.snapshots), load_debates(*cfg.debates),
                               *offset, std::chrono::hours{cfg.max_staleness_hours});
  const Corpus corpus = build_corpus(tweets, cfg.tokenizer);
  save_corpus(stage.file("corpus.json"), corpus);
  save_rows(stage.file("rows.csv"), rows);
  const auto summary = summary_stats(rows);
  write_text(stage.file("summary.txt"), render_summary_table(summary, TableFormat::Text));
  stage.finish();

  out << "ingest: " << tweets.size() << " tweets, " << complete_rows(rows).size()
      << " with follower counts, vocabulary " << corpus.vocab.size() << ", "
      << corpus.empty_docs().size() << " empty documents\n";
}

void cmd_synth(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out) {
  if (cfg.preset != "campaign") throw UsageError("unknown preset '" + cfg.preset + "'");
  CampaignPreset preset;
  preset.seed = cfg.synth_seed;
  {
    Stage stage("synth", cfg, argv);
    stage.seed("synth", preset.seed);
    stage.seed("text", preset.text.seed);
    const CampaignData data = gen_campaign(preset);
    save_tweets_jsonl(stage.file("tweets.jsonl"), data.tweets);
    save_snapshots(stage.file("snapshots.csv"), data.snapshots);
    save_debates(stage.file("debates.csv"), data.schedule);
    write_text(stage.file("truth.json"), describe_preset(preset).dump(2) + "\n");
    stage.finish();
    out << "synth: " << data.tweets.size() << " tweets, " << data.snapshots.size()
        << " snapshots, " << data.schedule.entries().size() << " debates\n";
  }
  cfg.tweets = cfg.out / "synth" / "tweets.jsonl";
  cfg.snapshots = cfg.out / "synth" / "snapshots.csv";
  cfg.debates = cfg.out / "synth" / "debates.csv";
  cmd_ingest(cfg, argv, out);
}

void save_theta_csv(const fs::path& path, const TopicModel& model) {
  std::string s = "id";
  for (int k = 0; k < model.num_topics; ++k) s += "," + topic_column_name(k);
  s += "\n";
  for (Eigen::Index d = 0; d < model.theta.rows(); ++d) {
    s += model.doc_ids[static_cast<std::size_t>(d)];
    for (Eigen::Index k = 0; k < model.theta.cols(); ++k) s += "," + fmt17(model.theta(d, k));
    s += "\n";
  }
  write_text(path, s);
}

void cmd_lda(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out) {
  cfg.lda.validate();
  const Corpus corpus = load_stage_corpus(cfg);
  Stage stage("lda", cfg, argv);
  stage.seed("lda", cfg.lda.seed);
  const TopicModel model = fit_lda(corpus, cfg.lda);
  save_topic_model(stage.file("model.json"), model);
  save_theta_csv(stage.file("theta.csv"), model);
  std::string trace = "sweep,loglik\n";
  for (std::size_t i = 0; i < model.loglik_trace.size(); ++i) {
    trace += std::to_string(i + 1) + "," + fmt17(model.loglik_trace[i]) + "\n";
  }
  write_text(stage.file("trace.csv"), trace);
  write_text(stage.file("topics.txt"), render_topic_table(model, 20, table_options(cfg)));
  stage.finish();
  out << "lda: K=" << model.num_topics << ", alpha=" << cfg.lda.resolved_alpha()
      << ", final loglik " << (model.loglik_trace.empty() ? 0.0 : model.loglik_trace.back()) << "\n";
}

void cmd_fit(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out) {
  const Corpus corpus = load_stage_corpus(cfg);
  const auto rows = load_stage_rows(cfg);
  const TopicModel model = load_stage_model(cfg, corpus);
  if (cfg.baseline_topic < 0 || cfg.baseline_topic >= model.num_topics) {
    throw UsageError("--baseline-topic must be in [0, " + std::to_string(model.num_topics) + ")");
  }

  DesignOptions base_opts;
  base_opts.baseline_topic = cfg.baseline_topic;
  base_opts.hour_controls = false;
  base_opts.baseline_hour = cfg.baseline_hour;
  DesignOptions topic_opts = base_opts;
  topic_opts.hour_controls = cfg.hour_controls;

  const DesignMatrix base_design = drop_zero_columns(build_design(rows, base_opts)).design;
  const DesignMatrix topic_design =
      drop_zero_columns(build_design(rows, model.theta, model.doc_ids, topic_opts)).design;
  {
    Stage stage("design", cfg, argv);
    save_design_csv(stage.file("baseline.csv"), base_design);
    save_design_csv(stage.file("topics.csv"), topic_design);
    stage.finish();
  }

  Stage stage("fit", cfg, argv);
  stage.seed("lda", model.config.seed);
  const NbFit base = fit_nb(base_design);
  const NbFit topics = fit_nb(topic_design);
  const PoissonFit pois = fit_poisson(topic_design);
  if (!base.converged) warn("baseline NB fit did not converge");
  if (!topics.converged) warn("topic NB fit did not converge");
  save_nb_fit(stage.file("baseline_nb.json"), base);
  save_nb_fit(stage.file("topics_nb.json"), topics);
  save_poisson_fit(stage.file("topics_poisson.json"), pois);

  const LrTest lr = lr_test_overdispersion(topics, pois);
  const std::vector<NbFit> both{base, topics};
  const AicComparison aic = compare_aic(both);
  const json tests = {
      {"lr_overdispersion", {{"statistic", lr.statistic}, {"p_value", lr.p_value}}},
      {"aic", {{"baseline", base.aic}, {"topics", topics.aic}, {"best", aic.best == 0 ? "baseline" : "topics"},
               {"delta", aic.delta}}},
      {"mae", {{"baseline", mae(base_design, base)}, {"topics", mae(topic_design, topics)}}},
      {"n", topics.n},
  };
  write_text(stage.file("tests.json"), tests.dump(2) + "\n");
  stage.finish();
  out << "fit: n=" << topics.n << ", AIC baseline " << base.aic << " vs topics " << topics.aic
      << ", alpha " << topics.alpha() << ", LR p " << lr.p_value << "\n";
}

void cmd_sweep(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out) {
  if (cfg.repeats < 1) throw UsageError("--repeats must be at least 1");
  const Corpus corpus = load_stage_corpus(cfg);
  const auto rows = load_stage_rows(cfg);

  SweepOptions opts;
  opts.k_min = cfg.kmin;
  opts.k_max = cfg.kmax;
  opts.lda = cfg.lda;
  opts.design.baseline_topic = cfg.baseline_topic;
  opts.design.hour_controls = cfg.hour_controls;
  opts.design.baseline_hour = cfg.baseline_hour;
  opts.holdout = cfg.holdout;
  opts.threads = resolved_threads(cfg);

  Stage stage("sweep", cfg, argv);
  json runs = json::array();
  std::map<int, int> votes;
  for (int r = 0; r < cfg.repeats; ++r) {
    opts.lda.seed = cfg.lda.seed + static_cast<std::uint64_t>(r);
    stage.seed("lda_base_" + std::to_string(r), opts.lda.seed);
    const SweepResult res = sweep_topics(corpus, rows, opts);
    const std::string name = cfg.repeats == 1 ? "sweep.csv" : "sweep_" + std::to_string(r) + ".csv";
    save_sweep_csv(stage.file(name), res);
    ++votes[res.chosen_k];
    runs.push_back({{"base_seed", opts.lda.seed}, {"chosen_k", res.chosen_k}, {"file", name}});
    for (const auto& e : res.entries) {
      if (!e.error.empty()) warn("K=" + std::to_string(e.k) + ": " + e.error);
    }
    out << "sweep: base seed " << opts.lda.seed << " chose K=" << res.chosen_k << "\n";
  }
  // Modal choice, ties to the smaller K (map order).
  int modal = votes.begin()->first;
  for (const auto& [k, n] : votes) {
    if (n > votes[modal]) modal = k;
  }
  write_text(stage.file("sweep.json"), json{{"runs", runs}, {"modal_k", modal}}.dump(2) + "\n");
  stage.finish();
}

std::string extension(TableFormat f) {
  switch (f) {
    case TableFormat::Csv: return "csv";
    case TableFormat::Markdown: return "md";
    case TableFormat::Text: break;
  }
  return "txt";
}

void cmd_report(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out) {
  const auto format = parse_table_format(cfg.format);
  if (!format) throw UsageError("unknown --format '" + cfg.format + "'");
  const NbFit base = load_nb_fit(require(cfg, "fit", "baseline_nb.json", "fit"));
  const NbFit topics = load_nb_fit(require(cfg, "fit", "topics_nb.json", "fit"));
  const json tests = json::parse(read_bytes(require(cfg, "fit", "tests.json", "fit")));
  const Corpus corpus = load_stage_corpus(cfg);
  const TopicModel model = load_stage_model(cfg, corpus);
  const auto rows = load_rows(require(cfg, "corpus", "rows.csv", "ingest"));

  const TableOptions opts = table_options(cfg);
  Stage stage("report", cfg, argv);
  const std::vector<RegressionTable> tables{make_regression_table(base, "Baseline", opts),
                                            make_regression_table(topics, "Topics", opts)};
  std::string table = render_regression_tables(tables, *format, opts);
  write_text(stage.file("table." + extension(*format)), table);

  const auto& lr = tests.at("lr_overdispersion");
  char line[256];
  std::snprintf(line, sizeof line,
                "Over-dispersion LR test (alpha = 0): chi2 = %.3f, p = %.3g\n"
                "AIC: baseline %.1f, topics %.1f (preferred: %s)\n"
                "MAE: baseline %.3f, topics %.3f\n",
                lr.at("statistic").get<double>(), lr.at("p_value").get<double>(), base.aic, topics.aic,
                tests.at("aic").at("best").get<std::string>().c_str(),
                tests.at("mae").at("baseline").get<double>(), tests.at("mae").at("topics").get<double>());
  write_text(stage.file("tests.txt"), line);

  const int baseline_topic = topics.column_names.empty() ? 0 : [&] {
    for (int k = 0; k < model.num_topics; ++k) {
      if (std::find(topics.column_names.begin(), topics.column_names.end(), topic_column_name(k)) ==
          topics.column_names.end()) {
        return k;
      }
    }
    return 0;
  }();
  const std::string baseline_label = display_label(topic_column_name(baseline_topic), opts);
  stage.file("ci.svg");
  stage.file("ci.csv");
  render_ci_plot(topics, {}, stage.dir() / "ci", opts, baseline_label);

  write_text(stage.file("topics.txt"), render_topic_table(model, 20, opts));
  write_text(stage.file("summary.txt"), render_summary_table(summary_stats(rows), TableFormat::Text));

  const fs::path sweep = cfg.out / "sweep" / "sweep.csv";
  if (fs::exists(sweep)) write_text(stage.file("sweep.csv"), read_bytes(sweep));
  stage.finish();
  out << table << line;
}

// --- option plumbing ----------------------------------------------------------

template <class T>
struct Override {
  T value{};
  std::vector<CLI::Option*> opts;  // the same flag may live on several subcommands
  bool given() const {
    return std::any_of(opts.begin(), opts.end(), [](CLI::Option* o) { return o->count() > 0; });
  }
};

struct Flags {
  std::string config;
  Override<std::string> out, tweets, snapshots, debates, tz, preset, format;
  Override<int> staleness, topics, iters, burnin, thin, baseline_topic, baseline_hour, kmin, kmax,
      repeats;
  Override<std::size_t> min_df, min_len;
  Override<double> alpha, beta, holdout;
  Override<std::uint64_t> seed;
  Override<unsigned> threads;
  Override<std::vector<std::string>> labels;
  Override<bool> no_hours;
};

template <class T>
void add(CLI::App* app, Override<T>& o, const std::string& name, const std::string& help) {
  o.opts.push_back(app->add_option(name, o.value, help));
}

std::pair<int, std::string> parse_label(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--label expects K=name, got '" + s + "'");
  try {
    std::size_t used = 0;
    const int k = std::stoi(s.substr(0, eq), &used);
    if (used != eq || k < 0) throw std::invalid_argument("");
    return {k, s.substr(eq + 1)};
  } catch (const std::logic_error&) {
    throw UsageError("--label expects K=name, got '" + s + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void apply_flags(const Flags& f, RunConfig& cfg) {
  if (f.out.given()) cfg.out = f.out.value;
  if (f.tweets.given()) cfg.tweets = f.tweets.value;
  if (f.snapshots.given()) cfg.snapshots = f.snapshots.value;
  if (f.debates.given()) cfg.debates = f.debates.value;
  if (f.tz.given()) cfg.timezone = f.tz.value;
  if (f.staleness.given()) cfg.max_staleness_hours = f.staleness.value;
  if (f.min_df.given()) cfg.tokenizer.min_df = f.min_df.value;
  if (f.min_len.given()) cfg.tokenizer.min_len = f.min_len.value;
  if (f.preset.given()) cfg.preset = f.preset.value;
  if (f.topics.given()) cfg.lda.num_topics = f.topics.value;
  if (f.alpha.given()) cfg.lda.alpha = f.alpha.value;
  if (f.beta.given()) cfg.lda.beta = f.beta.value;
  if (f.iters.given()) cfg.lda.iters = f.iters.value;
  if (f.burnin.given()) cfg.lda.burnin = f.burnin.value;
  if (f.thin.given()) cfg.lda.thin = f.thin.value;
  if (f.baseline_topic.given()) cfg.baseline_topic = f.baseline_topic.value;
  if (f.baseline_hour.given()) cfg.baseline_hour = f.baseline_hour.value;
  if (f.no_hours.given()) cfg.hour_controls = false;
  if (f.kmin.given()) cfg.kmin = f.kmin.value;
  if (f.kmax.given()) cfg.kmax = f.kmax.value;
  if (f.threads.given()) cfg.threads = f.threads.value;
  if (f.holdout.given()) cfg.holdout = f.holdout.value;
  if (f.repeats.given()) cfg.repeats = f.repeats.value;
  if (f.format.given()) cfg.format = f.format.value;
  if (f.labels.given()) {
    cfg.topic_labels.clear();
    for (const auto& s : f.labels.value) cfg.topic_labels.insert(parse_label(s));
  }
}

void add_lda_flags(CLI::App* app, Flags& f) {
  add(app, f.alpha, "--alpha", "Doc-topic prior (default 50/K)");
  add(app, f.beta, "--beta", "Topic-word prior");
  add(app, f.iters, "--iters", "Gibbs sweeps");
  add(app, f.burnin, "--burnin", "Sweeps discarded before averaging");
  add(app, f.thin, "--thin", "Keep every n-th sweep after burn-in");
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 failed");
  }
  return hex(md, len);
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

json to_json(const RunConfig& cfg) {
  json labels = json::object();
  for (const auto& [k, v] : cfg.topic_labels) labels[std::to_string(k)] = v;
  auto opt_path = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
  return {
      {"tweets", opt_path(cfg.tweets)},
      {"snapshots", opt_path(cfg.snapshots)},
      {"debates", opt_path(cfg.debates)},
      {"timezone", cfg.timezone},
      {"max_staleness_hours", cfg.max_staleness_hours},
      {"tokenizer", cfg.tokenizer},
      {"lda", cfg.lda},
      {"baseline_topic", cfg.baseline_topic},
      {"baseline_hour", cfg.baseline_hour},
      {"hour_controls", cfg.hour_controls},
      {"kmin", cfg.kmin},
      {"kmax", cfg.kmax},
      {"threads", cfg.threads},
      {"holdout", cfg.holdout ? json(*cfg.holdout) : json(nullptr)},
      {"repeats", cfg.repeats},
      {"preset", cfg.preset},
      {"synth_seed", cfg.synth_seed},
      {"topic_labels", labels},
      {"format", cfg.format},
      {"out", cfg.out.string()},
  };
}

void apply_json(const json& j, RunConfig& cfg) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::vector<std::string> known{
      "tweets", "snapshots", "debates", "timezone", "max_staleness_hours", "tokenizer", "lda",
      "baseline_topic", "baseline_hour", "hour_controls", "kmin", "kmax", "threads", "holdout",
      "repeats", "preset", "synth_seed", "topic_labels", "format", "out"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  try {
    auto path = [&](const char* key, std::optional<fs::path>& dst) {
      if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<std::string>();
    };
    path("tweets", cfg.tweets);
    path("snapshots", cfg.snapshots);
    path("debates", cfg.debates);
    if (j.contains("timezone")) cfg.timezone = j.at("timezone").get<std::string>();
    if (j.contains("max_staleness_hours")) cfg.max_staleness_hours = j.at("max_staleness_hours").get<int>();
    if (j.contains("tokenizer")) from_json(j.at("tokenizer"), cfg.tokenizer);
    if (j.contains("lda")) from_json(j.at("lda"), cfg.lda);
    if (j.contains("baseline_topic")) cfg.baseline_topic = j.at("baseline_topic").get<int>();
    if (j.contains("baseline_hour")) cfg.baseline_hour = j.at("baseline_hour").get<int>();
    if (j.contains("hour_controls")) cfg.hour_controls = j.at("hour_controls").get<bool>();
    if (j.contains("kmin")) cfg.kmin = j.at("kmin").get<int>();
    if (j.contains("kmax")) cfg.kmax = j.at("kmax").get<int>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    if (j.contains("holdout")) {
      cfg.holdout = j.at("holdout").is_null() ? std::nullopt : std::optional(j.at("holdout").get<double>());
    }
    if (j.contains("repeats")) cfg.repeats = j.at("repeats").get<int>();
    if (j.contains("preset")) cfg.preset = j.at("preset").get<std::string>();
    if (j.contains("synth_seed")) cfg.synth_seed = j.at("synth_seed").get<std::uint64_t>();
    if (j.contains("topic_labels")) {
      cfg.topic_labels.clear();
      for (const auto& [k, v] : j.at("topic_labels").items()) {
        cfg.topic_labels.insert(parse_label(k + "=" + v.get<std::string>()));
      }
    }
    if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topic-driven engagement regression pipeline", "topicreg"};
  app.require_subcommand(1, 1);
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  add(&app, f.out, "--out", std::string("Output directory (default $") + kOutEnv + " or ./out)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset and ingest it");
  add(synth, f.preset, "--preset", "Dataset preset (campaign)");
  add(synth, f.seed, "--seed", "Generator seed");

  auto* ingest = app.add_subcommand("ingest", "Load tweets, join followers, flag covariates, tokenize");
  add(ingest, f.tweets, "--tweets", "Tweets (.jsonl or .csv)");
  add(ingest, f.snapshots, "--snapshots", "Follower snapshots CSV");
  add(ingest, f.debates, "--debates", "Debate schedule CSV");
  add(ingest, f.tz, "--tz", "Fixed UTC offset for local calendar, e.g. -05:00");
  add(ingest, f.staleness, "--max-staleness-hours", "Oldest usable follower snapshot");
  add(ingest, f.min_df, "--min-df", "Minimum document frequency");
  add(ingest, f.min_len, "--min-len", "Minimum token length in code points");

  auto* lda = app.add_subcommand("lda", "Fit the topic model");
  add(lda, f.topics, "--topics", "Number of topics");
  add_lda_flags(lda, f);
  add(lda, f.seed, "--seed", "Sampler seed");

  auto* fit = app.add_subcommand("fit", "Fit baseline and topic NB2 regressions");
  add(fit, f.baseline_topic, "--baseline-topic", "Topic left out of the design");
  add(fit, f.baseline_hour, "--baseline-hour", "Hour left out of the design");
  f.no_hours.opts.push_back(fit->add_flag("--no-hour-controls", f.no_hours.value, "Omit hour-of-day dummies"));

  auto* sweep = app.add_subcommand("sweep", "Select the number of topics by MAE");
  add(sweep, f.kmin, "--kmin", "Smallest K");
  add(sweep, f.kmax, "--kmax", "Largest K");
  add(sweep, f.threads, "--threads", "Worker threads (0: all cores)");
  add(sweep, f.holdout, "--holdout", "Fraction of rows held out for MAE");
  add(sweep, f.repeats, "--repeats", "Independent sweeps with consecutive base seeds");
  add_lda_flags(sweep, f);
  add(sweep, f.seed, "--seed", "Base sampler seed");
  add(sweep, f.baseline_topic, "--baseline-topic", "Topic left out of the design");
  f.no_hours.opts.push_back(sweep->add_flag("--no-hour-controls", f.no_hours.value, "Omit hour-of-day dummies"));

  auto* report = app.add_subcommand("report", "Render tables and the coefficient plot");
  add(report, f.format, "--format", "text, csv or md");
  f.labels.opts.push_back(report->add_option("--label", f.labels.value, "Topic label, K=name (repeatable)"));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto previous = set_warning_sink([&err](std::string_view m) { err << "warning: " << m << "\n"; });
  struct Restore {
    WarningSink& sink;
    ~Restore() { set_warning_sink(std::move(sink)); }
  } restore{previous};

  try {
    RunConfig cfg;
    if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') cfg.out = env;
    if (!f.config.empty()) {
      json j;
      try {
        j = json::parse(read_bytes(f.config));
      } catch (const json::parse_error& e) {
        throw UsageError("cannot parse " + f.config + ": " + e.what());
      }
      apply_json(j, cfg);
      const fs::path base = fs::path(f.config).parent_path();
      for (auto* p : {&cfg.tweets, &cfg.snapshots, &cfg.debates}) {
        if (*p) *p = resolve(base, p->value().string());
      }
      if (j.contains("out")) cfg.out = resolve(base, cfg.out.string());
    }
    apply_flags(f, cfg);

    auto* cmd = app.get_subcommands().front();
    if (f.seed.given()) {
      if (cmd == synth) cfg.synth_seed = f.seed.value;
      else cfg.lda.seed = f.seed.value;
    }
    std::vector<std::string> argv{"topicreg"};
    argv.insert(argv.end(), args.begin(), args.end());

    if (cmd == synth) cmd_synth(cfg, argv, out);
    else if (cmd == ingest) cmd_ingest(cfg, argv, out);
    else if (cmd == lda) cmd_lda(cfg, argv, out);
    else if (cmd == fit) cmd_fit(cfg, argv, out);
    else if (cmd == sweep) cmd_sweep(cfg, argv, out);
    else cmd_report(cfg, argv, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace topicreg::cli
