#include "topicreg/modelsel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "topicreg/csv.hpp"
#include "topicreg/error.hpp"

namespace topicreg {
namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DesignMatrix take_rows(const DesignMatrix& design, const std::vector<bool>& mask, bool keep) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    if (mask[static_cast<std::size_t>(i)] == keep) idx.push_back(i);
  }
  DesignMatrix out = design;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), design.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  out.row_ids.clear();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.X.row(static_cast<Eigen::Index>(r)) = design.X.row(idx[r]);
    out.y(static_cast<Eigen::Index>(r)) = design.y(idx[r]);
    out.row_ids.push_back(design.row_ids[static_cast<std::size_t>(idx[r])]);
  }
  return out;
}

SweepEntry run_one(const Corpus& corpus, const std::vector<AnalysisRow>& rows,
                   const SweepOptions& options, int k) {
  SweepEntry entry;
  entry.k = k;
  entry.lda_seed = sweep_seed(options.lda.seed, k);
  try {
    LdaConfig cfg = options.lda;
    cfg.num_topics = k;
    cfg.seed = entry.lda_seed;
    const TopicModel model = fit_lda(corpus, cfg);

    DesignOptions dopt = options.design;
    dopt.baseline_topic = std::min(dopt.baseline_topic, k - 1);
    DesignMatrix design = build_design(rows, model.theta, model.doc_ids, dopt);
    design = drop_zero_columns(design).design;

    if (options.holdout) {
      const auto mask = holdout_mask(design.row_ids, *options.holdout, options.lda.seed);
      const DesignMatrix train = drop_zero_columns(take_rows(design, mask, false)).design;
      const DesignMatrix test = select_columns(take_rows(design, mask, true), train.column_names);
      const NbFit fit = fit_nb(train);
      entry.mae = mae(test, fitted_means(test, fit.coef));
      entry.aic = fit.aic;
      entry.loglik = fit.loglik;
      entry.converged = fit.converged;
    } else {
      const NbFit fit = fit_nb(design);
      entry.mae = mae(design, fit);
      entry.aic = fit.aic;
      entry.loglik = fit.loglik;
      entry.converged = fit.converged;
    }
  } catch (const std::exception& e) {
    entry.converged = false;
    entry.mae = std::numeric_limits<double>::quiet_NaN();
    entry.aic = std::numeric_limits<double>::quiet_NaN();
    entry.loglik = std::numeric_limits<double>::quiet_NaN();
    entry.error = e.what();
  }
  return entry;
}

}  // namespace

std::uint64_t sweep_seed(std::uint64_t base_seed, int k) {
  return base_seed ^ static_cast<std::uint64_t>(k);
}

int choose_k(std::span<const SweepEntry> entries) {
  const SweepEntry* best = nullptr;
  for (const auto& e : entries) {
    if (!e.converged) continue;
    if (!best || e.mae < best->mae || (e.mae == best->mae && e.k < best->k)) best = &e;
  }
  if (!best) throw NumericalError("no topic count produced a converged fit");
  return best->k;
}

SweepResult sweep_topics(const Corpus& corpus, const std::vector<AnalysisRow>& rows,
                         const SweepOptions& options) {
  if (options.k_min < 2 || options.k_max < options.k_min) {
    throw UsageError("sweep range needs 2 <= kmin <= kmax");
  }
  if (options.holdout && !(*options.holdout > 0.0 && *options.holdout < 1.0)) {
    throw UsageError("holdout fraction must be in (0, 1)");
  }
  const std::size_t count = static_cast<std::size_t>(options.k_max - options.k_min + 1);
  SweepResult result;
  result.entries.resize(count);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      result.entries[i] = run_one(corpus, rows, options, options.k_min + static_cast<int>(i));
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  result.chosen_k = choose_k(result.entries);
  return result;
}

std::vector<bool> holdout_mask(std::span<const std::string> row_ids, double fraction,
                               std::uint64_t seed) {
  std::vector<bool> mask;
  mask.reserve(row_ids.size());
  const auto cut = static_cast<std::uint64_t>(fraction * 1e6);
  for (const auto& id : row_ids) {
    const std::uint64_t h = fnv1a64(id, fnv1a64(std::to_string(seed)));
    mask.push_back(h % 1000000 < cut);
  }
  return mask;
}

AicComparison compare_aic(std::span<const NbFit> fits) {
  if (fits.empty()) throw UsageError("no fits to compare");
  AicComparison out;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (fits[i].n != fits[0].n) throw UsageError("AIC comparison needs fits on the same observations");
    if (fits[i].aic < fits[out.best].aic) out.best = i;
  }
  for (const auto& f : fits) out.delta.push_back(f.aic - fits[out.best].aic);
  return out;
}

void save_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  csv::write_row(out, {"K", "mae", "aic", "loglik", "converged", "seed"});
  for (const auto& e : result.entries) {
    csv::write_row(out, {std::to_string(e.k), fmt_g17(e.mae), fmt_g17(e.aic), fmt_g17(e.loglik),
                         e.converged ? "true" : "false", std::to_string(e.lda_seed)});
  }
}

}  // namespace topicreg
