#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicreg/countreg.hpp"
#include "topicreg/design.hpp"
#include "topicreg/lda.hpp"

namespace topicreg {

struct SweepEntry {
  int k = 0;
  double mae = 0.0;
  double aic = 0.0;
  double loglik = 0.0;
  bool converged = false;
  std::uint64_t lda_seed = 0;
  std::string error;  // non-empty when the fit threw
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // ascending K
  int chosen_k = 0;
};

struct SweepOptions {
  int k_min = 2;
  int k_max = 9;
  LdaConfig lda;  // num_topics is overridden per K; seed is the base seed
  DesignOptions design;
  /// Fraction of rows held out for MAE; unset means in-sample MAE.
  std::optional<double> holdout;
  unsigned threads = 1;
};

/// Per-K LDA seed: base XOR K.
std::uint64_t sweep_seed(std::uint64_t base_seed, int k);

/// Smallest MAE among converged entries, ties to smaller K. Throws when no
/// entry converged.
int choose_k(std::span<const SweepEntry> entries);

/// For each K in [k_min, k_max]: fit LDA, build the design (baseline topic
/// clamped to K-1), drop all-zero columns, fit NB2 and record MAE / AIC.
SweepResult sweep_topics(const Corpus& corpus, const std::vector<AnalysisRow>& rows,
                         const SweepOptions& options);

/// Deterministic split: true for rows assigned to the holdout set.
std::vector<bool> holdout_mask(std::span<const std::string> row_ids, double fraction,
                               std::uint64_t seed);

struct AicComparison {
  std::size_t best = 0;
  std::vector<double> delta;  // aic_i − min aic
};

/// Index of the smallest AIC (first on ties). Throws on differing n.
AicComparison compare_aic(std::span<const NbFit> fits);

void save_sweep_csv(const std::filesystem::path& path, const SweepResult& result);

}  // namespace topicreg
