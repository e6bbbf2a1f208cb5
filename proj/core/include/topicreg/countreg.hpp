#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topicreg/design.hpp"

namespace topicreg {

inline constexpr double kLnAlphaMin = -20.0;
inline constexpr double kLnAlphaMax = 10.0;

/// NB2 fit. Parameter vector is (coef..., ln_alpha); cov follows that order.
struct NbFit {
  std::vector<std::string> column_names;
  Eigen::VectorXd coef;
  double ln_alpha = 0.0;
  Eigen::MatrixXd cov;
  bool cov_reliable = false;
  bool alpha_at_bound = false;
  double loglik = 0.0;
  double aic = 0.0;
  std::size_t n = 0;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;

  double alpha() const;
  std::size_t num_params() const { return static_cast<std::size_t>(coef.size()) + 1; }
};

struct PoissonFit {
  std::vector<std::string> column_names;
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;
  double loglik = 0.0;
  double aic = 0.0;
  std::size_t n = 0;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double score_norm = 0.0;
};

/// exp(x . coef). Throws NumericalError when the linear predictor exceeds 700.
double nb_mean(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& coef);

/// 1 / (1 + alpha mu).
double nb_p(double mu, double alpha);

/// log of  Γ(1/α + y) / (Γ(y+1) Γ(1/α)) · p^{1/α} (1 − p)^y  with p = 1/(1+αμ),
/// evaluated entirely in log space. Throws UsageError for alpha <= 0.
double nb_log_pmf(double y, double mu, double alpha);

double poisson_log_pmf(double y, double mu);

Eigen::VectorXd linear_predictor(const DesignMatrix& design, const Eigen::VectorXd& coef);
/// exp of the linear predictor, with the same overflow check as nb_mean.
Eigen::VectorXd fitted_means(const DesignMatrix& design, const Eigen::VectorXd& coef);

double nb_loglik(const DesignMatrix& design, const Eigen::VectorXd& coef, double ln_alpha);
/// Gradient of nb_loglik with respect to (coef, ln_alpha).
Eigen::VectorXd nb_score(const DesignMatrix& design, const Eigen::VectorXd& coef, double ln_alpha);

double poisson_loglik(const DesignMatrix& design, const Eigen::VectorXd& coef);
Eigen::VectorXd poisson_score(const DesignMatrix& design, const Eigen::VectorXd& coef);

/// Throws NumericalError naming the columns that make X rank deficient.
void check_full_rank(const DesignMatrix& design);

struct PoissonOptions {
  double gradient_tol = 1e-8;
  int max_iterations = 50;
};

/// Newton iterations with analytic Hessian and a monotone line search.
PoissonFit fit_poisson(const DesignMatrix& design, const PoissonOptions& options = {});

struct NbInit {
  Eigen::VectorXd coef;
  double ln_alpha = 0.0;
};

struct NbOptions {
  double score_tol = 1e-6;
  double rel_loglik_tol = 1e-9;
  int max_iterations = 200;
  int max_halvings = 30;
};

/// Method-of-moments dispersion start from Poisson residuals:
/// max(1e-4, Σ((y−μ)² − μ) / Σ μ²).
double moment_alpha(const DesignMatrix& design, const Eigen::VectorXd& mu);

/// Maximizes the NB2 likelihood over (coef, ln_alpha) by Newton steps on a
/// central-difference Hessian of the analytic score, with ln_alpha clamped
/// to [kLnAlphaMin, kLnAlphaMax]. Without `init`, starts from fit_poisson.
NbFit fit_nb(const DesignMatrix& design, const std::optional<NbInit>& init = std::nullopt,
             const NbOptions& options = {});

/// Symmetrized central-difference Jacobian of nb_score.
Eigen::MatrixXd nb_hessian_fd(const DesignMatrix& design, const Eigen::VectorXd& coef,
                              double ln_alpha);

struct WaldResult {
  double estimate = 0, se = 0, z = 0, p_value = 1, ci_low = 0, ci_high = 0;
};

inline constexpr double kZ95 = 1.96;

/// Wald statistics for parameter j; j == coef.size() addresses ln_alpha.
/// Throws NumericalError when the covariance is unreliable.
WaldResult wald(const NbFit& fit, std::size_t j);
WaldResult wald(const PoissonFit& fit, std::size_t j);
WaldResult wald_from(double estimate, double se);

/// Two-sided normal p-value for z.
double normal_two_sided_p(double z);

/// "***" (p < 0.001), "**" (p < 0.01), "*" (p < 0.05) or "".
std::string significance_stars(double p_value);

struct LrTest {
  double statistic = 0;
  double p_value = 1;
};

/// 2 (ll_nb − ll_poisson) floored at 0, referred to ½χ²₀ + ½χ²₁.
LrTest lr_test_overdispersion(const NbFit& nb, const PoissonFit& pois);

/// Mean |y − μ̂| over the design rows.
double mae(const DesignMatrix& design, const NbFit& fit);
double mae(const DesignMatrix& design, const Eigen::VectorXd& mu);

void save_nb_fit(const std::filesystem::path& path, const NbFit& fit);
NbFit load_nb_fit(const std::filesystem::path& path);
void save_poisson_fit(const std::filesystem::path& path, const PoissonFit& fit);
PoissonFit load_poisson_fit(const std::filesystem::path& path);

}  // namespace topicreg
