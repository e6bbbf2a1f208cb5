#include "topicreg/countreg.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "topicreg/error.hpp"

namespace topicreg {
namespace {

constexpr double kMaxEta = 700.0;
// Above this value of r = 1/alpha the log-gamma and digamma differences
// switch to Stirling-series expansions around r.
constexpr double kLargeR = 1e3;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stirling series remainder: lgamma(x) = (x - ½) ln x − x + ½ ln 2π + S(x).
double stirling_tail(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

// lgamma(y + r) − lgamma(r) − y ln r
double lgamma_ratio_excess(double y, double r) {
  if (y == 0.0) return 0.0;
  if (r < kLargeR) return std::lgamma(y + r) - std::lgamma(r) - y * std::log(r);
  return (r + y - 0.5) * std::log1p(y / r) - y + stirling_tail(r + y) - stirling_tail(r);
}

// ψ(y + r) − ψ(r) − ln(1 + y/r)
double digamma_ratio_excess(double y, double r) {
  if (y == 0.0) return 0.0;
  if (r < kLargeR) {
    return boost::math::digamma(y + r) - boost::math::digamma(r) - std::log1p(y / r);
  }
  // ψ(x) = ln x − 1/(2x) − 1/(12x²) + 1/(120x⁴) − 1/(252x⁶)
  auto tail = [](double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return -0.5 * inv - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  };
  return tail(r + y) - tail(r);
}

void require_dims(const DesignMatrix& design, const Eigen::VectorXd& coef) {
  if (coef.size() != design.cols()) {
    throw UsageError("coefficient length " + std::to_string(coef.size()) +
                     " does not match design columns " + std::to_string(design.cols()));
  }
  if (design.y.size() != design.rows()) throw UsageError("response length mismatch");
}

double loglik_or_neg_inf(const DesignMatrix& design, const Eigen::VectorXd& coef,
                         double ln_alpha) {
  try {
    const double ll = nb_loglik(design, coef, ln_alpha);
    return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double poisson_loglik_or_neg_inf(const DesignMatrix& design, const Eigen::VectorXd& coef) {
  try {
    const double ll = poisson_loglik(design, coef);
    return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// Solves (−H) d = g, shifting the diagonal until −H + λI is positive definite.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad) {
  Eigen::MatrixXd neg = -hessian;
  const double scale = std::max(1e-12, neg.diagonal().cwiseAbs().maxCoeff());
  double shift = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::MatrixXd shifted = neg;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd d = llt.solve(grad);
      if (d.allFinite()) return d;
    }
    shift = shift == 0.0 ? 1e-8 * scale : shift * 10.0;
  }
  return grad / scale;
}

// Inverse of −H when it is positive definite.
std::optional<Eigen::MatrixXd> inverse_information(const Eigen::MatrixXd& hessian) {
  const Eigen::MatrixXd info = -hessian;
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  cov = 0.5 * (cov + cov.transpose()).eval();
  if (!cov.allFinite() || (cov.diagonal().array() <= 0.0).any()) return std::nullopt;
  return cov;
}

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("ragged matrix in fit file");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      m(r, c) = v.is_null() ? kNaN : v.get<double>();
    }
  }
  return m;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed fit file " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json wald_table(const std::vector<std::string>& names, const Eigen::VectorXd& coef,
                          const Eigen::MatrixXd& cov) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    const double se = cov.rows() > j ? std::sqrt(cov(j, j)) : kNaN;
    const WaldResult w = wald_from(coef(j), se);
    rows.push_back({{"name", names[static_cast<std::size_t>(j)]},
                    {"coef", coef(j)},
                    {"se", w.se},
                    {"z", w.z},
                    {"p", w.p_value},
                    {"ci", {w.ci_low, w.ci_high}}});
  }
  return rows;
}

}  // namespace

double NbFit::alpha() const { return std::exp(ln_alpha); }

double nb_mean(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& coef) {
  const double eta = x.dot(coef);
  if (!(eta <= kMaxEta)) throw NumericalError("linear predictor out of range");
  return std::exp(eta);
}

double nb_p(double mu, double alpha) { return 1.0 / (1.0 + alpha * mu); }

double nb_log_pmf(double y, double mu, double alpha) {
  if (!(alpha > 0.0)) throw UsageError("nb_log_pmf needs alpha > 0; use the Poisson pmf at 0");
  const double r = 1.0 / alpha;
  // lgamma(y+r) − lgamma(r) − lgamma(y+1) + r ln p + y ln(1−p), rearranged as
  // [lgamma(y+r) − lgamma(r) − y ln r] − lgamma(y+1) + y ln μ − (r+y) ln(1 + μ/r).
  const double y_log_mu = y == 0.0 ? 0.0 : y * std::log(mu);
  return lgamma_ratio_excess(y, r) - std::lgamma(y + 1.0) + y_log_mu - (r + y) * std::log1p(mu / r);
}

double poisson_log_pmf(double y, double mu) {
  const double y_log_mu = y == 0.0 ? 0.0 : y * std::log(mu);
  return y_log_mu - mu - std::lgamma(y + 1.0);
}

Eigen::VectorXd linear_predictor(const DesignMatrix& design, const Eigen::VectorXd& coef) {
  require_dims(design, coef);
  return design.X * coef;
}

Eigen::VectorXd fitted_means(const DesignMatrix& design, const Eigen::VectorXd& coef) {
  Eigen::VectorXd eta = linear_predictor(design, coef);
  if (!(eta.maxCoeff() <= kMaxEta) || !eta.allFinite()) {
    throw NumericalError("linear predictor out of range");
  }
  return eta.array().exp();
}

double nb_loglik(const DesignMatrix& design, const Eigen::VectorXd& coef, double ln_alpha) {
  const Eigen::VectorXd mu = fitted_means(design, coef);
  const double alpha = std::exp(ln_alpha);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) ll += nb_log_pmf(design.y(i), mu(i), alpha);
  return ll;
}

Eigen::VectorXd nb_score(const DesignMatrix& design, const Eigen::VectorXd& coef,
                         double ln_alpha) {
  const Eigen::VectorXd mu = fitted_means(design, coef);
  const double alpha = std::exp(ln_alpha);
  const double r = 1.0 / alpha;
  const Eigen::Index P = design.cols();
  Eigen::VectorXd weights(mu.size());
  double d_ln_alpha = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double y = design.y(i);
    const double m = mu(i);
    weights(i) = (y - m) / (1.0 + alpha * m);
    // r [ln(1 + μ/r) − (ψ(y+r) − ψ(r))] + (y − μ)/(1 + αμ), with
    // ln(1+μ/r) − ln(1+y/r) folded into a single log1p.
    d_ln_alpha += r * std::log1p((m - y) / (r + y)) - r * digamma_ratio_excess(y, r) + weights(i);
  }
  Eigen::VectorXd g(P + 1);
  g.head(P) = design.X.transpose() * weights;
  g(P) = d_ln_alpha;
  return g;
}

double poisson_loglik(const DesignMatrix& design, const Eigen::VectorXd& coef) {
  const Eigen::VectorXd mu = fitted_means(design, coef);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) ll += poisson_log_pmf(design.y(i), mu(i));
  return ll;
}

Eigen::VectorXd poisson_score(const DesignMatrix& design, const Eigen::VectorXd& coef) {
  const Eigen::VectorXd mu = fitted_means(design, coef);
  return design.X.transpose() * (design.y - mu);
}

void check_full_rank(const DesignMatrix& design) {
  if (design.rows() < design.cols()) {
    throw NumericalError("design has fewer rows (" + std::to_string(design.rows()) +
                         ") than columns (" + std::to_string(design.cols()) + ")");
  }
  // Scale columns so the rank threshold is unit-free.
  Eigen::MatrixXd scaled = design.X;
  for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
    const double norm = scaled.col(c).norm();
    if (norm > 0.0) scaled.col(c) /= norm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-9);
  const Eigen::Index rank = qr.rank();
  if (rank == design.cols()) return;
  std::string names;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = rank; i < design.cols(); ++i) {
    names += (names.empty() ? "" : ", ") + design.column_names[static_cast<std::size_t>(perm(i))];
  }
  throw NumericalError("rank-deficient design: column(s) " + names +
                       " are collinear with the remaining columns");
}

namespace {

// Near the optimum the likelihood gain of a Newton step can fall below the
// rounding noise of the sum; such steps are still taken if they shrink the
// gradient. With large counts the per-row lgamma terms dwarf the total, so
// the noise is sized from their magnitude rather than from |ll|.
double rounding_scale(const DesignMatrix& design) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < design.y.size(); ++i) {
    const double y = design.y(i);
    s += std::lgamma(y + 1.0) + y * (std::log1p(y) + 1.0) + 1.0;
  }
  return s;
}

bool within_rounding(double trial_ll, double ll, double scale) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return trial_ll < ll && ll - trial_ll <= std::max(64.0 * eps * std::max(1.0, std::abs(ll)), 4.0 * eps * scale);
}

}  // namespace

PoissonFit fit_poisson(const DesignMatrix& design, const PoissonOptions& options) {
  check_full_rank(design);
  const Eigen::Index P = design.cols();
  const double scale = rounding_scale(design);
  PoissonFit fit;
  fit.column_names = design.column_names;
  fit.n = static_cast<std::size_t>(design.rows());
  fit.coef = Eigen::VectorXd::Zero(P);

  const double ybar = design.y.mean();
  const bool all_zero = design.y.cwiseAbs().maxCoeff() == 0.0;
  if (auto c = design.column(kInterceptName); c && ybar > 0.0) fit.coef(*c) = std::log(ybar);

  double ll = poisson_loglik_or_neg_inf(design, fit.coef);
  Eigen::VectorXd grad = poisson_score(design, fit.coef);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    fit.iterations = iter;
    if (grad.norm() < options.gradient_tol) break;
    const Eigen::VectorXd mu = fitted_means(design, fit.coef);
    const Eigen::MatrixXd info = design.X.transpose() * mu.asDiagonal() * design.X;
    const Eigen::VectorXd step = newton_direction(-info, grad);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 30; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = fit.coef + t * step;
      const double trial_ll = poisson_loglik_or_neg_inf(design, trial);
      if (trial_ll >= ll ||
          (within_rounding(trial_ll, ll, scale) && poisson_score(design, trial).norm() < grad.norm())) {
        fit.coef = trial;
        ll = trial_ll;
        accepted = true;
        break;
      }
    }
    grad = poisson_score(design, fit.coef);
    if (!accepted) break;
  }
  fit.score_norm = grad.norm();
  fit.loglik = ll;
  fit.aic = -2.0 * ll + 2.0 * static_cast<double>(P);
  const Eigen::VectorXd eta = linear_predictor(design, fit.coef);
  fit.diverged = all_zero || eta.cwiseAbs().maxCoeff() > 100.0;
  fit.converged = !fit.diverged && fit.score_norm < options.gradient_tol;

  const Eigen::VectorXd mu = fitted_means(design, fit.coef);
  const Eigen::MatrixXd info = design.X.transpose() * mu.asDiagonal() * design.X;
  if (auto cov = inverse_information(-info)) {
    fit.cov = *cov;
  } else {
    fit.cov = Eigen::MatrixXd::Constant(P, P, kNaN);
  }
  return fit;
}

double moment_alpha(const DesignMatrix& design, const Eigen::VectorXd& mu) {
  const Eigen::ArrayXd resid = design.y.array() - mu.array();
  const double num = (resid.square() - mu.array()).sum();
  const double den = mu.array().square().sum();
  const double a = den > 0.0 ? num / den : 0.0;
  return std::max(1e-4, std::isfinite(a) ? a : 1e-4);
}

Eigen::MatrixXd nb_hessian_fd(const DesignMatrix& design, const Eigen::VectorXd& coef,
                              double ln_alpha) {
  const Eigen::Index P = coef.size();
  Eigen::VectorXd theta(P + 1);
  theta << coef, ln_alpha;
  Eigen::MatrixXd H(P + 1, P + 1);
  for (Eigen::Index j = 0; j <= P; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(theta(j)));
    Eigen::VectorXd plus = theta, minus = theta;
    plus(j) += h;
    minus(j) -= h;
    const Eigen::VectorXd gp = nb_score(design, plus.head(P), plus(P));
    const Eigen::VectorXd gm = nb_score(design, minus.head(P), minus(P));
    H.col(j) = (gp - gm) / (plus(j) - minus(j));
  }
  return 0.5 * (H + H.transpose());
}

NbFit fit_nb(const DesignMatrix& design, const std::optional<NbInit>& init,
             const NbOptions& options) {
  check_full_rank(design);
  const Eigen::Index P = design.cols();
  const double scale = rounding_scale(design);

  Eigen::VectorXd coef;
  double ln_alpha = 0.0;
  if (init) {
    if (init->coef.size() != P) throw UsageError("initial coefficient length mismatch");
    coef = init->coef;
    ln_alpha = init->ln_alpha;
  } else {
    const PoissonFit pois = fit_poisson(design);
    coef = pois.coef;
    ln_alpha = std::log(moment_alpha(design, fitted_means(design, coef)));
  }
  ln_alpha = std::clamp(ln_alpha, kLnAlphaMin, kLnAlphaMax);

  NbFit fit;
  fit.column_names = design.column_names;
  fit.n = static_cast<std::size_t>(design.rows());

  double ll = loglik_or_neg_inf(design, coef, ln_alpha);
  if (!std::isfinite(ll)) throw NumericalError("negative binomial likelihood is not finite at start");

  // ln_alpha sits on the lower clamp with the gradient pushing further out.
  auto pinned_low = [&](const Eigen::VectorXd& g) {
    return ln_alpha <= kLnAlphaMin && g(P) <= 0.0;
  };
  auto projected_norm = [&](const Eigen::VectorXd& g) {
    if (pinned_low(g) || (ln_alpha >= kLnAlphaMax && g(P) >= 0.0)) return g.head(P).norm();
    return g.norm();
  };

  Eigen::VectorXd grad = nb_score(design, coef, ln_alpha);
  double rel_change = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    fit.iterations = iter;
    // The ln_alpha score vanishes like alpha, so Newton crawls toward the
    // lower clamp; jump there whenever that does not lower the likelihood.
    if (ln_alpha > kLnAlphaMin && grad(P) < 0.0) {
      const double bound_ll = loglik_or_neg_inf(design, coef, kLnAlphaMin);
      if (bound_ll >= ll) {
        rel_change = (bound_ll - ll) / std::max(1.0, std::abs(ll));
        ln_alpha = kLnAlphaMin;
        ll = bound_ll;
        grad = nb_score(design, coef, ln_alpha);
        if (pinned_low(grad) && rel_change > options.rel_loglik_tol) continue;
      }
    }
    const Eigen::MatrixXd H = nb_hessian_fd(design, coef, ln_alpha);
    Eigen::VectorXd step = Eigen::VectorXd::Zero(P + 1);
    if (pinned_low(grad)) {
      step.head(P) = newton_direction(H.topLeftCorner(P, P), grad.head(P));
    } else {
      step = newton_direction(H, grad);
    }

    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd trial_coef = coef + t * step.head(P);
      const double trial_ln_alpha = std::clamp(ln_alpha + t * step(P), kLnAlphaMin, kLnAlphaMax);
      const double trial_ll = loglik_or_neg_inf(design, trial_coef, trial_ln_alpha);
      if (trial_ll >= ll ||
          (within_rounding(trial_ll, ll, scale) &&
           nb_score(design, trial_coef, trial_ln_alpha).norm() < grad.norm())) {
        rel_change = std::abs(trial_ll - ll) / std::max(1.0, std::abs(ll));
        coef = trial_coef;
        ln_alpha = trial_ln_alpha;
        ll = trial_ll;
        accepted = true;
        break;
      }
    }
    grad = nb_score(design, coef, ln_alpha);
    if (projected_norm(grad) < options.score_tol && rel_change < options.rel_loglik_tol) {
      fit.converged = true;
      break;
    }
    if (!accepted) break;
  }

  fit.coef = coef;
  fit.ln_alpha = ln_alpha;
  fit.loglik = ll;
  fit.aic = -2.0 * ll + 2.0 * static_cast<double>(P + 1);
  fit.score_norm = projected_norm(grad);
  fit.alpha_at_bound = ln_alpha <= kLnAlphaMin || ln_alpha >= kLnAlphaMax;
  if (!fit.converged && fit.score_norm < options.score_tol && rel_change < options.rel_loglik_tol) {
    fit.converged = true;
  }

  const Eigen::MatrixXd H = nb_hessian_fd(design, coef, ln_alpha);
  fit.cov = Eigen::MatrixXd::Constant(P + 1, P + 1, kNaN);
  if (fit.alpha_at_bound) {
    // Dispersion on the boundary: information for ln_alpha is degenerate, so
    // only the coefficient block is inverted.
    if (auto cov = inverse_information(H.topLeftCorner(P, P))) {
      fit.cov.topLeftCorner(P, P) = *cov;
      fit.cov_reliable = true;
    }
  } else if (auto cov = inverse_information(H)) {
    fit.cov = *cov;
    fit.cov_reliable = true;
  }
  return fit;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

WaldResult wald_from(double estimate, double se) {
  WaldResult w;
  w.estimate = estimate;
  w.se = se;
  w.z = estimate == 0.0 ? 0.0 : estimate / se;
  w.p_value = normal_two_sided_p(w.z);
  w.ci_low = estimate - kZ95 * se;
  w.ci_high = estimate + kZ95 * se;
  return w;
}

WaldResult wald(const NbFit& fit, std::size_t j) {
  if (j > static_cast<std::size_t>(fit.coef.size())) throw UsageError("parameter index out of range");
  if (!fit.cov_reliable) throw NumericalError("covariance is unreliable; Wald statistics unavailable");
  const auto idx = static_cast<Eigen::Index>(j);
  const double var = fit.cov(idx, idx);
  if (!(var >= 0.0)) throw NumericalError("no variance available for parameter " + std::to_string(j));
  const double est = j == static_cast<std::size_t>(fit.coef.size()) ? fit.ln_alpha : fit.coef(idx);
  return wald_from(est, std::sqrt(var));
}

WaldResult wald(const PoissonFit& fit, std::size_t j) {
  if (j >= static_cast<std::size_t>(fit.coef.size())) throw UsageError("parameter index out of range");
  const auto idx = static_cast<Eigen::Index>(j);
  const double var = fit.cov(idx, idx);
  if (!(var >= 0.0)) throw NumericalError("covariance is unreliable; Wald statistics unavailable");
  return wald_from(fit.coef(idx), std::sqrt(var));
}

std::string significance_stars(double p_value) {
  if (p_value < 0.001) return "***";
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

LrTest lr_test_overdispersion(const NbFit& nb, const PoissonFit& pois) {
  if (nb.n != pois.n) throw UsageError("likelihood ratio test needs fits on the same observations");
  LrTest t;
  t.statistic = std::max(0.0, 2.0 * (nb.loglik - pois.loglik));
  // P(χ²₁ ≥ s) = erfc(√(s/2)); the χ²₀ component contributes only at s = 0.
  t.p_value = 0.5 * std::erfc(std::sqrt(t.statistic / 2.0));
  return t;
}

double mae(const DesignMatrix& design, const Eigen::VectorXd& mu) {
  if (mu.size() != design.y.size() || mu.size() == 0) throw UsageError("MAE needs aligned, nonempty data");
  return (design.y - mu).cwiseAbs().mean();
}

double mae(const DesignMatrix& design, const NbFit& fit) {
  return mae(design, fitted_means(design, fit.coef));
}

void save_nb_fit(const std::filesystem::path& path, const NbFit& fit) {
  const auto P = fit.coef.size();
  const double ln_alpha_se = fit.cov.rows() > P ? std::sqrt(fit.cov(P, P)) : kNaN;
  nlohmann::json j;
  j["model"] = "negative_binomial_nb2";
  j["column_names"] = fit.column_names;
  j["coefficients"] = wald_table(fit.column_names, fit.coef, fit.cov);
  j["ln_alpha"] = {{"estimate", fit.ln_alpha}, {"se", ln_alpha_se}};
  j["alpha"] = fit.alpha();
  j["alpha_at_bound"] = fit.alpha_at_bound;
  j["cov"] = matrix_rows(fit.cov);
  j["cov_reliable"] = fit.cov_reliable;
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["n"] = fit.n;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["score_norm"] = fit.score_norm;
  write_json(path, j);
}

NbFit load_nb_fit(const std::filesystem::path& path) {
  const auto j = read_json(path);
  NbFit fit;
  fit.column_names = j.at("column_names").get<std::vector<std::string>>();
  std::vector<double> coef;
  for (const auto& row : j.at("coefficients")) coef.push_back(row.at("coef").get<double>());
  fit.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  fit.ln_alpha = j.at("ln_alpha").at("estimate").get<double>();
  fit.alpha_at_bound = j.at("alpha_at_bound").get<bool>();
  fit.cov = matrix_from_rows(j.at("cov"));
  fit.cov_reliable = j.at("cov_reliable").get<bool>();
  fit.loglik = j.at("loglik").get<double>();
  fit.aic = j.at("aic").get<double>();
  fit.n = j.at("n").get<std::size_t>();
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.at("iterations").get<int>();
  fit.score_norm = j.at("score_norm").get<double>();
  if (fit.column_names.size() != static_cast<std::size_t>(fit.coef.size()) ||
      fit.cov.rows() != fit.coef.size() + 1) {
    throw DataError("inconsistent dimensions in " + path.string());
  }
  return fit;
}

void save_poisson_fit(const std::filesystem::path& path, const PoissonFit& fit) {
  nlohmann::json j;
  j["model"] = "poisson";
  j["column_names"] = fit.column_names;
  j["coefficients"] = wald_table(fit.column_names, fit.coef, fit.cov);
  j["cov"] = matrix_rows(fit.cov);
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["n"] = fit.n;
  j["converged"] = fit.converged;
  j["diverged"] = fit.diverged;
  j["iterations"] = fit.iterations;
  j["score_norm"] = fit.score_norm;
  write_json(path, j);
}

PoissonFit load_poisson_fit(const std::filesystem::path& path) {
  const auto j = read_json(path);
  PoissonFit fit;
  fit.column_names = j.at("column_names").get<std::vector<std::string>>();
  std::vector<double> coef;
  for (const auto& row : j.at("coefficients")) coef.push_back(row.at("coef").get<double>());
  fit.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  fit.cov = matrix_from_rows(j.at("cov"));
  fit.loglik = j.at("loglik").get<double>();
  fit.aic = j.at("aic").get<double>();
  fit.n = j.at("n").get<std::size_t>();
  fit.converged = j.at("converged").get<bool>();
  fit.diverged = j.at("diverged").get<bool>();
  fit.iterations = j.at("iterations").get<int>();
  fit.score_norm = j.at("score_norm").get<double>();
  return fit;
}

}  // namespace topicreg
