#include "smoother.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "divergence.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace leadtime {
namespace {

constexpr std::size_t kNullSpace = 2;
constexpr int kShuffles = 199;
constexpr std::uint64_t kShuffleSeed = 0x6b2d636865636bULL;
// Residual sums of squares below this fraction of |y|^2 are rounding noise.
constexpr double kNoiseFloor = 1e-20;

// Cubic B-spline basis on [0, 365] with equally spaced knots, evaluated at
// every lead.
Eigen::MatrixXd bspline_basis(std::size_t k) {
  const int degree = 3;
  const int intervals = int(k) - degree;
  const double h = double(kMaxLead) / intervals;
  std::vector<double> knots(k + degree + 1);
  for (std::size_t i = 0; i < knots.size(); ++i) knots[i] = (double(i) - degree) * h;

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(kSupportSize, Eigen::Index(k));
  for (int lead = 0; lead < int(kSupportSize); ++lead) {
    const double x = double(lead);
    int span = std::min(intervals - 1, int(std::floor(x / h)));
    span += degree;  // knot index with knots[span] <= x < knots[span + 1]
    // Cox-de Boor triangle
    double n[degree + 1] = {1.0, 0.0, 0.0, 0.0};
    double left[degree + 1], right[degree + 1];
    for (int j = 1; j <= degree; ++j) {
      left[j] = x - knots[span + 1 - j];
      right[j] = knots[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double temp = n[r] / (right[r + 1] + left[j - r]);
        n[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      n[j] = saved;
    }
    for (int j = 0; j <= degree; ++j) basis(lead, span - degree + j) = n[j];
  }
  return basis;
}

// Everything about a basis size that does not depend on the data or lambda.
// With G = B'B = LL' and L^-1 S L^-T = U diag(eigen) U', coefficients in the
// rotated space shrink as c / (1 + lambda eigen).
struct Basis {
  std::size_t k = 0;
  Eigen::MatrixXd project;  // U' L^-1 B', k x 366
  Eigen::MatrixXd expand;   // B L^-T U, 366 x k
  Eigen::VectorXd eigen;    // penalty eigenvalues, null space zeroed
};

std::shared_ptr<const Basis> build_basis(std::size_t k) {
  const Eigen::MatrixXd b = bspline_basis(k);
  const Eigen::Index kk = Eigen::Index(k);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(kk - 2, kk);
  for (Eigen::Index i = 0; i + 2 < kk; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  const Eigen::MatrixXd s = d.transpose() * d;
  const Eigen::LLT<Eigen::MatrixXd> llt(b.transpose() * b);
  const Eigen::MatrixXd l_inv =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(kk, kk));
  const Eigen::MatrixXd a = l_inv * s * l_inv.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));

  auto out = std::make_shared<Basis>();
  out->k = k;
  out->eigen = eig.eigenvalues();
  // Ascending order: the null space occupies the first two slots.
  for (std::size_t i = 0; i < kNullSpace; ++i) out->eigen[Eigen::Index(i)] = 0.0;
  for (Eigen::Index i = 0; i < kk; ++i) out->eigen[i] = std::max(out->eigen[i], 0.0);
  const Eigen::MatrixXd u = eig.eigenvectors();
  out->project = u.transpose() * l_inv * b.transpose();
  out->expand = b * l_inv.transpose() * u;
  return out;
}

std::shared_ptr<const Basis> basis_for(std::size_t k) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const Basis>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(k); it != cache.end()) return it->second;
  }
  auto built = build_basis(k);
  std::lock_guard lock(mutex);
  return cache.emplace(k, std::move(built)).first->second;
}

void check_basis_size(std::size_t k) {
  if (k < 4) fail(ErrorCode::kBasisTooSmall, "basis dimension " + std::to_string(k) + " < 4");
  if (k > kSupportSize)
    fail(ErrorCode::kInvalidArgument, "basis dimension above 366");
}

// Data-dependent pieces for one basis.
struct Problem {
  std::shared_ptr<const Basis> basis;
  Eigen::VectorXd y;
  Eigen::VectorXd c;
  double outside = 0.0;  // residual sum of squares outside the spline span
  double floor = 0.0;

  Problem(const DailyPmf& x, std::size_t k) : basis(basis_for(k)), y(kSupportSize) {
    for (int lead = 0; lead < int(kSupportSize); ++lead)
      y[lead] = std::log(x[std::size_t(lead)] + kLogShareFloor);
    c = basis->project * y;
    outside = (y - basis->expand * c).squaredNorm();
    floor = kNoiseFloor * (1.0 + y.squaredNorm());
  }

  double reml(double lambda) const {
    const Eigen::VectorXd& e = basis->eigen;
    double rss = outside, log_det = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      const double shrink = lambda * e[i];
      rss += c[i] * c[i] * shrink / (1.0 + shrink);
      log_det += std::log1p(shrink);
    }
    const double n = double(kSupportSize);
    const double k = double(basis->k);
    rss = std::max(rss, floor);
    return (n - double(kNullSpace)) * std::log(rss) + log_det -
           (k - double(kNullSpace)) * std::log(lambda);
  }

  SmoothFit fit(double lambda) const {
    const Eigen::VectorXd& e = basis->eigen;
    Eigen::VectorXd shrunk(c.size());
    double edf = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      shrunk[i] = c[i] / (1.0 + lambda * e[i]);
      edf += 1.0 / (1.0 + lambda * e[i]);
    }
    const Eigen::VectorXd eta = basis->expand * shrunk;
    SmoothFit out;
    out.k_used = basis->k;
    out.lambda = lambda;
    out.edf = edf;
    const double top = eta.maxCoeff();
    double total = 0.0;
    for (int lead = 0; lead < int(kSupportSize); ++lead) {
      out.fitted_pmf[std::size_t(lead)] = std::exp(eta[lead] - top);
      total += out.fitted_pmf[std::size_t(lead)];
    }
    for (double& v : out.fitted_pmf) v /= total;
    return out;
  }

  Eigen::VectorXd residuals(double lambda) const {
    const Eigen::VectorXd& e = basis->eigen;
    Eigen::VectorXd shrunk(c.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) shrunk[i] = c[i] / (1.0 + lambda * e[i]);
    return y - basis->expand * shrunk;
  }

  // Grid search on log10 lambda, then golden section around the best point.
  double select_lambda() const {
    const double lo = std::log10(kLambdaMin), hi = std::log10(kLambdaMax);
    const double step = (hi - lo) / (kLambdaGrid - 1);
    auto score = [&](double t) { return reml(std::pow(10.0, t)); };
    int best = 0;
    double best_score = score(lo);
    for (int i = 1; i < kLambdaGrid; ++i) {
      const double s = score(lo + i * step);
      if (s < best_score) {
        best_score = s;
        best = i;
      }
    }
    double a = lo + std::max(0, best - 1) * step;
    double b = lo + std::min(kLambdaGrid - 1, best + 1) * step;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double f1 = score(x1), f2 = score(x2);
    while (b - a > 1e-6) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - ratio * (b - a);
        f1 = score(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + ratio * (b - a);
        f2 = score(x2);
      }
    }
    double t = 0.5 * (a + b);
    // Keep the grid point if refinement did not improve on it.
    if (score(t) > best_score) t = lo + best * step;
    return std::pow(10.0, t);
  }
};

double lag1_autocorrelation(const Eigen::VectorXd& r) {
  const double mean = r.mean();
  double num = 0.0, den = 0.0;
  for (Eigen::Index t = 0; t < r.size(); ++t) {
    const double d = r[t] - mean;
    den += d * d;
    if (t + 1 < r.size()) num += d * (r[t + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

BasisCheck check_residuals(const Eigen::VectorXd& residuals, std::size_t k, double floor) {
  BasisCheck out;
  if (residuals.squaredNorm() <= floor) return out;
  out.autocorrelation = lag1_autocorrelation(residuals);
  if (!(out.autocorrelation > 0.2)) return out;
  Rng rng(kShuffleSeed, k);
  Eigen::VectorXd shuffled = residuals;
  int at_least = 0;
  for (int s = 0; s < kShuffles; ++s) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
    if (lag1_autocorrelation(shuffled) >= out.autocorrelation) ++at_least;
  }
  out.p_value = double(1 + at_least) / double(kShuffles + 1);
  out.passed = !(out.p_value < 0.05);
  return out;
}

}  // namespace

SmoothFit smooth_pmf_fixed(const DailyPmf& x, std::size_t k, double lambda) {
  check_basis_size(k);
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::kInvalidArgument, "lambda must be positive");
  return Problem(x, k).fit(lambda);
}

double reml_score(const DailyPmf& x, std::size_t k, double lambda) {
  check_basis_size(k);
  return Problem(x, k).reml(lambda);
}

BasisCheck basis_check(const DailyPmf& x, const SmoothFit& fit) {
  const Problem problem(x, fit.k_used);
  return check_residuals(problem.residuals(fit.lambda), fit.k_used, problem.floor);
}

SmoothFit smooth_pmf(const DailyPmf& x, std::size_t k_init, std::size_t k_max) {
  check_basis_size(k_init);
  check_basis_size(k_max);
  if (k_init > k_max) fail(ErrorCode::kInvalidArgument, "k_init exceeds k_max");
  std::size_t k = k_init;
  while (true) {
    const Problem problem(x, k);
    const double lambda = problem.select_lambda();
    SmoothFit fit = problem.fit(lambda);
    fit.k_check_passed = check_residuals(problem.residuals(lambda), k, problem.floor).passed;
    if (fit.k_check_passed || k >= k_max) return fit;
    k = std::min(2 * k, k_max);
  }
}

std::pair<double, double> score_smoother(const SmoothFit& fit, const DailyPmf& x) {
  return {crps(cdf(fit.fitted_pmf), x), kld(x.mass(), fit.fitted_pmf)};
}

}  // namespace leadtime
