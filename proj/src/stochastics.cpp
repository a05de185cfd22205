#include "mlnv/stochastics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlnv/errors.hpp"

namespace mlnv {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2 pi)
constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(what) + ": non-finite argument");
  }
}

// Upper tail 1 - Phi(z), accurate for large positive z.
double upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

// Rational approximation of the lower-tail quantile (P. J. Acklam), relative
// error about 1.15e-9 before refinement. Valid for 0 < p <= 0.5.
double quantile_lower_initial(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double quantile_lower(double p) {
  double z = quantile_lower_initial(p);
  // One Newton step on Phi(z) = p. For p <= 0.5, z <= 0 and Phi(z) is
  // evaluated through erfc without cancellation.
  const double err = 0.5 * std::erfc(-z * kInvSqrt2) - p;
  z -= err / std_pdf(z);
  return z;
}

// For u >= 5: R(u) = phi(u) * T / (u + T) with T = 1/(u + 2/(u + 3/(u + ...))),
// which avoids the cancellation in phi(u) - u Q(u).
double unit_loss_tail(double u) {
  double t = 0.0;
  for (int k = 60; k >= 2; --k) {
    t = k / (u + t);
  }
  t = 1.0 / (u + t);
  return std_pdf(u) * t / (u + t);
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

double std_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double std_cdf(double z) {
  require_finite(z, "std_cdf");
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

double std_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_quantile: probability must lie in (0, 1), got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  if (p < 0.5) return quantile_lower(p);
  return -quantile_lower(1.0 - p);
}

double unit_loss(double u) {
  require_finite(u, "unit_loss");
  if (u >= 5.0) return unit_loss_tail(u);
  return std::max(0.0, std_pdf(u) - u * upper_tail(u));
}

NormalDist::NormalDist(double mu, double sigma) : mu_(mu), sigma_(sigma) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) {
    throw DomainError("NormalDist: require finite mu and sigma > 0");
  }
}

double NormalDist::pdf(double x) const { return std_pdf((x - mu_) / sigma_) / sigma_; }

double NormalDist::cdf(double x) const { return std_cdf((x - mu_) / sigma_); }

double NormalDist::quantile(double p) const { return mu_ + sigma_ * std_quantile(p); }

PartialExpectations partial_expectations(const NormalDist& d, double q) {
  require_finite(q, "partial_expectations");
  const double z = (q - d.mu()) / d.sigma();
  // R(-z) = R(z) + z keeps the overage accurate in both tails.
  return {d.sigma() * unit_loss(-z), d.sigma() * unit_loss(z)};
}

std::uint64_t RngStream::bits_at(std::uint64_t index) const noexcept {
  const std::uint64_t key = mix64(seed_ ^ mix64(stream_id_ * kGolden + 0x632be59bd9b4e019ULL));
  return mix64(key + (index + 1) * kGolden);
}

double RngStream::uniform(std::uint64_t offset) const noexcept {
  // 53 random bits centred in their cell: never exactly 0 or 1.
  return (static_cast<double>(bits_at(position_ + offset) >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> sample_normal(const NormalDist& d, const RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = d.mu() + d.sigma() * std_quantile(rng.uniform(k));
  }
  return out;
}

double demand_draw(const NormalDist& d, const RngStream& rng, std::uint64_t offset) {
  return std::max(0.0, d.mu() + d.sigma() * std_quantile(rng.uniform(offset)));
}

std::vector<double> sample_demand(const NormalDist& d, const RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = demand_draw(d, rng, k);
  return out;
}

}  // namespace mlnv
