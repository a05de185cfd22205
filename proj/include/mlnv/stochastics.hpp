#pragma once

// Normal-distribution kernel used by every solver: density, CDF, quantile,
// the unit normal linear-loss integral, partial expectations and a
// counter-based random stream for reproducible demand sampling.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mlnv {

double std_pdf(double z);

/// Standard normal CDF. Throws DomainError on non-finite input.
double std_cdf(double z);

/// Inverse of std_cdf. Requires 0 < p < 1 (DomainError otherwise); callers
/// clamp fractiles before calling.
double std_quantile(double p);

/// Right-hand unit normal linear-loss integral
///   R(u) = E[(Z - u)^+] = phi(u) - u * (1 - Phi(u)).
/// Nonnegative, strictly decreasing and convex. R(-u) = R(u) + u.
double unit_loss(double u);

class NormalDist {
 public:
  NormalDist(double mu, double sigma);

  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;

  friend bool operator==(const NormalDist&, const NormalDist&) = default;

 private:
  double mu_;
  double sigma_;
};

struct PartialExpectations {
  double overage;   // E[(q - X)^+]
  double underage;  // E[(X - q)^+]
};

/// Untruncated-normal partial expectations at order level q.
PartialExpectations partial_expectations(const NormalDist& d, double q);

/// Counter-based stream: draw k is a pure function of (seed, stream id, k),
/// so results do not depend on evaluation order or thread schedule.
class RngStream {
 public:
  constexpr RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t position = 0) noexcept
      : seed_(seed), stream_id_(stream_id), position_(position) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return position_; }

  /// 64 random bits for absolute draw index `index`.
  std::uint64_t bits_at(std::uint64_t index) const noexcept;
  /// Uniform on the open interval (0, 1) for the draw `offset` past position().
  double uniform(std::uint64_t offset = 0) const noexcept;

  [[nodiscard]] RngStream advanced(std::uint64_t n) const noexcept {
    return RngStream(seed_, stream_id_, position_ + n);
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_;
};

/// Demand draw at stream offset `offset`: N(mu, sigma) by inversion, clipped at 0.
double demand_draw(const NormalDist& d, const RngStream& rng, std::uint64_t offset = 0);

/// n unclipped draws from N(mu, sigma) by inversion, one uniform per draw.
std::vector<double> sample_normal(const NormalDist& d, const RngStream& rng, std::size_t n);

/// n demand draws: N(mu, sigma) clipped at zero from below. Consumes n
/// positions of the stream; continue with rng.advanced(n).
std::vector<double> sample_demand(const NormalDist& d, const RngStream& rng, std::size_t n);

}  // namespace mlnv
