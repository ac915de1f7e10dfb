#pragma once

#include "robusthedge/errors.hpp"

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace robusthedge {

/// Upper concave envelope of a function sampled on a strictly increasing grid,
/// stored as its hull vertices and evaluated by linear interpolation.
template <typename Scalar>
class ConcaveEnvelope {
 public:
  ConcaveEnvelope() = default;
  ConcaveEnvelope(std::vector<Scalar> xs, std::vector<Scalar> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {}

  const std::vector<Scalar>& xs() const { return xs_; }
  const std::vector<Scalar>& ys() const { return ys_; }
  Scalar lower() const { return xs_.front(); }
  Scalar upper() const { return xs_.back(); }
  bool covers(const Scalar& x) const { return !xs_.empty() && x >= xs_.front() && x <= xs_.back(); }

  Scalar operator()(const Scalar& x) const {
    const std::size_t i = piece(x);
    if (i + 1 == xs_.size()) return ys_.back();
    const Scalar lambda = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    return ys_[i] + lambda * (ys_[i + 1] - ys_[i]);
  }

  /// Slope of the piece to the right of x; requires x < upper().
  Scalar right_slope(const Scalar& x) const {
    if (!(x < upper())) throw DomainError("no right slope at the upper end of the envelope");
    const std::size_t i = piece(x);
    return slope(i);
  }

  /// Slope of the piece to the left of x; requires x > lower().
  Scalar left_slope(const Scalar& x) const {
    if (!(x > lower())) throw DomainError("no left slope at the lower end of the envelope");
    std::size_t i = piece(x);
    if (i > 0 && x == xs_[i]) --i;
    if (i + 1 == xs_.size()) --i;
    return slope(i);
  }

  /// Largest absolute slope over all hull pieces.
  Scalar max_abs_slope() const {
    Scalar best{0};
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
      const Scalar s = slope(i);
      best = std::max(best, s < Scalar{0} ? Scalar{-s} : s);
    }
    return best;
  }

 private:
  Scalar slope(std::size_t i) const { return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]); }

  // Index i of the piece [x_i, x_{i+1}) holding x; last vertex maps to size-1.
  std::size_t piece(const Scalar& x) const {
    if (!covers(x)) throw DomainError("envelope evaluated outside its grid");
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    return static_cast<std::size_t>(it - xs_.begin()) - 1;
  }

  std::vector<Scalar> xs_;
  std::vector<Scalar> ys_;
};

/// Monotone-chain upper hull over (x_i, y_i), x strictly increasing.
/// Collinear vertices are kept.
template <typename Scalar>
ConcaveEnvelope<Scalar> upper_concave_envelope(std::span<const Scalar> x, std::span<const Scalar> y) {
  if (x.empty() || x.size() != y.size()) throw DomainError("envelope needs a nonempty grid with one value per point");
  std::vector<Scalar> hx;
  std::vector<Scalar> hy;
  hx.reserve(x.size());
  hy.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0 && !(x[i] > x[i - 1])) throw DomainError("envelope grid must be strictly increasing");
    // Drop the last vertex while it lies strictly below the chord to the new point.
    while (hx.size() >= 2) {
      const std::size_t n = hx.size();
      const Scalar cross = (hx[n - 1] - hx[n - 2]) * (y[i] - hy[n - 2]) - (hy[n - 1] - hy[n - 2]) * (x[i] - hx[n - 2]);
      if (cross > Scalar{0}) {
        hx.pop_back();
        hy.pop_back();
      } else {
        break;
      }
    }
    hx.push_back(x[i]);
    hy.push_back(y[i]);
  }
  return ConcaveEnvelope<Scalar>(std::move(hx), std::move(hy));
}

template <typename Scalar>
ConcaveEnvelope<Scalar> upper_concave_envelope(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  return upper_concave_envelope<Scalar>(std::span<const Scalar>(x), std::span<const Scalar>(y));
}

}  // namespace robusthedge
