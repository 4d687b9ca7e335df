// Copyright 2026 The flowcodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowcodec/core.hpp"

namespace flowcodec {

inline constexpr double kPsnrCap = 99.0;

// PSNR -----------------------------------------------------------------------

inline double psnr_from_sse(double sse, double count) {
  if (sse == 0.0) return kPsnrCap;
  return 10.0 * std::log10(255.0 * 255.0 / (sse / count));
}

inline double plane_sse(const Plane& a, const Plane& b) {
  if (a.width != b.width || a.height != b.height) {
    throw InputError("PSNR dimension mismatch: " + std::to_string(a.width) + "x" +
                     std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height));
  }
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const int d = static_cast<int>(a.data[i]) - b.data[i];
    sse += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sse);
}

inline double psnr(const Plane& a, const Plane& b) {
  return psnr_from_sse(plane_sse(a, b), static_cast<double>(a.data.size()));
}

struct FramePsnr {
  double y = 0.0;
  double u = 0.0;
  double v = 0.0;
  double combined = 0.0;  // MSE pooled over all samples of the three planes
};

inline FramePsnr psnr(const Frame& a, const Frame& b) {
  FramePsnr out;
  double sse_total = 0.0;
  double count_total = 0.0;
  double* dst[] = {&out.y, &out.u, &out.v};
  for (PlaneId id : kAllPlanes) {
    const double sse = plane_sse(a.plane(id), b.plane(id));
    const double n = static_cast<double>(a.plane(id).data.size());
    *dst[static_cast<int>(id)] = psnr_from_sse(sse, n);
    sse_total += sse;
    count_total += n;
  }
  out.combined = psnr_from_sse(sse_total, count_total);
  return out;
}

// End-point error ------------------------------------------------------------

inline double epe(const DenseFlowField& a, const DenseFlowField& b) {
  if (a.width != b.width || a.height != b.height) {
    throw InputError("EPE dimension mismatch: " + std::to_string(a.width) + "x" +
                     std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.vectors.size(); ++i) {
    sum += std::hypot(static_cast<double>(a.vectors[i].u) - b.vectors[i].u,
                      static_cast<double>(a.vectors[i].v) - b.vectors[i].v);
  }
  return sum / static_cast<double>(a.vectors.size());
}

// Aggregation ----------------------------------------------------------------

/// Lower median (element (n-1)/2 after sorting).
inline double lower_median(std::vector<double> xs) {
  if (xs.empty()) throw InputError("median of an empty set");
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>((xs.size() - 1) / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  return *mid;
}

/// Per-q median of rates and, independently, of PSNRs. Every curve must
/// carry every q of the first curve's grid.
inline RDCurve median_aggregate(const std::vector<RDCurve>& curves) {
  if (curves.empty()) throw InputError("no curves to aggregate");
  std::vector<int> grid;
  for (const auto& p : curves.front()) grid.push_back(p.q);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  RDCurve out;
  for (int q : grid) {
    std::vector<double> rates, psnrs;
    for (std::size_t i = 0; i < curves.size(); ++i) {
      auto it = std::find_if(curves[i].begin(), curves[i].end(),
                             [q](const RDPoint& p) { return p.q == q; });
      if (it == curves[i].end()) {
        throw InputError("curve " + std::to_string(i) + " has no point at q=" +
                         std::to_string(q));
      }
      rates.push_back(it->rate);
      psnrs.push_back(it->psnr);
    }
    out.push_back({q, lower_median(rates), lower_median(psnrs)});
  }
  return out;
}

// Bjontegaard deltas ---------------------------------------------------------

/// Cubic in the normalised variable t = (x - centre) / scale.
struct CubicFit {
  std::array<double, 4> coeffs{};  // c0 + c1 t + c2 t^2 + c3 t^3
  double centre = 0.0;
  double scale = 1.0;

  double operator()(double x) const {
    const double t = (x - centre) / scale;
    return coeffs[0] + t * (coeffs[1] + t * (coeffs[2] + t * coeffs[3]));
  }

  /// Definite integral over [lo, hi] via the antiderivative.
  double integrate(double lo, double hi) const {
    auto anti = [this](double t) {
      return t * (coeffs[0] + t * (coeffs[1] / 2 + t * (coeffs[2] / 3 + t * coeffs[3] / 4)));
    };
    return scale * (anti((hi - centre) / scale) - anti((lo - centre) / scale));
  }
};

/// Least-squares cubic through (x, y) by Householder QR on centred, scaled
/// abscissae. With four points this interpolates.
inline CubicFit fit_cubic(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 4 || y.size() != n) throw InputError("cubic fit needs at least 4 points");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  CubicFit fit;
  fit.centre = 0.5 * (*lo + *hi);
  fit.scale = 0.5 * (*hi - *lo);
  if (!(fit.scale > 0.0)) throw InputError("cubic fit needs distinct abscissae");

  // A is n x 4, column-major.
  std::vector<double> a(n * 4), b(y.begin(), y.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (x[i] - fit.centre) / fit.scale;
    a[i] = 1.0;
    a[n + i] = t;
    a[2 * n + i] = t * t;
    a[3 * n + i] = t * t * t;
  }
  std::vector<double> v(n);
  for (std::size_t k = 0; k < 4; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += a[k * n + i] * a[k * n + i];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw InputError("cubic fit is rank deficient");
    const double alpha = a[k * n + k] > 0 ? -norm : norm;
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = k; i < n; ++i) v[i] = a[k * n + i];
    v[k] -= alpha;
    double vv = 0.0;
    for (std::size_t i = k; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    for (std::size_t j = k; j < 4; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i] * a[j * n + i];
      const double f = 2.0 * dot / vv;
      for (std::size_t i = k; i < n; ++i) a[j * n + i] -= f * v[i];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < n; ++i) dot += v[i] * b[i];
    const double f = 2.0 * dot / vv;
    for (std::size_t i = k; i < n; ++i) b[i] -= f * v[i];
  }
  for (int k = 3; k >= 0; --k) {
    double s = b[k];
    for (int j = k + 1; j < 4; ++j) s -= a[j * n + k] * fit.coeffs[j];
    const double diag = a[k * n + k];
    if (std::fabs(diag) < 1e-12) throw InputError("cubic fit is rank deficient");
    fit.coeffs[k] = s / diag;
  }
  return fit;
}

namespace detail {

struct Axes {
  std::vector<double> x, y;
};

inline void check_curve(const RDCurve& c, const char* name) {
  if (c.size() < 4) {
    throw InputError(std::string(name) + " curve has " + std::to_string(c.size()) +
                     " points; BD metrics need at least 4");
  }
  for (const auto& p : c) {
    if (!(p.rate > 0.0)) throw InputError(std::string(name) + " curve has a non-positive rate");
    if (!std::isfinite(p.psnr)) throw InputError(std::string(name) + " curve has non-finite PSNR");
  }
}

/// Average of (test - reference) over the overlap of the two fitted x ranges.
inline double average_difference(const Axes& ref, const Axes& test) {
  const double lo = std::max(*std::min_element(ref.x.begin(), ref.x.end()),
                             *std::min_element(test.x.begin(), test.x.end()));
  const double hi = std::min(*std::max_element(ref.x.begin(), ref.x.end()),
                             *std::max_element(test.x.begin(), test.x.end()));
  if (!(hi > lo)) throw InputError("RD curves do not overlap; refusing to extrapolate");
  const CubicFit pr = fit_cubic(ref.x, ref.y);
  const CubicFit pt = fit_cubic(test.x, test.y);
  return (pt.integrate(lo, hi) - pr.integrate(lo, hi)) / (hi - lo);
}

}  // namespace detail

/// Average rate difference at equal PSNR, in percent. Negative means the test
/// curve needs fewer bits.
inline double bd_rate(const RDCurve& reference, const RDCurve& test) {
  detail::check_curve(reference, "reference");
  detail::check_curve(test, "test");
  auto axes = [](const RDCurve& c) {
    detail::Axes a;
    for (const auto& p : c) {
      a.x.push_back(p.psnr);
      a.y.push_back(std::log10(p.rate));
    }
    return a;
  };
  const double avg = detail::average_difference(axes(reference), axes(test));
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

/// Average PSNR difference at equal rate, in dB. Positive means the test
/// curve has higher quality.
inline double bd_psnr(const RDCurve& reference, const RDCurve& test) {
  detail::check_curve(reference, "reference");
  detail::check_curve(test, "test");
  auto axes = [](const RDCurve& c) {
    detail::Axes a;
    for (const auto& p : c) {
      a.x.push_back(std::log10(p.rate));
      a.y.push_back(p.psnr);
    }
    return a;
  };
  return detail::average_difference(axes(reference), axes(test));
}

}  // namespace flowcodec
