#include "ladder/pchip.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ladder/error.hpp"

namespace ladder {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Non-centered three-point slope estimate for the boundary knots, clipped so
// the end segment stays monotone (Fritsch-Carlson edge rule).
double edge_slope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (sign(m) != sign(d0)) {
    m = 0.0;
  } else if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0)) {
    m = 3.0 * d0;
  }
  return m;
}

}  // namespace

Pchip::Pchip(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const std::size_t n = xs_.size();
  if (n < 2 || ys_.size() != n) {
    throw Error(Errc::too_few_points, "pchip needs at least two knots");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
      throw Error(Errc::non_finite, "pchip knot is not finite");
    }
    if (i > 0 && !(xs_[i] > xs_[i - 1])) {
      throw Error(Errc::bad_params, "pchip knots must be strictly ascending");
    }
  }

  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs_[i + 1] - xs_[i];
    d[i] = (ys_[i + 1] - ys_[i]) / h[i];
  }

  slopes_.assign(n, 0.0);
  if (n == 2) {
    slopes_[0] = slopes_[1] = d[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || sign(d[i - 1]) != sign(d[i])) {
      slopes_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  slopes_[0] = edge_slope(h[0], h[1], d[0], d[1]);
  slopes_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

double Pchip::eval(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double h = xs_[k + 1] - xs_[k];
  const double t = (x - xs_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * ys_[k] + h10 * h * slopes_[k] + h01 * ys_[k + 1] +
         h11 * h * slopes_[k + 1];
}

double Pchip::integrate(double a, double b) const {
  if (a == b) return 0.0;
  if (a > b) return -integrate(b, a);

  double total = 0.0;
  // Flat extensions outside the knot range.
  if (a < xs_.front()) {
    total += (std::min(b, xs_.front()) - a) * ys_.front();
    a = xs_.front();
    if (a >= b) return total;
  }
  if (b > xs_.back()) {
    total += (b - std::max(a, xs_.back())) * ys_.back();
    b = xs_.back();
    if (a >= b) return total;
  }
  total += integral_from_start(b) - integral_from_start(a);
  return total;
}

double Pchip::integral_from_start(double x) const {
  // Antiderivatives of the Hermite basis on the unit interval.
  const auto basis_int = [](double t, double& H00, double& H10, double& H01,
                            double& H11) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    H00 = 0.5 * t4 - t3 + t;
    H10 = 0.25 * t4 - (2.0 / 3.0) * t3 + 0.5 * t2;
    H01 = -0.5 * t4 + t3;
    H11 = 0.25 * t4 - t3 / 3.0;
  };

  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < xs_.size(); ++k) {
    if (x <= xs_[k]) break;
    const double h = xs_[k + 1] - xs_[k];
    const double t_hi = std::min(1.0, (x - xs_[k]) / h);
    double H00, H10, H01, H11;
    basis_int(t_hi, H00, H10, H01, H11);
    acc += h * (H00 * ys_[k] + H10 * h * slopes_[k] + H01 * ys_[k + 1] +
                H11 * h * slopes_[k + 1]);
  }
  return acc;
}

}  // namespace ladder
