#ifndef LADDER_PCHIP_HPP
#define LADDER_PCHIP_HPP

#include <vector>

namespace ladder {

// Monotonicity-preserving piecewise-cubic Hermite interpolant
// (Fritsch-Carlson slopes, weighted-harmonic-mean form). Knot abscissae must
// be strictly ascending. If the ordinates are monotone, so is the
// interpolant. Outside the knot range the curve extends flat at the endpoint
// ordinate.
class Pchip {
 public:
  Pchip(std::vector<double> xs, std::vector<double> ys);

  double eval(double x) const;

  // Exact integral of the interpolant (with its flat extension) over [a, b].
  double integrate(double a, double b) const;

  double x_min() const { return xs_.front(); }
  double x_max() const { return xs_.back(); }

 private:
  // Integral from xs_[0] to x, x within the knot range.
  double integral_from_start(double x) const;

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> slopes_;
};

}  // namespace ladder

#endif  // LADDER_PCHIP_HPP
