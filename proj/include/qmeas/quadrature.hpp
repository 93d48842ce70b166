#pragma once

#include <functional>
#include <vector>

namespace qmeas {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  explicit GaussLegendre(int order);
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Composite Gauss-Legendre integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64, int order = 16);

/// Smooth compactly supported bump h * exp(1 - 1/(1 - u^2)) on (lo, hi), u the rescaled
/// coordinate in (-1, 1). Peak value h at the midpoint; identically zero outside.
class Bump {
 public:
  Bump() = default;
  Bump(double lo, double hi, double height);

  double operator()(double x) const;
  double derivative(double x) const;
  /// Integral from lo to x.
  double antiderivative(double x) const;
  double integral() const { return total_; }
  double integral_of_square() const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double height() const { return height_; }
  double width() const { return hi_ - lo_; }
  double center() const { return 0.5 * (lo_ + hi_); }

  /// Same shape with its height chosen so that the integral equals `target`.
  Bump with_integral(double target) const;
  /// Same shape with its height chosen so that the integral of the square is 1.
  Bump normalized() const;
  /// x -> scale * f(scale * x) reshaped: support divided by `scale`, height multiplied by `amp`.
  Bump rescaled(double scale, double amp) const;

 private:
  double lo_ = 0.0, hi_ = 1.0, height_ = 1.0;
  double total_ = 0.0;
  std::vector<double> table_x_, table_f_;  // cumulative integral at panel boundaries
};

}  // namespace qmeas
