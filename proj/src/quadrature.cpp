#include "qmeas/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "qmeas/errors.hpp"

namespace qmeas {

GaussLegendre::GaussLegendre(int order) {
  if (order < 1) throw ArgumentError("quadrature order must be positive");
  nodes.resize(static_cast<std::size_t>(order));
  weights.resize(static_cast<std::size_t>(order));
  // Newton iteration on P_n from the Chebyshev initial guess.
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = order == 1 ? x : p1;
      const double pm = order == 1 ? 1.0 : p0;
      dp = order * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  static const GaussLegendre gl16(16);
  std::optional<GaussLegendre> other;
  const GaussLegendre& local = order == 16 ? gl16 : other.emplace(order);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t k = 0; k < local.nodes.size(); ++k) sum += local.weights[k] * f(mid + 0.5 * h * local.nodes[k]);
  }
  return 0.5 * h * sum;
}

namespace {
constexpr int kTablePanels = 256;
}

Bump::Bump(double lo, double hi, double height) : lo_(lo), hi_(hi), height_(height) {
  if (!(hi > lo)) throw ArgumentError("bump support must have positive width");
  table_x_.resize(kTablePanels + 1);
  table_f_.resize(kTablePanels + 1);
  const double h = (hi - lo) / kTablePanels;
  table_x_[0] = lo;
  table_f_[0] = 0.0;
  for (int p = 0; p < kTablePanels; ++p) {
    table_x_[p + 1] = lo + (p + 1) * h;
    table_f_[p + 1] = table_f_[p] + integrate([this](double x) { return (*this)(x); }, lo + p * h, lo + (p + 1) * h, 1, 16);
  }
  total_ = table_f_.back();
}

double Bump::operator()(double x) const {
  if (x <= lo_ || x >= hi_) return 0.0;
  const double u = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return height_ * std::exp(1.0 - 1.0 / s);
}

double Bump::derivative(double x) const {
  if (x <= lo_ || x >= hi_) return 0.0;
  const double u = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return (*this)(x) * (-2.0 * u / (s * s)) * (2.0 / (hi_ - lo_));
}

double Bump::antiderivative(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return total_;
  const double h = (hi_ - lo_) / kTablePanels;
  const int p = std::min(kTablePanels - 1, static_cast<int>((x - lo_) / h));
  return table_f_[static_cast<std::size_t>(p)] +
         integrate([this](double y) { return (*this)(y); }, table_x_[static_cast<std::size_t>(p)], x, 1, 16);
}

double Bump::integral_of_square() const {
  return integrate([this](double x) { const double v = (*this)(x); return v * v; }, lo_, hi_, kTablePanels, 16);
}

Bump Bump::with_integral(double target) const {
  return Bump(lo_, hi_, height_ * target / total_);
}

Bump Bump::normalized() const {
  return Bump(lo_, hi_, height_ / std::sqrt(integral_of_square()));
}

Bump Bump::rescaled(double scale, double amp) const {
  return Bump(lo_ / scale, hi_ / scale, height_ * amp);
}

}  // namespace qmeas
