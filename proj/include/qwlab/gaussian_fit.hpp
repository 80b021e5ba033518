#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qwlab/lattice.hpp"

namespace qwlab {

/// Result of a least-squares fit of A*exp(-(x-c)^2/(2 w^2)) to a sampled
/// distribution. `converged=false` marks the iteration cap being reached, a
/// distinct outcome from a converged (possibly poor, large-`residual`) fit.
struct GaussianFit {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 0.0;   // clamped from below at 0.5 sites
  double residual = 0.0;  // RMS misfit
  bool converged = false;
  int iterations = 0;
};

inline constexpr double gaussian_min_width = 0.5;

/// Levenberg-Marquardt fit, seeded from the distribution moments.
inline GaussianFit fit_gaussian(const std::vector<double>& p,
                                const std::vector<double>& x,
                                int max_iterations = 500) {
  if (p.size() != x.size() || p.size() < 3) {
    throw std::invalid_argument("fit_gaussian: need matching arrays of size >= 3");
  }
  const size_t n = p.size();

  double total = 0.0, peak = 0.0;
  for (size_t i = 0; i < n; ++i) {
    total += p[i];
    peak = std::max(peak, p[i]);
  }
  if (total <= 0.0 || peak <= 0.0) {
    throw std::invalid_argument("fit_gaussian: distribution has no mass");
  }
  double mu = 0.0;
  for (size_t i = 0; i < n; ++i) mu += p[i] * x[i];
  mu /= total;
  double var = 0.0;
  for (size_t i = 0; i < n; ++i) var += p[i] * (x[i] - mu) * (x[i] - mu);
  var /= total;

  double A = peak, c = mu, w = std::max(std::sqrt(var), gaussian_min_width);

  auto sse_of = [&](double A_, double c_, double w_) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double g = std::exp(-(x[i] - c_) * (x[i] - c_) / (2 * w_ * w_));
      const double r = A_ * g - p[i];
      s += r * r;
    }
    return s;
  };

  double sse = sse_of(A, c, w);
  double lambda = 1e-3;
  GaussianFit out;
  int it = 0;
  for (; it < max_iterations; ++it) {
    // Normal equations J^T J (3x3, symmetric) and J^T r.
    double H[3][3] = {{0}}, g3[3] = {0};
    for (size_t i = 0; i < n; ++i) {
      const double dxw = (x[i] - c) / w;
      const double gauss = std::exp(-dxw * dxw / 2);
      const double r = A * gauss - p[i];
      const double J0 = gauss;
      const double J1 = A * gauss * (x[i] - c) / (w * w);
      const double J2 = A * gauss * (x[i] - c) * (x[i] - c) / (w * w * w);
      const double J[3] = {J0, J1, J2};
      for (int a = 0; a < 3; ++a) {
        g3[a] += J[a] * r;
        for (int b = a; b < 3; ++b) H[a][b] += J[a] * J[b];
      }
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < a; ++b) H[a][b] = H[b][a];

    // Marquardt damping and 3x3 solve by Cramer's rule.
    double M[3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        M[a][b] = H[a][b] + (a == b ? lambda * (H[a][a] > 0 ? H[a][a] : 1.0) : 0.0);
    auto det3 = [](const double m[3][3]) {
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double D = det3(M);
    if (D == 0.0 || !std::isfinite(D)) {
      lambda *= 10;
      continue;
    }
    double step[3];
    for (int col = 0; col < 3; ++col) {
      double Mc[3][3];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) Mc[a][b] = M[a][b];
      for (int a = 0; a < 3; ++a) Mc[a][col] = -g3[a];
      step[col] = det3(Mc) / D;
    }

    const double A2 = A + step[0];
    const double c2 = c + step[1];
    const double w2 = std::max(w + step[2], gaussian_min_width);
    const double sse2 = sse_of(A2, c2, w2);
    if (sse2 <= sse) {
      const double moved = std::abs(A2 - A) + std::abs(c2 - c) + std::abs(w2 - w);
      const double improved = sse - sse2;
      A = A2;
      c = c2;
      w = w2;
      sse = sse2;
      lambda = std::max(lambda / 3, 1e-12);
      if (moved < 1e-12 * (1.0 + std::abs(c) + w) || improved < 1e-16 * (1.0 + sse)) {
        out.converged = true;
        ++it;
        break;
      }
    } else {
      lambda *= 4;
      if (lambda > 1e12) {  // stuck at a (possibly clamped) minimum
        out.converged = true;
        ++it;
        break;
      }
    }
  }

  out.amplitude = A;
  out.center = c;
  out.width = w;
  out.residual = std::sqrt(sse / n);
  out.iterations = it;
  return out;
}

/// Fit a wrapped lattice marginal: coordinates are unwrapped around the peak
/// (as in circular_mean) before the fit.
inline GaussianFit fit_marginal_gaussian(const std::vector<double>& p,
                                         int max_iterations = 500) {
  const int L = static_cast<int>(p.size());
  int ipk = 0;
  for (int i = 1; i < L; ++i) {
    if (p[i] > p[ipk]) ipk = i;
  }
  std::vector<double> xs(L), ps(L);
  const double xpk = coord(ipk, L);
  for (int i = 0; i < L; ++i) {
    const int d = ((i - ipk) % L + L + L / 2) % L - L / 2;
    xs[i] = xpk + d;
    ps[i] = p[i];
  }
  return fit_gaussian(ps, xs, max_iterations);
}

/// Readout of a marginal's center: either the unwrapped moment mean or the
/// unwrapped Gaussian-fit center.
enum class Readout { moment, gaussian_fit };

inline double read_center(const std::vector<double>& p, Readout method) {
  if (method == Readout::moment) {
    return circular_mean(p, static_cast<int>(p.size()));
  }
  return fit_marginal_gaussian(p).center;
}

}  // namespace qwlab
