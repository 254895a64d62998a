#pragma once

#include <cmath>
#include <string>

#include "pfsi/errors.hpp"

namespace pfsi {

/// Periodic box Omega = (0,L) x (-H,H) with time period T.
struct DomainSpec {
  double L = 1.0;
  double H = 1.0;
  double T = 1.0;

  double area() const { return 2.0 * L * H; }

  void validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("domain: L must be positive, got " + std::to_string(L));
    if (!(H > 0.0) || !std::isfinite(H)) throw ConfigError("domain: H must be positive, got " + std::to_string(H));
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("domain: T must be positive, got " + std::to_string(T));
  }
};

/// Representative of a beam height in [-H, H) modulo 2H.
struct WrappedHeight {
  double eta_hat = 0.0;
  long wind = 0;
};

/// eta_hat = eta - 2 n H with n the unique integer putting eta_hat in [-H, H).
inline WrappedHeight wrap_eta(double eta, double H) {
  if (!std::isfinite(eta)) throw InputDomainError("wrap_eta: non-finite displacement");
  if (!(H > 0.0)) throw InputDomainError("wrap_eta: H must be positive");
  const double two_h = 2.0 * H;
  long n = static_cast<long>(std::floor((eta + H) / two_h));
  double hat = eta - two_h * static_cast<double>(n);
  // floor of a rounded quotient can land one period off at the interval ends
  if (hat >= H) {
    ++n;
    hat = eta - two_h * static_cast<double>(n);
  } else if (hat < -H) {
    --n;
    hat = eta - two_h * static_cast<double>(n);
  }
  return {hat, n};
}

}  // namespace pfsi
