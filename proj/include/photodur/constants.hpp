#pragma once

namespace photodur {

/// SI physical constants (CODATA 2018).
struct PhysicalConstants {
  double c0 = 299792458.0;           // m/s
  double mu0 = 1.25663706212e-6;     // H/m
  double eps0 = 8.8541878128e-12;    // F/m
  double hbar = 1.054571817e-34;     // J s
};

inline constexpr double euler_gamma = 0.57721566490153286060651209;

}  // namespace photodur
