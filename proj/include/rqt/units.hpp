#pragma once

#include <string>
#include <vector>

namespace rqt::units {

// CODATA 2018 exact or recommended values
constexpr double c = 299792458.0;
constexpr double hbar = 1.054571817e-34;
constexpr double e = 1.602176634e-19;
constexpr double G = 6.67430e-11;

// Natural units: c = hbar = e = 1 with the metre as length unit. Every
// quantity becomes a power of 1/m.
enum class Dimension {
  none,          // pure number
  length,        // m
  time,          // m (times c)
  velocity,      // fraction of c
  acceleration,  // 1/m
  mass,          // 1/m (m c / hbar)
  grav_mass,     // m (G M / c^2), for the Schwarzschild parameter
  magnetic,      // 1/m^2 (e B / hbar)
  electric,      // 1/m^2 (e E / (hbar c))
  angle,         // rad
  charge,        // units of e
};

std::string to_string(Dimension d);

// Factor f with natural = f * value for the given unit; throws
// InvalidArgument when the unit does not belong to the dimension.
double factor(Dimension d, const std::string& unit);

double to_natural(double value, Dimension d, const std::string& unit);
double from_natural(double value, Dimension d, const std::string& unit);

// Units accepted for a dimension, first entry is the canonical SI one.
const std::vector<std::string>& accepted(Dimension d);

}  // namespace rqt::units
