#include "rqt/units.hpp"

#include <map>
#include <utility>

#include "rqt/errors.hpp"

namespace rqt::units {

namespace {

using Table = std::vector<std::pair<std::string, double>>;

const Table& table(Dimension d) {
  static const std::map<Dimension, Table> t = {
      {Dimension::none, {{"", 1.0}, {"1", 1.0}}},
      {Dimension::length, {{"m", 1.0}, {"km", 1e3}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
      {Dimension::time, {{"s", c}, {"ms", 1e-3 * c}, {"us", 1e-6 * c}, {"ns", 1e-9 * c}, {"m", 1.0}}},
      {Dimension::velocity, {{"m/s", 1.0 / c}, {"km/s", 1e3 / c}, {"c", 1.0}}},
      {Dimension::acceleration, {{"m/s^2", 1.0 / (c * c)}, {"1/m", 1.0}}},
      {Dimension::mass,
       {{"kg", c / hbar}, {"eV", e / (hbar * c)}, {"MeV", 1e6 * e / (hbar * c)}, {"1/m", 1.0}}},
      {Dimension::grav_mass, {{"kg", G / (c * c)}, {"m", 1.0}, {"km", 1e3}}},
      {Dimension::magnetic, {{"T", e / hbar}, {"1/m^2", 1.0}}},
      {Dimension::electric, {{"V/m", e / (hbar * c)}, {"1/m^2", 1.0}}},
      {Dimension::angle, {{"rad", 1.0}, {"deg", 3.14159265358979323846 / 180.0}}},
      {Dimension::charge, {{"e", 1.0}, {"", 1.0}}},
  };
  return t.at(d);
}

}  // namespace

std::string to_string(Dimension d) {
  switch (d) {
    case Dimension::none: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::velocity: return "velocity";
    case Dimension::acceleration: return "acceleration";
    case Dimension::mass: return "mass";
    case Dimension::grav_mass: return "mass";
    case Dimension::magnetic: return "magnetic field";
    case Dimension::electric: return "electric field";
    case Dimension::angle: return "angle";
    case Dimension::charge: return "charge";
  }
  return "?";
}

double factor(Dimension d, const std::string& unit) {
  for (const auto& [name, f] : table(d))
    if (name == unit) return f;
  throw InvalidArgument("unit '" + unit + "' is not a " + to_string(d) + " unit");
}

double to_natural(double value, Dimension d, const std::string& unit) {
  return value * factor(d, unit);
}

double from_natural(double value, Dimension d, const std::string& unit) {
  return value / factor(d, unit);
}

const std::vector<std::string>& accepted(Dimension d) {
  static std::map<Dimension, std::vector<std::string>> cache;
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  std::vector<std::string> names;
  for (const auto& [n, f] : table(d)) names.push_back(n);
  return cache.emplace(d, std::move(names)).first->second;
}

}  // namespace rqt::units
