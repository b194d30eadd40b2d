#include "rqt/scenario.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "rqt/composite.hpp"
#include "rqt/interferometry.hpp"
#include "rqt/measurement.hpp"
#include "rqt/spin_algebra.hpp"
#include "rqt/units.hpp"

namespace rqt::scenario {

namespace {

using units::Dimension;
const double kInf = std::numeric_limits<double>::infinity();
// core tolerances enforced on every run
const double kNormLimit = 1e-9;
const double kGaugeLimit = 1e-12;
// matches the unit-velocity check of the boosts
const double kWorldlineLimit = 1e-9;
const double kFidelityLimit = 1e-9;
// wavepacket / curvature ratio above which validate emits an advisory
const double kValidityRatio = 1e-3;

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::optional<double> number(const std::string& t) {
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// "0.3", "-0.4i", "0.3-0.4i", "i"
std::optional<cplx> complex_number(std::string t) {
  if (t.empty()) return std::nullopt;
  if (t.back() != 'i') {
    auto r = number(t);
    return r ? std::optional<cplx>(cplx(*r, 0.0)) : std::nullopt;
  }
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;)
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  auto imag = [](const std::string& s) -> std::optional<double> {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return number(s);
  };
  if (split == std::string::npos) {
    auto im = imag(t);
    return im ? std::optional<cplx>(cplx(0.0, *im)) : std::nullopt;
  }
  auto re = number(t.substr(0, split));
  auto im = imag(t.substr(split));
  if (!re || !im) return std::nullopt;
  return cplx(*re, *im);
}

// ---------------------------------------------------------------- typed spec

struct FieldSpec {
  Vec3 E = Vec3::Zero();
  Vec3 B = Vec3::Zero();
};

struct WorldlineSpec {
  std::string name, type;
  Vec4 start = Vec4::Zero();
  double span = 0.0;
  double radius = 0.0, speed = 0.0, revolutions = 1.0;
  Vec3 velocity = Vec3::Zero();
  Vec3 direction = Vec3(1, 0, 0);
  std::string field;
  int samples = 201;
};

struct QubitSpec {
  std::string name, kind, worldline;
  Vec2c state = Vec2c(1, 0);  // rest-frame spinor or Jones vector
  double mass = 0.0, charge = 0.0, wavelength = 0.0;
};

struct MeasureSpec {
  std::string name, qubit, type;
  Vec3 axis = Vec3(0, 0, 1);
  Vec3 apparatus_velocity = Vec3::Zero();
  double angle = 0.0;
  int handedness = 0;  // nonzero: circular polarizer
};

struct Step {
  bool transport = true;
  std::string target;
};

struct CowSpec {
  double m = 0, v1 = 0, dz = 0, ell = 0, g = 0;
  std::vector<CowMode> modes;
  bool worldline_check = false;
};

struct InterferometerSpec {
  ParticleKind particle = ParticleKind::fermion;
  double mass = 0, speed = 0, wavelength = 0, L1 = 0, L2 = 0, rotation = 0;
  Vec2c state = Vec2c(1, 1) / std::sqrt(2.0);
};

struct TeleportSpec {
  cplx alpha = 1.0, beta = 0.0;
  std::array<std::string, 3> legs;
  std::optional<BellOutcome> outcome;
};

struct Spec {
  int version = 0;
  double tol = 1e-10;
  double transport_tol = 1e-10;
  std::uint64_t seed = 1;
  std::string family = "minkowski";
  double model_param = 0.0;
  ConnectionMode mode = ConnectionMode::analytic;
  std::map<std::string, FieldSpec> fields;
  std::vector<WorldlineSpec> worldlines;
  std::vector<QubitSpec> qubits;
  std::vector<MeasureSpec> measures;
  std::vector<Step> schedule;
  std::optional<CowSpec> cow;
  std::optional<InterferometerSpec> interferometer;
  std::optional<TeleportSpec> teleport;
  std::string output;

  const WorldlineSpec* worldline(const std::string& n) const {
    for (const auto& w : worldlines)
      if (w.name == n) return &w;
    return nullptr;
  }
  const QubitSpec* qubit(const std::string& n) const {
    for (const auto& q : qubits)
      if (q.name == n) return &q;
    return nullptr;
  }
  const MeasureSpec* measure(const std::string& n) const {
    for (const auto& m : measures)
      if (m.name == n) return &m;
    return nullptr;
  }
};

// ---------------------------------------------------------------- reader

class Reader {
 public:
  std::vector<Diagnostic> diags;

  void error(const std::string& block, const std::string& msg) {
    diags.push_back({Diagnostic::Level::error, block, msg});
  }
  void warning(const std::string& block, const std::string& msg) {
    diags.push_back({Diagnostic::Level::warning, block, msg});
  }
  void advisory(const std::string& block, const std::string& msg) {
    diags.push_back({Diagnostic::Level::advisory, block, msg});
  }

  bool is_map(const YAML::Node& n, const std::string& block) {
    if (n.IsMap()) return true;
    error(block, "expected a mapping");
    return false;
  }

  void allowed(const YAML::Node& n, const std::string& block,
               std::initializer_list<const char*> keys) {
    for (auto it = n.begin(); it != n.end(); ++it) {
      const std::string k = it->first.as<std::string>();
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) error(block, "unknown key '" + k + "'");
    }
  }

  std::optional<std::string> text(const YAML::Node& n, const char* key, const std::string& block,
                                  bool required) {
    const YAML::Node v = n[key];
    if (!v) {
      if (required) error(block, std::string("missing key '") + key + "'");
      return std::nullopt;
    }
    if (v.IsNull()) return std::string("null");  // bare `null` parses as YAML null
    if (!v.IsScalar()) {
      error(block, std::string("key '") + key + "' must be a scalar");
      return std::nullopt;
    }
    return v.Scalar();
  }

  // count numbers followed by a unit of dimension d (or no unit when
  // d is none)
  std::optional<std::vector<double>> quantity(const YAML::Node& n, const char* key,
                                              const std::string& block, Dimension d,
                                              std::size_t count, bool required,
                                              std::size_t unit_mask = ~std::size_t{0}) {
    auto s = text(n, key, block, required);
    if (!s) return std::nullopt;
    auto t = tokens(*s);
    std::string unit;
    if (!t.empty() && !number(t.back())) {
      unit = t.back();
      t.pop_back();
    }
    const std::string where = std::string("key '") + key + "'";
    if (t.size() != count) {
      error(block, where + " expects " + std::to_string(count) + " number(s)");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& x : t) {
      auto v = number(x);
      if (!v) {
        error(block, where + ": '" + x + "' is not a number");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    if (d != Dimension::none && d != Dimension::charge && unit.empty()) {
      error(block, where + " needs a " + units::to_string(d) + " unit (e.g. '" +
                       units::accepted(d).front() + "')");
      return std::nullopt;
    }
    double f = 1.0;
    try {
      f = units::factor(d, unit);
    } catch (const InvalidArgument& e) {
      error(block, where + ": " + e.what());
      return std::nullopt;
    }
    for (std::size_t k = 0; k < out.size(); ++k)
      if (unit_mask >> k & 1) out[k] *= f;
    return out;
  }

  std::optional<double> scalar(const YAML::Node& n, const char* key, const std::string& block,
                               Dimension d, bool required) {
    auto v = quantity(n, key, block, d, 1, required);
    if (!v) return std::nullopt;
    return (*v)[0];
  }

  std::optional<Vec2c> pair(const YAML::Node& n, const char* key, const std::string& block,
                            bool required) {
    auto s = text(n, key, block, required);
    if (!s) return std::nullopt;
    auto t = tokens(*s);
    if (t.size() != 2) {
      error(block, std::string("key '") + key + "' expects two complex numbers");
      return std::nullopt;
    }
    Vec2c v;
    for (int k = 0; k < 2; ++k) {
      auto c = complex_number(t[k]);
      if (!c) {
        error(block, std::string("key '") + key + "': '" + t[k] + "' is not a complex number");
        return std::nullopt;
      }
      v(k) = *c;
    }
    if (!(v.norm() > 0.0)) {
      error(block, std::string("key '") + key + "' is the zero vector");
      return std::nullopt;
    }
    return Vec2c(v / v.norm());
  }
};

std::optional<Vec2c> named_spin(const std::string& s) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i(0, 1);
  if (s == "up" || s == "+z") return Vec2c(1, 0);
  if (s == "down" || s == "-z") return Vec2c(0, 1);
  if (s == "+x") return Vec2c(r, r);
  if (s == "-x") return Vec2c(r, -r);
  if (s == "+y") return Vec2c(r, r * i);
  if (s == "-y") return Vec2c(r, -r * i);
  return std::nullopt;
}

// Jones components on the adapted diad; +h is the helicity_plus state
std::optional<Vec2c> named_polarization(const std::string& s) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i(0, 1);
  if (s == "H") return Vec2c(1, 0);
  if (s == "V") return Vec2c(0, 1);
  if (s == "D") return Vec2c(r, r);
  if (s == "A") return Vec2c(r, -r);
  if (s == "+h") return Vec2c(r, r * i);
  if (s == "-h") return Vec2c(r, -r * i);
  return std::nullopt;
}

std::optional<Vec2c> read_state(Reader& rd, const YAML::Node& n, const char* key,
                                const std::string& block, bool photon) {
  auto s = rd.text(n, key, block, false);
  if (!s) return std::nullopt;
  if (auto v = photon ? named_polarization(*s) : named_spin(*s)) return v;
  return rd.pair(n, key, block, true);
}

Spec compile(const Document& doc, Reader& rd) {
  Spec sp;
  const YAML::Node& root = doc.root;
  if (!root || !root.IsMap()) {
    rd.error("<root>", "scenario must be a YAML mapping");
    return sp;
  }
  rd.allowed(root, "<root>",
             {"version", "seed", "tolerance", "transport_tolerance", "model", "fields", "worldlines", "qubits",
              "measurements", "schedule", "cow", "interferometer", "teleport", "sweep", "output"});
  if (auto v = rd.scalar(root, "version", "<root>", Dimension::none, true)) {
    sp.version = static_cast<int>(*v);
    if (*v != kSchemaVersion)
      rd.error("<root>", "schema version " + fmt17(*v) + " is not supported (expected 1)");
  }
  if (auto v = rd.scalar(root, "seed", "<root>", Dimension::none, false)) {
    if (*v < 0 || *v != std::floor(*v)) rd.error("<root>", "seed must be a non-negative integer");
    sp.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = rd.scalar(root, "tolerance", "<root>", Dimension::none, false)) {
    if (!(*v > 0 && *v < 1e-3)) rd.error("<root>", "tolerance must lie in (0, 1e-3)");
    sp.tol = *v;
  }
  sp.transport_tol = sp.tol;
  if (auto v = rd.scalar(root, "transport_tolerance", "<root>", Dimension::none, false)) {
    if (!(*v > 0 && *v < 1e-2)) rd.error("<root>", "transport_tolerance must lie in (0, 1e-2)");
    sp.transport_tol = *v;
  }

  // model
  if (YAML::Node m = root["model"]; m && rd.is_map(m, "model")) {
    rd.allowed(m, "model", {"family", "g", "mass", "connection"});
    sp.family = rd.text(m, "family", "model", true).value_or("minkowski");
    if (sp.family == "rindler") {
      sp.model_param = rd.scalar(m, "g", "model", Dimension::acceleration, true).value_or(0.0);
    } else if (sp.family == "schwarzschild") {
      sp.model_param = rd.scalar(m, "mass", "model", Dimension::grav_mass, true).value_or(0.0);
      if (!(sp.model_param > 0)) rd.error("model", "mass must be positive");
    } else if (sp.family != "minkowski") {
      rd.error("model", "unknown family '" + sp.family + "'");
    }
    if (auto c = rd.text(m, "connection", "model", false)) {
      if (*c == "finite_difference") sp.mode = ConnectionMode::finite_difference;
      else if (*c != "analytic") rd.error("model", "connection must be analytic or finite_difference");
    }
  }
  const bool schwarzschild = sp.family == "schwarzschild";

  if (YAML::Node fs = root["fields"]; fs && rd.is_map(fs, "fields")) {
    for (auto it = fs.begin(); it != fs.end(); ++it) {
      const std::string name = it->first.as<std::string>();
      const std::string block = "fields." + name;
      if (!rd.is_map(it->second, block)) continue;
      rd.allowed(it->second, block, {"E", "B"});
      FieldSpec f;
      if (auto v = rd.quantity(it->second, "E", block, Dimension::electric, 3, false))
        f.E = Vec3((*v)[0], (*v)[1], (*v)[2]);
      if (auto v = rd.quantity(it->second, "B", block, Dimension::magnetic, 3, false))
        f.B = Vec3((*v)[0], (*v)[1], (*v)[2]);
      sp.fields[name] = f;
    }
  }

  if (YAML::Node ws = root["worldlines"]; ws && rd.is_map(ws, "worldlines")) {
    for (auto it = ws.begin(); it != ws.end(); ++it) {
      WorldlineSpec w;
      w.name = it->first.as<std::string>();
      const std::string block = "worldlines." + w.name;
      const YAML::Node& n = it->second;
      if (!rd.is_map(n, block)) continue;
      rd.allowed(n, block, {"type", "start", "span", "radius", "speed", "revolutions", "velocity",
                            "direction", "field", "samples"});
      w.type = rd.text(n, "type", block, true).value_or("");
      // Schwarzschild angles are plain radians, the unit scales t and r
      const std::size_t mask = schwarzschild ? 0b0011 : 0b1111;
      if (w.type == "static" || w.type == "trajectory" || w.type == "null") {
        if (auto v = rd.quantity(n, "start", block, Dimension::length, 4, true, mask))
          w.start = Vec4((*v)[0], (*v)[1], (*v)[2], (*v)[3]);
        const Dimension sd = w.type == "null" ? Dimension::length : Dimension::time;
        w.span = rd.scalar(n, "span", block, sd, true).value_or(0.0);
        if (!(w.span > 0)) rd.error(block, "span must be positive");
      }
      if (w.type == "trajectory") {
        if (auto v = rd.quantity(n, "velocity", block, Dimension::velocity, 3, false))
          w.velocity = Vec3((*v)[0], (*v)[1], (*v)[2]);
        if (!(w.velocity.norm() < 1)) rd.error(block, "velocity must be below c");
      } else if (w.type == "null") {
        if (auto v = rd.quantity(n, "direction", block, Dimension::none, 3, true))
          w.direction = Vec3((*v)[0], (*v)[1], (*v)[2]);
        if (!(w.direction.norm() > 0)) rd.error(block, "direction must be nonzero");
        else w.direction.normalize();
      } else if (w.type == "circular") {
        if (sp.family != "minkowski") rd.error(block, "circular worldlines need the minkowski model");
        w.radius = rd.scalar(n, "radius", block, Dimension::length, true).value_or(0.0);
        w.speed = rd.scalar(n, "speed", block, Dimension::velocity, true).value_or(0.0);
        w.revolutions = rd.scalar(n, "revolutions", block, Dimension::none, false).value_or(1.0);
        if (!(w.radius > 0)) rd.error(block, "radius must be positive");
        if (!(w.speed > 0 && w.speed < 1)) rd.error(block, "speed must lie in (0, c)");
        if (!(w.revolutions > 0)) rd.error(block, "revolutions must be positive");
      } else if (w.type != "static") {
        if (!w.type.empty()) rd.error(block, "unknown worldline type '" + w.type + "'");
      }
      if (auto f = rd.text(n, "field", block, false)) {
        w.field = *f;
        if (!sp.fields.count(*f)) rd.error(block, "undefined field '" + *f + "'");
        if (w.type == "null") rd.error(block, "photon worldlines take no field");
      }
      if (auto s = rd.scalar(n, "samples", block, Dimension::none, false)) {
        w.samples = static_cast<int>(*s);
        if (w.samples < 2) rd.error(block, "samples must be at least 2");
      }
      if (sp.worldline(w.name)) rd.error(block, "duplicate worldline name");
      sp.worldlines.push_back(w);
    }
  }

  if (YAML::Node qs = root["qubits"]; qs && rd.is_map(qs, "qubits")) {
    for (auto it = qs.begin(); it != qs.end(); ++it) {
      QubitSpec q;
      q.name = it->first.as<std::string>();
      const std::string block = "qubits." + q.name;
      const YAML::Node& n = it->second;
      if (!rd.is_map(n, block)) continue;
      rd.allowed(n, block, {"kind", "worldline", "state", "mass", "charge", "wavelength"});
      q.kind = rd.text(n, "kind", block, true).value_or("");
      const bool photon = q.kind == "photon";
      if (q.kind != "fermion" && !photon) rd.error(block, "kind must be fermion or photon");
      q.worldline = rd.text(n, "worldline", block, true).value_or("");
      const WorldlineSpec* w = sp.worldline(q.worldline);
      if (!q.worldline.empty() && !w) rd.error(block, "undefined worldline '" + q.worldline + "'");
      if (w && photon != (w->type == "null"))
        rd.error(block, photon ? "photons need a null worldline" : "fermions need a timelike worldline");
      if (auto s = read_state(rd, n, "state", block, photon)) q.state = *s;
      if (photon) {
        q.wavelength = rd.scalar(n, "wavelength", block, Dimension::length, false).value_or(0.0);
      } else {
        q.mass = rd.scalar(n, "mass", block, Dimension::mass, true).value_or(0.0);
        q.charge = rd.scalar(n, "charge", block, Dimension::charge, false).value_or(0.0);
        if (!(q.mass > 0)) rd.error(block, "mass must be positive");
      }
      if (sp.qubit(q.name)) rd.error(block, "duplicate qubit name");
      sp.qubits.push_back(q);
    }
  }

  if (YAML::Node ms = root["measurements"]; ms && rd.is_map(ms, "measurements")) {
    for (auto it = ms.begin(); it != ms.end(); ++it) {
      MeasureSpec m;
      m.name = it->first.as<std::string>();
      const std::string block = "measurements." + m.name;
      const YAML::Node& n = it->second;
      if (!rd.is_map(n, block)) continue;
      rd.allowed(n, block, {"qubit", "type", "axis", "apparatus_velocity", "angle", "handedness"});
      m.qubit = rd.text(n, "qubit", block, true).value_or("");
      m.type = rd.text(n, "type", block, true).value_or("");
      const QubitSpec* q = sp.qubit(m.qubit);
      if (!m.qubit.empty() && !q) rd.error(block, "undefined qubit '" + m.qubit + "'");
      if (m.type == "stern_gerlach") {
        if (q && q->kind != "fermion") rd.error(block, "stern_gerlach needs a fermion qubit");
        if (auto v = rd.quantity(n, "axis", block, Dimension::none, 3, true))
          m.axis = Vec3((*v)[0], (*v)[1], (*v)[2]);
        if (!(m.axis.norm() > 0)) rd.error(block, "axis must be nonzero");
        else m.axis.normalize();
        if (auto v = rd.quantity(n, "apparatus_velocity", block, Dimension::velocity, 3, false))
          m.apparatus_velocity = Vec3((*v)[0], (*v)[1], (*v)[2]);
        if (!(m.apparatus_velocity.norm() < 1)) rd.error(block, "apparatus_velocity must be below c");
      } else if (m.type == "polarizer") {
        if (q && q->kind != "photon") rd.error(block, "polarizer needs a photon qubit");
        auto a = rd.scalar(n, "angle", block, Dimension::angle, false);
        auto h = rd.scalar(n, "handedness", block, Dimension::none, false);
        if (a.has_value() == h.has_value()) rd.error(block, "give exactly one of angle, handedness");
        if (a) m.angle = *a;
        if (h) {
          m.handedness = *h > 0 ? 1 : -1;
          if (std::abs(*h) != 1) rd.error(block, "handedness must be +1 or -1");
        }
      } else if (!m.type.empty()) {
        rd.error(block, "unknown measurement type '" + m.type + "'");
      }
      if (sp.measure(m.name)) rd.error(block, "duplicate measurement name");
      sp.measures.push_back(m);
    }
  }

  if (YAML::Node sc = root["schedule"]) {
    if (!sc.IsSequence()) {
      rd.error("schedule", "expected a list of 'transport <qubit>' or 'measure <name>'");
    } else {
      std::map<std::string, int> transported;
      for (std::size_t k = 0; k < sc.size(); ++k) {
        const std::string block = "schedule[" + std::to_string(k) + "]";
        const auto t = sc[k].IsScalar() ? tokens(sc[k].Scalar()) : std::vector<std::string>{};
        if (t.size() != 2 || (t[0] != "transport" && t[0] != "measure")) {
          rd.error(block, "expected 'transport <qubit>' or 'measure <name>'");
          continue;
        }
        Step s{t[0] == "transport", t[1]};
        if (s.transport && !sp.qubit(s.target)) rd.error(block, "undefined qubit '" + s.target + "'");
        if (!s.transport && !sp.measure(s.target))
          rd.error(block, "undefined measurement '" + s.target + "'");
        if (s.transport && ++transported[s.target] > 1)
          rd.error(block, "qubit '" + s.target + "' is transported twice");
        sp.schedule.push_back(s);
      }
    }
  } else {
    for (const auto& q : sp.qubits) sp.schedule.push_back({true, q.name});
    for (const auto& m : sp.measures) sp.schedule.push_back({false, m.name});
  }

  if (YAML::Node c = root["cow"]; c && rd.is_map(c, "cow")) {
    rd.allowed(c, "cow", {"mass", "v1", "dz", "ell", "g", "modes", "worldline_check"});
    CowSpec cs;
    cs.m = rd.scalar(c, "mass", "cow", Dimension::mass, true).value_or(0.0);
    cs.v1 = rd.scalar(c, "v1", "cow", Dimension::velocity, true).value_or(0.0);
    cs.dz = rd.scalar(c, "dz", "cow", Dimension::length, true).value_or(0.0);
    cs.ell = rd.scalar(c, "ell", "cow", Dimension::length, true).value_or(0.0);
    cs.g = rd.scalar(c, "g", "cow", Dimension::acceleration, true).value_or(0.0);
    if (!(cs.m > 0)) rd.error("cow", "mass must be positive");
    if (!(cs.v1 > 0 && cs.v1 < 1)) rd.error("cow", "v1 must lie in (0, c)");
    if (auto s = rd.text(c, "modes", "cow", false)) {
      for (const auto& t : tokens(*s)) {
        try {
          cs.modes.push_back(parse_cow_mode(t));
        } catch (const Error&) {
          rd.error("cow", "unknown mode '" + t + "'");
        }
      }
    } else {
      cs.modes = {CowMode::exact, CowMode::weak_field, CowMode::nonrel, CowMode::nonrel_g2,
                  CowMode::standard};
    }
    if (auto s = rd.text(c, "worldline_check", "cow", false)) {
      if (*s != "true" && *s != "false") rd.error("cow", "worldline_check must be true or false");
      cs.worldline_check = *s == "true";
    }
    sp.cow = cs;
  }

  if (YAML::Node in = root["interferometer"]; in && rd.is_map(in, "interferometer")) {
    const std::string block = "interferometer";
    rd.allowed(in, block, {"particle", "mass", "speed", "wavelength", "arm_length", "arm_length_2",
                           "rotation", "state"});
    InterferometerSpec is;
    const std::string p = rd.text(in, "particle", block, true).value_or("");
    if (p == "photon") is.particle = ParticleKind::photon;
    else if (p != "fermion") rd.error(block, "particle must be fermion or photon");
    const bool photon = is.particle == ParticleKind::photon;
    if (sp.family != "minkowski") rd.error(block, "the interferometer block needs the minkowski model");
    if (photon) {
      is.wavelength = rd.scalar(in, "wavelength", block, Dimension::length, true).value_or(0.0);
      if (!(is.wavelength > 0)) rd.error(block, "wavelength must be positive");
      is.state = Vec2c(1, 0);
    } else {
      is.mass = rd.scalar(in, "mass", block, Dimension::mass, true).value_or(0.0);
      is.speed = rd.scalar(in, "speed", block, Dimension::velocity, true).value_or(0.0);
      if (!(is.mass > 0)) rd.error(block, "mass must be positive");
      if (!(is.speed > 0 && is.speed < 1)) rd.error(block, "speed must lie in (0, c)");
    }
    is.L1 = rd.scalar(in, "arm_length", block, Dimension::length, true).value_or(0.0);
    is.L2 = rd.scalar(in, "arm_length_2", block, Dimension::length, false).value_or(is.L1);
    if (!(is.L1 > 0 && is.L2 > 0)) rd.error(block, "arm lengths must be positive");
    is.rotation = rd.scalar(in, "rotation", block, Dimension::angle, false).value_or(0.0);
    if (auto s = read_state(rd, in, "state", block, photon)) is.state = *s;
    sp.interferometer = is;
  }

  if (YAML::Node tp = root["teleport"]; tp && rd.is_map(tp, "teleport")) {
    const std::string block = "teleport";
    rd.allowed(tp, block, {"input", "legs", "outcome"});
    TeleportSpec ts;
    if (auto v = read_state(rd, tp, "input", block, false)) {
      ts.alpha = (*v)(0);
      ts.beta = (*v)(1);
    } else if (!tp["input"]) {
      rd.error(block, "missing key 'input'");
    }
    const auto legs = tokens(rd.text(tp, "legs", block, true).value_or(""));
    if (legs.size() != 3) {
      rd.error(block, "legs expects three worldline names");
    } else {
      for (int k = 0; k < 3; ++k) {
        ts.legs[k] = legs[k];
        const WorldlineSpec* w = sp.worldline(legs[k]);
        if (!w) rd.error(block, "undefined worldline '" + legs[k] + "'");
        else if (w->type == "null") rd.error(block, "leg '" + legs[k] + "' must be timelike");
      }
    }
    if (auto o = rd.text(tp, "outcome", block, false); o && *o != "random") {
      bool found = false;
      for (int k = 0; k < 4; ++k)
        if (to_string(static_cast<BellOutcome>(k)) == *o) {
          ts.outcome = static_cast<BellOutcome>(k);
          found = true;
        }
      if (!found) rd.error(block, "outcome must be random, Phi+, Phi-, Psi+ or Psi-");
    }
    sp.teleport = ts;
  }

  if (YAML::Node sw = root["sweep"]; sw && rd.is_map(sw, "sweep")) {
    rd.allowed(sw, "sweep", {"parameter", "from", "to", "steps"});
    try {
      const SweepSpec s = sweep_spec(doc);
      with_override(doc, s.parameter, fmt17(s.from) + " " + s.unit);
    } catch (const ParseError& e) {
      rd.error("sweep", e.what());
    }
  }

  if (YAML::Node o = root["output"]; o && rd.is_map(o, "output")) {
    rd.allowed(o, "output", {"name"});
    sp.output = rd.text(o, "name", "output", false).value_or("");
  }

  if (sp.qubits.empty() && !sp.cow && !sp.interferometer && !sp.teleport)
    rd.error("<root>", "nothing to run: define qubits, cow, interferometer or teleport");
  for (const auto& w : sp.worldlines) {
    bool used = false;
    for (const auto& q : sp.qubits) used = used || q.worldline == w.name;
    if (sp.teleport)
      for (const auto& l : sp.teleport->legs) used = used || l == w.name;
    if (!used) rd.warning("worldlines." + w.name, "worldline is not used");
  }
  return sp;
}

// Wavepacket-size vs curvature-scale advisories. The scale is c^2/g for
// Rindler, the tidal radius sqrt(r^3 / 2M) for Schwarzschild and 1/a for
// circular orbits.
void advise(const Spec& sp, Reader& rd) {
  auto scale_for = [&](const WorldlineSpec& w) {
    double L = kInf;
    if (sp.family == "rindler" && sp.model_param != 0) L = 1.0 / std::abs(sp.model_param);
    if (sp.family == "schwarzschild" && sp.model_param > 0 && w.start(1) > 0)
      L = std::sqrt(std::pow(w.start(1), 3) / (2 * sp.model_param));
    if (w.type == "circular" && w.radius > 0 && w.speed > 0 && w.speed < 1)
      L = std::min(L, w.radius * (1 - w.speed * w.speed) / (w.speed * w.speed));
    return L;
  };
  auto check = [&](const std::string& block, double size, double L, const char* what) {
    if (size > kValidityRatio * L)
      rd.advisory(block, std::string(what) + " " + fmt17(size) + " m is not small against the "
                  "curvature/acceleration scale " + fmt17(L) + " m; the WKB transport assumes "
                  "wavepacket size / scale << 1 (advisory threshold " + fmt_short(kValidityRatio) + ")");
  };
  for (const auto& q : sp.qubits) {
    const WorldlineSpec* w = sp.worldline(q.worldline);
    if (!w) continue;
    const double L = scale_for(*w);
    if (q.kind == "fermion" && q.mass > 0) check("qubits." + q.name, 1.0 / q.mass, L, "Compton wavelength");
    if (q.kind == "photon" && q.wavelength > 0) check("qubits." + q.name, q.wavelength, L, "wavelength");
  }
  if (sp.cow && sp.cow->m > 0 && sp.cow->g != 0)
    check("cow", 1.0 / sp.cow->m, 1.0 / std::abs(sp.cow->g), "Compton wavelength");
}

// ---------------------------------------------------------------- execution

struct Runner {
  const Spec& sp;
  std::uint64_t seed;
  std::shared_ptr<const SpacetimeModel> model;
  Report report;

  Runner(const Spec& s, std::uint64_t sd) : sp(s), seed(sd) {
    std::vector<double> params;
    if (sp.family != "minkowski") params.push_back(sp.model_param);
    model = std::make_shared<SpacetimeModel>(make_builtin_model(sp.family, params, sp.mode));
  }

  void audit(const std::string& check, const std::string& block, double value, double limit) {
    report.audit.push_back({check, block, value, limit});
  }

  EMField field_of(const WorldlineSpec& w) const {
    if (w.field.empty()) return no_field();
    const FieldSpec& f = sp.fields.at(w.field);
    return uniform_field(f.E, f.B);
  }

  Worldline build(const WorldlineSpec& w, double qm) {
    const Event x0{w.start, model->chart()};
    std::optional<Worldline> wl;
    if (w.type == "static") {
      wl = static_observer(model, x0, w.span, w.samples);
    } else if (w.type == "circular") {
      wl = circular_orbit(model, w.radius, w.speed, w.revolutions, std::max(w.samples, 401));
    } else if (w.type == "trajectory") {
      const double gamma = 1.0 / std::sqrt(1.0 - w.velocity.squaredNorm());
      const Vec4 u0(gamma, gamma * w.velocity(0), gamma * w.velocity(1), gamma * w.velocity(2));
      wl = integrate_timelike(model, field_of(w), x0, u0, qm, w.span, sp.tol);
    } else {
      const Vec4 k0(1.0, w.direction(0), w.direction(1), w.direction(2));
      wl = integrate_null_geodesic(model, x0, k0, w.span, sp.tol);
    }
    const double res = wl->norm_residual();
    audit("worldline_norm_residual", "worldlines." + w.name, res, kWorldlineLimit);
    // nothing downstream is meaningful on an unnormalised worldline
    if (res > kWorldlineLimit)
      throw ToleranceError("[worldlines." + w.name + "] velocity normalisation drift " + fmt17(res) +
                               " exceeds " + fmt_short(kWorldlineLimit),
                           res);
    return *wl;
  }

  struct Live {
    bool photon = false;
    FermionState f;
    PhotonState p;
    Vec2c initial;
    double param = 0.0;
  };

  static Vec2c components(const Live& l) {
    return l.photon ? jones_vector(l.p) : to_rest_frame(l.f).psi;
  }

  void qubits() {
    if (sp.qubits.empty()) return;
    std::map<std::string, Live> live;
    std::map<std::string, Worldline> lines;
    for (const auto& q : sp.qubits) {
      const WorldlineSpec& w = *sp.worldline(q.worldline);
      const double qm = q.kind == "fermion" ? q.charge / q.mass : 0.0;
      Worldline wl = build(w, qm);
      Live l;
      l.photon = q.kind == "photon";
      l.initial = q.state;
      l.param = wl.begin();
      const HilbertLabel at = label_at(wl.samples().front());
      if (l.photon) l.p = from_jones(q.state, at);
      else l.f = from_rest_frame(RestFrameState{q.state}, at);
      live[q.name] = l;
      lines.emplace(q.name, std::move(wl));
    }

    Table meas{"measurements", {"name", "qubit", "type", "outcome", "probability", "expectation"}, {}};
    int mindex = 0;
    for (const Step& s : sp.schedule) {
      if (s.transport) {
        const QubitSpec& q = *sp.qubit(s.target);
        const WorldlineSpec& w = *sp.worldline(q.worldline);
        const Worldline& wl = lines.at(q.name);
        Live& l = live[q.name];
        const std::string block = "qubits." + q.name;
        if (l.photon) {
          const PhotonTransport t = transport_photon(l.p, wl, sp.transport_tol);
          l.p = t.states.back();
          audit("norm_drift", block, t.max_norm_drift, kNormLimit);
          audit("transversality", block, t.max_transversality, kNormLimit);
        } else {
          const double qm = q.charge / q.mass;
          const FermionTransport t = transport(l.f, wl, field_of(w), qm, sp.transport_tol);
          l.f = t.final_state();
          audit("norm_drift", block, t.max_norm_drift, kNormLimit);
        }
        l.param = wl.end();
        continue;
      }
      const MeasureSpec& m = *sp.measure(s.target);
      Live& l = live[m.qubit];
      const std::uint64_t mseed = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(++mindex);
      const std::string block = "measurements." + m.name;
      if (m.type == "stern_gerlach") {
        const Vec3& b = m.apparatus_velocity;
        const double gamma = 1.0 / std::sqrt(1.0 - b.squaredNorm());
        SternGerlachSetup setup;
        setup.m = Vec4(0, m.axis(0), m.axis(1), m.axis(2));
        setup.v = Vec4(gamma, gamma * b(0), gamma * b(1), gamma * b(2));
        setup.u = l.f.at.u;
        const SpinOperator op = spin_operator(setup);
        const double ev = expectation(l.f, op.observable);
        const SpinMeasurement r = measure_spin(l.f, setup, mseed);
        audit("hermiticity", block, hermiticity_residual(op.observable), kGaugeLimit);
        meas.rows.push_back({m.name, m.qubit, m.type, double(r.outcome),
                             r.outcome > 0 ? r.p_plus : r.p_minus, ev});
        l.f = r.post;
      } else {
        const Vec4& u = l.p.at.u;
        const PolarizerVector P = m.handedness ? circular_polarizer(m.handedness, u)
                                               : linear_polarizer(m.angle, u);
        const PolarizationMeasurement r = measure_polarization(l.p, P, mseed);
        // gauge shift of the incoming state must not move the probability
        PhotonState shifted = l.p;
        shifted.pol += cplx(0.37, -0.21) * u.cast<cplx>();
        audit("gauge_residual", block,
              std::abs(polarizer_probability(shifted, P) - r.p), kGaugeLimit);
        meas.rows.push_back({m.name, m.qubit, m.type, r.transmit ? 1.0 : 0.0,
                             r.transmit ? r.p : 1.0 - r.p, r.p});
        l.p = r.post;
      }
    }

    Table states{"states",
                 {"name", "kind", "param", "in0_re", "in0_im", "in1_re", "in1_im", "out0_re",
                  "out0_im", "out1_re", "out1_im", "norm"},
                 {}};
    for (const auto& q : sp.qubits) {
      const Live& l = live.at(q.name);
      const Vec2c out = components(l);
      const double norm = l.photon ? photon_norm_squared(l.p) : norm_squared(l.f);
      states.rows.push_back({q.name, q.kind, l.param, l.initial(0).real(), l.initial(0).imag(),
                             l.initial(1).real(), l.initial(1).imag(), out(0).real(),
                             out(0).imag(), out(1).real(), out(1).imag(), norm});
      if (l.photon) {
        PhotonState shifted = l.p;
        shifted.pol += cplx(-0.5, 0.25) * l.p.at.u.cast<cplx>();
        audit("jones_gauge_residual", "qubits." + q.name,
              (jones_vector(shifted) - out).cwiseAbs().maxCoeff(), kGaugeLimit);
      }
    }
    report.tables.push_back(states);
    if (!meas.rows.empty()) report.tables.push_back(meas);
  }

  void cow() {
    const CowSpec& c = *sp.cow;
    Table t{"cow", {"dz", "v1", "x", "v2"}, {}};
    std::vector<Cell> row{c.dz, c.v1, c.dz * c.g / (c.v1 * c.v1),
                          rindler_speed_at_height(c.v1, c.g, c.dz)};
    for (CowMode m : c.modes) {
      t.columns.push_back("phase_" + to_string(m));
      row.push_back(cow_phase<double>(c.m, c.v1, c.dz, c.ell, c.g, m));
    }
    if (c.worldline_check) {
      t.columns.push_back("phase_worldline");
      row.push_back(cow_phase_worldlines(c.m, c.v1, c.dz, c.ell, c.g).delta_theta);
    }
    t.rows.push_back(row);
    const double ex = cow_phase<double>(c.m, c.v1, c.dz, c.ell, c.g, CowMode::exact);
    const double st = cow_phase<double>(c.m, c.v1, c.dz, c.ell, c.g, CowMode::standard);
    audit("exact_vs_standard_rel", "cow", std::abs(ex - st) / std::abs(st), kInf);
    report.tables.insert(report.tables.begin(), t);
  }

  // Two straight arms unfolded along x. Arm 2 is longer by L2 - L1, so at
  // recombination its packet trails arm 1 by that distance.
  void interferometer() {
    const InterferometerSpec& in = *sp.interferometer;
    const bool photon = in.particle == ParticleKind::photon;
    const double delta = in.L2 - in.L1;
    Vec4 k;
    double span;
    if (photon) {
      const double w = 2 * kPi / in.wavelength;
      k = Vec4(w, w, 0, 0);
      span = in.L1 / w;
    } else {
      const double g = 1.0 / std::sqrt(1 - in.speed * in.speed);
      k = Vec4(g, g * in.speed, 0, 0);
      span = in.L1 / (g * in.speed);
    }
    auto arm = [&](double shift) {
      CoordinatePath p;
      const Vec4 x0(0, -shift, 0, 0);
      p.x = [=](double s) { return Vec4(x0 + k * s); };
      p.dx = [=](double) { return k; };
      p.ddx = [](double) { return Vec4::Zero().eval(); };
      return worldline_from_path(model, photon ? WorldlineKind::null : WorldlineKind::timelike,
                                 p, 0.0, span, 9);
    };
    const Worldline a1 = arm(0.0), a2 = arm(delta);
    const Particle part{in.particle, photon ? 0.0 : in.mass, 0.0};
    const PhaseLedger l1 = arm_phase(a1, no_field(), part, 1);
    const PhaseLedger l2 = arm_phase(a2, no_field(), part, 2);
    const PhaseDecomposition d = decompose_phase(l1, l2, l1.k_lower, Vec4::Zero());
    const double dtheta = phase_difference(l1, l2, l1.k_lower, Vec4::Zero());
    const cplx a(0, 1 / std::sqrt(2.0)), b = a;
    double trans, prob;
    if (photon) {
      const Vec2c j2 = (jones_rotation(in.rotation) * in.state.real()).cast<cplx>() +
                       cplx(0, 1) * (jones_rotation(in.rotation) * in.state.imag()).cast<cplx>();
      const PhotonTransport t1 = transport_photon(from_jones(in.state, label_at(a1.samples().front())), a1, sp.tol);
      const PhotonTransport t2 = transport_photon(from_jones(j2, label_at(a2.samples().front())), a2, sp.tol);
      PhotonState s2 = t2.states.back();
      s2.at = t1.states.back().at;  // recombination region
      trans = transport_phase(t1.states.back(), s2);
      prob = recombine(t1.states.back(), s2, a, b, dtheta).probability;
      audit("norm_drift", "interferometer", std::max(t1.max_norm_drift, t2.max_norm_drift), kNormLimit);
    } else {
      const Mat2c rot = expm2(cplx(0, -0.5 * in.rotation) * pauli(3));
      const FermionState s10 = from_rest_frame(RestFrameState{in.state}, label_at(a1.samples().front()));
      const FermionState s20 = from_rest_frame(RestFrameState{rot * in.state}, label_at(a2.samples().front()));
      const FermionTransport t1 = transport(s10, a1, no_field(), 0.0, sp.tol);
      const FermionTransport t2 = transport(s20, a2, no_field(), 0.0, sp.tol);
      FermionState s2 = t2.final_state();
      s2.at = t1.final_state().at;
      trans = transport_phase(t1.final_state(), s2);
      prob = recombine(t1.final_state(), s2, a, b, dtheta).probability;
      audit("norm_drift", "interferometer", std::max(t1.max_norm_drift, t2.max_norm_drift), kNormLimit);
    }
    audit("probability_excess", "interferometer", std::max({0.0, -prob, prob - 1.0}), kGaugeLimit);
    Table t{"interferometer",
            {"arm_length", "arm_length_2", "dtheta_internal", "dtheta_displacement", "dtheta_trans",
             "dtheta_tot", "probability"},
            {{in.L1, in.L2, d.internal, d.displacement, trans, dtheta + trans, prob}}};
    report.tables.insert(report.tables.begin() + (sp.cow ? 1 : 0), t);
  }

  void teleport_run() {
    const TeleportSpec& ts = *sp.teleport;
    std::array<BasisPairField, 3> fields;
    for (int k = 0; k < 3; ++k) {
      const WorldlineSpec& w = *sp.worldline(ts.legs[k]);
      const Worldline wl = build(w, 0.0);
      const Vec4 u0 = wl.samples().front().u;
      const Mat2c S = spin_half_boost(u0);
      fields[k] = transport_basis(wl, field_of(w), 0.0, S * Vec2c(1, 0), S * Vec2c(0, 1), sp.transport_tol);
    }
    const TeleportResult r = teleport(ts.alpha, ts.beta, fields, ts.outcome, seed);
    audit("teleport_infidelity", "teleport", 1.0 - r.fidelity, kFidelityLimit);
    Table t{"teleport", {"outcome", "probability", "fidelity", "bob0_re", "bob0_im", "bob1_re", "bob1_im"},
            {{to_string(r.outcome), r.probability, r.fidelity, r.bob_coeffs(0).real(),
              r.bob_coeffs(0).imag(), r.bob_coeffs(1).real(), r.bob_coeffs(1).imag()}}};
    std::size_t pos = (sp.cow ? 1 : 0) + (sp.interferometer ? 1 : 0);
    report.tables.insert(report.tables.begin() + pos, t);
  }
};

std::string file_name(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

void metadata(Report& r, const Document& doc, const Spec& sp, std::uint64_t seed) {
  r.metadata = {
      {"program", std::string("rqt ") + kVersion},
      {"schema", std::to_string(kSchemaVersion)},
      {"scenario", file_name(doc.path)},
      {"seed", std::to_string(seed)},
      {"tolerance", fmt17(sp.tol)},
      {"transport_tolerance", fmt17(sp.transport_tol)},
      {"model", sp.family},
      {"model_parameter", fmt17(sp.model_param)},
      {"units", "c = hbar = e = 1, length in m"},
      {"c", fmt17(units::c)},
      {"hbar", fmt17(units::hbar)},
      {"e", fmt17(units::e)},
      {"G", fmt17(units::G)},
      {"limit_norm", fmt_short(kNormLimit)},
      {"limit_gauge", fmt_short(kGaugeLimit)},
      {"limit_worldline", fmt_short(kWorldlineLimit)},
      {"limit_fidelity", fmt_short(kFidelityLimit)},
  };
}

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return fmt17(*d);
  return std::get<std::string>(c);
}

}  // namespace

// ---------------------------------------------------------------- public API

Document load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_string(ss.str(), path);
}

Document load_string(const std::string& text, const std::string& path) {
  Document d;
  d.path = path;
  try {
    d.root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return d;
}

std::string to_string(Diagnostic::Level l) {
  switch (l) {
    case Diagnostic::Level::error: return "error";
    case Diagnostic::Level::warning: return "warning";
    case Diagnostic::Level::advisory: return "advisory";
  }
  return "?";
}

std::string format(const Diagnostic& d) {
  return to_string(d.level) + ": [" + d.block + "] " + d.message;
}

std::vector<Diagnostic> validate(const Document& doc) {
  Reader rd;
  const Spec sp = compile(doc, rd);
  if (!has_errors(rd.diags)) advise(sp, rd);
  return rd.diags;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.level == Diagnostic::Level::error) return true;
  return false;
}

bool Report::audit_ok() const {
  for (const auto& a : audit)
    if (!a.pass()) return false;
  return true;
}

Document with_override(const Document& doc, const std::string& path, const std::string& value) {
  Document out{doc.path, YAML::Clone(doc.root)};
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.empty()) throw ParseError("empty sweep parameter");
  YAML::Node n = out.root;
  for (const auto& p : parts) {
    if (!n.IsMap() || !n[p]) throw ParseError("sweep parameter '" + path + "' does not exist");
    n.reset(n[p]);
  }
  if (!n.IsScalar()) throw ParseError("sweep parameter '" + path + "' is not a scalar");
  n = value;
  return out;
}

std::uint64_t default_seed(const Document& doc) {
  Reader rd;
  return compile(doc, rd).seed;
}

Report run(const Document& doc, std::uint64_t seed) {
  Reader rd;
  const Spec sp = compile(doc, rd);
  if (has_errors(rd.diags)) {
    std::string msg;
    for (const auto& d : rd.diags)
      if (d.level == Diagnostic::Level::error) msg += (msg.empty() ? "" : "\n") + format(d);
    throw ParseError(msg);
  }
  Runner r(sp, seed);
  r.qubits();
  if (sp.cow) r.cow();
  if (sp.interferometer) r.interferometer();
  if (sp.teleport) r.teleport_run();
  metadata(r.report, doc, sp, seed);
  return r.report;
}

std::pair<double, std::string> split_quantity(const std::string& s) {
  auto t = tokens(s);
  std::string unit;
  if (t.size() == 2) {
    unit = t[1];
  } else if (t.size() != 1) {
    throw ParseError("expected '<number> [unit]', got '" + s + "'");
  }
  auto v = number(t[0]);
  if (!v) throw ParseError("'" + t[0] + "' is not a number");
  return {*v, unit};
}

SweepSpec sweep_spec(const Document& doc) {
  const YAML::Node sw = doc.root && doc.root.IsMap() ? doc.root["sweep"] : YAML::Node();
  if (!sw || !sw.IsMap()) throw ParseError("scenario has no sweep block");
  auto get = [&](const char* k) {
    if (!sw[k] || !sw[k].IsScalar()) throw ParseError(std::string("sweep: missing key '") + k + "'");
    return sw[k].Scalar();
  };
  SweepSpec s;
  s.parameter = get("parameter");
  auto [from, u1] = split_quantity(get("from"));
  auto [to, u2] = split_quantity(get("to"));
  if (u1 != u2) throw ParseError("sweep: from and to must use the same unit");
  s.from = from;
  s.to = to;
  s.unit = u1;
  auto steps = split_quantity(sw["steps"] ? get("steps") : std::string("1"));
  if (!steps.second.empty() || steps.first < 1 || steps.first != std::floor(steps.first))
    throw ParseError("sweep: steps must be a positive integer");
  s.steps = static_cast<int>(steps.first);
  return s;
}

Report sweep(const Document& doc, const SweepSpec& spec, std::uint64_t seed, int threads) {
  const int n = spec.from == spec.to ? 1 : spec.steps;
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k)
    values[k] = n == 1 ? spec.from : spec.from + (spec.to - spec.from) * k / (n - 1);
  std::vector<Document> docs;
  for (double v : values)
    docs.push_back(with_override(doc, spec.parameter,
                                 fmt17(v) + (spec.unit.empty() ? "" : " " + spec.unit)));

  std::vector<Report> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k; (k = next++) < n;) {
      try {
        results[k] = run(docs[k], seed);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  Report out;
  out.metadata = results[0].metadata;
  out.metadata.push_back({"sweep_parameter", spec.parameter});
  out.metadata.push_back({"sweep_unit", spec.unit});
  out.metadata.push_back({"sweep_points", std::to_string(n)});
  Table t{"sweep", {spec.parameter}, {}};
  for (int k = 0; k < n; ++k) {
    const Table& p = results[k].tables.at(0);
    std::vector<Cell> row{values[k]};
    if (p.rows.size() == 1) {
      if (k == 0) t.columns.insert(t.columns.end(), p.columns.begin(), p.columns.end());
      row.insert(row.end(), p.rows[0].begin(), p.rows[0].end());
    } else {
      for (std::size_t r = 0; r < p.rows.size(); ++r)
        for (std::size_t c = 0; c < p.columns.size(); ++c) {
          if (k == 0) t.columns.push_back(std::to_string(r) + "." + p.columns[c]);
          row.push_back(p.rows[r][c]);
        }
    }
    t.rows.push_back(row);
    for (auto a : results[k].audit) {
      a.block = "point " + std::to_string(k) + ": " + a.block;
      out.audit.push_back(a);
    }
  }
  out.tables.push_back(t);
  out.audit_name = "sweep_audit";
  return out;
}

std::string output_stem(const Document& doc) {
  if (doc.root && doc.root.IsMap() && doc.root["output"] && doc.root["output"]["name"] &&
      doc.root["output"]["name"].IsScalar())
    return doc.root["output"]["name"].Scalar();
  return std::filesystem::path(doc.path).stem().string();
}

std::string to_csv(const Table& t, const std::vector<std::pair<std::string, std::string>>& meta) {
  std::string s;
  for (const auto& [k, v] : meta) s += "# " + k + ": " + v + "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + t.columns[c];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + cell_text(row[c]);
    s += "\n";
  }
  return s;
}

std::string to_json(const Table& t, const std::vector<std::pair<std::string, std::string>>& meta) {
  nlohmann::ordered_json j;
  j["table"] = t.name;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta) j["metadata"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      if (const double* d = std::get_if<double>(&c)) r.push_back(*d);
      else r.push_back(std::get<std::string>(c));
    }
    j["rows"].push_back(r);
  }
  return j.dump(2) + "\n";
}

Table audit_table(const Report& r) {
  Table t{r.audit_name, {"check", "block", "value", "limit", "pass"}, {}};
  for (const auto& a : r.audit)
    t.rows.push_back({a.check, a.block, a.value, a.limit, std::string(a.pass() ? "true" : "false")});
  return t;
}

std::vector<std::string> write_report(const Report& r, const std::string& dir,
                                      const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<Table> all = r.tables;
  all.push_back(audit_table(r));
  std::vector<std::string> written;
  for (const auto& t : all) {
    for (const char* ext : {".csv", ".json"}) {
      const fs::path p = fs::path(dir) / (stem + "_" + t.name + ext);
      std::ofstream os(p, std::ios::binary);
      if (!os) throw Error("cannot write " + p.string());
      os << (ext[1] == 'c' ? to_csv(t, r.metadata) : to_json(t, r.metadata));
      written.push_back(p.string());
    }
  }
  return written;
}

bool selftest(std::ostream& os) {
  bool all = true;
  auto line = [&](const std::string& name, double value, double limit) {
    const bool pass = value <= limit;
    all = all && pass;
    os << (pass ? "PASS " : "FAIL ") << name << ": " << fmt17(value) << " (limit " << fmt_short(limit)
       << ")\n";
  };
  line("sigma identities", sigma_identity_check().max(), 1e-13);

  double rt = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-10.0, 10.0);
  for (Dimension d : {Dimension::length, Dimension::time, Dimension::velocity,
                      Dimension::acceleration, Dimension::mass, Dimension::grav_mass,
                      Dimension::magnetic, Dimension::electric, Dimension::angle})
    for (const auto& u : units::accepted(d)) {
      const double v = std::pow(10.0, ud(rng));
      rt = std::max(rt, std::abs(units::from_natural(units::to_natural(v, d, u), d, u) - v) / v);
    }
  line("unit round trip", rt, 1e-12);

  {
    const double m = 1.67492749804e-27, v1 = 2200, dz = 0.02, ell = 0.1, g = 9.8;
    const double si = m * dz * ell * g / (units::hbar * v1);
    const double nat = cow_phase<double>(units::to_natural(m, Dimension::mass, "kg"),
                                         units::to_natural(v1, Dimension::velocity, "m/s"), dz, ell,
                                         units::to_natural(g, Dimension::acceleration, "m/s^2"),
                                         CowMode::standard);
    line("COW standard limit vs SI", std::abs(nat - si) / si, 1e-12);
  }
  {
    auto model = std::make_shared<SpacetimeModel>(rindler_model(1e-3));
    const Worldline wl = static_observer(model, Event{Vec4(0, 0, 0, 0), model->chart()}, 1000.0);
    FermionState s{Vec2c(0.6, cplx(0, 0.8)), label_at(wl.samples().front())};
    line("Rindler transport norm drift", transport(s, wl, uniform_field(Vec3::Zero(), Vec3(0, 0, 0.01)), 1.0, 1e-11).max_norm_drift, 1e-9);
  }
  {
    auto model = std::make_shared<SpacetimeModel>(schwarzschild_model(1.0));
    const Worldline ray = integrate_null_geodesic(model, Event{Vec4(0, 10, kPi / 2, 0), model->chart()},
                                                  Vec4(1, -0.6, 0.48, 0.64), 12.0, 1e-11);
    const PhotonTransport t = transport_photon(from_jones(Vec2c(1, cplx(0, 1)) / std::sqrt(2.0),
                                                          label_at(ray.samples().front())), ray, 1e-11);
    line("photon norm drift", t.max_norm_drift, 1e-9);
    line("photon transversality", t.max_transversality, 1e-9);
  }
  {
    SternGerlachSetup setup;
    setup.m = Vec4(0, 0.6, 0, 0.8);
    setup.u = Vec4(1.25, 0, 0.75, 0);
    const SpinOperator op = spin_operator(setup);
    line("Stern-Gerlach hermiticity", hermiticity_residual(op.observable), 1e-12);
  }
  {
    auto model = std::make_shared<SpacetimeModel>(minkowski_model());
    std::array<BasisPairField, 3> f;
    for (int k = 0; k < 3; ++k) {
      const Worldline wl = circular_orbit(model, 1.0 + k, 0.3 + 0.1 * k, 0.5);
      const Mat2c S = spin_half_boost(wl.samples().front().u);
      f[k] = transport_basis(wl, no_field(), 0.0, S * Vec2c(1, 0), S * Vec2c(0, 1), 1e-11);
    }
    double worst = 0.0;
    for (int o = 0; o < 4; ++o)
      worst = std::max(worst, 1.0 - teleport(0.6, cplx(0, 0.8), f, static_cast<BellOutcome>(o), 1).fidelity);
    line("teleportation infidelity", worst, 1e-9);
  }
  return all;
}

}  // namespace rqt::scenario
