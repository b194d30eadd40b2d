#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "rqt/errors.hpp"

namespace rqt::scenario {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { ok = 0, usage = 1, parse = 2, tolerance = 3, domain = 4 };

class ParseError : public Error {
 public:
  using Error::Error;
};

// Scenario files are YAML; dimensional scalars carry a unit suffix
// ("2 cm", "0 0 1 T").
struct Document {
  std::string path;  // as given, only the file name goes into reports
  YAML::Node root;
};

// Throws ParseError on malformed YAML or a missing file.
Document load(const std::string& path);
Document load_string(const std::string& text, const std::string& path = "<string>");

struct Diagnostic {
  enum class Level { error, warning, advisory };
  Level level = Level::error;
  std::string block;  // dotted path, e.g. "worldlines.w1"
  std::string message;
};
std::string to_string(Diagnostic::Level l);
std::string format(const Diagnostic& d);

// Schema, reference and unit checks plus validity advisories. Never runs
// an integration.
std::vector<Diagnostic> validate(const Document& doc);
bool has_errors(const std::vector<Diagnostic>& diags);

using Cell = std::variant<double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct AuditItem {
  std::string check;
  std::string block;
  double value = 0.0;
  double limit = 0.0;  // inf: informational
  bool pass() const { return value <= limit; }
};

struct Report {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<Table> tables;  // tables[0] is the primary result
  std::vector<AuditItem> audit;
  std::string audit_name = "audit";
  bool audit_ok() const;
};

// Replaces the scalar at a dotted path ("cow.dz"); throws ParseError when
// the path does not name a scalar.
Document with_override(const Document& doc, const std::string& path, const std::string& value);

// Runs everything the document declares. Throws ParseError when validation
// reports errors, DomainError or ToleranceError from the numerics.
Report run(const Document& doc, std::uint64_t seed);
std::uint64_t default_seed(const Document& doc);

struct SweepSpec {
  std::string parameter;
  double from = 0.0;
  double to = 0.0;
  int steps = 1;
  std::string unit;
};
// From the document's sweep block; throws ParseError if absent or bad.
SweepSpec sweep_spec(const Document& doc);
// "3 cm" -> (3, "cm")
std::pair<double, std::string> split_quantity(const std::string& s);

// One row per value, points evaluated on a worker pool and assembled in
// order. The audit carries every point's items with the point index.
Report sweep(const Document& doc, const SweepSpec& spec, std::uint64_t seed, int threads = 0);

std::string output_stem(const Document& doc);

std::string to_csv(const Table& t, const std::vector<std::pair<std::string, std::string>>& meta);
std::string to_json(const Table& t, const std::vector<std::pair<std::string, std::string>>& meta);
Table audit_table(const Report& r);

// Writes <stem>_<table>.csv/.json for each table plus the audit; returns
// the paths written.
std::vector<std::string> write_report(const Report& r, const std::string& dir,
                                      const std::string& stem);

// Quick invariant suite; one PASS/FAIL line per check. Returns true when
// everything passes.
bool selftest(std::ostream& os);

}  // namespace rqt::scenario
