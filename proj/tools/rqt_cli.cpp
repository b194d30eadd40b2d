// rqt: run, validate and sweep scenario files
#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "rqt/scenario.hpp"

namespace sc = rqt::scenario;

namespace {

std::string out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("RQT_OUT_DIR"); env && *env) return env;
  return ".";
}

void print_written(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

int audit_exit(const sc::Report& r) {
  if (r.audit_ok()) return sc::ok;
  for (const auto& a : r.audit)
    if (!a.pass())
      std::cerr << "tolerance: [" << a.block << "] " << a.check << " = " << a.value
                << " exceeds " << a.limit << "\n";
  return sc::tolerance;
}

// maps library exceptions to exit codes
template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const sc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return sc::parse;
  } catch (const rqt::ToleranceError& e) {
    std::cerr << "tolerance error: " << e.what() << "\n";
    return sc::tolerance;
  } catch (const rqt::Error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return sc::domain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sc::domain;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rqt: relativistic qubit transport scenarios"};
  app.require_subcommand(1);

  std::string file, out;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "execute a scenario and write CSV/JSON reports");
  run->add_option("scenario", file, "scenario file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out, "output directory (default $RQT_OUT_DIR or .)");

  auto* val = app.add_subcommand("validate", "check a scenario without running it");
  val->add_option("scenario", file, "scenario file")->required();

  std::string param, from, to;
  int steps = 0, threads = 0;
  auto* sw = app.add_subcommand("sweep", "run a scenario over a parameter range");
  sw->add_option("scenario", file, "scenario file")->required();
  sw->add_option("--param", param, "dotted path of the swept scalar, e.g. cow.dz");
  sw->add_option("--from", from, "first value with unit, e.g. '1 cm'");
  sw->add_option("--to", to, "last value with unit");
  sw->add_option("--steps", steps, "number of points");
  sw->add_option("--threads", threads, "worker threads (default: hardware)");
  sw->add_option("--seed", seed, "override the scenario seed");
  sw->add_option("--out", out, "output directory (default $RQT_OUT_DIR or .)");

  app.add_subcommand("selftest", "run the quick invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sc::usage;
  }

  if (*run) {
    return guarded([&] {
      const sc::Document doc = sc::load(file);
      const sc::Report r = sc::run(doc, seed.value_or(sc::default_seed(doc)));
      print_written(sc::write_report(r, out_dir(out), sc::output_stem(doc)));
      return audit_exit(r);
    });
  }
  if (*val) {
    return guarded([&] {
      const auto diags = sc::validate(sc::load(file));
      for (const auto& d : diags) std::cout << sc::format(d) << "\n";
      if (sc::has_errors(diags)) return int(sc::parse);
      std::cout << "ok\n";
      return int(sc::ok);
    });
  }
  if (*sw) {
    return guarded([&] {
      const sc::Document doc = sc::load(file);
      if (const auto diags = sc::validate(doc); sc::has_errors(diags)) {
        for (const auto& d : diags) std::cerr << sc::format(d) << "\n";
        return int(sc::parse);
      }
      sc::SweepSpec spec;
      if (param.empty()) {
        spec = sc::sweep_spec(doc);
      } else {
        if (from.empty()) throw sc::ParseError("--param needs --from");
        spec.parameter = param;
        std::tie(spec.from, spec.unit) = sc::split_quantity(from);
        spec.to = spec.from;
        if (!to.empty()) {
          auto [v, u] = sc::split_quantity(to);
          if (u != spec.unit) throw sc::ParseError("--from and --to must use the same unit");
          spec.to = v;
        }
        spec.steps = steps > 0 ? steps : 1;
      }
      const sc::Report r = sc::sweep(doc, spec, seed.value_or(sc::default_seed(doc)), threads);
      print_written(sc::write_report(r, out_dir(out), sc::output_stem(doc)));
      return audit_exit(r);
    });
  }
  return sc::selftest(std::cout) ? sc::ok : sc::tolerance;
}
