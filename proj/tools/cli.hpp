#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "envelope/envelope.hpp"

namespace envelope::cli {

enum ExitCode : int {
  kOk = 0,
  kViolated = 1,
  kParseError = 2,
  kPrecondition = 3,
  kTimeout = 4,
  kUsage = 5,
  kDivergence = 6,
};

struct RunConfig {
  std::string command;
  std::string model_path;
  std::vector<std::string> controllers;
  std::vector<std::string> properties;
  std::string constraint;
  std::string algorithm = "synthesis-heuristic";
  std::string output = "text";
  std::string out_dir;
  double timeout_seconds = 300;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t count = 50;
  bool timing = false;
  bool corrupt_synthesis = false;  // oracle-diff self-test hook
};

class SelectorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'", 1, 1, "");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

inline const Lts& select(const std::vector<Lts>& group, const std::string& name, const char* what) {
  if (name.empty()) {
    if (group.size() == 1) return group.front();
    throw SelectorError(std::string("model declares ") + std::to_string(group.size()) + " " + what +
                        "s; select one by name");
  }
  for (const auto& l : group)
    if (l.name() == name) return l;
  throw SelectorError(std::string("no ") + what + " named '" + name + "'");
}

inline std::string at(const std::vector<std::string>& v, std::size_t i) {
  return i < v.size() ? v[i] : std::string();
}

inline RunOptions run_options(const RunConfig& cfg) {
  return RunOptions::with_timeout(
      std::chrono::milliseconds(static_cast<std::int64_t>(cfg.timeout_seconds * 1000.0)),
      std::max<std::size_t>(1, cfg.jobs));
}

inline void print_trace(std::ostream& out, const std::vector<std::string>& trace) {
  if (trace.empty()) out << " <empty>";
  for (const auto& a : trace) out << ' ' << a;
  out << '\n';
}

inline void print_deviation(std::ostream& out, const Deviation& d, const Lts& e, const char* indent) {
  if (d.empty()) out << indent << "(no extra transitions)\n";
  for (const auto& t : d) out << indent << to_string(t, e) << '\n';
}

inline void print_report(std::ostream& out, const RobustnessReport& r, const Lts& e, bool timing) {
  const auto& s = r.delta.stats;
  out << "model:      " << r.model << '\n';
  out << "algorithm:  " << to_string(r.algorithm) << '\n';
  out << "analysis:   " << r.environment << " / " << r.controller << " / " << r.property;
  if (r.constraint) out << " / constraint " << *r.constraint;
  out << '\n';
  if (r.algorithm != Algorithm::bruteforce) {
    out << "|Q_F| = " << s.meta_states << "  |W| = " << s.winning_set;
    if (r.environment_stage) {
      out << "  |W_Penv| =";
      for (std::size_t i = 0; i < r.envelope_stage.size(); ++i)
        out << (i ? "," : " ") << r.envelope_stage[i].winning_set;
    }
    out << '\n';
  }
  out << "subsets examined: " << s.subsets_examined;
  if (timing) out << "  wall: " << s.wall.count() << " ms";
  out << '\n';
  out << "|Delta| = " << r.delta.deviations.size() << "  |d_max| = " << r.delta.largest() << '\n';
  for (std::size_t i = 0; i < r.delta.deviations.size(); ++i) {
    const auto& d = r.delta.deviations[i];
    out << "Delta[" << i << "] (" << d.size() << " transitions)\n";
    print_deviation(out, d, e, "  ");
  }
}

struct Selection {
  const Lts* environment = nullptr;
  const Lts* controller = nullptr;
  const Lts* property = nullptr;
  const Lts* constraint = nullptr;
};

inline Selection select_all(const ModelFile& m, const RunConfig& cfg) {
  Selection s;
  s.environment = &*m.environment;
  s.controller = &select(m.controllers, at(cfg.controllers, 0), "controller");
  s.property = &select(m.properties, at(cfg.properties, 0), "propertie");
  if (!cfg.constraint.empty()) s.constraint = &select(m.constraints, cfg.constraint, "constraint");
  return s;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out) {
  auto m = load_model(cfg.model_path);
  auto sel = select_all(m, cfg);
  Lts closed = parallel_compose(*sel.environment, *sel.controller);
  Verdict v = check_safety(closed, *sel.property);
  if (cfg.output == "json") {
    Json j = verdict_json(v);
    j["model"] = cfg.model_path;
    out << j.dump(2) << '\n';
  } else {
    out << (v.satisfied ? "satisfied" : "violated") << ": " << sel.environment->name() << " || "
        << sel.controller->name() << " |= " << sel.property->name() << '\n';
    if (v.counterexample) {
      out << "counterexample:";
      print_trace(out, *v.counterexample);
    }
    if (v.warning) out << "warning: " << *v.warning << '\n';
  }
  return v.satisfied ? kOk : kViolated;
}

inline void write_dot_files(const RunConfig& cfg, const RobustnessReport& r, const Lts& e,
                            std::ostream& out) {
  for (std::size_t i = 0; i < r.delta.deviations.size(); ++i) {
    const auto& d = r.delta.deviations[i];
    Lts deviated = apply_deviation(e, d);
    std::string dot = dot_export(deviated, e.transitions(), d.triples());
    if (cfg.out_dir.empty()) {
      out << "// Delta[" << i << "]\n" << dot;
    } else {
      std::filesystem::create_directories(cfg.out_dir);
      auto path = std::filesystem::path(cfg.out_dir) / ("delta_" + std::to_string(i) + ".dot");
      std::ofstream f(path);
      f << dot;
      out << path.string() << '\n';
    }
  }
}

inline int cmd_robustness(const RunConfig& cfg, std::ostream& out) {
  auto algorithm = parse_algorithm(cfg.algorithm);
  auto m = load_model(cfg.model_path);
  auto sel = select_all(m, cfg);
  auto r = analyze(*sel.environment, *sel.controller, *sel.property, sel.constraint, *algorithm,
                   run_options(cfg));
  r.model = cfg.model_path;
  if (cfg.output == "json") {
    out << report_json(r, *sel.environment, {cfg.timing}).dump(2) << '\n';
  } else if (cfg.output == "dot") {
    write_dot_files(cfg, r, *sel.environment, out);
  } else {
    print_report(out, r, *sel.environment, cfg.timing);
  }
  return kOk;
}

inline int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const bool by_controller = cfg.controllers.size() == 2;
  const bool by_property = cfg.properties.size() == 2;
  if (by_controller == by_property)
    throw CLI::ValidationError("compare needs exactly two --controller or exactly two --property selectors");
  auto algorithm = parse_algorithm(cfg.algorithm);
  auto m = load_model(cfg.model_path);
  const Lts& e = *m.environment;
  const Lts* p_env = cfg.constraint.empty() ? nullptr : &select(m.constraints, cfg.constraint, "constraint");
  ComparisonResult r;
  std::string left;
  std::string right;
  if (by_controller) {
    const Lts& c1 = select(m.controllers, cfg.controllers[0], "controller");
    const Lts& c2 = select(m.controllers, cfg.controllers[1], "controller");
    const Lts& p = select(m.properties, at(cfg.properties, 0), "propertie");
    r = compare_controllers(e, c1, c2, p, p_env, *algorithm, run_options(cfg));
    left = c1.name();
    right = c2.name();
  } else {
    const Lts& c = select(m.controllers, at(cfg.controllers, 0), "controller");
    const Lts& p1 = select(m.properties, cfg.properties[0], "propertie");
    const Lts& p2 = select(m.properties, cfg.properties[1], "propertie");
    r = compare_properties(e, c, p1, p2, p_env, *algorithm, run_options(cfg));
    left = p1.name();
    right = p2.name();
  }
  r.left.model = r.right.model = cfg.model_path;
  if (cfg.output == "json") {
    Json j = comparison_json(r, e, {cfg.timing});
    j["model"] = cfg.model_path;
    j["left_name"] = left;
    j["right_name"] = right;
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << left << " vs " << right << ": " << to_string(r.verdict) << '\n';
  out << "|Delta(" << left << ")| = " << r.left.delta.deviations.size() << "  |Delta(" << right
      << ")| = " << r.right.delta.deviations.size() << '\n';
  if (r.left_witness) {
    out << "witness only covered by " << left << ":\n";
    print_deviation(out, *r.left_witness, e, "  ");
  }
  if (r.right_witness) {
    out << "witness only covered by " << right << ":\n";
    print_deviation(out, *r.right_witness, e, "  ");
  }
  return kOk;
}

/// Runs all three algorithms; returns the first divergence, if any.
inline std::optional<std::string> diff_algorithms(const Lts& e, const Lts& c, const Lts& p,
                                                  const Lts* p_env, const RunConfig& cfg) {
  auto run = run_options(cfg);
  auto brute = analyze(e, c, p, p_env, Algorithm::bruteforce, run).delta.deviations;
  auto plain = analyze(e, c, p, p_env, Algorithm::synthesis, run).delta.deviations;
  auto heur = analyze(e, c, p, p_env, Algorithm::synthesis_heuristic, run).delta.deviations;
  if (cfg.corrupt_synthesis && !plain.empty()) {
    auto ts = plain.front().triples();
    if (ts.empty()) ts.push_back({0, 0, 0});
    else ts.pop_back();
    plain.front() = Deviation(ts);
  }
  auto compare = [&](const std::vector<Deviation>& a, const std::vector<Deviation>& b,
                     const char* name) -> std::optional<std::string> {
    std::string ja = delta_json(a, e).dump();
    std::string jb = delta_json(b, e).dump();
    if (ja == jb) return std::nullopt;
    std::ostringstream msg;
    msg << "bruteforce and " << name << " disagree\n";
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      if (i < a.size() && i < b.size() && a[i] == b[i]) continue;
      msg << "first divergent member #" << i << ":\n";
      msg << "  bruteforce: " << (i < a.size() ? deviation_json(a[i], e).dump() : "<none>") << '\n';
      msg << "  " << name << ": " << (i < b.size() ? deviation_json(b[i], e).dump() : "<none>") << '\n';
      break;
    }
    return msg.str();
  };
  if (auto d = compare(brute, plain, "synthesis")) return d;
  return compare(brute, heur, "synthesis-heuristic");
}

inline int cmd_oracle_diff(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.model_path.empty()) {
    auto m = load_model(cfg.model_path);
    auto sel = select_all(m, cfg);
    if (auto d = diff_algorithms(*sel.environment, *sel.controller, *sel.property, sel.constraint, cfg)) {
      out << *d;
      return kDivergence;
    }
    out << "identical: bruteforce, synthesis, synthesis-heuristic\n";
    return kOk;
  }
  if (!cfg.seed_given) throw CLI::ValidationError("oracle-diff needs --model or --seed");
  std::mt19937_64 rng(cfg.seed);
  std::size_t done = 0;
  while (done < cfg.count) {
    InstanceShape shape;
    shape.with_constraint = rng() % 3 == 0;
    auto inst = random_instance(rng, shape);
    if (!inst) continue;
    ++done;
    const Lts* p_env = inst->constraint ? &*inst->constraint : nullptr;
    if (auto d = diff_algorithms(inst->environment, inst->controller, inst->property, p_env, cfg)) {
      ModelFile mf;
      mf.environment = inst->environment;
      mf.controllers = {inst->controller};
      mf.properties = {inst->property};
      if (inst->constraint) mf.constraints = {*inst->constraint};
      out << "instance " << done << " of seed " << cfg.seed << ":\n" << serialize(mf) << *d;
      return kDivergence;
    }
  }
  out << "identical on " << done << " generated instances (seed " << cfg.seed << ")\n";
  return kOk;
}

inline int cmd_fmt(const RunConfig& cfg, std::ostream& out) {
  out << serialize(load_model(cfg.model_path));
  return kOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Safe environmental envelopes of discrete transition systems", "envelope"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool model_required) {
    auto* opt = sub->add_option("--model", cfg.model_path, "Model file")->check(CLI::ExistingFile);
    if (model_required) opt->required();
    sub->add_option("--controller", cfg.controllers, "Controller declaration (repeat twice for compare)");
    sub->add_option("--property", cfg.properties, "Property declaration (repeat twice for compare)");
    sub->add_option("--constraint", cfg.constraint, "Environmental constraint declaration");
    sub->add_option("--output", cfg.output, "Output format")
        ->check(CLI::IsMember({"text", "json", "dot"}));
  };
  auto add_analysis = [&](CLI::App* sub) {
    sub->add_option("--algorithm", cfg.algorithm, "bruteforce | synthesis | synthesis-heuristic")
        ->check(CLI::IsMember({"bruteforce", "synthesis", "synthesis-heuristic"}));
    sub->add_option("--timeout", cfg.timeout_seconds, "Time budget in seconds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--timing", cfg.timing, "Report measured wall time");
  };

  auto* check = app.add_subcommand("check", "Verify E || C |= P");
  add_common(check, true);
  auto* robustness = app.add_subcommand("robustness", "Compute the robustness Delta");
  add_common(robustness, true);
  add_analysis(robustness);
  robustness->add_option("--out-dir", cfg.out_dir, "Directory for DOT files");
  auto* compare = app.add_subcommand("compare", "Compare robustness of two controllers or two properties");
  add_common(compare, true);
  add_analysis(compare);
  auto* oracle = app.add_subcommand("oracle-diff", "Cross-check all three algorithms");
  add_common(oracle, false);
  add_analysis(oracle);
  oracle->add_option("--seed", cfg.seed, "Seed for generated instances")
      ->each([&](const std::string&) { cfg.seed_given = true; });
  oracle->add_option("--count", cfg.count, "Number of generated instances");
  oracle->add_flag("--corrupt-synthesis", cfg.corrupt_synthesis)->group("");
  auto* fmt = app.add_subcommand("fmt", "Re-serialize a model in canonical form");
  fmt->add_option("--model", cfg.model_path, "Model file")->required()->check(CLI::ExistingFile);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (cfg.output == "dot" && !robustness->parsed()) {
    err << "error: --output dot is only available for robustness\n";
    return kUsage;
  }

  try {
    if (check->parsed()) return detail::cmd_check(cfg, out);
    if (robustness->parsed()) return detail::cmd_robustness(cfg, out);
    if (compare->parsed()) return detail::cmd_compare(cfg, out);
    if (oracle->parsed()) return detail::cmd_oracle_diff(cfg, out);
    if (fmt->parsed()) return detail::cmd_fmt(cfg, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kPrecondition;
  } catch (const SelectorError& e) {
    err << "selector error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const LtsError& e) {
    err << "model error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const TimeoutError& e) {
    err << "timeout: " << e.what() << '\n';
    return kTimeout;
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace envelope::cli
