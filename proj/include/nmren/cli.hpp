#pragma once

// Command-line front end. `run` executes one case (or a ladder of them),
// verifies it against exact iteration and writes a CSV or JSON report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmren/cases.hpp"
#include "nmren/error.hpp"
#include "nmren/verify.hpp"

namespace nmren {

struct RunConfig {
  std::string case_name;
  std::string config_path;
  std::optional<double> epsilon, eta, lambda, theta;
  int order = 1;
  std::string closure;  // empty: the case's own
  std::optional<long> window;
  std::string ladder;  // comma-separated values or "default"
  std::string output = "json";
  bool output_given = false;
  std::string out_path;
  bool dump_solution = false;
  std::string gate;
};

/// metric op value, e.g. order>=1.7 or sup_error<=0.01.
struct Gate {
  std::string metric;
  std::string op;
  double value = 0.0;

  bool holds(double measured) const {
    if (op == ">=") return measured >= value;
    if (op == "<=") return measured <= value;
    if (op == ">") return measured > value;
    return measured < value;
  }
};

inline Gate parse_gate(const std::string& text) {
  for (const char* op : {">=", "<=", ">", "<"}) {
    auto pos = text.find(op);
    if (pos == std::string::npos) continue;
    Gate g;
    g.metric = text.substr(0, pos);
    g.op = op;
    std::string rhs = text.substr(pos + std::string(op).size());
    try {
      std::size_t used = 0;
      g.value = std::stod(rhs, &used);
      if (used != rhs.size()) throw std::invalid_argument(rhs);
    } catch (const std::exception&) {
      throw Error("cli", "gate threshold '" + rhs + "' is not a number");
    }
    if (g.metric == "sup") g.metric = "sup_error";
    if (g.metric == "residual") g.metric = "residual_sup";
    if (g.metric != "order" && g.metric != "sup_error" && g.metric != "residual_sup")
      throw Error("cli", "gate metric must be order, sup_error or residual_sup, got '" + g.metric + "'");
    return g;
  }
  throw Error("cli", "gate '" + text + "' needs one of >=, <=, >, <");
}

inline std::vector<double> parse_ladder(const std::string& text, const CaseStudy& cs) {
  if (text == "default") return default_ladder(cs);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("cli", "ladder entry '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw Error("cli", "empty ladder");
  return out;
}

inline void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cli", "cannot open " + tmp + " for writing");
    f << content;
    if (!f) throw Error("cli", "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cli", "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

inline nlohmann::ordered_json dump_terms(const std::vector<DumpTerm>& terms) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& t : terms)
    a.push_back({{"coeff_re", t.coeff.real()},
                 {"coeff_im", t.coeff.imag()},
                 {"base_re", t.base.real()},
                 {"base_im", t.base.imag()},
                 {"anchor", t.anchor},
                 {"degree", t.degree}});
  return a;
}

/// Solution document: amplitudes, per-order sequences, samples over the
/// window and the residual scan of the original equation.
inline nlohmann::ordered_json solution_document(const CaseStudy& cs, const EngineOptions& eo, long last) {
  EngineRun run = run_engine(cs, eo);
  CaseModel model = build(cs);
  nlohmann::ordered_json j;
  j["case"] = case_name(cs);
  j["parameters"] = params_to_json(cs);
  j["mode"] = run.mode == ExpansionMode::TR ? "TR" : "HTR";
  j["closure"] = to_string(run.closure);
  j["order"] = run.order;
  j["form"] = to_string(run.form);
  j["renormalization"] = run.renorm_equations;
  j["solution"] = run.solution;
  nlohmann::ordered_json amps = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < run.amplitude_names.size(); ++a)
    amps.push_back({{"name", run.amplitude_names[a]},
                    {"initial_re", run.amplitude_initial[a].real()},
                    {"initial_im", run.amplitude_initial[a].imag()},
                    {"metadata", a < run.amplitude_metadata.size() ? run.amplitude_metadata[a] : ""}});
  j["amplitudes"] = amps;
  nlohmann::ordered_json orders = nlohmann::ordered_json::array();
  for (const auto& o : run.orders) orders.push_back(dump_terms(o));
  j["orders"] = orders;
  j["global_terms"] = dump_terms(run.global_terms);
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (long n = 0; n <= last; ++n) {
    auto v = run.value(n);
    samples.push_back({{"n", n}, {"re", v.real()}, {"im", v.imag()}});
  }
  j["samples"] = samples;
  std::function<FloatComplex(long)> y = run.value;
  ResidualScan scan = residual_scan<FloatComplex>(y, model.residual, 0, last);
  j["residual_scan"] = {{"first", scan.first}, {"sup", scan.sup}, {"argsup", scan.argsup}, {"values", scan.values}};
  j["warnings"] = run.warnings;
  return j;
}

/// Runs a parsed configuration. Returns the exit status.
inline int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    CaseStudy cs;
    if (!cfg.config_path.empty()) {
      std::ifstream f(cfg.config_path);
      if (!f) throw Error("cli", "cannot read config " + cfg.config_path);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw Error("cli", std::string("config is not valid JSON: ") + e.what());
      }
      cs = from_json(doc);
      if (!cfg.case_name.empty() && cfg.case_name != case_name(cs))
        throw Error("cli", "--case " + cfg.case_name + " contradicts the config case " + case_name(cs));
    } else if (!cfg.case_name.empty()) {
      cs = default_case(cfg.case_name);
    } else {
      throw Error("cli", "one of --case or --config is required");
    }
    auto override_with = [&cs](const char* key, const std::optional<double>& v) {
      if (v) cs = with_parameter(cs, key, *v);
    };
    override_with("epsilon", cfg.epsilon);
    override_with("eta", cfg.eta);
    override_with("lambda", cfg.lambda);
    override_with("theta", cfg.theta);
    validate(cs);

    if (cfg.output != "csv" && cfg.output != "json") throw Error("cli", "--output must be csv or json");
    if (cfg.dump_solution && cfg.output_given && cfg.output == "csv")
      throw Error("cli", "--dump-solution writes JSON; drop --output csv");
    if (cfg.window && *cfg.window < 0) throw Error("cli", "--window must be nonnegative");
    std::optional<Gate> gate;
    if (!cfg.gate.empty()) gate = parse_gate(cfg.gate);

    RunOptions ro;
    ro.engine.order = cfg.order;
    if (!cfg.closure.empty()) ro.engine.closure = parse_closure(cfg.closure);
    ro.window_last = cfg.window;

    VerificationReport report;
    CaseStudy last_case = cs;
    if (!cfg.ladder.empty()) {
      auto values = parse_ladder(cfg.ladder, cs);
      report = run_ladder(cs, values, ro);
      last_case = with_parameter(cs, small_parameter_key(cs), values.back());
    } else {
      report = run_case(cs, ro);
    }

    std::string content;
    if (cfg.dump_solution)
      content = solution_document(last_case, ro.engine, report.window.last).dump(2) + "\n";
    else if (cfg.output == "csv")
      content = to_csv(report);
    else
      content = to_json(report).dump(2) + "\n";
    if (cfg.out_path.empty())
      out << content;
    else
      write_atomic(cfg.out_path, content);

    if (gate) {
      double measured = 0.0;
      if (gate->metric == "order") {
        if (!report.empirical_order) throw Error("cli", "gate on order needs a ladder of at least 3 points");
        measured = *report.empirical_order;
      } else {
        measured = gate->metric == "sup_error" ? report.sup_error : report.residual_sup;
      }
      if (!gate->holds(measured)) {
        err << "gate failed: " << gate->metric << " = " << format_double(measured) << " (need " << gate->op << " "
            << format_double(gate->value) << ")\n";
        return 2;
      }
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Renormalization and homotopy renormalization for difference equations"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string case_list;
  for (const auto& n : case_names()) case_list += (case_list.empty() ? "" : ", ") + n;
  auto* run = app.add_subcommand("run", "Run a case and verify it against exact iteration");
  run->add_option("--case", cfg.case_name, "Case name: " + case_list);
  run->add_option("--config", cfg.config_path, "JSON config {\"case\": ..., \"params\": {...}}");
  run->add_option("--epsilon", cfg.epsilon, "Override eps");
  run->add_option("--eta", cfg.eta, "Override eta (htr-cubic)");
  run->add_option("--lambda", cfg.lambda, "Override lambda (htr-domain-wall)");
  run->add_option("--theta", cfg.theta, "Override theta (van-der-pol)");
  run->add_option("--order", cfg.order, "Expansion order K (1 or 2)")->check(CLI::Range(1, 2));
  run->add_option("--closure", cfg.closure, "Closure policy")->check(CLI::IsMember({"linear", "full"}));
  run->add_option("--window", cfg.window, "Last index of the comparison window");
  run->add_option("--ladder", cfg.ladder, "Comma-separated small-parameter values, or 'default'");
  auto* output = run->add_option("--output", cfg.output, "Report format: csv or json")
                     ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--out-path", cfg.out_path, "Write the report here instead of stdout");
  run->add_flag("--dump-solution", cfg.dump_solution, "Emit the solution document (JSON) instead of the report");
  run->add_option("--gate", cfg.gate, "Acceptance gate such as order>=1.7; exit 2 when it fails");
  run->allow_extras(false);
  app.allow_extras(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << (run->parsed() ? run->help() : app.help());
    return 1;
  }
  cfg.output_given = output->count() > 0;
  if (!cfg.case_name.empty()) {
    bool known = false;
    for (const auto& n : case_names()) known = known || n == cfg.case_name;
    if (!known) {
      err << "error: cli: unknown case '" << cfg.case_name << "' (" << case_list << ")\n";
      return 1;
    }
  }
  return execute(cfg, out, err);
}

}  // namespace nmren
