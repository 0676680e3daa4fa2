#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mkdv/checks.hpp"
#include "mkdv/io.hpp"
#include "mkdv/marchenko.hpp"
#include "mkdv/solution.hpp"
#include "mkdv/triplet.hpp"

namespace {

constexpr int kOk = 0;        // success
constexpr int kUsage = 1;     // usage or config error
constexpr int kFail = 2;      // validation or check failure
constexpr int kIoNumeric = 3; // I/O or numeric-range failure

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot open output path: " + path);
  out << content;
  out.flush();
  if (!out.good())
    throw std::ios_base::failure("failed writing output: " + path);
}

std::pair<std::string, std::string> split_kv(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos)
    throw mkdv::config_error("expected key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto piece =
        s.substr(pos, comma == std::string::npos ? std::string::npos
                                                 : comma - pos);
    out.push_back(mkdv::parse_number_token(piece));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::map<std::string, double> merged_tolerances(
    const mkdv::RunConfig& cfg, const std::vector<std::string>& flags) {
  auto tols = cfg.tolerances;
  for (const auto& kv : flags) {
    const auto [key, val] = split_kv(kv);
    tols[key] = mkdv::parse_number_token(val);
  }
  return tols;
}

void require_format(const std::string& format,
                    const std::vector<std::string>& allowed) {
  for (const auto& a : allowed)
    if (format == a) return;
  std::string opts;
  for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
  throw mkdv::config_error("--format " + format +
                           " not supported here; expected one of: " + opts);
}

int cmd_validate(const std::string& config, const std::string& output,
                 const std::string& format) {
  const auto cfg = mkdv::load_config(config);
  const auto rep = mkdv::check_admissible(cfg.triplet);
  write_output(output, format == "json" ? mkdv::validation_to_json(rep)
                                        : mkdv::validation_to_text(rep));
  return rep.all_ok() ? kOk : kFail;
}

int cmd_solve(const std::string& config, const std::string& output,
              const std::string& format, bool oracle) {
  const auto cfg = mkdv::load_config(config);
  const auto rep = mkdv::check_admissible(cfg.triplet);
  if (!rep.all_ok()) {
    std::cerr << "validation failed:\n" << mkdv::validation_to_text(rep);
    return kFail;
  }
  const auto sols = mkdv::solve_all(cfg.triplet);

  double worst_oracle = 0.0;
  std::map<std::string, double> dev;
  if (oracle) {
    const std::pair<const char*, mkdv::WhichIntegral> wanted[] = {
        {"P", mkdv::WhichIntegral::P},
        {"Q", mkdv::WhichIntegral::Q},
        {"N", mkdv::WhichIntegral::N}};
    for (const auto& [name, which] : wanted) {
      const mkdv::Mat& x = which == mkdv::WhichIntegral::P ? sols.P
                           : which == mkdv::WhichIntegral::Q ? sols.Q
                                                             : sols.N;
      const mkdv::Mat o = mkdv::quadrature_oracle(cfg.triplet, which);
      const double rel = norm_inf(o - x) / norm_inf(x);
      dev[name] = rel;
      worst_oracle = std::max(worst_oracle, rel);
    }
  }

  std::string out;
  if (format == "json") {
    auto j = nlohmann::json::parse(mkdv::solutions_to_json(cfg.triplet, sols));
    if (oracle)
      for (const auto& [name, rel] : dev) j["oracle_relative"][name] = rel;
    out = j.dump(2) + "\n";
  } else {
    out = mkdv::solutions_to_text(cfg.triplet, sols);
    if (oracle) {
      std::ostringstream os;
      for (const auto& [name, rel] : dev)
        os << "oracle relative deviation " << name << ": "
           << mkdv::format_double(rel) << "\n";
      out += os.str();
    }
  }
  write_output(output, out);

  if (oracle && worst_oracle > 1e-8) {
    std::cerr << "oracle cross-check failed: worst relative deviation "
              << mkdv::format_double(worst_oracle) << " > 1e-8\n";
    return kFail;
  }
  return kOk;
}

int cmd_eval(const std::string& config, const std::string& output,
             const std::string& format) {
  const auto cfg = mkdv::load_config(config);
  if (!cfg.grid)
    throw mkdv::config_error("grid: missing (required for eval)");
  if (cfg.grid->t_values.empty())
    throw mkdv::config_error("grid.t_values: must be nonempty for eval");
  const auto rep = mkdv::check_admissible(cfg.triplet);
  if (!rep.all_ok()) {
    std::cerr << "validation failed:\n" << mkdv::validation_to_text(rep);
    return kFail;
  }
  const mkdv::SolutionEvaluator ev(cfg.triplet);
  const auto rows = ev.evaluate_grid(*cfg.grid);
  write_output(output, format == "json" ? mkdv::grid_to_json(rows)
                                        : mkdv::grid_to_csv(rows));
  return kOk;
}

int cmd_check(const std::string& config, const std::string& output,
              const std::string& format,
              const std::vector<std::string>& tol_flags) {
  const auto cfg = mkdv::load_config(config);
  const auto rep = mkdv::check_admissible(cfg.triplet);
  if (!rep.all_ok()) {
    std::cerr << "validation failed:\n" << mkdv::validation_to_text(rep);
    return kFail;
  }
  const mkdv::SolutionEvaluator ev(cfg.triplet);
  const auto report =
      mkdv::run_invariant_checks(ev, merged_tolerances(cfg, tol_flags));
  write_output(output, format == "json" ? mkdv::invariants_to_json(report)
                                        : mkdv::format_report_table(report));
  if (!report.all_pass()) {
    for (const auto& r : report.records)
      if (!r.pass) {
        std::cerr << "check failed: " << r.name << " (residual "
                  << mkdv::format_double(r.max_residual) << " > tolerance "
                  << mkdv::format_double(r.tolerance) << ")\n";
        break;
      }
    return kFail;
  }
  return kOk;
}

int cmd_canonical(const std::vector<std::string>& real_args,
                  const std::vector<std::string>& complex_args,
                  const std::string& output) {
  std::vector<mkdv::BlockSpec> blocks;
  for (std::size_t i = 0; i + 1 < real_args.size(); i += 2) {
    mkdv::RealBlock rb;
    bool have_omega = false, have_c = false;
    for (int k = 0; k < 2; ++k) {
      const auto [key, val] = split_kv(real_args[i + k]);
      if (key == "omega") {
        rb.omega = mkdv::parse_number_token(val);
        have_omega = true;
      } else if (key == "c") {
        rb.c = parse_list(val);
        have_c = true;
      } else {
        throw mkdv::config_error("--real: unknown key '" + key +
                                 "' (expected omega, c)");
      }
    }
    if (!have_omega || !have_c)
      throw mkdv::config_error("--real: needs omega=<w> and c=<c1,c2,...>");
    blocks.emplace_back(std::move(rb));
  }
  for (std::size_t i = 0; i + 3 < complex_args.size(); i += 4) {
    mkdv::ComplexBlock cb;
    bool have[4] = {false, false, false, false};
    for (int k = 0; k < 4; ++k) {
      const auto [key, val] = split_kv(complex_args[i + k]);
      if (key == "alpha") {
        cb.alpha = mkdv::parse_number_token(val);
        have[0] = true;
      } else if (key == "beta") {
        cb.beta = mkdv::parse_number_token(val);
        have[1] = true;
      } else if (key == "gamma") {
        cb.gamma = parse_list(val);
        have[2] = true;
      } else if (key == "epsilon") {
        cb.epsilon = parse_list(val);
        have[3] = true;
      } else {
        throw mkdv::config_error("--complex: unknown key '" + key +
                                 "' (expected alpha, beta, gamma, epsilon)");
      }
    }
    if (!(have[0] && have[1] && have[2] && have[3]))
      throw mkdv::config_error(
          "--complex: needs alpha=, beta=, gamma= and epsilon=");
    blocks.emplace_back(std::move(cb));
  }
  if (blocks.empty())
    throw mkdv::config_error(
        "canonical: need at least one --real or --complex block");
  const auto trip = mkdv::assemble_canonical(blocks);
  write_output(output, mkdv::triplet_to_json(trip));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exact solutions of the focusing mKdV equation u_t + u_xxx + 6u^2 u_x "
      "= 0 built from a real matrix triplet (A, B, C)"};
  app.require_subcommand(1);

  std::string config, output, format;
  bool oracle = false;
  std::vector<std::string> tol_flags, real_args, complex_args;

  const auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config)
      sub->add_option("--config", config, "path to a JSON run config")
          ->required();
    sub->add_option("--output", output, "output path (default: stdout)");
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "csv", "json"}));
  };

  auto* validate =
      app.add_subcommand("validate", "check a triplet's admissibility");
  add_common(validate, true);
  auto* solve =
      app.add_subcommand("solve", "solve the structure equations for P, Q, N");
  add_common(solve, true);
  solve->add_flag("--oracle", oracle,
                  "cross-check P, Q, N against the integral quadrature");
  auto* eval = app.add_subcommand("eval", "evaluate u and v over a grid");
  add_common(eval, true);
  auto* check = app.add_subcommand("check", "run the full invariant suite");
  add_common(check, true);
  check
      ->add_option("--tolerance", tol_flags,
                   "override a check tolerance, name=value")
      ->take_all();
  auto* canonical = app.add_subcommand(
      "canonical", "assemble a canonical block triplet and print it as JSON");
  canonical
      ->add_option("--real", real_args,
                   "real block parameters: omega=<w> c=<c1,c2,...>")
      ->type_size(2);
  canonical
      ->add_option("--complex", complex_args,
                   "complex block parameters: alpha=<a> beta=<b> "
                   "gamma=<g1,...> epsilon=<e1,...>")
      ->type_size(4);
  canonical->add_option("--output", output, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (app.got_subcommand(validate)) {
      if (format.empty()) format = "text";
      require_format(format, {"text", "json"});
      return cmd_validate(config, output, format);
    }
    if (app.got_subcommand(solve)) {
      if (format.empty()) format = "text";
      require_format(format, {"text", "json"});
      return cmd_solve(config, output, format, oracle);
    }
    if (app.got_subcommand(eval)) {
      if (format.empty()) format = "csv";
      require_format(format, {"csv", "json"});
      return cmd_eval(config, output, format);
    }
    if (app.got_subcommand(check)) {
      if (format.empty()) format = "text";
      require_format(format, {"text", "json"});
      return cmd_check(config, output, format, tol_flags);
    }
    return cmd_canonical(real_args, complex_args, output);
  } catch (const mkdv::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const mkdv::singular_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  } catch (const mkdv::numeric_range_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoNumeric;
  }
}
