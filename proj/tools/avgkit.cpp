// avgkit: averaged functions, stroboscopic averaging, and periodic-orbit
// validation for T-periodic perturbed systems, driven by JSON system files.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "avgkit/melnikov.hpp"
#include "avgkit/orbits.hpp"
#include "avgkit/strobo.hpp"
#include "avgkit/system_io.hpp"

using namespace avgkit;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct CommonOpts {
  int steps = 2048;
  std::string out_path;
  std::string format = "table";  // table | json | csv
  bool no_footer = false;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_vec(const Vec& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + "]";
}

Vec parse_vector(const std::string& text, int n, const std::string& flag) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace((unsigned char)item[used])) ++used;
      if (used != item.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "cannot parse '" + item + "' as a number");
    }
  }
  if (n > 0 && (int)out.size() != n)
    throw CLI::ValidationError(flag, "expected " + std::to_string(n) +
                                         " components, got " +
                                         std::to_string(out.size()));
  return out;
}

IntegratorConfig make_cfg(const SystemFile& sf, const CommonOpts& c) {
  IntegratorConfig cfg;
  cfg.steps_per_period = c.steps;
  cfg.period = sf.system.T;
  return cfg;
}

void emit(const json& payload, const CommonOpts& c,
          const std::vector<std::string>& csv_lines) {
  if (!c.out_path.empty()) {
    std::ofstream out(c.out_path);
    if (!out) throw Error("cannot write '" + c.out_path + "'");
    out << payload.dump(2) << "\n";
  }
  if (c.format == "json") {
    std::cout << payload.dump(2) << "\n";
  } else if (c.format == "csv") {
    for (const auto& line : csv_lines) std::cout << line << "\n";
  }
}

struct Footer {
  const CommonOpts& c;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  ~Footer() {
    if (c.format == "table" && !c.no_footer) {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      std::cout << "# elapsed_ms: " << ms << "\n";
    }
  }
};

json to_json(const Vec& v) { return json(v); }

// ---------------------------------------------------------------------------

int cmd_check(const std::string& path) {
  const auto issues = check_system_file(path);
  if (issues.empty()) {
    const SystemFile sf = load_system_file(path);
    std::cout << "OK: " << (sf.name.empty() ? path : sf.name) << " (n=" << sf.system.n
              << ", k=" << sf.system.k << ", T=" << fmt(sf.system.T) << ")\n";
    return 0;
  }
  for (const auto& issue : issues)
    std::cout << path << ": " << issue.where << ": " << issue.what << "\n";
  return 1;
}

int cmd_f(const SystemFile& sf, const Vec& z, int order, const CommonOpts& c) {
  Footer footer{c};
  const IntegratorConfig cfg = make_cfg(sf, c);
  const auto fs = averaged_f(sf.system, z, cfg);

  json orders = json::array();
  std::vector<std::string> csv = {"order,component,f"};
  if (c.format == "table") std::cout << "order  f_i(z)\n";
  for (int i = 1; i <= order; ++i) {
    if (c.format == "table")
      std::cout << i << "      " << fmt_vec(fs[i - 1]) << "\n";
    orders.push_back({{"i", i}, {"f", to_json(fs[i - 1])}});
    for (int comp = 0; comp < sf.system.n; ++comp)
      csv.push_back(std::to_string(i) + "," + std::to_string(comp + 1) + "," +
                    fmt(fs[i - 1][comp]));
  }
  const json payload = {{"schema_version", kSchemaVersion},
                        {"command", "f"},
                        {"system", sf.name},
                        {"z", to_json(z)},
                        {"order", order},
                        {"steps_per_period", c.steps},
                        {"orders", orders}};
  emit(payload, c, csv);
  return 0;
}

int cmd_g(const SystemFile& sf, const Vec& z, int order, const CommonOpts& c) {
  Footer footer{c};
  const IntegratorConfig cfg = make_cfg(sf, c);
  StroboEngine engine(sf.system, cfg);
  const GSeries gs = engine.strobo_g(z, order);
  const auto& fs = engine.averaged_f(z);
  if (!gs.diagnostics.warning.empty())
    std::cerr << "warning: " << gs.diagnostics.warning << "\n";

  json orders = json::array();
  std::vector<std::string> csv = {"order,component,g,f,abs_f_minus_Tg"};
  if (c.format == "table") std::cout << "order  g_i(z)  |f_i - T g_i|\n";
  for (int i = 1; i <= order; ++i) {
    double dev = 0;
    for (int comp = 0; comp < sf.system.n; ++comp)
      dev = std::max(dev,
                     std::abs(fs[i - 1][comp] - sf.system.T * gs.g[i - 1][comp]));
    if (c.format == "table")
      std::cout << i << "      " << fmt_vec(gs.g[i - 1]) << "  " << fmt(dev) << "\n";
    orders.push_back({{"i", i},
                      {"g", to_json(gs.g[i - 1])},
                      {"f", to_json(fs[i - 1])},
                      {"abs_f_minus_Tg", dev}});
    for (int comp = 0; comp < sf.system.n; ++comp)
      csv.push_back(std::to_string(i) + "," + std::to_string(comp + 1) + "," +
                    fmt(gs.g[i - 1][comp]) + "," + fmt(fs[i - 1][comp]) + "," +
                    fmt(dev));
  }
  const json payload = {{"schema_version", kSchemaVersion},
                        {"command", "g"},
                        {"system", sf.name},
                        {"z", to_json(z)},
                        {"order", order},
                        {"steps_per_period", c.steps},
                        {"fd_steps", gs.diagnostics.fd_steps},
                        {"fd_noise_model", gs.diagnostics.noise_model},
                        {"f_evals", gs.diagnostics.f_evals},
                        {"orders", orders}};
  emit(payload, c, csv);
  return 0;
}

int cmd_orbit(const SystemFile& sf, const Vec& z0,
              const std::vector<double>& eps_list, int ell_override,
              const CommonOpts& c) {
  Footer footer{c};
  const System& sys = sf.system;
  const IntegratorConfig cfg = make_cfg(sf, c);

  int ell = ell_override;
  json vanishing = nullptr;
  if (ell <= 0) {
    // probe z0 and axis offsets for the first non-vanishing order
    std::vector<Vec> probes = {z0};
    for (int i = 0; i < sys.n; ++i) {
      Vec p = z0;
      p[i] += 0.25;
      probes.push_back(p);
      p[i] -= 0.5;
      probes.push_back(p);
    }
    const VanishingReport rep = first_nonvanishing(sys, probes, cfg);
    if (rep.ell == 0)
      throw NumericsError("all averaged functions vanish up to k on the probe set");
    ell = rep.ell;
    vanishing = {{"ell", rep.ell}, {"max_abs_f", rep.max_abs_f}};
  }

  MelnikovEvaluator mel(sys, cfg);
  const int ell_c = ell;
  const auto f_ell = [&](const Vec& z) { return mel.averaged_f(z)[ell_c - 1]; };
  const ZeroResult zr = find_zero(f_ell, z0);
  if (!zr.converged)
    throw NumericsError("Newton did not converge on f_" + std::to_string(ell));

  if (c.format == "table") {
    std::cout << "zero of f_" << ell << ": z* = " << fmt_vec(zr.z_star)
              << "  residual = " << fmt(zr.residual_norm)
              << "  simple = " << (zr.simple ? "yes" : "no")
              << "  sigma_min = " << fmt(zr.sigma_min)
              << "  iterations = " << zr.iterations << "\n";
  }

  const OrbitValidation val = validate_orbit(sys, zr.z_star, eps_list, cfg);
  json entries = json::array();
  std::vector<std::string> csv = {"eps,ok,z_eps,displacement,distance,sigma_min"};
  if (c.format == "table" && !eps_list.empty())
    std::cout << "eps      ok  z_eps  |displacement|  |z_eps - z*|  sigma_min\n";
  for (size_t i = 0; i < val.eps_list.size(); ++i) {
    if (c.format == "table")
      std::cout << fmt(val.eps_list[i]) << "  " << (val.ok[i] ? "yes" : "NO ")
                << "  " << fmt_vec(val.z_eps[i]) << "  "
                << fmt(val.displacement_norms[i]) << "  " << fmt(val.distances[i])
                << "  " << fmt(val.sigma_mins[i]) << "\n";
    entries.push_back({{"eps", val.eps_list[i]},
                       {"ok", (bool)val.ok[i]},
                       {"z_eps", to_json(val.z_eps[i])},
                       {"displacement_norm", val.displacement_norms[i]},
                       {"distance", val.distances[i]},
                       {"sigma_min", val.sigma_mins[i]}});
    std::string zs;
    for (size_t j = 0; j < val.z_eps[i].size(); ++j)
      zs += (j ? ";" : "") + fmt(val.z_eps[i][j]);
    csv.push_back(fmt(val.eps_list[i]) + "," + (val.ok[i] ? "1" : "0") + "," + zs +
                  "," + fmt(val.displacement_norms[i]) + "," +
                  fmt(val.distances[i]) + "," + fmt(val.sigma_mins[i]));
  }
  if (c.format == "table" && !eps_list.empty())
    std::cout << "distance slope vs eps: " << fmt(val.slope_estimate) << "\n";

  json payload = {{"schema_version", kSchemaVersion},
                  {"command", "orbit"},
                  {"system", sf.name},
                  {"ell", ell},
                  {"z_star", to_json(zr.z_star)},
                  {"residual_norm", zr.residual_norm},
                  {"simple", zr.simple},
                  {"sigma_min", zr.sigma_min},
                  {"iterations", zr.iterations},
                  {"validation", entries}};
  if (!vanishing.is_null()) payload["vanishing"] = vanishing;
  if (!eps_list.empty() && !std::isnan(val.slope_estimate))
    payload["distance_slope"] = val.slope_estimate;
  emit(payload, c, csv);
  return 0;
}

int cmd_order_study(const SystemFile& sf, const Vec& z,
                    const std::vector<double>& eps_list, const CommonOpts& c) {
  Footer footer{c};
  const OrderStudy st = order_study(sf.system, z, eps_list, make_cfg(sf, c));
  json entries = json::array();
  std::vector<std::string> csv = {"eps,residual"};
  if (c.format == "table") std::cout << "eps      residual\n";
  for (size_t i = 0; i < st.eps_list.size(); ++i) {
    if (c.format == "table")
      std::cout << fmt(st.eps_list[i]) << "  " << fmt(st.residuals[i]) << "\n";
    entries.push_back({{"eps", st.eps_list[i]}, {"residual", st.residuals[i]}});
    csv.push_back(fmt(st.eps_list[i]) + "," + fmt(st.residuals[i]));
  }
  if (c.format == "table")
    std::cout << "slope: " << fmt(st.slope) << "  (expected about k+1 = "
              << sf.system.k + 1 << ")\n";
  const json payload = {{"schema_version", kSchemaVersion},
                        {"command", "order-study"},
                        {"system", sf.name},
                        {"z", to_json(z)},
                        {"steps_per_period", c.steps},
                        {"entries", entries},
                        {"slope", st.slope}};
  emit(payload, c, csv);
  return 0;
}

void show_config() {
  std::cout << "steps_per_period = 2048\n"
               "method = rk4_fixed (rk4_doubling opt-in)\n"
               "doubling abs_tol = 1e-10, rel_tol = 1e-10\n"
               "tau_zero = 1e-8 * (1 + |z|)\n"
               "fd step h(m,b) = noise_b^(1/(m+2)) * (1 + |z|), noise_b = 1e-16^((2/3)^(b-1))\n"
               "newton tol = 1e-10 * (1 + |z|) (zero finding)\n"
               "orbit tol = 1e-9 * (1 + |z|) (fixed-point certificate)\n"
               "sigma_min threshold = 1e-6 * max(|J|, 1)\n"
               "strobo default order cap = 4\n"
               "schema_version = 1\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"averaged functions and periodic orbits of T-periodic perturbed systems"};
  app.require_subcommand(0, 1);
  bool want_config = false;
  app.add_flag("--show-config", want_config, "print all numeric defaults and exit");

  std::string path, z_text, z0_text, eps_text;
  int order = 0;
  int ell_override = 0;
  CommonOpts common;

  auto add_common = [&](CLI::App* sub, bool needs_z) {
    sub->add_option("file", path, "system definition file")->required();
    if (needs_z) sub->add_option("--z", z_text, "base point, comma separated (default: origin)");
    sub->add_option("--steps", common.steps, "integrator steps per period");
    sub->add_option("--out", common.out_path, "write JSON result to this path");
    sub->add_option("--format", common.format, "table | json | csv")
        ->check(CLI::IsMember({"table", "json", "csv"}));
    sub->add_flag("--no-footer", common.no_footer, "omit the timing footer");
  };

  CLI::App* check = app.add_subcommand("check", "validate a system file");
  check->add_option("file", path)->required();

  CLI::App* fcmd = app.add_subcommand("f", "averaged functions f_1..f_k at z");
  add_common(fcmd, true);
  fcmd->add_option("--order", order, "highest order to report (default k)");

  CLI::App* gcmd =
      app.add_subcommand("g", "stroboscopic averaged functions g_1..g_k at z");
  add_common(gcmd, true);
  gcmd->add_option("--order", order, "highest order to report (default min(k,4))");

  CLI::App* orbit = app.add_subcommand(
      "orbit", "find a simple zero of f_ell and validate periodic orbits");
  add_common(orbit, false);
  orbit->add_option("--z0", z0_text, "initial guess, comma separated")->required();
  orbit->add_option("--eps-list", eps_text, "epsilons, comma separated");
  orbit->add_option("--ell", ell_override, "override the detected order");

  CLI::App* study = app.add_subcommand(
      "order-study", "slope of the time-T expansion residual in eps");
  add_common(study, true);
  study->add_option("--eps-list", eps_text, "epsilons, comma separated (>= 3)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (want_config) {
    show_config();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  try {
    if (check->parsed()) return cmd_check(path);

    const SystemFile sf = load_system_file(path);
    const System& sys = sf.system;

    if (fcmd->parsed() || gcmd->parsed()) {
      const Vec z = z_text.empty() ? Vec(sys.n, 0.0)
                                   : parse_vector(z_text, sys.n, "--z");
      int ord = order > 0 ? order : (fcmd->parsed() ? sys.k : std::min(sys.k, 4));
      if (ord > sys.k)
        throw CLI::ValidationError("--order", "beyond the file's k = " +
                                                  std::to_string(sys.k));
      return fcmd->parsed() ? cmd_f(sf, z, ord, common) : cmd_g(sf, z, ord, common);
    }
    if (orbit->parsed()) {
      const Vec z0 = parse_vector(z0_text, sys.n, "--z0");
      const std::vector<double> eps =
          eps_text.empty() ? std::vector<double>{} : parse_vector(eps_text, 0, "--eps-list");
      return cmd_orbit(sf, z0, eps, ell_override, common);
    }
    if (study->parsed()) {
      const Vec z = z_text.empty() ? Vec(sys.n, 0.0)
                                   : parse_vector(z_text, sys.n, "--z");
      const std::vector<double> eps = parse_vector(eps_text, 0, "--eps-list");
      return cmd_order_study(sf, z, eps, common);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SystemFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
