#include "collapse/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "collapse/analysis.hpp"
#include "collapse/errors.hpp"
#include "collapse/reports.hpp"

namespace collapse::cli {

namespace {

using nlohmann::json;

double parse_angle(const json& v, const char* key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.size() > 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
      s.resize(s.size() - 2);
      try {
        std::size_t used = 0;
        const double factor = std::stod(s, &used);
        if (used == s.size()) return factor * std::numbers::pi;
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError(std::string(key) + " must be a number in radians or a string like \"0.37pi\"");
}

Complex parse_complex(const json& v, const char* key) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(std::string(key) + ": entries must be numbers or [re, im] pairs");
}

std::vector<Complex> parse_amplitudes(const json& v, const char* key) {
  if (!v.is_array() || v.empty()) throw ConfigError(std::string(key) + " must be a non-empty array");
  std::vector<Complex> out;
  for (const auto& e : v) out.push_back(parse_complex(e, key));
  return out;
}

double require_number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing required field '") + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

CorrespondenceMap parse_correspondence(const json& j, std::size_t outcomes, std::size_t readings) {
  if (!j.is_object()) throw ConfigError("correspondence must be an object");
  const auto assignment = optional_field<std::vector<std::vector<std::size_t>>>(j, "assignment");
  if (!assignment) throw ConfigError("correspondence.assignment is required");
  auto weights = optional_field<std::vector<std::vector<double>>>(j, "weights")
                     .value_or(std::vector<std::vector<double>>{});
  return CorrespondenceMap(outcomes, readings, *assignment, std::move(weights));
}

ComplexMatrix parse_hamiltonian(const json& v, std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  if (v.is_string() && v.get<std::string>() == "zero") return ComplexMatrix::Zero(dim, dim);
  if (!v.is_array() || v.size() != n) {
    throw ConfigError("hamiltonian must be \"zero\", \"zeeman\" or an " + std::to_string(n) + "x" +
                      std::to_string(n) + " matrix");
  }
  ComplexMatrix h(dim, dim);
  for (std::size_t r = 0; r < n; ++r) {
    if (!v[r].is_array() || v[r].size() != n) throw ConfigError("hamiltonian rows must have length " + std::to_string(n));
    for (std::size_t c = 0; c < n; ++c) {
      h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_complex(v[r][c], "hamiltonian");
    }
  }
  return h;
}

IntegratorConfig parse_integrator(const json& j) {
  IntegratorConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ConfigError("integrator must be an object");
  cfg.t_max = optional_field<double>(j, "t_max").value_or(cfg.t_max);
  if (j.contains("dt")) {
    const auto& dt = j.at("dt");
    if (dt.is_string() && dt.get<std::string>() == "auto") {
      cfg.dt.reset();
    } else if (dt.is_number()) {
      cfg.dt = dt.get<double>();
    } else {
      throw ConfigError("integrator.dt must be a number or \"auto\"");
    }
  }
  cfg.safety = optional_field<double>(j, "safety").value_or(cfg.safety);
  cfg.record_every = optional_field<std::size_t>(j, "record_every");
  cfg.samples = optional_field<std::size_t>(j, "samples").value_or(cfg.samples);
  cfg.log_samples = optional_field<std::size_t>(j, "log_samples").value_or(cfg.log_samples);
  cfg.validate();
  return cfg;
}

EvolutionMode parse_mode(const std::string& s) {
  if (s == "full") return EvolutionMode::Full;
  if (s == "fast") return EvolutionMode::Fast;
  throw ConfigError("mode must be 'full' or 'fast', got '" + s + "'");
}

std::size_t sweep_threads() {
  if (const char* env = std::getenv("COLLAPSE_SIM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("COLLAPSE_SIM_THREADS must be a positive integer");
  }
  return 0;
}

void write_table(const RunConfig& cfg, const std::string& name, const CsvTable& table,
                 std::ostream& out) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / name;
  write_file_atomic(path, to_csv(table));
  out << "wrote " << path.string() << "\n";
}

// Flat indices that receive weight in the aligned target.
std::vector<std::size_t> aligned_support(const MeasurementModel& model) {
  const DensityMatrix target = model.target_dm();
  std::vector<std::size_t> out;
  for (Eigen::Index k = 0; k < target.dim(); ++k) {
    if (target(k, k).real() > 0.0) out.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

void write_figures(const RunConfig& cfg, const Trajectory& traj, std::ostream& out) {
  const auto support = aligned_support(cfg.model);
  const DensityMatrix target = cfg.model.target_dm();
  std::vector<double> weights;
  for (std::size_t k : support) weights.push_back(target(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real());
  std::vector<double> sorted_weights = weights;
  std::sort(sorted_weights.begin(), sorted_weights.end(), std::greater<>());

  static constexpr const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::vector<PlotSeries> fig1;
  std::size_t color = 0;
  auto next_color = [&] { return std::string(kColors[color++ % std::size(kColors)]); };
  for (std::size_t i = 0; i < support.size(); ++i) {
    PlotSeries s{"diag " + std::to_string(support[i]) + " / p", next_color(), {}, {}};
    for (const auto& smp : traj.samples()) {
      s.x.push_back(smp.t);
      s.y.push_back(smp.diagonals[support[i]] / weights[i]);
    }
    fig1.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < sorted_weights.size(); ++i) {
    PlotSeries s{"eig " + std::to_string(i) + " / p", next_color(), {}, {}};
    for (const auto& smp : traj.samples()) {
      s.x.push_back(smp.t);
      s.y.push_back(smp.eigenvalues[i] / sorted_weights[i]);
    }
    fig1.push_back(std::move(s));
  }
  // First coherence between two aligned states, else the first tracked pair.
  std::size_t pick = 0;
  for (std::size_t k = 0; k < traj.tracked().size(); ++k) {
    const auto [r, c] = traj.tracked()[k];
    const auto in_support = [&](Eigen::Index x) {
      return std::find(support.begin(), support.end(), static_cast<std::size_t>(x)) != support.end();
    };
    if (in_support(r) && in_support(c)) {
      pick = k;
      break;
    }
  }
  if (!traj.tracked().empty()) {
    const auto [r, c] = traj.tracked()[pick];
    PlotSeries s{"Re rho_" + std::to_string(r) + "," + std::to_string(c), "#2ca02c", {}, {}};
    for (const auto& smp : traj.samples()) {
      s.x.push_back(smp.t);
      s.y.push_back(smp.off_diagonals[pick].real());
    }
    fig1.push_back(std::move(s));
  }
  PlotSeries entropy{"S(t)", "#1f77b4", {}, {}};
  for (const auto& smp : traj.samples()) {
    entropy.x.push_back(smp.t);
    entropy.y.push_back(smp.entropy / std::log(cfg.entropy_log_base));
  }

  std::filesystem::create_directories(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "fig1.svg",
                    render_line_plot("Aligned populations and eigenvalues (normalized)",
                                     "t [1/Omega]", "value", fig1));
  write_file_atomic(cfg.out_dir / "fig2.svg",
                    render_line_plot("Entropy of system + pointer", "t [1/Omega]", "S",
                                     std::span<const PlotSeries>(&entropy, 1)));
  out << "wrote " << (cfg.out_dir / "fig1.svg").string() << " and "
      << (cfg.out_dir / "fig2.svg").string() << "\n";
}

std::string describe(std::span<const double> v) {
  std::ostringstream os;
  os << std::setprecision(10) << "(";
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << v[k];
  os << ")";
  return os.str();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  const bool angle_sys = j.contains("alpha_s");
  const bool angle_app = j.contains("alpha_a");
  if (angle_sys == j.contains("sys_amplitudes")) {
    throw ConfigError("give exactly one of alpha_s or sys_amplitudes");
  }
  if (angle_app == j.contains("app_amplitudes")) {
    throw ConfigError("give exactly one of alpha_a or app_amplitudes");
  }
  const double gamma = require_number(j, "gamma");
  const double omega = require_number(j, "omega");
  const double epsilon = optional_field<double>(j, "epsilon").value_or(kDefaultEpsilon);

  std::vector<Complex> sys_amps, app_amps;
  double alpha_s = 0.0, alpha_a = 0.0;
  if (angle_sys) {
    alpha_s = parse_angle(j.at("alpha_s"), "alpha_s");
    sys_amps = {std::cos(alpha_s), std::sin(alpha_s)};
  } else {
    sys_amps = parse_amplitudes(j.at("sys_amplitudes"), "sys_amplitudes");
  }
  if (angle_app) {
    alpha_a = parse_angle(j.at("alpha_a"), "alpha_a");
    app_amps = {std::cos(alpha_a), std::sin(alpha_a)};
  } else {
    app_amps = parse_amplitudes(j.at("app_amplitudes"), "app_amplitudes");
  }

  const std::size_t outcomes = sys_amps.size();
  const std::size_t readings = app_amps.size();
  std::optional<CorrespondenceMap> correspondence;
  if (j.contains("correspondence") && !j.at("correspondence").is_null()) {
    correspondence = parse_correspondence(j.at("correspondence"), outcomes, readings);
  } else {
    if (outcomes != readings) {
      throw ConfigError("system and apparatus dimensions differ; a correspondence map is required");
    }
    correspondence = CorrespondenceMap::one_to_one(outcomes);
  }

  const std::size_t n = outcomes * readings;
  ComplexMatrix hamiltonian = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  bool has_hamiltonian = false;
  const bool zeeman_possible = angle_sys && angle_app;
  if (j.contains("hamiltonian") && !j.at("hamiltonian").is_null()) {
    const auto& h = j.at("hamiltonian");
    if (h.is_string() && h.get<std::string>() == "zeeman") {
      if (!zeeman_possible) throw ConfigError("hamiltonian \"zeeman\" needs alpha_s and alpha_a");
      hamiltonian = spin_half_scenario(alpha_s, alpha_a, gamma, omega, epsilon).hamiltonian();
    } else {
      hamiltonian = parse_hamiltonian(h, n);
    }
    has_hamiltonian = true;
  } else if (zeeman_possible) {
    hamiltonian = spin_half_scenario(alpha_s, alpha_a, gamma, omega, epsilon).hamiltonian();
    has_hamiltonian = true;
  }

  MeasurementModel model(StateVector(std::move(sys_amps), "system"),
                         StateVector(std::move(app_amps), "apparatus"), std::move(*correspondence),
                         gamma, omega, epsilon, std::move(hamiltonian));

  RunConfig cfg{std::move(model)};
  cfg.has_hamiltonian = has_hamiltonian;
  cfg.integrator = parse_integrator(j.value("integrator", json()));
  if (auto mode = optional_field<std::string>(j, "mode")) cfg.mode = parse_mode(*mode);
  cfg.alignment_tol = optional_field<double>(j, "alignment_tol").value_or(cfg.alignment_tol);
  if (!(cfg.alignment_tol > 0.0)) throw ConfigError("alignment_tol must be positive");
  if (j.contains("entropy_log_base")) {
    const auto& b = j.at("entropy_log_base");
    if (b.is_string() && b.get<std::string>() == "e") {
      cfg.entropy_log_base = std::numbers::e;
    } else if (b.is_number() && b.get<double>() > 1.0) {
      cfg.entropy_log_base = b.get<double>();
    } else {
      throw ConfigError("entropy_log_base must be \"e\" or a number > 1");
    }
  }
  cfg.gammas = optional_field<std::vector<double>>(j, "gammas").value_or(std::vector<double>{});
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::vector<double> parse_gamma_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const double g = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(g);
    } catch (const std::exception&) {
      throw ConfigError("bad gamma value '" + item + "'");
    }
  }
  return out;
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.mode == EvolutionMode::Full && !cfg.has_hamiltonian) {
    throw ConfigError("mode 'full' needs a hamiltonian (use \"hamiltonian\": \"zero\" for none)");
  }
  const Trajectory traj = simulate_model(cfg.model, cfg.integrator, cfg.mode);
  CsvTable table = trajectory_table(traj);
  if (cfg.entropy_log_base != std::numbers::e) {
    const std::size_t col = table.column("entropy");
    const double scale = 1.0 / std::log(cfg.entropy_log_base);
    for (auto& row : table.rows) row[col] *= scale;
  }
  write_table(cfg, "trajectory.csv", table, out);
  if (cfg.plot) write_figures(cfg, traj, out);

  const auto& last = traj.final_sample();
  out << "final diagonals " << describe(last.diagonals) << "\n";
  out << "born target     " << describe(cfg.model.probabilities()) << "\n";
  out << "steps " << traj.stats().steps << ", dt " << traj.stats().dt << "\n";
  try {
    out << "alignment time " << alignment_time(traj, cfg.model.target_dm(), cfg.alignment_tol)
        << " (trace distance tol " << cfg.alignment_tol << ")\n";
  } catch (const NotAlignedError& e) {
    out << "alignment not reached: " << e.what() << "\n";
  }
  return kExitOk;
}

int run_spectrum(const RunConfig& cfg, std::ostream& out) {
  const auto& m = cfg.model;
  const RealMatrix generator = diag_generator_matrix(m.rates().squared(), m.gamma(), m.omega());
  const GeneratorSpectrum spectrum = generator_spectrum(generator, m.gamma() * m.omega());
  write_table(cfg, "spectrum.csv", spectrum_table(spectrum), out);
  std::size_t negative = 0;
  for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
    if (k != spectrum.zero_index && spectrum.eigenvalues[k].real() < 0.0) ++negative;
  }
  out << "near-zero eigenvalues " << spectrum.near_zero_count << ", negative " << negative << "\n";
  out << "stationary vector " << describe(spectrum.stationary) << "\n";
  if (spectrum.degenerate()) {
    out << "warning: " << spectrum.near_zero_count
        << " eigenvalues are numerically zero; the stationary state is not unique\n";
  }
  return kExitOk;
}

int run_qsl(const RunConfig& cfg, std::ostream& out) {
  if (cfg.mode == EvolutionMode::Full && !cfg.has_hamiltonian) {
    throw ConfigError("mode 'full' needs a hamiltonian (use \"hamiltonian\": \"zero\" for none)");
  }
  const auto& m = cfg.model;
  const DensityMatrix rho0 = m.initial_dm();
  const DensityMatrix target = m.target_dm();
  const DissipatorSpec spec = lindblad_jump_family(m.rates(), m.gamma(), m.omega());
  const ComplexMatrix h = cfg.mode == EvolutionMode::Full ? m.hamiltonian()
                                                          : ComplexMatrix::Zero(rho0.dim(), rho0.dim());
  const ComplexMatrix rhs0 = master_rhs(h, spec, rho0);
  const Trajectory traj = simulate_model(m, cfg.integrator, cfg.mode);
  const double tau = alignment_time(traj, target, cfg.alignment_tol);
  const QslReport report = qsl_lower_bound(rho0, target, rhs0, SpeedNorm::DiagonalRms, tau);
  const QslReport frob = qsl_lower_bound(rho0, target, rhs0, SpeedNorm::Frobenius, tau);
  write_table(cfg, "qsl.csv", qsl_table(report), out);
  out << std::setprecision(10) << "bound " << report.bound << " = " << report.numerator << " / "
      << report.denominator << "; measured " << tau << "; ratio " << report.ratio.value_or(NAN)
      << "\n";
  out << "frobenius-norm bound " << frob.bound << "; ratio " << frob.ratio.value_or(NAN) << "\n";
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, std::ostream& out) {
  if (cfg.gammas.empty()) throw ConfigError("sweep needs a non-empty gamma list (--gammas)");
  if (cfg.mode == EvolutionMode::Full && !cfg.has_hamiltonian) {
    throw ConfigError("mode 'full' needs a hamiltonian (use \"hamiltonian\": \"zero\" for none)");
  }
  const auto rows = gamma_sweep(cfg.model, cfg.gammas, cfg.integrator, cfg.mode, cfg.alignment_tol,
                                sweep_threads());
  write_table(cfg, "sweep.csv", sweep_table(rows), out);
  bool failed = false;
  for (const auto& r : rows) {
    out << "gamma " << r.gamma << ": ";
    if (r.error.empty()) {
      out << "tau " << r.alignment_time << ", gamma*tau " << r.gamma_times_tau << "\n";
    } else {
      out << "failed: " << r.error << "\n";
      failed = true;
    }
  }
  out << "relative spread of gamma*tau " << relative_spread(rows) << "\n";
  return failed ? kExitNumerical : kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lindblad measurement-collapse simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  std::string gammas;
  std::string out_dir = ".";
  bool plot = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario JSON file")->required();
    sub->add_option("--mode", mode, "full or fast")->check(CLI::IsMember({"full", "fast"}));
    sub->add_option("--out", out_dir, "output directory");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "integrate and write trajectory.csv");
  add_common(simulate);
  simulate->add_flag("--plot", plot, "also write fig1.svg and fig2.svg");
  CLI::App* spectrum = app.add_subcommand("spectrum", "spectrum of the diagonal generator");
  add_common(spectrum);
  CLI::App* qsl = app.add_subcommand("qsl", "speed-limit bound vs measured alignment time");
  add_common(qsl);
  CLI::App* sweep = app.add_subcommand("sweep", "alignment time across coupling strengths");
  add_common(sweep);
  sweep->add_option("--gammas", gammas, "comma-separated gamma values");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (!mode.empty()) cfg.mode = parse_mode(mode);
    cfg.out_dir = out_dir;
    cfg.plot = plot;
    if (sweep->parsed() && sweep->count("--gammas")) {
      cfg.gammas = parse_gamma_list(gammas);
      if (cfg.gammas.empty()) throw ConfigError("--gammas is empty");
    }
    if (simulate->parsed()) return run_simulate(cfg, out);
    if (spectrum->parsed()) return run_spectrum(cfg, out);
    if (qsl->parsed()) return run_qsl(cfg, out);
    return run_sweep(cfg, out);
  } catch (const IntegrationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NotAlignedError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace collapse::cli
