#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "spinsense/calibration.hpp"
#include "spinsense/constants.hpp"
#include "spinsense/crossing_fit.hpp"
#include "spinsense/error.hpp"
#include "spinsense/io/config.hpp"
#include "spinsense/io/csv.hpp"
#include "spinsense/io/results.hpp"
#include "spinsense/iq_noise.hpp"
#include "spinsense/magnetometry.hpp"
#include "spinsense/spin_hamiltonian.hpp"
#include "spinsense/thermal_ensemble.hpp"

#ifndef SPINSENSE_DATA_DIR
#define SPINSENSE_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace spinsense;

namespace {

std::string out_path(const io::RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

std::string input_or(const std::string& configured, const std::string& fallback) {
  return configured.empty() ? fallback : configured;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> field_axis(const io::RunConfig& cfg) {
  const double c = gauss_to_tesla(cfg.sweep.b_center_gauss);
  const double h = 0.5 * gauss_to_tesla(cfg.sweep.b_span_gauss);
  return linspace(c - h, c + h, static_cast<std::size_t>(cfg.sweep.n_b));
}

void log_line(const std::string& msg) { std::cout << msg << '\n'; }

int run_eigen(const io::RunConfig& cfg) {
  const SpinSystem sys = cfg.spin_system();
  const auto rows = energy_level_sweep(sys, cfg.field_theta(), cfg.field_phi(),
                                       gauss_to_tesla(cfg.eigen.b_min_gauss),
                                       gauss_to_tesla(cfg.eigen.b_max_gauss),
                                       static_cast<std::size_t>(cfg.eigen.n_points));
  std::vector<std::vector<double>> table;
  for (const auto& r : rows) {
    const double band = cavity_band_transition(sys, {r.b, cfg.field_theta(), cfg.field_phi()});
    table.push_back({tesla_to_gauss(r.b), rad_to_hz(r.energies[0]), rad_to_hz(r.energies[1]),
                     rad_to_hz(r.energies[2]), rad_to_hz(r.energies[3]), rad_to_hz(band)});
  }
  const std::string path = out_path(cfg, "energy_levels.csv");
  io::write_numeric_csv(path, {"B_gauss", "E1_Hz", "E2_Hz", "E3_Hz", "E4_Hz", "cavity_band_Hz"},
                        table);
  log_line("wrote " + path);
  return 0;
}

int run_crossing_sim(const io::RunConfig& cfg) {
  const CrossingModel truth = cfg.crossing_model();
  const GridSpec spec = cfg.grid_spec();
  const ComplexGrid2D grid = simulate_crossing(truth, spec, cfg.grid.noise_sigma, cfg.seed);
  const std::string grid_path = out_path(cfg, "crossing_grid.csv");
  io::write_grid_csv(grid_path, grid);
  json truth_doc = io::model_to_json(truth);
  truth_doc["drive_power_w"] = spec.drive_power;
  truth_doc["noise_sigma"] = cfg.grid.noise_sigma;
  truth_doc["seed"] = cfg.seed;
  io::write_json(out_path(cfg, "crossing_truth.json"), truth_doc);
  log_line("wrote " + grid_path);
  return 0;
}

int run_crossing_fit(const io::RunConfig& cfg) {
  const std::string path = input_or(cfg.inputs.grid_csv, out_path(cfg, "crossing_grid.csv"));
  ComplexGrid2D data = io::read_grid_csv(path, cfg.drive_power());
  if (cfg.grid.normalize) data = normalize_grid(data);
  CrossingModel guess = cfg.crossing_model();
  const double s = cfg.fit.guess_scale;
  guess.cavity.kappa_c0 *= s;
  guess.cavity.kappa_c1 *= s;
  guess.ensemble.kappa_s *= s;
  guess.ensemble.kappa_th *= s;
  guess.ensemble.g_s *= s;
  const FitResult r = fit_crossing(data, guess, std::nullopt, cfg.fit_options());
  const std::string out = out_path(cfg, "fit_result.json");
  io::write_json(out, io::fit_result_to_json(r));
  log_line("wrote " + out);
  return 0;
}

int run_noise_predict(const io::RunConfig& cfg) {
  const auto phase = io::read_noise_csv(
      input_or(cfg.inputs.phase_noise_csv, std::string(SPINSENSE_DATA_DIR) + "/source_phase_noise.csv"));
  const auto amp = io::read_noise_csv(input_or(
      cfg.inputs.amplitude_noise_csv, std::string(SPINSENSE_DATA_DIR) + "/source_amplitude_noise.csv"));
  EnsembleParams ens = cfg.ensemble_params();
  ens.omega_s += hz_to_rad(cfg.noise.spin_detuning_mhz * 1e6);
  const SampledGamma g =
      sample_reflection(cfg.cavity_params(), ens, {cfg.drive_omega(), cfg.drive_power()}, phase.offsets_hz);
  const NoisePredictionOptions opt{cfg.noise.p0_v2_per_hz, cfg.noise.carrier_v2, cfg.noise.resample};
  const NoiseSplit split = noise_contribution_split(amp, phase, g, opt);
  const NoiseSpectrum total = predict_noise_psd(amp, phase, g, opt);

  io::write_noise_csv(out_path(cfg, "noise_prediction.csv"), total);
  std::vector<std::vector<double>> rows;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < total.offsets_hz.size(); ++k) {
    const double pn = split.phase_term.density[k], am = split.amplitude_term.density[k];
    rows.push_back({total.offsets_hz[k], pn, am});
    min_ratio = std::min(min_ratio, am > 0.0 ? pn / am : std::numeric_limits<double>::infinity());
  }
  io::write_numeric_csv(out_path(cfg, "noise_split.csv"), {"offset_hz", "pn_v2_per_hz", "am_v2_per_hz"}, rows);
  json summary;
  summary["min_pn_to_am_ratio"] = std::isinf(min_ratio) ? json(nullptr) : json(min_ratio);
  summary["offsets_analyzed"] = total.offsets_hz.size();
  io::write_json(out_path(cfg, "noise_summary.json"), summary);
  log_line("wrote " + out_path(cfg, "noise_prediction.csv"));
  return 0;
}

int run_sensitivity(const io::RunConfig& cfg) {
  const SensorModel model = cfg.sensor_model(cfg.drive_power());
  const SweepTrace trace = simulate_field_sweep(model, field_axis(cfg));
  io::write_sweep_csv(out_path(cfg, "sweep_trace.csv"), trace, "b_t");
  const SlopeResult slope = dispersive_slope(trace);
  const double b0 = trace.axis[slope.argmax];
  const double m0 = model.dispersive_derivative(b0);

  const TestFieldSpec test = cfg.test_field();
  const SweepTrace ts = simulate_timeseries(model, b0, test, cfg.timeseries_spec(), cfg.seed);
  SpectrumOptions sopt;
  sopt.segment_length = static_cast<std::size_t>(cfg.timeseries.segment_samples);
  const Spectrum spec = amplitude_spectrum(ts.dispersive, cfg.timeseries.fs_hz, sopt);
  io::write_spectrum_csv(out_path(cfg, "spectrum.csv"), spec);
  const double floor = noise_floor(spec, cfg.timeseries.floor_band_lo_hz, cfg.timeseries.floor_band_hi_hz,
                                   {cfg.timeseries.test_freq_hz});
  const double tone = tone_rms(spec, cfg.timeseries.test_freq_hz, floor);

  const SensitivityConfig sc = cfg.sensitivity_config();
  const auto& s = cfg.sensitivity;
  const auto budget = phase_noise_budget(s.e_n_nv_per_rthz * 1e-9, s.e_th_nv_per_rthz * 1e-9, s.phi_dbc_per_hz, sc);

  json j;
  j["simulated"] = {
      {"m_max_v_per_t", slope.m_max},
      {"b0_t", b0},
      {"slope_at_b0_v_per_t", m0},
      {"m_norm_per_t_rthz_w_ohm", noise_normalized_slope(slope.m_max, cfg.drive_power(), s.load_ohm)},
      {"tone_rms_v", tone},
      {"noise_floor_v_per_rthz", floor},
      {"eta_t_per_rthz", test.amplitude_rms > 0.0 && tone > 0.0 ? sensitivity(floor, tone, test.amplitude_rms) : 0.0},
      {"eta_predicted_t_per_rthz", cfg.timeseries.noise_floor_nv_per_rthz * 1e-9 / std::abs(m0)},
      {"thermal_limit_t_per_rthz", thermal_limit(sc, slope.m_max)}};
  j["measured_inputs"] = {
      {"eta_t_per_rthz", sensitivity(s.e_n_nv_per_rthz * 1e-9, s.v_m_mv * 1e-3, s.b_test_nt * 1e-9)},
      {"thermal_limit_t_per_rthz", thermal_limit(sc, s.m_max_v_per_t)},
      {"e_p_v_per_rthz", budget.e_p},
      {"phi_required_dbc_per_hz", budget.unbounded ? json(nullptr) : json(budget.phi_required_dbc)},
      {"phi_requirement_unbounded", budget.unbounded}};
  io::write_json(out_path(cfg, "sensitivity.json"), j);
  log_line("wrote " + out_path(cfg, "sensitivity.json"));
  return 0;
}

int run_optimize(const io::RunConfig& cfg) {
  std::vector<double> b_gauss, p_dbm;
  std::vector<std::vector<double>> eta;
  std::vector<double> m_norm_peak;
  if (!cfg.inputs.eta_table_csv.empty()) {
    const io::CsvTable t = io::read_csv(cfg.inputs.eta_table_csv);
    const std::size_t cb = t.column("b_gauss"), cp = t.column("p_dbm"), ce = t.column("eta_t_per_rthz");
    std::map<double, std::map<double, double>> cells;
    for (const auto& r : t.rows)
      cells[io::parse_number(r[cb])][io::parse_number(r[cp])] = io::parse_number(r[ce]);
    for (const auto& [b, row] : cells) {
      b_gauss.push_back(b);
      std::vector<double> vals;
      for (const auto& [p, v] : row) {
        if (b_gauss.size() == 1) p_dbm.push_back(p);
        vals.push_back(v);
      }
      if (vals.size() != p_dbm.size()) fail(ErrorCode::ParseError, "eta table is not a full grid");
      eta.push_back(std::move(vals));
    }
  } else {
    const auto b_axis = field_axis(cfg);
    for (double b : b_axis) b_gauss.push_back(tesla_to_gauss(b));
    p_dbm = linspace(cfg.sweep.p_min_dbm, cfg.sweep.p_max_dbm, static_cast<std::size_t>(cfg.sweep.n_p));
    eta.assign(b_axis.size(), std::vector<double>(p_dbm.size()));
    const auto& s = cfg.sensitivity;
    const double e_th = s.e_th_nv_per_rthz * 1e-9, e_ref = s.e_n_nv_per_rthz * 1e-9;
    for (std::size_t j = 0; j < p_dbm.size(); ++j) {
      const double p = dbm_to_watts(p_dbm[j]);
      const SlopeResult sl = dispersive_slope(simulate_field_sweep(cfg.sensor_model(p), b_axis));
      const double ratio = p / dbm_to_watts(s.reference_power_dbm);
      const double e_n = std::sqrt(e_th * e_th + (e_ref * e_ref - e_th * e_th) * ratio);
      for (std::size_t i = 0; i < b_axis.size(); ++i)
        eta[i][j] = sl.slope[i] != 0.0 ? e_n / std::abs(sl.slope[i]) : std::numeric_limits<double>::infinity();
      m_norm_peak.push_back(noise_normalized_slope(sl.m_max, p, s.load_ohm));
    }
  }
  const GridOptimum opt = optimize_grid(eta);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < b_gauss.size(); ++i)
    for (std::size_t j = 0; j < p_dbm.size(); ++j) rows.push_back({b_gauss[i], p_dbm[j], eta[i][j]});
  io::write_numeric_csv(out_path(cfg, "optimization.csv"), {"b_gauss", "p_dbm", "eta_t_per_rthz"}, rows);

  json j;
  j["b_opt_gauss"] = b_gauss[opt.row];
  j["p_opt_dbm"] = p_dbm[opt.col];
  j["eta_min_t_per_rthz"] = opt.min;
  json mag = json::array(), mw = json::array();
  for (std::size_t i = 0; i < b_gauss.size(); ++i)
    mag.push_back({{"b_gauss", b_gauss[i]}, {"eta_t_per_rthz", opt.per_row_min[i]}, {"p_dbm", p_dbm[opt.per_row_argmin[i]]}});
  for (std::size_t k = 0; k < p_dbm.size(); ++k) {
    json e = {{"p_dbm", p_dbm[k]}, {"eta_t_per_rthz", opt.per_col_min[k]}, {"b_gauss", b_gauss[opt.per_col_argmin[k]]}};
    if (!m_norm_peak.empty()) e["m_norm_max"] = m_norm_peak[k];
    mw.push_back(e);
  }
  j["eta_mag"] = mag;
  j["eta_mw"] = mw;
  io::write_json(out_path(cfg, "optimum.json"), j);
  log_line("wrote " + out_path(cfg, "optimum.json"));
  return 0;
}

int run_calibrate(const io::RunConfig& cfg) {
  const auto& s = cfg.sensitivity;
  const double reference = s.b_test_nt * 1e-9;
  const double coil = solenoid_axial_field(cfg.coil_geometry());
  const double slope = test_field_from_slope(s.v_m_mv * 1e-3, s.m_max_v_per_t);
  const double fem = cfg.coil.fem_field_nt * 1e-9;
  json j;
  j["reference_t"] = reference;
  j["coil_analytic_t"] = coil;
  j["coil_fem_t"] = fem;
  j["slope_method_t"] = slope;
  double spread = 0.0;
  for (double v : {coil, fem, slope}) spread = std::max(spread, std::abs(v - reference) / reference);
  j["max_relative_deviation"] = spread;
  if (!cfg.inputs.calibration_csv.empty()) {
    const LinearFit fit = linear_calibration(io::read_calibration_csv(cfg.inputs.calibration_csv));
    j["bias_calibration"] = {{"slope_t_per_a", fit.slope}, {"intercept_t", fit.intercept}, {"r_squared", fit.r_squared}};
  }
  io::write_json(out_path(cfg, "calibration.json"), j);
  log_line("wrote " + out_path(cfg, "calibration.json"));
  return 0;
}

constexpr double kPumpOmega = 2.0 * std::numbers::pi * 5.6e14;
constexpr double kPumpPhotonsPerSpin = 3.0;

int run_report(const io::RunConfig& cfg) {
  const SpinSystem sys = cfg.spin_system();
  const ThermalState th = boltzmann_populations(sys, cfg.material.temperature_k);
  const MaterialParams mat = cfg.material_params();
  const CavityParams cav = cfg.cavity_params();
  const EnsembleParams ens = cfg.ensemble_params();
  const double n_tot = total_interrogated_spins(mat);
  const double n_pol = polarized_spin_count(mat, th);
  const double g_s = single_spin_coupling(mat.v_cav, cav.omega_c, 1.0);
  const RelaxationTimes rt = relaxation_times(ens);
  const auto& s = cfg.sensitivity;
  const SensitivityConfig sc = cfg.sensitivity_config();
  const auto budget = phase_noise_budget(s.e_n_nv_per_rthz * 1e-9, s.e_th_nv_per_rthz * 1e-9, s.phi_dbc_per_hz, sc);

  json j;
  j["populations"] = th.populations;
  j["polarization"] = th.polarization;
  j["n_total"] = n_tot;
  j["n_polarized"] = n_pol;
  j["g_s_rad_per_s"] = g_s;
  j["g_eff_from_g_s_rad_per_s"] = g_s * std::sqrt(ens.n_spins);
  j["g_eff_rad_per_s"] = ens.g_eff();
  j["cooperativity"] = cooperativity(ens, cav);
  j["t1_s"] = rt.t1;
  j["t2_s"] = rt.t2;
  j["optical_power_equivalent_w"] = optical_power_equivalent(ens.n_spins, kPumpOmega, ens.kappa_th, kPumpPhotonsPerSpin);
  j["eta_t_per_rthz"] = sensitivity(s.e_n_nv_per_rthz * 1e-9, s.v_m_mv * 1e-3, s.b_test_nt * 1e-9);
  j["eta_thermal_t_per_rthz"] = thermal_limit(sc, s.m_max_v_per_t);
  j["e_p_v_per_rthz"] = budget.e_p;
  j["phi_required_dbc_per_hz"] = budget.unbounded ? json(nullptr) : json(budget.phi_required_dbc);
  j["coil_field_t"] = solenoid_axial_field(cfg.coil_geometry());
  j["slope_method_field_t"] = test_field_from_slope(s.v_m_mv * 1e-3, s.m_max_v_per_t);
  j["cavity_band_transition_rad_per_s"] =
      cavity_band_transition(sys, {gauss_to_tesla(cfg.sweep.b_center_gauss), cfg.field_theta(), cfg.field_phi()});
  io::write_json(out_path(cfg, "report.json"), j);
  log_line("wrote " + out_path(cfg, "report.json"));
  return 0;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

io::RunConfig load_config(const std::string& config_path, const std::vector<std::string>& extras) {
  json doc = json::object();
  if (!config_path.empty()) {
    try {
      doc = json::parse(read_text(config_path));
    } catch (const json::parse_error&) {
      io::parse_config(read_text(config_path));  // rethrows with position
    }
  }
  if (const char* env = std::getenv("SPINSENSE_OUTPUT_DIR"); env && *env) doc["output_dir"] = env;
  for (std::size_t k = 0; k < extras.size(); ++k) {
    std::string flag = extras[k];
    if (flag.rfind("--", 0) != 0) fail(ErrorCode::InvalidArgument, "unexpected argument '" + flag + "'");
    flag = flag.substr(2);
    std::string value;
    if (const auto eq = flag.find('='); eq != std::string::npos) {
      value = flag.substr(eq + 1);
      flag = flag.substr(0, eq);
    } else {
      if (k + 1 >= extras.size()) fail(ErrorCode::InvalidArgument, "option --" + flag + " needs a value");
      value = extras[++k];
    }
    std::replace(flag.begin(), flag.end(), '-', '_');
    io::apply_override(doc, flag, value);
  }
  return io::config_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity spin-ensemble magnetometer toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration");

  using Runner = int (*)(const io::RunConfig&);
  const std::vector<std::tuple<std::string, std::string, Runner>> commands = {
      {"eigen", "Energy levels versus field magnitude", run_eigen},
      {"crossing-sim", "Simulate an avoided-crossing reflection grid", run_crossing_sim},
      {"crossing-fit", "Fit a reflection grid", run_crossing_fit},
      {"noise-predict", "Propagate source noise through the cavity", run_noise_predict},
      {"sensitivity", "Simulate readout and evaluate sensitivity budgets", run_sensitivity},
      {"optimize", "Reduce a sensitivity table over field and power", run_optimize},
      {"calibrate", "Test-field calibration cross-checks", run_calibrate},
      {"report", "Summary of derived figures of merit", run_report},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--config", config_path, "JSON run configuration");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: InvalidArgument: " << e.what() << '\n';
    return 2;
  }

  try {
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (!subs[k]->parsed()) continue;
      const io::RunConfig cfg = load_config(config_path, subs[k]->remaining());
      fs::create_directories(cfg.output_dir);
      return std::get<2>(commands[k])(cfg);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::IoError ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: RuntimeError: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
