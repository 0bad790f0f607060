#include "spinsense/io/config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <variant>

#include "spinsense/constants.hpp"
#include "spinsense/error.hpp"

namespace spinsense::io {

namespace {

using json = nlohmann::json;
using FieldRef = std::variant<double*, std::int64_t*, std::uint64_t*, std::string*, bool*>;

struct Field {
  std::string key;
  std::string unit;  // suffix of key, empty when dimensionless
  std::function<FieldRef(RunConfig&)> ref;

  std::string stem() const { return unit.empty() ? key : key.substr(0, key.size() - unit.size() - 1); }
};

struct Block {
  std::string name;  // empty for top-level scalars
  std::vector<Field> fields;
};

#define SPINSENSE_FIELD(block, member, unit) \
  Field { #member, unit, [](RunConfig& c) -> FieldRef { return &c.block.member; } }
#define SPINSENSE_TOP(member) \
  Field { #member, "", [](RunConfig& c) -> FieldRef { return &c.member; } }

const std::vector<Block>& schema() {
  static const std::vector<Block> blocks = {
      {"spin",
       {SPINSENSE_FIELD(spin, d_ghz, "ghz"), SPINSENSE_FIELD(spin, g_par, ""),
        SPINSENSE_FIELD(spin, g_perp, ""), SPINSENSE_FIELD(spin, theta_deg, "deg"),
        SPINSENSE_FIELD(spin, phi_deg, "deg")}},
      {"material",
       {SPINSENSE_FIELD(material, v_cav_mm3, "mm3"), SPINSENSE_FIELD(material, v_cell_nm3, "nm3"),
        SPINSENSE_FIELD(material, cr_weight_fraction, "fraction"),
        SPINSENSE_FIELD(material, m_al2o3_g_per_mol, "g_per_mol"),
        SPINSENSE_FIELD(material, m_cr2o3_g_per_mol, "g_per_mol"),
        SPINSENSE_FIELD(material, n_cell, ""), SPINSENSE_FIELD(material, zeta, ""),
        SPINSENSE_FIELD(material, temperature_k, "k")}},
      {"cavity",
       {SPINSENSE_FIELD(cavity, omega_c_ghz, "ghz"), SPINSENSE_FIELD(cavity, kappa_c0_khz, "khz"),
        SPINSENSE_FIELD(cavity, kappa_c1_khz, "khz")}},
      {"ensemble",
       {SPINSENSE_FIELD(ensemble, g_eff_mhz, "mhz"), SPINSENSE_FIELD(ensemble, n_spins, ""),
        SPINSENSE_FIELD(ensemble, kappa_s_mhz, "mhz"), SPINSENSE_FIELD(ensemble, kappa_th_khz, "khz")}},
      {"drive",
       {SPINSENSE_FIELD(drive, power_dbm, "dbm"), SPINSENSE_FIELD(drive, omega_d_ghz, "ghz")}},
      {"nonideality",
       {SPINSENSE_FIELD(nonideality, o_r, ""), SPINSENSE_FIELD(nonideality, o_i, ""),
        SPINSENSE_FIELD(nonideality, a, ""), SPINSENSE_FIELD(nonideality, b_s, "s"),
        SPINSENSE_FIELD(nonideality, psi_rad, "rad"), SPINSENSE_FIELD(nonideality, tau_s, "s"),
        SPINSENSE_FIELD(nonideality, omega_s_off_rad_per_s, "rad_per_s"),
        SPINSENSE_FIELD(nonideality, omega_d_off_rad_per_s, "rad_per_s")}},
      {"grid",
       {SPINSENSE_FIELD(grid, omega_s_span_mhz, "mhz"), SPINSENSE_FIELD(grid, n_s, ""),
        SPINSENSE_FIELD(grid, omega_d_span_mhz, "mhz"), SPINSENSE_FIELD(grid, n_d, ""),
        SPINSENSE_FIELD(grid, noise_sigma, ""), SPINSENSE_FIELD(grid, normalize, "")}},
      {"eigen",
       {SPINSENSE_FIELD(eigen, b_min_gauss, "gauss"), SPINSENSE_FIELD(eigen, b_max_gauss, "gauss"),
        SPINSENSE_FIELD(eigen, n_points, "")}},
      {"sweep",
       {SPINSENSE_FIELD(sweep, b_center_gauss, "gauss"), SPINSENSE_FIELD(sweep, b_span_gauss, "gauss"),
        SPINSENSE_FIELD(sweep, n_b, ""), SPINSENSE_FIELD(sweep, p_min_dbm, "dbm"),
        SPINSENSE_FIELD(sweep, p_max_dbm, "dbm"), SPINSENSE_FIELD(sweep, n_p, ""),
        SPINSENSE_FIELD(sweep, demod_phase_rad, "rad"), SPINSENSE_FIELD(sweep, linearized, "")}},
      {"sensitivity",
       {SPINSENSE_FIELD(sensitivity, chain_gain_db, "db"),
        SPINSENSE_FIELD(sensitivity, noise_temperature_k, "k"),
        SPINSENSE_FIELD(sensitivity, load_ohm, "ohm"),
        SPINSENSE_FIELD(sensitivity, processing_factor, ""),
        SPINSENSE_FIELD(sensitivity, margin_db, "db"),
        SPINSENSE_FIELD(sensitivity, e_n_nv_per_rthz, "nv_per_rthz"),
        SPINSENSE_FIELD(sensitivity, e_th_nv_per_rthz, "nv_per_rthz"),
        SPINSENSE_FIELD(sensitivity, v_m_mv, "mv"), SPINSENSE_FIELD(sensitivity, b_test_nt, "nt"),
        SPINSENSE_FIELD(sensitivity, m_max_v_per_t, "v_per_t"),
        SPINSENSE_FIELD(sensitivity, phi_dbc_per_hz, "dbc_per_hz"),
        SPINSENSE_FIELD(sensitivity, reference_power_dbm, "dbm")}},
      {"coil",
       {SPINSENSE_FIELD(coil, n_turns, ""), SPINSENSE_FIELD(coil, radius_mm, "mm"),
        SPINSENSE_FIELD(coil, axial_distance_mm, "mm"), SPINSENSE_FIELD(coil, current_ma, "ma"),
        SPINSENSE_FIELD(coil, fem_field_nt, "nt")}},
      {"inputs",
       {SPINSENSE_FIELD(inputs, phase_noise_csv, ""), SPINSENSE_FIELD(inputs, amplitude_noise_csv, ""),
        SPINSENSE_FIELD(inputs, grid_csv, ""), SPINSENSE_FIELD(inputs, calibration_csv, ""),
        SPINSENSE_FIELD(inputs, eta_table_csv, "")}},
      {"noise",
       {SPINSENSE_FIELD(noise, p0_v2_per_hz, "v2_per_hz"), SPINSENSE_FIELD(noise, carrier_v2, "v2"),
        SPINSENSE_FIELD(noise, spin_detuning_mhz, "mhz"), SPINSENSE_FIELD(noise, resample, "")}},
      {"timeseries",
       {SPINSENSE_FIELD(timeseries, fs_hz, "hz"), SPINSENSE_FIELD(timeseries, duration_s, "s"),
        SPINSENSE_FIELD(timeseries, segment_samples, ""),
        SPINSENSE_FIELD(timeseries, test_field_nt, "nt"),
        SPINSENSE_FIELD(timeseries, test_freq_hz, "hz"),
        SPINSENSE_FIELD(timeseries, noise_floor_nv_per_rthz, "nv_per_rthz"),
        SPINSENSE_FIELD(timeseries, floor_band_lo_hz, "hz"),
        SPINSENSE_FIELD(timeseries, floor_band_hi_hz, "hz")}},
      {"fit",
       {SPINSENSE_FIELD(fit, tolerance, ""), SPINSENSE_FIELD(fit, max_evaluations, ""),
        SPINSENSE_FIELD(fit, starts, ""), SPINSENSE_FIELD(fit, jitter, ""),
        SPINSENSE_FIELD(fit, guess_scale, "")}},
      {"", {SPINSENSE_TOP(output_dir), SPINSENSE_TOP(seed)}},
  };
  return blocks;
}

#undef SPINSENSE_FIELD
#undef SPINSENSE_TOP

std::string qualified(const Block& b, const std::string& key) {
  return b.name.empty() ? key : b.name + "." + key;
}

[[noreturn]] void unknown_key(const Block& b, const std::string& key) {
  for (const auto& f : b.fields) {
    const std::string stem = f.stem();
    if (key.size() > stem.size() + 1 && key.compare(0, stem.size() + 1, stem + "_") == 0) {
      fail(ErrorCode::UnitMismatch, "key '" + qualified(b, key) + "' has the wrong unit; expected '" +
                                        qualified(b, f.key) + "'");
    }
  }
  fail(ErrorCode::UnknownKey, "unknown key '" + qualified(b, key) + "'");
}

void assign(const FieldRef& ref, const json& v, const std::string& name) {
  auto bad = [&](const char* what) {
    fail(ErrorCode::ParseError, "key '" + name + "' must be " + what);
  };
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!v.is_number()) bad("a number");
          *p = v.get<double>();
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          if (!v.is_number_integer()) bad("an integer");
          *p = v.get<std::int64_t>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          if (!v.is_number_unsigned()) bad("a non-negative integer");
          *p = v.get<std::uint64_t>();
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) bad("a string");
          *p = v.get<std::string>();
        } else {
          if (!v.is_boolean()) bad("true or false");
          *p = v.get<bool>();
        }
      },
      ref);
}

json value_of(const FieldRef& ref) {
  return std::visit([](auto* p) { return json(*p); }, ref);
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void require(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorCode::InvalidArgument, "config: " + msg);
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::ParseError, "config must be a JSON object");
  RunConfig cfg;
  const auto& blocks = schema();
  const Block& top = blocks.back();
  for (const auto& [name, value] : doc.items()) {
    auto it = std::find_if(blocks.begin(), blocks.end() - 1,
                           [&](const Block& b) { return b.name == name; });
    if (it == blocks.end() - 1) {
      auto f = std::find_if(top.fields.begin(), top.fields.end(),
                            [&](const Field& fl) { return fl.key == name; });
      if (f == top.fields.end()) unknown_key(top, name);
      assign(f->ref(cfg), value, name);
      continue;
    }
    if (!value.is_object()) fail(ErrorCode::ParseError, "block '" + name + "' must be an object");
    for (const auto& [key, v] : value.items()) {
      auto f = std::find_if(it->fields.begin(), it->fields.end(),
                            [&](const Field& fl) { return fl.key == key; });
      if (f == it->fields.end()) unknown_key(*it, key);
      assign(f->ref(cfg), v, qualified(*it, key));
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    fail(ErrorCode::ParseError, "invalid JSON at line " + std::to_string(line) + ", column " +
                                    std::to_string(col) + " (byte " + std::to_string(e.byte) + ")");
  }
  return config_from_json(doc);
}

json config_to_json(const RunConfig& cfg) {
  RunConfig copy = cfg;
  json doc = json::object();
  for (const auto& b : schema()) {
    for (const auto& f : b.fields) {
      if (b.name.empty())
        doc[f.key] = value_of(f.ref(copy));
      else
        doc[b.name][f.key] = value_of(f.ref(copy));
    }
  }
  return doc;
}

std::string serialize_config(const RunConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

void apply_override(json& doc, const std::string& key, const std::string& value) {
  const Block* owner = nullptr;
  const Field* field = nullptr;
  for (const auto& b : schema())
    for (const auto& f : b.fields)
      if (f.key == key) {
        owner = &b;
        field = &f;
      }
  if (!field) {
    for (const auto& b : schema())
      for (const auto& f : b.fields) {
        const std::string stem = f.stem();
        if (key.size() > stem.size() + 1 && key.compare(0, stem.size() + 1, stem + "_") == 0)
          fail(ErrorCode::UnitMismatch, "option '" + key + "' has the wrong unit; expected '" + f.key + "'");
      }
    fail(ErrorCode::UnknownKey, "unknown option '" + key + "'");
  }

  RunConfig probe;
  const FieldRef ref = field->ref(probe);
  json v;
  if (std::holds_alternative<std::string*>(ref)) {
    v = value;
  } else if (std::holds_alternative<bool*>(ref)) {
    if (value != "true" && value != "false")
      fail(ErrorCode::ParseError, "option '" + key + "' expects true or false");
    v = value == "true";
  } else {
    try {
      v = json::parse(value);
    } catch (const json::parse_error&) {
      fail(ErrorCode::ParseError, "option '" + key + "' expects a number, got '" + value + "'");
    }
  }
  if (owner->name.empty())
    doc[key] = v;
  else
    doc[owner->name][key] = v;
}

void RunConfig::validate() const {
  spin_system().validate();
  material_params().validate();
  require(material.temperature_k > 0.0, "material.temperature_k must be positive");
  cavity_params().validate();
  require(ensemble.n_spins > 0.0, "ensemble.n_spins must be positive");
  require(ensemble.kappa_s_mhz > 0.0 && ensemble.kappa_th_khz > 0.0 && ensemble.g_eff_mhz >= 0.0,
          "ensemble rates must be positive");
  require(drive.omega_d_ghz > 0.0, "drive.omega_d_ghz must be positive");
  require(grid.n_s >= 2 && grid.n_d >= 2, "grid needs at least 2x2 points");
  require(grid.omega_s_span_mhz > 0.0 && grid.omega_d_span_mhz > 0.0, "grid spans must be positive");
  require(grid.noise_sigma >= 0.0, "grid.noise_sigma must be >= 0");
  require(eigen.n_points >= 1 && eigen.b_max_gauss >= eigen.b_min_gauss, "invalid eigen sweep");
  require(sweep.n_b >= 5 && sweep.b_span_gauss > 0.0, "sweep needs >= 5 points and a positive span");
  require(sweep.n_p >= 1 && sweep.p_max_dbm >= sweep.p_min_dbm, "invalid power sweep");
  sensitivity_config().validate();
  coil_geometry().validate();
  require(noise.p0_v2_per_hz >= 0.0 && noise.carrier_v2 > 0.0, "invalid noise scale");
  require(timeseries.fs_hz > 0.0 && timeseries.duration_s > 0.0, "invalid timeseries timing");
  require(timeseries.segment_samples >= 16, "timeseries.segment_samples must be >= 16");
  require(fit.tolerance > 0.0 && fit.max_evaluations > 0 && fit.starts >= 1 && fit.jitter >= 0.0 &&
              fit.guess_scale > 0.0,
          "invalid fit options");
}

SpinSystem RunConfig::spin_system() const {
  SpinSystem s;
  s.d = hz_to_rad(spin.d_ghz * 1e9);
  s.g_par = spin.g_par;
  s.g_perp = spin.g_perp;
  return s;
}

double RunConfig::field_theta() const { return spin.theta_deg * std::numbers::pi / 180.0; }
double RunConfig::field_phi() const { return spin.phi_deg * std::numbers::pi / 180.0; }

MaterialParams RunConfig::material_params() const {
  MaterialParams m;
  m.v_cav = material.v_cav_mm3 * 1e-9;
  m.v_cell = material.v_cell_nm3 * 1e-27;
  m.alpha_cr = material.cr_weight_fraction;
  m.m_al2o3 = material.m_al2o3_g_per_mol;
  m.m_cr2o3 = material.m_cr2o3_g_per_mol;
  m.n_cell = static_cast<int>(material.n_cell);
  m.zeta = material.zeta;
  return m;
}

CavityParams RunConfig::cavity_params() const {
  return {hz_to_rad(cavity.omega_c_ghz * 1e9), hz_to_rad(cavity.kappa_c0_khz * 1e3),
          hz_to_rad(cavity.kappa_c1_khz * 1e3)};
}

EnsembleParams RunConfig::ensemble_params() const {
  EnsembleParams e;
  e.n_spins = ensemble.n_spins;
  e.g_s = hz_to_rad(ensemble.g_eff_mhz * 1e6) / std::sqrt(ensemble.n_spins);
  e.kappa_s = hz_to_rad(ensemble.kappa_s_mhz * 1e6);
  e.kappa_th = hz_to_rad(ensemble.kappa_th_khz * 1e3);
  e.omega_s = hz_to_rad(cavity.omega_c_ghz * 1e9);
  return e;
}

NonIdealityParams RunConfig::nonideality_params() const {
  const auto& n = nonideality;
  return {n.o_r, n.o_i, n.a, n.b_s, n.psi_rad, n.tau_s, n.omega_s_off_rad_per_s, n.omega_d_off_rad_per_s, 0.0};
}

double RunConfig::drive_power() const { return dbm_to_watts(drive.power_dbm); }
double RunConfig::drive_omega() const { return hz_to_rad(drive.omega_d_ghz * 1e9); }

CrossingModel RunConfig::crossing_model() const {
  return {cavity_params(), ensemble_params(), nonideality_params()};
}

GridSpec RunConfig::grid_spec() const {
  return GridSpec::centered(hz_to_rad(cavity.omega_c_ghz * 1e9), hz_to_rad(grid.omega_s_span_mhz * 1e6),
                            static_cast<std::size_t>(grid.n_s), hz_to_rad(grid.omega_d_span_mhz * 1e6),
                            static_cast<std::size_t>(grid.n_d), drive_power());
}

SensitivityConfig RunConfig::sensitivity_config() const {
  return {sensitivity.chain_gain_db, sensitivity.noise_temperature_k, sensitivity.load_ohm,
          sensitivity.processing_factor, sensitivity.margin_db};
}

CoilGeometry RunConfig::coil_geometry() const {
  return {coil.n_turns, coil.radius_mm * 1e-3, coil.axial_distance_mm * 1e-3, coil.current_ma * 1e-3};
}

TestFieldSpec RunConfig::test_field() const {
  return {timeseries.test_field_nt * 1e-9, hz_to_rad(timeseries.test_freq_hz)};
}

TimeseriesSpec RunConfig::timeseries_spec() const {
  return {timeseries.fs_hz, timeseries.duration_s, timeseries.noise_floor_nv_per_rthz * 1e-9};
}

FitOptions RunConfig::fit_options() const {
  FitOptions o;
  o.tolerance = fit.tolerance;
  o.max_evaluations = static_cast<std::size_t>(fit.max_evaluations);
  o.starts = static_cast<std::size_t>(fit.starts);
  o.seed = seed;
  o.jitter = fit.jitter;
  return o;
}

SensorModel RunConfig::sensor_model(double power_w) const {
  SensorModel m;
  m.spin = spin_system();
  m.theta = field_theta();
  m.phi = field_phi();
  m.cavity = cavity_params();
  m.ensemble = ensemble_params();
  m.omega_d = drive_omega();
  m.power = power_w;
  m.gain_db = sensitivity.chain_gain_db;
  m.resistance = sensitivity.load_ohm;
  m.demod_phase = sweep.demod_phase_rad;
  m.linearized = sweep.linearized;
  return m;
}

}  // namespace spinsense::io
