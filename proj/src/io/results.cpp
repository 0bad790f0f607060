#include "spinsense/io/results.hpp"

#include <fstream>

#include "spinsense/error.hpp"

namespace spinsense::io {

using json = nlohmann::json;

json model_to_json(const CrossingModel& m) {
  json j;
  j["omega_c_rad_per_s"] = m.cavity.omega_c;
  j["kappa_c_rad_per_s"] = m.cavity.kappa_c();
  j["kappa_c0_rad_per_s"] = m.cavity.kappa_c0;
  j["kappa_c1_rad_per_s"] = m.cavity.kappa_c1;
  j["kappa_s_rad_per_s"] = m.ensemble.kappa_s;
  j["kappa_th_rad_per_s"] = m.ensemble.kappa_th;
  j["g_eff_rad_per_s"] = m.ensemble.g_eff();
  j["g_s_rad_per_s"] = m.ensemble.g_s;
  j["n_spins"] = m.ensemble.n_spins;
  j["o_r"] = m.nonideal.o_r;
  j["o_i"] = m.nonideal.o_i;
  j["a"] = m.nonideal.a;
  j["b_s"] = m.nonideal.b;
  j["psi_rad"] = m.nonideal.psi;
  j["tau_s"] = m.nonideal.tau;
  j["omega_s_off_rad_per_s"] = m.nonideal.omega_s_off;
  j["omega_d_off_rad_per_s"] = m.nonideal.omega_d_off;
  return j;
}

json fit_result_to_json(const FitResult& r) {
  json j = model_to_json(r.model());
  j["omega_d_mean_rad_per_s"] = r.nonideal.omega_d_mean;
  const RelaxationTimes t = relaxation_times(r.ensemble);
  j["t1_s"] = t.t1;
  j["t2_s"] = t.t2;
  j["objective_value"] = r.objective_value;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["converged"] = r.converged;
  return j;
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, path + ": invalid JSON at byte " + std::to_string(e.byte));
  }
}

}  // namespace spinsense::io
