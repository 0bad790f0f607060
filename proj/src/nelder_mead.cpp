#include "spinsense/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spinsense/error.hpp"

namespace spinsense {

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<std::vector<double>> xs;
    std::vector<double> fs;
    for (auto i : idx) {
      xs.push_back(std::move(x[i]));
      fs.push_back(f[i]);
    }
    x = std::move(xs);
    f = std::move(fs);
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t v = 1; v < x.size(); ++v)
      for (std::size_t k = 0; k < x[0].size(); ++k) d = std::max(d, std::abs(x[v][k] - x[0][k]));
    return d;
  }
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "nelder_mead: empty parameter vector");

  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;           // expansion
  const double gamma = 0.75 - 1.0 / (2.0 * dn);  // contraction
  const double delta = 1.0 - 1.0 / dn;          // shrink

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<double> best_x = x0;
  double best_f = eval(x0);
  bool converged = false;

  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    Simplex s;
    s.x.push_back(best_x);
    s.f.push_back(best_f);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> v = best_x;
      v[k] += options.initial_step;
      s.f.push_back(eval(v));
      s.x.push_back(std::move(v));
    }
    s.sort();
    const double start_f = best_f;
    bool local_converged = false;

    while (res.evaluations < options.max_evaluations) {
      if (s.f.back() - s.f.front() <= options.f_tolerance &&
          s.diameter() <= options.x_tolerance) {
        local_converged = true;
        break;
      }
      if (s.f.back() - s.f.front() <= options.f_tolerance && s.f.front() == 0.0) {
        local_converged = true;
        break;
      }
      ++res.iterations;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += s.x[v][k] / dn;

      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (s.x[n][k] - centroid[k]);
        return p;
      };

      auto xr = along(-alpha);
      const double fr = eval(xr);
      if (fr < s.f[0]) {
        auto xe = along(-alpha * beta);
        const double fe = eval(xe);
        if (fe < fr) {
          s.x[n] = std::move(xe);
          s.f[n] = fe;
        } else {
          s.x[n] = std::move(xr);
          s.f[n] = fr;
        }
      } else if (fr < s.f[n - 1]) {
        s.x[n] = std::move(xr);
        s.f[n] = fr;
      } else {
        const bool outside = fr < s.f[n];
        auto xc = outside ? along(-alpha * gamma) : along(gamma);
        const double fc = eval(xc);
        if (fc <= (outside ? fr : s.f[n])) {
          s.x[n] = std::move(xc);
          s.f[n] = fc;
        } else {
          for (std::size_t v = 1; v <= n; ++v) {
            for (std::size_t k = 0; k < n; ++k)
              s.x[v][k] = s.x[0][k] + delta * (s.x[v][k] - s.x[0][k]);
            s.f[v] = eval(s.x[v]);
          }
        }
      }
      s.sort();
      res.best_history.push_back(std::min(s.f[0], best_f));
    }

    if (s.f[0] < best_f) {
      best_f = s.f[0];
      best_x = s.x[0];
    }
    if (!local_converged) break;  // budget exhausted
    if (start_f - best_f <= options.f_tolerance) {
      converged = true;
      break;
    }
  }

  res.x = std::move(best_x);
  res.value = best_f;
  res.converged = converged;
  return res;
}

}  // namespace spinsense
