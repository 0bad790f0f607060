#pragma once

// Derivative-free simplex minimiser for non-smooth objectives. Uses the
// dimension-adaptive coefficients of Gao and Han, and restarts from the best
// vertex until a restart no longer improves the objective.

#include <cstddef>
#include <functional>
#include <vector>

namespace spinsense {

struct NelderMeadOptions {
  double f_tolerance = 1e-10;        // absolute spread of vertex values
  double x_tolerance = 1e-10;        // simplex diameter (infinity norm)
  std::size_t max_evaluations = 50000;
  double initial_step = 0.1;
  std::size_t max_restarts = 50;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<double> best_history;  // best value after each iteration
};

using Objective = std::function<double(const std::vector<double>&)>;

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& options = {});

}  // namespace spinsense
