#include <cmath>
#include <vector>

#include "spinsense/nelder_mead.hpp"
#include "support.hpp"

using namespace spinsense;

TEST_CASE("nelder-mead minimises smooth and non-smooth functions") {
  SUBCASE("rosenbrock") {
    const Objective f = [](const std::vector<double>& x) {
      return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
    };
    const auto r = nelder_mead(f, {-1.2, 1.0});
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.value < 1e-10);
  }
  SUBCASE("l1 bowl in eight dimensions") {
    const Objective f = [](const std::vector<double>& x) {
      double s = 0;
      for (std::size_t k = 0; k < x.size(); ++k) s += std::abs(x[k] - 0.1 * static_cast<double>(k));
      return s;
    };
    const auto r = nelder_mead(f, std::vector<double>(8, 1.0));
    for (std::size_t k = 0; k < 8; ++k) CHECK(r.x[k] == doctest::Approx(0.1 * k).scale(1.0).epsilon(1e-6));
  }
  SUBCASE("history never increases") {
    const Objective f = [](const std::vector<double>& x) {
      return std::abs(x[0] - 3) + 2 * std::abs(x[1] + 1) + std::abs(x[2] * x[0]);
    };
    const auto r = nelder_mead(f, {0.5, 0.5, 0.5});
    REQUIRE(!r.best_history.empty());
    for (std::size_t k = 1; k < r.best_history.size(); ++k)
      CHECK(r.best_history[k] <= r.best_history[k - 1]);
    CHECK(r.best_history.back() >= r.value);
  }
  SUBCASE("budget overshoots by at most one iteration") {
    NelderMeadOptions o;
    o.max_evaluations = 200;
    const Objective f = [](const std::vector<double>& x) {
      return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
    };
    const auto r = nelder_mead(f, {-1.2, 1.0}, o);
    CHECK(!r.converged);
    CHECK(r.evaluations <= o.max_evaluations + 4);
  }
  SUBCASE("non-finite values are treated as infinitely bad") {
    const Objective f = [](const std::vector<double>& x) {
      return x[0] < 0 ? std::nan("") : (x[0] - 1) * (x[0] - 1);
    };
    const auto r = nelder_mead(f, {0.05});
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("empty input") {
    CHECK_ERROR_CODE(nelder_mead([](const std::vector<double>&) { return 0.0; }, {}),
                     ErrorCode::InvalidArgument);
  }
}
