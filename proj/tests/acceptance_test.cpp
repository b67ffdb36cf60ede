// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Criteria mirror the verification suite plus the two desk-scale
// studies.
#include <chrono>
#include <cstdio>
#include <string>

#include "pyrafem/verify.hpp"

using namespace pyrafem;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(int idx, const std::string& what, bool pass, double secs,
            const std::string& extra = "") {
  std::printf("%s: criterion %d — %s (%.1fs)%s%s\n", pass ? "PASS" : "FAIL",
              idx, what.c_str(), secs, extra.empty() ? "" : " — ",
              extra.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;

  {
    auto t0 = clock::now();
    CheckResult r = check_quadrature_exactness();
    double dt = seconds_since(t0);
    report(1, "quadrature exactness, k=0..4, full monomial box", r.pass && dt < 5.0,
           dt, "worst residual " + std::to_string(r.worst));
  }

  {
    auto t0 = clock::now();
    bool pass = true;
    double worst = 0.0;
    for (const auto& r : check_gram_oracle(20240817u)) {
      pass = pass && r.pass;
      worst = std::max(worst, r.worst);
    }
    double dt = seconds_since(t0);
    report(2, "Gram matrices match the exact oracle, s=0..3, k=1..3",
           pass && dt < 120.0, dt, "worst residual " + std::to_string(worst));
  }

  {
    auto t0 = clock::now();
    bool pass = true;
    std::string detail;
    for (const auto& r : check_structure(4)) {
      if (!r.pass) detail += r.name + " ";
      pass = pass && r.pass;
    }
    report(3, "exact structure suite, k=1..4", pass, seconds_since(t0), detail);
  }

  {
    auto t0 = clock::now();
    CheckResult r = check_divergence_counterexample();
    double dt = seconds_since(t0);
    report(4, "divergence counterexample grows without bound", r.pass && dt < 1.0,
           dt, r.detail);
  }

  {
    auto t0 = clock::now();
    CheckResult r = check_integrability_ladder(4);
    report(5, "integrability ladder of exact-weight generators", r.pass,
           seconds_since(t0), r.detail);
  }

  {
    auto t0 = clock::now();
    StudyResult r1 = convergence_study(1, 1, {2, 4, 8}, "identity",
                                       solution_preset("sin3"));
    StudyResult r2 = convergence_study(2, 2, {1, 2, 4}, "identity",
                                       solution_preset("poly_bubble"));
    double dt = seconds_since(t0);
    bool pass = r1.fitted_h1 >= 0.8 && r1.fitted_h1 <= 1.3 &&
                r2.fitted_h1 >= 1.7 && r2.fitted_h1 <= 2.4 && dt < 180.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "H1 rates k=1: %.2f, k=2: %.2f",
                  r1.fitted_h1, r2.fitted_h1);
    report(6, "Poisson H1 convergence rates", pass, dt, buf);
  }

  {
    auto t0 = clock::now();
    ManufacturedSolution u = solution_preset("sin3");
    StudyResult r1 = consistency_study(1, {1, 2, 4}, "poly1", u);
    StudyResult r2 = consistency_study(2, {1, 2, 4}, "poly1", u);
    double dt = seconds_since(t0);
    bool pass = r1.fitted_consistency >= 1.7 && r2.fitted_consistency >= 2.7 &&
                dt < 180.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "rates k=1: %.2f, k=2: %.2f",
                  r1.fitted_consistency, r2.fitted_consistency);
    report(7, "consistency error decay rates", pass, dt, buf);
  }

  {
    auto t0 = clock::now();
    CheckResult r = check_quadrature_insensitivity();
    report(8, "assembled stiffness independent of quadrature order", r.pass,
           seconds_since(t0), "worst residual " + std::to_string(r.worst));
  }

  return failures == 0 ? 0 : 1;
}
