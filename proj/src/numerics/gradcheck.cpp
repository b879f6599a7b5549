#include "ffa/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ffa/numerics/optim.hpp"

namespace ffa::num {

namespace {

double evaluate(const LossBuilder& loss) {
  Tape tape;
  return loss(tape).value()[0];
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           double tolerance, double step) {
  zero_grad(params);
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  GradCheckReport report;
  for (auto* p : params) {
    double worst = 0.0;
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double saved = p->value[k];
      p->value[k] = saved + step;
      const double up = evaluate(loss);
      p->value[k] = saved - step;
      const double down = evaluate(loss);
      p->value[k] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->grad[k];
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
      double err = std::fabs(analytic - numeric) / denom;
      if (!std::isfinite(err)) err = INFINITY;
      worst = std::max(worst, err);
    }
    report.max_relative_error.push_back(worst);
    report.worst = std::max(report.worst, worst);
  }
  report.pass = report.worst <= tolerance;
  return report;
}

}  // namespace ffa::num
