#include "fbstore/horizon.h"

#include <cmath>
#include <stdexcept>

namespace fbstore {

HorizonRequest::HorizonRequest(HurstParam h_, double theta_, double x_, double eps_)
    : h(h_), theta(theta_), x(x_), eps(eps_) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be positive");
  if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("level x must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
}

HorizonResponse horizon(const HorizonRequest& req) {
  const double hv = req.h.value();
  const double alpha = 2.0 - 2.0 * hv;
  HorizonResponse out;
  out.theta = req.theta;
  out.t_star = req.x * hv / (1.0 - hv);
  out.denominator_rate = 0.5 * std::pow(req.x / (1.0 - hv), alpha) * std::pow(1.0 / hv, 2.0 * hv);
  const double base = -std::log(req.eps) / req.theta + out.denominator_rate / req.theta;
  out.t = std::pow(base, 1.0 / alpha);
  out.numerator_rate = req.theta * base;  // = theta t^{2-2H}
  return out;
}

HorizonResponse horizon_with_computed_theta(const HurstParam& h, double x, double eps, const RateOptions& opt) {
  RatePath path = theta(h, opt);
  HorizonResponse out = horizon(HorizonRequest(h, path.value, x, eps));
  out.theta_certificate = std::move(path);
  return out;
}

}  // namespace fbstore
