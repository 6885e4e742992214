#pragma once

#include <optional>

#include "fbstore/fbm.h"
#include "fbstore/rate.h"

namespace fbstore {

struct HorizonRequest {
  HorizonRequest(HurstParam h, double theta, double x, double eps);

  HurstParam h;
  double theta;  // busy-period decay rate
  double x;      // level
  double eps;    // relative truncation error budget
};

struct HorizonResponse {
  /// Smallest t with exp(-theta t^{2-2H}) / P_lower(M > x) <= eps.
  double t = 0.0;
  /// Most likely overflow time x H / (1 - H).
  double t_star = 0.0;
  /// theta t^{2-2H} at the returned t.
  double numerator_rate = 0.0;
  /// 1/2 (x / (1-H))^{2-2H} (1/H)^{2H}, the Gaussian lower-bound exponent.
  double denominator_rate = 0.0;
  double theta = 0.0;
  /// Set when theta was computed rather than supplied.
  std::optional<RatePath> theta_certificate;
};

HorizonResponse horizon(const HorizonRequest& req);

/// horizon() with theta computed by the busy-period min-norm solve.
HorizonResponse horizon_with_computed_theta(const HurstParam& h, double x, double eps,
                                            const RateOptions& opt = {});

}  // namespace fbstore
