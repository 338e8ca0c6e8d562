#ifndef CHARGEOPT_NORMAL_HPP
#define CHARGEOPT_NORMAL_HPP

namespace chargeopt {

// erf/erfc via Cody's rational Chebyshev approximations; relative error
// is a few ulps over the whole double range, far inside the 1e-10
// absolute accuracy this project needs.
double erf_cody(double x);
double erfc_cody(double x);

// Standard normal CDF.  Exact 0/1 outside [-8, 8]; max absolute error
// <= 1e-14 inside.
double standard_normal_cdf(double x);

} // namespace chargeopt

#endif
