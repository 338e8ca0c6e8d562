#include "chargeopt/normal.hpp"

#include <cmath>

// W. J. Cody's rational Chebyshev fits for erf (|x| <= 0.46875),
// erfc (0.46875 < x <= 4) and the scaled tail exp(x^2)*erfc(x) (x > 4).
// Coefficients from the classic NETLIB implementation.

namespace chargeopt {

namespace {

const double kA[5] = {3.16112374387056560e00, 1.13864154151050156e02,
                      3.77485237685302021e02, 3.20937758913846947e03,
                      1.85777706184603153e-1};
const double kB[4] = {2.36012909523441209e01, 2.44024637934444173e02,
                      1.28261652607737228e03, 2.84423683343917062e03};
const double kC[9] = {5.64188496988670089e-1, 8.88314979438837594e00,
                      6.61191906371416295e01, 2.98635138197400131e02,
                      8.81952221241769090e02, 1.71204761263407058e03,
                      2.05107837782607147e03, 1.23033935479799725e03,
                      2.15311535474403846e-8};
const double kD[8] = {1.57449261107098347e01, 1.17693950891312499e02,
                      5.37181101862009858e02, 1.62138957456669019e03,
                      3.29079923573345963e03, 4.36261909014324716e03,
                      3.43936767414372164e03, 1.23033935480374942e03};
const double kP[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                      1.25781726111229246e-1, 1.60837851487422766e-2,
                      6.58749161529837803e-4, 1.63153871373020978e-2};
const double kQ[5] = {2.56852019228982242e00, 1.87295284992346047e00,
                      5.27905102951428412e-1, 6.05183413124413191e-2,
                      2.33520497626869185e-3};

constexpr double kSqrPi = 5.6418958354775628695e-1; // 1/sqrt(pi)
constexpr double kThresh = 0.46875;

// Core evaluator: jint = 0 -> erf(x), 1 -> erfc(x), 2 -> exp(x^2) erfc(x).
double calerf(double x, int jint) {
    const double y = std::fabs(x);
    double result = 0.0;

    if (y <= kThresh) {
        double ysq = 0.0;
        if (y > 1.11e-16) ysq = y * y;
        double xnum = kA[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + kA[i]) * ysq;
            xden = (xden + kB[i]) * ysq;
        }
        result = x * (xnum + kA[3]) / (xden + kB[3]);
        if (jint != 0) result = 1.0 - result;
        if (jint == 2) result *= std::exp(ysq);
        return result;
    }

    if (y <= 4.0) {
        double xnum = kC[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + kC[i]) * y;
            xden = (xden + kD[i]) * y;
        }
        result = (xnum + kC[7]) / (xden + kD[7]);
        if (jint != 2) {
            const double ysq = std::floor(y * 16.0) / 16.0;
            const double del = (y - ysq) * (y + ysq);
            result *= std::exp(-ysq * ysq) * std::exp(-del);
        }
    } else {
        if (jint == 2 && y >= 2.684e7) {
            result = kSqrPi / y;
        } else if (jint != 2 && y >= 26.543) {
            result = 0.0;
        } else {
            const double ysq = 1.0 / (y * y);
            double xnum = kP[5] * ysq;
            double xden = ysq;
            for (int i = 0; i < 4; ++i) {
                xnum = (xnum + kP[i]) * ysq;
                xden = (xden + kQ[i]) * ysq;
            }
            result = ysq * (xnum + kP[4]) / (xden + kQ[4]);
            result = (kSqrPi - result) / y;
            if (jint != 2) {
                const double ysq2 = std::floor(y * 16.0) / 16.0;
                const double del = (y - ysq2) * (y + ysq2);
                result *= std::exp(-ysq2 * ysq2) * std::exp(-del);
            }
        }
    }

    // Reflect for negative arguments.
    if (jint == 0) {
        result = 0.5 - result + 0.5;
        if (x < 0) result = -result;
    } else if (jint == 1) {
        if (x < 0) result = 2.0 - result;
    } else { // jint == 2
        if (x < 0) {
            if (x < -26.628) {
                result = HUGE_VAL;
            } else {
                const double ysq = std::floor(x * 16.0) / 16.0;
                const double del = (x - ysq) * (x + ysq);
                const double z = std::exp(ysq * ysq) * std::exp(del);
                result = (z + z) - result;
            }
        }
    }
    return result;
}

constexpr double kInvSqrt2 = 7.0710678118654752440e-1;

} // namespace

double erf_cody(double x) { return calerf(x, 0); }

double erfc_cody(double x) { return calerf(x, 1); }

double standard_normal_cdf(double x) {
    if (x < -8.0) return 0.0;
    if (x > 8.0) return 1.0;
    return 0.5 * erfc_cody(-x * kInvSqrt2);
}

} // namespace chargeopt
