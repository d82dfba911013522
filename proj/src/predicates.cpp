#include "fracdim/predicates.hpp"

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

namespace fracdim::predicates {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kEps = 0x1.0p-53;
constexpr double kSumOfProductsBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kInCircleBound = (10.0 + 96.0 * kEps) * kEps;

template <typename T>
int sign(const T& v) {
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

int orient2d_exact(const double* a, const double* b, const double* c) {
  const Rational acx = Rational(a[0]) - c[0], bcx = Rational(b[0]) - c[0];
  const Rational acy = Rational(a[1]) - c[1], bcy = Rational(b[1]) - c[1];
  return sign(acx * bcy - acy * bcx);
}

int incircle_exact(const double* a, const double* b, const double* c, const double* d) {
  const Rational adx = Rational(a[0]) - d[0], ady = Rational(a[1]) - d[1];
  const Rational bdx = Rational(b[0]) - d[0], bdy = Rational(b[1]) - d[1];
  const Rational cdx = Rational(c[0]) - d[0], cdy = Rational(c[1]) - d[1];
  const Rational alift = adx * adx + ady * ady;
  const Rational blift = bdx * bdx + bdy * bdy;
  const Rational clift = cdx * cdx + cdy * cdy;
  return sign(alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
              clift * (adx * bdy - bdx * ady));
}

int diametral_exact(const double* a, const double* b, const double* c) {
  const Rational acx = Rational(a[0]) - c[0], bcx = Rational(b[0]) - c[0];
  const Rational acy = Rational(a[1]) - c[1], bcy = Rational(b[1]) - c[1];
  return sign(acx * bcx + acy * bcy);
}

}  // namespace

int orient2d(const double* a, const double* b, const double* c) {
  const double left = (a[0] - c[0]) * (b[1] - c[1]);
  const double right = (a[1] - c[1]) * (b[0] - c[0]);
  const double det = left - right;
  const double bound = kSumOfProductsBound * (std::abs(left) + std::abs(right));
  if (det > bound || -det > bound) return sign(det);
  return orient2d_exact(a, b, c);
}

int incircle(const double* a, const double* b, const double* c, const double* d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det =
      alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kInCircleBound * permanent;
  if (det > bound || -det > bound) return sign(det);
  return incircle_exact(a, b, c, d);
}

int diametral(const double* a, const double* b, const double* c) {
  const double x = (a[0] - c[0]) * (b[0] - c[0]);
  const double y = (a[1] - c[1]) * (b[1] - c[1]);
  const double dot = x + y;
  const double bound = kSumOfProductsBound * (std::abs(x) + std::abs(y));
  if (dot > bound || -dot > bound) return sign(dot);
  return diametral_exact(a, b, c);
}

}  // namespace fracdim::predicates
