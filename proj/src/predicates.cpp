// Adaptive-precision orientation predicates after Shewchuk's scheme:
// a cheap filtered evaluation with a proven error bound, and an exact
// floating-point-expansion fallback when the filter cannot decide.
// Expansion products use std::fma instead of the classic Split trick.
//
// This translation unit must be compiled with -ffp-contract=off so the
// error-free transformations below are not fused away.

#include "tetopt/predicates.hpp"

#include <cmath>

namespace tetopt {
namespace {

constexpr double kEps = 0x1.0p-53;
constexpr double kCcwErrBoundA = (3.0 + 16.0 * kEps) * kEps;
constexpr double kO3dErrBoundA = (7.0 + 56.0 * kEps) * kEps;

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bvirt = x - a;
  const double avirt = x - bvirt;
  const double bround = b - bvirt;
  const double around = a - avirt;
  y = around + bround;
}

// Requires |a| >= |b|.
inline void fast_two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bvirt = x - a;
  y = b - bvirt;
}

inline void two_diff(double a, double b, double& x, double& y) {
  x = a - b;
  const double bvirt = a - x;
  const double avirt = x + bvirt;
  const double bround = bvirt - b;
  const double around = a - avirt;
  y = around + bround;
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

// (a1,a0) - (b1,b0) -> four-component expansion x[0..3], increasing magnitude.
inline void two_two_diff(double a1, double a0, double b1, double b0, double x[4]) {
  double j, r0, i;
  two_diff(a0, b0, i, x[0]);
  two_sum(a1, i, j, r0);
  two_diff(r0, b1, i, x[1]);
  two_sum(j, i, x[3], x[2]);
}

// h = e + f, both nonoverlapping and magnitude-sorted; returns length of h.
int expansion_sum_zeroelim(int elen, const double* e, int flen, const double* f, double* h) {
  double q, qnew, hh;
  int eindex = 0, findex = 0, hindex = 0;
  double enow = e[0];
  double fnow = f[0];
  if ((fnow > enow) == (fnow > -enow)) {
    q = enow;
    if (++eindex < elen) enow = e[eindex];
  } else {
    q = fnow;
    if (++findex < flen) fnow = f[findex];
  }
  if ((eindex < elen) && (findex < flen)) {
    if ((fnow > enow) == (fnow > -enow)) {
      fast_two_sum(enow, q, qnew, hh);
      if (++eindex < elen) enow = e[eindex];
    } else {
      fast_two_sum(fnow, q, qnew, hh);
      if (++findex < flen) fnow = f[findex];
    }
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
    while ((eindex < elen) && (findex < flen)) {
      if ((fnow > enow) == (fnow > -enow)) {
        two_sum(q, enow, qnew, hh);
        if (++eindex < elen) enow = e[eindex];
      } else {
        two_sum(q, fnow, qnew, hh);
        if (++findex < flen) fnow = f[findex];
      }
      q = qnew;
      if (hh != 0.0) h[hindex++] = hh;
    }
  }
  while (eindex < elen) {
    two_sum(q, enow, qnew, hh);
    if (++eindex < elen) enow = e[eindex];
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  while (findex < flen) {
    two_sum(q, fnow, qnew, hh);
    if (++findex < flen) fnow = f[findex];
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  if ((q != 0.0) || (hindex == 0)) h[hindex++] = q;
  return hindex;
}

// h = e * b; returns length of h.
int scale_expansion_zeroelim(int elen, const double* e, double b, double* h) {
  double q, sum, hh, product1, product0;
  int hindex = 0;
  two_product(e[0], b, q, hh);
  if (hh != 0.0) h[hindex++] = hh;
  for (int eindex = 1; eindex < elen; eindex++) {
    two_product(e[eindex], b, product1, product0);
    two_sum(q, product0, sum, hh);
    if (hh != 0.0) h[hindex++] = hh;
    fast_two_sum(product1, sum, q, hh);
    if (hh != 0.0) h[hindex++] = hh;
  }
  if ((q != 0.0) || (hindex == 0)) h[hindex++] = q;
  return hindex;
}

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Exact sign of the homogeneous 4x4 determinant |pa 1; pb 1; pc 1; pd 1|,
// which equals det[pa-pd, pb-pd, pc-pd].
int orient3d_exact(const double* pa, const double* pb, const double* pc, const double* pd) {
  double axby1, bxcy1, cxdy1, dxay1, axcy1, bxdy1;
  double bxay1, cxby1, dxcy1, axdy1, cxay1, dxby1;
  double axby0, bxcy0, cxdy0, dxay0, axcy0, bxdy0;
  double bxay0, cxby0, dxcy0, axdy0, cxay0, dxby0;
  double ab[4], bc[4], cd[4], da[4], ac[4], bd[4];
  double temp8[8];
  double abc[12], bcd[12], cda[12], dab[12];
  double adet[24], bdet[24], cdet[24], ddet[24];
  double abdet[48], cddet[48];
  double deter[96];

  two_product(pa[0], pb[1], axby1, axby0);
  two_product(pb[0], pa[1], bxay1, bxay0);
  two_two_diff(axby1, axby0, bxay1, bxay0, ab);

  two_product(pb[0], pc[1], bxcy1, bxcy0);
  two_product(pc[0], pb[1], cxby1, cxby0);
  two_two_diff(bxcy1, bxcy0, cxby1, cxby0, bc);

  two_product(pc[0], pd[1], cxdy1, cxdy0);
  two_product(pd[0], pc[1], dxcy1, dxcy0);
  two_two_diff(cxdy1, cxdy0, dxcy1, dxcy0, cd);

  two_product(pd[0], pa[1], dxay1, dxay0);
  two_product(pa[0], pd[1], axdy1, axdy0);
  two_two_diff(dxay1, dxay0, axdy1, axdy0, da);

  two_product(pa[0], pc[1], axcy1, axcy0);
  two_product(pc[0], pa[1], cxay1, cxay0);
  two_two_diff(axcy1, axcy0, cxay1, cxay0, ac);

  two_product(pb[0], pd[1], bxdy1, bxdy0);
  two_product(pd[0], pb[1], dxby1, dxby0);
  two_two_diff(bxdy1, bxdy0, dxby1, dxby0, bd);

  int templen = expansion_sum_zeroelim(4, cd, 4, da, temp8);
  const int cdalen = expansion_sum_zeroelim(templen, temp8, 4, ac, cda);
  templen = expansion_sum_zeroelim(4, da, 4, ab, temp8);
  const int dablen = expansion_sum_zeroelim(templen, temp8, 4, bd, dab);
  for (int i = 0; i < 4; i++) {
    bd[i] = -bd[i];
    ac[i] = -ac[i];
  }
  templen = expansion_sum_zeroelim(4, ab, 4, bc, temp8);
  const int abclen = expansion_sum_zeroelim(templen, temp8, 4, ac, abc);
  templen = expansion_sum_zeroelim(4, bc, 4, cd, temp8);
  const int bcdlen = expansion_sum_zeroelim(templen, temp8, 4, bd, bcd);

  const int alen = scale_expansion_zeroelim(bcdlen, bcd, pa[2], adet);
  const int blen = scale_expansion_zeroelim(cdalen, cda, -pb[2], bdet);
  const int clen = scale_expansion_zeroelim(dablen, dab, pc[2], cdet);
  const int dlen = scale_expansion_zeroelim(abclen, abc, -pd[2], ddet);

  const int ablen = expansion_sum_zeroelim(alen, adet, blen, bdet, abdet);
  const int cdlen = expansion_sum_zeroelim(clen, cdet, dlen, ddet, cddet);
  const int deterlen = expansion_sum_zeroelim(ablen, abdet, cdlen, cddet, deter);

  return sign_of(deter[deterlen - 1]);
}

// Filtered sign of det[pa-pd, pb-pd, pc-pd] with exact fallback.
int orient3d_adaptive(const double* pa, const double* pb, const double* pc, const double* pd) {
  const double adx = pa[0] - pd[0];
  const double bdx = pb[0] - pd[0];
  const double cdx = pc[0] - pd[0];
  const double ady = pa[1] - pd[1];
  const double bdy = pb[1] - pd[1];
  const double cdy = pc[1] - pd[1];
  const double adz = pa[2] - pd[2];
  const double bdz = pb[2] - pd[2];
  const double cdz = pc[2] - pd[2];

  const double bdxcdy = bdx * cdy;
  const double cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady;
  const double adxcdy = adx * cdy;
  const double adxbdy = adx * bdy;
  const double bdxady = bdx * ady;

  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * std::fabs(adz) +
                           (std::fabs(cdxady) + std::fabs(adxcdy)) * std::fabs(bdz) +
                           (std::fabs(adxbdy) + std::fabs(bdxady)) * std::fabs(cdz);
  const double errbound = kO3dErrBoundA * permanent;
  if (det > errbound || -det > errbound) return sign_of(det);

  return orient3d_exact(pa, pb, pc, pd);
}

int orient2d_exact(const double* pa, const double* pb, const double* pc) {
  double t1, t0;
  double ab[4], bc[4], ca[4];
  double temp8[8], det12[12];

  two_product(pa[0], pb[1], t1, t0);
  double u1, u0;
  two_product(pb[0], pa[1], u1, u0);
  two_two_diff(t1, t0, u1, u0, ab);

  two_product(pb[0], pc[1], t1, t0);
  two_product(pc[0], pb[1], u1, u0);
  two_two_diff(t1, t0, u1, u0, bc);

  two_product(pc[0], pa[1], t1, t0);
  two_product(pa[0], pc[1], u1, u0);
  two_two_diff(t1, t0, u1, u0, ca);

  const int templen = expansion_sum_zeroelim(4, ab, 4, bc, temp8);
  const int detlen = expansion_sum_zeroelim(templen, temp8, 4, ca, det12);
  return sign_of(det12[detlen - 1]);
}

}  // namespace

int orient3d_sign(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                  const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  // det[b-a, c-a, d-a] equals det[a-d, c-d, b-d] with rows b and c swapped.
  return orient3d_adaptive(a.data(), c.data(), b.data(), d.data());
}

int orient2d_sign(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                  const Eigen::Vector2d& c) {
  const double detleft = (a.x() - c.x()) * (b.y() - c.y());
  const double detright = (a.y() - c.y()) * (b.x() - c.x());
  const double det = detleft - detright;
  const double errbound = kCcwErrBoundA * (std::fabs(detleft) + std::fabs(detright));
  if (det > errbound || -det > errbound) return sign_of(det);
  return orient2d_exact(a.data(), b.data(), c.data());
}

}  // namespace tetopt
