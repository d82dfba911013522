#pragma once

namespace fracdim::predicates {

// Sign-exact planar predicates. Each evaluates in double precision behind a
// forward error bound and falls back to exact rational arithmetic only when
// the sign is uncertain.

/// > 0 when a, b, c are counterclockwise, < 0 clockwise, 0 collinear.
int orient2d(const double* a, const double* b, const double* c);

/// > 0 when d lies strictly inside the circle through counterclockwise a, b, c;
/// 0 on the circle.
int incircle(const double* a, const double* b, const double* c, const double* d);

/// Sign of (a - c) . (b - c): negative exactly when c lies strictly inside
/// the circle with diameter ab.
int diametral(const double* a, const double* b, const double* c);

}  // namespace fracdim::predicates
