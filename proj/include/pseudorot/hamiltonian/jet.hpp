#pragma once

namespace pseudorot {

// Value and gradient of a function of (x, y).
struct Jet1 {
  double v = 0, dx = 0, dy = 0;

  static Jet1 var_x(double x) { return {x, 1, 0}; }
  static Jet1 var_y(double y) { return {y, 0, 1}; }
};

inline Jet1 operator+(Jet1 a, const Jet1& b) { return {a.v + b.v, a.dx + b.dx, a.dy + b.dy}; }
inline Jet1 operator-(Jet1 a, const Jet1& b) { return {a.v - b.v, a.dx - b.dx, a.dy - b.dy}; }
inline Jet1 operator-(const Jet1& a) { return {-a.v, -a.dx, -a.dy}; }
inline Jet1 operator*(const Jet1& a, const Jet1& b) {
  return {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy};
}
inline Jet1 operator*(double s, const Jet1& a) { return {s * a.v, s * a.dx, s * a.dy}; }
inline Jet1 operator*(const Jet1& a, double s) { return s * a; }
inline Jet1 operator+(double s, const Jet1& a) { return {s + a.v, a.dx, a.dy}; }
inline Jet1 operator-(double s, const Jet1& a) { return {s - a.v, -a.dx, -a.dy}; }
inline Jet1 operator+(const Jet1& a, double s) { return s + a; }

// Value, gradient and Hessian of a function of (x, y).
struct Jet2 {
  double v = 0, dx = 0, dy = 0, dxx = 0, dxy = 0, dyy = 0;

  static Jet2 var_x(double x) { return {x, 1, 0, 0, 0, 0}; }
  static Jet2 var_y(double y) { return {y, 0, 1, 0, 0, 0}; }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) {
  return {a.v + b.v, a.dx + b.dx, a.dy + b.dy, a.dxx + b.dxx, a.dxy + b.dxy, a.dyy + b.dyy};
}
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.dx, -a.dy, -a.dxx, -a.dxy, -a.dyy}; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a + (-b); }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v,
          a.dx * b.v + a.v * b.dx,
          a.dy * b.v + a.v * b.dy,
          a.dxx * b.v + 2 * a.dx * b.dx + a.v * b.dxx,
          a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy,
          a.dyy * b.v + 2 * a.dy * b.dy + a.v * b.dyy};
}
inline Jet2 operator*(double s, const Jet2& a) {
  return {s * a.v, s * a.dx, s * a.dy, s * a.dxx, s * a.dxy, s * a.dyy};
}
inline Jet2 operator*(const Jet2& a, double s) { return s * a; }
inline Jet2 operator+(double s, Jet2 a) {
  a.v += s;
  return a;
}
inline Jet2 operator-(double s, const Jet2& a) { return s + (-a); }
inline Jet2 operator+(const Jet2& a, double s) { return s + a; }

template <class J>
J jet_var_x(double x);
template <class J>
J jet_var_y(double y);

template <>
inline double jet_var_x<double>(double x) { return x; }
template <>
inline double jet_var_y<double>(double y) { return y; }
template <>
inline Jet1 jet_var_x<Jet1>(double x) { return Jet1::var_x(x); }
template <>
inline Jet1 jet_var_y<Jet1>(double y) { return Jet1::var_y(y); }
template <>
inline Jet2 jet_var_x<Jet2>(double x) { return Jet2::var_x(x); }
template <>
inline Jet2 jet_var_y<Jet2>(double y) { return Jet2::var_y(y); }

template <class J>
J jet_pow(const J& a, int k) {
  J r = jet_var_x<J>(0.0) * 0.0 + 1.0;
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

}  // namespace pseudorot
