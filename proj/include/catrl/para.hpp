#pragma once

// Externally parametrised lenses, Para_Set(Lens), and the lifted continuation
// functor. A ParaLens (X/X') -> (Y/Y') with parameter P has passes
//   forward  : P × X -> Y
//   backward : P × X × Y' -> X'
// Parameters compose by pairing: running f then g has parameter (q, p).

#include <functional>
#include <utility>

#include "catrl/optic.hpp"

namespace catrl::para {

template <class P, class X, class Xp, class Y, class Yp>
struct ParaLens {
  std::function<Y(const P&, const X&)> forward;
  std::function<Xp(const P&, const X&, const Yp&)> backward;
};

template <class P, class A, class B>
struct ParaFn {
  std::function<B(const P&, const A&)> apply;
  B operator()(const P& p, const A& a) const { return apply(p, a); }
};

// A plain lens with the singleton parameter.
template <class X, class Xp, class Y, class Yp>
ParaLens<Unit, X, Xp, Y, Yp> trivially_parametrised(optic::Lens<X, Xp, Y, Yp> lens) {
  return {[get = lens.get](const Unit&, const X& x) { return get(x); },
          [put = lens.put](const Unit&, const X& x, const Yp& yp) { return put(x, yp); }};
}

template <class P, class X, class Xp, class Y, class Yp>
optic::Lens<X, Xp, Y, Yp> freeze(ParaLens<P, X, Xp, Y, Yp> f, P p) {
  return {[fwd = f.forward, p](const X& x) { return fwd(p, x); },
          [bwd = f.backward, p](const X& x, const Yp& yp) { return bwd(p, x, yp); }};
}

template <class P, class Q, class X, class Xp, class Y, class Yp, class Z, class Zp>
ParaLens<std::pair<Q, P>, X, Xp, Z, Zp> para_compose(ParaLens<P, X, Xp, Y, Yp> f,
                                                     ParaLens<Q, Y, Yp, Z, Zp> g) {
  using QP = std::pair<Q, P>;
  return {[ff = f.forward, gf = g.forward](const QP& qp, const X& x) {
            return gf(qp.first, ff(qp.second, x));
          },
          [f, gb = g.backward](const QP& qp, const X& x, const Zp& zp) {
            return f.backward(qp.second, x, gb(qp.first, f.forward(qp.second, x), zp));
          }};
}

// Precompose the parameter with h : Q -> P (a 2-cell of Para).
template <class Q, class P, class X, class Xp, class Y, class Yp, class H>
ParaLens<Q, X, Xp, Y, Yp> reparametrise(ParaLens<P, X, Xp, Y, Yp> f, H h) {
  return {[fwd = f.forward, h](const Q& q, const X& x) { return fwd(h(q), x); },
          [bwd = f.backward, h](const Q& q, const X& x, const Yp& yp) {
            return bwd(h(q), x, yp);
          }};
}

// Para_Set(K): (p, x, k) ↦ backward(p, x, k(forward(p, x))).
template <class P, class X, class Xp, class Y, class Yp>
class ParaContinuation {
 public:
  explicit ParaContinuation(ParaLens<P, X, Xp, Y, Yp> lens) : lens_(std::move(lens)) {}

  template <class K>
  Xp operator()(const P& p, const X& x, const K& k) const {
    return lens_.backward(p, x, k(lens_.forward(p, x)));
  }

  // Fixes the continuation, leaving a parametrised function of X.
  template <class K>
  ParaFn<P, X, Xp> with(K k) const {
    return {[lens = lens_, k = std::move(k)](const P& p, const X& x) {
      return lens.backward(p, x, k(lens.forward(p, x)));
    }};
  }

 private:
  ParaLens<P, X, Xp, Y, Yp> lens_;
};

template <class P, class X, class Xp, class Y, class Yp>
ParaContinuation<P, X, Xp, Y, Yp> para_K(ParaLens<P, X, Xp, Y, Yp> f) {
  return ParaContinuation<P, X, Xp, Y, Yp>(std::move(f));
}

}  // namespace catrl::para
