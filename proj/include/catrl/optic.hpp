#pragma once

// Lenses, stochastic mixed optics, and the continuation functor K.
//
// A Lens (X/X') -> (Y/Y') is a pair get : X -> Y, put : X × Y' -> X'.
// A StochOptic carries an explicit residual M: its forward pass is a Kleisli
// map X -> D(M × Y) and its backward pass (D(M), Y') -> X' lands in a convex
// space. Optics are never compared directly; equality is always checked
// extensionally through K, which sends an optic and a continuation k : Y -> Y'
// to a function X -> X'.

#include <functional>
#include <utility>

#include "catrl/dist.hpp"

namespace catrl::optic {

template <class X, class Xp, class Y, class Yp>
struct Lens {
  std::function<Y(const X&)> get;
  std::function<Xp(const X&, const Yp&)> put;
};

template <class X, class Xp>
Lens<X, Xp, X, Xp> identity_lens() {
  return {[](const X& x) { return x; }, [](const X&, const Xp& xp) { return xp; }};
}

template <class X, class Xp, class Y, class Yp, class Z, class Zp>
Lens<X, Xp, Z, Zp> compose(Lens<X, Xp, Y, Yp> first, Lens<Y, Yp, Z, Zp> second) {
  return {[f = first.get, g = second.get](const X& x) { return g(f(x)); },
          [first, second](const X& x, const Zp& zp) {
            return first.put(x, second.put(first.get(x), zp));
          }};
}

// K on lenses: x ↦ put(x, k(get(x))).
template <class X, class Xp, class Y, class Yp, class K>
std::function<Xp(const X&)> apply_continuation(Lens<X, Xp, Y, Yp> lens, K k) {
  return [lens = std::move(lens), k = std::move(k)](const X& x) {
    return lens.put(x, k(lens.get(x)));
  };
}

// Pairwise monoidal product.
template <class X1, class X1p, class Y1, class Y1p, class X2, class X2p, class Y2,
          class Y2p>
Lens<std::pair<X1, X2>, std::pair<X1p, X2p>, std::pair<Y1, Y2>,
     std::pair<Y1p, Y2p>>
tensor(Lens<X1, X1p, Y1, Y1p> l1, Lens<X2, X2p, Y2, Y2p> l2) {
  return {[g1 = l1.get, g2 = l2.get](const std::pair<X1, X2>& x) {
            return std::pair<Y1, Y2>{g1(x.first), g2(x.second)};
          },
          [p1 = l1.put, p2 = l2.put](const std::pair<X1, X2>& x,
                                     const std::pair<Y1p, Y2p>& yp) {
            return std::pair<X1p, X2p>{p1(x.first, yp.first),
                                       p2(x.second, yp.second)};
          }};
}

template <class M, class X, class Xp, class Y, class Yp>
struct StochOptic {
  using Residual = M;
  std::function<FiniteDist<std::pair<M, Y>>(const X&)> forward;
  std::function<Xp(const FiniteDist<M>&, const Yp&)> backward;
};

template <class X, class Xp>
StochOptic<Unit, X, Xp, X, Xp> identity_optic() {
  return {[](const X& x) { return dirac(std::pair<Unit, X>{Unit{}, x}); },
          [](const FiniteDist<Unit>&, const Xp& xp) { return xp; }};
}

// A lens viewed as a stochastic optic whose residual is the input itself.
// The backward pass averages put over the residual distribution.
template <class X, class Xp, class Y, class Yp>
  requires Convex<Xp>
StochOptic<X, X, Xp, Y, Yp> embed(Lens<X, Xp, Y, Yp> lens) {
  return {[get = lens.get](const X& x) { return dirac(std::pair<X, Y>{x, get(x)}); },
          [put = lens.put](const FiniteDist<X>& d, const Yp& yp) {
            return expect(d, [&](const X& x) { return put(x, yp); });
          }};
}

// Sequential composition with residual M1 × M2.
//
// Backward: disintegrate the joint residual into the marginal over M1 and the
// conditionals over M2, run the second backward pass per branch, and take the
// convex combination of the first backward pass over the branches. For
// backward passes affine in Y' (every Bellman optic) this agrees with feeding
// the averaged Y' through the first backward pass.
template <class M1, class M2, class X, class Xp, class Y, class Yp, class Z, class Zp>
  requires Convex<Xp>
StochOptic<std::pair<M1, M2>, X, Xp, Z, Zp> compose(StochOptic<M1, X, Xp, Y, Yp> first,
                                                    StochOptic<M2, Y, Yp, Z, Zp> second) {
  using M = std::pair<M1, M2>;
  auto forward = [f = first.forward, g = second.forward](const X& x) {
    return catrl::bind(f(x), [&g](const std::pair<M1, Y>& my) {
      return pushforward(g(my.second), [&my](const std::pair<M2, Z>& nz) {
        return std::pair<M, Z>{M{my.first, nz.first}, nz.second};
      });
    });
  };
  auto backward = [f = first.backward, g = second.backward](const FiniteDist<M>& d,
                                                            const Zp& zp) {
    const auto split = marginal_and_condition(d);
    return expect(split.marginal, [&](const M1& m1) {
      return f(dirac(m1), g(split.conditional(m1), zp));
    });
  };
  return {std::move(forward), std::move(backward)};
}

// K on stochastic optics: x ↦ backward(marginal of forward(x), 𝔼[k(y)]),
// the expectation taken in the convex space Y'.
template <class M, class X, class Xp, class Y, class Yp, class K>
  requires Convex<Yp>
std::function<Xp(const X&)> apply_continuation(StochOptic<M, X, Xp, Y, Yp> optic, K k) {
  return [optic = std::move(optic), k = std::move(k)](const X& x) {
    const auto joint = optic.forward(x);
    const auto residual =
        pushforward(joint, [](const std::pair<M, Y>& my) { return my.first; });
    const Yp average =
        expect(joint, [&](const std::pair<M, Y>& my) -> Yp { return k(my.second); });
    return optic.backward(residual, average);
  };
}

// The pointwise reading Σ p(m, y)·backward(δₘ, k(y)); equal to
// apply_continuation whenever the backward pass is affine.
template <class M, class X, class Xp, class Y, class Yp, class K>
  requires Convex<Xp>
std::function<Xp(const X&)> apply_continuation_pointwise(StochOptic<M, X, Xp, Y, Yp> optic,
                                                         K k) {
  return [optic = std::move(optic), k = std::move(k)](const X& x) {
    return expect(optic.forward(x), [&](const std::pair<M, Y>& my) -> Xp {
      return optic.backward(dirac(my.first), k(my.second));
    });
  };
}

}  // namespace catrl::optic
