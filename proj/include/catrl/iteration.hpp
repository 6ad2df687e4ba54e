#pragma once

// The iteration functor I and the closed loops built on it.
//
// An element of I(X/X') is a state space M, an initial state drawn from
// D(M × X), and an iterator M × X' -> M × X. Optics act on these by pushing
// the emitted X through the forward pass and pulling X' back through the
// backward pass. Streams are realized as finite prefixes; stochastic
// iterators thread an explicit RngState.

#include <cstddef>
#include <functional>
#include <type_traits>
#include <utility>
#include <vector>

#include "catrl/dist.hpp"
#include "catrl/optic.hpp"
#include "catrl/para.hpp"
#include "catrl/rng.hpp"

namespace catrl::iteration {

template <class S, class O>
struct Emit {
  S state;
  O out;
  RngState rng;
};

template <class M, class X, class Xp>
struct IterationData {
  using State = M;
  FiniteDist<std::pair<M, X>> initial;
  std::function<Emit<M, X>(const M&, const Xp&, RngState)> iterator;
};

// A unit-state iteration with a constant initial state and a deterministic
// step function.
template <class X, class Xp, class F>
IterationData<Unit, X, Xp> stateless(X x0, F step) {
  return {dirac(std::pair<Unit, X>{Unit{}, std::move(x0)}),
          [step = std::move(step)](const Unit&, const Xp& xp, RngState rng) {
            return Emit<Unit, X>{Unit{}, step(xp), rng};
          }};
}

// I(f) for a lens: the lens residual (its input) joins the state space.
template <class M, class X, class Xp, class Y, class Yp>
IterationData<std::pair<M, X>, Y, Yp> iter_map(const optic::Lens<X, Xp, Y, Yp>& f,
                                               const IterationData<M, X, Xp>& it) {
  using S = std::pair<M, X>;
  auto initial = pushforward(it.initial, [get = f.get](const std::pair<M, X>& mx) {
    return std::pair<S, Y>{mx, get(mx.second)};
  });
  auto iterator = [f, step = it.iterator](const S& s, const Yp& yp, RngState rng) {
    const Xp xp = f.put(s.second, yp);
    auto next = step(s.first, xp, rng);
    Y y = f.get(next.out);
    return Emit<S, Y>{S{std::move(next.state), std::move(next.out)}, std::move(y),
                      next.rng};
  };
  return {std::move(initial), std::move(iterator)};
}

// I(f) for a stochastic optic. After the wrapped iterator runs, the forward
// pass is sampled with one further draw.
template <class M, class N, class X, class Xp, class Y, class Yp>
IterationData<std::pair<M, N>, Y, Yp> iter_map(const optic::StochOptic<N, X, Xp, Y, Yp>& f,
                                               const IterationData<M, X, Xp>& it) {
  using S = std::pair<M, N>;
  auto initial = catrl::bind(it.initial, [fwd = f.forward](const std::pair<M, X>& mx) {
    return pushforward(fwd(mx.second), [&mx](const std::pair<N, Y>& ny) {
      return std::pair<S, Y>{S{mx.first, ny.first}, ny.second};
    });
  });
  auto iterator = [f, step = it.iterator](const S& s, const Yp& yp, RngState rng) {
    const Xp xp = f.backward(dirac(s.second), yp);
    auto next = step(s.first, xp, rng);
    auto [ny, after] = sample(f.forward(next.out), next.rng);
    return Emit<S, Y>{S{std::move(next.state), std::move(ny.first)}, std::move(ny.second),
                      after};
  };
  return {std::move(initial), std::move(iterator)};
}

// ⟨k | it⟩ truncated to n elements: x₀, then xₜ₊₁ from iterator(mₜ, k(xₜ)).
// The initial state costs one draw when n > 0.
template <class M, class X, class Xp, class K>
std::vector<X> run_stream(const K& k, const IterationData<M, X, Xp>& it, std::size_t n,
                          RngState rng) {
  std::vector<X> out;
  if (n == 0) return out;
  out.reserve(n);
  auto [mx, r] = sample(it.initial, rng);
  M m = std::move(mx.first);
  out.push_back(std::move(mx.second));
  for (std::size_t t = 1; t < n; ++t) {
    auto next = it.iterator(m, k(out.back()), r);
    m = std::move(next.state);
    r = next.rng;
    out.push_back(std::move(next.out));
  }
  return out;
}

// ∇ : I(X/X') × I(Y/Y') -> I(X⊗Y / X'⊗Y'). The first iterator draws first.
template <class M1, class X1, class X1p, class M2, class X2, class X2p>
IterationData<std::pair<M1, M2>, std::pair<X1, X2>, std::pair<X1p, X2p>> laxator(
    const IterationData<M1, X1, X1p>& it1, const IterationData<M2, X2, X2p>& it2) {
  using S = std::pair<M1, M2>;
  using X = std::pair<X1, X2>;
  auto initial = catrl::bind(it1.initial, [&it2](const std::pair<M1, X1>& a) {
    return pushforward(it2.initial, [&a](const std::pair<M2, X2>& b) {
      return std::pair<S, X>{S{a.first, b.first}, X{a.second, b.second}};
    });
  });
  auto iterator = [s1 = it1.iterator, s2 = it2.iterator](
                      const S& s, const std::pair<X1p, X2p>& xp, RngState rng) {
    auto a = s1(s.first, xp.first, rng);
    auto b = s2(s.second, xp.second, a.rng);
    return Emit<S, X>{S{std::move(a.state), std::move(b.state)},
                      X{std::move(a.out), std::move(b.out)}, b.rng};
  };
  return {std::move(initial), std::move(iterator)};
}

// An iteration context for agents (X/X') -> (Y/Y'), as a 3-hole comb:
// an initial state, a continuation answering the agent's Y with Y', and a
// step consuming the agent's X' to produce the next X.
template <class M, class Mp, class X, class Xp, class Y, class Yp>
struct EnvComb {
  FiniteDist<std::pair<M, X>> init;
  std::function<Emit<Mp, Yp>(const M&, const Y&, RngState)> continuation;
  std::function<Emit<M, X>(const Mp&, const Xp&, RngState)> step;
};

template <class X, class Y, class Yp, class Xp>
struct LoopRecord {
  X x;
  Y y;
  Yp yp;
  Xp xp;
};

// Plugs a deterministic agent into a comb. Draw order: the initial state
// (once), then per step the continuation followed by the step.
template <class M, class Mp, class X, class Xp, class Y, class Yp>
std::vector<LoopRecord<X, Y, Yp, Xp>> run_loop(const optic::Lens<X, Xp, Y, Yp>& agent,
                                               const EnvComb<M, Mp, X, Xp, Y, Yp>& env,
                                               std::size_t n, RngState rng) {
  std::vector<LoopRecord<X, Y, Yp, Xp>> trajectory;
  if (n == 0) return trajectory;
  trajectory.reserve(n);
  auto [mx, r] = sample(env.init, rng);
  M m = std::move(mx.first);
  X x = std::move(mx.second);
  for (std::size_t t = 0; t < n; ++t) {
    Y y = agent.get(x);
    auto answer = env.continuation(m, y, r);
    Xp xp = agent.put(x, answer.out);
    auto next = env.step(answer.state, xp, answer.rng);
    trajectory.push_back({std::move(x), std::move(y), std::move(answer.out), std::move(xp)});
    m = std::move(next.state);
    x = std::move(next.out);
    r = next.rng;
  }
  return trajectory;
}

template <class P, class M, class Mp, class X, class Xp, class Y, class Yp>
std::vector<LoopRecord<X, Y, Yp, Xp>> run_loop(const para::ParaLens<P, X, Xp, Y, Yp>& agent,
                                               const P& param,
                                               const EnvComb<M, Mp, X, Xp, Y, Yp>& env,
                                               std::size_t n, RngState rng) {
  return run_loop(para::freeze(agent, param), env, n, rng);
}

// An agent (X/1) -> (Y/Y') in Para(Optic) whose parameter port is (P/P'):
// the model deploys P forwards and receives the sample P' backwards.
template <class P, class Pp, class X, class Y, class Yp>
struct ParaAgent {
  std::function<std::pair<Y, RngState>(const P&, const X&, RngState)> act;
  std::function<Pp(const P&, const X&, const Y&, const Yp&)> observe;
};

template <class MM, class P, class Pp, class ME, class X, class Y, class Yp>
struct LoopStep {
  std::size_t t;
  const X& x;
  const Y& y;
  const Yp& yp;
  const Pp& sample;
  const MM& model_state;  // after the update
};

template <class MM, class P, class ME, class X>
struct LoopState {
  MM model;
  P deployed;
  ME env;
  X observation;
  LoopRngs rngs;
};

// The full model ⊗ agent ⊗ environment system, with the model already given
// as an iteration over its agent interface (I applied to the model lens).
// Per step, in order: agent acts (agent stream), environment answers
// (env stream), agent reports the sample, model iterates (model stream),
// environment steps (env stream). An observer returning bool stops the loop
// after the environment step once it returns false.
template <class MM, class P, class Pp, class ME, class MEp, class X, class Y, class Yp,
          class Observer>
LoopState<MM, P, ME, X> close_loop(const IterationData<MM, P, Pp>& model,
                                   const ParaAgent<P, Pp, X, Y, Yp>& agent,
                                   const EnvComb<ME, MEp, X, Unit, Y, Yp>& env,
                                   std::size_t steps, LoopRngs rngs, Observer&& observer) {
  auto [mp, model_rng] = sample(model.initial, rngs.model);
  auto [ex, env_rng] = sample(env.init, rngs.env);
  LoopState<MM, P, ME, X> s{std::move(mp.first), std::move(mp.second), std::move(ex.first),
                            std::move(ex.second), {model_rng, rngs.agent, env_rng}};
  for (std::size_t t = 0; t < steps; ++t) {
    auto [y, agent_rng] = agent.act(s.deployed, s.observation, s.rngs.agent);
    s.rngs.agent = agent_rng;
    auto answer = env.continuation(s.env, y, s.rngs.env);
    const Pp sample_out = agent.observe(s.deployed, s.observation, y, answer.out);
    auto updated = model.iterator(s.model, sample_out, s.rngs.model);
    s.model = std::move(updated.state);
    s.deployed = std::move(updated.out);
    s.rngs.model = updated.rng;
    const LoopStep<MM, P, Pp, ME, X, Y, Yp> record{t, s.observation, y, answer.out, sample_out,
                                                   s.model};
    bool more = true;
    if constexpr (std::is_same_v<std::invoke_result_t<Observer&, decltype(record)>, bool>) {
      more = observer(record);
    } else {
      observer(record);
    }
    auto next = env.step(answer.state, Unit{}, answer.rng);
    s.env = std::move(next.state);
    s.observation = std::move(next.out);
    s.rngs.env = next.rng;
    if (!more) break;
  }
  return s;
}

}  // namespace catrl::iteration
