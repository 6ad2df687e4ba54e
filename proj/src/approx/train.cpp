#include "catrl/approx/train.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <type_traits>

#include "catrl/algorithms/model.hpp"
#include "catrl/csv.hpp"
#include "catrl/errors.hpp"

namespace catrl::approx {
namespace {

using algorithms::CurveBuilder;
using algorithms::CurveUnit;
using algorithms::StepTrace;
using algorithms::TwoCopyStep;

void check_unit_interval(double x, const std::string& field) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ConfigError(field + " must lie in [0, 1], got " + format_number(x));
  }
}

void check_common(double gamma, int max_episode_length, double init_scale,
                  const algorithms::Budget& budget) {
  check_unit_interval(gamma, "gamma");
  if (max_episode_length < 0) throw ConfigError("max_episode_length must be >= 0");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ConfigError("init_scale must be >= 0, got " + format_number(init_scale));
  }
  budget.validate();
}

// Plain SGD: θ ← θ + Δθ.
template <class Theta, class Delta>
algorithms::UpdateRule<Unit, Theta, Delta> sgd_rule(Theta init) {
  return {Unit{}, std::move(init), [](const Unit&, const Theta& theta, const Delta& d) {
            if constexpr (std::is_same_v<Theta, ParamVector>) {
              return std::pair{Unit{}, theta.plus(d)};
            } else {
              return std::pair{Unit{}, Theta{theta.first.plus(d.first),
                                             theta.second.plus(d.second)}};
            }
          }};
}

}  // namespace

void ApproxParams::validate() const {
  check_unit_interval(alpha, "alpha");
  check_unit_interval(epsilon, "epsilon");
  check_common(gamma, max_episode_length, init_scale, budget);
}

void ActorCriticParams::validate() const {
  check_unit_interval(alpha_actor, "alpha_actor");
  check_unit_interval(alpha_critic, "alpha_critic");
  check_common(gamma, max_episode_length, init_scale, budget);
}

ApproxReport dqn_train(const Mdp& mdp, const QNetwork& net, const ApproxParams& p,
                       const algorithms::StepObserver& observe) {
  p.validate();
  if (net.num_states() != mdp.num_states() || net.num_actions() != mdp.num_actions()) {
    throw ConfigError("network shape does not match the environment");
  }
  const algorithms::ModelLens<ParamVector, std::vector<double>, SarsaSample> model{
      [&net, eps = p.epsilon](const ParamVector& theta) {
        return Policy(Policy::EpsilonGreedy{net.table(theta), eps});
      },
      [&net, &p](const ParamVector& theta, const SarsaSample& x) {
        return semi_gradient_delta(net, theta, x, p.alpha, p.gamma, p.rule, p.epsilon);
      }};
  const ParamVector theta0 = net.init(p.seed, p.init_scale);
  const auto it = algorithms::model_iteration(
      model, sgd_rule<ParamVector, std::vector<double>>(theta0));
  const bool two_copy = p.rule == TargetRule::kSarsa;

  CurveBuilder curve(CurveUnit::kEpisode, net.table(theta0));
  const auto final_state = algorithms::run_loop_2(
      it, mdp_to_comb(mdp, EpisodeMode{p.max_episode_length}), algorithms::act_on_policy,
      two_copy, LoopRngs::from_seed(p.seed),
      [two_copy](const TwoCopyStep& x) {
        return std::vector<SarsaSample>{SarsaSample{x.s, x.a, x.f.reward, x.f.next,
                                                    two_copy ? x.next_action : -1,
                                                    x.f.terminal}};
      },
      [&](std::size_t t, const TwoCopyStep& x, const auto& state) {
        const QTable q = net.table(algorithms::parameters(state));
        curve.record(x.f.reward, x.f.episode_end, q);
        if (observe) {
          Action target = -1;
          if (two_copy) target = x.next_action;
          observe(StepTrace{t, x.s, x.a, x.f.reward, x.f.next, x.f.episode_end, target, q});
        }
        return !p.budget.reached(curve.episodes(), curve.steps());
      });
  const ParamVector& theta = algorithms::parameters(final_state);
  return {{CurveUnit::kEpisode, curve.take(), net.table(theta), curve.steps(), p.seed},
          theta,
          std::nullopt};
}

ApproxReport actor_critic_train(const Mdp& mdp, const ActorCritic& ac,
                                const ActorCriticParams& p,
                                const algorithms::StepObserver& observe) {
  p.validate();
  ac.check();
  if (ac.actor.num_states() != mdp.num_states() ||
      ac.actor.num_actions() != mdp.num_actions()) {
    throw ConfigError("actor shape does not match the environment");
  }
  using Theta = std::pair<ParamVector, ParamVector>;
  using Delta = std::pair<std::vector<double>, std::vector<double>>;
  const algorithms::ModelLens<Theta, Delta, Transition> model{
      [&ac](const Theta& params) {
        return Policy(Policy::Softmax{ac.actor.table(params.first), ac.temperature});
      },
      [&ac, &p](const Theta& params, const Transition& t) {
        return actor_critic_delta(ac, params.first, params.second, t, p.alpha_actor,
                                  p.alpha_critic, p.gamma);
      }};
  // The critic is initialized from seed + 1.
  const ParamVector theta0 = ac.actor.init(p.seed, p.init_scale);
  const ParamVector omega0 = ac.critic.init(p.seed + 1, p.init_scale);
  const auto it = algorithms::model_iteration(model, sgd_rule<Theta, Delta>({theta0, omega0}));

  CurveBuilder curve(CurveUnit::kEpisode, ac.actor.table(theta0));
  const auto final_state = algorithms::run_loop_2(
      it, mdp_to_comb(mdp, EpisodeMode{p.max_episode_length}), algorithms::act_on_policy, false,
      LoopRngs::from_seed(p.seed),
      [](const TwoCopyStep& x) {
        return std::vector<Transition>{
            Transition{x.s, x.a, x.f.reward, x.f.next, x.f.terminal}};
      },
      [&](std::size_t t, const TwoCopyStep& x, const auto& state) {
        const QTable logits = ac.actor.table(algorithms::parameters(state).first);
        curve.record(x.f.reward, x.f.episode_end, logits);
        if (observe) {
          observe(StepTrace{t, x.s, x.a, x.f.reward, x.f.next, x.f.episode_end, -1, logits});
        }
        return !p.budget.reached(curve.episodes(), curve.steps());
      });
  const Theta& params = algorithms::parameters(final_state);
  return {{CurveUnit::kEpisode, curve.take(), ac.actor.table(params.first), curve.steps(),
           p.seed},
          params.first,
          params.second};
}

void write_params_csv(std::ostream& out, const ParamVector& theta) {
  out << "block,index,value\n";
  for (const Block& b : theta.layout()) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      out << b.name << ',' << i << ',' << format_number(theta.values()[b.offset + i]) << '\n';
    }
  }
}

}  // namespace catrl::approx
