// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reliakit/detail/random.hpp"
#include "reliakit/error.hpp"
#include "reliakit/evaluator.hpp"
#include "reliakit/metrics.hpp"

namespace reliakit {

/// Three-level outcome reward. The ordering r_c > r_s > r_w is checked at
/// construction; the only way to get r_s == r_w is the named ablation.
class RewardSpec {
 public:
  RewardSpec() : RewardSpec(1.0, -0.5, -1.0) {}

  RewardSpec(double r_c, double r_s, double r_w, RefusalLexicon lexicon = {})
      : r_c_(r_c), r_s_(r_s), r_w_(r_w), lexicon_(std::move(lexicon)) {
    if (!std::isfinite(r_c) || !std::isfinite(r_s) || !std::isfinite(r_w)) {
      throw ArgumentError("rewards must be finite");
    }
    if (!(r_c > r_s && r_s > r_w)) {
      throw ArgumentError("rewards must satisfy r_c > r_s > r_w (got " +
                          fixed(r_c) + ", " + fixed(r_s) + ", " + fixed(r_w) +
                          ")");
    }
  }

  /// Refusals earn the same as wrong answers.
  static RewardSpec without_rejection_reward(double r_c = 1.0,
                                             double r_w = -1.0,
                                             RefusalLexicon lexicon = {}) {
    if (!(r_c > r_w)) throw ArgumentError("rewards must satisfy r_c > r_w");
    RewardSpec s(r_c, (r_c + r_w) / 2, r_w, std::move(lexicon));
    s.r_s_ = r_w;
    s.ablation_ = true;
    return s;
  }

  double r_c() const { return r_c_; }
  double r_s() const { return r_s_; }
  double r_w() const { return r_w_; }
  bool ablation() const { return ablation_; }
  const RefusalLexicon& lexicon() const { return lexicon_; }

  double operator()(VerdictKind k) const {
    switch (k) {
      case VerdictKind::Correct:
        return r_c_;
      case VerdictKind::Refusal:
        return r_s_;
      case VerdictKind::Wrong:
        return r_w_;
    }
    return r_w_;
  }

  /// Competence at which attempting and refusing have equal expected reward.
  double indifference_point() const { return (r_s_ - r_w_) / (r_c_ - r_w_); }

 private:
  double r_c_, r_s_, r_w_;
  RefusalLexicon lexicon_;
  bool ablation_ = false;
};

inline double reward(const Verdict& v, const RewardSpec& spec) {
  return spec(v.kind);
}

inline double reward(const ModelResponse& response,
                     const std::vector<std::string>& gold_answers,
                     const RewardSpec& spec) {
  return spec(judge(response, gold_answers, spec.lexicon()).kind);
}

enum class AdvantageNormalization {
  GroupStd,       // (r - mean) / std, the GRPO form
  GroupMeanOnly,  // r - mean; an unbiased expected-reward gradient
};

inline std::string_view to_string(AdvantageNormalization n) {
  return n == AdvantageNormalization::GroupStd ? "group_std" : "group_mean";
}

inline AdvantageNormalization normalization_from_string(std::string_view s) {
  if (s == "group_std") return AdvantageNormalization::GroupStd;
  if (s == "group_mean") return AdvantageNormalization::GroupMeanOnly;
  throw ArgumentError("unknown advantage normalization '" + std::string(s) +
                      "'");
}

inline constexpr double kDegenerateStd = 1e-8;

/// Group-relative advantages with population (1/G) variance. Groups whose
/// rewards are all equal get zero advantage.
inline std::vector<double> group_advantages(
    const std::vector<double>& rewards,
    AdvantageNormalization mode = AdvantageNormalization::GroupStd) {
  if (rewards.empty()) throw ArgumentError("group is empty");
  const double g = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= g;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / g);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < kDegenerateStd) return out;
  const double scale = mode == AdvantageNormalization::GroupStd ? sd : 1.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = (rewards[i] - mean) / scale;
  }
  return out;
}

inline double clip(double rho, double eps) {
  return std::clamp(rho, 1.0 - eps, 1.0 + eps);
}

inline double clipped_surrogate(double rho, double advantage, double eps) {
  if (!(rho > 0.0)) throw DomainError("importance ratio must be positive");
  if (!(eps > 0.0)) throw ArgumentError("clip epsilon must be positive");
  return std::min(rho * advantage, clip(rho, eps) * advantage);
}

/// Low-variance KL estimator r - 1 - ln r with r = p_reference / p_current.
inline double kl_penalty(double p_current, double p_reference) {
  auto ok = [](double p) { return p > 0.0 && p <= 1.0; };
  if (!ok(p_current) || !ok(p_reference)) {
    throw DomainError("kl_penalty needs probabilities in (0, 1]");
  }
  const double r = p_reference / p_current;
  return r - 1.0 - std::log(r);
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw ArgumentError("softmax of nothing");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

/// One sampled group for a single-step policy: action indices and their
/// advantages, evaluated against the behaviour (old) and reference logits.
struct GroupBatch {
  std::vector<std::size_t> actions;
  std::vector<double> advantages;
};

struct ObjectiveTerms {
  double clip_epsilon = 0.2;
  double kl_coefficient = 0.001;
};

/// mean_j [ min(rho_j A_j, clip(rho_j) A_j) - beta * kl_j ]
inline double surrogate_objective(const std::vector<double>& theta,
                                  const std::vector<double>& old_logits,
                                  const std::vector<double>& ref_logits,
                                  const GroupBatch& batch,
                                  const ObjectiveTerms& terms) {
  const auto pi = softmax(theta);
  const auto pi_old = softmax(old_logits);
  const auto pi_ref = softmax(ref_logits);
  double total = 0.0;
  for (std::size_t j = 0; j < batch.actions.size(); ++j) {
    const std::size_t a = batch.actions[j];
    const double rho = pi[a] / pi_old[a];
    total += clipped_surrogate(rho, batch.advantages[j], terms.clip_epsilon) -
             terms.kl_coefficient * kl_penalty(pi[a], pi_ref[a]);
  }
  return total / static_cast<double>(batch.actions.size());
}

/// Analytic gradient of surrogate_objective with respect to theta.
inline std::vector<double> surrogate_gradient(
    const std::vector<double>& theta, const std::vector<double>& old_logits,
    const std::vector<double>& ref_logits, const GroupBatch& batch,
    const ObjectiveTerms& terms) {
  const auto pi = softmax(theta);
  const auto pi_old = softmax(old_logits);
  const auto pi_ref = softmax(ref_logits);
  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t j = 0; j < batch.actions.size(); ++j) {
    const std::size_t a = batch.actions[j];
    const double adv = batch.advantages[j];
    const double rho = pi[a] / pi_old[a];
    // Coefficient multiplying d log pi(a) / d theta_b = 1[a=b] - pi_b.
    double coef = 0.0;
    if (rho * adv <= clip(rho, terms.clip_epsilon) * adv) coef += adv * rho;
    const double r = pi_ref[a] / pi[a];
    coef += terms.kl_coefficient * (r - 1.0);
    for (std::size_t b = 0; b < theta.size(); ++b) {
      grad[b] += coef * ((a == b ? 1.0 : 0.0) - pi[b]);
    }
  }
  for (double& g : grad) g /= static_cast<double>(batch.actions.size());
  return grad;
}

// ---------------------------------------------------------------- simulator

enum class Action : std::size_t { Attempt = 0, Refuse = 1 };
inline constexpr std::size_t kActionCount = 2;

struct SimQuestion {
  std::string cls;
  double p = 0.0;  // chance an attempt is correct
};

struct SimEnvironment {
  std::vector<SimQuestion> questions;

  void validate() const {
    if (questions.empty()) throw ArgumentError("environment has no questions");
    for (const auto& q : questions) {
      if (!(q.p >= 0.0 && q.p <= 1.0)) {
        throw ArgumentError("competence must lie in [0, 1]");
      }
    }
  }

  /// Class names in order of first appearance.
  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    for (const auto& q : questions) {
      if (std::find(out.begin(), out.end(), q.cls) == out.end()) {
        out.push_back(q.cls);
      }
    }
    return out;
  }

  void add_class(const std::string& cls, double p, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) questions.push_back({cls, p});
  }
};

struct WarmStart {
  double refusal_bonus = 0.0;  // 0: cold start
  double competence_cutoff = 0.5;
};

struct GrpoConfig {
  std::size_t group_size = 8;
  double clip_epsilon = 0.2;
  double kl_coefficient = 0.001;
  double learning_rate = 0.1;
  std::size_t epochs = 2000;
  std::size_t inner_steps = 4;     // optimizer steps per sampled batch
  double max_grad_norm = 1.0;      // per-class clip; 0 disables
  std::size_t reference_refresh = 0;  // epochs between reference resets; 0: never
  std::size_t trace_every = 1;
  AdvantageNormalization normalization = AdvantageNormalization::GroupStd;
  WarmStart warm_start;

  void validate() const {
    if (group_size < 2) throw ArgumentError("group size must be at least 2");
    if (!(clip_epsilon > 0.0)) throw ArgumentError("clip epsilon must be > 0");
    if (!(kl_coefficient >= 0.0)) throw ArgumentError("KL coefficient must be >= 0");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be > 0");
    if (inner_steps == 0) throw ArgumentError("inner steps must be positive");
    if (!(max_grad_norm >= 0.0)) throw ArgumentError("max grad norm must be >= 0");
    if (trace_every == 0) throw ArgumentError("trace interval must be positive");
  }
};

struct PolicyState {
  std::vector<std::string> classes;
  std::vector<std::vector<double>> logits;
  std::vector<std::vector<double>> reference;

  std::size_t index_of(std::string_view cls) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == cls) return i;
    }
    throw ArgumentError("unknown class '" + std::string(cls) + "'");
  }

  double refusal_rate(std::size_t c) const {
    return softmax(logits[c])[static_cast<std::size_t>(Action::Refuse)];
  }
  double refusal_rate(std::string_view cls) const {
    return refusal_rate(index_of(cls));
  }
  double reference_refusal_rate(std::size_t c) const {
    return softmax(reference[c])[static_cast<std::size_t>(Action::Refuse)];
  }
};

inline PolicyState initial_policy(const SimEnvironment& env,
                                  const WarmStart& warm) {
  PolicyState s;
  s.classes = env.classes();
  for (const auto& cls : s.classes) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& q : env.questions) {
      if (q.cls == cls) {
        sum += q.p;
        ++n;
      }
    }
    std::vector<double> l(kActionCount, 0.0);
    if (sum / static_cast<double>(n) < warm.competence_cutoff) {
      l[static_cast<std::size_t>(Action::Refuse)] = warm.refusal_bonus;
    }
    s.logits.push_back(l);
  }
  s.reference = s.logits;
  return s;
}

struct TraceRow {
  std::size_t epoch = 0;
  std::string cls;
  double attempt_rate = 0.0;  // policy that sampled this epoch
  double refusal_rate = 0.0;
  double mean_reward = 0.0;   // realised mean over the epoch's samples
};

struct SimResult {
  std::vector<TraceRow> trace;
  PolicyState final_state;
};

/// Desk-scale GRPO on a one-step attempt/refuse policy with shared logits per
/// question class. Each epoch samples a group per question from the frozen
/// old policy, normalizes rewards within the group, then takes
/// `inner_steps` clipped-surrogate ascent steps per class.
inline SimResult simulate_grpo(const SimEnvironment& env,
                               const RewardSpec& spec,
                               const GrpoConfig& config, std::uint64_t seed) {
  env.validate();
  config.validate();
  SimResult result;
  PolicyState& state = result.final_state;
  state = initial_policy(env, config.warm_start);
  const std::size_t n_classes = state.classes.size();

  std::vector<std::size_t> class_of(env.questions.size());
  std::vector<std::size_t> class_size(n_classes, 0);
  for (std::size_t q = 0; q < env.questions.size(); ++q) {
    class_of[q] = state.index_of(env.questions[q].cls);
    ++class_size[class_of[q]];
  }
  const ObjectiveTerms terms{config.clip_epsilon, config.kl_coefficient};

  std::vector<GroupBatch> batches(env.questions.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto old_logits = state.logits;
    std::vector<double> reward_sum(n_classes, 0.0);

    for (std::size_t q = 0; q < env.questions.size(); ++q) {
      const std::size_t c = class_of[q];
      const double p_refuse = softmax(old_logits[c])[1];
      detail::Rng rng(detail::mix_seed(seed, epoch, q));
      GroupBatch& batch = batches[q];
      batch.actions.assign(config.group_size, 0);
      std::vector<double> rewards(config.group_size);
      for (std::size_t j = 0; j < config.group_size; ++j) {
        const bool refuse = rng.uniform() < p_refuse;
        batch.actions[j] = static_cast<std::size_t>(refuse ? Action::Refuse
                                                           : Action::Attempt);
        VerdictKind outcome = VerdictKind::Refusal;
        if (!refuse) {
          outcome = rng.uniform() < env.questions[q].p ? VerdictKind::Correct
                                                       : VerdictKind::Wrong;
        }
        rewards[j] = spec(outcome);
        reward_sum[c] += rewards[j];
      }
      batch.advantages = group_advantages(rewards, config.normalization);
    }

    if ((epoch - 1) % config.trace_every == 0 || epoch == config.epochs) {
      for (std::size_t c = 0; c < n_classes; ++c) {
        const auto pi = softmax(old_logits[c]);
        result.trace.push_back(
            {epoch, state.classes[c], pi[0], pi[1],
             reward_sum[c] / static_cast<double>(class_size[c] *
                                                 config.group_size)});
      }
    }

    for (std::size_t step = 0; step < config.inner_steps; ++step) {
      std::vector<std::vector<double>> grad(
          n_classes, std::vector<double>(kActionCount, 0.0));
      for (std::size_t q = 0; q < env.questions.size(); ++q) {
        const std::size_t c = class_of[q];
        const auto g = surrogate_gradient(state.logits[c], old_logits[c],
                                          state.reference[c], batches[q], terms);
        for (std::size_t b = 0; b < kActionCount; ++b) grad[c][b] += g[b];
      }
      for (std::size_t c = 0; c < n_classes; ++c) {
        double norm = 0.0;
        for (double& g : grad[c]) {
          g /= static_cast<double>(class_size[c]);
          norm += g * g;
        }
        norm = std::sqrt(norm);
        const double scale =
            config.max_grad_norm > 0.0 && norm > config.max_grad_norm
                ? config.max_grad_norm / norm
                : 1.0;
        for (std::size_t b = 0; b < kActionCount; ++b) {
          state.logits[c][b] += config.learning_rate * scale * grad[c][b];
        }
      }
    }

    if (config.reference_refresh != 0 && epoch % config.reference_refresh == 0) {
      state.reference = state.logits;
    }
  }
  return result;
}

/// Outcome distribution the policy induces on the environment, per class.
inline std::map<std::string, ExpectedTally> expected_tallies(
    const SimEnvironment& env, const PolicyState& state) {
  std::map<std::string, ExpectedTally> out;
  for (const auto& q : env.questions) {
    const double refuse = state.refusal_rate(q.cls);
    auto& t = out[q.cls];
    t.n_refusal += refuse;
    t.n_correct += (1.0 - refuse) * q.p;
    t.n_wrong += (1.0 - refuse) * (1.0 - q.p);
  }
  return out;
}

inline ExpectedTally expected_tally(const SimEnvironment& env,
                                    const PolicyState& state) {
  ExpectedTally total;
  for (const auto& [cls, t] : expected_tallies(env, state)) total += t;
  return total;
}

struct RewardSweepRow {
  double r_s = 0.0;
  bool ablation = false;
  MetricReport metrics;
  std::map<std::string, double> class_abstain;
};

/// One simulation per r_s value. r_s equal to r_w runs the no-rejection-reward
/// ablation; any other value must respect the reward ordering.
inline std::vector<RewardSweepRow> reward_sweep(
    const SimEnvironment& env, const std::vector<double>& r_s_grid,
    const GrpoConfig& config, std::uint64_t seed, double r_c = 1.0,
    double r_w = -1.0, const RefusalLexicon& lexicon = {}) {
  if (r_s_grid.empty()) throw ArgumentError("reward grid is empty");
  std::vector<RewardSweepRow> rows;
  for (double r_s : r_s_grid) {
    const RewardSpec spec = r_s == r_w
                                ? RewardSpec::without_rejection_reward(r_c, r_w, lexicon)
                                : RewardSpec(r_c, r_s, r_w, lexicon);
    const auto sim = simulate_grpo(env, spec, config, seed);
    RewardSweepRow row;
    row.r_s = r_s;
    row.ablation = spec.ablation();
    row.metrics = reliability(expected_tally(env, sim.final_state));
    for (const auto& [cls, t] : expected_tallies(env, sim.final_state)) {
      row.class_abstain[cls] = t.n_refusal / t.total();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct BoundaryScan {
  std::vector<std::pair<double, double>> points;  // (p, final refusal rate)
  std::optional<double> boundary;  // p where refusal falls through 0.5
};

/// Trains single-class environments across a competence grid and locates
/// where the converged policy switches from refusing to attempting.
inline BoundaryScan scan_decision_boundary(const RewardSpec& spec,
                                           const GrpoConfig& config,
                                           const std::vector<double>& p_grid,
                                           std::uint64_t seed,
                                           std::size_t questions = 16) {
  BoundaryScan scan;
  for (double p : p_grid) {
    SimEnvironment env;
    env.add_class("single", p, questions);
    const auto sim = simulate_grpo(env, spec, config, seed);
    scan.points.emplace_back(p, sim.final_state.refusal_rate(0));
  }
  for (std::size_t i = 1; i < scan.points.size(); ++i) {
    const auto [p0, r0] = scan.points[i - 1];
    const auto [p1, r1] = scan.points[i];
    if (r0 >= 0.5 && r1 < 0.5) {
      scan.boundary = p0 + (r0 - 0.5) / (r0 - r1) * (p1 - p0);
      break;
    }
  }
  return scan;
}

inline std::string trace_csv(const SimResult& r) {
  std::string out = "epoch,class,attempt_rate,refusal_rate,mean_reward\n";
  for (const auto& row : r.trace) {
    out += std::to_string(row.epoch) + "," + row.cls + "," +
           fixed(row.attempt_rate, 6) + "," + fixed(row.refusal_rate, 6) + "," +
           fixed(row.mean_reward, 6) + "\n";
  }
  return out;
}

inline std::string sweep_csv(const std::vector<RewardSweepRow>& rows) {
  std::vector<std::string> classes;
  for (const auto& row : rows) {
    for (const auto& [cls, v] : row.class_abstain) {
      if (std::find(classes.begin(), classes.end(), cls) == classes.end()) {
        classes.push_back(cls);
      }
    }
  }
  std::string out = "r_s,acc,truth,rel,abstain";
  for (const auto& c : classes) out += ",abstain_" + c;
  out += "\n";
  for (const auto& row : rows) {
    out += fixed(row.r_s, 4) + "," + fixed(row.metrics.acc, 6) + "," +
           fixed(row.metrics.truth, 6) + "," + fixed(row.metrics.rel, 6) + "," +
           fixed(row.metrics.abstain, 6);
    for (const auto& c : classes) {
      auto it = row.class_abstain.find(c);
      out += "," + (it == row.class_abstain.end() ? std::string() : fixed(it->second, 6));
    }
    out += "\n";
  }
  return out;
}

}  // namespace reliakit
