// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

// reliakit command-line tool: one subcommand per pipeline stage.
//
// Exit codes: 0 success, 1 runtime or partial failure, 2 usage or
// configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "reliakit/http_gateway.hpp"
#include "reliakit/reliakit.hpp"

namespace fs = std::filesystem;
using namespace reliakit;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (std::string(trim_ascii(item.substr(used))).size() != 0) throw 0;
    } catch (...) {
      throw ArgumentError("invalid number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw ArgumentError("empty list");
  return out;
}

/// "a:b:step"
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(parse_list(item).front());
  if (parts.size() != 3) throw ArgumentError("grid must look like 0:1:0.1");
  return tau_grid(parts[0], parts[1], parts[2]);
}

std::shared_ptr<Gateway> make_gateway(const EndpointConfig& endpoint) {
  if (endpoint.is_mock()) {
    return std::make_shared<BoundedGateway>(
        std::make_shared<ScriptedModel>(ScriptedModel::from_file(endpoint.mock_path())),
        endpoint.concurrency);
  }
  return make_http_gateway(endpoint);
}

std::vector<QAItem> read_nonempty_dataset(const std::string& path) {
  auto items = read_dataset(path);
  if (items.empty()) throw ArgumentError("input '" + path + "' has no records");
  return items;
}

/// Settings every subcommand shares.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "Run configuration (JSON)")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Override the configured seed");
    app->add_option("--workers", workers, "Override the worker count");
  }

  RunConfig load() const {
    RunConfig c = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    c.validate();
    return c;
  }
};

ojson meta_of(const RunConfig& c) { return artifact_meta(c.digest(), c.seed); }

// ------------------------------------------------------------------ label

struct LabelArgs {
  Common common;
  std::string in, out, samples;
  std::optional<std::size_t> k, l;
  bool force = false;
};

int run_label(const LabelArgs& a, RunConfig config) {
  if (a.k) config.k = *a.k;
  if (a.l) config.l = *a.l;
  config.validate();
  const auto items = read_nonempty_dataset(a.in);
  auto lc = LabelerConfig::with_defaults(config.k, config.l, config.seed);
  lc.temperature = config.temperature;
  lc.max_tokens = config.max_tokens;

  // Only build a gateway when something actually needs labeling.
  bool pending = a.force;
  for (const auto& it : items) pending |= !it.label;
  LabelRun run;
  if (pending) {
    auto gateway = make_gateway(config.endpoint);
    run = label_dataset(items, lc, *gateway, {a.force, config.workers});
  } else {
    run.items = items;
    run.summary.n_items = items.size();
    run.summary.n_skipped = items.size();
    for (const auto& it : items) {
      (it.label->value == Knowledge::Known ? run.summary.n_known
                                           : run.summary.n_unknown)++;
    }
  }
  const auto meta = meta_of(config);
  ensure_parent(a.out);
  write_dataset(run.items, a.out, std::make_optional(meta));
  const std::string samples = a.samples.empty() ? a.out + ".samples.jsonl" : a.samples;
  if (!run.sample_sets.empty()) write_sample_sets(run.sample_sets, samples, std::make_optional(meta));

  const auto& s = run.summary;
  std::cout << "known=" << s.n_known << ", unknown=" << s.n_unknown
            << ", labeled=" << s.n_labeled << ", skipped=" << s.n_skipped
            << ", errors=" << s.errors.size()
            << ", known_fraction=" << fixed(s.known_fraction()) << "\n";
  for (const auto& e : s.errors) {
    std::cerr << "{\"item\":" << nlohmann::json(e.id).dump()
              << ",\"error\":" << nlohmann::json(e.message).dump() << "}\n";
  }
  return s.errors.empty() ? kOk : kRuntime;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string in, out_dir, prompt = "inference";
  std::size_t runs = 1;
  bool judge_prompts = false;
};

std::string eval_prompt(const std::string& style, const std::string& question) {
  if (style == "inference") return prompts::inference(question);
  if (style == "icl") return prompts::fill(prompts::kIcl, question);
  if (style == "icl-idk") return prompts::fill(prompts::kIclIdk, question);
  throw ArgumentError("unknown prompt style '" + style + "'");
}

int run_eval(const EvalArgs& a, const RunConfig& config) {
  if (a.runs == 0) throw ArgumentError("--runs must be positive");
  (void)eval_prompt(a.prompt, "");
  const auto items = read_nonempty_dataset(a.in);
  auto gateway = make_gateway(config.endpoint);
  const RefusalLexicon lexicon;

  std::vector<std::vector<ModelResponse>> responses(items.size());
  std::vector<std::vector<Verdict>> verdicts(items.size());
  std::vector<std::optional<std::string>> failures(items.size());
  parallel_for(items.size(), config.workers, [&](std::size_t i) {
    GenerationRequest req;
    req.prompt = eval_prompt(a.prompt, items[i].question);
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    req.n = static_cast<int>(a.runs);
    req.seed = config.seed;
    req.question_id = items[i].id;
    try {
      responses[i] = gateway->generate(req);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      failures[i] = e.what();
      return;
    }
    for (const auto& r : responses[i]) {
      verdicts[i].push_back(judge(r, items[i].gold_answers, lexicon));
    }
  });

  const auto meta = meta_of(config);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);

  std::map<std::string, Tally> by_source;
  std::vector<std::vector<VerdictKind>> runs;
  std::vector<ModelResponse> flat_responses;
  std::vector<Verdict> flat_verdicts;
  std::vector<ScoredOutcome> scored;
  std::ostringstream resp_lines;
  std::ostringstream judge_lines;
  {
    ojson m;
    m["_meta"] = meta;
    resp_lines << m.dump() << "\n";
    judge_lines << m.dump() << "\n";
  }
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (failures[i]) {
      ++n_failed;
      std::cerr << "{\"item\":" << nlohmann::json(items[i].id).dump()
                << ",\"error\":" << nlohmann::json(*failures[i]).dump() << "}\n";
      continue;
    }
    const std::string source = items[i].source.empty() ? "default" : items[i].source;
    auto& tally = by_source[source];
    std::vector<VerdictKind> kinds;
    ojson line;
    line["id"] = items[i].id;
    line["source"] = source;
    line["responses"] = ojson::array();
    line["verdicts"] = ojson::array();
    for (std::size_t r = 0; r < responses[i].size(); ++r) {
      const auto& resp = responses[i][r];
      const auto& v = verdicts[i][r];
      tally.add(v.kind);
      kinds.push_back(v.kind);
      flat_responses.push_back(resp);
      flat_verdicts.push_back(v);
      line["responses"].push_back(to_json(resp));
      line["verdicts"].push_back(to_json(v));
      if (v.kind != VerdictKind::Refusal) {
        if (auto conf = parse_verbal_confidence(answer_text(resp))) {
          scored.push_back({items[i].id + "#" + std::to_string(r), *conf, v.kind});
        }
      }
      if (a.judge_prompts) {
        ojson jl;
        jl["id"] = items[i].id;
        jl["run"] = r;
        jl["prompt"] = render_judge_prompt(items[i], resp);
        judge_lines << jl.dump() << "\n";
      }
    }
    runs.push_back(std::move(kinds));
    resp_lines << line.dump() << "\n";
  }
  if (by_source.empty()) throw Error("every item failed; no report written");

  const auto report = build_report(by_source);
  ojson out;
  out["meta"] = meta;
  out["prompt"] = a.prompt;
  out["runs"] = a.runs;
  out["rows"] = to_json(report);
  if (a.runs >= 1) {
    ojson pk = ojson::array();
    const auto acc_o = to_outcomes(runs, success_correct);
    const auto truth_o = to_outcomes(runs, success_truthful);
    for (std::size_t k = 1; k <= a.runs; ++k) {
      pk.push_back({{"k", k},
                    {"accuracy", pass_at_k(acc_o, k)},
                    {"truthfulness", pass_at_k(truth_o, k)}});
    }
    out["pass_at_k"] = std::move(pk);
    out["pass_at_k_note"] = "truthfulness counts a refusal as a success";
  }
  if (a.runs >= 2) {
    out["inconsistency"] = {
        {"correct_wrong", inconsistency_rate(runs, InconsistencyMode::CorrectWrong)},
        {"answer_abstain", inconsistency_rate(runs, InconsistencyMode::AnswerAbstain)}};
  }
  out["length"] = to_json(length_stats(flat_responses, flat_verdicts));
  out["failed_items"] = n_failed;

  write_text(dir / "report.json", out.dump(2) + "\n");
  write_text(dir / "report.csv", csv_meta_line(meta) + to_csv(report));
  write_text(dir / "responses.jsonl", resp_lines.str());
  write_scored_outcomes(scored, (dir / "scored_outcomes.jsonl").string(), std::make_optional(meta));
  if (a.judge_prompts) write_text(dir / "judge_prompts.jsonl", judge_lines.str());

  const auto& avg = report.average;
  std::cout << "acc=" << fixed(100 * avg.acc, 2) << " truth=" << fixed(100 * avg.truth, 2)
            << " abstain=" << fixed(100 * avg.abstain, 2)
            << " rel=" << fixed(100 * avg.rel, 2) << " items=" << runs.size()
            << " failed=" << n_failed << "\n";
  return n_failed == 0 ? kOk : kRuntime;
}

// -------------------------------------------------------------- build-sft

struct BuildArgs {
  Common common;
  std::string in, out, report, ratio, known_template, unknown_template;
  std::optional<std::size_t> retries;
};

int run_build_sft(const BuildArgs& a, RunConfig config) {
  if (!a.ratio.empty()) config.sft_ratio = a.ratio;
  if (a.retries) config.sft_retries = *a.retries;
  config.validate();
  const auto items = read_nonempty_dataset(a.in);
  BuildOptions opt;
  opt.ratio = Ratio::parse(config.sft_ratio);
  opt.seed = config.seed;
  opt.retries = config.sft_retries;
  opt.temperature = config.temperature;
  opt.max_tokens = config.max_tokens;
  opt.workers = config.workers;
  if (!a.known_template.empty()) {
    opt.templates.known = TraceTemplate::from_file(Knowledge::Known, a.known_template);
  }
  if (!a.unknown_template.empty()) {
    opt.templates.unknown =
        TraceTemplate::from_file(Knowledge::Unknown, a.unknown_template);
  }
  auto gateway = make_gateway(config.generator_endpoint());
  auto result = build_sft_dataset(items, *gateway, opt);

  const auto meta = meta_of(config);
  ensure_parent(a.out);
  write_sft(result.records, a.out, std::make_optional(meta));
  ojson rep;
  rep["meta"] = meta;
  rep["ratio"] = config.sft_ratio;
  rep["report"] = to_json(result.report);
  write_text(a.report.empty() ? a.out + ".report.json" : a.report, rep.dump(2) + "\n");

  const auto& r = result.report;
  std::cout << "emitted known=" << r.emitted_known << " unknown=" << r.emitted_unknown
            << " target known=" << r.target_known << " unknown=" << r.target_unknown
            << " shortfall=" << r.shortfall() << " retries=" << r.retries_used
            << " generator_errors=" << r.generator_errors << "\n";
  return r.shortfall() == 0 ? kOk : kRuntime;
}

// --------------------------------------------------------------- grpo-sim

struct GrpoArgs {
  Common common;
  std::string in, out, summary, normalization;
  std::optional<std::size_t> epochs;
  std::optional<double> rs;
};

/// Each labeled item becomes one simulated question whose competence is its
/// observed match rate.
SimEnvironment environment_from_labels(const std::vector<QAItem>& items) {
  SimEnvironment env;
  for (const auto& it : items) {
    if (!it.label || it.label->n_samples == 0) continue;
    env.questions.push_back(
        {std::string(to_string(it.label->value)),
         static_cast<double>(it.label->n_matches) / it.label->n_samples});
  }
  if (env.questions.empty()) throw ArgumentError("no labeled items to simulate");
  return env;
}

void apply_grpo_overrides(const GrpoArgs& a, RunConfig& config) {
  if (a.epochs) config.grpo.epochs = *a.epochs;
  if (!a.normalization.empty()) {
    config.grpo.normalization = normalization_from_string(a.normalization);
  }
}

int run_grpo_sim(const GrpoArgs& a, RunConfig config) {
  apply_grpo_overrides(a, config);
  if (a.rs) config.r_s = *a.rs;
  const bool ablation = config.r_s == config.r_w;
  if (!ablation) config.validate();
  const RewardSpec spec = ablation
                              ? RewardSpec::without_rejection_reward(config.r_c, config.r_w)
                              : config.reward();
  const SimEnvironment env = a.in.empty() ? config.sim_environment()
                                          : environment_from_labels(read_dataset(a.in));
  const auto sim = simulate_grpo(env, spec, config.grpo, config.seed);
  const auto meta = meta_of(config);
  write_text(a.out, csv_meta_line(meta) + trace_csv(sim));

  ojson summary;
  summary["meta"] = meta;
  summary["reward"] = {{"r_c", spec.r_c()}, {"r_s", spec.r_s()}, {"r_w", spec.r_w()},
                       {"ablation", spec.ablation()}};
  summary["normalization"] = std::string(to_string(config.grpo.normalization));
  ojson classes = ojson::object();
  for (const auto& [cls, t] : expected_tallies(env, sim.final_state)) {
    classes[cls] = {{"refusal_rate", sim.final_state.refusal_rate(cls)},
                    {"metrics", to_json(reliability(t))}};
  }
  summary["classes"] = std::move(classes);
  summary["overall"] = to_json(reliability(expected_tally(env, sim.final_state)));
  write_text(a.summary.empty() ? a.out + ".summary.json" : a.summary,
             summary.dump(2) + "\n");
  for (std::size_t c = 0; c < sim.final_state.classes.size(); ++c) {
    std::cout << sim.final_state.classes[c]
              << " refusal_rate=" << fixed(sim.final_state.refusal_rate(c)) << "\n";
  }
  return kOk;
}

// ------------------------------------------------------------ reward-sweep

struct SweepArgs {
  GrpoArgs grpo;
  std::string rs_list = "-1.0,-0.5,0.9";
};

int run_reward_sweep(const SweepArgs& a, RunConfig config) {
  apply_grpo_overrides(a.grpo, config);
  const auto grid = parse_list(a.rs_list);
  const SimEnvironment env = a.grpo.in.empty()
                                 ? config.sim_environment()
                                 : environment_from_labels(read_dataset(a.grpo.in));
  const auto rows = reward_sweep(env, grid, config.grpo, config.seed, config.r_c,
                                 config.r_w);
  const std::string csv = csv_meta_line(meta_of(config)) + sweep_csv(rows);
  write_text(a.grpo.out, csv);
  std::cout << sweep_csv(rows);
  return kOk;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  Common common;
  std::string in, out_dir, grid = "0:1:0.1";
  std::optional<std::size_t> bins;
};

int run_calibrate(const CalibrateArgs& a, RunConfig config) {
  if (a.bins) config.calibration_bins = *a.bins;
  config.validate();
  const auto outcomes = read_scored_outcomes(a.in);
  if (outcomes.empty()) throw ArgumentError("input '" + a.in + "' has no records");
  const auto grid = parse_grid(a.grid);
  const auto sweep = threshold_sweep(outcomes, grid);
  const auto meta = meta_of(config);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);

  std::string csv = csv_meta_line(meta) + "tau,acc,truth,rel,abstain\n";
  for (const auto& row : sweep.rows) {
    csv += fixed(row.tau, 4) + "," + fixed(row.metrics.acc, 6) + "," +
           fixed(row.metrics.truth, 6) + "," + fixed(row.metrics.rel, 6) + "," +
           fixed(row.metrics.abstain, 6) + "\n";
  }
  csv += "# best_tau=" + fixed(sweep.best_tau, 4) + "\n";
  write_text(dir / "threshold_sweep.csv", csv);

  std::string roc = csv_meta_line(meta) + "threshold,fpr,tpr\n";
  for (const auto& p : roc_curve(outcomes)) {
    roc += fixed(p.threshold, 6) + "," + fixed(p.fpr, 6) + "," + fixed(p.tpr, 6) + "\n";
  }
  write_text(dir / "roc.csv", roc);

  const auto curve = calibration_curve(outcomes, config.calibration_bins);
  std::string cal = csv_meta_line(meta) + "lower,upper,mean_confidence,accuracy,count\n";
  for (const auto& b : curve.bins) {
    cal += fixed(b.lower, 4) + "," + fixed(b.upper, 4) + "," +
           fixed(b.mean_confidence, 6) + "," + fixed(b.accuracy, 6) + "," +
           std::to_string(b.count) + "\n";
  }
  write_text(dir / "calibration.csv", cal);

  const auto auc = roc_auc(outcomes);
  ojson summary;
  summary["meta"] = meta;
  summary["n"] = outcomes.size();
  summary["best_tau"] = sweep.best_tau;
  summary["auc"] = auc ? ojson(*auc) : ojson(nullptr);
  summary["ece"] = curve.ece;
  summary["bins"] = config.calibration_bins;
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "rows=" << sweep.rows.size() << " best_tau=" << fixed(sweep.best_tau, 4)
            << " auc=" << (auc ? fixed(*auc) : std::string("undefined"))
            << " ece=" << fixed(curve.ece) << "\n";
  return kOk;
}

// -------------------------------------------------------------------- passk

struct PasskArgs {
  Common common;
  std::string in, ks, predicate = "correct";
};

int run_passk(const PasskArgs& a, const RunConfig&) {
  std::ifstream in(a.in);
  if (!in) throw IoError("cannot open '" + a.in + "'");
  std::vector<std::vector<VerdictKind>> runs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_ascii(line).empty()) continue;
    try {
      auto j = ojson::parse(line);
      if (j.contains("_meta")) continue;
      std::vector<VerdictKind> kinds;
      for (const auto& v : j.at("verdicts")) {
        kinds.push_back(verdict_from_string(
            v.is_string() ? v.get<std::string>() : v.at("kind").get<std::string>()));
      }
      runs.push_back(std::move(kinds));
    } catch (const std::exception& e) {
      throw IoError(a.in + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (runs.empty()) throw ArgumentError("input '" + a.in + "' has no records");
  SuccessPredicate pred;
  if (a.predicate == "correct") {
    pred = success_correct;
  } else if (a.predicate == "truthful") {
    pred = success_truthful;
  } else {
    throw ArgumentError("predicate must be 'correct' or 'truthful'");
  }
  const auto outcomes = to_outcomes(runs, pred);
  std::vector<double> ks;
  if (a.ks.empty()) {
    for (std::size_t k = 1; k <= runs.front().size(); ++k) ks.push_back(k);
  } else {
    ks = parse_list(a.ks);
  }
  std::cout << "k,pass_at_k\n";
  for (double kd : ks) {
    if (kd < 1 || kd != static_cast<double>(static_cast<std::size_t>(kd))) {
      throw ArgumentError("k must be a positive integer");
    }
    const auto k = static_cast<std::size_t>(kd);
    std::cout << k << "," << fixed(pass_at_k(outcomes, k), 6) << "\n";
  }
  return kOk;
}

// ----------------------------------------------------------------- pipeline

struct PipelineArgs {
  Common common;
  std::string in, out_dir;
  std::size_t runs = 4;
};

int run_pipeline(const PipelineArgs& a, const RunConfig& config) {
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  int worst = kOk;
  auto step = [&](const char* name, int code) {
    std::cout << "[" << name << "] exit=" << code << "\n";
    worst = std::max(worst, code);
  };

  LabelArgs la;
  la.in = a.in;
  la.out = (dir / "labeled.jsonl").string();
  step("label", run_label(la, config));

  BuildArgs ba;
  ba.in = la.out;
  ba.out = (dir / "sft.jsonl").string();
  step("build-sft", run_build_sft(ba, config));

  GrpoArgs ga;
  ga.in = la.out;
  ga.out = (dir / "grpo_trace.csv").string();
  step("grpo-sim", run_grpo_sim(ga, config));

  EvalArgs ea;
  ea.in = la.out;
  ea.out_dir = (dir / "eval").string();
  ea.runs = a.runs;
  step("eval", run_eval(ea, config));

  CalibrateArgs ca;
  ca.in = (dir / "eval" / "scored_outcomes.jsonl").string();
  ca.out_dir = (dir / "calibration").string();
  if (read_scored_outcomes(ca.in).empty()) {
    std::cout << "[calibrate] skipped: no verbalized confidences in responses\n";
  } else {
    step("calibrate", run_calibrate(ca, config));
  }
  return worst;
}

void report_error(const char* kind, const std::exception& e) {
  std::cerr << "{\"error\":\"" << kind << "\",\"message\":"
            << nlohmann::json(std::string(e.what())).dump() << "}\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability toolkit for factual QA with reasoning models"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  LabelArgs label;
  auto* label_cmd = app.add_subcommand("label", "Label items Known/Unknown by sampling");
  label.common.attach(label_cmd);
  label_cmd->add_option("--in", label.in, "QA dataset (JSONL)")->required()->check(CLI::ExistingFile);
  label_cmd->add_option("--out", label.out, "Labeled dataset (JSONL)")->required();
  label_cmd->add_option("--samples", label.samples, "Sample sidecar (default <out>.samples.jsonl)");
  label_cmd->add_option("--k", label.k, "Number of few-shot prompts");
  label_cmd->add_option("--l", label.l, "Samples per prompt");
  label_cmd->add_flag("--force", label.force, "Relabel items that already carry a label");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run inference and score accuracy/truthfulness/reliability");
  eval.common.attach(eval_cmd);
  eval_cmd->add_option("--in", eval.in, "QA dataset (JSONL)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out-dir", eval.out_dir, "Output directory")->required();
  eval_cmd->add_option("--runs", eval.runs, "Samples per question (pass@k, inconsistency)");
  eval_cmd->add_option("--prompt", eval.prompt, "inference | icl | icl-idk")
      ->check(CLI::IsMember({"inference", "icl", "icl-idk"}));
  eval_cmd->add_flag("--judge-prompts", eval.judge_prompts, "Also write rendered judge prompts");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-sft", "Construct and validate SFT traces");
  build.common.attach(build_cmd);
  build_cmd->add_option("--in", build.in, "Labeled dataset (JSONL)")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--out", build.out, "SFT records (JSONL)")->required();
  build_cmd->add_option("--report", build.report, "Build report (default <out>.report.json)");
  build_cmd->add_option("--ratio", build.ratio, "Known:unknown ratio, e.g. 3:1");
  build_cmd->add_option("--retries", build.retries, "Extra attempts per item");
  build_cmd->add_option("--known-template", build.known_template, "Known trace prompt file")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--unknown-template", build.unknown_template, "Unknown trace prompt file")
      ->check(CLI::ExistingFile);

  GrpoArgs grpo;
  auto* grpo_cmd = app.add_subcommand("grpo-sim", "Simulate GRPO on an attempt/refuse policy");
  grpo.common.attach(grpo_cmd);
  grpo_cmd->add_option("--in", grpo.in, "Labeled dataset to derive the environment from")
      ->check(CLI::ExistingFile);
  grpo_cmd->add_option("--out", grpo.out, "Training trace (CSV)")->required();
  grpo_cmd->add_option("--summary", grpo.summary, "Summary JSON (default <out>.summary.json)");
  grpo_cmd->add_option("--epochs", grpo.epochs, "Override the epoch count");
  grpo_cmd->add_option("--rs", grpo.rs, "Override r_s; r_s = r_w runs the no-rejection-reward ablation");
  grpo_cmd->add_option("--normalization", grpo.normalization, "group_std | group_mean")
      ->check(CLI::IsMember({"group_std", "group_mean"}));

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("reward-sweep", "Sweep r_s through the simulator");
  sweep.grpo.common.attach(sweep_cmd);
  sweep_cmd->add_option("--rs", sweep.rs_list, "Comma-separated r_s values");
  sweep_cmd->add_option("--in", sweep.grpo.in, "Labeled dataset to derive the environment from")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", sweep.grpo.out, "Sweep table (CSV)")->required();
  sweep_cmd->add_option("--epochs", sweep.grpo.epochs, "Override the epoch count");
  sweep_cmd->add_option("--normalization", sweep.grpo.normalization, "group_std | group_mean")
      ->check(CLI::IsMember({"group_std", "group_mean"}));

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Threshold abstention, ROC and calibration");
  cal.common.attach(cal_cmd);
  cal_cmd->add_option("--in", cal.in, "Scored outcomes (JSONL: id, confidence, verdict)")
      ->required()->check(CLI::ExistingFile);
  cal_cmd->add_option("--out-dir", cal.out_dir, "Output directory")->required();
  cal_cmd->add_option("--tau-grid", cal.grid, "Threshold grid start:end:step");
  cal_cmd->add_option("--bins", cal.bins, "Calibration bins");

  PasskArgs passk;
  auto* passk_cmd = app.add_subcommand("passk", "pass@k from an eval responses file");
  passk.common.attach(passk_cmd);
  passk_cmd->add_option("--in", passk.in, "responses.jsonl written by eval")
      ->required()->check(CLI::ExistingFile);
  passk_cmd->add_option("--k", passk.ks, "Comma-separated k values (default 1..n)");
  passk_cmd->add_option("--predicate", passk.predicate, "correct | truthful")
      ->check(CLI::IsMember({"correct", "truthful"}));

  PipelineArgs pipe;
  auto* pipe_cmd = app.add_subcommand("pipeline", "label -> build-sft -> grpo-sim -> eval -> calibrate");
  pipe.common.attach(pipe_cmd);
  pipe_cmd->add_option("--in", pipe.in, "QA dataset (JSONL)")->required()->check(CLI::ExistingFile);
  pipe_cmd->add_option("--out-dir", pipe.out_dir, "Output directory")->required();
  pipe_cmd->add_option("--runs", pipe.runs, "Eval samples per question");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*label_cmd) return run_label(label, label.common.load());
    if (*eval_cmd) return run_eval(eval, eval.common.load());
    if (*build_cmd) return run_build_sft(build, build.common.load());
    if (*grpo_cmd) return run_grpo_sim(grpo, grpo.common.load());
    if (*sweep_cmd) return run_reward_sweep(sweep, sweep.grpo.common.load());
    if (*cal_cmd) return run_calibrate(cal, cal.common.load());
    if (*passk_cmd) return run_passk(passk, passk.common.load());
    if (*pipe_cmd) return run_pipeline(pipe, pipe.common.load());
  } catch (const ConfigError& e) {
    report_error("config", e);
    return kUsage;
  } catch (const ArgumentError& e) {
    report_error("argument", e);
    return kUsage;
  } catch (const Error& e) {
    report_error("runtime", e);
    return kRuntime;
  } catch (const std::exception& e) {
    report_error("internal", e);
    return kRuntime;
  }
  return kUsage;
}
