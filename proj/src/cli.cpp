#include "mcre/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mcre/analysis.hpp"
#include "mcre/bounds.hpp"
#include "mcre/error.hpp"
#include "mcre/format.hpp"
#include "mcre/learner.hpp"
#include "mcre/lifted_chain.hpp"
#include "mcre/manifest.hpp"
#include "mcre/model_io.hpp"
#include "mcre/scenario.hpp"
#include "mcre/simulator.hpp"
#include "mcre/verify.hpp"

#ifndef MCRE_LAB_VERSION
#define MCRE_LAB_VERSION "0.0.0"
#endif

namespace mcre::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string model;
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool prune = false;
  std::size_t state_cap = kDefaultStateCap;
  std::size_t m_max = 100;

  std::size_t rounds = 1000;
  std::string start = "stationary";
  std::size_t burn_in = kDefaultBurnIn;
  bool record_users = false;

  std::string class_spec;
  std::string hypothesis;
  std::string loss = "zero_one";
  std::size_t random_members = 8;

  std::string kind;
  double loss_bound = 1.0;
  std::size_t n0 = 0;
  double delta = 0.0;
  std::size_t z = 0;
  double eps = 0.0;
  double cover = 1.0;
  std::size_t tau = 0;
  double beta = 0.0;
  double beta0 = 0.0;
  double gamma = 0.0;
  double s = 0.0;
  double c = 1.0;

  std::size_t replicas = 2000;
  std::vector<std::size_t> t_grid{100, 1000, 10000};
  std::vector<double> eps_grid{0.05, 0.1, 0.2, 0.3};
  double confidence = 0.99;
  std::size_t threads = 0;
};

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON in ") + what + " '" + path.string() + "': " + e.what());
  }
}

std::string scalar_to_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

// Appends --key value for every config-file key not already on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args, json& config,
                                      std::vector<fs::path>& config_files) {
  std::vector<std::string> merged = args;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] != "--config" && args[i] != "--params") continue;
    const fs::path path = args[i + 1];
    config_files.push_back(path);
    const json doc = read_json_file(path, "config file");
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      std::string flag = "--" + it.key();
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
      config[it.key()] = it.value();
      const json& v = it.value();
      if (v.is_boolean()) {
        if (v.get<bool>()) merged.push_back(flag);
      } else if (v.is_array()) {
        std::string joined;
        for (std::size_t k = 0; k < v.size(); ++k) joined += (k ? "," : "") + scalar_to_arg(v[k]);
        merged.push_back(flag);
        merged.push_back(joined);
      } else {
        merged.push_back(flag);
        merged.push_back(scalar_to_arg(v));
      }
    }
  }
  return merged;
}

struct Context {
  Options opt;
  RunManifest manifest;
  std::ostream& out;
  std::ostream& err;
};

void record_input(Context& ctx, const fs::path& path) {
  ctx.manifest.inputs.push_back({path.string(), sha256_file(path)});
}

McreModel load_source(Context& ctx) {
  const bool has_model = !ctx.opt.model.empty();
  const bool has_scenario = !ctx.opt.scenario.empty();
  if (has_model == has_scenario) throw ConfigError("give exactly one of --model or --scenario");
  if (has_model) {
    McreModel model = load_model(ctx.opt.model);
    record_input(ctx, ctx.opt.model);
    return model;
  }
  const ScenarioSpec spec = scenario_from_json(read_json_file(ctx.opt.scenario, "scenario"));
  record_input(ctx, ctx.opt.scenario);
  return toy_sponsored_search(spec);
}

std::uint64_t require_seed(const Context& ctx) {
  if (!ctx.opt.seed) throw ConfigError("--seed is required for this subcommand");
  return *ctx.opt.seed;
}

LossFunction make_loss(const Context& ctx, const McreModel& model) {
  if (ctx.opt.loss == "zero_one") return LossFunction(LossKind::ZeroOneJoint, model.joint_behaviors());
  if (ctx.opt.loss == "hamming") return LossFunction(LossKind::HammingPerAgent, model.joint_behaviors());
  throw ConfigError("--loss must be 'zero_one' or 'hamming'");
}

std::variant<StationaryStart, FixedStart> parse_start(const Context& ctx, const McreModel& model) {
  if (ctx.opt.start == "stationary") return StationaryStart{};
  const std::string prefix = "fixed:";
  if (ctx.opt.start.rfind(prefix, 0) != 0)
    throw ConfigError("--start must be 'stationary' or 'fixed:<b1,...,bN>'");
  const auto parts = split(ctx.opt.start.substr(prefix.size()), ',');
  if (parts.size() != model.agents()) throw ConfigError("--start: expected one behavior label per agent");
  std::vector<std::size_t> digits;
  for (const auto& p : parts) {
    const auto i = model.behaviors().index_of(p);
    if (!i) throw ConfigError("--start: unknown behavior label '" + p + "'");
    digits.push_back(*i);
  }
  return FixedStart{model.joint_behaviors().encode(digits), ctx.opt.burn_in};
}

HypothesisClass load_class(Context& ctx, const McreModel& model) {
  if (ctx.opt.class_spec == "all") return enumerate_all_hypotheses(model);
  if (ctx.opt.class_spec == "reference")
    return reference_class(model, ctx.opt.random_members, require_seed(ctx));
  const json doc = read_json_file(ctx.opt.class_spec, "class file");
  record_input(ctx, ctx.opt.class_spec);
  return class_from_json(doc, model);
}

std::string state_label(const McreModel& model, const LiftedState& s) {
  return model.joint_feedback_label(s.h) + "|" + model.joint_behavior_label(s.b) + "|" +
         model.joint_behavior_label(s.b_next);
}

fs::path prepare_out_dir(const Context& ctx) {
  const fs::path dir = ctx.opt.out;
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

void add_output(Context& ctx, const fs::path& dir, const std::string& name) {
  ctx.manifest.outputs.push_back({name, sha256_file(dir / name)});
}

void finish_manifest(Context& ctx, const fs::path& manifest_path) {
  ctx.manifest.finished_at = utc_timestamp();
  write_manifest(manifest_path, ctx.manifest);
}

// Emits `doc` either as <out>/<name> plus a manifest, or on stdout.
void emit_json(Context& ctx, const json& doc, const std::string& name) {
  if (ctx.opt.out.empty()) {
    ctx.out << doc.dump(2) << '\n';
    return;
  }
  const fs::path dir = prepare_out_dir(ctx);
  write_json(dir / name, doc);
  add_output(ctx, dir, name);
  finish_manifest(ctx, dir / "manifest.json");
}

int cmd_validate(Context& ctx) {
  if (!ctx.opt.scenario.empty() && ctx.opt.model.empty()) {
    const McreModel model = load_source(ctx);
    ctx.out << model_to_json(model).dump(2) << '\n';
    return kOk;
  }
  if (ctx.opt.model.empty()) throw ConfigError("validate needs --model (or --scenario)");
  const auto result = validate_model_file(ctx.opt.model);
  if (!result.ok()) {
    for (const auto& d : result.diagnostics) ctx.err << d << '\n';
    return kInvalidModel;
  }
  const auto& m = *result.model;
  ctx.out << json{{"valid", true},
                  {"agents", m.agents()},
                  {"behaviors", m.behaviors().size()},
                  {"feedbacks", m.feedbacks().size()},
                  {"user_factors", m.users().labels.size()},
                  {"lifted_states", m.joint_feedbacks().size() * m.joint_behaviors().size() *
                                        m.joint_behaviors().size()}}
                 .dump(2)
          << '\n';
  return kOk;
}

int cmd_analyze(Context& ctx) {
  const McreModel model = load_source(ctx);
  const LiftedChain chain = build_lifted_chain(model, {ctx.opt.prune, ctx.opt.state_cap});
  const ErgodicityReport report = analyze_chain(chain.matrix());
  const AssumptionReport assumptions = check_assumptions(model);

  json doc;
  doc["Z"] = chain.size();
  doc["nominal_Z"] = chain.nominal_size();
  doc["pruned"] = ctx.opt.prune;
  doc["irreducible"] = report.irreducible;
  doc["period"] = report.period ? json(*report.period) : json(nullptr);
  doc["ergodic"] = report.ergodic;
  doc["n0"] = report.n0 ? json(*report.n0) : json(nullptr);
  doc["delta"] = report.delta ? json(*report.delta) : json(nullptr);
  doc["wielandt_cap"] = report.wielandt_cap;
  doc["a1"] = assumptions.a1_ok;
  doc["a2"] = assumptions.a2_ok;
  doc["per_agent_primitive"] = assumptions.per_agent_primitive;
  json violations = json::array();
  for (const auto& f : assumptions.a1_failures)
    violations.push_back("A.1: joint kernel for feedback '" + model.joint_feedback_label(f.joint_feedback) +
                         "' is " + (f.irreducible ? "periodic (period " + std::to_string(*f.period) + ")"
                                                  : std::string("reducible")));
  for (const auto& g : assumptions.a2_violations)
    violations.push_back("A.2: feedback '" + model.joint_feedback_label(g.joint_feedback) +
                         "' unreachable from behavior '" + model.joint_behavior_label(g.joint_behavior) + "'");
  doc["violations"] = std::move(violations);
  json states = json::array();
  for (const auto& s : chain.states()) states.push_back(state_label(model, s));
  doc["states"] = std::move(states);
  if (report.ergodic) {
    const auto st = stationary_distribution(chain.matrix());
    doc["pi"] = std::vector<double>(st.pi.data(), st.pi.data() + st.pi.size());
    doc["residual"] = st.residual;
    doc["betas"] = beta_mixing(chain.matrix(), st.pi, ctx.opt.m_max).betas;
  } else {
    doc["pi"] = nullptr;
    doc["residual"] = nullptr;
    doc["betas"] = nullptr;
  }
  emit_json(ctx, doc, "report.json");
  return kOk;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int cmd_simulate(Context& ctx) {
  const McreModel model = load_source(ctx);
  if (ctx.opt.out.empty()) throw ConfigError("simulate needs --out <file>");
  TrajectoryConfig cfg;
  cfg.rounds = ctx.opt.rounds;
  cfg.seed = require_seed(ctx);
  cfg.start = parse_start(ctx, model);
  cfg.record_users = ctx.opt.record_users;
  const Simulator sim = std::holds_alternative<StationaryStart>(cfg.start)
                            ? Simulator::with_stationary(model, {ctx.opt.prune, ctx.opt.state_cap})
                            : Simulator(model);
  const Trajectory traj = sim.sample(cfg);

  const fs::path path = ctx.opt.out;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write '" + path.string() + "'");
    csv << "t,h,b,b_next" << (cfg.record_users ? ",u" : "") << '\n';
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto& z = traj.z[t];
      csv << t + 1 << ',' << csv_field(model.joint_feedback_label(z.h)) << ','
          << csv_field(model.joint_behavior_label(z.b)) << ',' << csv_field(model.joint_behavior_label(z.b_next));
      if (cfg.record_users) csv << ',' << csv_field(model.users().labels[traj.users[t]]);
      csv << '\n';
    }
  }
  add_output(ctx, path.parent_path(), path.filename().string());
  finish_manifest(ctx, fs::path(path.string() + ".manifest.json"));
  return kOk;
}

int cmd_erm(Context& ctx) {
  const McreModel model = load_source(ctx);
  if (ctx.opt.class_spec.empty()) throw ConfigError("erm needs --class <file|reference|all>");
  const HypothesisClass cls = load_class(ctx, model);
  const LossFunction loss = make_loss(ctx, model);
  TrajectoryConfig cfg;
  cfg.rounds = ctx.opt.rounds;
  cfg.seed = require_seed(ctx);
  cfg.start = parse_start(ctx, model);

  std::optional<Simulator> sim;
  try {
    sim.emplace(Simulator::with_stationary(model, {ctx.opt.prune, ctx.opt.state_cap}));
  } catch (const std::domain_error&) {
    if (std::holds_alternative<StationaryStart>(cfg.start)) throw;
    sim.emplace(model);
  }
  const Trajectory traj = sim->sample(cfg);
  const ErmResult result = erm(cls, traj, loss);

  json members = json::array();
  for (std::size_t i = 0; i < cls.size(); ++i) {
    json m{{"index", i}, {"name", cls[i].name()}, {"empirical", result.member_risks[i]}};
    if (sim->has_stationary()) {
      const double expected = expected_risk(cls[i], sim->chain(), sim->stationary().pi, loss);
      m["expected"] = expected;
      m["gap"] = std::abs(result.member_risks[i] - expected);
    } else {
      m["expected"] = nullptr;
      m["gap"] = nullptr;
    }
    members.push_back(std::move(m));
  }
  json doc{{"selected", result.index},
           {"selected_name", cls[result.index].name()},
           {"loss", ctx.opt.loss},
           {"B", loss.bound()},
           {"rounds", cfg.rounds},
           {"members", std::move(members)}};
  emit_json(ctx, doc, "erm.json");
  return kOk;
}

int cmd_bound(Context& ctx, const CLI::App& sub) {
  const auto given = [&](const char* name) { return sub.count(name) > 0; };
  const auto require = [&](std::initializer_list<const char*> names) {
    for (const char* n : names)
      if (!given(n)) throw ConfigError(std::string("bound --kind ") + ctx.opt.kind + " needs " + n);
  };
  json inputs;
  json doc;
  double value = 0.0;
  if (ctx.opt.kind == "pointwise") {
    std::size_t n0 = ctx.opt.n0, z = ctx.opt.z;
    double delta = ctx.opt.delta;
    if (!ctx.opt.model.empty() || !ctx.opt.scenario.empty()) {
      const McreModel model = load_source(ctx);
      const LiftedChain chain = build_lifted_chain(model, {ctx.opt.prune, ctx.opt.state_cap});
      const auto report = analyze_chain(chain.matrix());
      const auto doeblin = doeblin_from_chain(report, chain.size());
      n0 = *report.n0;
      delta = *report.delta;
      z = chain.size();
      doc["doeblin"] = {{"m", doeblin.m}, {"lambda", doeblin.lambda}};
    } else {
      require({"--n0", "--delta", "--Z"});
    }
    require({"--T", "--eps"});
    inputs = {{"B", ctx.opt.loss_bound}, {"n0", n0}, {"delta", delta}, {"Z", z}, {"T", ctx.opt.rounds},
              {"eps", ctx.opt.eps}};
    value = pointwise_bound(ctx.opt.loss_bound, n0, delta, z, ctx.opt.rounds, ctx.opt.eps);
  } else if (ctx.opt.kind == "uniform") {
    require({"--cover", "--tau", "--eps", "--beta"});
    inputs = {{"cover", ctx.opt.cover}, {"tau", ctx.opt.tau}, {"B", ctx.opt.loss_bound},
              {"eps", ctx.opt.eps}, {"beta", ctx.opt.beta}};
    value = uniform_bound(ctx.opt.cover, ctx.opt.tau, ctx.opt.loss_bound, ctx.opt.eps, ctx.opt.beta);
  } else if (ctx.opt.kind == "corollary") {
    require({"--beta0", "--gamma", "--s", "--T", "--eps"});
    const MixingParams mix{ctx.opt.beta0, ctx.opt.gamma, ctx.opt.s, ctx.opt.c};
    try {
      mix.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const auto scheme = optimal_block_size(mix, ctx.opt.rounds);
    inputs = {{"beta0", mix.beta0}, {"gamma", mix.gamma}, {"s", mix.s},   {"C", mix.c},
              {"T", ctx.opt.rounds}, {"cover", ctx.opt.cover}, {"B", ctx.opt.loss_bound}, {"eps", ctx.opt.eps}};
    doc["block_m"] = scheme.scheme.block_m;
    doc["tau"] = scheme.scheme.tau;
    doc["discarded"] = scheme.scheme.discarded;
    value = scheme.bound(ctx.opt.cover, ctx.opt.loss_bound, ctx.opt.eps);
  } else {
    throw ConfigError("--kind must be pointwise, uniform or corollary");
  }
  const auto b = BoundValue::of(value);
  doc["kind"] = ctx.opt.kind;
  doc["value"] = b.raw;
  doc["clamped"] = b.clamped;
  doc["vacuous"] = b.vacuous;
  doc["inputs"] = std::move(inputs);
  emit_json(ctx, doc, "bound.json");
  return kOk;
}

int cmd_verify(Context& ctx) {
  const McreModel model = load_source(ctx);
  if (ctx.opt.out.empty()) throw ConfigError("verify needs --out <dir>");
  const std::uint64_t seed = require_seed(ctx);
  const Simulator sim = Simulator::with_stationary(model, {ctx.opt.prune, ctx.opt.state_cap});
  const LossFunction loss = make_loss(ctx, model);
  TailExperimentConfig cfg;
  cfg.replicas = ctx.opt.replicas;
  cfg.t_grid = ctx.opt.t_grid;
  cfg.eps_grid = ctx.opt.eps_grid;
  cfg.master_seed = seed;
  cfg.confidence = ctx.opt.confidence;
  cfg.threads = ctx.opt.threads;
  cfg.validate();

  const auto report = analyze_chain(sim.chain().matrix());
  json summary;
  summary["Z"] = sim.chain().size();
  summary["B"] = loss.bound();
  summary["n0"] = report.n0 ? json(*report.n0) : json(nullptr);
  summary["delta"] = report.delta ? json(*report.delta) : json(nullptr);
  summary["replicas"] = cfg.replicas;
  summary["confidence"] = cfg.confidence;
  summary["seed"] = seed;

  TailEstimate est;
  std::vector<double> bounds;
  if (!ctx.opt.class_spec.empty()) {
    const HypothesisClass cls = load_class(ctx, model);
    const UniformPlan plan = plan_uniform_bounds(sim, cls, loss, cfg, ctx.opt.m_max);
    TailExperimentConfig used = cfg;
    used.t_grid = plan.used_t_grid;
    est = estimate_sup_deviation_tail(sim, cls, loss, used);
    bounds = plan.bounds;
    json rows = json::array();
    for (std::size_t ti = 0; ti < plan.schemes.size(); ++ti) {
      json covers = json::array();
      for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
        const auto& c = plan.covers[ti * cfg.eps_grid.size() + ei];
        covers.push_back({{"eps", cfg.eps_grid[ei]}, {"cover", c.size}, {"exact", c.exact}});
      }
      rows.push_back({{"requested_T", cfg.t_grid[ti]},
                      {"used_T", plan.schemes[ti].used_rounds},
                      {"discarded", plan.schemes[ti].discarded},
                      {"block_m", plan.schemes[ti].block_m},
                      {"tau", plan.schemes[ti].tau},
                      {"beta_at_m", plan.profile.at(plan.schemes[ti].block_m)},
                      {"covers", std::move(covers)}});
    }
    summary["mode"] = "uniform";
    summary["class_size"] = cls.size();
    summary["rows"] = std::move(rows);
  } else {
    const Hypothesis f = ctx.opt.hypothesis.empty()
                             ? bayes_rule(model)
                             : hypothesis_from_json(read_json_file(ctx.opt.hypothesis, "hypothesis file"), model);
    if (!ctx.opt.hypothesis.empty()) record_input(ctx, ctx.opt.hypothesis);
    est = estimate_deviation_tail(sim, f, loss, cfg);
    bounds = pointwise_bound_grid(report, sim.chain().size(), loss.bound(), cfg.t_grid, cfg.eps_grid);
    summary["mode"] = "pointwise";
    summary["hypothesis"] = f.name();
  }
  summary["expected_risks"] = est.expected_risks;
  const DominanceReport dominance = dominance_check(est, bounds);
  summary["dominance"] = dominance_to_json(dominance);

  const fs::path dir = prepare_out_dir(ctx);
  write_tails_csv(dir / "tails.csv", est);
  write_dominance_csv(dir / "dominance.csv", dominance);
  write_plot_data_csv(dir / "plot_data.csv", dominance);
  write_json(dir / "report.json", summary);
  for (const char* name : {"tails.csv", "dominance.csv", "plot_data.csv", "report.json"}) add_output(ctx, dir, name);
  finish_manifest(ctx, dir / "manifest.json");
  ctx.out << "verify: " << dominance.count(Verdict::Pass) << " pass, " << dominance.count(Verdict::Fail)
          << " fail, " << dominance.count(Verdict::Inconclusive) << " inconclusive, "
          << dominance.count(Verdict::Vacuous) << " vacuous\n";
  return kOk;
}

void add_model_flags(CLI::App* sub, Options& opt) {
  sub->add_option("--model", opt.model, "Model JSON file");
  sub->add_option("--scenario", opt.scenario, "Toy sponsored-search scenario JSON file");
  sub->add_flag("--prune", opt.prune, "Drop lifted states (k,m,n) with M_k(m,n) = 0");
  sub->add_option("--state-cap", opt.state_cap, "Maximum number of lifted states");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Context ctx{Options{}, RunManifest{}, out, err};
  ctx.manifest.started_at = utc_timestamp();
  ctx.manifest.version = MCRE_LAB_VERSION;
  try {
    std::vector<fs::path> config_files;
    std::vector<std::string> args = merge_config(raw_args, ctx.manifest.config, config_files);
    Options& opt = ctx.opt;

    CLI::App app{"Markov chains in random environments: analysis, simulation, learning and bound checks",
                 "mcre_lab"};
    app.require_subcommand(1);
    std::string config_path;
    const auto add_common = [&](CLI::App* sub) {
      sub->add_option("--config,--params", config_path, "JSON file supplying defaults for flags");
      sub->add_option("--seed", opt.seed, "Master seed");
      sub->add_option("--out", opt.out, "Output directory (file for simulate)");
      add_model_flags(sub, opt);
    };

    auto* validate = app.add_subcommand("validate", "Check a model file and list every violation");
    add_common(validate);

    auto* analyze = app.add_subcommand("analyze", "Ergodicity, stationary distribution and mixing report");
    add_common(analyze);
    analyze->add_option("--m-max", opt.m_max, "Largest lag of the beta-mixing profile");

    auto* simulate = app.add_subcommand("simulate", "Sample a trajectory to CSV");
    add_common(simulate);
    simulate->add_option("--rounds", opt.rounds, "Number of rounds T");
    simulate->add_option("--start", opt.start, "stationary | fixed:<b1,...,bN>");
    simulate->add_option("--burn-in", opt.burn_in, "Burn-in rounds for fixed starts");
    simulate->add_flag("--record-users", opt.record_users, "Add the user factor column");

    auto* erm_cmd = app.add_subcommand("erm", "Empirical risk minimization over a finite class");
    add_common(erm_cmd);
    erm_cmd->add_option("--class", opt.class_spec, "Class JSON file, 'reference' or 'all'");
    erm_cmd->add_option("--random-members", opt.random_members, "Random tables in the reference class");
    erm_cmd->add_option("--rounds", opt.rounds, "Training rounds T");
    erm_cmd->add_option("--start", opt.start, "stationary | fixed:<b1,...,bN>");
    erm_cmd->add_option("--burn-in", opt.burn_in, "Burn-in rounds for fixed starts");
    erm_cmd->add_option("--loss", opt.loss, "zero_one | hamming");

    auto* bound = app.add_subcommand("bound", "Evaluate a generalization bound");
    add_common(bound);
    bound->add_option("--kind", opt.kind, "pointwise | uniform | corollary")->required();
    bound->add_option("--B", opt.loss_bound, "Loss bound B");
    bound->add_option("--n0", opt.n0, "Primitivity index N0");
    bound->add_option("--delta", opt.delta, "Minimum entry of M^(N0)");
    bound->add_option("--Z", opt.z, "Number of lifted states");
    bound->add_option("--T", opt.rounds, "Number of rounds");
    bound->add_option("--eps", opt.eps, "Deviation level");
    bound->add_option("--cover", opt.cover, "Covering number at radius eps/16");
    bound->add_option("--tau", opt.tau, "Number of block pairs");
    bound->add_option("--beta", opt.beta, "beta-mixing coefficient at the block length");
    bound->add_option("--beta0", opt.beta0, "Algebraic mixing constant");
    bound->add_option("--gamma", opt.gamma, "Algebraic mixing exponent");
    bound->add_option("--s", opt.s, "Block exponent, 0 < s < gamma");
    bound->add_option("--C", opt.c, "Block constant");

    auto* verify = app.add_subcommand("verify", "Monte Carlo dominance check of the bounds");
    add_common(verify);
    verify->add_option("--class", opt.class_spec, "Class JSON file, 'reference' or 'all' (uniform bound)");
    verify->add_option("--random-members", opt.random_members, "Random tables in the reference class");
    verify->add_option("--hypothesis", opt.hypothesis, "Single hypothesis JSON file (pointwise bound)");
    verify->add_option("--loss", opt.loss, "zero_one | hamming");
    verify->add_option("--replicas", opt.replicas, "Replicas R per grid row");
    verify->add_option("--t-grid", opt.t_grid, "Comma-separated T values")->delimiter(',');
    verify->add_option("--eps-grid", opt.eps_grid, "Comma-separated eps values")->delimiter(',');
    verify->add_option("--confidence", opt.confidence, "Clopper-Pearson confidence level");
    verify->add_option("--m-max", opt.m_max, "Largest block length considered");
    verify->add_option("--threads", opt.threads, "Worker threads (0: MCRE_LAB_THREADS or all cores)");

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kInvalidConfig;
    }

    ctx.manifest.args = args;
    for (const auto& f : config_files) record_input(ctx, f);
    CLI::App* active = app.get_subcommands().front();
    ctx.manifest.subcommand = active->get_name();
    if (active == validate) return cmd_validate(ctx);
    if (active == analyze) return cmd_analyze(ctx);
    if (active == simulate) return cmd_simulate(ctx);
    if (active == erm_cmd) return cmd_erm(ctx);
    if (active == bound) return cmd_bound(ctx, *bound);
    return cmd_verify(ctx);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidModel;
  } catch (const PreconditionError& e) {
    err << "precondition violated: " << e.what() << '\n';
    return kPreconditionViolated;
  } catch (const std::domain_error& e) {
    err << "precondition violated: " << e.what() << '\n';
    return kPreconditionViolated;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace mcre::cli
