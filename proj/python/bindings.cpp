#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mcre/analysis.hpp"
#include "mcre/binomial.hpp"
#include "mcre/bounds.hpp"
#include "mcre/cli.hpp"
#include "mcre/error.hpp"
#include "mcre/learner.hpp"
#include "mcre/lifted_chain.hpp"
#include "mcre/model_io.hpp"
#include "mcre/rng.hpp"
#include "mcre/scenario.hpp"
#include "mcre/simulator.hpp"
#include "mcre/verify.hpp"

namespace py = pybind11;
using namespace mcre;

namespace {

LossFunction make_loss(const McreModel& model, const std::string& kind) {
  if (kind == "zero_one") return LossFunction(LossKind::ZeroOneJoint, model.joint_behaviors());
  if (kind == "hamming") return LossFunction(LossKind::HammingPerAgent, model.joint_behaviors());
  throw ConfigError("loss must be 'zero_one' or 'hamming'");
}

py::dict trajectory_dict(const Trajectory& t) {
  std::vector<std::size_t> h, b, bn;
  for (const auto& z : t.z) {
    h.push_back(z.h);
    b.push_back(z.b);
    bn.push_back(z.b_next);
  }
  py::dict d;
  d["h"] = h;
  d["b"] = b;
  d["b_next"] = bn;
  d["u"] = t.users;
  return d;
}

Trajectory trajectory_from(const std::vector<std::size_t>& h, const std::vector<std::size_t>& b,
                           const std::vector<std::size_t>& b_next) {
  if (h.size() != b.size() || b.size() != b_next.size()) throw std::invalid_argument("h, b, b_next lengths differ");
  Trajectory t;
  for (std::size_t i = 0; i < h.size(); ++i) t.z.push_back({h[i], b[i], b_next[i]});
  return t;
}

py::list cells_list(const TailEstimate& est) {
  py::list out;
  for (const auto& c : est.cells) {
    py::dict d;
    d["T"] = c.rounds;
    d["eps"] = c.eps;
    d["hits"] = c.hits;
    d["replicas"] = c.replicas;
    d["freq"] = c.freq;
    d["cp_upper"] = c.cp_upper;
    out.append(d);
  }
  return out;
}

TailExperimentConfig tail_config(std::size_t replicas, std::vector<std::size_t> t_grid, std::vector<double> eps_grid,
                                 std::uint64_t seed, double confidence, std::size_t threads) {
  TailExperimentConfig cfg;
  cfg.replicas = replicas;
  cfg.t_grid = std::move(t_grid);
  cfg.eps_grid = std::move(eps_grid);
  cfg.master_seed = seed;
  cfg.confidence = confidence;
  cfg.threads = threads;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_mcre_lab, m) {
  m.doc() = "Markov chains in random environments: lifted chains, simulation, ERM and bound checks";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::class_<McreModel>(m, "Model")
      .def_property_readonly("agents", &McreModel::agents)
      .def_property_readonly("behavior_labels", [](const McreModel& x) { return x.behaviors().labels(); })
      .def_property_readonly("feedback_labels", [](const McreModel& x) { return x.feedbacks().labels(); })
      .def_property_readonly("user_labels", [](const McreModel& x) { return x.users().labels; })
      .def_property_readonly("joint_behaviors", [](const McreModel& x) { return x.joint_behaviors().size(); })
      .def_property_readonly("joint_feedbacks", [](const McreModel& x) { return x.joint_feedbacks().size(); })
      .def("joint_behavior_label", &McreModel::joint_behavior_label)
      .def("joint_feedback_label", &McreModel::joint_feedback_label)
      .def("feedback_distribution",
           [](const McreModel& x, std::size_t b) { return induced_feedback_distribution(x, b); })
      .def("joint_kernel", [](const McreModel& x, std::size_t k) { return joint_behavior_kernel(x.kernels(), k); })
      .def("to_json", [](const McreModel& x) { return model_to_json(x).dump(); });

  m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));
  m.def("model_from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); },
        py::arg("text"));
  m.def(
      "validate_model",
      [](const std::filesystem::path& p) { return validate_model_file(p).diagnostics; }, py::arg("path"),
      "Diagnostics for a model file; empty when valid.");
  m.def(
      "toy_sponsored_search",
      [](const std::string& text) {
        return toy_sponsored_search(scenario_from_json(nlohmann::json::parse(text.empty() ? "{}" : text)));
      },
      py::arg("scenario_json") = "");

  py::class_<LiftedChain>(m, "LiftedChain")
      .def_property_readonly("size", &LiftedChain::size)
      .def_property_readonly("matrix", &LiftedChain::matrix)
      .def_property_readonly("states", [](const LiftedChain& c) {
        std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
        for (const auto& s : c.states()) out.emplace_back(s.h, s.b, s.b_next);
        return out;
      });
  m.def(
      "lifted_chain",
      [](const McreModel& model, bool prune, std::size_t cap) { return build_lifted_chain(model, {prune, cap}); },
      py::arg("model"), py::arg("prune") = false, py::arg("state_cap") = kDefaultStateCap);

  m.def("is_irreducible", &is_irreducible, py::arg("matrix"));
  m.def("period", &period, py::arg("matrix"));
  m.def("is_ergodic", &is_ergodic, py::arg("matrix"));
  m.def(
      "find_n0_delta",
      [](const Matrix& x) -> std::optional<std::pair<std::size_t, double>> {
        if (const auto r = find_n0_delta(x)) return std::make_pair(r->n0, r->delta);
        return std::nullopt;
      },
      py::arg("matrix"));
  m.def(
      "stationary_distribution",
      [](const Matrix& x) {
        const auto st = stationary_distribution(x);
        return std::make_pair(st.pi, st.residual);
      },
      py::arg("matrix"), "Returns (pi, residual).");
  m.def(
      "beta_mixing", [](const Matrix& x, const Vector& pi, std::size_t m_max) { return beta_mixing(x, pi, m_max).betas; },
      py::arg("matrix"), py::arg("pi"), py::arg("m_max"));
  m.def(
      "analyze_chain",
      [](const Matrix& x) {
        const auto r = analyze_chain(x);
        py::dict d;
        d["irreducible"] = r.irreducible;
        d["period"] = r.period;
        d["ergodic"] = r.ergodic;
        d["n0"] = r.n0;
        d["delta"] = r.delta;
        d["wielandt_cap"] = r.wielandt_cap;
        return d;
      },
      py::arg("matrix"));
  m.def(
      "check_assumptions",
      [](const McreModel& model) {
        const auto r = check_assumptions(model);
        py::dict d;
        d["a1"] = r.a1_ok;
        d["a2"] = r.a2_ok;
        d["per_agent_primitive"] = r.per_agent_primitive;
        d["a2_violations"] = r.a2_violations.size();
        return d;
      },
      py::arg("model"));

  m.def(
      "simulate",
      [](const McreModel& model, std::size_t rounds, std::uint64_t seed, std::uint64_t stream,
         std::optional<std::size_t> fixed_start, std::size_t burn_in, bool record_users) {
        TrajectoryConfig cfg;
        cfg.rounds = rounds;
        cfg.seed = seed;
        cfg.stream = stream;
        if (fixed_start) cfg.start = FixedStart{*fixed_start, burn_in};
        cfg.record_users = record_users;
        return trajectory_dict(sample_trajectory(model, cfg));
      },
      py::arg("model"), py::arg("rounds"), py::arg("seed"), py::arg("stream") = 0, py::arg("fixed_start") = py::none(),
      py::arg("burn_in") = kDefaultBurnIn, py::arg("record_users") = false,
      "Stationary start unless fixed_start (a joint behavior index) is given.");

  py::class_<Hypothesis>(m, "Hypothesis")
      .def(py::init<std::size_t, std::size_t, std::vector<std::size_t>, std::string>(), py::arg("joint_feedbacks"),
           py::arg("joint_behaviors"), py::arg("table"), py::arg("name") = "")
      .def("predict", &Hypothesis::predict)
      .def_property_readonly("table", &Hypothesis::table)
      .def_property_readonly("name", &Hypothesis::name);
  m.def("bayes_rule", &bayes_rule, py::arg("model"));
  m.def("stay_rule", &stay_rule, py::arg("model"));
  m.def("constant_rule", &constant_rule, py::arg("model"), py::arg("joint_behavior"));
  m.def(
      "reference_class",
      [](const McreModel& model, std::size_t random_members, std::uint64_t seed) {
        return reference_class(model, random_members, seed).members();
      },
      py::arg("model"), py::arg("random_members") = 8, py::arg("seed") = 0);

  m.def(
      "empirical_risk",
      [](const McreModel& model, const Hypothesis& f, const std::vector<std::size_t>& h,
         const std::vector<std::size_t>& b, const std::vector<std::size_t>& bn, const std::string& loss) {
        return empirical_risk(f, trajectory_from(h, b, bn), make_loss(model, loss));
      },
      py::arg("model"), py::arg("f"), py::arg("h"), py::arg("b"), py::arg("b_next"), py::arg("loss") = "zero_one");
  m.def(
      "expected_risk",
      [](const McreModel& model, const Hypothesis& f, const std::string& loss, bool prune) {
        const Simulator sim = Simulator::with_stationary(model, {prune, kDefaultStateCap});
        return expected_risk(f, sim.chain(), sim.stationary().pi, make_loss(model, loss));
      },
      py::arg("model"), py::arg("f"), py::arg("loss") = "zero_one", py::arg("prune") = false);
  m.def(
      "erm",
      [](const McreModel& model, const std::vector<Hypothesis>& members, const std::vector<std::size_t>& h,
         const std::vector<std::size_t>& b, const std::vector<std::size_t>& bn, const std::string& loss) {
        const auto r = erm(HypothesisClass(members), trajectory_from(h, b, bn), make_loss(model, loss));
        return std::make_tuple(r.index, r.empirical_risk, r.member_risks);
      },
      py::arg("model"), py::arg("members"), py::arg("h"), py::arg("b"), py::arg("b_next"),
      py::arg("loss") = "zero_one", "Returns (index, empirical risk, per-member risks).");
  m.def("growth_bound", &growth_bound, py::arg("rounds"), py::arg("behavior_count"), py::arg("natarajan_d"));

  m.def("pointwise_bound", &pointwise_bound, py::arg("B"), py::arg("n0"), py::arg("delta"), py::arg("Z"),
        py::arg("T"), py::arg("eps"));
  m.def("pointwise_threshold", &pointwise_threshold, py::arg("B"), py::arg("n0"), py::arg("delta"), py::arg("Z"),
        py::arg("eps"));
  m.def("uniform_bound", &uniform_bound, py::arg("cover"), py::arg("tau"), py::arg("B"), py::arg("eps"),
        py::arg("beta"));
  m.def(
      "optimal_block_size",
      [](double beta0, double gamma, double s, double c, std::size_t rounds) {
        const auto sch = optimal_block_size({beta0, gamma, s, c}, rounds);
        return std::make_pair(sch.scheme.block_m, sch.scheme.tau);
      },
      py::arg("beta0"), py::arg("gamma"), py::arg("s"), py::arg("C"), py::arg("T"), "Returns (block_m, tau).");
  m.def(
      "clopper_pearson",
      [](std::size_t hits, std::size_t trials, double confidence) {
        const auto ci = clopper_pearson(hits, trials, confidence);
        return std::make_pair(ci.lower, ci.upper);
      },
      py::arg("hits"), py::arg("trials"), py::arg("confidence") = 0.99);

  m.def(
      "estimate_deviation_tail",
      [](const McreModel& model, const Hypothesis& f, std::size_t replicas, std::vector<std::size_t> t_grid,
         std::vector<double> eps_grid, std::uint64_t seed, const std::string& loss, double confidence,
         std::size_t threads) {
        const auto cfg = tail_config(replicas, std::move(t_grid), std::move(eps_grid), seed, confidence, threads);
        TailEstimate est;
        {
          py::gil_scoped_release release;
          est = estimate_deviation_tail(model, f, make_loss(model, loss), cfg);
        }
        return cells_list(est);
      },
      py::arg("model"), py::arg("f"), py::arg("replicas"), py::arg("t_grid"), py::arg("eps_grid"), py::arg("seed"),
      py::arg("loss") = "zero_one", py::arg("confidence") = 0.99, py::arg("threads") = 0);

  m.def(
      "philox4x64",
      [](std::array<std::uint64_t, 4> counter, std::array<std::uint64_t, 2> key) { return philox4x64(counter, key); },
      py::arg("counter"), py::arg("key"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one mcre_lab subcommand; returns (exit code, stdout, stderr).");

  m.attr("__version__") = MCRE_LAB_VERSION;
}
