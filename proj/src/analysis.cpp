#include "mcre/analysis.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mcre {
namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument(std::string(what) + ": expected a non-empty square matrix");
}

std::vector<std::vector<std::size_t>> support_lists(const Matrix& m) {
  std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) > 0.0) adj[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(j));
  return adj;
}

// Period of the class `members` using BFS levels: gcd of level(u) + 1 - level(v)
// over edges inside the class.
std::size_t class_period(const std::vector<std::vector<std::size_t>>& adj,
                         const std::vector<std::size_t>& members) {
  std::vector<char> in_class(adj.size(), 0);
  for (auto v : members) in_class[v] = 1;
  std::vector<std::ptrdiff_t> level(adj.size(), -1);
  std::vector<std::size_t> queue{members.front()};
  level[members.front()] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    for (auto v : adj[u])
      if (in_class[v] && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
  }
  std::size_t g = 0;
  for (auto u : members)
    for (auto v : adj[u])
      if (in_class[v])
        g = std::gcd(g, static_cast<std::size_t>(std::abs(level[u] + 1 - level[v])));
  return g;
}

using Bits = std::vector<std::uint64_t>;

}  // namespace

std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& matrix) {
  require_square(matrix, "strongly_connected_components");
  const auto adj = support_lists(matrix);
  const std::size_t n = adj.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  // Iterative Tarjan: frames hold (vertex, next successor position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adj[v].size()) {
        const auto w = adj[v][pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const auto done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> component;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          component.push_back(w);
        } while (w != done);
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
      }
    }
  }
  return components;
}

bool is_irreducible(const Matrix& matrix) {
  return strongly_connected_components(matrix).size() == 1;
}

std::size_t period(const Matrix& matrix) {
  const auto components = strongly_connected_components(matrix);
  if (components.size() != 1) throw std::domain_error("period: matrix is reducible");
  return class_period(support_lists(matrix), components.front());
}

bool is_ergodic(const Matrix& matrix) {
  const auto components = strongly_connected_components(matrix);
  const auto adj = support_lists(matrix);
  std::vector<std::size_t> component_of(adj.size());
  for (std::size_t c = 0; c < components.size(); ++c)
    for (auto v : components[c]) component_of[v] = c;
  std::optional<std::size_t> closed;
  for (std::size_t c = 0; c < components.size(); ++c) {
    bool leaves = false;
    for (auto v : components[c])
      for (auto w : adj[v]) leaves = leaves || component_of[w] != c;
    if (leaves) continue;
    if (closed) return false;
    closed = c;
  }
  return closed && class_period(adj, components[*closed]) == 1;
}

std::uint64_t wielandt_cap(std::size_t z) {
  const auto zz = static_cast<std::uint64_t>(z);
  return zz * zz - 2 * zz + 2;
}

std::optional<N0Delta> find_n0_delta(const Matrix& matrix) {
  require_square(matrix, "find_n0_delta");
  // Primitive iff irreducible and aperiodic; otherwise no power within the
  // Wielandt bound is positive and the search can stop here.
  if (!is_irreducible(matrix) || period(matrix) != 1) return std::nullopt;

  const auto z = static_cast<std::size_t>(matrix.rows());
  const std::size_t words = (z + 63) / 64;
  std::vector<Bits> support(z, Bits(words, 0));
  for (std::size_t i = 0; i < z; ++i)
    for (std::size_t j = 0; j < z; ++j)
      if (matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0)
        support[i][j / 64] |= std::uint64_t{1} << (j % 64);
  const auto all_set = [&](const Bits& row) {
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t expect =
          (w + 1 == words && z % 64 != 0) ? (std::uint64_t{1} << (z % 64)) - 1 : ~std::uint64_t{0};
      if (row[w] != expect) return false;
    }
    return true;
  };

  // reach[i] = support of row i of M^(n).
  std::vector<Bits> reach = support;
  std::size_t n0 = 1;
  const auto cap = wielandt_cap(z);
  while (!std::all_of(reach.begin(), reach.end(), all_set)) {
    if (++n0 > cap) return std::nullopt;
    std::vector<Bits> next(z, Bits(words, 0));
    for (std::size_t i = 0; i < z; ++i)
      for (std::size_t j = 0; j < z; ++j)
        if (reach[i][j / 64] >> (j % 64) & 1)
          for (std::size_t w = 0; w < words; ++w) next[i][w] |= support[j][w];
    reach = std::move(next);
  }

  Matrix power = Matrix::Identity(matrix.rows(), matrix.cols());
  Matrix base = matrix;
  for (std::size_t e = n0; e > 0; e >>= 1) {
    if (e & 1) power = power * base;
    if (e > 1) base = base * base;
  }
  return N0Delta{n0, power.minCoeff()};
}

double stationary_residual(const Matrix& matrix, const Vector& pi) {
  return (matrix.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

StationaryDistribution stationary_by_linear_solve(const Matrix& matrix) {
  require_square(matrix, "stationary_by_linear_solve");
  const Eigen::Index z = matrix.rows();
  Matrix system = matrix.transpose() - Matrix::Identity(z, z);
  system.row(z - 1).setOnes();
  Vector rhs = Vector::Zero(z);
  rhs[z - 1] = 1.0;
  Vector pi = system.fullPivLu().solve(rhs);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  StationaryDistribution out;
  out.pi = std::move(pi);
  out.residual = stationary_residual(matrix, out.pi);
  out.used_linear_solve = true;
  return out;
}

StationaryDistribution stationary_distribution(const Matrix& matrix, StationaryOptions options) {
  require_square(matrix, "stationary_distribution");
  if (!is_ergodic(matrix))
    throw std::domain_error(
        "stationary_distribution: chain needs a single closed class that is aperiodic");
  const Eigen::Index z = matrix.rows();
  const Matrix transposed = matrix.transpose();
  Vector pi = Vector::Constant(z, 1.0 / static_cast<double>(z));
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Vector next = transposed * pi;
    const double residual = (next - pi).cwiseAbs().maxCoeff();
    if (residual <= options.tol) {
      pi /= pi.sum();
      StationaryDistribution out;
      out.residual = stationary_residual(matrix, pi);
      out.pi = std::move(pi);
      out.iterations = it;
      if (out.residual <= options.tol) return out;
      break;
    }
    pi = std::move(next);
  }
  auto solved = stationary_by_linear_solve(matrix);
  if (solved.residual > options.tol)
    throw std::runtime_error("stationary_distribution: no convergence (residual " +
                             std::to_string(solved.residual) + ")");
  solved.iterations = options.max_iterations;
  return solved;
}

MixingProfile beta_mixing(const Matrix& matrix, const Vector& pi, std::size_t m_max) {
  require_square(matrix, "beta_mixing");
  if (m_max < 1) throw std::invalid_argument("beta_mixing: m_max must be at least 1");
  if (pi.size() != matrix.rows()) throw std::invalid_argument("beta_mixing: pi has wrong length");
  MixingProfile profile;
  profile.betas.reserve(m_max);
  // M^m - 1 pi = (M - 1 pi)^m for stationary pi. Powering the deviation keeps
  // relative accuracy as beta decays instead of flooring at the rounding error of M^m.
  const Matrix deviation = matrix - Vector::Ones(matrix.rows()) * pi.transpose();
  Matrix power = deviation;
  for (std::size_t m = 1; m <= m_max; ++m) {
    double beta = 0.0;
    for (Eigen::Index x = 0; x < power.rows(); ++x) {
      if (pi[x] == 0.0) continue;
      beta += pi[x] * 0.5 * power.row(x).cwiseAbs().sum();
    }
    profile.betas.push_back(std::clamp(beta, 0.0, 1.0));
    if (m < m_max) power = power * deviation;
  }
  return profile;
}

ErgodicityReport analyze_chain(const Matrix& matrix) {
  ErgodicityReport report;
  report.irreducible = is_irreducible(matrix);
  if (report.irreducible) report.period = period(matrix);
  report.ergodic = is_ergodic(matrix);
  report.wielandt_cap = wielandt_cap(static_cast<std::size_t>(matrix.rows()));
  if (const auto found = find_n0_delta(matrix)) {
    report.n0 = found->n0;
    report.delta = found->delta;
  }
  return report;
}

AssumptionReport check_assumptions(const McreModel& model) {
  AssumptionReport report;
  for (std::size_t k = 0; k < model.joint_feedbacks().size(); ++k) {
    const Matrix mk = joint_behavior_kernel(model.kernels(), k);
    KernelFailure f{k, is_irreducible(mk), std::nullopt};
    if (f.irreducible) f.period = period(mk);
    if (!f.irreducible || *f.period != 1) report.a1_failures.push_back(f);
  }
  report.a1_ok = report.a1_failures.empty();

  for (std::size_t m = 0; m < model.joint_behaviors().size(); ++m) {
    const Vector q = induced_feedback_distribution(model, m);
    for (Eigen::Index k = 0; k < q.size(); ++k)
      if (!(q[k] > 0.0)) report.a2_violations.push_back({m, static_cast<std::size_t>(k)});
  }
  report.a2_ok = report.a2_violations.empty();

  report.per_agent_primitive = true;
  for (std::size_t a = 0; a < model.agents(); ++a)
    for (std::size_t k = 0; k < model.feedbacks().size(); ++k) {
      const Matrix& mk = model.kernels().kernel(a, k);
      if (!is_irreducible(mk) || period(mk) != 1) report.per_agent_primitive = false;
    }
  return report;
}

}  // namespace mcre
