#include "pollreg/routing.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "pollreg/errors.hpp"

namespace pollreg {

namespace {

bool edge(const Matrix& p, int i, int j) {
  return std::abs(p.at(i, j)) > kEdgeZeroTolerance;
}

// Set of stations reachable from start along (possibly reversed) edges.
std::vector<bool> reachable(const Matrix& p, int start, bool reversed) {
  const int d = p.rows;
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  std::queue<int> frontier;
  frontier.push(start);
  seen[start] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v = 0; v < d; ++v) {
      const bool connected = reversed ? edge(p, v, u) : edge(p, u, v);
      if (connected && !seen[v]) {
        seen[v] = true;
        frontier.push(v);
      }
    }
  }
  return seen;
}

std::string missing_stations(const std::vector<bool>& seen) {
  std::ostringstream out;
  bool first = true;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      if (!first) out << ", ";
      out << (i + 1);  // 1-based in messages
      first = false;
    }
  }
  return out.str();
}

// Period of an irreducible chain: gcd over edges (u,v) of level(u)+1-level(v)
// where levels come from a BFS tree rooted at station 0.
int chain_period(const Matrix& p) {
  const int d = p.rows;
  std::vector<int> level(static_cast<std::size_t>(d), -1);
  std::queue<int> frontier;
  frontier.push(0);
  level[0] = 0;
  int g = 0;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v = 0; v < d; ++v) {
      if (!edge(p, u, v)) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      } else {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g == 0 ? 1 : g;
}

}  // namespace

const char* to_string(RoutingDefect defect) {
  switch (defect) {
    case RoutingDefect::BadDimension: return "BadDimension";
    case RoutingDefect::NotStochastic: return "NotStochastic";
    case RoutingDefect::SelfLoop: return "SelfLoop";
    case RoutingDefect::Reducible: return "Reducible";
  }
  return "Unknown";
}

RoutingValidation validate(const RoutingChain& chain) {
  RoutingValidation result;
  const int d = chain.d;
  if (d < 2 || chain.p.rows != d || chain.p.cols != d) {
    result.violations.push_back(
        {RoutingDefect::BadDimension, -1,
         "need at least two stations and a matching square matrix"});
    return result;
  }

  for (int i = 0; i < d; ++i) {
    double sum = 0.0;
    bool row_ok = true;
    for (int j = 0; j < d; ++j) {
      const double v = chain.p.at(i, j);
      if (v < 0.0 || v > 1.0 + kRowSumTolerance || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "row " << (i + 1) << " entry " << (j + 1)
            << " outside [0, 1]: " << v;
        result.violations.push_back({RoutingDefect::NotStochastic, i, msg.str()});
        row_ok = false;
      }
      sum += v;
    }
    if (row_ok && std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg << "row " << (i + 1) << " sums to " << sum;
      result.violations.push_back({RoutingDefect::NotStochastic, i, msg.str()});
    }
    if (edge(chain.p, i, i)) {
      std::ostringstream msg;
      msg << "station " << (i + 1) << " routes to itself";
      result.violations.push_back({RoutingDefect::SelfLoop, i, msg.str()});
    }
  }
  if (!result.violations.empty()) return result;

  const auto forward = reachable(chain.p, 0, false);
  const auto backward = reachable(chain.p, 0, true);
  for (int i = 0; i < d; ++i) {
    if (!forward[i]) {
      result.violations.push_back(
          {RoutingDefect::Reducible, -1,
           "stations unreachable from station 1: " + missing_stations(forward)});
      break;
    }
  }
  for (int i = 0; i < d; ++i) {
    if (!backward[i]) {
      result.violations.push_back(
          {RoutingDefect::Reducible, -1,
           "stations that cannot reach station 1: " +
               missing_stations(backward)});
      break;
    }
  }
  if (!result.violations.empty()) return result;

  result.ok = true;
  result.period = chain_period(chain.p);
  return result;
}

StationaryLaw stationary_distribution(const RoutingChain& chain) {
  const auto check = validate(chain);
  if (!check.ok) {
    throw ReducibleChainError("invalid routing chain: " +
                              check.violations.front().detail);
  }
  const int d = chain.d;

  // Least squares on the overdetermined system [P^T - I; 1^T] pi = e_{d+1},
  // via its normal equations. The system is consistent (pi solves it
  // exactly), so the least-squares solution is the stationary law itself.
  Matrix normal(d, d);
  std::vector<double> rhs(static_cast<std::size_t>(d), 1.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double acc = 1.0;  // ones-row contribution
      for (int k = 0; k < d; ++k) {
        // Entry (k, i) of [P^T - I] is P(i, k) - [i == k].
        const double aki = chain.p.at(i, k) - (i == k ? 1.0 : 0.0);
        const double akj = chain.p.at(j, k) - (j == k ? 1.0 : 0.0);
        acc += aki * akj;
      }
      normal.at(i, j) = acc;
    }
  }
  auto pi = solve_dense(std::move(normal), std::move(rhs));

  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;

  // The solve is direct; treat a bad residual as a numerical failure.
  const auto image = matvec_transposed(chain.p, pi);
  for (int i = 0; i < d; ++i) {
    if (std::abs(image[i] - pi[i]) > 1e-10 || !(pi[i] > 0.0)) {
      throw NoConvergenceError("stationary distribution residual too large");
    }
  }
  return StationaryLaw{std::move(pi)};
}

}  // namespace pollreg
