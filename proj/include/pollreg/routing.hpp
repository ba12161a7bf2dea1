#pragma once

#include <string>
#include <vector>

#include "pollreg/matrix.hpp"

// Station routing: the irreducible Markov chain that picks which station
// opens next. Rows are "server currently at i", columns "next open j".
// Diagonal entries must be zero (the server never reopens its own station)
// and the chain may be periodic; periodicity is reported, never rejected.

namespace pollreg {

struct RoutingChain {
  int d = 0;    // number of stations, at least 2
  Matrix p;     // d x d, row-stochastic, zero diagonal
};

struct StationaryLaw {
  std::vector<double> pi;  // strictly positive, sums to one
};

enum class RoutingDefect { BadDimension, NotStochastic, SelfLoop, Reducible };

struct RoutingViolation {
  RoutingDefect kind;
  int index;           // offending row/station (0-based), -1 if global
  std::string detail;
};

struct RoutingValidation {
  bool ok = false;
  int period = 0;      // gcd of cycle lengths; meaningful only when ok
  std::vector<RoutingViolation> violations;
};

// Entries below this magnitude count as structural zeros when building the
// transition graph.
constexpr double kEdgeZeroTolerance = 1e-15;

// Row sums may deviate from one by at most this much.
constexpr double kRowSumTolerance = 1e-9;

RoutingValidation validate(const RoutingChain& chain);

const char* to_string(RoutingDefect defect);

// Unique stationary distribution of an irreducible chain, computed by a
// direct dense solve (power iteration is not used: the chain may be
// periodic). Throws ReducibleChainError when validate() fails.
StationaryLaw stationary_distribution(const RoutingChain& chain);

}  // namespace pollreg
