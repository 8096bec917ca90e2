// Command-line front end: gen, route, simulate, verify, bench.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "edgeroute/types.hpp"

namespace edgeroute {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitRuntime = 3 };

struct BenchOptions {
  std::vector<NodeId> sizes{1024, 4096};
  std::vector<int> workers{1, 2, 4, 8};
  int repetitions = 3;
  std::uint64_t seed = 1;
  double density = 0.05;
};

struct BenchCell {
  NodeId n = 0;
  int workers = 0;  // 0 is the sequential engine
  double median_ms = 0.0;
  bool correct = true;
};

struct BenchReport {
  std::vector<BenchCell> cells;
  std::size_t failures = 0;
};

/// Times sequential and parallel runs; every parallel run is checked against
/// the sequential distances and settle order.
BenchReport run_bench(const BenchOptions& options);

/// args excludes the program name.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace edgeroute
