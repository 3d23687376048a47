#pragma once

// Batch jobs: JSON job documents in, deterministic JSON reports out.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wachlab/filmod.hpp"

namespace wachlab {

inline constexpr const char* kReportSchema = "wachlab-report/1";

struct ModuleEntry {
  std::string name;
  FilPhiModule module;
};

struct JobDocument {
  int p = 0;
  int f = 1;
  int N = 20;
  std::size_t M = 0;     // 0: 40(p-1)
  std::size_t M_T = 32;
  std::vector<std::int64_t> modulus;
  std::vector<std::string> commands;
  std::uint64_t seed = 0;
  std::vector<ModuleEntry> modules;
};

struct PrecisionOverrides {
  std::optional<int> N;
  std::optional<std::size_t> M;
  std::optional<std::size_t> M_T;
};

/// One job object, or {"jobs": [...]}. ParseError / ValidationError with the field path.
std::vector<JobDocument> parse_jobs(const std::string& text, const PrecisionOverrides& over = {});
JobDocument parse_job(const std::string& text, const PrecisionOverrides& over = {});

/// Entry text: decimal integer, or "p:d_k...d_0" in base p (most significant digit first).
mpz_class parse_entry(const std::string& text, int p);

std::string serialize_jobs(const std::vector<JobDocument>& jobs);

struct RunResult {
  std::string report;  // JSON, sorted keys
  bool all_ok = false;
};
/// Modules are independent work items; results are placed by index, so the
/// report does not depend on the thread count.
RunResult run_jobs(const std::vector<JobDocument>& jobs, unsigned threads = 1);
RunResult run_job(const JobDocument& job, unsigned threads = 1);

/// Seeded eligible modules, one per job: unit_root_rank = 0 and the Tamagawa
/// and C_EP preconditions hold.
std::vector<JobDocument> generate_corpus(int p, std::size_t d_max, std::size_t count, std::uint64_t seed,
                                         int N = 20);

}  // namespace wachlab
