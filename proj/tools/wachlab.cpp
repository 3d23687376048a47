#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "wachlab/errors.hpp"
#include "wachlab/job.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) wachlab::raise(wachlab::ErrorKind::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  f << text;
}

std::string error_report(const wachlab::Error& e) {
  nlohmann::json j{{"schema", wachlab::kReportSchema},
                   {"error", {{"kind", std::string(wachlab::to_string(e.kind()))}, {"message", e.detail()}}},
                   {"summary", {{"all_ok", false}}}};
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wachlab: Wach modules, Tamagawa exponents and Iwasawa bookkeeping"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a job document and write a JSON report");
  std::string input, output;
  std::optional<int> N;
  std::optional<std::size_t> M, MT;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> commands;
  unsigned threads = 1;
  run->add_option("input", input, "job document (JSON)")->required();
  run->add_option("-o,--output", output, "report path (stdout if omitted)");
  run->add_option("--N", N, "p-adic precision");
  run->add_option("--M", M, "pi-adic truncation for Wach modules");
  run->add_option("--MT", MT, "T-truncation for the Iwasawa layer");
  run->add_option("--seed", seed, "seed for randomized checks");
  run->add_option("--commands", commands, "override the job's command list")->delimiter(',');
  run->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));

  auto* gen = app.add_subcommand("generate", "write a seeded corpus of eligible modules");
  int p = 3, gN = 20;
  std::size_t d_max = 3, count = 10;
  std::uint64_t gseed = 1;
  std::string gout;
  gen->add_option("--p", p, "prime (3, 5 or 7)");
  gen->add_option("--d-max", d_max, "maximal rank");
  gen->add_option("--count", count, "number of modules");
  gen->add_option("--seed", gseed, "generator seed");
  gen->add_option("--N", gN, "p-adic precision");
  gen->add_option("-o,--output", gout, "corpus path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    try {
      emit(wachlab::serialize_jobs(wachlab::generate_corpus(p, d_max, count, gseed, gN)), gout);
      return 0;
    } catch (const wachlab::Error& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
  }

  std::vector<wachlab::JobDocument> jobs;
  try {
    wachlab::PrecisionOverrides over{N, M, MT};
    jobs = wachlab::parse_jobs(read_file(input), over);
  } catch (const wachlab::Error& e) {
    emit(error_report(e), output);
    std::cerr << e.what() << "\n";
    return 2;
  }
  for (auto& job : jobs) {
    if (!commands.empty()) job.commands = commands;
    if (seed) job.seed = *seed;
  }
  for (const auto& c : commands)
    if (c != "check" && c != "wach" && c != "tam" && c != "cep" && c != "slopes" && c != "iwasawa-check") {
      wachlab::Error e(wachlab::ErrorKind::ParseError, "--commands: unknown command '" + c + "'");
      emit(error_report(e), output);
      std::cerr << e.what() << "\n";
      return 2;
    }
  auto result = wachlab::run_jobs(jobs, threads);
  emit(result.report, output);
  return result.all_ok ? 0 : 1;
}
