#include "doctest.h"

#include <random>

#include "json.hpp"
#include "wachlab/job.hpp"

using namespace wachlab;
using json = nlohmann::json;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_jobs(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error for " << text);
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("entries") {
  CHECK(parse_entry("17", 3) == 17);
  CHECK(parse_entry("-4", 3) == -4);
  CHECK(parse_entry("p:102", 3) == 11);
  CHECK(parse_entry("p:a1", 11) == 111);
  CHECK_THROWS_AS(parse_entry("p:3", 3), Error);
  CHECK_THROWS_AS(parse_entry("1.5", 3), Error);
  CHECK_THROWS_AS(parse_entry("", 3), Error);
}

TEST_CASE("parse_job examples") {
  JobDocument job = parse_job(R"({"p": 3, "modules": [{"rank": 1, "jumps": [1], "matrix": [[1]]}]})");
  CHECK(job.p == 3);
  CHECK(job.N == 20);
  REQUIRE(job.modules.size() == 1);
  CHECK(job.modules[0].module.jumps() == std::vector<int>{1});
  CHECK(kind_of(R"({"p": 3, "modules": [{"jumps": [3], "matrix": [[1]]}]})") == ErrorKind::ValidationError);
  CHECK(kind_of(R"({"p": 3, "modules": [{"jumps": [0, 0], "matrix": [[1, 2], [2, 4]]}]})") == ErrorKind::ValidationError);
  CHECK(kind_of(R"({"p": 4, "modules": []})") == ErrorKind::ValidationError);
  CHECK(kind_of(R"({"p": 3, "modules": [{"jumps": [0], "matrix": [[1, 2]]}]})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"p": 3, "commands": ["frobnicate"]})") == ErrorKind::ParseError);
  CHECK(kind_of("{\"p\": 3,\n \"modules\": [") == ErrorKind::ParseError);
}

TEST_CASE("parse errors carry the field path") {
  try {
    parse_jobs(R"({"jobs": [{"p": 3}, {"p": 3, "modules": [{"jumps": [0], "matrix": [[true]]}]}]})");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("jobs[1].modules[0].matrix[0][0]") != std::string::npos);
  }
  try {
    parse_jobs("{\"p\": 3,\n\n  \"modules\": [}");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("unramified entries") {
  JobDocument job = parse_job(R"({"p": 3, "f": 2, "modules": [{"jumps": [0], "matrix": [[[1, 1]]]}]})");
  CHECK(job.modules[0].module.A()(0, 0).coefficient(1) == 1);
}

TEST_CASE("run_job examples") {
  auto r = run_job(parse_job(R"({"p": 3, "commands": ["wach", "tam", "cep"],
                                  "modules": [{"jumps": [1], "matrix": [[1]]}]})"));
  json rep = json::parse(r.report);
  CHECK(rep["schema"] == kReportSchema);
  const json& res = rep["jobs"][0]["modules"][0]["results"];
  CHECK(res["wach"]["relation_exact"] == true);
  CHECK(res["wach"]["residual_valuation"] == res["wach"]["M"]);
  CHECK(res["tam"]["exponent"] == 0);
  CHECK(res["cep"]["verdict"] == true);
  CHECK(r.all_ok);

  auto s = run_job(parse_job(R"({"p": 5, "commands": ["slopes"],
                                  "modules": [{"jumps": [0, 1], "matrix": [[0, 1], [1, 0]]}]})"));
  json srep = json::parse(s.report);
  CHECK(srep["jobs"][0]["modules"][0]["results"]["slopes"]["slopes"] == json::array({"1/2", "1/2"}));

  auto e = run_job(parse_job(R"({"p": 3, "modules": [{"jumps": [1], "matrix": [[1]]}]})"));
  json erep = json::parse(e.report);
  CHECK(erep["jobs"][0]["modules"][0]["results"].empty());
  CHECK(e.all_ok);
}

TEST_CASE("errors become report entries") {
  // Trivial jumps with phi = 1: det(1 - phi) = 0.
  auto r = run_job(parse_job(R"({"p": 5, "commands": ["tam", "check"],
                                  "modules": [{"jumps": [0], "matrix": [[1]]}]})"));
  json rep = json::parse(r.report);
  const json& res = rep["jobs"][0]["modules"][0]["results"];
  CHECK(res["tam"]["error"]["kind"] == "Degenerate");
  CHECK(res["check"]["verdict"] == true);
  CHECK_FALSE(r.all_ok);
  CHECK(rep["summary"]["errors"] == 1);
}

TEST_CASE("generate_corpus") {
  auto a = generate_corpus(3, 3, 10, 1);
  CHECK(a.size() == 10);
  CHECK(generate_corpus(3, 3, 0, 1).empty());
  CHECK(serialize_jobs(a) == serialize_jobs(generate_corpus(3, 3, 10, 1)));
  CHECK(serialize_jobs(a) != serialize_jobs(generate_corpus(3, 3, 10, 2)));
  auto back = parse_jobs(serialize_jobs(a));
  CHECK(serialize_jobs(back) == serialize_jobs(a));
  auto r = run_jobs(back);
  CHECK(r.all_ok);
  CHECK_THROWS_AS(generate_corpus(11, 3, 1, 1), Error);
}

TEST_CASE("reports do not depend on the thread count") {
  auto jobs = generate_corpus(5, 3, 12, 3);
  for (auto& j : jobs) j.commands.push_back("iwasawa-check");
  const std::string one = run_jobs(jobs, 1).report;
  CHECK(one == run_jobs(jobs, 1).report);
  CHECK(one == run_jobs(jobs, 3).report);
  CHECK(one == run_jobs(jobs, 8).report);
}

TEST_CASE("malformed documents never crash") {
  const std::string base = R"({"p": 3, "commands": ["check", "tam"], "modules": [{"jumps": [0, 1], "matrix": [[1, "p:12"], [2, 0]], "shift": -1}]})";
  std::mt19937_64 rng(0xf022);
  const std::string alphabet = "{}[]\":,-0123456789pabc \n";
  int structured = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string doc = base;
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) {
      const std::size_t pos = rng() % doc.size();
      switch (rng() % 3) {
        case 0: doc[pos] = alphabet[rng() % alphabet.size()]; break;
        case 1: doc.erase(pos, 1); break;
        default: doc.insert(pos, 1, alphabet[rng() % alphabet.size()]);
      }
    }
    try {
      auto r = run_jobs(parse_jobs(doc));
      CHECK(json::parse(r.report).contains("summary"));
    } catch (const Error& e) {
      const bool kind_ok = e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError;
      CHECK(kind_ok);
      ++structured;
    }
  }
  CHECK(structured > 0);
}
