#include "wachlab/job.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <random>
#include <set>
#include <thread>

#include "json.hpp"

#include "wachlab/cep.hpp"
#include "wachlab/iwasawa.hpp"
#include "wachlab/wach.hpp"

namespace wachlab {

using json = nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"check", "wach", "tam", "cep", "slopes", "iwasawa-check"};

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
  raise(ErrorKind::ParseError, (path.empty() ? std::string("document") : path) + ": " + msg);
}

const json* field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

long long get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) parse_fail(path, "expected an integer");
  return v.get<long long>();
}

std::size_t get_size(const json& v, const std::string& path) {
  long long x = get_int(v, path);
  if (x < 0) parse_fail(path, "expected a non-negative integer");
  return static_cast<std::size_t>(x);
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') ++line, col = 1;
    else ++col;
  }
  return {line, col};
}

mpz_class entry_value(const json& v, int p, const std::string& path) {
  if (v.is_number_integer()) {
    if (v.is_number_unsigned()) return mpz_class(std::to_string(v.get<unsigned long long>()));
    return mpz_class(std::to_string(v.get<long long>()));
  }
  if (v.is_string()) {
    try {
      return parse_entry(v.get<std::string>(), p);
    } catch (const Error& e) {
      parse_fail(path, e.detail());
    }
  }
  parse_fail(path, "matrix entry must be an integer or a string");
}

OFElement parse_element(const json& v, const ContextPtr& ctx, const std::string& path) {
  const int f = ctx->f();
  if (f == 1 && !v.is_array()) return OFElement::from_mpz(ctx, entry_value(v, ctx->p(), path));
  if (!v.is_array() || v.size() > static_cast<std::size_t>(f))
    parse_fail(path, "expected an array of at most " + std::to_string(f) + " coefficients");
  std::vector<u64> res(static_cast<std::size_t>(f), 0);
  for (std::size_t k = 0; k < v.size(); ++k)
    res[k] = ctx->reduce(entry_value(v[k], ctx->p(), path + "[" + std::to_string(k) + "]"));
  return OFElement::from_residues(ctx, res);
}

ModuleEntry parse_module(const json& m, const ContextPtr& ctx, std::size_t index, const std::string& path) {
  if (!m.is_object()) parse_fail(path, "expected an object");
  std::string name = "m" + std::to_string(index);
  if (auto v = field(m, "name")) {
    if (!v->is_string()) parse_fail(path + ".name", "expected a string");
    name = v->get<std::string>();
  }
  auto jv = field(m, "jumps");
  if (!jv || !jv->is_array() || jv->empty()) parse_fail(path + ".jumps", "expected a non-empty array");
  std::vector<int> jumps;
  for (std::size_t i = 0; i < jv->size(); ++i)
    jumps.push_back(static_cast<int>(get_int((*jv)[i], path + ".jumps[" + std::to_string(i) + "]")));
  const std::size_t d = jumps.size();
  if (auto r = field(m, "rank"))
    if (get_size(*r, path + ".rank") != d) parse_fail(path + ".rank", "does not match the number of jumps");
  auto mv = field(m, "matrix");
  if (!mv || !mv->is_array() || mv->size() != d) parse_fail(path + ".matrix", "expected " + std::to_string(d) + " rows");
  OFMatrix A(ctx, d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::string rp = path + ".matrix[" + std::to_string(i) + "]";
    const json& row = (*mv)[i];
    if (!row.is_array() || row.size() != d) parse_fail(rp, "expected " + std::to_string(d) + " entries");
    for (std::size_t j = 0; j < d; ++j) A(i, j) = parse_element(row[j], ctx, rp + "[" + std::to_string(j) + "]");
  }
  int shift = 0;
  if (auto s = field(m, "shift")) shift = static_cast<int>(get_int(*s, path + ".shift"));
  try {
    return ModuleEntry{name, FilPhiModule::create(std::move(jumps), std::move(A), shift)};
  } catch (const Error& e) {
    raise(e.kind(), path + ": " + e.detail());
  }
}

JobDocument parse_job_object(const json& doc, const PrecisionOverrides& over, const std::string& path) {
  if (!doc.is_object()) parse_fail(path, "expected an object");
  JobDocument job;
  const std::string pre = path.empty() ? "" : path + ".";
  auto pv = field(doc, "p");
  if (!pv) parse_fail(pre + "p", "missing");
  job.p = static_cast<int>(get_int(*pv, pre + "p"));
  if (auto v = field(doc, "f")) job.f = static_cast<int>(get_int(*v, pre + "f"));
  if (auto prec = field(doc, "precision")) {
    if (!prec->is_object()) parse_fail(pre + "precision", "expected an object");
    if (auto v = field(*prec, "N")) job.N = static_cast<int>(get_int(*v, pre + "precision.N"));
    if (auto v = field(*prec, "M")) job.M = get_size(*v, pre + "precision.M");
    if (auto v = field(*prec, "M_T")) job.M_T = get_size(*v, pre + "precision.M_T");
  }
  if (over.N) job.N = *over.N;
  if (over.M) job.M = *over.M;
  if (over.M_T) job.M_T = *over.M_T;
  if (auto v = field(doc, "modulus")) {
    if (!v->is_array()) parse_fail(pre + "modulus", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i)
      job.modulus.push_back(get_int((*v)[i], pre + "modulus[" + std::to_string(i) + "]"));
  }
  if (auto v = field(doc, "seed")) {
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<long long>() < 0))
      parse_fail(pre + "seed", "expected a non-negative integer");
    job.seed = v->get<std::uint64_t>();
  }
  if (auto v = field(doc, "commands")) {
    if (!v->is_array()) parse_fail(pre + "commands", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string cp = pre + "commands[" + std::to_string(i) + "]";
      if (!(*v)[i].is_string()) parse_fail(cp, "expected a string");
      std::string c = (*v)[i].get<std::string>();
      if (!kCommands.count(c)) parse_fail(cp, "unknown command '" + c + "'");
      job.commands.push_back(c);
    }
  }
  ContextPtr ctx;
  try {
    ctx = PrecisionContext::create(job.p, job.f, job.N, job.modulus);
  } catch (const Error& e) {
    raise(ErrorKind::ValidationError, pre + "p: " + e.detail());
  }
  if (job.M_T < 1) raise(ErrorKind::ValidationError, pre + "precision.M_T: must be at least 1");
  auto mods = field(doc, "modules");
  if (mods) {
    if (!mods->is_array()) parse_fail(pre + "modules", "expected an array");
    for (std::size_t i = 0; i < mods->size(); ++i)
      job.modules.push_back(parse_module((*mods)[i], ctx, i, pre + "modules[" + std::to_string(i) + "]"));
  }
  return job;
}

bool has_command(const JobDocument& job, const char* c) {
  return std::find(job.commands.begin(), job.commands.end(), c) != job.commands.end();
}

json error_json(ErrorKind kind, const std::string& detail) {
  return json{{"error", {{"kind", std::string(to_string(kind))}, {"message", detail}}}, {"verdict", false}};
}

json guarded(const std::function<json()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_json(e.kind(), e.detail());
  } catch (const std::exception& e) {
    return json{{"error", {{"kind", "InternalError"}, {"message", e.what()}}}, {"verdict", false}};
  }
}

json slopes_json(const std::vector<mpq_class>& slopes) {
  json out = json::array();
  for (const auto& s : slopes) out.push_back(slope_to_string(s));
  return out;
}

json run_check(const FilPhiModule& D) {
  const auto sd = strong_divisibility_check(export_raw(D, OFMatrix::identity(D.context(), D.rank())));
  json out{{"valid", true}, {"strongly_divisible", sd.strongly_divisible}};
  if (!sd.strongly_divisible) out["reason"] = sd.reason;
  out["verdict"] = sd.strongly_divisible;
  return out;
}

json run_slopes(const FilPhiModule& D) {
  const auto slopes = newton_slopes(D.phi_matrix());
  const auto zero = static_cast<std::size_t>(std::count(slopes.begin(), slopes.end(), mpq_class(0)));
  return json{{"slopes", slopes_json(slopes)},
              {"slope_zero_multiplicity", zero},
              {"verdict", zero == unit_root_rank(D)}};
}

json run_wach(const FilPhiModule& D, const JobDocument& job) {
  const auto flags = category_membership(D);
  std::string eligibility;
  if (flags.ab_star) eligibility = "unit_root_rank";
  else if (flags.a_star_b) eligibility = "top_slope_absent";
  else
    raise(ErrorKind::Degenerate, "neither unit_root_rank = 0 nor top_slope_absent holds");
  const mpz_class c = 1 + job.p;
  WachOptions opts;
  opts.M = job.M;
  WachData W = gamma_matrix(D, c, opts);
  const auto& ctx = D.context();
  const bool relation = W.residual_valuation == W.M;
  const bool p_mod = W.P.mod_pi() == D.phi_matrix();
  const std::size_t g_val = (W.G - SeriesMatrix::identity(ctx, D.rank(), W.M)).pi_valuation();
  const bool g_cong = g_val >= static_cast<std::size_t>(job.p - 1);
  const bool q_cok = check_q_cokernel(W);
  return json{{"eligibility", eligibility},
              {"c", c.get_str()},
              {"M", W.M},
              {"iterations", W.iterations},
              {"residual_valuation", W.residual_valuation},
              {"relation_exact", relation},
              {"P_mod_pi_equals_Phi", p_mod},
              {"G_minus_Id_pi_valuation", g_val},
              {"G_congruent_Id", g_cong},
              {"q_cokernel", q_cok},
              {"verdict", relation && p_mod && g_cong && q_cok}};
}

json run_tam(const FilPhiModule& D) {
  const TamagawaReport t = tamagawa(D);
  return json{{"exponent", t.exponent},
              {"torsion", t.torsion},
              {"sequence", t.sequence},
              {"tangent_rank", t.tangent_rank},
              {"verdict", t.exponent == 0}};
}

json run_cep(const FilPhiModule& D) {
  const CepReport r = cep_check(D);
  return json{{"tam_exponent_V", r.tam_exponent_V},
              {"tam_exponent_dual", r.tam_exponent_dual},
              {"det_minus_phi_dual_vp", r.det_minus_phi_dual_vp},
              {"gamma_star_total_vp", r.gamma_star_total_vp},
              {"eta_exponent", r.eta_exponent},
              {"cep_lattice_exponent", r.cep_lattice_exponent},
              {"tam_form_exponent", r.tam_form_exponent},
              {"verdict", r.verdict}};
}

json module_json(const ModuleEntry& entry, const JobDocument& job, std::size_t index) {
  const FilPhiModule& D = entry.module;
  json out;
  out["index"] = index;
  out["name"] = entry.name;
  out["rank"] = D.rank();
  out["jumps"] = D.jumps();
  out["shift"] = D.shift();
  out["hodge_tate_weights"] = D.hodge_tate_weights();
  const auto h = hodge_invariants(D);
  json hn = json::object();
  for (const auto& [j, n] : h.h) hn[std::to_string(j)] = n;
  out["hodge_numbers"] = hn;
  out["t_H"] = h.t_H;
  out["unit_root_rank"] = unit_root_rank(D);
  const auto flags = category_membership(D);
  out["category"] = json{{"ab_star", flags.ab_star}, {"a_star_b", flags.a_star_b}, {"both", flags.both}};
  json results = json::object();
  for (const auto& c : job.commands) {
    if (c == "check") results[c] = guarded([&] { return run_check(D); });
    else if (c == "slopes") results[c] = guarded([&] { return run_slopes(D); });
    else if (c == "wach") results[c] = guarded([&] { return run_wach(D, job); });
    else if (c == "tam") results[c] = guarded([&] { return run_tam(D); });
    else if (c == "cep") results[c] = guarded([&] { return run_cep(D); });
  }
  out["results"] = results;
  return out;
}

json iwasawa_json(const JobDocument& job) {
  auto ctx = PrecisionContext::create(job.p, 1, job.N);
  const std::size_t M = job.M_T;
  std::mt19937_64 rng(job.seed);
  auto random_element = [&](bool unit) {
    IwasawaElement x(ctx, M);
    for (std::size_t i = 0; i < x.num_components(); ++i)
      for (std::size_t k = 0; k < M; ++k) x.set_coefficient(i, k, mpq_class(static_cast<long>(rng() % 2001) - 1000));
    if (unit)
      for (std::size_t i = 0; i < x.num_components(); ++i)
        x.set_coefficient(i, 0, static_cast<long>(rng() % 1000) * job.p + 1 + static_cast<long>(rng() % (job.p - 1)));
    return x;
  };
  IwasawaElement one = IwasawaElement::one(ctx, M), sum(ctx, M);
  bool idem = true;
  for (std::size_t i = 0; i < one.num_components(); ++i) {
    const auto e = idempotent(ctx, i, M);
    idem = idem && e * e == e;
    sum = sum + e;
  }
  idem = idem && sum == one;
  bool round = true, hom = true, units = true, lemma = true;
  for (int trial = 0; trial < 8; ++trial) {
    const IwasawaElement x = random_element(false), y = random_element(trial % 2 == 0), u = random_element(true);
    round = round && twist_inverse(twist1(x)) == x && twist1(twist_inverse(x)) == x;
    hom = hom && eval_at_zero(x * y) == eval_at_zero(x) * eval_at_zero(y);
    units = units && is_lambda_unit(x * y) == (is_lambda_unit(x) && is_lambda_unit(y)) && is_lambda_unit(twist1(u));
    const auto tc = delta_twist_consistency(u, twist1(u));
    lemma = lemma && tc.consistent && std::all_of(tc.per_idempotent.begin(), tc.per_idempotent.end(), [](bool b) { return b; });
  }
  return json{{"M_T", M},
              {"idempotents", idem},
              {"twist_round_trip", round},
              {"eval_homomorphism", hom},
              {"unit_multiplicativity", units},
              {"twist_lemma", lemma},
              {"verdict", idem && round && hom && units && lemma}};
}

void tally(const json& node, std::size_t& verdicts, std::size_t& failed, std::size_t& errors) {
  if (node.is_object()) {
    if (node.contains("verdict")) {
      ++verdicts;
      if (!node["verdict"].get<bool>()) ++failed;
      if (node.contains("error")) ++errors;
    }
    for (const auto& [k, v] : node.items()) tally(v, verdicts, failed, errors);
  } else if (node.is_array()) {
    for (const auto& v : node) tally(v, verdicts, failed, errors);
  }
}

json entry_json(const OFElement& x) {
  if (x.context()->f() == 1) return x.coefficient(0);
  json arr = json::array();
  for (u64 c : x.coefficients()) arr.push_back(c);
  return arr;
}

}  // namespace

mpz_class parse_entry(const std::string& text, int p) {
  if (text.rfind("p:", 0) == 0) {
    const std::string digits = text.substr(2);
    if (digits.empty()) raise(ErrorKind::ParseError, "empty base-p digit string");
    mpz_class v = 0;
    for (char ch : digits) {
      int d;
      if (ch >= '0' && ch <= '9') d = ch - '0';
      else if (ch >= 'a' && ch <= 'z') d = ch - 'a' + 10;
      else raise(ErrorKind::ParseError, std::string("bad base-p digit '") + ch + "'");
      if (d >= p) raise(ErrorKind::ParseError, std::string("digit '") + ch + "' is not below p");
      v = v * p + d;
    }
    return v;
  }
  mpz_class v;
  const std::size_t start = !text.empty() && text[0] == '-' ? 1 : 0;
  if (text.size() == start || !std::all_of(text.begin() + static_cast<long>(start), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
    raise(ErrorKind::ParseError, "'" + text + "' is not a decimal integer or a p:digits string");
  v.set_str(text, 10);
  return v;
}

std::vector<JobDocument> parse_jobs(const std::string& text, const PrecisionOverrides& over) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    raise(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  std::vector<JobDocument> jobs;
  if (doc.is_object() && doc.contains("jobs")) {
    const json& arr = doc["jobs"];
    if (!arr.is_array()) parse_fail("jobs", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      jobs.push_back(parse_job_object(arr[i], over, "jobs[" + std::to_string(i) + "]"));
  } else {
    jobs.push_back(parse_job_object(doc, over, ""));
  }
  return jobs;
}

JobDocument parse_job(const std::string& text, const PrecisionOverrides& over) {
  auto jobs = parse_jobs(text, over);
  if (jobs.size() != 1) raise(ErrorKind::ParseError, "document: expected exactly one job");
  return std::move(jobs.front());
}

std::string serialize_jobs(const std::vector<JobDocument>& jobs) {
  json arr = json::array();
  for (const auto& job : jobs) {
    json j{{"p", job.p}, {"f", job.f}, {"precision", {{"N", job.N}, {"M", job.M}, {"M_T", job.M_T}}},
           {"commands", job.commands}, {"seed", job.seed}};
    if (!job.modulus.empty()) j["modulus"] = job.modulus;
    json mods = json::array();
    for (const auto& m : job.modules) {
      json rows = json::array();
      for (std::size_t r = 0; r < m.module.rank(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.module.rank(); ++c) row.push_back(entry_json(m.module.A()(r, c)));
        rows.push_back(row);
      }
      mods.push_back(json{{"name", m.name}, {"rank", m.module.rank()}, {"jumps", m.module.jumps()},
                          {"matrix", rows}, {"shift", m.module.shift()}});
    }
    j["modules"] = mods;
    arr.push_back(j);
  }
  return json{{"jobs", arr}}.dump(2) + "\n";
}

RunResult run_jobs(const std::vector<JobDocument>& jobs, unsigned threads) {
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    for (std::size_t m = 0; m < jobs[j].modules.size(); ++m) tasks.emplace_back(j, m);
  std::vector<json> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
      const auto [j, m] = tasks[t];
      results[t] = module_json(jobs[j].modules[m], jobs[j], m);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  json out_jobs = json::array();
  std::size_t t = 0;
  for (const auto& job : jobs) {
    json j{{"p", job.p}, {"f", job.f}, {"seed", job.seed}, {"commands", job.commands},
           {"precision", {{"N", job.N}, {"M", job.M == 0 ? 40 * static_cast<std::size_t>(job.p - 1) : job.M}, {"M_T", job.M_T}}}};
    json mods = json::array();
    for (std::size_t m = 0; m < job.modules.size(); ++m) mods.push_back(std::move(results[t++]));
    j["modules"] = mods;
    if (has_command(job, "iwasawa-check")) j["iwasawa"] = guarded([&] { return iwasawa_json(job); });
    out_jobs.push_back(j);
  }
  std::size_t verdicts = 0, failed = 0, errors = 0;
  tally(out_jobs, verdicts, failed, errors);
  std::size_t modules = 0;
  for (const auto& job : jobs) modules += job.modules.size();
  RunResult rr;
  rr.all_ok = failed == 0 && errors == 0;
  json report{{"schema", kReportSchema},
              {"jobs", out_jobs},
              {"summary", {{"jobs", jobs.size()}, {"modules", modules}, {"verdicts", verdicts},
                           {"verdicts_false", failed}, {"errors", errors}, {"all_ok", rr.all_ok}}}};
  rr.report = report.dump(2) + "\n";
  return rr;
}

RunResult run_job(const JobDocument& job, unsigned threads) { return run_jobs({job}, threads); }

std::vector<JobDocument> generate_corpus(int p, std::size_t d_max, std::size_t count, std::uint64_t seed, int N) {
  if (p != 3 && p != 5 && p != 7) raise(ErrorKind::InvalidArgument, "corpus generation supports p in {3, 5, 7}");
  if (d_max < 1 || d_max > 3) raise(ErrorKind::InvalidArgument, "d_max must be in [1, 3]");
  auto ctx = PrecisionContext::create(p, 1, N);
  std::mt19937_64 rng(seed);
  std::vector<JobDocument> out;
  while (out.size() < count) {
    const std::size_t d = 1 + rng() % d_max;
    std::vector<int> jumps(d);
    for (auto& r : jumps) r = static_cast<int>(rng() % static_cast<std::uint64_t>(p));
    std::sort(jumps.begin(), jumps.end());
    const int shift = 1 - static_cast<int>(rng() % static_cast<std::uint64_t>(p + 1));
    OFMatrix A(ctx, d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const u64 r = rng() % ctx->pN();
        A(i, j) = OFElement::from_residues(ctx, std::span<const u64>(&r, 1));
      }
    if (!A.determinant().is_unit()) continue;
    FilPhiModule D = FilPhiModule::create(jumps, A, shift);
    if (unit_root_rank(D) != 0) continue;
    try {
      tamagawa(D);
      cep_check(D);
    } catch (const Error&) {
      continue;
    }
    JobDocument job;
    job.p = p;
    job.N = N;
    job.seed = seed;
    job.commands = {"check", "slopes", "wach", "tam", "cep"};
    job.modules.push_back(ModuleEntry{"g" + std::to_string(seed) + "-" + std::to_string(out.size()), D});
    out.push_back(std::move(job));
  }
  return out;
}

}  // namespace wachlab
