// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "oracles.hpp"
#include "vrsp/assignment.hpp"
#include "vrsp/chains.hpp"
#include "vrsp/cli.hpp"
#include "vrsp/procrustes.hpp"
#include "vrsp/rsp.hpp"
#include "vrsp/sample_io.hpp"
#include "vrsp/summaries.hpp"
#include "vrsp/synth.hpp"

#include <json.hpp>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace vrsp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !o.pass;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << o.detail
            << fmt("; %.1f s", secs) << ")" << std::endl;
}

RspConfig quiet(SpScheme s = SpScheme::Exact) {
  RspConfig cfg;
  cfg.scheme = s;
  cfg.on_warning = [](const std::string&) {};
  return cfg;
}

FaScenario example(int which, std::uint64_t seed) {
  FaScenario scn;
  scn.n = which == 1 ? 100 : 200;
  scn.p = which == 1 ? 8 : 24;
  scn.q_true = which == 1 ? 2 : 4;
  scn.block_map = which == 1 ? parse_blocks("1-4,5-8", 8) : parse_blocks("1-6,7-12,13-18,19-24", 24);
  scn.seed = seed;
  return scn;
}

LoadingsSample gibbs(const Matrix& Y, int q, std::uint64_t seed, int kept, bool factors = false) {
  GibbsConfig g;
  g.iters = kept + 2000;
  g.burnin = 2000;
  g.seed = seed;
  g.store_factors = factors;
  return gibbs_sample(Y, q, FaPriors{}, g);
}

// ------------------------------------------------------------ criterion 1

Outcome fixture() {
  const auto toy = read_sample_csv(fs::path(VRSP_DATA_DIR) / "toy10.csv");
  auto cfg = quiet();
  cfg.rotate = false;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = rsp_run(toy, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Matrix printed(3, 2);
  printed << 0.01, -0.00, 0.02, 0.85, 0.83, 0.03;
  const double init = res.objective_trace.front(), fin = res.objective_trace.back();
  const double diff = (res.reference - printed).cwiseAbs().maxCoeff();
  const bool ok = std::abs(init - 13.76) <= 0.5 && std::abs(fin - 0.55) <= 0.1 && diff <= 0.05 && secs < 1.0;
  return {ok, fmt("initial psi %.4f, final psi %.4f, max |ref - printed| %.4f, %.4f s", init, fin, diff, secs)};
}

// ------------------------------------------------------------ criterion 2

Outcome exactness() {
  std::mt19937_64 rng(2024);
  int agree = 0, n = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int q = 2 + k % 3, p = k % 2 ? 10 : 5;
    const Matrix Lt = oracle::random_matrix(p, q, rng), Ls = oracle::random_matrix(p, q, rng);
    const double got = sp_step_exact(Lt, Ls).cost;
    const double brute = oracle::brute_sp_min(Lt, Ls);
    worst = std::max(worst, std::abs(got - brute));
    agree += std::abs(got - brute) <= 1e-9;
    ++n;
  }
  return {agree == n, fmt("%d/%d instances match enumeration, max |diff| %.2e", agree, n, worst)};
}

// ------------------------------------------------------------ criterion 3

Outcome assignment() {
  std::mt19937_64 rng(3033);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> small(0, 4);
  int agree = 0;
  for (int k = 0; k < 500; ++k) {
    const int q = 1 + k % 6;
    CostMatrix C(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) C(i, j) = k % 4 == 3 ? small(rng) : u(rng);
    const auto sol = solve_assignment(C);
    double recomputed = 0.0;
    for (int i = 0; i < q; ++i) recomputed += C(i, sol.assignment[i]);
    const auto brute = oracle::brute_assignment(C);
    agree += sol.total_cost == brute.cost && recomputed == brute.cost;
  }
  return {agree == 500, fmt("%d/500 matrices match exhaustive search exactly", agree)};
}

// ------------------------------------------------------------ criterion 4

Outcome monotone() {
  struct Case {
    std::string name;
    LoadingsSample s;
    bool rotate;
  };
  std::vector<Case> corpus;
  corpus.push_back({"fixture", read_sample_csv(fs::path(VRSP_DATA_DIR) / "toy10.csv"), false});
  for (int seed = 1; seed <= 3; ++seed) {
    corpus.push_back({fmt("relabel q=3 #%d", seed), relabeling_instance(12, 3, 100, 0.2, 40 + seed), false});
    corpus.push_back({fmt("relabel q=5 #%d", seed), relabeling_instance(20, 5, 60, 0.2, 50 + seed), false});
  }
  for (int q : {2, 3}) {
    const auto d = generate_synthetic(example(1, 4));
    corpus.push_back({fmt("gibbs q=%d", q), gibbs(d.data, q, 4, 2000), true});
  }
  int runs = 0, bad_trace = 0, bad_stop = 0;
  for (const auto& c : corpus) {
    for (auto s : {SpScheme::Exact, SpScheme::PartialSA, SpScheme::FullSA}) {
      auto cfg = quiet(s);
      cfg.rotate = c.rotate;
      cfg.rng_seed = 9;
      const auto res = rsp_run(c.s, cfg);
      ++runs;
      const auto& tr = res.objective_trace;
      bool mono = true;
      for (size_t k = 1; k < tr.size(); ++k) mono = mono && tr[k] <= tr[k - 1];
      bad_trace += !mono;
      const double tol = 1e-6 * c.s.draws() * c.s.p() * c.s.q();
      bool stop = res.converged && res.outer_iters == static_cast<int>(tr.size()) - 1;
      for (size_t k = 1; k + 1 < tr.size(); ++k) stop = stop && tr[k - 1] - tr[k] >= tol;
      stop = stop && tr.size() >= 2 && tr[tr.size() - 2] - tr.back() < tol;
      bad_stop += !stop;
      if (!mono || !stop) std::cout << "  " << c.name << " / " << to_string(s) << ": trace or stop rule violated\n";
    }
  }
  return {bad_trace == 0 && bad_stop == 0,
          fmt("%d runs, %d non-monotone traces, %d stop-rule violations", runs, bad_trace, bad_stop)};
}

// ------------------------------------------------------------ criterion 5

Outcome effective_factors() {
  std::string detail;
  bool ok = true;
  for (int which : {1, 2}) {
    const int qt = which == 1 ? 2 : 4;
    int hit_true = 0, hit_over = 0;
    for (int seed = 1; seed <= 10; ++seed) {
      const auto d = generate_synthetic(example(which, 100 * which + seed));
      for (int q : {qt, qt + 1}) {
        const auto s = summarize(rsp_run(gibbs(d.data, q, seed, 20000), quiet()), 0.99);
        (q == qt ? hit_true : hit_over) += s.q_hat == qt;
      }
    }
    ok = ok && hit_true >= 8 && hit_over >= 8;
    detail += fmt("%sexample %d: q=%d gives q_hat=%d on %d/10, q=%d on %d/10", which == 1 ? "" : "; ", which, qt,
                  qt, hit_true, qt + 1, hit_over);
  }
  return {ok, detail};
}

// ------------------------------------------------------------ criterion 6

Outcome sa_quality() {
  int close5 = 0, close10 = 0, full_worse = 0;
  for (int seed = 1; seed <= 100; ++seed) {
    for (int q : {5, 10}) {
      const auto inst = relabeling_instance(4 * q, q, 50, 0.2, 6000 + 100 * q + seed);
      auto cfg = quiet();
      cfg.rotate = false;
      cfg.rng_seed = seed;
      const double exact = rsp_run(inst, cfg).objective_trace.back();
      cfg.scheme = SpScheme::PartialSA;
      cfg.sa_loops = q == 5 ? 20 : 200;
      const double partial = rsp_run(inst, cfg).objective_trace.back();
      (q == 5 ? close5 : close10) += partial <= 1.01 * exact;
      if (q == 10) {
        cfg.scheme = SpScheme::FullSA;
        cfg.sa_loops = 100;
        full_worse += rsp_run(inst, cfg).objective_trace.back() >= partial;
      }
    }
  }
  return {close5 >= 95 && close10 >= 95 && full_worse >= 80,
          fmt("partial within 1%% of exact: q=5 %d/100, q=10 %d/100; full >= partial at q=10: %d/100", close5,
              close10, full_worse)};
}

// ------------------------------------------------------------ criterion 7

Outcome chains() {
  const auto d = generate_synthetic(example(1, 707));
  std::vector<RspResult> runs;
  for (int c = 1; c <= 8; ++c) runs.push_back(rsp_run(gibbs(d.data, 2, 7000 + c, 5000), quiet()));
  const auto al = align_chains(runs);
  std::vector<Matrix> means;
  Matrix grand = Matrix::Zero(8, 2);
  for (const auto& a : al.aligned) means.push_back(sample_mean(a)), grand += means.back();
  grand /= 8.0;
  Matrix ss = Matrix::Zero(8, 2);
  for (const auto& m : means) ss += (m - grand).cwiseAbs2();
  const double worst_sd = (ss / 7.0).cwiseSqrt().maxCoeff();

  std::mt19937_64 rng(77);
  const auto all = oracle::all_signed_perms(2);
  int planted_ok = 0;
  for (int k = 0; k < 20; ++k) {
    const Matrix base = oracle::random_matrix(5, 2, rng);
    std::vector<LoadingsSample> set;
    std::vector<Matrix> m;
    for (int c = 0; c < 3; ++c) {
      const auto g = oracle::random_sp(2, rng);
      std::vector<Matrix> draws;
      for (int t = 0; t < 30; ++t) draws.push_back(apply_signed_permutation(base + 0.3 * oracle::random_matrix(5, 2, rng), g));
      set.push_back(LoadingsSample::from_draws(draws));
      m.push_back(sample_mean(set.back()));
    }
    double brute = std::numeric_limits<double>::infinity();
    for (const auto& a : all)
      for (const auto& b : all)
        for (const auto& c : all) {
          const Matrix x = apply_signed_permutation(m[0], a), y = apply_signed_permutation(m[1], b),
                       z = apply_signed_permutation(m[2], c);
          const Matrix r = (x + y + z) / 3.0;
          brute = std::min(brute, (x - r).squaredNorm() + (y - r).squaredNorm() + (z - r).squaredNorm());
        }
    planted_ok += std::abs(align_chains(set).objective - brute) <= 1e-10 * std::max(1.0, brute);
  }
  return {worst_sd <= 0.05 && planted_ok == 20,
          fmt("max between-chain sd of posterior means %.4f; planted sets at brute-force optimum %d/20", worst_sd,
              planted_ok)};
}

// ------------------------------------------------------------ criterion 8

Outcome reconstruction() {
  const auto d = generate_synthetic(example(1, 808));
  const auto s = gibbs(d.data, 3, 808, 2000, true);
  double worst = 0.0;
  int checked = 0;
  auto compare = [&](const LoadingsSample& out) {
    for (int t = 0; t < s.draws(); ++t) {
      const Matrix before = s.factors()[t] * s.matrix(t).transpose();
      const Matrix after = out.factors()[t] * out.matrix(t).transpose();
      worst = std::max(worst, (before - after).norm());
      ++checked;
    }
  };
  for (auto scheme : {SpScheme::Exact, SpScheme::PartialSA, SpScheme::FullSA}) compare(rsp_run(s, quiet(scheme)).reordered);
  compare(op_run(s).reordered);
  return {worst <= 1e-8, fmt("%d draws over exact, partial-sa, full-sa and op; max Frobenius gap %.2e", checked, worst)};
}

// ------------------------------------------------------------ criterion 9

Outcome cross_method() {
  const auto d = generate_synthetic(example(1, 909));
  const auto s = gibbs(d.data, 2, 909, 5000);
  const double gap = oracle::max_abs_diff_up_to_sp(sample_mean(op_run(s).reordered), sample_mean(rsp_run(s, quiet()).reordered));

  int rsp_le = 0;
  std::string qs;
  for (int seed = 1; seed <= 10; ++seed) {
    FaScenario scn;
    scn.n = 200;
    scn.p = 20;
    scn.q_true = 2;
    scn.block_map = even_blocks(20, 2);
    scn.seed = 9000 + seed;
    const auto g = gibbs(generate_synthetic(scn).data, 8, seed, 5000);
    const int q_rsp = summarize(rsp_run(g, quiet())).q_hat, q_op = summarize(op_run(g)).q_hat;
    rsp_le += q_rsp <= q_op;
    qs += fmt("%s%d/%d", seed == 1 ? "" : " ", q_rsp, q_op);
  }
  return {gap <= 0.1 && rsp_le >= 6,
          fmt("q=2 posterior means differ by %.4f up to a signed permutation; q=8: rsp q_hat <= op q_hat on %d/10 "
              "seeds (rsp/op: %s)",
              gap, rsp_le, qs.c_str())};
}

// ----------------------------------------------------------- criterion 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// File contents with run-dependent timing removed: the manifest's
// wall-clock field and the bench elapsed column.
std::string canonical_text(const fs::path& p) {
  if (p.filename() == "manifest.json") {
    auto j = nlohmann::ordered_json::parse(slurp(p));
    j.erase("wall_clock_seconds");
    return j.dump();
  }
  if (p.filename() == "bench.csv") {
    std::istringstream in(slurp(p));
    std::string out;
    for (std::string line; std::getline(in, line);) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
      f.erase(f.begin() + 6);
      for (const auto& x : f) out += x + ',';
      out += '\n';
    }
    return out;
  }
  return slurp(p);
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  size_t na = 0, nb = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) nb += e.is_regular_file();
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++na;
    const auto rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || canonical_text(a / rel) != canonical_text(b / rel)) {
      why = rel.string();
      return false;
    }
  }
  if (na != nb || na == 0) why = "file count";
  return na == nb && na > 0;
}

int cli(std::vector<std::string> args) {
  std::ostringstream sink;
  auto* out = std::cout.rdbuf(sink.rdbuf());
  auto* err = std::cerr.rdbuf(sink.rdbuf());
  const int code = run_cli(args);
  std::cout.rdbuf(out);
  std::cerr.rdbuf(err);
  return code;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("vrsp_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  struct Job {
    std::string name;
    std::vector<std::string> args;
    std::string extra_a, extra_b;  // appended thread counts, if any
  };
  const std::string r = root.string();
  const std::vector<Job> jobs{
      {"simulate", {"simulate", "--n", "100", "--p", "8", "--q-true", "2", "--blocks", "1-4,5-8", "--seed", "5"}, "", ""},
      {"gibbs", {"gibbs", "--data", r + "/simulate/data.csv", "--q", "3", "--iters", "3000", "--burnin", "1000", "--seed", "5", "--store-factors"}, "", ""},
      {"rsp-exact", {"rsp", "--input", r + "/gibbs/samples.csv", "--sigma2", r + "/gibbs/sigma2.csv", "--factors-dir", r + "/gibbs/factors"}, "1", "4"},
      {"rsp-partial", {"rsp", "--input", r + "/gibbs/samples.csv", "--scheme", "partial-sa", "--seed", "5"}, "1", "3"},
      {"rsp-full", {"rsp", "--input", r + "/gibbs/samples.csv", "--scheme", "full-sa", "--seed", "5", "--restarts", "2"}, "1", "2"},
      {"procrustes", {"procrustes", "--input", r + "/gibbs/samples.csv"}, "1", "3"},
      {"summarize", {"summarize", "--input", r + "/rsp-exact/reordered.csv"}, "", ""},
      {"align-chains", {"align-chains", "--inputs", r + "/rsp-exact/reordered.csv", r + "/rsp-partial/reordered.csv", r + "/rsp-full/reordered.csv"}, "1", "2"},
  };
  int same = 0, total = 0;
  std::string bad;
  for (const auto& j : jobs) {
    auto a = j.args, b = j.args;
    if (!j.extra_a.empty()) {
      a.insert(a.end(), {"--threads", j.extra_a});
      b.insert(b.end(), {"--threads", j.extra_b});
    }
    a.insert(a.end(), {"--out", r + "/" + j.name});
    b.insert(b.end(), {"--out", r + "/again/" + j.name});
    if (cli(a) != 0 || cli(b) != 0) {
      bad += " " + j.name + "(exit)";
      ++total;
      continue;
    }
    std::string why;
    ++total;
    if (same_tree(root / j.name, root / "again" / j.name, why)) ++same;
    else bad += " " + j.name + "(" + why + ")";
  }
  fs::create_directories(root / "bench1");
  fs::create_directories(root / "bench2");
  const std::vector<std::string> bench{"bench", "--q-list", "4,6", "--repeats", "2", "--draws", "40", "--seed", "5"};
  auto b1 = bench, b2 = bench;
  b1.insert(b1.end(), {"--threads", "1", "--out", r + "/bench1/bench.csv"});
  b2.insert(b2.end(), {"--threads", "2", "--out", r + "/bench2/bench.csv"});
  ++total;
  std::string why;
  if (cli(b1) == 0 && cli(b2) == 0 && same_tree(root / "bench1", root / "bench2", why)) ++same;
  else bad += " bench(" + why + ")";
  fs::remove_all(root);
  return {same == total, fmt("%d/%d commands reproduce their outputs%s", same, total, bad.empty() ? "" : (";" + bad).c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto criterion = [&](int id, const std::string& title, const std::function<Outcome()>& body) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) ::criterion(id, title, body);
  };
  criterion(1, "fixture objective and terminal reference", fixture);
  criterion(2, "exact scheme equals enumeration", exactness);
  criterion(3, "assignment solver equals exhaustive search", assignment);
  criterion(4, "monotone objective and termination rule", monotone);
  criterion(5, "effective-factor detection on examples 1 and 2", effective_factors);
  criterion(6, "annealing quality", sa_quality);
  criterion(7, "multi-chain alignment", chains);
  criterion(8, "reconstruction invariant", reconstruction);
  criterion(9, "procrustes versus rsp", cross_method);
  criterion(10, "determinism", determinism);
  if (only.empty()) std::cout << (10 - failures) << "/10 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
