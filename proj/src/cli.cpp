#include "vrsp/cli.hpp"

#include "vrsp/chains.hpp"
#include "vrsp/procrustes.hpp"
#include "vrsp/rsp.hpp"
#include "vrsp/sample_io.hpp"
#include "vrsp/summaries.hpp"
#include "vrsp/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace vrsp {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class F>
void check_usage(F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("sha256: out of memory");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    j_["tool"] = "varimax-rsp";
    j_["version"] = kVersion;
    j_["command"] = std::move(command);
    j_["config"] = ordered_json::object();
    j_["inputs"] = ordered_json::array();
  }

  ordered_json& config() { return j_["config"]; }
  ordered_json& operator[](const char* key) { return j_[key]; }

  void input(const fs::path& p) {
    j_["inputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  }

  void write(const fs::path& dir) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    j_["wall_clock_seconds"] = secs;
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << j_.dump(2) << '\n';
    if (!out) throw FormatError("cannot write " + (dir / "manifest.json").string());
  }

 private:
  ordered_json j_;
  std::chrono::steady_clock::time_point start_;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::vector<std::string> numbered(const std::string& prefix, int n) {
  std::vector<std::string> h;
  for (int k = 1; k <= n; ++k) h.push_back(prefix + std::to_string(k));
  return h;
}

void write_trace(const fs::path& path, const std::vector<double>& trace) {
  Matrix m(trace.size(), 2);
  for (size_t k = 0; k < trace.size(); ++k) {
    m(k, 0) = static_cast<double>(k);
    m(k, 1) = trace[k];
  }
  write_matrix_csv(path, m, {"iter", "psi"});
}

std::string describe(const SignedPermutation& sp) {
  std::ostringstream os;
  os << "s = (";
  for (int j = 0; j < sp.size(); ++j) os << (j ? ", " : "") << sp.sign(j);
  os << ") nu = (";
  for (int j = 0; j < sp.size(); ++j) os << (j ? ", " : "") << sp.source(j) + 1;
  os << ")";
  return os.str();
}

// Loads a sample plus optional companions.
LoadingsSample load_sample(const std::string& input, const std::string& sigma2,
                           const std::string& factors_dir, Manifest& man) {
  LoadingsSample s = read_sample_csv(input);
  man.input(input);
  if (!sigma2.empty()) {
    s.set_variances(read_sigma2_csv(sigma2));
    man.input(sigma2);
  }
  if (!factors_dir.empty()) s.set_factors(read_factor_files(factors_dir, s.draws()));
  return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  int n = 100, p = 0, q_true = 2;
  std::string blocks;
  double sigma2 = 0.36, loading_scale = 0.8, jitter = 0.1;
  std::uint64_t seed = 1;
  std::string out = ".";
};

void cmd_simulate(const SimulateOpts& o) {
  FaScenario scn;
  scn.n = o.n;
  scn.p = o.p;
  scn.q_true = o.q_true;
  scn.sigma2 = {o.sigma2};
  scn.loading_scale = o.loading_scale;
  scn.jitter = o.jitter;
  scn.seed = o.seed;
  check_usage([&] {
    scn.block_map = o.blocks.empty() ? even_blocks(o.p, o.q_true) : parse_blocks(o.blocks, o.p);
    scn.validate();
  });
  const SyntheticData d = generate_synthetic(scn);
  const fs::path dir = o.out;
  ensure_dir(dir);
  write_matrix_csv(dir / "data.csv", d.data, numbered("y_", o.p));
  write_sample_csv(dir / "truth.csv", LoadingsSample::from_draws({d.truth}));
  write_matrix_csv(dir / "factors.csv", d.factors, numbered("f_", o.q_true));
  write_sigma2_csv(dir / "sigma2.csv", {d.sigma2});

  Manifest man("simulate");
  auto& c = man.config();
  c["n"] = o.n;
  c["p"] = o.p;
  c["q_true"] = o.q_true;
  c["blocks"] = o.blocks;
  c["sigma2"] = o.sigma2;
  c["loading_scale"] = o.loading_scale;
  c["jitter"] = o.jitter;
  c["seed"] = o.seed;
  man.write(dir);
  std::cout << "wrote " << o.n << " x " << o.p << " data to " << (dir / "data.csv").string() << '\n';
}

// ------------------------------------------------------------------- gibbs

struct GibbsOpts {
  std::string data, out = ".";
  int q = 0;
  GibbsConfig cfg;
  FaPriors priors;
  bool no_standardize = false;
};

void cmd_gibbs(GibbsOpts o) {
  o.cfg.center_data = !o.no_standardize;
  check_usage([&] {
    o.cfg.validate();
    o.priors.validate();
    if (o.q < 1) throw std::invalid_argument("--q must be >= 1");
  });
  const Matrix Y = read_matrix_csv(o.data);
  Manifest man("gibbs");
  man.input(o.data);
  if (o.q >= Y.cols()) throw UsageError("--q must be smaller than the number of variables (" + std::to_string(Y.cols()) + ")");
  const LoadingsSample s = gibbs_sample(Y, o.q, o.priors, o.cfg);

  const fs::path dir = o.out;
  ensure_dir(dir);
  write_sample_csv(dir / "samples.csv", s);
  write_sigma2_csv(dir / "sigma2.csv", s.variances());
  if (s.has_factors()) write_factor_files(dir / "factors", s.factors());

  auto& c = man.config();
  c["q"] = o.q;
  c["iters"] = o.cfg.iters;
  c["burnin"] = o.cfg.burnin;
  c["thin"] = o.cfg.thin;
  c["seed"] = o.cfg.seed;
  c["standardize"] = o.cfg.center_data;
  c["store_factors"] = o.cfg.store_factors;
  c["lower_triangular"] = o.cfg.lower_triangular;
  c["prior_mean"] = o.priors.l0;
  c["prior_precision"] = o.priors.L0;
  c["a0"] = o.priors.a0;
  c["b0"] = o.priors.b0;
  man["kept_draws"] = s.draws();
  man.write(dir);
  std::cout << "wrote " << s.draws() << " draws of " << s.p() << " x " << s.q() << " loadings\n";
}

// --------------------------------------------------------------------- rsp

struct RspOpts {
  std::string input, sigma2, factors_dir, out = ".";
  std::string scheme = "exact";
  RspConfig cfg;
  bool no_varimax = false;
};

void cmd_rsp(RspOpts o) {
  check_usage([&] {
    o.cfg.scheme = parse_scheme(o.scheme);
    o.cfg.rotate = !o.no_varimax;
    o.cfg.validate();
    o.cfg.varimax.validate();
  });
  Manifest man("rsp");
  const LoadingsSample raw = load_sample(o.input, o.sigma2, o.factors_dir, man);
  std::vector<std::string> warnings;
  o.cfg.on_warning = [&](const std::string& w) {
    std::cerr << "warning: " << w << '\n';
    warnings.push_back(w);
  };
  const RspResult res = rsp_run(raw, o.cfg);

  const fs::path dir = o.out;
  ensure_dir(dir);
  write_sample_csv(dir / "reordered.csv", res.reordered);
  write_transforms_csv(dir / "transforms.csv", res.transforms);
  write_matrix_csv(dir / "reference.csv", res.reference, numbered("f_", raw.q()));
  write_trace(dir / "trace.csv", res.objective_trace);
  if (res.reordered.has_variances()) write_sigma2_csv(dir / "sigma2.csv", res.reordered.variances());
  if (res.reordered.has_factors()) write_factor_files(dir / "factors", res.reordered.factors());

  auto& c = man.config();
  c["method"] = "rsp";
  c["scheme"] = to_string(o.cfg.scheme);
  c["varimax"] = o.cfg.rotate;
  c["varimax_eps"] = o.cfg.varimax.eps;
  c["varimax_normalize"] = o.cfg.varimax.normalize;
  c["max_iter"] = o.cfg.max_outer_iters;
  c["eps_factor"] = o.cfg.convergence_factor;
  c["sa_loops"] = o.cfg.effective_sa_loops();
  c["gamma"] = o.cfg.gamma;
  c["gamma0"] = o.cfg.gamma0;
  c["seed"] = o.cfg.rng_seed;
  c["faithful_sa"] = o.cfg.faithful_sa;
  c["restarts"] = o.cfg.restarts;
  man["T"] = raw.draws();
  man["p"] = raw.p();
  man["q"] = raw.q();
  man["objective_trace"] = res.objective_trace;
  man["outer_iterations"] = res.outer_iters;
  man["converged"] = res.converged;
  man["best_restart"] = res.best_restart;
  man["warnings"] = warnings;
  man.write(dir);
  std::cout << "psi: initial " << format_double(res.objective_trace.front()) << ", final "
            << format_double(res.objective_trace.back()) << " after " << res.outer_iters
            << " iteration(s)" << (res.converged ? "" : " (not converged)") << '\n';
}

// -------------------------------------------------------------- procrustes

struct OpOpts {
  std::string input, sigma2, factors_dir, out = ".";
  OpConfig cfg;
  int init_draw = 1;
  std::uint64_t seed = 1;
};

void cmd_procrustes(OpOpts o) {
  check_usage([&] {
    if (o.cfg.max_iters < 1) throw std::invalid_argument("--max-iter must be >= 1");
    if (!(o.cfg.convergence_factor >= 0.0)) throw std::invalid_argument("--eps-factor must be >= 0");
    o.cfg.varimax.validate();
  });
  Manifest man("procrustes");
  const LoadingsSample raw = load_sample(o.input, o.sigma2, o.factors_dir, man);
  if (o.init_draw < 1 || o.init_draw > raw.draws()) throw UsageError("--init-draw outside 1..T");
  o.cfg.init_draw = o.init_draw - 1;
  const OpResult res = op_run(raw, o.cfg);

  const fs::path dir = o.out;
  ensure_dir(dir);
  write_sample_csv(dir / "reordered.csv", res.reordered);
  const int q = raw.q();
  Matrix rot(raw.draws(), 1 + q * q);
  std::vector<std::string> h{"draw"};
  for (int a = 1; a <= q; ++a)
    for (int b = 1; b <= q; ++b) h.push_back("R_" + std::to_string(a) + "_" + std::to_string(b));
  for (int t = 0; t < raw.draws(); ++t) {
    rot(t, 0) = t + 1;
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) rot(t, 1 + a * q + b) = res.rotations[t](a, b);
  }
  write_matrix_csv(dir / "rotations.csv", rot, h);
  write_matrix_csv(dir / "reference.csv", res.reference, numbered("f_", q));
  write_trace(dir / "trace.csv", res.objective_trace);
  if (res.reordered.has_variances()) write_sigma2_csv(dir / "sigma2.csv", res.reordered.variances());
  if (res.reordered.has_factors()) write_factor_files(dir / "factors", res.reordered.factors());

  auto& c = man.config();
  c["method"] = "op";
  c["max_iter"] = o.cfg.max_iters;
  c["eps_factor"] = o.cfg.convergence_factor;
  c["init_draw"] = o.init_draw;
  c["varimax_eps"] = o.cfg.varimax.eps;
  c["varimax_normalize"] = o.cfg.varimax.normalize;
  c["seed"] = o.seed;
  man["T"] = raw.draws();
  man["p"] = raw.p();
  man["q"] = q;
  man["objective_trace"] = res.objective_trace;
  man["iterations"] = res.iters;
  man["converged"] = res.converged;
  man.write(dir);
  std::cout << "procrustes objective: " << format_double(res.objective_trace.back()) << " after "
            << res.iters << " iteration(s)\n";
}

// --------------------------------------------------------------- summarize

struct SummarizeOpts {
  std::string input, out = ".";
  double level = 0.99;
  int bins = 20;
  std::uint64_t seed = 1;
};

void cmd_summarize(const SummarizeOpts& o) {
  check_usage([&] {
    if (!(o.level > 0.0 && o.level < 1.0)) throw std::invalid_argument("--level must lie in (0, 1)");
    if (o.bins < 1) throw std::invalid_argument("--bins must be >= 1");
  });
  if (!fs::exists(o.input)) throw UsageError("reordered input " + o.input + " not found");
  Manifest man("summarize");
  const LoadingsSample s = read_sample_csv(o.input);
  man.input(o.input);
  const CredibleSummary cs = summarize(s, o.level);
  const int p = s.p(), q = s.q(), T = s.draws();

  const fs::path dir = o.out;
  ensure_dir(dir);
  {
    Matrix tab(p * q, 8);
    for (int j = 0; j < q; ++j)
      for (int r = 0; r < p; ++r) {
        const int k = j * p + r;
        tab.row(k) << r + 1, j + 1, cs.mean(r, j), cs.sd(r, j), cs.hpd_lo(r, j), cs.hpd_hi(r, j),
            cs.scr_lo(r, j), cs.scr_hi(r, j);
      }
    write_matrix_csv(dir / "summary.csv", tab,
                     {"row", "factor", "mean", "sd", "hpd_lo", "hpd_hi", "scr_lo", "scr_hi"});
  }
  {
    Matrix cols(q, 2);
    for (int j = 0; j < q; ++j) cols.row(j) << j + 1, 0;
    for (int j : cs.redundant_columns) cols(j, 1) = 1;
    write_matrix_csv(dir / "columns.csv", cols, {"factor", "redundant"});
  }
  {
    Matrix hist(static_cast<Eigen::Index>(p) * q * o.bins, 6);
    Eigen::Index row = 0;
    std::vector<int> counts(o.bins);
    for (int j = 0; j < q; ++j)
      for (int r = 0; r < p; ++r) {
        double lo = s.draw(0)(r, j), hi = lo;
        for (int t = 1; t < T; ++t) {
          lo = std::min(lo, s.draw(t)(r, j));
          hi = std::max(hi, s.draw(t)(r, j));
        }
        const double width = (hi - lo) / o.bins;
        std::fill(counts.begin(), counts.end(), 0);
        for (int t = 0; t < T; ++t) {
          int b = width > 0.0 ? static_cast<int>((s.draw(t)(r, j) - lo) / width) : 0;
          counts[std::clamp(b, 0, o.bins - 1)]++;
        }
        for (int b = 0; b < o.bins; ++b) {
          const double blo = width > 0.0 ? lo + b * width : lo;
          const double bhi = width > 0.0 ? (b + 1 == o.bins ? hi : lo + (b + 1) * width) : hi;
          hist.row(row++) << r + 1, j + 1, b + 1, blo, bhi, counts[b];
        }
      }
    write_matrix_csv(dir / "histograms.csv", hist, {"row", "factor", "bin", "lo", "hi", "count"});
  }
  std::vector<int> redundant1;
  for (int j : cs.redundant_columns) redundant1.push_back(j + 1);
  ordered_json js;
  js["level"] = o.level;
  js["T"] = T;
  js["p"] = p;
  js["q"] = q;
  js["q_hat"] = cs.q_hat;
  js["redundant_columns"] = redundant1;
  js["t_star"] = cs.t_star;
  js["joint_coverage"] = cs.joint_coverage;
  {
    std::ofstream out(dir / "columns.json", std::ios::binary | std::ios::trunc);
    out << js.dump(2) << '\n';
  }
  auto& c = man.config();
  c["level"] = o.level;
  c["bins"] = o.bins;
  c["seed"] = o.seed;
  man["q_hat"] = cs.q_hat;
  man["redundant_columns"] = redundant1;
  man.write(dir);

  std::cout << "q_hat: " << cs.q_hat << " of " << q << '\n' << "redundant columns:";
  if (redundant1.empty()) std::cout << " none";
  for (int j : redundant1) std::cout << ' ' << j;
  std::cout << '\n';
}

// ------------------------------------------------------------ align-chains

struct AlignOpts {
  std::vector<std::string> inputs;
  std::string out = ".";
  int threads = 1;
  std::uint64_t seed = 1;
};

void cmd_align(const AlignOpts& o) {
  if (o.inputs.size() < 2) throw UsageError("align-chains needs at least two input files");
  Manifest man("align-chains");
  std::vector<LoadingsSample> chains;
  for (const auto& in : o.inputs) {
    chains.push_back(read_sample_csv(in));
    man.input(in);
  }
  for (size_t c = 1; c < chains.size(); ++c) {
    if (chains[c].p() != chains[0].p() || chains[c].q() != chains[0].q()) {
      throw UsageError("chain " + std::to_string(c + 1) + " differs in shape from chain 1");
    }
  }
  const ChainAlignment al = align_chains(chains, o.threads);

  const fs::path dir = o.out;
  ensure_dir(dir);
  const int C = static_cast<int>(chains.size()), q = chains[0].q();
  Matrix qtab(C, 1 + 2 * q);
  std::vector<std::string> h{"chain"};
  for (const auto& x : numbered("s_", q)) h.push_back(x);
  for (const auto& x : numbered("nu_", q)) h.push_back(x);
  for (int c = 0; c < C; ++c) {
    write_sample_csv(dir / ("aligned_" + std::to_string(c + 1) + ".csv"), al.aligned[c]);
    qtab(c, 0) = c + 1;
    for (int j = 0; j < q; ++j) {
      qtab(c, 1 + j) = al.per_chain[c].sign(j);
      qtab(c, 1 + q + j) = al.per_chain[c].source(j) + 1;
    }
    std::cout << "chain " << c + 1 << ": " << describe(al.per_chain[c]) << '\n';
  }
  write_matrix_csv(dir / "chain_transforms.csv", qtab, h);
  write_matrix_csv(dir / "reference.csv", al.reference, numbered("f_", q));
  man.config()["seed"] = o.seed;
  man["chains"] = C;
  man["anchor_chain"] = al.anchor + 1;
  man["objective"] = al.objective;
  man.write(dir);
}

// ------------------------------------------------------------------- bench

struct BenchOpts {
  std::vector<int> q_list{5, 10};
  std::vector<std::string> schemes{"exact", "partial-sa", "full-sa"};
  int repeats = 3, draws = 200, p_per_factor = 4, max_iter = 100, sa_loops = 0;
  double noise = 0.2;
  bool include_exact = false;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "bench.csv";
};

int bench_loops(SpScheme s, int q) {
  if (s == SpScheme::PartialSA) return q <= 10 ? 20 : 200;
  if (q <= 10) return 100;
  return q <= 30 ? 500 : 2000;
}

void cmd_bench(const BenchOpts& o) {
  std::vector<SpScheme> schemes;
  check_usage([&] {
    for (const auto& s : o.schemes) schemes.push_back(parse_scheme(s));
    if (o.q_list.empty()) throw std::invalid_argument("--q-list is empty");
    for (int q : o.q_list)
      if (q < 1) throw std::invalid_argument("--q-list entries must be >= 1");
    if (o.repeats < 1 || o.draws < 1 || o.p_per_factor < 1 || o.max_iter < 1 || o.sa_loops < 0) {
      throw std::invalid_argument("--repeats, --draws, --p-per-factor and --max-iter must be >= 1");
    }
    if (!(o.noise >= 0.0)) throw std::invalid_argument("--noise must be >= 0");
  });
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + o.out);
  out << "scheme,q,p,T,repeat,outer_iter,elapsed_sec,psi\n";
  for (int q : o.q_list) {
    const int p = o.p_per_factor * q;
    for (int rep = 1; rep <= o.repeats; ++rep) {
      const std::uint64_t inst_seed = o.seed * 1000003ULL + static_cast<std::uint64_t>(q) * 1009ULL + rep;
      const LoadingsSample inst = relabeling_instance(p, q, o.draws, o.noise, inst_seed);
      for (SpScheme s : schemes) {
        if (s == SpScheme::Exact && q > kExactWarnQ && !o.include_exact) {
          std::cerr << "skipping exact scheme for q = " << q << " (use --include-exact)\n";
          continue;
        }
        RspConfig cfg;
        cfg.scheme = s;
        cfg.rotate = false;
        cfg.max_outer_iters = o.max_iter;
        cfg.sa_loops = o.sa_loops > 0 ? o.sa_loops : bench_loops(s, q);
        cfg.rng_seed = o.seed;
        cfg.threads = o.threads;
        cfg.on_warning = [](const std::string&) {};
        const auto t0 = std::chrono::steady_clock::now();
        cfg.on_iteration = [&](int, int it, double psi) {
          const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          out << to_string(s) << ',' << q << ',' << p << ',' << o.draws << ',' << rep << ',' << it << ','
              << format_double(el) << ',' << format_double(psi) << '\n';
        };
        rsp_run(inst, cfg);
      }
    }
  }
  out.flush();
  if (!out) throw FormatError("write error on " + o.out);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Varimax rotation-sign-permutation post-processing of Bayesian factor analysis samples"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* s_sim = app.add_subcommand("simulate", "Generate synthetic factor-analysis data");
  s_sim->add_option("--n", sim.n, "Observations")->capture_default_str()->check(CLI::PositiveNumber);
  s_sim->add_option("--p", sim.p, "Variables")->required()->check(CLI::PositiveNumber);
  s_sim->add_option("--q-true", sim.q_true, "True number of factors")->capture_default_str();
  s_sim->add_option("--blocks", sim.blocks, "Variable blocks per factor, e.g. 1-4,5-8 (default: even split)");
  s_sim->add_option("--sigma2", sim.sigma2, "Idiosyncratic variance")->capture_default_str();
  s_sim->add_option("--loading-scale", sim.loading_scale, "Nonzero loading magnitude")->capture_default_str();
  s_sim->add_option("--jitter", sim.jitter, "Uniform jitter half-width on nonzero loadings")->capture_default_str();
  s_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  s_sim->add_option("--out", sim.out, "Output directory")->capture_default_str();

  GibbsOpts gib;
  auto* s_gib = app.add_subcommand("gibbs", "Sample loadings with a conjugate Gibbs sampler");
  s_gib->add_option("--data", gib.data, "Data CSV (n rows, p columns)")->required()->check(CLI::ExistingFile);
  s_gib->add_option("--q", gib.q, "Number of factors")->required();
  s_gib->add_option("--iters", gib.cfg.iters, "Total iterations including burn-in")->capture_default_str();
  s_gib->add_option("--burnin", gib.cfg.burnin, "Burn-in iterations")->capture_default_str();
  s_gib->add_option("--thin", gib.cfg.thin, "Thinning interval")->capture_default_str();
  s_gib->add_option("--seed", gib.cfg.seed, "RNG seed")->capture_default_str();
  s_gib->add_option("--prior-mean", gib.priors.l0, "Loading prior mean")->capture_default_str();
  s_gib->add_option("--prior-precision", gib.priors.L0, "Loading prior precision (0 = flat)")->capture_default_str();
  s_gib->add_option("--a0", gib.priors.a0, "Inverse-gamma shape numerator")->capture_default_str();
  s_gib->add_option("--b0", gib.priors.b0, "Inverse-gamma rate numerator")->capture_default_str();
  s_gib->add_flag("--no-standardize", gib.no_standardize, "Use the data as given");
  s_gib->add_flag("--store-factors", gib.cfg.store_factors, "Also write per-draw factor scores");
  s_gib->add_flag("--lower-triangular", gib.cfg.lower_triangular, "Fix the upper triangle of the loadings at zero");
  s_gib->add_option("--out", gib.out, "Output directory")->capture_default_str();

  auto add_sample_inputs = [](CLI::App* sc, std::string& input, std::string& sigma2, std::string& fdir) {
    sc->add_option("--input", input, "Loadings sample CSV")->required()->check(CLI::ExistingFile);
    sc->add_option("--sigma2", sigma2, "Companion sigma2.csv")->check(CLI::ExistingFile);
    sc->add_option("--factors-dir", fdir, "Directory holding factors_<t>.csv")->check(CLI::ExistingDirectory);
  };

  RspOpts rsp;
  auto* s_rsp = app.add_subcommand("rsp", "Varimax + sign-permutation reordering");
  add_sample_inputs(s_rsp, rsp.input, rsp.sigma2, rsp.factors_dir);
  s_rsp->add_option("--scheme", rsp.scheme, "exact | partial-sa | full-sa")->capture_default_str();
  s_rsp->add_option("--max-iter", rsp.cfg.max_outer_iters, "Maximum outer iterations")->capture_default_str();
  s_rsp->add_option("--eps-factor", rsp.cfg.convergence_factor, "Stop when the gain is below eps * T * p * q")->capture_default_str();
  s_rsp->add_option("--sa-loops", rsp.cfg.sa_loops, "Annealing steps B (0: 20 partial, 100 full)")->capture_default_str();
  s_rsp->add_option("--gamma", rsp.cfg.gamma, "Cooling scale")->capture_default_str();
  s_rsp->add_option("--gamma0", rsp.cfg.gamma0, "Cooling offset")->capture_default_str();
  s_rsp->add_option("--seed", rsp.cfg.rng_seed, "RNG seed")->capture_default_str();
  s_rsp->add_flag("--faithful-sa", rsp.cfg.faithful_sa, "Always commit the final annealing state");
  s_rsp->add_option("--restarts", rsp.cfg.restarts, "Extra runs from random initial transforms")->capture_default_str();
  s_rsp->add_flag("--no-varimax", rsp.no_varimax, "Skip the varimax step (input already rotated)");
  s_rsp->add_option("--varimax-eps", rsp.cfg.varimax.eps, "Varimax relative tolerance")->capture_default_str();
  s_rsp->add_flag("--normalize", rsp.cfg.varimax.normalize, "Kaiser row normalization in varimax");
  s_rsp->add_option("--threads", rsp.cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  s_rsp->add_option("--out", rsp.out, "Output directory")->capture_default_str();

  OpOpts op;
  auto* s_op = app.add_subcommand("procrustes", "Orthogonal Procrustes reordering baseline");
  add_sample_inputs(s_op, op.input, op.sigma2, op.factors_dir);
  s_op->add_option("--max-iter", op.cfg.max_iters, "Maximum iterations")->capture_default_str();
  s_op->add_option("--eps-factor", op.cfg.convergence_factor, "Stop when the gain is below eps * T * p * q")->capture_default_str();
  s_op->add_option("--init-draw", op.init_draw, "Draw used as the initial reference (1-based)")->capture_default_str();
  s_op->add_option("--varimax-eps", op.cfg.varimax.eps, "Varimax relative tolerance")->capture_default_str();
  s_op->add_flag("--normalize", op.cfg.varimax.normalize, "Kaiser row normalization in varimax");
  s_op->add_option("--seed", op.seed, "Recorded for reproducibility; the method is deterministic")->capture_default_str();
  s_op->add_option("--threads", op.cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  s_op->add_option("--out", op.out, "Output directory")->capture_default_str();

  SummarizeOpts sum;
  auto* s_sum = app.add_subcommand("summarize", "Posterior summaries, credible regions and effective factors");
  s_sum->add_option("--input", sum.input, "Reordered sample CSV")->required();
  s_sum->add_option("--level", sum.level, "Credible level")->capture_default_str();
  s_sum->add_option("--bins", sum.bins, "Histogram bins per entry")->capture_default_str();
  s_sum->add_option("--seed", sum.seed, "Recorded for reproducibility")->capture_default_str();
  s_sum->add_option("--out", sum.out, "Output directory")->capture_default_str();

  AlignOpts al;
  auto* s_al = app.add_subcommand("align-chains", "Put several reordered chains on one labeling");
  s_al->add_option("--inputs", al.inputs, "Reordered sample CSVs, one per chain")->required()->check(CLI::ExistingFile);
  s_al->add_option("--threads", al.threads, "Worker threads (0 = all cores)")->capture_default_str();
  s_al->add_option("--seed", al.seed, "Recorded for reproducibility")->capture_default_str();
  s_al->add_option("--out", al.out, "Output directory")->capture_default_str();

  BenchOpts bn;
  auto* s_bn = app.add_subcommand("bench", "Objective-versus-time comparison of the sign-permutation schemes");
  s_bn->add_option("--q-list", bn.q_list, "Factor counts")->delimiter(',')->capture_default_str();
  s_bn->add_option("--schemes", bn.schemes, "Schemes to run")->delimiter(',')->capture_default_str();
  s_bn->add_option("--repeats", bn.repeats, "Instances per q")->capture_default_str();
  s_bn->add_option("--draws", bn.draws, "Draws per instance")->capture_default_str();
  s_bn->add_option("--p-per-factor", bn.p_per_factor, "Variables per factor")->capture_default_str();
  s_bn->add_option("--noise", bn.noise, "Per-draw loading noise sd")->capture_default_str();
  s_bn->add_option("--max-iter", bn.max_iter, "Maximum outer iterations")->capture_default_str();
  s_bn->add_option("--sa-loops", bn.sa_loops, "Annealing steps (0: per-scheme defaults)")->capture_default_str();
  s_bn->add_flag("--include-exact", bn.include_exact, "Run the exact scheme for q > 10 too");
  s_bn->add_option("--seed", bn.seed, "RNG seed")->capture_default_str();
  s_bn->add_option("--threads", bn.threads, "Worker threads (0 = all cores)")->capture_default_str();
  s_bn->add_option("--out", bn.out, "Output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s_sim) cmd_simulate(sim);
    else if (*s_gib) cmd_gibbs(gib);
    else if (*s_rsp) cmd_rsp(rsp);
    else if (*s_op) cmd_procrustes(op);
    else if (*s_sum) cmd_summarize(sum);
    else if (*s_al) cmd_align(al);
    else if (*s_bn) cmd_bench(bn);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"varimax-rsp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace vrsp
