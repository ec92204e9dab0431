#include "vrsp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace vrsp {

double ledermann_bound(int p) {
  return (2.0 * p + 1.0 - std::sqrt(8.0 * p + 1.0)) / 2.0;
}

void FaScenario::validate() const {
  if (n < 1) throw std::invalid_argument("scenario: n must be >= 1");
  if (p < 1) throw std::invalid_argument("scenario: p must be >= 1");
  if (q_true < 1) throw std::invalid_argument("scenario: q_true must be >= 1");
  if (!(q_true < ledermann_bound(p))) {
    throw std::invalid_argument("scenario: q_true must be below the Ledermann bound for p = " +
                                std::to_string(p));
  }
  if (static_cast<int>(block_map.size()) != p) {
    throw std::invalid_argument("scenario: block map must cover all p variables");
  }
  for (int b : block_map) {
    if (b < -1 || b >= q_true) throw std::invalid_argument("scenario: block map factor out of range");
  }
  if (sigma2.size() != 1 && static_cast<int>(sigma2.size()) != p) {
    throw std::invalid_argument("scenario: sigma2 must have 1 or p entries");
  }
  for (double s : sigma2) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("scenario: sigma2 must be > 0");
  }
  if (!(jitter >= 0.0)) throw std::invalid_argument("scenario: jitter must be >= 0");
}

std::vector<int> parse_blocks(const std::string& text, int p) {
  std::vector<int> map(p, -1);
  std::stringstream ss(text);
  std::string item;
  int factor = 0;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    int lo = 0, hi = 0;
    try {
      if (dash == std::string::npos) {
        lo = hi = std::stoi(item);
      } else {
        lo = std::stoi(item.substr(0, dash));
        hi = std::stoi(item.substr(dash + 1));
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("blocks: cannot parse '" + item + "'");
    }
    if (lo < 1 || hi > p || lo > hi) throw std::invalid_argument("blocks: range '" + item + "' outside 1.." + std::to_string(p));
    for (int r = lo; r <= hi; ++r) {
      if (map[r - 1] != -1) throw std::invalid_argument("blocks: variable " + std::to_string(r) + " listed twice");
      map[r - 1] = factor;
    }
    ++factor;
  }
  if (factor == 0) throw std::invalid_argument("blocks: nothing given");
  return map;
}

std::vector<int> even_blocks(int p, int q) {
  std::vector<int> map(p);
  for (int r = 0; r < p; ++r) map[r] = static_cast<int>(static_cast<long long>(r) * q / p);
  return map;
}

SyntheticData generate_synthetic(const FaScenario& scn) {
  scn.validate();
  std::mt19937_64 rng(scn.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> jit(-scn.jitter, scn.jitter);

  SyntheticData out;
  out.truth = LoadingsMatrix::Zero(scn.p, scn.q_true);
  for (int r = 0; r < scn.p; ++r) {
    if (scn.block_map[r] >= 0) out.truth(r, scn.block_map[r]) = scn.loading_scale + jit(rng);
  }
  out.sigma2.resize(scn.p);
  for (int r = 0; r < scn.p; ++r) out.sigma2(r) = scn.sigma2.size() == 1 ? scn.sigma2[0] : scn.sigma2[r];

  out.factors.resize(scn.n, scn.q_true);
  for (int i = 0; i < scn.n; ++i)
    for (int j = 0; j < scn.q_true; ++j) out.factors(i, j) = normal(rng);
  out.data = out.factors * out.truth.transpose();
  for (int i = 0; i < scn.n; ++i)
    for (int r = 0; r < scn.p; ++r) out.data(i, r) += std::sqrt(out.sigma2(r)) * normal(rng);
  return out;
}

LoadingsSample relabeling_instance(int p, int q, int T, double noise, std::uint64_t seed) {
  if (p < 1 || q < 1 || T < 1) throw std::invalid_argument("relabeling_instance: need p, q, T >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("relabeling_instance: noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> jit(-0.1, 0.1);
  const auto blocks = even_blocks(p, q);
  LoadingsMatrix base(p, q);
  for (int r = 0; r < p; ++r)
    for (int j = 0; j < q; ++j) base(r, j) = j == blocks[r] ? 0.8 + jit(rng) : 0.1 * normal(rng);

  LoadingsSample out(p, q, T);
  std::vector<int> nu(q);
  Matrix d(p, q);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < q; ++j)
      for (int r = 0; r < p; ++r) d(r, j) = base(r, j) + noise * normal(rng);
    std::vector<int> s(q);
    for (int j = 0; j < q; ++j) s[j] = (rng() & 1U) ? -1 : 1;
    std::iota(nu.begin(), nu.end(), 0);
    std::shuffle(nu.begin(), nu.end(), rng);
    out.draw(t) = apply_signed_permutation(d, SignedPermutation(std::move(s), nu));
  }
  return out;
}

}  // namespace vrsp
