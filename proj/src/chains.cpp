#include "vrsp/chains.hpp"

#include "vrsp/parallel.hpp"

namespace vrsp {

ChainAlignment align_chains(const std::vector<LoadingsSample>& chains, int threads) {
  if (chains.size() < 2) throw std::invalid_argument("align_chains: need at least two chains");
  const int p = chains.front().p(), q = chains.front().q();
  for (const auto& c : chains) {
    c.validate();
    if (c.p() != p || c.q() != q) throw DimensionError("align_chains: chains differ in (p, q)");
  }
  const int C = static_cast<int>(chains.size());

  std::vector<Matrix> raw_means(C);
  int anchor = 0;
  double best_mass = -1.0;
  for (int c = 0; c < C; ++c) {
    raw_means[c] = sample_mean(chains[c]);
    const double mass = raw_means[c].cwiseAbs().sum();
    if (mass > best_mass) {
      best_mass = mass;
      anchor = c;
    }
  }

  // Start from each mean matched to the anchor's mean, then refine jointly.
  const SignedPermutation id = SignedPermutation::identity(q);
  std::vector<SignedPermutation> start(C);
  LoadingsSample means(p, q);
  for (int c = 0; c < C; ++c) {
    start[c] = sp_step_exact(raw_means[c], raw_means[anchor], &id).sp;
    means.push_back(apply_signed_permutation(raw_means[c], start[c]));
  }

  RspConfig cfg;
  cfg.rotate = false;
  cfg.scheme = SpScheme::Exact;
  cfg.threads = threads;
  const RspResult stage = rsp_run(means, cfg);

  ChainAlignment out;
  out.anchor = anchor;
  std::vector<SignedPermutation> total(C);
  for (int c = 0; c < C; ++c) total[c] = compose(stage.transforms[c].sp, start[c]);
  const SignedPermutation undo = invert(total[anchor]);
  out.per_chain.resize(C);
  out.aligned.resize(C);
  for (int c = 0; c < C; ++c) out.per_chain[c] = compose(undo, total[c]);
  parallel_for(C, threads, [&](int c) {
    const auto& qc = out.per_chain[c];
    const auto& src = chains[c];
    LoadingsSample dst(p, q, src.draws());
    for (int t = 0; t < src.draws(); ++t) dst.draw(t) = apply_signed_permutation(src.matrix(t), qc);
    if (src.has_factors()) {
      std::vector<Matrix> f(src.draws());
      for (int t = 0; t < src.draws(); ++t) f[t] = apply_signed_permutation(src.factors()[t], qc);
      dst.set_factors(std::move(f));
    }
    if (src.has_variances()) dst.set_variances(src.variances());
    out.aligned[c] = std::move(dst);
  });

  out.reference = Matrix::Zero(p, q);
  std::vector<Matrix> aligned_means(C);
  for (int c = 0; c < C; ++c) {
    aligned_means[c] = apply_signed_permutation(raw_means[c], out.per_chain[c]);
    out.reference += aligned_means[c];
  }
  out.reference /= static_cast<double>(C);
  for (int c = 0; c < C; ++c) out.objective += (aligned_means[c] - out.reference).squaredNorm();
  return out;
}

ChainAlignment align_chains(const std::vector<RspResult>& chains, int threads) {
  std::vector<LoadingsSample> samples;
  samples.reserve(chains.size());
  for (const auto& c : chains) samples.push_back(c.reordered);
  return align_chains(samples, threads);
}

}  // namespace vrsp
