#include "eqlab/training/learner.hpp"

namespace eqlab {

GroupSampler GroupSampler::haar() { return {"haar", [](int d, RngStream& r) { return haar_orthogonal(d, r); }}; }

GroupSampler GroupSampler::permutation() {
  return {"perm", [](int d, RngStream& r) { return uniform_permutation(d, r); }};
}

GroupSampler GroupSampler::sign_flip() {
  return {"sign", [](int d, RngStream& r) { return uniform_sign_flip(d, r); }};
}

GroupSampler GroupSampler::identity() {
  return {"identity", [](int d, RngStream&) { return GroupElement::identity(d); }};
}

Learner symmetrized(Learner inner, GroupSampler sampler) {
  Learner out;
  out.name = "sym-" + sampler.name + ":" + inner.name;
  out.fit = [inner = std::move(inner), sampler = std::move(sampler)](const LabeledSet& data, RngStream& rng) {
    const GroupElement g = sampler.draw(data.dim(), rng);
    const Predictor p = inner.fit(data.transformed(g), rng);
    Predictor wrapped([p, g](const Matrix& x) { return p.score_batch(g.apply_columns(x)); }, p.mode());
    wrapped.flagged = p.flagged;
    wrapped.note = p.note;
    return wrapped;
  };
  return out;
}

}  // namespace eqlab
