#include "eqlab/tasks/task.hpp"

#include <cmath>
#include <numbers>

#include "eqlab/core/error.hpp"

namespace eqlab {

namespace {

double sgn(double v) { return v >= 0.0 ? 1.0 : -1.0; }

Task gaussian_task(std::string name, int d, LabelKind kind, std::function<double(const Vector&)> labeler) {
  Task t;
  t.name = std::move(name);
  t.d = d;
  t.label_kind = kind;
  t.sampler = [d](RngStream& r) { return gaussian_vector(d, r); };
  t.labeler = std::move(labeler);
  return t;
}

Task finite_task(std::string name, Matrix support, std::function<double(const Vector&)> labeler) {
  Task t;
  t.name = std::move(name);
  t.d = static_cast<int>(support.rows());
  t.label_kind = LabelKind::Sign;
  t.labeler = std::move(labeler);
  t.support = std::move(support);
  const Matrix atoms = *t.support;
  t.sampler = [atoms](RngStream& r) -> Vector {
    return atoms.col(static_cast<Eigen::Index>(r.below(static_cast<std::uint64_t>(atoms.cols()))));
  };
  return t;
}

}  // namespace

Vector Task::draw(RngStream& rng) const { return sampler(rng); }

LabeledSet Task::sample(int n, RngStream& rng) const {
  if (n < 0) throw PreconditionError("sample size must be non-negative");
  Matrix x(d, n);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x.col(i) = sampler(rng);
    y(i) = labeler(x.col(i));
  }
  return LabeledSet(std::move(x), std::move(y), rng.seed());
}

Vector Task::label_all(const Matrix& points) const {
  if (points.rows() != d) throw DimensionError("task " + name + ": point dimension mismatch");
  Vector y(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) y(i) = labeler(points.col(i));
  return y;
}

LabeledSet Task::enumerate() const {
  if (!support) throw PreconditionError("task " + name + " has no finite support");
  return LabeledSet(*support, label_all(*support));
}

Task onehot_task(int d) {
  if (d < 2) throw PreconditionError("onehot_task requires d >= 2");
  Matrix atoms = Matrix::Zero(d, 2 * d);
  for (int i = 0; i < d; ++i) {
    atoms(i, 2 * i) = 1.0;
    atoms(i, 2 * i + 1) = -1.0;
  }
  return finite_task("onehot", std::move(atoms), [](const Vector& x) { return sgn(x.sum()); });
}

Task quadratic_split_task(int d2) {
  if (d2 < 2 || d2 % 2 != 0) throw PreconditionError("quadratic_split_task requires an even dimension");
  const int h = d2 / 2;
  return gaussian_task("quadratic-split", d2, LabelKind::Sign, [h](const Vector& x) {
    return sgn(x.head(h).squaredNorm() - x.tail(h).squaredNorm());
  });
}

Task alpha_quadratic_task(const Vector& alpha) {
  if (alpha.size() < 1) throw PreconditionError("alpha_quadratic_task requires d >= 1");
  return gaussian_task("alpha-quadratic", static_cast<int>(alpha.size()), LabelKind::Sign,
                       [alpha](const Vector& x) { return sgn(alpha.dot(x.cwiseProduct(x))); });
}

Task hU_task(const Matrix& u) {
  require_square(u, "hU_task");
  const int d = static_cast<int>(u.rows());
  return gaussian_task("hU", 2 * d, LabelKind::Sign,
                       [u, d](const Vector& x) { return sgn(x.head(d).dot(u * x.tail(d))); });
}

Task quadratic_regression_task(const Matrix& m) {
  require_square(m, "quadratic_regression_task");
  return gaussian_task("quadratic-regression", static_cast<int>(m.rows()), LabelKind::Real,
                       [m](const Vector& x) { return x.dot(m * x); });
}

Task texture_task(int d) {
  if (d < 5) throw PreconditionError("texture_task requires d >= 5");
  Matrix atoms = Matrix::Zero(d, 2 * d);
  for (int i = 0; i < d; ++i) {
    atoms(i, i) = 1.0;
    atoms((i + 2) % d, i) = 1.0;          // s_i
    atoms(i, d + i) = 1.0;
    atoms((i + 1) % d, d + i) = 1.0;      // t_i
  }
  return finite_task("texture", std::move(atoms), [d](const Vector& x) {
    double skip = 0.0, adjacent = 0.0;
    for (int i = 0; i < d; ++i) {
      skip += x(i) * x((i + 2) % d);
      adjacent += x(i) * x((i + 1) % d);
    }
    return sgn(skip - adjacent);
  });
}

GroupElement embed_subclass(const Matrix& u) {
  require_square(u, "embed_subclass");
  if (orthogonality_defect(u) > 1e-10) throw PreconditionError("embed_subclass: U is not orthogonal");
  const Eigen::Index d = u.rows();
  const double c = std::numbers::sqrt2 / 2.0;
  Matrix g(2 * d, 2 * d);
  g << c * Matrix::Identity(d, d), c * u, -c * Matrix::Identity(d, d), c * u;
  return GroupElement::orthogonal(std::move(g));
}

Task rotate_task(const Task& base, const GroupElement& g) {
  if (g.dim() != base.d) throw DimensionError("rotate_task: group dimension does not match the task");
  Task t = base;
  t.name = base.name + "@" + to_string(g.kind());
  auto inner_sampler = base.sampler;
  auto inner_labeler = base.labeler;
  t.sampler = [inner_sampler, g](RngStream& r) { return g.apply_inverse(inner_sampler(r)); };
  t.labeler = [inner_labeler, g](const Vector& x) { return inner_labeler(g.apply(x)); };
  if (base.support) t.support = g.apply_inverse_columns(*base.support);
  return t;
}

}  // namespace eqlab
