#include "eqlab/models/model.hpp"

#include <cmath>
#include <numbers>

#include "eqlab/core/error.hpp"
#include "eqlab/models/dual.hpp"

namespace eqlab {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Quadratic: return "quadratic";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

std::string to_string(Pooling p) { return p == Pooling::SumOfSquares ? "sum-of-squares" : "sum"; }

Activation parse_activation(const std::string& s) {
  if (s == "quadratic" || s == "square") return Activation::Quadratic;
  if (s == "relu") return Activation::Relu;
  if (s == "identity" || s == "linear") return Activation::Identity;
  throw PreconditionError("unknown activation '" + s + "'");
}

Pooling parse_pooling(const std::string& s) {
  if (s == "sum-of-squares" || s == "squares") return Pooling::SumOfSquares;
  if (s == "sum") return Pooling::Sum;
  throw PreconditionError("unknown pooling '" + s + "'");
}

void validate(const Architecture& arch) {
  if (const auto* fc = std::get_if<FCShape>(&arch)) {
    if (fc->widths.size() < 2) throw DimensionError("FC net needs at least one layer");
    if (fc->widths.back() != 1) throw DimensionError("FC net must have scalar output");
    for (int w : fc->widths)
      if (w < 1) throw DimensionError("FC layer widths must be positive");
  } else {
    const auto& g = std::get<CNNGeometry>(arch);
    if (g.d < 1 || g.block < 1 || g.blocks < 1 || g.d != g.block * g.blocks)
      throw DimensionError("CNN geometry requires d = block * blocks");
    if (g.k < 1 || g.k > g.d) throw DimensionError("CNN filter length must satisfy 1 <= k <= d");
  }
}

Architecture architecture_of(const Weights& w) {
  if (const auto* fc = std::get_if<FCWeights>(&w)) {
    FCShape s;
    s.activation = fc->activation;
    if (fc->layers.empty()) throw DimensionError("FC weights have no layers");
    s.widths.push_back(static_cast<int>(fc->layers.front().cols()));
    for (std::size_t i = 0; i < fc->layers.size(); ++i) {
      if (fc->layers[i].cols() != s.widths.back())
        throw DimensionError("FC layer " + std::to_string(i + 1) + " does not chain");
      s.widths.push_back(static_cast<int>(fc->layers[i].rows()));
    }
    return s;
  }
  return std::get<CNNWeights>(w).geometry;
}

void validate(const Weights& w) {
  const Architecture arch = architecture_of(w);
  validate(arch);
  if (const auto* c = std::get_if<CNNWeights>(&w)) {
    if (c->w.size() != c->geometry.k || c->a.size() != c->geometry.blocks)
      throw DimensionError("CNN weights do not match geometry");
  }
}

int input_dim(const Architecture& arch) {
  if (const auto* fc = std::get_if<FCShape>(&arch)) return fc->input_dim();
  return std::get<CNNGeometry>(arch).d;
}

int num_params(const Architecture& arch) {
  if (const auto* fc = std::get_if<FCShape>(&arch)) {
    int n = 0;
    for (std::size_t i = 1; i < fc->widths.size(); ++i) n += fc->widths[i] * fc->widths[i - 1];
    return n;
  }
  const auto& g = std::get<CNNGeometry>(arch);
  return g.k + g.blocks + 1;
}

ParamRange all_params(const Architecture& arch) { return {0, num_params(arch)}; }

ParamRange param_block(const Architecture& arch, int index) {
  if (const auto* fc = std::get_if<FCShape>(&arch)) {
    if (index < 0 || index >= fc->depth()) throw PreconditionError("FC layer index out of range");
    int off = 0;
    for (int i = 0; i < index; ++i) off += fc->widths[i] * fc->widths[i + 1];
    return {off, off + fc->widths[index] * fc->widths[index + 1]};
  }
  const auto& g = std::get<CNNGeometry>(arch);
  switch (index) {
    case 0: return {0, g.k};
    case 1: return {g.k, g.k + g.blocks};
    case 2: return {g.k + g.blocks, g.k + g.blocks + 1};
  }
  throw PreconditionError("CNN parameter block index must be 0, 1 or 2");
}

Vector flatten(const Weights& w) {
  validate(w);
  const Architecture arch = architecture_of(w);
  Vector theta(num_params(arch));
  if (const auto* fc = std::get_if<FCWeights>(&w)) {
    Eigen::Index off = 0;
    for (const Matrix& m : fc->layers) {
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) theta(off++) = m(i, j);
    }
  } else {
    const auto& c = std::get<CNNWeights>(w);
    theta << c.w, c.a, c.b;
  }
  return theta;
}

Weights unflatten(const Architecture& arch, const Vector& theta) {
  validate(arch);
  if (theta.size() != num_params(arch)) throw DimensionError("flat parameter vector has wrong length");
  if (const auto* fc = std::get_if<FCShape>(&arch)) {
    FCWeights w;
    w.activation = fc->activation;
    Eigen::Index off = 0;
    for (int l = 0; l < fc->depth(); ++l) {
      Matrix m(fc->widths[l + 1], fc->widths[l]);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = theta(off++);
      w.layers.push_back(std::move(m));
    }
    return w;
  }
  const auto& g = std::get<CNNGeometry>(arch);
  CNNWeights c;
  c.geometry = g;
  c.w = theta.head(g.k);
  c.a = theta.segment(g.k, g.blocks);
  c.b = theta(g.k + g.blocks);
  return c;
}

Weights zeros_like(const Architecture& arch) { return unflatten(arch, Vector::Zero(num_params(arch))); }

namespace {

template <class T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using RowT = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <class T>
using RowMajorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

template <class T>
MatT<T> activate(const MatT<T>& z, Activation a) {
  switch (a) {
    case Activation::Quadratic: return z.cwiseProduct(z);
    case Activation::Relu: return z.unaryExpr([](const T& t) { return t > T(0.0) ? t : T(0.0); });
    case Activation::Identity: return z;
  }
  return z;
}

template <class T>
MatT<T> activate_deriv(const MatT<T>& z, Activation a) {
  switch (a) {
    case Activation::Quadratic: return T(2.0) * z;
    // Subgradient 0 at the kink.
    case Activation::Relu: return z.unaryExpr([](const T& t) { return t > T(0.0) ? T(1.0) : T(0.0); });
    case Activation::Identity: return MatT<T>::Constant(z.rows(), z.cols(), T(1.0));
  }
  return z;
}

template <class T>
T softplus(const T& u) {
  using std::exp;
  using std::log1p;
  return u > T(0.0) ? u + log1p(exp(-u)) : log1p(exp(u));
}

template <class T>
T sigmoid(const T& u) {
  using std::exp;
  if (u >= T(0.0)) return T(1.0) / (T(1.0) + exp(-u));
  const T e = exp(u);
  return e / (T(1.0) + e);
}

// Sum of per-sample losses; writes dL/df into dldf when requested.
template <class T>
T loss_terms(const RowT<T>& f, const Vector& y, Loss loss, RowT<T>* dldf) {
  T total(0.0);
  if (dldf) dldf->resize(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (loss == Loss::Logistic) {
      const T z = f(i) * y(i);
      total += softplus(T(-1.0) * z) * kInvLn2;
      if (dldf) (*dldf)(i) = T(-y(i) * kInvLn2) * sigmoid(T(-1.0) * z);
    } else {
      const T r = f(i) - T(y(i));
      total += r * r;
      if (dldf) (*dldf)(i) = T(2.0) * r;
    }
  }
  return total;
}

// Shared evaluation kernel. Computes scores; if y is given, returns the summed
// loss and (optionally) its gradient with respect to theta.
template <class T>
struct Eval {
  static RowT<T> fc_scores(const FCShape& s, const VecT<T>& th, const MatT<T>& x,
                           std::vector<MatT<T>>* zs, std::vector<MatT<T>>* as) {
    MatT<T> a = x;
    Eigen::Index off = 0;
    const int L = s.depth();
    for (int l = 0; l < L; ++l) {
      const int r = s.widths[l + 1], c = s.widths[l];
      RowMajorMap<T> w(th.data() + off, r, c);
      off += static_cast<Eigen::Index>(r) * c;
      MatT<T> z = w * a;
      if (l == L - 1) {
        if (as) as->push_back(std::move(a));
        return z;
      }
      if (as) as->push_back(std::move(a));
      a = activate<T>(z, s.activation);
      if (zs) zs->push_back(std::move(z));
    }
    return RowT<T>();
  }

  static T fc(const FCShape& s, const VecT<T>& th, const MatT<T>& x, const Vector& y, Loss loss,
              VecT<T>* grad) {
    std::vector<MatT<T>> zs, as;
    const RowT<T> f = fc_scores(s, th, x, grad ? &zs : nullptr, grad ? &as : nullptr);
    RowT<T> dldf;
    const T total = loss_terms<T>(f, y, loss, grad ? &dldf : nullptr);
    if (!grad) return total;
    grad->resize(th.size());
    const int L = s.depth();
    std::vector<Eigen::Index> offs(L + 1, 0);
    for (int l = 0; l < L; ++l) offs[l + 1] = offs[l] + static_cast<Eigen::Index>(s.widths[l + 1]) * s.widths[l];
    MatT<T> delta = dldf;  // dL/dZ_L, 1 × n
    for (int l = L - 1; l >= 0; --l) {
      const int r = s.widths[l + 1], c = s.widths[l];
      const MatT<T> gw = delta * as[l].transpose();  // r × c
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) (*grad)(offs[l] + static_cast<Eigen::Index>(i) * c + j) = gw(i, j);
      if (l > 0) {
        RowMajorMap<T> w(th.data() + offs[l], r, c);
        delta = (w.transpose() * delta).cwiseProduct(activate_deriv<T>(zs[l - 1], s.activation));
      }
    }
    return total;
  }

  // Rows of x cyclically shifted so that row i holds x_{(i-j) mod d}.
  static MatT<T> shifted(const MatT<T>& x, int j) {
    const int d = static_cast<int>(x.rows());
    MatT<T> s(x.rows(), x.cols());
    for (int i = 0; i < d; ++i) s.row(i) = x.row((((i - j) % d) + d) % d);
    return s;
  }

  static RowT<T> cnn_scores(const CNNGeometry& g, const VecT<T>& th, const MatT<T>& x,
                            std::vector<MatT<T>>* shifts, MatT<T>* conv, MatT<T>* pooled) {
    const Eigen::Index n = x.cols();
    MatT<T> c = MatT<T>::Zero(g.d, n);
    for (int j = 0; j < g.k; ++j) {
      MatT<T> s = shifted(x, j);
      c += th(j) * s;
      if (shifts) shifts->push_back(std::move(s));
    }
    MatT<T> p(g.blocks, n);
    for (int b = 0; b < g.blocks; ++b) {
      const auto blk = c.middleRows(static_cast<Eigen::Index>(b) * g.block, g.block);
      if (g.pooling == Pooling::SumOfSquares)
        p.row(b) = blk.cwiseProduct(blk).colwise().sum();
      else
        p.row(b) = blk.colwise().sum();
    }
    RowT<T> f = th.segment(g.k, g.blocks).transpose() * p;
    f.array() += th(g.k + g.blocks);
    if (conv) *conv = std::move(c);
    if (pooled) *pooled = std::move(p);
    return f;
  }

  static T cnn(const CNNGeometry& g, const VecT<T>& th, const MatT<T>& x, const Vector& y,
               Loss loss, VecT<T>* grad) {
    std::vector<MatT<T>> shifts;
    MatT<T> c, p;
    const RowT<T> f = cnn_scores(g, th, x, grad ? &shifts : nullptr, &c, &p);
    RowT<T> dldf;
    const T total = loss_terms<T>(f, y, loss, grad ? &dldf : nullptr);
    if (!grad) return total;
    grad->resize(th.size());
    grad->segment(g.k, g.blocks) = p * dldf.transpose();
    (*grad)(g.k + g.blocks) = dldf.sum();
    MatT<T> dc(g.d, x.cols());
    for (int b = 0; b < g.blocks; ++b) {
      const T ab = th(g.k + b);
      for (int i = b * g.block; i < (b + 1) * g.block; ++i) {
        if (g.pooling == Pooling::SumOfSquares)
          dc.row(i) = (T(2.0) * ab) * c.row(i).cwiseProduct(dldf);
        else
          dc.row(i) = ab * dldf;
      }
    }
    for (int j = 0; j < g.k; ++j) (*grad)(j) = dc.cwiseProduct(shifts[j]).sum();
    return total;
  }

  static T run(const Architecture& arch, const VecT<T>& th, const MatT<T>& x, const Vector& y,
               Loss loss, VecT<T>* grad) {
    if (const auto* fc = std::get_if<FCShape>(&arch)) return Eval<T>::fc(*fc, th, x, y, loss, grad);
    return Eval<T>::cnn(std::get<CNNGeometry>(arch), th, x, y, loss, grad);
  }
};

void check_batch(const Architecture& arch, const Vector& theta, const Matrix& x) {
  if (theta.size() != num_params(arch)) throw DimensionError("flat parameter vector has wrong length");
  if (x.rows() != input_dim(arch))
    throw DimensionError("input dimension " + std::to_string(x.rows()) + " does not match model input " +
                         std::to_string(input_dim(arch)));
}

void check_data(const Architecture& arch, const Vector& theta, const LabeledSet& data) {
  check_batch(arch, theta, data.points);
  if (data.empty()) throw PreconditionError("loss requires a nonempty batch");
}

}  // namespace

Vector forward_batch(const Architecture& arch, const Vector& theta, const Matrix& x) {
  check_batch(arch, theta, x);
  if (const auto* fc = std::get_if<FCShape>(&arch))
    return Eval<double>::fc_scores(*fc, theta, x, nullptr, nullptr).transpose();
  return Eval<double>::cnn_scores(std::get<CNNGeometry>(arch), theta, x, nullptr, nullptr, nullptr)
      .transpose();
}

Vector forward_batch(const Weights& w, const Matrix& x) {
  return forward_batch(architecture_of(w), flatten(w), x);
}

double fc_forward(const FCWeights& w, const Vector& x) { return forward_batch(Weights(w), x)(0); }
double cnn_forward(const CNNWeights& w, const Vector& x) { return forward_batch(Weights(w), x)(0); }
double forward(const Weights& w, const Vector& x) { return forward_batch(w, x)(0); }

double surrogate(double z, Loss loss, double y) {
  RowT<double> f(1);
  f(0) = z;
  Vector yy(1);
  yy(0) = y;
  return loss_terms<double>(f, yy, loss, nullptr);
}

double loss_value(const Architecture& arch, const Vector& theta, const LabeledSet& data, Loss loss) {
  check_data(arch, theta, data);
  return Eval<double>::run(arch, theta, data.points, data.labels, loss, nullptr);
}

double loss_and_grad(const Architecture& arch, const Vector& theta, const LabeledSet& data,
                     Loss loss, Vector& grad) {
  check_data(arch, theta, data);
  return Eval<double>::run(arch, theta, data.points, data.labels, loss, &grad);
}

Gradient grad(const Weights& w, const LabeledSet& data, Loss loss) {
  const Architecture arch = architecture_of(w);
  Vector g;
  loss_and_grad(arch, flatten(w), data, loss, g);
  return unflatten(arch, g);
}

Matrix hessian(const Architecture& arch, const Vector& theta, const LabeledSet& data, Loss loss,
               std::optional<ParamRange> subset) {
  check_data(arch, theta, data);
  const ParamRange r = subset.value_or(all_params(arch));
  if (r.begin < 0 || r.end > theta.size() || r.size() <= 0)
    throw PreconditionError("hessian: parameter subset out of range");
  const MatT<Dual> x = data.points.cast<Dual>();
  VecT<Dual> th = theta.cast<Dual>();
  Matrix h(r.size(), r.size());
  VecT<Dual> g;
  for (int j = 0; j < r.size(); ++j) {
    th(r.begin + j).d = 1.0;
    Eval<Dual>::run(arch, th, x, data.labels, loss, &g);
    th(r.begin + j).d = 0.0;
    for (int i = 0; i < r.size(); ++i) h(i, j) = g(r.begin + i).d;
  }
  return h;
}

Matrix hessian(const Weights& w, const LabeledSet& data, Loss loss, std::optional<ParamRange> subset) {
  return hessian(architecture_of(w), flatten(w), data, loss, subset);
}

FCWeights weight_action(const GroupElement& g, const FCWeights& w) {
  if (w.layers.empty()) throw DimensionError("weight_action: empty FC weights");
  if (w.layers.front().cols() != g.dim())
    throw DimensionError("weight_action: group dimension does not match first layer");
  FCWeights out = w;
  // W_1 g⁻¹: row i of W_1 g⁻¹ is g⁻ᵀ applied to row i.
  out.layers.front() = w.layers.front() * g.inverse_matrix();
  return out;
}

Vector weight_action_flat(const Architecture& arch, const GroupElement& g, const Vector& theta) {
  if (!std::holds_alternative<FCShape>(arch))
    throw PreconditionError("weight-space action is only defined for the FC model");
  return flatten(weight_action(g, std::get<FCWeights>(unflatten(arch, theta))));
}

}  // namespace eqlab
