#include "dglstm/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "dglstm/errors.hpp"
#include "dglstm/kernels.hpp"

namespace dglstm {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.shape_str() << " vs " << b.shape_str();
    throw DimensionError(os.str());
  }
}

void require_colvec(const Tensor& x, const char* op) {
  if (x.cols() != 1) {
    std::ostringstream os;
    os << op << ": expected column vector, got " << x.shape_str();
    throw DimensionError(os.str());
  }
}

}  // namespace

Tensor::Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    std::ostringstream os;
    os << "Tensor: negative dimensions " << rows << "x" << cols;
    throw DimensionError(os.str());
  }
  data_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Tensor::Tensor(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != static_cast<size_t>(rows) * cols) {
    std::ostringstream os;
    os << "Tensor: " << data_.size() << " values for shape " << shape_str();
    throw DimensionError(os.str());
  }
}

Tensor Tensor::colvec(std::initializer_list<double> values) {
  return Tensor(static_cast<int>(values.size()), 1, std::vector<double>(values));
}

Tensor Tensor::colvec(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(n, 1, std::move(values));
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[" << rows_ << "x" << cols_ << "]";
  return os.str();
}

double& Tensor::operator()(int i, int j) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
    std::ostringstream os;
    os << "Tensor: index (" << i << "," << j << ") outside " << shape_str();
    throw IndexError(os.str());
  }
  return data_[static_cast<size_t>(i) * cols_ + j];
}

double Tensor::operator()(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
    std::ostringstream os;
    os << "Tensor: index (" << i << "," << j << ") outside " << shape_str();
    throw IndexError(os.str());
  }
  return data_[static_cast<size_t>(i) * cols_ + j];
}

void Tensor::fill(double v) {
  for (auto& x : data_) x = v;
}

Tensor matvec(const Tensor& W, const Tensor& x) {
  require_colvec(x, "matvec");
  if (W.cols() != x.rows()) {
    std::ostringstream os;
    os << "matvec: " << W.shape_str() << " * " << x.shape_str();
    throw DimensionError(os.str());
  }
  Tensor y(W.rows(), 1);
  kernels::matvec(W.data(), x.data(), y.data(), W.rows(), W.cols());
  return y;
}

void matvec_acc(const Tensor& W, const Tensor& x, Tensor& y) {
  require_colvec(x, "matvec_acc");
  require_colvec(y, "matvec_acc");
  if (W.cols() != x.rows() || W.rows() != y.rows()) {
    std::ostringstream os;
    os << "matvec_acc: " << W.shape_str() << " * " << x.shape_str() << " -> "
       << y.shape_str();
    throw DimensionError(os.str());
  }
  kernels::matvec_acc(W.data(), x.data(), y.data(), W.rows(), W.cols());
}

void matvec_t_acc(const Tensor& W, const Tensor& x, Tensor& y) {
  require_colvec(x, "matvec_t_acc");
  require_colvec(y, "matvec_t_acc");
  if (W.rows() != x.rows() || W.cols() != y.rows()) {
    std::ostringstream os;
    os << "matvec_t_acc: " << W.shape_str() << "^T * " << x.shape_str() << " -> "
       << y.shape_str();
    throw DimensionError(os.str());
  }
  kernels::matvec_t_acc(W.data(), x.data(), y.data(), W.rows(), W.cols());
}

void outer_acc(Tensor& G, const Tensor& u, const Tensor& v) {
  require_colvec(u, "outer_acc");
  require_colvec(v, "outer_acc");
  if (G.rows() != u.rows() || G.cols() != v.rows()) {
    std::ostringstream os;
    os << "outer_acc: " << u.shape_str() << " * " << v.shape_str() << "^T -> "
       << G.shape_str();
    throw DimensionError(os.str());
  }
  kernels::outer_acc(G.data(), u.data(), v.data(), G.rows(), G.cols());
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator+");
  Tensor out = a;
  for (long i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator-");
  Tensor out = a;
  for (long i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor operator*(double s, const Tensor& a) {
  Tensor out = a;
  for (long i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

void add_in_place(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add_in_place");
  for (long i = 0; i < a.size(); ++i) a[i] += b[i];
}

void axpy(double s, const Tensor& x, Tensor& y) {
  require_same_shape(x, y, "axpy");
  for (long i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out = a;
  for (long i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

void hadamard_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  require_same_shape(a, b, "hadamard_acc");
  require_same_shape(a, out, "hadamard_acc");
  for (long i = 0; i < out.size(); ++i) out[i] += a[i] * b[i];
}

Tensor one_minus(const Tensor& a) {
  Tensor out = a;
  for (long i = 0; i < out.size(); ++i) out[i] = 1.0 - out[i];
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tensor out = a;
  for (long i = 0; i < out.size(); ++i) {
    const double v = out[i];
    // Split by sign so exp never overflows.
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return out;
}

Tensor tanh_ew(const Tensor& a) {
  Tensor out = a;
  for (long i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return out;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (long i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares(const Tensor& a) {
  double acc = 0.0;
  for (long i = 0; i < a.size(); ++i) acc += a[i] * a[i];
  return acc;
}

bool all_finite(const Tensor& a) {
  for (long i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

Tensor softmax(const Tensor& logits) {
  require_colvec(logits, "softmax");
  if (logits.rows() == 0) throw DimensionError("softmax: empty logits");
  double mx = logits[0];
  for (long i = 1; i < logits.size(); ++i)
    if (logits[i] > mx) mx = logits[i];
  Tensor probs(logits.rows(), 1);
  double z = 0.0;
  for (long i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    z += probs[i];
  }
  for (long i = 0; i < probs.size(); ++i) probs[i] /= z;
  return probs;
}

double softmax_xent(const Tensor& logits, int target, Tensor* probs_out) {
  require_colvec(logits, "softmax_xent");
  if (logits.rows() == 0) throw DimensionError("softmax_xent: empty logits");
  if (target < 0 || target >= logits.rows()) {
    std::ostringstream os;
    os << "softmax_xent: target " << target << " outside " << logits.shape_str();
    throw IndexError(os.str());
  }
  double mx = logits[0];
  for (long i = 1; i < logits.size(); ++i)
    if (logits[i] > mx) mx = logits[i];
  double z = 0.0;
  for (long i = 0; i < logits.size(); ++i) z += std::exp(logits[i] - mx);
  const double loss = std::log(z) - (logits[target] - mx);
  if (probs_out) {
    Tensor probs(logits.rows(), 1);
    for (long i = 0; i < logits.size(); ++i) probs[i] = std::exp(logits[i] - mx) / z;
    *probs_out = std::move(probs);
  }
  return loss;
}

}  // namespace dglstm
