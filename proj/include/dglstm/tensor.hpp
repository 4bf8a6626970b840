#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace dglstm {

// Dense row-major matrix of doubles. Column vectors are n x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols);
  Tensor(int rows, int cols, std::vector<double> values);

  static Tensor colvec(std::initializer_list<double> values);
  static Tensor colvec(std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  long size() const { return static_cast<long>(rows_) * cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  bool same_shape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  double& operator()(int i, int j);
  double operator()(int i, int j) const;
  double& operator[](long i) { return data_[static_cast<size_t>(i)]; }
  double operator[](long i) const { return data_[static_cast<size_t>(i)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  void set_zero() { fill(0.0); }

  bool operator==(const Tensor& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// y = W * x, x and result are column vectors.
Tensor matvec(const Tensor& W, const Tensor& x);
// y += W * x
void matvec_acc(const Tensor& W, const Tensor& x, Tensor& y);
// y += W^T * x
void matvec_t_acc(const Tensor& W, const Tensor& x, Tensor& y);
// G += u * v^T
void outer_acc(Tensor& G, const Tensor& u, const Tensor& v);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
void add_in_place(Tensor& a, const Tensor& b);
void axpy(double s, const Tensor& x, Tensor& y);  // y += s * x

Tensor hadamard(const Tensor& a, const Tensor& b);
void hadamard_acc(const Tensor& a, const Tensor& b, Tensor& out);  // out += a .* b
Tensor one_minus(const Tensor& a);                                 // 1 - a, elementwise

Tensor sigmoid(const Tensor& a);
Tensor tanh_ew(const Tensor& a);

double dot(const Tensor& a, const Tensor& b);
double sum_squares(const Tensor& a);
bool all_finite(const Tensor& a);

// Numerically stable softmax of a column vector of logits.
Tensor softmax(const Tensor& logits);
// Cross-entropy loss -log softmax(logits)[target]; probs_out, if non-null,
// receives the full softmax distribution.
double softmax_xent(const Tensor& logits, int target, Tensor* probs_out = nullptr);

}  // namespace dglstm
