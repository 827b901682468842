#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "conepme/grid.hpp"

namespace conepme {

// Scalar function on the N x K node grid (row-major, radial index major)
// plus one E0 coefficient per tip.
class Field {
 public:
  Field() = default;
  explicit Field(std::shared_ptr<const Grid> grid, double fill = 0.0);

  // Samples f(x, x_right, theta) at every node; tip values taken as the
  // mode-0 extrapolation.
  static Field sample(std::shared_ptr<const Grid> grid,
                      const std::function<double(double x, double x_right, double theta)>& f);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  bool empty() const { return !grid_; }

  double& operator()(int i, int k) { return values_[grid_->index(i, k)]; }
  double operator()(int i, int k) const { return values_[grid_->index(i, k)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& tip_values() { return tips_; }
  const std::vector<double>& tip_values() const { return tips_; }

  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const;

  // Volume-weighted angular mean on ring i (the mode-0 radial profile).
  double ring_mean(int i) const;
  // Quadratic extrapolation of the ring means at the three innermost nodes to the tip.
  double tip_limit(int tip) const;
  void refresh_tip_values();

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);
  // this += a * o
  Field& axpy(double a, const Field& o);

  template <class F>
  Field map(F&& f) const {
    Field out(grid_);
    for (std::size_t j = 0; j < values_.size(); ++j) out.values_[j] = f(values_[j]);
    for (std::size_t t = 0; t < tips_.size(); ++t) out.tips_[t] = f(tips_[t]);
    return out;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
  std::vector<double> tips_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// max |a - b| over nodes
double max_abs_difference(const Field& a, const Field& b);

// Field serialization, version 1.
//
// Binary layout (native little-endian):
//   char[8]  magic "CPMEFLD1"
//   uint32   version (1)
//   uint32   N, K, tip count
//   float64  x[N]          radial node positions
//   float64  theta[K]      angular nodes
//   float64  tips[tip count]
//   float64  values[N*K]   row-major, radial index major
//
// CSV layout:
//   # conepme-field v1 N=<N> K=<K> tips=<T>
//   tips,<t0>[,<t1>]
//   i,k,x,theta,value      header row, then one row per node
struct RawField {
  std::uint32_t version = 1;
  int N = 0;
  int K = 0;
  std::vector<double> x;
  std::vector<double> theta;
  std::vector<double> tips;
  std::vector<double> values;
};

inline constexpr std::uint32_t kFieldFormatVersion = 1;

void write_field_binary(std::ostream& os, const Field& f);
RawField read_field_binary(std::istream& is);
void write_field_csv(std::ostream& os, const Field& f);
RawField read_field_csv(std::istream& is);

// Attaches raw data to a grid; throws if the node layout does not match.
Field bind_field(const RawField& raw, std::shared_ptr<const Grid> grid);

void save_field(const std::string& path, const Field& f);
Field load_field(const std::string& path, std::shared_ptr<const Grid> grid);

}  // namespace conepme
