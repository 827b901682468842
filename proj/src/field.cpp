#include "conepme/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace conepme {

Field::Field(std::shared_ptr<const Grid> grid, double fill) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("Field: null grid");
  values_.assign(static_cast<std::size_t>(grid_->N()) * grid_->K(), fill);
  tips_.assign(grid_->manifold.tip_count(), fill);
}

Field Field::sample(std::shared_ptr<const Grid> grid,
                    const std::function<double(double, double, double)>& f) {
  Field out(grid);
  const auto& r = out.grid().radial;
  const auto& a = out.grid().angular;
  for (int i = 0; i < r.size; ++i)
    for (int k = 0; k < a.size; ++k) out(i, k) = f(r.x[i], r.x_right[i], a.nodes[k]);
  out.refresh_tip_values();
  return out;
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }) &&
         std::all_of(tips_.begin(), tips_.end(), [](double v) { return std::isfinite(v); });
}

double Field::ring_mean(int i) const {
  const auto& a = grid_->angular;
  double s = 0.0;
  double wsum = 0.0;
  for (int k = 0; k < a.size; ++k) {
    s += a.weights[k] * (*this)(i, k);
    wsum += a.weights[k];
  }
  return s / wsum;
}

double Field::tip_limit(int tip) const {
  const auto& r = grid_->radial;
  double xs[3];
  double fs[3];
  for (int k = 0; k < 3; ++k) {
    const int i = r.from_tip(k, tip);
    xs[k] = r.tip_distance(i, tip);
    fs[k] = ring_mean(i);
  }
  // Lagrange polynomial through the three innermost ring means, at distance 0.
  double out = 0.0;
  for (int a = 0; a < 3; ++a) {
    double l = 1.0;
    for (int b = 0; b < 3; ++b)
      if (b != a) l *= (0.0 - xs[b]) / (xs[a] - xs[b]);
    out += l * fs[a];
  }
  return out;
}

void Field::refresh_tip_values() {
  for (std::size_t t = 0; t < tips_.size(); ++t) tips_[t] = tip_limit(static_cast<int>(t));
}

Field& Field::operator+=(const Field& o) { return axpy(1.0, o); }
Field& Field::operator-=(const Field& o) { return axpy(-1.0, o); }

Field& Field::operator*=(double a) {
  for (double& v : values_) v *= a;
  for (double& v : tips_) v *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& o) {
  if (o.values_.size() != values_.size()) throw std::invalid_argument("Field: size mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += a * o.values_[j];
  for (std::size_t t = 0; t < tips_.size(); ++t) tips_[t] += a * o.tips_[t];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double max_abs_difference(const Field& a, const Field& b) {
  const auto va = a.values();
  const auto vb = b.values();
  if (va.size() != vb.size()) throw std::invalid_argument("max_abs_difference: size mismatch");
  double m = 0.0;
  for (std::size_t j = 0; j < va.size(); ++j) m = std::max(m, std::abs(va[j] - vb[j]));
  return m;
}

namespace {

constexpr char kMagic[8] = {'C', 'P', 'M', 'E', 'F', 'L', 'D', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("field file truncated");
  return v;
}

void put_doubles(std::ostream& os, std::span<const double> v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& is, std::size_t n) {
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("field file truncated");
  return v;
}

}  // namespace

void write_field_binary(std::ostream& os, const Field& f) {
  const auto& g = f.grid();
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kFieldFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.N()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.K()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.tip_values().size()));
  put_doubles(os, g.radial.x);
  put_doubles(os, g.angular.nodes);
  put_doubles(os, f.tip_values());
  put_doubles(os, f.values());
}

RawField read_field_binary(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("not a field file");
  RawField raw;
  raw.version = get<std::uint32_t>(is);
  if (raw.version != kFieldFormatVersion) throw std::runtime_error("unsupported field format version");
  raw.N = static_cast<int>(get<std::uint32_t>(is));
  raw.K = static_cast<int>(get<std::uint32_t>(is));
  const auto tips = get<std::uint32_t>(is);
  raw.x = get_doubles(is, raw.N);
  raw.theta = get_doubles(is, raw.K);
  raw.tips = get_doubles(is, tips);
  raw.values = get_doubles(is, static_cast<std::size_t>(raw.N) * raw.K);
  return raw;
}

void write_field_csv(std::ostream& os, const Field& f) {
  const auto& g = f.grid();
  os << "# conepme-field v" << kFieldFormatVersion << " N=" << g.N() << " K=" << g.K()
     << " tips=" << f.tip_values().size() << "\n";
  os << std::setprecision(17) << "tips";
  for (double t : f.tip_values()) os << "," << t;
  os << "\ni,k,x,theta,value\n";
  for (int i = 0; i < g.N(); ++i)
    for (int k = 0; k < g.K(); ++k)
      os << i << "," << k << "," << g.radial.x[i] << "," << g.angular.nodes[k] << "," << f(i, k) << "\n";
}

RawField read_field_csv(std::istream& is) {
  RawField raw;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# conepme-field v", 0) != 0) throw std::runtime_error("not a field CSV");
  int tips = 0;
  if (std::sscanf(line.c_str(), "# conepme-field v%u N=%d K=%d tips=%d", &raw.version, &raw.N, &raw.K, &tips) != 4)
    throw std::runtime_error("malformed field CSV header");
  if (raw.version != kFieldFormatVersion) throw std::runtime_error("unsupported field format version");
  std::getline(is, line);
  {
    std::istringstream ts(line);
    std::string cell;
    std::getline(ts, cell, ',');
    while (std::getline(ts, cell, ',')) raw.tips.push_back(std::stod(cell));
  }
  if (static_cast<int>(raw.tips.size()) != tips) throw std::runtime_error("tip count mismatch");
  std::getline(is, line);  // column header
  raw.x.assign(raw.N, 0.0);
  raw.theta.assign(raw.K, 0.0);
  raw.values.assign(static_cast<std::size_t>(raw.N) * raw.K, 0.0);
  for (std::size_t row = 0; row < raw.values.size(); ++row) {
    if (!std::getline(is, line)) throw std::runtime_error("field CSV truncated");
    int i = 0, k = 0;
    double x = 0, th = 0, v = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &i, &k, &x, &th, &v) != 5 || i < 0 || i >= raw.N || k < 0 ||
        k >= raw.K)
      throw std::runtime_error("malformed field CSV row");
    raw.x[i] = x;
    raw.theta[k] = th;
    raw.values[static_cast<std::size_t>(i) * raw.K + k] = v;
  }
  return raw;
}

Field bind_field(const RawField& raw, std::shared_ptr<const Grid> grid) {
  Field f(grid);
  const auto& g = f.grid();
  if (raw.N != g.N() || raw.K != g.K() || raw.tips.size() != f.tip_values().size())
    throw std::invalid_argument("field layout does not match grid");
  for (int i = 0; i < g.N(); ++i)
    if (std::abs(raw.x[i] - g.radial.x[i]) > 1e-12 * std::max(1.0, g.radial.x[i]))
      throw std::invalid_argument("field radial nodes do not match grid");
  std::copy(raw.values.begin(), raw.values.end(), f.values().begin());
  f.tip_values() = raw.tips;
  return f;
}

void save_field(const std::string& path, const Field& f) {
  const bool csv = path.size() > 4 && path.substr(path.size() - 4) == ".csv";
  std::ofstream os(path, csv ? std::ios::out : std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  if (csv)
    write_field_csv(os, f);
  else
    write_field_binary(os, f);
}

Field load_field(const std::string& path, std::shared_ptr<const Grid> grid) {
  const bool csv = path.size() > 4 && path.substr(path.size() - 4) == ".csv";
  std::ifstream is(path, csv ? std::ios::in : std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return bind_field(csv ? read_field_csv(is) : read_field_binary(is), std::move(grid));
}

}  // namespace conepme
