#include "conepme/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace conepme {

namespace {

using Array = std::vector<double>;  // N x K, row-major

// d/ds along each angular column, second order everywhere.
Array d_s(const Array& v, int N, int K, double h) {
  Array out(v.size());
  for (int k = 0; k < K; ++k) {
    auto at = [&](int i) { return v[static_cast<std::size_t>(i) * K + k]; };
    for (int i = 0; i < N; ++i) {
      double d;
      if (i == 0)
        d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
      else if (i == N - 1)
        d = (3.0 * at(N - 1) - 4.0 * at(N - 2) + at(N - 3)) / (2.0 * h);
      else
        d = (at(i + 1) - at(i - 1)) / (2.0 * h);
      out[static_cast<std::size_t>(i) * K + k] = d;
    }
  }
  return out;
}

// multiply row i by s[i]
Array scale_rows(Array v, const std::vector<double>& s, int K) {
  for (std::size_t j = 0; j < v.size(); ++j) v[j] *= s[j / K];
  return v;
}

double smoothstep(double t) {
  // C-infinity transition from 1 (t <= 0) to 0 (t >= 1)
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return b / (a + b);
}

}  // namespace

double collar_cutoff(double r, double collar) { return smoothstep(2.0 * r / collar - 1.0); }

double mellin_norm(const Laplacian& lap, const Field& f, const NormSpec& spec) {
  if (spec.s < 0 || spec.s > 2) throw std::invalid_argument("mellin_norm: s must be 0, 1 or 2");
  if (!(spec.p > 1.0)) throw std::invalid_argument("mellin_norm: p must exceed 1");
  const Grid& g = lap.grid();
  const auto& r = g.radial;
  const auto& a = g.angular;
  const int N = g.N();
  const int K = g.K();
  const int n = g.n();
  const bool two_tips = g.manifold.topology == ConeManifold::Topology::suspension;
  const double collar = spec.collar > 0.0 ? spec.collar : g.manifold.collar_length;
  if (collar > (two_tips ? 0.5 : 1.0) * g.manifold.length())
    throw std::invalid_argument("mellin_norm: collar exceeds the manifold");

  Array f0(f.values().begin(), f.values().end());
  const ModeArray c = lap.to_modes(f);
  Array ang(f0.size()), ang2(f0.size());
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) {
      double s1 = 0.0, s2 = 0.0;
      for (int b = 0; b < K; ++b) {
        s1 += c(i, b) * a.grad(b, k);
        s2 += c(i, b) * lap.mode_for_basis(b).lambda * a.value(b, k);
      }
      ang[g.index(i, k)] = s1;
      ang2[g.index(i, k)] = s2;
    }

  // tip distance and the factors turning d/ds into x d/dx and d/dx
  std::vector<double> dist(N), euler(N), inv_dx(N);
  for (int i = 0; i < N; ++i) {
    dist[i] = two_tips ? std::min(r.x[i], r.x_right[i]) : r.x[i];
    euler[i] = dist[i] / r.dxds[i];
    inv_dx[i] = 1.0 / r.dxds[i];
  }
  const double h = r.step;

  std::vector<const Array*> collar_terms{&f0};
  std::vector<const Array*> body_terms{&f0};
  Array xf, xa, xxf, df, da, ddf, body_a, body_aa;
  if (spec.s >= 1) {
    xf = scale_rows(d_s(f0, N, K, h), euler, K);
    df = scale_rows(d_s(f0, N, K, h), inv_dx, K);
    std::vector<double> inv_phi(N);
    for (int i = 0; i < N; ++i) inv_phi[i] = 1.0 / g.phi[i];
    body_a = scale_rows(ang, inv_phi, K);
    collar_terms = {&f0, &xf, &ang};
    body_terms = {&f0, &df, &body_a};
    if (spec.s >= 2) {
      xxf = scale_rows(d_s(xf, N, K, h), euler, K);
      xa = scale_rows(d_s(ang, N, K, h), euler, K);
      ddf = scale_rows(d_s(df, N, K, h), inv_dx, K);
      da = scale_rows(scale_rows(d_s(ang, N, K, h), inv_dx, K), inv_phi, K);
      std::vector<double> inv_phi2(N);
      for (int i = 0; i < N; ++i) inv_phi2[i] = inv_phi[i] * inv_phi[i];
      body_aa = scale_rows(ang2, inv_phi2, K);
      collar_terms = {&f0, &xf, &ang, &xxf, &xa, &ang2};
      body_terms = {&f0, &df, &body_a, &ddf, &da, &body_aa};
    }
  }

  const double pw = 0.5 * (n + 1) - spec.gamma;
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    const bool in_collar = dist[i] <= collar;
    double ring_weight;
    double scale = 1.0;
    if (in_collar) {
      const double x = dist[i];
      ring_weight = h * r.dxds[i] / x * std::pow(g.phi[i] / x, n);
      scale = std::pow(x, pw);
    } else {
      ring_weight = h * g.volume_density[i];
    }
    const auto& terms = in_collar ? collar_terms : body_terms;
    for (int k = 0; k < K; ++k) {
      double s = 0.0;
      for (const Array* t : terms) s += std::pow(std::abs(scale * (*t)[g.index(i, k)]), spec.p);
      total += ring_weight * a.weights[k] * s;
    }
  }
  return std::pow(total, 1.0 / spec.p);
}

E0Split split_E0(const Field& f) {
  const Grid& g = f.grid();
  const int tips = g.manifold.tip_count();
  E0Split out;
  out.constants.assign(tips, 0.0);
  out.diverged.assign(tips, false);
  const double scale = std::max(1.0, f.max_abs());
  for (int t = 0; t < tips; ++t) {
    const double m0 = f.ring_mean(g.radial.from_tip(0, t));
    const double m1 = f.ring_mean(g.radial.from_tip(1, t));
    const double m2 = f.ring_mean(g.radial.from_tip(2, t));
    const double d1 = m0 - m1;
    const double d2 = m1 - m2;
    if (std::abs(d1) > std::abs(d2) && std::abs(d1) > 1e-12 * scale) {
      out.diverged[t] = true;
      out.constants[t] = m0;
    } else {
      out.constants[t] = f.tip_limit(t);
    }
  }
  out.remainder = f;
  const double collar = g.manifold.collar_length;
  for (int i = 0; i < g.N(); ++i) {
    double shift = 0.0;
    for (int t = 0; t < tips; ++t) shift += collar_cutoff(g.radial.tip_distance(i, t), collar) * out.constants[t];
    for (int k = 0; k < g.K(); ++k) out.remainder(i, k) -= shift;
  }
  out.remainder.refresh_tip_values();
  return out;
}

TipExpansion tip_decay_rate(const Field& f, int tip, std::optional<double> x_lo, std::optional<double> x_hi) {
  const Grid& g = f.grid();
  if (tip < 0 || tip >= g.manifold.tip_count()) throw std::invalid_argument("tip_decay_rate: no such tip");
  const E0Split split = split_E0(f);
  TipExpansion te;
  te.tip = tip;
  te.constant = split.constants[tip];
  te.diverged = split.diverged[tip];
  te.x_lo = x_lo.value_or(4.0 * g.spec.x_min);
  te.x_hi = x_hi.value_or(0.25 * g.manifold.collar_length);

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::vector<std::pair<double, double>> pts;
  double peak = 0.0;
  for (int i = 0; i < g.N(); ++i) {
    const double x = g.radial.tip_distance(i, tip);
    if (x < te.x_lo || x > te.x_hi) continue;
    double y = 0.0;
    for (int k = 0; k < g.K(); ++k) y = std::max(y, std::abs(split.remainder(i, k)));
    peak = std::max(peak, y);
    if (y > 0.0) pts.emplace_back(std::log(x), std::log(y));
  }
  if (peak < 1e-13 || pts.size() < 2) {
    te.flat = true;
    te.exponent = std::numeric_limits<double>::quiet_NaN();
    return te;
  }
  for (const auto& [lx, ly] : pts) {
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(pts.size());
  te.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double icpt = (sy - te.exponent * sx) / m;
  double res = 0.0;
  for (const auto& [lx, ly] : pts) res += std::pow(ly - icpt - te.exponent * lx, 2);
  te.residual = std::sqrt(res / m);
  te.points = static_cast<int>(pts.size());
  return te;
}

namespace {

// A pair (log difference, log distance) observed at one offset.
struct Quotients {
  std::vector<double> log_diff, log_dist;
  double log_sup(double alpha) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < log_diff.size(); ++p) best = std::max(best, log_diff[p] - alpha * log_dist[p]);
    return best;
  }
  void add(double diff, double dist) {
    if (diff <= 0.0 || dist <= 0.0) return;
    log_diff.push_back(std::log(diff));
    log_dist.push_back(std::log(dist));
  }
};

// alpha at which the sup quotient at the finer offset meets the coarser one.
double crossing(const Quotients& fine, const Quotients& coarse) {
  if (fine.log_diff.empty() || coarse.log_diff.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto gap = [&](double al) { return fine.log_sup(al) - coarse.log_sup(al); };
  double lo = 0.0, hi = 2.0;
  if (gap(lo) >= 0.0) return lo;
  if (gap(hi) <= 0.0) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Median crossing over consecutive offsets; saturates at the cap when the
// sup quotient at the cap stays bounded between the two finest offsets.
double exponent_from(const std::vector<Quotients>& levels, bool& saturated) {
  std::vector<double> roots;
  bool bounded = false;
  for (std::size_t o = 0; o + 1 < levels.size(); ++o) {
    const double c = crossing(levels[o], levels[o + 1]);
    if (std::isnan(c)) continue;
    roots.push_back(c);
    if (roots.size() == 1) bounded = levels[o].log_sup(kHolderCap) - levels[o + 1].log_sup(kHolderCap) <= std::log(1.1);
  }
  if (roots.empty()) {
    saturated = false;
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(roots.begin(), roots.end());
  const double med = roots[roots.size() / 2];
  saturated = bounded || med >= kHolderCap - 0.05;
  return saturated ? kHolderCap : std::min(med, kHolderCap);
}

}  // namespace

HolderEstimate holder_estimate(const std::vector<Field>& frames, const std::vector<double>& times) {
  if (frames.size() < 8 || frames.size() != times.size())
    throw std::invalid_argument("holder_estimate: need at least 8 frames with matching times");
  const Grid& g = frames.front().grid();
  const int N = g.N();
  const int K = g.K();
  const bool circle = g.manifold.cross_section.kind == CrossSection::Kind::circle;
  const double cscale = circle ? g.manifold.cross_section.circumference_scale : 1.0;

  HolderEstimate out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& fr : frames) {
    lo = std::min(lo, fr.min());
    hi = std::max(hi, fr.max());
  }
  if (hi - lo <= 1e-14 * std::max(1.0, std::abs(hi))) {
    out.degenerate = true;
    out.space = out.time = out.ratio = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const std::vector<int> offsets{1, 2, 4, 8, 16};
  std::vector<Quotients> radial(offsets.size()), angular(offsets.size());
  for (std::size_t oi = 0; oi < offsets.size(); ++oi) {
    const int o = offsets[oi];
    for (const auto& fr : frames) {
      for (int i = 0; i + o < N; ++i) {
        const double d = g.radial.x[i + o] - g.radial.x[i];
        for (int k = 0; k < K; ++k) radial[oi].add(std::abs(fr(i + o, k) - fr(i, k)), d);
      }
      // wide angular offsets measure chords, not local regularity
      if (o > std::max(1, K / 8)) continue;
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < K; ++k) {
          int k2 = k + o;
          if (k2 >= K) {
            if (!circle) continue;
            k2 -= K;
          }
          double dth = std::abs(g.angular.nodes[k2] - g.angular.nodes[k]);
          if (circle) dth = std::min(dth, 2.0 * std::numbers::pi - dth);
          angular[oi].add(std::abs(fr(i, k2) - fr(i, k)), g.phi[i] * cscale * dth);
        }
    }
  }
  bool sat_r = false, sat_a = false;
  const double ar = exponent_from(radial, sat_r);
  const double aa = exponent_from(angular, sat_a);
  if (std::isnan(aa) || (!std::isnan(ar) && ar <= aa)) {
    out.space = ar;
    out.space_saturated = sat_r;
  } else {
    out.space = aa;
    out.space_saturated = sat_a;
  }

  std::vector<Quotients> temporal;
  for (int o : {1, 2, 4}) {
    Quotients q;
    for (std::size_t a = 0; a + o < frames.size(); ++a) {
      const double dt = times[a + o] - times[a];
      for (std::size_t j = 0; j < frames[a].values().size(); ++j)
        q.add(std::abs(frames[a + o].values()[j] - frames[a].values()[j]), dt);
    }
    temporal.push_back(std::move(q));
  }
  out.time = exponent_from(temporal, out.time_saturated);
  out.ratio = out.time / out.space;
  return out;
}

}  // namespace conepme
