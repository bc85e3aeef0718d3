#include "oracle.hpp"

#include <cmath>

namespace ilnn::oracle {

std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double step) {
  if (!(step > 0.0)) throw ContractError("finite_difference_gradient: positive step expected");
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double fp = f(x);
    x[i] = saved - step;
    const double fm = f(x);
    x[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericDomainError("finite_difference_gradient: non-finite evaluation");
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

namespace {

double dot_d(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq_d(const std::vector<double>& a) { return dot_d(a, a); }

std::vector<double> ball_from_point(const LorentzPoint& p) {
  // r x_s / (x0 + r), the inverse of the r-radius ball lift below.
  const double r = p.curvature().radius();
  const auto& c = p.coords().data();
  std::vector<double> u(c.size() - 1);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = r * c[i + 1] / (c[0] + r);
  return u;
}

LorentzPoint point_from_ball(const std::vector<double>& u, Curvature curv) {
  const double c = curv.neg();
  const double r = curv.radius();
  const double nsq = norm_sq_d(u);
  const double denom = 1.0 - c * nsq;
  std::vector<double> coords(u.size() + 1);
  coords[0] = r * (1.0 + c * nsq) / denom;
  for (std::size_t i = 0; i < u.size(); ++i) coords[i + 1] = 2.0 * u[i] / denom;
  return unchecked_point(Tensor::from_vector(std::move(coords)), curv);
}

}  // namespace

std::vector<double> mobius_add(const std::vector<double>& x, const std::vector<double>& y,
                               double c) {
  const double xy = dot_d(x, y);
  const double x2 = norm_sq_d(x);
  const double y2 = norm_sq_d(y);
  const double denom = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
  const double cx = 1.0 + 2.0 * c * xy + c * y2;
  const double cy = 1.0 - c * x2;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (cx * x[i] + cy * y[i]) / denom;
  return out;
}

double ball_distance(const std::vector<double>& u, const std::vector<double>& v, double c) {
  std::vector<double> diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - v[i];
  const double num = 2.0 * c * norm_sq_d(diff);
  const double den = (1.0 - c * norm_sq_d(u)) * (1.0 - c * norm_sq_d(v));
  return std::acosh(1.0 + num / den) / std::sqrt(c);
}

LorentzPoint ball_gyro_add(const LorentzPoint& x, const LorentzPoint& y) {
  const double c = x.curvature().neg();
  return point_from_ball(mobius_add(ball_from_point(x), ball_from_point(y), c),
                         x.curvature());
}

namespace {

struct LogitParts {
  double alpha = 0.0;
  double beta = 0.0;
  double sqrt_neg_k = 0.0;
};

LogitParts unsimplified_parts(const LorentzPoint& x, const std::vector<double>& z, double a) {
  LogitParts parts;
  parts.sqrt_neg_k = x.curvature().sqrt_neg();
  const double ca = std::cosh(parts.sqrt_neg_k * a);
  const double sa = std::sinh(parts.sqrt_neg_k * a);
  const auto& coords = x.coords().data();
  double zx = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) zx += z[i] * coords[i + 1];
  const double z_norm = std::sqrt(norm_sq_d(z));
  parts.alpha = ca * zx - sa * z_norm * coords[0];
  const double radicand = ca * ca * norm_sq_d(z) - sa * sa * z_norm * z_norm;
  if (radicand <= 0.0) {
    throw NumericDomainError("unsimplified evaluator: non-positive denominator radicand");
  }
  parts.beta = std::sqrt(radicand);
  return parts;
}

double sign_d(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double unsimplified_logit(const LorentzPoint& x, const std::vector<double>& z, double a) {
  const LogitParts p = unsimplified_parts(x, z, a);
  return sign_d(p.alpha) * p.beta *
         std::abs(std::asinh(p.sqrt_neg_k * p.alpha / p.beta)) / p.sqrt_neg_k;
}

double unsimplified_hyperplane_distance(const LorentzPoint& x, const std::vector<double>& z,
                                        double a) {
  const LogitParts p = unsimplified_parts(x, z, a);
  return std::abs(std::asinh(p.sqrt_neg_k * p.alpha / p.beta)) / p.sqrt_neg_k;
}

LogRadiusStats mc_log_radius(std::size_t block_dim, std::size_t block_count,
                             std::size_t samples, Rng& rng) {
  if (samples < 1000) throw ContractError("mc_log_radius: at least 10^3 samples expected");
  const Curvature curv(-1.0);
  LogRadiusStats stats;
  stats.scale = log_radius_scale(block_dim * block_count, block_dim);
  stats.samples = samples;

  // Per-sample mean of the per-block log radius: the pre value from the raw
  // blocks, the post value from the spatial slices of the log_cat output
  // (which carry the digamma scale).
  double pre_sum = 0.0, pre_sq = 0.0, post_sum = 0.0, post_sq = 0.0;
  std::vector<LorentzPoint> blocks;
  for (std::size_t s = 0; s < samples; ++s) {
    blocks.clear();
    double pre = 0.0;
    for (std::size_t b = 0; b < block_count; ++b) {
      std::vector<double> u(block_dim);
      for (double& v : u) v = rng.normal();
      pre += 0.5 * std::log(norm_sq_d(u));
      blocks.push_back(lift_space(Tensor::from_vector(std::move(u)), curv));
    }
    pre /= static_cast<double>(block_count);
    const LorentzPoint cat = log_cat(blocks);
    double post = 0.0;
    for (std::size_t b = 0; b < block_count; ++b) {
      Tensor contribution = slice(cat.space(), b * block_dim, block_dim);
      post += std::log(std::sqrt(norm_sq(contribution).item()));
    }
    post /= static_cast<double>(block_count);
    pre_sum += pre;
    pre_sq += pre * pre;
    post_sum += post;
    post_sq += post * post;
  }
  const double n = static_cast<double>(samples);
  stats.pre_mean = pre_sum / n;
  stats.post_mean = post_sum / n;
  stats.pre_stderr = std::sqrt((pre_sq / n - stats.pre_mean * stats.pre_mean) / n);
  stats.post_stderr = std::sqrt((post_sq / n - stats.post_mean * stats.post_mean) / n);
  return stats;
}

LorentzPoint frechet_mean_gd(const std::vector<LorentzPoint>& points, double step_size,
                             int iterations) {
  if (points.empty()) throw ContractError("frechet_mean_gd: empty batch");
  LorentzPoint mu = points[0];
  const double inv_m = 1.0 / static_cast<double>(points.size());
  for (int it = 0; it < iterations; ++it) {
    Tensor acc = Tensor::zeros({mu.ambient_dim()});
    for (const LorentzPoint& p : points) {
      acc = acc + log_map(mu, p).components();
    }
    mu = exp_map(mu, unchecked_tangent(mu, (step_size * inv_m) * acc));
    mu = project_to_hyperboloid(mu.coords(), mu.curvature());
  }
  return mu;
}

bool beats_perturbations(const std::function<double(const LorentzPoint&)>& objective,
                         const LorentzPoint& candidate, double radius, int count, Rng& rng) {
  const double own = objective(candidate);
  for (int i = 0; i < count; ++i) {
    std::vector<double> ambient(candidate.ambient_dim());
    for (double& v : ambient) v = rng.normal();
    // Project to the tangent space at the candidate, normalize to `radius`.
    Tensor raw = Tensor::from_vector(std::move(ambient));
    const double K = candidate.curvature().k;
    Tensor proj = raw - (K * minkowski_inner(candidate.coords(), raw)) * candidate.coords();
    Tensor q = minkowski_inner(proj, proj);
    const double norm_v = std::sqrt(std::max(q.item(), 0.0));
    if (norm_v == 0.0) continue;
    TangentVector t = unchecked_tangent(candidate, (radius / norm_v) * proj);
    if (objective(exp_map(candidate, t)) < own) return false;
  }
  return true;
}

LorentzPoint random_point(Curvature curvature, std::size_t n, double spread, Rng& rng) {
  LorentzPoint pole = origin(curvature, n);
  std::vector<double> comps(n + 1, 0.0);
  double nsq = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    comps[i] = spread * rng.normal();
    nsq += comps[i] * comps[i];
  }
  // Cap the geodesic radius at 3*spread: double precision cannot hold the
  // library's absolute tolerances once cosh of the radius gets large, and
  // the properties under test are about correctness, not overflow behavior.
  const double cap = 3.0 * spread;
  const double radius = curvature.sqrt_neg() * std::sqrt(nsq);
  if (radius > cap) {
    for (std::size_t i = 1; i <= n; ++i) comps[i] *= cap / radius;
  }
  return exp_map(pole, unchecked_tangent(pole, Tensor::from_vector(std::move(comps))));
}

}  // namespace ilnn::oracle
