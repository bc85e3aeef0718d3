#include "ilnn/layers.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>

namespace ilnn {

namespace {

void check_row_norms(const Tensor& row_norms) {
  for (double v : row_norms.data()) {
    if (v < kMinHyperplaneNorm) {
      throw DegenerateHyperplaneError("hyperplane orientation norm below the 1e-12 floor");
    }
  }
}

}  // namespace

HyperplaneParams HyperplaneParams::init(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
  if (out_dim == 0 || in_dim == 0) throw ConfigError("HyperplaneParams: empty dimensions");
  const double stdev = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::vector<double> z(out_dim * in_dim);
  for (double& v : z) v = stdev * rng.normal();
  return HyperplaneParams{Tensor::from_data({out_dim, in_dim}, std::move(z)),
                          Tensor::zeros({out_dim})};
}

Tensor point_hyperplane_distance(const LorentzPoint& x, const Tensor& z, const Tensor& a) {
  if (z.rank() != 1 || z.size() != x.dim()) {
    throw DimensionError("point_hyperplane_distance: orientation length must equal the spatial dim");
  }
  if (a.size() != 1) throw ContractError("point_hyperplane_distance: scalar offset expected");
  const double sk = x.curvature().sqrt_neg();
  Tensor z_norm = norm(z);
  check_row_norms(z_norm);
  Tensor arg = sk * a;
  Tensor num = cosh(arg) * dot(z, x.space()) - sinh(arg) * z_norm * x.time();
  return abs(asinh(sk * num / z_norm)) / sk;
}

Tensor point_hyperplane_distance(const LorentzPoint& x, const Tensor& z, double a) {
  return point_hyperplane_distance(x, z, Tensor::scalar(a));
}

Tensor mlr_logits(const LorentzPoint& x, const HyperplaneParams& params) {
  if (params.Z.rank() != 2 || params.a.rank() != 1) {
    throw DimensionError("mlr_logits: Z must be a matrix and a a vector");
  }
  if (params.in_dim() != x.dim()) {
    throw DimensionError("mlr_logits: input dimension mismatch");
  }
  if (params.out_dim() != params.a.size()) {
    throw DimensionError("mlr_logits: one offset per hyperplane expected");
  }
  const double sk = x.curvature().sqrt_neg();

  Tensor zx = matmul(params.Z, x.space());                    // (m)
  Tensor row_norms = sqrt(sum_axis(mul(params.Z, params.Z), 1));
  check_row_norms(row_norms);
  Tensor arg = sk * params.a;
  Tensor alpha = cosh(arg) * zx - sinh(arg) * row_norms * x.time();
  Tensor v = sign(alpha) * row_norms * abs(asinh(sk * alpha / row_norms)) / sk;
  return v;
}

LorentzPoint plfc_from_logits(const Tensor& v, Curvature curvature) {
  if (v.rank() != 1 || v.size() < 1) throw DimensionError("plfc_from_logits: rank-1 logits expected");
  const double sk = curvature.sqrt_neg();
  Tensor ys = sinh(sk * v) / sk;
  return lift_space(ys, curvature);
}

Tensor coordinate_distance_logits(const LorentzPoint& y) {
  const double sk = y.curvature().sqrt_neg();
  return asinh(sk * y.space()) / sk;
}

LorentzPoint plfc_forward(const LorentzPoint& x, const HyperplaneParams& params,
                          const std::optional<LorentzPoint>& bias) {
  LorentzPoint y = plfc_from_logits(mlr_logits(x, params), x.curvature());
  if (bias.has_value()) {
    if (bias->curvature() != x.curvature()) throw ConfigError("plfc_forward: bias curvature mismatch");
    if (bias->dim() != y.dim()) throw DimensionError("plfc_forward: bias dimension mismatch");
    y = gyro_add(y, *bias);
  }
  return y;
}

std::pair<LorentzPoint, Tensor> lfc_head_forward(const Tensor& u, Curvature curvature) {
  if (u.rank() != 1 || u.size() < 1) throw DimensionError("lfc_head_forward: rank-1 input expected");
  if (!u.all_finite()) throw NumericDomainError("lfc_head_forward: non-finite input");
  const double sk = curvature.sqrt_neg();
  return {lift_space(u, curvature), asinh(sk * u) / sk};
}

double log_radius_scale(std::size_t n, std::size_t n_i) {
  if (n_i < 1 || n < n_i) throw ContractError("log_radius_scale: n >= n_i >= 1 required");
  if (n == n_i) return 1.0;
  const double d = boost::math::digamma(static_cast<double>(n) / 2.0) -
                   boost::math::digamma(static_cast<double>(n_i) / 2.0);
  return std::exp(0.5 * d);
}

LorentzPoint log_cat(const std::vector<LorentzPoint>& blocks) {
  if (blocks.empty()) throw ContractError("log_cat: at least one block required");
  const Curvature curv = blocks[0].curvature();
  const std::size_t d = blocks[0].dim();
  for (const LorentzPoint& b : blocks) {
    if (b.curvature() != curv) throw ConfigError("log_cat: curvature mismatch");
    if (b.dim() != d) throw DimensionError("log_cat: block dimensions must agree");
  }
  const std::size_t N = blocks.size();
  if (N == 1) {
    return unchecked_point(blocks[0].coords(), curv);
  }
  const double s = log_radius_scale(N * d, d);
  const double inv_k = 1.0 / curv.k;  // negative

  std::vector<Tensor> parts;
  parts.reserve(N + 1);
  Tensor time_acc = Tensor::scalar(0.0);
  for (const LorentzPoint& b : blocks) {
    Tensor t = reshape(b.time(), {});
    time_acc = time_acc + (mul(t, t) + inv_k);
    parts.push_back(s * b.space());
  }
  Tensor radicand = s * s * time_acc - inv_k;
  if (radicand.item() < 0.0) {
    throw InternalError("log_cat: negative time radicand from off-manifold inputs");
  }
  Tensor t_out = sqrt(radicand);
  std::vector<Tensor> coords;
  coords.reserve(N + 1);
  coords.push_back(reshape(t_out, {1}));
  for (Tensor& p : parts) coords.push_back(std::move(p));
  return unchecked_point(concat(coords), curv);
}

FeatureMap FeatureMap::from_points(std::size_t height, std::size_t width,
                                   std::vector<LorentzPoint> points) {
  if (height == 0 || width == 0 || points.size() != height * width) {
    throw DimensionError("FeatureMap: points must fill a height x width grid");
  }
  for (const LorentzPoint& p : points) {
    if (p.curvature() != points[0].curvature() || p.dim() != points[0].dim()) {
      throw ConfigError("FeatureMap: cells must share curvature and dimension");
    }
  }
  return FeatureMap{height, width, std::move(points)};
}

const LorentzPoint& FeatureMap::at(std::size_t row, std::size_t col) const {
  if (row >= height || col >= width) throw ContractError("FeatureMap::at: out of range");
  return points[row * width + col];
}

FeatureMap lorentz_conv(const FeatureMap& fmap, const HyperplaneParams& params,
                        const ConvSpec& spec,
                        const std::optional<LorentzPoint>& bias) {
  if (spec.kernel_h == 0 || spec.kernel_w == 0 || spec.stride == 0) {
    throw ConfigError("lorentz_conv: kernel and stride must be positive");
  }
  const std::size_t d = fmap.channel_dim();
  if (params.in_dim() != spec.kernel_h * spec.kernel_w * d) {
    throw ConfigError("lorentz_conv: params expect input dim kernel_h*kernel_w*channel_dim");
  }
  const std::size_t padded_h = fmap.height + 2 * spec.padding;
  const std::size_t padded_w = fmap.width + 2 * spec.padding;
  if (padded_h < spec.kernel_h || padded_w < spec.kernel_w) {
    throw ConfigError("lorentz_conv: kernel does not fit the padded extent");
  }
  const std::size_t out_h = (padded_h - spec.kernel_h) / spec.stride + 1;
  const std::size_t out_w = (padded_w - spec.kernel_w) / spec.stride + 1;

  const LorentzPoint pad = origin(fmap.curvature(), d);
  std::vector<LorentzPoint> out;
  out.reserve(out_h * out_w);
  std::vector<LorentzPoint> patch;
  patch.reserve(spec.kernel_h * spec.kernel_w);
  for (std::size_t oh = 0; oh < out_h; ++oh) {
    for (std::size_t ow = 0; ow < out_w; ++ow) {
      patch.clear();
      for (std::size_t kh = 0; kh < spec.kernel_h; ++kh) {
        for (std::size_t kw = 0; kw < spec.kernel_w; ++kw) {
          const std::ptrdiff_t row =
              static_cast<std::ptrdiff_t>(oh * spec.stride + kh) - static_cast<std::ptrdiff_t>(spec.padding);
          const std::ptrdiff_t col =
              static_cast<std::ptrdiff_t>(ow * spec.stride + kw) - static_cast<std::ptrdiff_t>(spec.padding);
          const bool inside = row >= 0 && col >= 0 && row < static_cast<std::ptrdiff_t>(fmap.height) &&
                              col < static_cast<std::ptrdiff_t>(fmap.width);
          patch.push_back(inside ? fmap.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col))
                                 : pad);
        }
      }
      out.push_back(plfc_forward(log_cat(patch), params, bias));
    }
  }
  return FeatureMap::from_points(out_h, out_w, std::move(out));
}

FeatureMap lorentz_avg_pool(const FeatureMap& fmap, std::size_t window_h, std::size_t window_w,
                            std::size_t stride) {
  if (window_h == 0 || window_w == 0 || stride == 0) {
    throw ConfigError("lorentz_avg_pool: window and stride must be positive");
  }
  if (fmap.height < window_h || fmap.width < window_w) {
    throw ConfigError("lorentz_avg_pool: window does not fit the feature map");
  }
  const std::size_t out_h = (fmap.height - window_h) / stride + 1;
  const std::size_t out_w = (fmap.width - window_w) / stride + 1;
  std::vector<LorentzPoint> out;
  out.reserve(out_h * out_w);
  std::vector<LorentzPoint> window;
  window.reserve(window_h * window_w);
  for (std::size_t oh = 0; oh < out_h; ++oh) {
    for (std::size_t ow = 0; ow < out_w; ++ow) {
      window.clear();
      for (std::size_t kh = 0; kh < window_h; ++kh)
        for (std::size_t kw = 0; kw < window_w; ++kw)
          window.push_back(fmap.at(oh * stride + kh, ow * stride + kw));
      out.push_back(lorentzian_centroid(window));
    }
  }
  return FeatureMap::from_points(out_h, out_w, std::move(out));
}

LorentzPoint lorentz_relu(const LorentzPoint& x) {
  return lift_space(relu(x.space()), x.curvature());
}

LorentzPoint lorentz_dropout(const LorentzPoint& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("lorentz_dropout: p must lie in [0,1)");
  if (mode == Mode::eval || p == 0.0) {
    return unchecked_point(x.coords(), x.curvature());
  }
  const std::size_t n = x.dim();
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(n);
  for (double& m : mask) m = rng.bernoulli(1.0 - p) ? keep_scale : 0.0;
  Tensor masked = mul(x.space(), Tensor::from_vector(std::move(mask)));
  return lift_space(masked, x.curvature());
}

}  // namespace ilnn
