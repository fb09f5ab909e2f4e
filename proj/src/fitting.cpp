// SPDX-License-Identifier: Apache-2.0
#include "meshtri/fitting.hpp"

#include <cmath>
#include <map>

namespace meshtri {

LinearPosePrior::LinearPosePrior(std::vector<double> mean, std::vector<double> basis, int code_dims)
    : mean_(std::move(mean)), basis_(std::move(basis)), code_dims_(code_dims) {
  if (code_dims_ < 0 || basis_.size() != mean_.size() * static_cast<std::size_t>(code_dims_))
    throw Error(ErrorCode::DimensionMismatch, "linear prior basis must be pose_dims x code_dims");
}

void FitConfig::validate() const {
  if (iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
  for (double l : {lambda_w, lambda_z, lambda_beta, lambda_alpha})
    if (!(l >= 0.0)) throw Error(ErrorCode::InvalidConfig, "regularizer weights must be >= 0");
}

const PosePrior& FitConfig::prior() const {
  static const DirectPosePrior direct;
  return pose_prior ? *pose_prior : direct;
}

FitConfig FitConfig::without_regularizers() const {
  FitConfig c = *this;
  c.lambda_w = c.lambda_z = c.lambda_beta = c.lambda_alpha = 0.0;
  return c;
}

double data_term(const Points& fitted_sub, const Points& target) {
  if (fitted_sub.rows() != target.rows())
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(fitted_sub.rows()) + " vs " + std::to_string(target.rows()) + " rows");
  if (target.rows() == 0) return 0.0;
  return (fitted_sub - target).rowwise().squaredNorm().sum() / static_cast<double>(target.rows());
}

namespace {

template <class T>
void reg_values(const BodyModel& m, const FitConfig& cfg, const T* z, int code_dims, const T* pose, const T* beta,
                TermBreakdown& out, T& reg) {
  T ez = 0.0, eb = 0.0, ew = 0.0, ea = 0.0;
  for (int i = 0; i < code_dims; ++i) ez += z[i] * z[i];
  for (int b = 0; b < m.num_betas; ++b) eb += beta[b] * beta[b];
  for (int wj : m.wrist_joints)
    for (int d = 0; d < 3; ++d) {
      const T& a = pose[3 * (wj - 1) + d];
      ew += a * a;
    }
  for (const auto& h : m.hinge_dofs) {
    using std::exp;
    ea += exp(static_cast<double>(h.sign) * pose[3 * (h.joint - 1) + h.axis]);
  }
  reg = cfg.lambda_z * ez + cfg.lambda_beta * eb + cfg.lambda_w * ew + cfg.lambda_alpha * ea;
  out.z = ad::value(ez);
  out.beta = ad::value(eb);
  out.wrist = ad::value(ew);
  out.alpha = ad::value(ea);
  out.reg = ad::value(reg);
}

void check_dims(const FitParams& p, const BodyModel& m, const FitConfig& cfg) {
  const PosePrior& prior = cfg.prior();
  if (prior.pose_dims() != m.pose_dims())
    throw Error(ErrorCode::DimensionMismatch, "pose prior decodes " + std::to_string(prior.pose_dims()) +
                                                  " values, model needs " + std::to_string(m.pose_dims()));
  if (static_cast<int>(p.z.size()) != prior.code_dims())
    throw Error(ErrorCode::DimensionMismatch, "pose code has " + std::to_string(p.z.size()) + " entries, prior expects " +
                                                  std::to_string(prior.code_dims()));
  if (static_cast<int>(p.beta.size()) != m.num_betas)
    throw Error(ErrorCode::DimensionMismatch, "beta has " + std::to_string(p.beta.size()) + " entries, model has " +
                                                  std::to_string(m.num_betas));
}

}  // namespace

TermBreakdown reg_terms(const FitParams& params, const BodyModel& model, const FitConfig& cfg) {
  check_dims(params, model, cfg);
  const std::vector<double> pose = decode_pose(params, cfg);
  TermBreakdown out;
  double reg = 0.0;
  reg_values(model, cfg, params.z.data(), static_cast<int>(params.z.size()), pose.data(), params.beta.data(), out,
             reg);
  out.total = out.reg;
  return out;
}

std::vector<double> decode_pose(const FitParams& params, const FitConfig& cfg) {
  const PosePrior& prior = cfg.prior();
  if (static_cast<int>(params.z.size()) != prior.code_dims())
    throw Error(ErrorCode::DimensionMismatch, "pose code length " + std::to_string(params.z.size()));
  std::vector<double> pose(static_cast<std::size_t>(prior.pose_dims()));
  prior.decode(params.z.data(), pose.data());
  return pose;
}

Points posed_mesh(const BodyModel& model, const FitParams& params, const FitConfig& cfg) {
  check_dims(params, model, cfg);
  const std::vector<double> pose = decode_pose(params, cfg);
  const auto global = rot::from_6d(params.rot6d.data());
  const auto skel = lbs::pose_skeleton(model, pose.data(), global, params.beta.data());
  std::vector<int> ids(static_cast<std::size_t>(model.num_vertices()));
  for (int v = 0; v < model.num_vertices(); ++v) ids[v] = v;
  Points out(model.num_vertices(), 3);
  const double t[3] = {params.t.x(), params.t.y(), params.t.z()};
  lbs::skin_vertices(model, skel, params.beta.data(), t, std::span<const int>(ids), out.data());
  return out;
}

FitObjective::FitObjective(const BodyModel& model, const Points& target, const SubsamplingOperator& subop,
                           const FitConfig& cfg)
    : model_(model), target_(target), cfg_(cfg), code_dims_(cfg.prior().code_dims()) {
  cfg.validate();
  if (cfg.prior().pose_dims() != model.pose_dims())
    throw Error(ErrorCode::DimensionMismatch, "pose prior does not match the model's joint count");
  if (cfg.data_term == DataTerm::Vertices) {
    subop.validate();
    if (subop.source_v != model.num_vertices())
      throw Error(ErrorCode::DimensionMismatch, "subsampling operator expects " + std::to_string(subop.source_v) +
                                                    " vertices, model has " + std::to_string(model.num_vertices()));
    if (subop.size() != target.rows())
      throw Error(ErrorCode::DimensionMismatch, "target has " + std::to_string(target.rows()) + " rows, operator keeps " +
                                                    std::to_string(subop.size()));
    ids_ = subop.kept_indices;
  } else {
    if (target.rows() != model.joint_regressor.rows())
      throw Error(ErrorCode::DimensionMismatch, "joint target needs " + std::to_string(model.joint_regressor.rows()) +
                                                    " rows, got " + std::to_string(target.rows()));
    std::map<int, int> slot;
    for (const auto& row : model.regressor_rows)
      for (const auto& [v, w] : row) slot.emplace(v, 0);
    for (auto& [v, s] : slot) {
      s = static_cast<int>(ids_.size());
      ids_.push_back(v);
    }
    row_offsets_.push_back(0);
    for (const auto& row : model.regressor_rows) {
      for (const auto& [v, w] : row) row_weights_.emplace_back(slot.at(v), w);
      row_offsets_.push_back(row_weights_.size());
    }
  }
}

std::vector<double> FitObjective::pack(const FitParams& p) const {
  check_dims(p, model_, cfg_);
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(dims()));
  x.insert(x.end(), p.z.begin(), p.z.end());
  x.insert(x.end(), p.rot6d.begin(), p.rot6d.end());
  x.insert(x.end(), p.beta.begin(), p.beta.end());
  x.insert(x.end(), {p.t.x(), p.t.y(), p.t.z()});
  return x;
}

FitParams FitObjective::unpack(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dims())
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has " + std::to_string(x.size()) + " entries");
  FitParams p;
  auto it = x.begin();
  p.z.assign(it, it + code_dims_);
  it += code_dims_;
  std::copy(it, it + 6, p.rot6d.begin());
  it += 6;
  p.beta.assign(it, it + model_.num_betas);
  it += model_.num_betas;
  p.t = {it[0], it[1], it[2]};
  return p;
}

template <class T>
TermBreakdown FitObjective::evaluate_t(const T* x, T* total) const {
  const T* z = x;
  const T* r6 = x + code_dims_;
  const T* beta = r6 + 6;
  const T* t = beta + model_.num_betas;
  std::vector<T> pose(static_cast<std::size_t>(model_.pose_dims()));
  cfg_.prior().decode(z, pose.data());
  const auto global = rot::from_6d(r6);
  const auto skel = lbs::pose_skeleton(model_, pose.data(), global, beta);
  std::vector<T> verts(ids_.size() * 3);
  lbs::skin_vertices(model_, skel, beta, t, std::span<const int>(ids_), verts.data());

  T data = 0.0;
  if (cfg_.data_term == DataTerm::Vertices) {
    for (std::size_t n = 0; n < ids_.size(); ++n)
      for (int d = 0; d < 3; ++d) {
        const T diff = verts[3 * n + d] - target_(static_cast<Eigen::Index>(n), d);
        data += diff * diff;
      }
    data = data * (1.0 / static_cast<double>(ids_.size()));
  } else {
    const std::size_t nr = row_offsets_.size() - 1;
    for (std::size_t r = 0; r < nr; ++r)
      for (int d = 0; d < 3; ++d) {
        T j = 0.0;
        for (std::size_t e = row_offsets_[r]; e < row_offsets_[r + 1]; ++e)
          j += row_weights_[e].second * verts[3 * static_cast<std::size_t>(row_weights_[e].first) + d];
        const T diff = j - target_(static_cast<Eigen::Index>(r), d);
        data += diff * diff;
      }
    data = data * (1.0 / static_cast<double>(nr));
  }

  TermBreakdown out;
  T reg = 0.0;
  reg_values(model_, cfg_, z, code_dims_, pose.data(), beta, out, reg);
  *total = data + reg;
  out.data = ad::value(data);
  out.total = ad::value(*total);
  return out;
}

TermBreakdown FitObjective::evaluate(std::span<const double> x, std::vector<double>* grad) const {
  if (static_cast<int>(x.size()) != dims())
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has " + std::to_string(x.size()) + " entries");
  if (!grad) {
    double total = 0.0;
    return evaluate_t(x.data(), &total);
  }
  ad::Tape tape;
  std::vector<ad::Var> xv;
  xv.reserve(x.size());
  for (double v : x) xv.push_back(tape.variable(v));
  ad::Var total;
  const TermBreakdown out = evaluate_t(xv.data(), &total);
  const std::vector<double> adj = tape.gradient(total);
  grad->resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) (*grad)[i] = adj[static_cast<std::size_t>(xv[i].idx)];
  return out;
}

FitParams neutral_init(const BodyModel& model, const Points& target, const FitConfig& cfg) {
  FitParams p = FitParams::neutral(cfg.prior().code_dims(), model.num_betas);
  if (target.rows() > 0) p.t = target.colwise().mean().transpose();
  return p;
}

FitResult fit(const BodyModel& model, const Points& target, const SubsamplingOperator& subop, const FitConfig& cfg,
              const FitParams* init) {
  const FitObjective obj(model, target, subop, cfg);
  const FitParams start = init ? *init : neutral_init(model, target, cfg);
  std::vector<double> x = obj.pack(start);
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0), v(n, 0.0), g;
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double b1t = 1.0, b2t = 1.0;
  FitResult res;
  res.cost_trace.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    const TermBreakdown terms = obj.evaluate(x, &g);
    bool finite = std::isfinite(terms.total);
    for (double gi : g) finite = finite && std::isfinite(gi);
    if (!finite) throw Error(ErrorCode::NonFiniteCost, "non-finite cost or gradient at iteration " + std::to_string(it));
    res.cost_trace.push_back(terms.total);
    b1t *= b1;
    b2t *= b2;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mh = m[i] / (1.0 - b1t);
      const double vh = v[i] / (1.0 - b2t);
      x[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + eps);
    }
  }
  res.terms = obj.evaluate(x, nullptr);
  if (!std::isfinite(res.terms.total))
    throw Error(ErrorCode::NonFiniteCost, "non-finite cost after iteration " + std::to_string(cfg.iterations - 1));
  res.params = obj.unpack(x);
  res.fitted_mesh = posed_mesh(model, res.params, cfg);
  if (cfg.data_term == DataTerm::Vertices) res.fitted_sub = apply_subsample(subop, res.fitted_mesh);
  res.joints = regress_joints(model, res.fitted_mesh);
  return res;
}

Points fit_joints(const FitResult& result, const BodyModel& model) {
  return regress_joints(model, result.fitted_mesh);
}

}  // namespace meshtri
