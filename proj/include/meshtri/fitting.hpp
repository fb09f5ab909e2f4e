// SPDX-License-Identifier: Apache-2.0
//
// Body-model fitting: Adam on 𝓔_fit = 𝓔_data + 𝓔_reg over (z, 6D global
// rotation, β, t), with gradients from the reverse-mode tape.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "meshtri/ad.hpp"
#include "meshtri/body_model.hpp"
#include "meshtri/mesh.hpp"

namespace meshtri {

/// Differentiable decoder from a pose code z to the 3·(J−1) axis-angle pose.
class PosePrior {
 public:
  virtual ~PosePrior() = default;
  virtual std::string name() const = 0;
  virtual int code_dims() const = 0;
  virtual int pose_dims() const = 0;
  virtual void decode(const double* z, double* pose) const = 0;
  virtual void decode(const ad::Var* z, ad::Var* pose) const = 0;
};

/// z is the pose itself.
class DirectPosePrior final : public PosePrior {
 public:
  explicit DirectPosePrior(int pose_dims = kPoseDims) : dims_(pose_dims) {}
  std::string name() const override { return "direct"; }
  int code_dims() const override { return dims_; }
  int pose_dims() const override { return dims_; }
  void decode(const double* z, double* pose) const override { std::copy(z, z + dims_, pose); }
  void decode(const ad::Var* z, ad::Var* pose) const override { std::copy(z, z + dims_, pose); }

 private:
  int dims_;
};

/// pose = mean + basis · z, basis stored pose_dims x code_dims row-major.
class LinearPosePrior final : public PosePrior {
 public:
  LinearPosePrior(std::vector<double> mean, std::vector<double> basis, int code_dims);
  std::string name() const override { return "linear"; }
  int code_dims() const override { return code_dims_; }
  int pose_dims() const override { return static_cast<int>(mean_.size()); }
  void decode(const double* z, double* pose) const override { decode_impl(z, pose); }
  void decode(const ad::Var* z, ad::Var* pose) const override { decode_impl(z, pose); }

 private:
  template <class T>
  void decode_impl(const T* z, T* pose) const {
    for (int r = 0; r < pose_dims(); ++r) {
      T acc = mean_[r];
      for (int c = 0; c < code_dims_; ++c) acc += basis_[static_cast<std::size_t>(r) * code_dims_ + c] * z[c];
      pose[r] = acc;
    }
  }
  std::vector<double> mean_;
  std::vector<double> basis_;
  int code_dims_;
};

enum class DataTerm { Vertices, Joints };

struct FitConfig {
  double learning_rate = 6e-2;
  int iterations = 500;
  double lambda_w = 6e-2;
  double lambda_z = 2e-6;
  double lambda_beta = 5e-6;
  double lambda_alpha = 5e-5;
  std::uint64_t seed = 0;
  DataTerm data_term = DataTerm::Vertices;
  /// Null selects DirectPosePrior.
  std::shared_ptr<const PosePrior> pose_prior;

  void validate() const;
  const PosePrior& prior() const;
  FitConfig without_regularizers() const;
};

struct TermBreakdown {
  double data = 0.0;
  double z = 0.0;
  double beta = 0.0;
  double wrist = 0.0;
  double alpha = 0.0;
  double reg = 0.0;    // λ-weighted sum
  double total = 0.0;  // data + reg
};

/// (1/N) Σ ‖a_n − b_n‖².
double data_term(const Points& fitted_sub, const Points& target);

/// Regularizer values at `params`; `data` and `total` are left at reg-only.
TermBreakdown reg_terms(const FitParams& params, const BodyModel& model, const FitConfig& cfg);

/// Decoded pose and full posed mesh for fit parameters.
std::vector<double> decode_pose(const FitParams& params, const FitConfig& cfg);
Points posed_mesh(const BodyModel& model, const FitParams& params, const FitConfig& cfg);

/// 𝓔_fit as a function of the flattened parameters [z, rot6d, β, t].
class FitObjective {
 public:
  /// In Vertices mode `target` holds N sub-vertices selected by `subop`; in
  /// Joints mode it holds the 17 regressed joints and `subop` is unused.
  FitObjective(const BodyModel& model, const Points& target, const SubsamplingOperator& subop, const FitConfig& cfg);

  int dims() const { return code_dims_ + 6 + model_.num_betas + 3; }
  std::vector<double> pack(const FitParams& p) const;
  FitParams unpack(std::span<const double> x) const;
  /// Fills `grad` (resized to dims()) when non-null.
  TermBreakdown evaluate(std::span<const double> x, std::vector<double>* grad) const;

 private:
  template <class T>
  TermBreakdown evaluate_t(const T* x, T* total) const;

  const BodyModel& model_;
  const Points& target_;
  const FitConfig& cfg_;
  int code_dims_;
  std::vector<int> ids_;  // vertices skinned each evaluation
  std::vector<std::pair<int, double>> row_weights_;  // Joints mode: G restricted to ids_
  std::vector<std::size_t> row_offsets_;
};

struct FitResult {
  FitParams params;
  Points fitted_mesh;
  Points fitted_sub;
  Points joints;
  std::vector<double> cost_trace;  // 𝓔_fit before each update
  TermBreakdown terms;             // at the returned params
};

/// Neutral start: zero code and shape, identity rotation, t = target centroid.
FitParams neutral_init(const BodyModel& model, const Points& target, const FitConfig& cfg);

FitResult fit(const BodyModel& model, const Points& target, const SubsamplingOperator& subop, const FitConfig& cfg,
              const FitParams* init = nullptr);

/// G · fitted mesh.
Points fit_joints(const FitResult& result, const BodyModel& model);

}  // namespace meshtri
