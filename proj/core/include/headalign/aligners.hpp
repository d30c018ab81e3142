// Coarse heading alignment by attitude decomposition: a closed-form dual-vector
// solution and a quaternion least-squares (Wahba) solution, each over
// integrated or instantaneous observation vectors.
#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "headalign/attitude.hpp"
#include "headalign/mooring_sim.hpp"
#include "headalign/strapdown.hpp"

namespace headalign {

enum class AlignMethod { kIDva, kADva, kIOba, kAOba };

std::string_view method_name(AlignMethod m);  ///< "I-DVA", ...
/// Throws invalid-argument for unknown names.
AlignMethod parse_method(std::string_view name);
ObservationForm observation_form(AlignMethod m);
bool is_dva(AlignMethod m);

inline constexpr AlignMethod kAllMethods[] = {AlignMethod::kIDva, AlignMethod::kADva,
                                              AlignMethod::kIOba, AlignMethod::kAOba};

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

/// H+(u) and H-(u): left and right quaternion-product matrices of the pure
/// quaternion [0, u], so that (H+(a) - H-(b)) q = a*q - q*b.
Mat4 quat_left_matrix(const Vec3& u);
Mat4 quat_right_matrix(const Vec3& u);

/// Closed-form C^{n0}_{b0} from two vector pairs (inverse of the stacked
/// n0-frame triad times the stacked b0-frame triad), projected onto SO(3).
/// Vectors are unit-normalized first. Throws degenerate-geometry.
Dcm dva_solve(const Vec3& u1_n0, const Vec3& u2_n0, const Vec3& u1_b0, const Vec3& u2_b0);

struct SymmetricEigen {
  Vec4 values;   ///< ascending
  Mat4 vectors;  ///< column i belongs to values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi on a symmetric 4x4. Stops when the off-diagonal Frobenius
/// norm drops below `tol` times max(1, |A|_F).
SymmetricEigen jacobi_eigen(const Mat4& a, double tol = 1e-13, int max_sweeps = 100);

class WahbaAccumulator {
 public:
  /// Adds one normalized pair; zero vectors are skipped and counted.
  void accumulate(const Vec3& u_n0, const Vec3& u_b0);

  const Mat4& k() const { return k_; }
  int count() const { return count_; }
  int skipped() const { return skipped_; }

 private:
  Mat4 k_ = Mat4::Zero();
  int count_ = 0;
  int skipped_ = 0;
};

struct WahbaSolution {
  Quaternion q;
  Dcm c_n0_b0;
  Vec4 eigenvalues;
};

/// Minimizes q^T K q over unit q. The solution quaternion maps b0 to n0:
/// C(q) = C^{n0}_{b0}. Throws ambiguous-attitude when the two smallest
/// eigenvalues are within `gap_tol`, insufficient-data when count < 2.
WahbaSolution oba_solve(const WahbaAccumulator& acc, double gap_tol = 1e-10);

struct AlignOptions {
  double dva_first_fraction = 0.5;
  double dva_second_fraction = 1.0;
  NavRateModel nav;
};

struct HeadingEstimate {
  std::string method;
  double t_align = 0.0;  ///< [s]
  Angle psi_hat;
  Angle psi_gt;
  double ae_deg = 0.0;

  static HeadingEstimate make(std::string method, double t_align, Angle psi_hat, Angle psi_gt);
};

/// Aligns over a window given as matching IMU and aiding spans (the aiding
/// span starts at the first IMU sample). Recomposes C^n_b at the last aiding
/// sample and scores it against that sample's reference heading.
HeadingEstimate align_window(std::span<const ImuSample> imu, std::span<const NavAidSample> aid,
                             AlignMethod method, const AlignOptions& options = {});

/// Aligns over [t0, t0 + t_align) of a recording.
HeadingEstimate align_heading(const Recording& rec, AlignMethod method, double t_align,
                              const AlignOptions& options = {}, double t_start = 0.0);

/// Index spans of the samples in [t_begin, t_begin + length) of a recording.
struct WindowSpans {
  std::span<const ImuSample> imu;
  std::span<const NavAidSample> aid;
};
WindowSpans window_spans(const Recording& rec, double t_begin, double length);

}  // namespace headalign
