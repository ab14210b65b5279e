#pragma once

#include "ratelqg/matrix_kernel.hpp"

namespace rlqg {

// LQG problem instance: x_{t+1} = A x_t + B u_t + w_t with w ~ N(0, W),
// x_1 ~ N(0, P_prior), stage cost |x_{t+1}|^2_Q + |u_t|^2_R.
struct PlantModel {
  Mat A;        // n x n
  Mat B;        // n x m
  Mat W;        // n x n SPD process-noise covariance
  Mat Q;        // n x n SPD state weight
  Mat R;        // m x m SPD input weight
  Mat P_prior;  // n x n SPD initial-state covariance

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  // Dimension consistency, SPD checks, and PBH stabilizability /
  // detectability tests at the unstable eigenvalues of A.
  // Throws InvalidModel / NotStabilizable / NotDetectable.
  void validate() const;
};

struct LqrCertainty {
  Mat S;           // Riccati solution, SPD
  Mat K;           // feedback gain, u = K xhat
  Mat Theta;       // K^T (B^T S B + R) K
  double residual; // Frobenius norm of the DARE residual at S
};

// Fixed-point (value) iteration for
//   A^T S A - S - A^T S B (B^T S B + R)^{-1} B^T S A + Q = 0
// from S_0 = Q. Throws NoConvergence past the iteration cap.
LqrCertainty solve_dare(const PlantModel& model);

// Tr(W S): the infimum of achievable average LQG cost (rate -> infinity).
double min_cost(const PlantModel& model, const LqrCertainty& cert);

// Largest |eigenvalue| of a general square real matrix.
double spectral_radius(const Mat& m);

}  // namespace rlqg
