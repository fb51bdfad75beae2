#pragma once

#include <cstddef>

// Node-parallel stencil kernels of the flow. Two implementations share one
// interface: `serial` is a direct transcription used as the test reference,
// `omp` is the production path (row-partitioned OpenMP loops, k = 3 fast
// path). Reductions are accumulated per row and folded serially in row order,
// so results do not depend on the thread count.
//
// Discretization. With D+ and D- the one-sided differences along each axis,
//   e_n   = (1/2) sum_d (|D+_d u|^2 + |D-_d u|^2)
//   w_n   = (r^2 + e_n)^(alpha-1)
//   rhs_n = P_T[ (1 / (w_n h^2)) sum_{j ~ n} (w_n + w_j)/2 (u_j - u_n) ]
// which is the exact discrete L^2 gradient of sum_n (r^2 + e_n)^alpha h^2
// divided by -2 alpha w_n. P_T removes the component along u_n.

namespace suflow::kernels {

struct View {
  int n = 0;   // nodes per axis (square grid)
  int k = 3;   // ambient dimension
  double h = 0.0;
  std::size_t nodes() const { return static_cast<std::size_t>(n) * n; }
};

struct DensitySums {
  double e = 0.0;            // sum of e
  double e_alpha_r = 0.0;    // sum of (r^2 + e)^alpha
  double e_alpha_one = 0.0;  // sum of (1 + e)^alpha
  double sup_e = 0.0;
  std::size_t argmax = 0;
};

struct UpdateSums {
  double weighted_speed2 = 0.0;  // sum of w |(u_new - u)/dt|^2
  double max_displacement = 0.0;
  std::size_t bad_node = static_cast<std::size_t>(-1);
  bool ok() const { return bad_node == static_cast<std::size_t>(-1); }
};

namespace serial {
DensitySums density(View v, const double* u, double alpha, double r2, double* e, double* w);
// Returns sum |rhs|^2 over nodes.
double alpha_rhs(View v, const double* u, const double* w, double* out);
UpdateSums update(View v, const double* u, const double* dir, double dt, const double* w,
                  double* u_new);
void central_gradient(View v, const double* u, double* gx, double* gy);
// sum_n u . (du/dx x du/dy) with central differences; k must be 3.
double degree_sum(View v, const double* u);
}  // namespace serial

namespace omp {
DensitySums density(View v, const double* u, double alpha, double r2, double* e, double* w);
double alpha_rhs(View v, const double* u, const double* w, double* out);
UpdateSums update(View v, const double* u, const double* dir, double dt, const double* w,
                  double* u_new);
void central_gradient(View v, const double* u, double* gx, double* gy);
double degree_sum(View v, const double* u);
}  // namespace omp

}  // namespace suflow::kernels
