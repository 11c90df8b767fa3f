#pragma once

// Named oracle comparisons. Each returns the measured deviation next to the
// tolerance it must meet; unit tests assert them one by one and the
// acceptance run times the whole list.

#include "oracles.hpp"

namespace oracle {

// sparse linear algebra
Check triple_product_3x3();
Check cg_laplacian_1d();
Check cg_singular_on_range();
Check saddle_projection();
Check saddle_random_kkt(lodwave::SaddleMethod method);
Check lambda_laplacian_1d();
Check lambda_fine_fem();

// assembly
Check stiffness_checkerboard();
Check mass_random();
Check lumped_piecewise();
Check sine_l2_norm();
Check sine_h1_seminorm();

// interpolation
Check local_projection_hat();
Check interpolation_bubble();
Check interpolation_random(lodwave::InterpMode mode);
Check averaging_weights_1124();

// correctors and bases
Check corrector_kkt();
Check global_stiffness_unit();
Check global_stiffness_random();
Check lumped_apply_definition();

// time stepping
Check scalar_forced_recurrence();
Check scalar_free_recurrence();
Check cfl_fine_fem();
Check consistent_vs_dense();
Check energy_conservation();

// error functionals
Check prolong_single_snapshot();
Check h1_error_two_snapshots();
Check dt_error_three_snapshots();

}  // namespace oracle
