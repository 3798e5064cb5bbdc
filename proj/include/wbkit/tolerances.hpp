#pragma once

namespace wb {

// Default tolerances. Everything is multiplied by WB_TOL_SCALE when read
// through `Tolerances::from_env()`.
struct Tolerances {
    double curv_analytic = 1e-6;
    double curv_mesh = 1e-2;
    double gb = 1e-2;
    double orth = 1e-8;
    double burg_analytic = 1e-6;
    double burg_mesh = 1e-3;
    double ineq = 1e-3;
    double flux = 1e-2;
    double coarea = 1e-2;
    double grad_floor_rel = 1e-6;

    Tolerances scaled(double s) const;
    static double env_scale();  // 1 when unset; ConfigError unless a positive number
    static Tolerances from_env();
};

}  // namespace wb
