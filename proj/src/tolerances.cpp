#include "wbkit/tolerances.hpp"

#include "wbkit/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace wb {

Tolerances Tolerances::scaled(double s) const {
    Tolerances t = *this;
    for (double* x : {&t.curv_analytic, &t.curv_mesh, &t.gb, &t.orth, &t.burg_analytic, &t.burg_mesh, &t.ineq,
                      &t.flux, &t.coarea, &t.grad_floor_rel})
        *x *= s;
    return t;
}

double Tolerances::env_scale() {
    const char* raw = std::getenv("WB_TOL_SCALE");
    if (!raw || !*raw) return 1.0;
    size_t used = 0;
    double s = 0.0;
    try {
        s = std::stod(raw, &used);
    } catch (const std::exception&) {
        throw ConfigError(std::string("WB_TOL_SCALE is not a number: ") + raw);
    }
    if (used != std::string(raw).size() || !std::isfinite(s) || s <= 0)
        throw ConfigError(std::string("WB_TOL_SCALE must be a positive number, got ") + raw);
    return s;
}

Tolerances Tolerances::from_env() { return Tolerances{}.scaled(env_scale()); }

}  // namespace wb
