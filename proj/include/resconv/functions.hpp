#pragma once

#include <string>
#include <vector>

#include "resconv/approximators.hpp"

namespace resconv {

// Built-in target functions on [-1,1]^D. Separable ones carry closed-form
// derivatives so they can feed the Holder construction.
struct NamedFunction {
    std::string name;
    int D = 0;
    ScalarFn f;
    bool has_oracle = false;
    double sup = 0.0;  // sup over the cube

    // Derivative oracle with a Holder-norm upper bound for smoothness beta.
    TaylorOracle oracle(double beta) const;

    std::vector<int> kinds;  // per-coordinate factor kinds (separable case)
    double coef = 1.0;
};

NamedFunction named_function(const std::string& name, int D);
std::vector<std::string> function_names();

}  // namespace resconv
