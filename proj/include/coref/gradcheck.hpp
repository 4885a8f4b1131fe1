#pragma once
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "coref/error.hpp"
#include "coref/param.hpp"

namespace coref {

struct TensorCheck {
    std::string name;
    double max_rel = 0.0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<TensorCheck> tensors;
    double max_rel = 0.0;
    bool pass = true;
};

// Central differences against the analytic grads already stored in each
// tensor; f must re-evaluate the objective from current values without
// touching grads. relative error = |a - n| / max(1, |a|, |n|).
inline GradCheckReport finite_diff_check(const std::function<double()>& f,
                                         const std::vector<ParamTensor*>& params,
                                         double epsilon, double tolerance) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
        throw data_error("finite_diff_check epsilon out of range");
    GradCheckReport report;
    for (ParamTensor* p : params) {
        TensorCheck tc;
        tc.name = p->name;
        for (size_t k = 0; k < p->value.size(); ++k) {
            double v0 = p->value.a[k];
            p->value.a[k] = v0 + epsilon;
            double fp = f();
            p->value.a[k] = v0 - epsilon;
            double fm = f();
            p->value.a[k] = v0;
            double num = (fp - fm) / (2.0 * epsilon);
            double ana = p->grad.a[k];
            double rel = std::fabs(ana - num) /
                         std::max({1.0, std::fabs(ana), std::fabs(num)});
            if (rel > tc.max_rel) tc.max_rel = rel;
        }
        tc.pass = tc.max_rel <= tolerance;
        if (tc.max_rel > report.max_rel) report.max_rel = tc.max_rel;
        if (!tc.pass) report.pass = false;
        report.tensors.push_back(std::move(tc));
    }
    return report;
}

} // namespace coref
