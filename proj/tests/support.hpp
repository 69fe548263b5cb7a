#pragma once

#include <nonnormal/model.hpp>

namespace testing_support {

using nonnormal::Complex;
using nonnormal::ExactModelParams;
using nonnormal::ModelParams;
using nonnormal::RationalComplex;

inline RationalComplex q(long num, long den = 1) { return RationalComplex(mpq_class(num, den)); }

inline ModelParams params(int n, int t, std::vector<Complex> b, Complex delta)
{
    ModelParams p;
    p.n = n;
    p.t = t;
    p.b_coeffs = std::move(b);
    p.delta = delta;
    return p;
}

inline ExactModelParams exact_params(int n, int t, std::vector<RationalComplex> b, RationalComplex delta)
{
    ExactModelParams p;
    p.n = n;
    p.t = t;
    p.b_coeffs = std::move(b);
    p.delta = std::move(delta);
    return p;
}

} // namespace testing_support
