#include <algorithm>
#include <cmath>

#include "tbc/errors.hpp"
#include "tbc/sut.hpp"

namespace tbc {
namespace {

double real(const InputVector& x, std::size_t i) { return std::get<double>(x[i]); }
std::int64_t integer(const InputVector& x, std::size_t i) { return std::get<std::int64_t>(x[i]); }

ParamSpec real_param(std::string name, double lo, double hi) {
    return ParamSpec{.name = std::move(name), .kind = ValueKind::Double, .min = lo, .max = hi};
}

ParamSpec int_param(std::string name, double lo, double hi) {
    return ParamSpec{.name = std::move(name), .kind = ValueKind::Integer, .min = lo, .max = hi};
}

ParamSpec double_output() { return ParamSpec{.name = "output", .kind = ValueKind::Double}; }

InputVector reals(std::initializer_list<double> xs) {
    InputVector v;
    for (double x : xs) {
        v.emplace_back(x);
    }
    return v;
}

InputVector ints(std::initializer_list<std::int64_t> xs) {
    InputVector v;
    for (auto x : xs) {
        v.emplace_back(x);
    }
    return v;
}

// ---------------------------------------------------------------------------
// bmi: weight / height^2

Fixture make_bmi() {
    Fixture f;
    f.id = "bmi";
    f.description = "body mass index weight/height^2";
    f.parameters = {real_param("height", -100, 100), real_param("weight", -100, 100)};
    f.output = double_output();
    f.reference = [](const InputVector& x) { return real(x, 1) / (real(x, 0) * real(x, 0)); };
    f.seed_tests = {reals({1.7, 50}), reals({1.8, 70}), reals({1.9, 100}),
                    reals({1.7, 110}), reals({0.0, 5}), reals({5.0, 0})};

    const auto h = [](const InputVector& x) { return real(x, 0); };
    const auto w = [](const InputVector& x) { return real(x, 1); };
    f.mutants = {
        {"weight/height", "drops one height factor", [=](const InputVector& x) { return w(x) / h(x); }, reals({1.7, 50})},
        {"weight*height^2", "division replaced by multiplication",
         [=](const InputVector& x) { return w(x) * (h(x) * h(x)); }, reals({1.7, 50})},
        {"weight/(height+height)", "inner multiplication replaced by addition",
         [=](const InputVector& x) { return w(x) / (h(x) + h(x)); }, reals({1.7, 50})},
        {"bmi+1", "constant perturbation +1", [=](const InputVector& x) { return w(x) / (h(x) * h(x)) + 1.0; },
         reals({1.7, 50})},
        {"bmi-1", "constant perturbation -1", [=](const InputVector& x) { return w(x) / (h(x) * h(x)) - 1.0; },
         reals({1.7, 50})},
        {"(weight+1)/height^2", "numerator perturbed by +1",
         [=](const InputVector& x) { return (w(x) + 1.0) / (h(x) * h(x)); }, reals({1.7, 50})},
        {"-bmi", "result negated", [=](const InputVector& x) { return -(w(x) / (h(x) * h(x))); }, reals({1.7, 50})},
        {"weight/height^3", "extra height factor", [=](const InputVector& x) { return w(x) / (h(x) * h(x) * h(x)); },
         reals({1.7, 50})},
        {"weight-height^2", "division replaced by subtraction", [=](const InputVector& x) { return w(x) - h(x) * h(x); },
         reals({1.7, 50})},
        {"height/weight^2", "operands swapped", [=](const InputVector& x) { return h(x) / (w(x) * w(x)); },
         reals({1.7, 50})},
        {"weight/(height+1)^2", "height perturbed by +1",
         [=](const InputVector& x) { return w(x) / ((h(x) + 1.0) * (h(x) + 1.0)); }, reals({1.7, 50})},
        {"negative height flips sign", "spurious branch on height < 0",
         [=](const InputVector& x) {
             const double v = w(x) / (h(x) * h(x));
             return h(x) < 0.0 ? -v : v;
         },
         reals({-1.7, 50})},
    };
    return f;
}

// ---------------------------------------------------------------------------
// piecewise: three branches with jumps at -2.5 and 4

double piecewise_with(double x, double b1, double b2, double low, double coef, double shift, double high) {
    if (x < b1) {
        return low;
    }
    if (x < b2) {
        return coef * x * x + shift;
    }
    return high - x;
}

Fixture make_piecewise() {
    Fixture f;
    f.id = "piecewise";
    f.description = "x < -2.5: -3; x < 4: x^2/2 - 1; else 10 - x";
    f.parameters = {real_param("x", -10, 10)};
    f.output = double_output();
    f.reference = [](const InputVector& v) { return piecewise_with(real(v, 0), -2.5, 4.0, -3.0, 0.5, -1.0, 10.0); };
    f.seed_tests = {reals({-7.5}), reals({-1.0}), reals({2.0}), reals({7.5})};

    auto variant = [](double b1, double b2, double low, double coef, double shift, double high) {
        return [=](const InputVector& v) { return piecewise_with(real(v, 0), b1, b2, low, coef, shift, high); };
    };
    f.mutants = {
        {"boundary -2.5 -> -2.4", "first comparison boundary shifted up", variant(-2.4, 4.0, -3.0, 0.5, -1.0, 10.0),
         reals({-2.45})},
        {"boundary -2.5 -> -2.55", "first comparison boundary shifted down",
         variant(-2.55, 4.0, -3.0, 0.5, -1.0, 10.0), reals({-2.52})},
        {"boundary 4 -> 4.1", "second comparison boundary shifted up", variant(-2.5, 4.1, -3.0, 0.5, -1.0, 10.0),
         reals({4.05})},
        {"boundary 4 -> 3.95", "second comparison boundary shifted down", variant(-2.5, 3.95, -3.0, 0.5, -1.0, 10.0),
         reals({3.97})},
        {"low -3 -> -2", "constant perturbation +1 in the low branch", variant(-2.5, 4.0, -2.0, 0.5, -1.0, 10.0),
         reals({-5.0})},
        {"middle -1 -> 0", "constant perturbation +1 in the middle branch", variant(-2.5, 4.0, -3.0, 0.5, 0.0, 10.0),
         reals({0.0})},
        {"middle 0.5*x*x -> 0.5+x*x", "multiplication replaced by addition",
         [](const InputVector& v) {
             const double x = real(v, 0);
             if (x < -2.5) {
                 return -3.0;
             }
             if (x < 4.0) {
                 return 0.5 + x * x - 1.0;
             }
             return 10.0 - x;
         },
         reals({1.0})},
        {"middle 0.5 -> -0.5", "coefficient negated", variant(-2.5, 4.0, -3.0, -0.5, -1.0, 10.0), reals({1.0})},
        {"high 10-x -> 10+x", "subtraction replaced by addition",
         [](const InputVector& v) {
             const double x = real(v, 0);
             if (x < -2.5) {
                 return -3.0;
             }
             if (x < 4.0) {
                 return 0.5 * x * x - 1.0;
             }
             return 10.0 + x;
         },
         reals({5.0})},
        {"high 10 -> 11", "constant perturbation +1 in the high branch", variant(-2.5, 4.0, -3.0, 0.5, -1.0, 11.0),
         reals({5.0})},
        {"first condition negated", "x >= -2.5 selects the low branch",
         [](const InputVector& v) {
             const double x = real(v, 0);
             if (x >= -2.5) {
                 return -3.0;
             }
             if (x < 4.0) {
                 return 0.5 * x * x - 1.0;
             }
             return 10.0 - x;
         },
         reals({0.0})},
        {"second condition negated", "x >= 4 selects the middle branch",
         [](const InputVector& v) {
             const double x = real(v, 0);
             if (x < -2.5) {
                 return -3.0;
             }
             if (x >= 4.0) {
                 return 0.5 * x * x - 1.0;
             }
             return 10.0 - x;
         },
         reals({0.0})},
        {"middle x^2 -> x^3", "extra factor in the middle branch",
         [](const InputVector& v) {
             const double x = real(v, 0);
             if (x < -2.5) {
                 return -3.0;
             }
             if (x < 4.0) {
                 return 0.5 * x * x * x - 1.0;
             }
             return 10.0 - x;
         },
         reals({2.0})},
    };
    return f;
}

// ---------------------------------------------------------------------------
// poly3: x^3 - 6x^2 + 9x + 1, local maximum 5 at x = 1, local minimum 1 at x = 3

double cubic(double x, double a, double b, double c, double d) { return a * x * x * x + b * x * x + c * x + d; }

Fixture make_poly3() {
    Fixture f;
    f.id = "poly3";
    f.description = "x^3 - 6x^2 + 9x + 1";
    f.parameters = {real_param("x", -5, 5)};
    f.output = double_output();
    f.reference = [](const InputVector& v) { return cubic(real(v, 0), 1, -6, 9, 1); };
    f.seed_tests = {reals({-4.0}), reals({0.0}), reals({2.0}), reals({4.5})};

    auto coeffs = [](double a, double b, double c, double d) {
        return [=](const InputVector& v) { return cubic(real(v, 0), a, b, c, d); };
    };
    f.mutants = {
        {"+1 -> +2", "constant perturbation +1", coeffs(1, -6, 9, 2), reals({0.0})},
        {"+1 -> +0", "constant perturbation -1", coeffs(1, -6, 9, 0), reals({0.0})},
        {"-6x^2 -> +6x^2", "sign of the quadratic term flipped", coeffs(1, 6, 9, 1), reals({1.0})},
        {"+9x -> -9x", "sign of the linear term flipped", coeffs(1, -6, -9, 1), reals({1.0})},
        {"6 -> 7", "quadratic coefficient perturbed", coeffs(1, -7, 9, 1), reals({1.0})},
        {"9 -> 10", "linear coefficient perturbed", coeffs(1, -6, 10, 1), reals({1.0})},
        {"x^3 -> -x^3", "cubic term negated", coeffs(-1, -6, 9, 1), reals({1.0})},
        {"x^3 -> x^2", "cubic power reduced",
         [](const InputVector& v) {
             const double x = real(v, 0);
             return x * x - 6 * x * x + 9 * x + 1;
         },
         reals({2.0})},
        {"6x^2 -> 6x", "quadratic power reduced",
         [](const InputVector& v) {
             const double x = real(v, 0);
             return x * x * x - 6 * x + 9 * x + 1;
         },
         reals({2.0})},
        {"+1 -> -1", "constant negated", coeffs(1, -6, 9, -1), reals({0.0})},
        {"x > 4.5 adds 0.5", "spurious branch near the upper bound",
         [](const InputVector& v) {
             const double x = real(v, 0);
             const double y = cubic(x, 1, -6, 9, 1);
             return x > 4.5 ? y + 0.5 : y;
         },
         reals({4.8})},
        {"|x-1| < 0.1 returns 5", "local maximum flattened",
         [](const InputVector& v) {
             const double x = real(v, 0);
             return std::abs(x - 1.0) < 0.1 ? 5.0 : cubic(x, 1, -6, 9, 1);
         },
         reals({1.05})},
    };
    return f;
}

// ---------------------------------------------------------------------------
// binom_small: C(n, k) on small integers

struct BinomVariant {
    bool above_n_is_one = false;   // k > n returns 1
    bool guard_inclusive = false;  // k >= n returns 0
    int loop_trim = 0;             // iterations dropped at the end
    int numerator_shift = 0;       // (n - k + i + shift)
    int denominator_shift = 0;     // / (i + shift)
    bool zero_k_is_zero = false;   // k == 0 returns 0
    bool numerator_n_plus_i = false;
    bool multiply_last = false;    // last step multiplies by i instead of dividing
};

double binom_with(std::int64_t n, std::int64_t k, const BinomVariant& v) {
    if (k < 0) {
        return 0.0;
    }
    if (k > n) {
        return v.above_n_is_one ? 1.0 : 0.0;
    }
    if (v.guard_inclusive && k >= n) {
        return 0.0;
    }
    if (v.zero_k_is_zero && k == 0) {
        return 0.0;
    }
    double r = 1.0;
    for (std::int64_t i = 1; i <= k - v.loop_trim; ++i) {
        const double num = v.numerator_n_plus_i ? static_cast<double>(n + i)
                                                : static_cast<double>(n - k + i + v.numerator_shift);
        if (v.multiply_last && i == k) {
            r = r * num * static_cast<double>(i + v.denominator_shift);
        } else {
            r = r * num / static_cast<double>(i + v.denominator_shift);
        }
    }
    return r;
}

Fixture make_binom_small() {
    Fixture f;
    f.id = "binom_small";
    f.description = "binomial coefficient C(n, k), 0 when k > n";
    f.parameters = {int_param("n", 0, 20), int_param("k", 0, 20)};
    f.output = double_output();
    f.reference = [](const InputVector& x) { return binom_with(integer(x, 0), integer(x, 1), {}); };
    f.seed_tests = {ints({4, 2}), ints({10, 3}), ints({6, 6}), ints({3, 5})};

    auto variant = [](BinomVariant v) {
        return [v](const InputVector& x) { return binom_with(integer(x, 0), integer(x, 1), v); };
    };
    f.mutants = {
        {"k > n returns 1", "wrong value on the out-of-range branch", variant({.above_n_is_one = true}), ints({2, 5})},
        {"guard k >= n", "comparison boundary k > n -> k >= n", variant({.guard_inclusive = true}), ints({3, 3})},
        {"loop to k-1", "off-by-one loop bound", variant({.loop_trim = 1}), ints({5, 2})},
        {"numerator +1", "numerator perturbed by +1", variant({.numerator_shift = 1}), ints({5, 2})},
        {"denominator +1", "denominator perturbed by +1", variant({.denominator_shift = 1}), ints({5, 2})},
        {"k == 0 returns 0", "spurious early exit", variant({.zero_k_is_zero = true}), ints({5, 0})},
        {"C(n-1, k)", "n decremented",
         [](const InputVector& x) { return binom_with(integer(x, 0) - 1, integer(x, 1), {}); }, ints({5, 2})},
        {"numerator n+i", "subtraction replaced by addition", variant({.numerator_n_plus_i = true}), ints({5, 2})},
        {"n > 15 halves", "spurious branch for large n",
         [](const InputVector& x) {
             const double r = binom_with(integer(x, 0), integer(x, 1), {});
             return integer(x, 0) > 15 ? r / 2.0 : r;
         },
         ints({16, 1})},
        {"C(n, k+1)", "k incremented",
         [](const InputVector& x) { return binom_with(integer(x, 0), integer(x, 1) + 1, {}); }, ints({5, 1})},
        {"k == 1 returns n+1", "constant perturbation on the k == 1 case",
         [](const InputVector& x) {
             return integer(x, 1) == 1 && integer(x, 0) >= 1 ? static_cast<double>(integer(x, 0) + 1)
                                                              : binom_with(integer(x, 0), integer(x, 1), {});
         },
         ints({5, 1})},
        {"last step multiplies", "division replaced by multiplication in the final step",
         variant({.multiply_last = true}), ints({5, 2})},
    };
    return f;
}

} // namespace

InterfaceSpec Fixture::interface() const {
    return InterfaceSpec{.command = std::string(kBuiltinPrefix) + id, .parameters = parameters, .output = output};
}

const std::vector<Fixture>& catalog() {
    static const std::vector<Fixture> fixtures = {make_bmi(), make_piecewise(), make_poly3(), make_binom_small()};
    return fixtures;
}

const Fixture& find_fixture(std::string_view id) {
    const auto& all = catalog();
    auto it = std::find_if(all.begin(), all.end(), [&](const Fixture& f) { return f.id == id; });
    if (it == all.end()) {
        throw ValidationError("fixture", "unknown fixture \"" + std::string(id) + "\"");
    }
    return *it;
}

} // namespace tbc
