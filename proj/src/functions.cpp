#include "youngbsde/functions.hpp"

#include <cmath>

#include "youngbsde/errors.hpp"
#include "youngbsde/io.hpp"

namespace ybsde {

namespace {

// sup |tanh''| = 4 / (3 sqrt 3), attained where tanh^2 = 1/3.
const double kTanhSecondDerivBound = 4.0 / (3.0 * std::sqrt(3.0));

struct ShapeInfo {
    double (*f)(double);
    double (*df)(double);
    double sup;
    double d1;
    std::optional<double> d2;
};

ShapeInfo info(Shape s) {
    switch (s) {
        case Shape::constant:
            return {[](double) { return 1.0; }, [](double) { return 0.0; }, 1.0, 0.0, 0.0};
        case Shape::identity:
            return {[](double x) { return x; }, [](double) { return 1.0; }, kUnbounded, 1.0, 0.0};
        case Shape::tanh:
            return {[](double x) { return std::tanh(x); },
                    [](double x) {
                        const double t = std::tanh(x);
                        return 1.0 - t * t;
                    },
                    1.0, 1.0, kTanhSecondDerivBound};
        case Shape::sin:
            return {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 1.0, 1.0, 1.0};
        case Shape::cos:
            return {[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); }, 1.0, 1.0, 1.0};
        case Shape::square:
            return {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, kUnbounded, kUnbounded, 2.0};
        case Shape::sign:
            return {[](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }, [](double) { return 0.0; }, 1.0,
                    kUnbounded, std::nullopt};
    }
    throw ValidationError("unknown shape");
}

}  // namespace

std::optional<Shape> parse_shape(std::string_view name) {
    if (name == "constant") return Shape::constant;
    if (name == "identity") return Shape::identity;
    if (name == "tanh") return Shape::tanh;
    if (name == "sin") return Shape::sin;
    if (name == "cos") return Shape::cos;
    if (name == "square") return Shape::square;
    if (name == "sign") return Shape::sign;
    return std::nullopt;
}

std::string_view shape_name(Shape s) {
    switch (s) {
        case Shape::constant: return "constant";
        case Shape::identity: return "identity";
        case Shape::tanh: return "tanh";
        case Shape::sin: return "sin";
        case Shape::cos: return "cos";
        case Shape::square: return "square";
        case Shape::sign: return "sign";
    }
    return "?";
}

ScalarFunction make_function(Shape base, double a, double b, double c) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw ValidationError("function coefficients must be finite");
    }
    const ShapeInfo s = info(base);
    auto scale_bound = [](double factor, double bound) {
        return factor == 0.0 ? 0.0 : factor * bound;
    };
    ScalarFunction fn;
    fn.value = [f = s.f, a, b, c](double y) { return a * f(b * y) + c; };
    fn.derivative = [df = s.df, a, b](double y) { return a * b * df(b * y); };
    fn.sup_bound = scale_bound(std::fabs(a), s.sup) + std::fabs(c);
    if (base == Shape::constant) fn.sup_bound = std::fabs(a + c);
    fn.d1_bound = scale_bound(std::fabs(a * b), s.d1);
    if (s.d2) fn.d2_bound = scale_bound(std::fabs(a) * b * b, *s.d2);
    fn.name = std::string(shape_name(base)) + "(a=" + format_double(a) + ",b=" + format_double(b) +
              ",c=" + format_double(c) + ")";
    return fn;
}

}  // namespace ybsde
