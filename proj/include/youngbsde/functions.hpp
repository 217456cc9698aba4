#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace ybsde {

/// A real function of one variable together with whatever uniform bounds the
/// caller can vouch for. Bounds that are unknown stay empty; unbounded ones are +inf.
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::optional<double> sup_bound;  ///< sup |f|
    std::optional<double> d1_bound;   ///< sup |f'|
    std::optional<double> d2_bound;   ///< sup |f''|
    std::string name;

    double operator()(double y) const { return value(y); }
};

enum class Shape { constant, identity, tanh, sin, cos, square, sign };

std::optional<Shape> parse_shape(std::string_view name);
std::string_view shape_name(Shape s);

/// f(y) = a * base(b * y) + c, with exact derivative bounds.
ScalarFunction make_function(Shape base, double a = 1.0, double b = 1.0, double c = 0.0);

inline ScalarFunction constant_function(double c) { return make_function(Shape::constant, 0.0, 1.0, c); }
inline ScalarFunction linear_function(double slope) { return make_function(Shape::identity, slope); }

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

}  // namespace ybsde
