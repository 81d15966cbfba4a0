#pragma once

// Scalar expressions over an ordered list of named coordinates.
//
// An Expression is an immutable tree; variables are resolved to coordinate
// indices at parse time so evaluation never touches strings. Evaluation is
// templated on the scalar so the same tree runs over doubles and nested duals.

#include "contactlab/dual.hpp"
#include "contactlab/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace contactlab {

using Coordinates = std::vector<std::string>;

enum class Op
{
    Constant,
    Variable,
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Tanh,
    Add,
    Sub,
    Mul,
    Div,
    Pow, // lhs ^ value, exponent is a real constant
};

struct ExprNode
{
    Op op = Op::Constant;
    double value = 0.0; // constant value or exponent
    int index = -1;     // coordinate index for Variable
    std::shared_ptr<const ExprNode> lhs;
    std::shared_ptr<const ExprNode> rhs;
};

using NodePtr = std::shared_ptr<const ExprNode>;

class Expression
{
  public:
    Expression(NodePtr root, std::shared_ptr<const Coordinates> coords);

    static Expression constant(double c, std::shared_ptr<const Coordinates> coords);
    static Expression variable(const std::string& name, std::shared_ptr<const Coordinates> coords);

    const ExprNode& root() const noexcept { return *root_; }
    const NodePtr& root_ptr() const noexcept { return root_; }
    const Coordinates& coords() const noexcept { return *coords_; }
    const std::shared_ptr<const Coordinates>& coords_ptr() const noexcept { return coords_; }
    std::size_t dimension() const noexcept { return coords_->size(); }

    /// Canonical, fully parenthesised text; parse(str()) reproduces the tree.
    std::string str() const;

    /// Value of the tree if it contains no variables (no folding is attempted
    /// beyond a bare constant or a negated constant).
    std::optional<double> constant_value() const;

    /// Same tree over another coordinate list; every variable must be present there.
    Expression rebind(std::shared_ptr<const Coordinates> coords) const;

  private:
    NodePtr root_;
    std::shared_ptr<const Coordinates> coords_;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression operator*(double c, const Expression& a);

/// Parses `source` against `coords`. Throws ParseError (with byte offset) or
/// UnknownIdentifier.
Expression parse(std::string_view source, std::shared_ptr<const Coordinates> coords);
Expression parse(std::string_view source, const Coordinates& coords);

/// Structural equality of two trees (coordinate lists are not compared).
bool same_structure(const ExprNode& a, const ExprNode& b);

std::set<std::string> free_variables(const Expression& e);

std::string to_string(const ExprNode& node, const Coordinates& coords);

namespace detail {
/// Raised inside evaluate(); the public entry points rethrow it as a
/// DomainError naming the offending sub-expression with coordinate names.
struct NodeDomainError
{
    const char* what;
    const ExprNode* node;
};
[[noreturn]] void throw_domain(const char* what, const ExprNode& node);
} // namespace detail

/// Evaluates the tree over any scalar supporting the elementary functions
/// (double, Dual<double>, Dual<Dual<double>>). Domain checks use the primal value.
template <typename T>
T evaluate(const ExprNode& node, std::span<const T> x)
{
    using std::cos;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sqrt;
    using std::tanh;

    switch (node.op) {
    case Op::Constant:
        return T(node.value);
    case Op::Variable:
        return x[static_cast<std::size_t>(node.index)];
    case Op::Neg:
        return -evaluate(*node.lhs, x);
    case Op::Exp:
        return exp(evaluate(*node.lhs, x));
    case Op::Log: {
        T a = evaluate(*node.lhs, x);
        if (!(primal(a) > 0.0))
            detail::throw_domain("log of non-positive value", node);
        return log(a);
    }
    case Op::Sin:
        return sin(evaluate(*node.lhs, x));
    case Op::Cos:
        return cos(evaluate(*node.lhs, x));
    case Op::Sqrt: {
        T a = evaluate(*node.lhs, x);
        if (!(primal(a) > 0.0))
            detail::throw_domain("sqrt of non-positive value", node);
        return sqrt(a);
    }
    case Op::Tanh:
        return tanh(evaluate(*node.lhs, x));
    case Op::Add:
        return evaluate(*node.lhs, x) + evaluate(*node.rhs, x);
    case Op::Sub:
        return evaluate(*node.lhs, x) - evaluate(*node.rhs, x);
    case Op::Mul:
        return evaluate(*node.lhs, x) * evaluate(*node.rhs, x);
    case Op::Div: {
        T num = evaluate(*node.lhs, x);
        T den = evaluate(*node.rhs, x);
        if (primal(den) == 0.0)
            detail::throw_domain("division by zero", node);
        return num / den;
    }
    case Op::Pow: {
        T base = evaluate(*node.lhs, x);
        double e = node.value;
        double b = primal(base);
        bool integral = std::floor(e) == e;
        if (b < 0.0 && !integral)
            detail::throw_domain("non-integer power of negative value", node);
        if (b == 0.0 && e < 0.0)
            detail::throw_domain("negative power of zero", node);
        if constexpr (is_dual_v<T>) {
            // d/dx x^e is singular at 0 for 0 < e < 2 non-integer orders
            if (b == 0.0 && !integral && e < 2.0)
                detail::throw_domain("power not differentiable at zero", node);
        }
        return pow(base, e);
    }
    }
    return T(0);
}

double eval(const Expression& e, std::span<const double> x);
double eval(const Expression& e, const Eigen::VectorXd& x);
/// Binds variables by name; throws InputError if a free variable is unbound.
double eval(const Expression& e, const std::map<std::string, double>& point);

/// Value, gradient and Hessian at a point, in coordinate order.
struct Jet2
{
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// Value and gradient only (one dual pass per coordinate).
struct Jet1
{
    double value = 0.0;
    Eigen::VectorXd gradient;
};

Jet1 eval_jet1(const Expression& e, const Eigen::VectorXd& x);
Jet2 eval_jet2(const Expression& e, const Eigen::VectorXd& x);
Jet2 eval_jet2(const Expression& e, const std::map<std::string, double>& point);

} // namespace contactlab
