#include "contactlab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace contactlab {

namespace {

NodePtr make_node(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0, int index = -1)
{
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    n->value = value;
    n->index = index;
    return n;
}

const char* function_name(Op op)
{
    switch (op) {
    case Op::Exp:
        return "exp";
    case Op::Log:
        return "log";
    case Op::Sin:
        return "sin";
    case Op::Cos:
        return "cos";
    case Op::Sqrt:
        return "sqrt";
    case Op::Tanh:
        return "tanh";
    default:
        return nullptr;
    }
}

std::optional<Op> function_op(std::string_view name)
{
    static const std::pair<std::string_view, Op> table[] = {
        {"exp", Op::Exp}, {"log", Op::Log}, {"sin", Op::Sin}, {"cos", Op::Cos}, {"sqrt", Op::Sqrt}, {"tanh", Op::Tanh},
    };
    for (const auto& [n, op] : table)
        if (n == name)
            return op;
    return std::nullopt;
}

std::string format_number(double v)
{
    char buf[32];
    // shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

// Recursive-descent parser:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | identifier | function '(' expr ')' | '(' expr ')'
class Parser
{
  public:
    Parser(std::string_view src, const Coordinates& coords) : src_(src), coords_(coords) {}

    NodePtr parse_all()
    {
        skip_ws();
        if (pos_ == src_.size())
            throw ParseError("empty expression", pos_);
        NodePtr root = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return root;
    }

  private:
    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            if (pos_ >= src_.size())
                throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr parse_expr()
    {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+'))
                lhs = make_node(Op::Add, lhs, parse_term());
            else if (accept('-'))
                lhs = make_node(Op::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term()
    {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = make_node(Op::Mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = make_node(Op::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary()
    {
        if (accept('-'))
            return make_node(Op::Neg, parse_unary());
        if (accept('+'))
            return parse_unary();
        return parse_power();
    }

    NodePtr parse_power()
    {
        NodePtr base = parse_primary();
        skip_ws();
        std::size_t at = pos_;
        if (accept('^')) {
            NodePtr exponent = parse_unary();
            std::optional<double> e = fold_constant(*exponent);
            if (!e)
                throw ParseError("exponent must be a constant", at + 1);
            return make_node(Op::Pow, base, nullptr, *e);
        }
        return base;
    }

    static std::optional<double> fold_constant(const ExprNode& n)
    {
        switch (n.op) {
        case Op::Constant:
            return n.value;
        case Op::Neg: {
            auto v = fold_constant(*n.lhs);
            return v ? std::optional<double>(-*v) : std::nullopt;
        }
        case Op::Pow: {
            auto v = fold_constant(*n.lhs);
            return v ? std::optional<double>(std::pow(*v, n.value)) : std::nullopt;
        }
        default:
            return std::nullopt;
        }
    }

    NodePtr parse_primary()
    {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError("unexpected end of input", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    NodePtr parse_number()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
                ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = save;
            }
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (ec != std::errc() || ptr != src_.data() + pos_)
            throw ParseError("malformed number", start);
        return make_node(Op::Constant, nullptr, nullptr, value);
    }

    NodePtr parse_identifier()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);
        if (auto op = function_op(name)) {
            skip_ws();
            if (pos_ >= src_.size() || src_[pos_] != '(')
                throw ParseError("function '" + std::string(name) + "' requires '('", pos_);
            ++pos_;
            NodePtr arg = parse_expr();
            expect(')');
            return make_node(*op, arg);
        }
        auto it = std::find(coords_.begin(), coords_.end(), name);
        if (it == coords_.end())
            throw UnknownIdentifier(std::string(name));
        return make_node(Op::Variable, nullptr, nullptr, 0.0, static_cast<int>(it - coords_.begin()));
    }

    std::string_view src_;
    const Coordinates& coords_;
    std::size_t pos_ = 0;
};

void print(std::ostringstream& os, const ExprNode& n, const Coordinates& coords)
{
    switch (n.op) {
    case Op::Constant:
        os << format_number(n.value);
        return;
    case Op::Variable:
        os << coords.at(static_cast<std::size_t>(n.index));
        return;
    case Op::Neg:
        os << "(-";
        print(os, *n.lhs, coords);
        os << ')';
        return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
        const char sym = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
        os << '(';
        print(os, *n.lhs, coords);
        os << ' ' << sym << ' ';
        print(os, *n.rhs, coords);
        os << ')';
        return;
    }
    case Op::Pow:
        os << '(';
        print(os, *n.lhs, coords);
        os << '^';
        if (n.value < 0.0)
            os << "(-" << format_number(-n.value) << ')';
        else
            os << format_number(n.value);
        os << ')';
        return;
    default:
        os << function_name(n.op) << '(';
        print(os, *n.lhs, coords);
        os << ')';
        return;
    }
}

void collect(const ExprNode& n, std::vector<bool>& used)
{
    if (n.op == Op::Variable)
        used[static_cast<std::size_t>(n.index)] = true;
    if (n.lhs)
        collect(*n.lhs, used);
    if (n.rhs)
        collect(*n.rhs, used);
}

NodePtr remap(const NodePtr& n, const std::vector<int>& map)
{
    if (n->op == Op::Variable)
        return make_node(Op::Variable, nullptr, nullptr, 0.0, map[static_cast<std::size_t>(n->index)]);
    if (!n->lhs && !n->rhs)
        return n;
    return make_node(n->op, n->lhs ? remap(n->lhs, map) : nullptr, n->rhs ? remap(n->rhs, map) : nullptr, n->value,
                     n->index);
}

Expression binary(Op op, const Expression& a, const Expression& b)
{
    if (a.coords_ptr() != b.coords_ptr() && a.coords() != b.coords())
        throw InputError("cannot combine expressions over different coordinates");
    return Expression(make_node(op, a.root_ptr(), b.root_ptr()), a.coords_ptr());
}

} // namespace

namespace detail {

void throw_domain(const char* what, const ExprNode& node)
{
    throw NodeDomainError{what, &node};
}

} // namespace detail

Expression::Expression(NodePtr root, std::shared_ptr<const Coordinates> coords)
    : root_(std::move(root)), coords_(std::move(coords))
{}

Expression Expression::constant(double c, std::shared_ptr<const Coordinates> coords)
{
    return Expression(make_node(Op::Constant, nullptr, nullptr, c), std::move(coords));
}

Expression Expression::variable(const std::string& name, std::shared_ptr<const Coordinates> coords)
{
    auto it = std::find(coords->begin(), coords->end(), name);
    if (it == coords->end())
        throw UnknownIdentifier(name);
    int index = static_cast<int>(it - coords->begin());
    return Expression(make_node(Op::Variable, nullptr, nullptr, 0.0, index), std::move(coords));
}

std::string Expression::str() const
{
    return to_string(*root_, *coords_);
}

std::optional<double> Expression::constant_value() const
{
    if (root_->op == Op::Constant)
        return root_->value;
    if (root_->op == Op::Neg && root_->lhs->op == Op::Constant)
        return -root_->lhs->value;
    return std::nullopt;
}

Expression Expression::rebind(std::shared_ptr<const Coordinates> coords) const
{
    std::vector<int> map(coords_->size(), -1);
    std::vector<bool> used(coords_->size(), false);
    collect(*root_, used);
    for (std::size_t i = 0; i < coords_->size(); ++i) {
        auto it = std::find(coords->begin(), coords->end(), (*coords_)[i]);
        if (it != coords->end())
            map[i] = static_cast<int>(it - coords->begin());
        else if (used[i])
            throw UnknownIdentifier((*coords_)[i]);
    }
    return Expression(remap(root_, map), std::move(coords));
}

Expression operator+(const Expression& a, const Expression& b) { return binary(Op::Add, a, b); }
Expression operator-(const Expression& a, const Expression& b) { return binary(Op::Sub, a, b); }
Expression operator*(const Expression& a, const Expression& b) { return binary(Op::Mul, a, b); }
Expression operator/(const Expression& a, const Expression& b) { return binary(Op::Div, a, b); }
Expression operator-(const Expression& a)
{
    return Expression(make_node(Op::Neg, a.root_ptr()), a.coords_ptr());
}
Expression operator*(double c, const Expression& a)
{
    return Expression::constant(c, a.coords_ptr()) * a;
}

Expression parse(std::string_view source, std::shared_ptr<const Coordinates> coords)
{
    Parser parser(source, *coords);
    return Expression(parser.parse_all(), std::move(coords));
}

Expression parse(std::string_view source, const Coordinates& coords)
{
    return parse(source, std::make_shared<const Coordinates>(coords));
}

bool same_structure(const ExprNode& a, const ExprNode& b)
{
    if (a.op != b.op)
        return false;
    if (a.op == Op::Constant || a.op == Op::Pow) {
        if (a.value != b.value)
            return false;
    }
    if (a.op == Op::Variable && a.index != b.index)
        return false;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs) || static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs))
        return false;
    if (a.lhs && !same_structure(*a.lhs, *b.lhs))
        return false;
    if (a.rhs && !same_structure(*a.rhs, *b.rhs))
        return false;
    return true;
}

std::set<std::string> free_variables(const Expression& e)
{
    std::vector<bool> used(e.dimension(), false);
    collect(e.root(), used);
    std::set<std::string> out;
    for (std::size_t i = 0; i < used.size(); ++i)
        if (used[i])
            out.insert(e.coords()[i]);
    return out;
}

std::string to_string(const ExprNode& node, const Coordinates& coords)
{
    std::ostringstream os;
    print(os, node, coords);
    return os.str();
}

namespace {

template <typename T>
T guarded(const Expression& e, std::span<const T> x)
{
    try {
        return evaluate<T>(e.root(), x);
    } catch (const detail::NodeDomainError& err) {
        throw DomainError(std::string(err.what) + " in " + to_string(*err.node, e.coords()));
    }
}

} // namespace

double eval(const Expression& e, std::span<const double> x)
{
    return guarded<double>(e, x);
}

double eval(const Expression& e, const Eigen::VectorXd& x)
{
    return guarded<double>(e, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

namespace {

Eigen::VectorXd bind(const Expression& e, const std::map<std::string, double>& point)
{
    std::vector<bool> used(e.dimension(), false);
    collect(e.root(), used);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.dimension()));
    for (std::size_t i = 0; i < e.dimension(); ++i) {
        auto it = point.find(e.coords()[i]);
        if (it != point.end())
            x[static_cast<Eigen::Index>(i)] = it->second;
        else if (used[i])
            throw InputError("variable '" + e.coords()[i] + "' is not bound");
    }
    return x;
}

} // namespace

double eval(const Expression& e, const std::map<std::string, double>& point)
{
    return eval(e, bind(e, point));
}

Jet1 eval_jet1(const Expression& e, const Eigen::VectorXd& x)
{
    using D = Dual<double>;
    const std::size_t dim = e.dimension();
    std::vector<D> args(dim);
    for (std::size_t i = 0; i < dim; ++i)
        args[i] = D(x[static_cast<Eigen::Index>(i)], 0.0);

    Jet1 jet;
    jet.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    std::vector<bool> used(dim, false);
    collect(e.root(), used);
    bool have_value = false;
    for (std::size_t i = 0; i < dim; ++i) {
        if (!used[i])
            continue;
        args[i].d = 1.0;
        D r = guarded<D>(e, args);
        args[i].d = 0.0;
        jet.value = r.v;
        jet.gradient[static_cast<Eigen::Index>(i)] = r.d;
        have_value = true;
    }
    if (!have_value)
        jet.value = eval(e, x);
    return jet;
}

Jet2 eval_jet2(const Expression& e, const Eigen::VectorXd& x)
{
    using D = Dual<double>;
    using DD = Dual<D>;
    const std::size_t dim = e.dimension();
    std::vector<DD> args(dim);
    for (std::size_t i = 0; i < dim; ++i)
        args[i] = DD(D(x[static_cast<Eigen::Index>(i)], 0.0), D(0.0, 0.0));

    Jet2 jet;
    const auto n = static_cast<Eigen::Index>(dim);
    jet.gradient = Eigen::VectorXd::Zero(n);
    jet.hessian = Eigen::MatrixXd::Zero(n, n);
    std::vector<bool> used(dim, false);
    collect(e.root(), used);
    bool have_value = false;
    // inner tangent seeds direction i, outer tangent seeds direction j
    for (std::size_t i = 0; i < dim; ++i) {
        if (!used[i])
            continue;
        for (std::size_t j = i; j < dim; ++j) {
            if (!used[j])
                continue;
            args[i].v.d = 1.0;
            args[j].d.v = 1.0;
            DD r = guarded<DD>(e, args);
            args[i].v.d = 0.0;
            args[j].d.v = 0.0;
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            jet.value = r.v.v;
            jet.gradient[ii] = r.v.d;
            jet.gradient[jj] = r.d.v;
            jet.hessian(ii, jj) = r.d.d;
            jet.hessian(jj, ii) = r.d.d;
            have_value = true;
        }
    }
    if (!have_value)
        jet.value = eval(e, x);
    return jet;
}

Jet2 eval_jet2(const Expression& e, const std::map<std::string, double>& point)
{
    return eval_jet2(e, bind(e, point));
}

} // namespace contactlab
