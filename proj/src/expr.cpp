#include "tbc/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "tbc/errors.hpp"

namespace tbc {
namespace {

constexpr ValueKind D = ValueKind::Double;
constexpr ValueKind I = ValueKind::Integer;
constexpr ValueKind B = ValueKind::Boolean;
constexpr ValueKind S = ValueKind::String;

constexpr double kTwo63 = 9223372036854775808.0;

std::size_t kind_slot(ValueKind kind) { return static_cast<std::size_t>(kind); }

// Shared numeric semantics of the scalar and batch evaluators.
double root_of(double x, double y) { return std::pow(x, 1.0 / y); }

double to_int_value(double v) {
    if (std::isnan(v)) {
        return 0.0;
    }
    if (v >= kTwo63) {
        return kTwo63;
    }
    if (v <= -kTwo63) {
        return -kTwo63;
    }
    // integers have no negative zero
    return std::trunc(v) + 0.0;
}

std::int64_t to_int64(double v) {
    if (std::isnan(v)) {
        return 0;
    }
    if (v >= kTwo63) {
        return std::numeric_limits<std::int64_t>::max();
    }
    if (v <= -kTwo63) {
        return std::numeric_limits<std::int64_t>::min();
    }
    return static_cast<std::int64_t>(v);
}

bool eq_arith(double x, double y, double tol) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        return x == y;
    }
    return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

void recompute_sizes(std::vector<Node>& nodes) {
    std::vector<std::uint32_t> stack;
    for (std::size_t k = nodes.size(); k-- > 0;) {
        std::uint32_t size = 1;
        for (int a = arity(nodes[k].op); a > 0; --a) {
            size += stack.back();
            stack.pop_back();
        }
        nodes[k].size = size;
        stack.push_back(size);
    }
}

std::vector<int> depths_of(std::span<const Node> nodes) {
    std::vector<int> depths(nodes.size());
    std::vector<std::pair<int, int>> open; // (depth, children still to visit)
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        while (!open.empty() && open.back().second == 0) {
            open.pop_back();
        }
        const int d = open.empty() ? 1 : open.back().first + 1;
        if (!open.empty()) {
            --open.back().second;
        }
        depths[i] = d;
        if (int a = arity(nodes[i].op); a > 0) {
            open.emplace_back(d, a);
        }
    }
    return depths;
}

// ---------------------------------------------------------------------------
// scalar evaluation

struct Cell {
    double d = 0.0;
    std::int64_t i = 0;
    bool b = false;
    std::uint32_t s = 0;
};

class ScalarEvaluator {
public:
    ScalarEvaluator(const ExprTree& tree, const InputVector& binding, const InterfaceSpec& spec,
                    const EvalOptions& options)
        : tree_(tree), binding_(binding), spec_(spec), options_(options) {}

    Cell eval(std::size_t at) const {
        const Node& n = tree_[at];
        switch (n.op) {
        case Op::Variable: return variable(n);
        case Op::Constant: return constant(n);
        case Op::If: {
            const std::size_t c0 = at + 1;
            const std::size_t c1 = c0 + tree_[c0].size;
            const std::size_t c2 = c1 + tree_[c1].size;
            return eval(c0).b ? eval(c1) : eval(c2);
        }
        default: break;
        }

        const std::size_t c0 = at + 1;
        const Cell a = eval(c0);
        Cell r;
        if (arity(n.op) == 1) {
            switch (n.op) {
            case Op::ToDouble: r.d = static_cast<double>(a.i); break;
            case Op::Cos: r.d = std::cos(a.d); break;
            case Op::Exp: r.d = std::exp(a.d); break;
            case Op::Log: r.d = std::log(a.d); break;
            case Op::ToInt: r.i = to_int64(a.d); break;
            default: throw EvalError("unexpected unary operator");
            }
            return r;
        }
        const Cell b = eval(c0 + tree_[c0].size);
        switch (n.op) {
        case Op::Add: r.d = a.d + b.d; break;
        case Op::Sub: r.d = a.d - b.d; break;
        case Op::Mul: r.d = a.d * b.d; break;
        case Op::Div: r.d = a.d / b.d; break;
        case Op::Pow: r.d = std::pow(a.d, b.d); break;
        case Op::Root: r.d = root_of(a.d, b.d); break;
        case Op::And: r.b = a.b && b.b; break;
        case Op::Or: r.b = a.b || b.b; break;
        case Op::Lt: r.b = a.d < b.d; break;
        case Op::Gt: r.b = a.d > b.d; break;
        case Op::Eq: r.b = a.b == b.b; break;
        case Op::EqArith: r.b = eq_arith(a.d, b.d, options_.eq_tolerance); break;
        case Op::EqString: r.b = a.s == b.s; break;
        default: throw EvalError("unexpected binary operator");
        }
        return r;
    }

    const std::vector<std::string>& strings() const {
        if (!strings_) {
            strings_ = string_table(spec_);
        }
        return *strings_;
    }

private:
    Cell variable(const Node& n) const {
        if (n.index >= binding_.size()) {
            throw EvalError("unbound variable reference #" + std::to_string(n.index));
        }
        const Value& v = binding_[n.index];
        if (kind_of(v) != n.kind) {
            throw EvalError("variable #" + std::to_string(n.index) + " bound to a value of the wrong kind");
        }
        Cell c;
        switch (n.kind) {
        case ValueKind::Double: c.d = std::get<double>(v); break;
        case ValueKind::Integer: c.i = std::get<std::int64_t>(v); break;
        case ValueKind::Boolean: c.b = std::get<bool>(v); break;
        case ValueKind::String: {
            const auto& table = strings();
            auto it = std::find(table.begin(), table.end(), std::get<std::string>(v));
            if (it == table.end()) {
                throw EvalError("string value \"" + std::get<std::string>(v) + "\" is not an enumerated literal");
            }
            c.s = static_cast<std::uint32_t>(it - table.begin());
            break;
        }
        }
        return c;
    }

    static Cell constant(const Node& n) {
        Cell c;
        c.d = n.value;
        c.i = static_cast<std::int64_t>(n.value);
        c.b = n.value != 0.0;
        c.s = n.index;
        return c;
    }

    const ExprTree& tree_;
    const InputVector& binding_;
    const InterfaceSpec& spec_;
    const EvalOptions& options_;
    mutable std::optional<std::vector<std::string>> strings_;
};

// ---------------------------------------------------------------------------
// batch evaluation

class BatchEvaluator {
public:
    BatchEvaluator(const ExprTree& tree, const Eigen::MatrixXd& x, const EvalOptions& options)
        : tree_(tree), x_(x), options_(options) {}

    Eigen::ArrayXd eval(std::size_t at) const {
        const Node& n = tree_[at];
        const Eigen::Index rows = x_.rows();
        if (n.op == Op::Variable) {
            if (static_cast<Eigen::Index>(n.index) >= x_.cols()) {
                throw EvalError("unbound variable reference #" + std::to_string(n.index));
            }
            return x_.col(n.index).array();
        }
        if (n.op == Op::Constant) {
            const double v = n.kind == ValueKind::String ? static_cast<double>(n.index) : n.value;
            return Eigen::ArrayXd::Constant(rows, v);
        }

        const std::size_t c0 = at + 1;
        const Eigen::ArrayXd a = eval(c0);
        if (arity(n.op) == 1) {
            switch (n.op) {
            case Op::ToDouble: return a;
            case Op::Cos: return a.unaryExpr([](double v) { return std::cos(v); });
            case Op::Exp: return a.unaryExpr([](double v) { return std::exp(v); });
            case Op::Log: return a.unaryExpr([](double v) { return std::log(v); });
            case Op::ToInt: return a.unaryExpr([](double v) { return to_int_value(v); });
            default: throw EvalError("unexpected unary operator");
            }
        }

        const std::size_t c1 = c0 + tree_[c0].size;
        const Eigen::ArrayXd b = eval(c1);
        const double tol = options_.eq_tolerance;
        switch (n.op) {
        case Op::If: {
            const Eigen::ArrayXd c = eval(c1 + tree_[c1].size);
            return (a != 0.0).select(b, c);
        }
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::Pow: return a.binaryExpr(b, [](double x, double y) { return std::pow(x, y); });
        case Op::Root: return a.binaryExpr(b, [](double x, double y) { return root_of(x, y); });
        case Op::And: return ((a != 0.0) && (b != 0.0)).cast<double>();
        case Op::Or: return ((a != 0.0) || (b != 0.0)).cast<double>();
        case Op::Lt: return (a < b).cast<double>();
        case Op::Gt: return (a > b).cast<double>();
        case Op::Eq: return ((a != 0.0) == (b != 0.0)).cast<double>();
        case Op::EqArith:
            return a.binaryExpr(b, [tol](double x, double y) { return eq_arith(x, y, tol) ? 1.0 : 0.0; });
        case Op::EqString: return (a == b).cast<double>();
        default: throw EvalError("unexpected binary operator");
        }
    }

private:
    const ExprTree& tree_;
    const Eigen::MatrixXd& x_;
    const EvalOptions& options_;
};

// ---------------------------------------------------------------------------
// random generation

class TreeGrower {
public:
    TreeGrower(const PrimitiveSet& primitives, Rng& rng, GrowMethod method)
        : primitives_(primitives), rng_(rng), method_(method) {}

    void grow(ValueKind kind, int depth_left, std::vector<Node>& out) {
        const auto funcs = primitives_.functions(kind);
        bool leaf = depth_left <= 1 || funcs.empty();
        if (!leaf && method_ == GrowMethod::Grow) {
            const std::size_t terminals = primitives_.terminal_choices(kind);
            std::uniform_int_distribution<std::size_t> pick(0, terminals + funcs.size() - 1);
            leaf = pick(rng_) < terminals;
        }
        if (leaf) {
            out.push_back(random_terminal(kind, primitives_, rng_));
            return;
        }
        std::uniform_int_distribution<std::size_t> pick(0, funcs.size() - 1);
        const Op op = funcs[pick(rng_)];
        const auto sig = signature(op, kind);
        const std::size_t start = out.size();
        out.push_back(Node{.op = op, .kind = kind});
        for (int k = 0; k < sig.arity; ++k) {
            grow(sig.args[k], depth_left - 1, out);
        }
        out[start].size = static_cast<std::uint32_t>(out.size() - start);
    }

private:
    const PrimitiveSet& primitives_;
    Rng& rng_;
    GrowMethod method_;
};

// ---------------------------------------------------------------------------
// rendering and parsing

struct NameAlias {
    std::string_view name;
    Op op;
};

constexpr NameAlias kAliases[] = {
    {"Add", Op::Add},         {"Sub", Op::Sub},           {"Subtract", Op::Sub},      {"Mult", Op::Mul},
    {"Mul", Op::Mul},         {"Multiply", Op::Mul},      {"Div", Op::Div},           {"Divide", Op::Div},
    {"Pow", Op::Pow},         {"Power", Op::Pow},         {"Root", Op::Root},         {"ToDouble", Op::ToDouble},
    {"Cos", Op::Cos},         {"Exp", Op::Exp},           {"Log", Op::Log},           {"ToInt", Op::ToInt},
    {"And", Op::And},         {"Or", Op::Or},             {"LT", Op::Lt},             {"GT", Op::Gt},
    {"EQ", Op::Eq},           {"EQArith", Op::EqArith},   {"EQString", Op::EqString}, {"If", Op::If},
    {"IfThenElse", Op::If},
};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::string render_double_constant(double v) {
    std::string text = format_double(v);
    if (text.find_first_of(".eEn") == std::string::npos) {
        text += ".0";
    }
    return text;
}

void render_into(const ExprTree& tree, std::size_t at, const InterfaceSpec& spec,
                 const std::vector<std::string>& strings, std::string& out) {
    const Node& n = tree[at];
    if (n.op == Op::Variable) {
        out += n.index < spec.parameters.size() ? spec.parameters[n.index].name : "$" + std::to_string(n.index);
        return;
    }
    if (n.op == Op::Constant) {
        switch (n.kind) {
        case ValueKind::Double: out += render_double_constant(n.value); break;
        case ValueKind::Integer: out += std::to_string(static_cast<std::int64_t>(n.value)); break;
        case ValueKind::Boolean: out += n.value != 0.0 ? "true" : "false"; break;
        case ValueKind::String:
            out += '"';
            out += n.index < strings.size() ? strings[n.index] : "?";
            out += '"';
            break;
        }
        return;
    }
    out += signature(n.op, n.kind).name;
    out += '(';
    std::size_t child = at + 1;
    for (int k = 0; k < arity(n.op); ++k) {
        if (k > 0) {
            out += ',';
        }
        render_into(tree, child, spec, strings, out);
        child += tree[child].size;
    }
    out += ')';
}

class ExprParser {
public:
    ExprParser(std::string_view text, const InterfaceSpec& spec)
        : text_(text), spec_(spec), strings_(string_table(spec)) {}

    ExprTree parse() {
        std::vector<Node> nodes;
        parse_node(nodes);
        skip_ws();
        if (pos_ != text_.size()) {
            fail("trailing characters");
        }
        recompute_sizes(nodes);
        return ExprTree(std::move(nodes));
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expression: " + what + " at offset " + std::to_string(pos_), pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c) {
        if (!peek(c)) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    ValueKind parse_node(std::vector<Node>& out) {
        skip_ws();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '"') {
            return parse_string(out);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            return parse_number(out);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return parse_identifier(out);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    ValueKind parse_string(std::vector<Node>& out) {
        const std::size_t close = text_.find('"', pos_ + 1);
        if (close == std::string_view::npos) {
            fail("unterminated string literal");
        }
        const std::string literal(text_.substr(pos_ + 1, close - pos_ - 1));
        pos_ = close + 1;
        auto it = std::find(strings_.begin(), strings_.end(), literal);
        if (it == strings_.end()) {
            throw ValidationError("expression", "string literal \"" + literal + "\" is not enumerated by any parameter");
        }
        out.push_back(Node{.op = Op::Constant, .kind = S, .index = static_cast<std::uint32_t>(it - strings_.begin())});
        return S;
    }

    ValueKind parse_number(std::vector<Node>& out) {
        const std::size_t start = pos_;
        ++pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            const bool exponent_sign = (c == '-' || c == '+') && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || exponent_sign) {
                ++pos_;
            } else {
                break;
            }
        }
        const std::string token(text_.substr(start, pos_ - start));
        const bool is_double = token.find_first_of(".eE") != std::string::npos;
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(token, &used);
        } catch (const std::exception&) {
            fail("malformed number \"" + token + "\"");
        }
        if (used != token.size()) {
            fail("malformed number \"" + token + "\"");
        }
        Node n{.op = Op::Constant, .kind = is_double ? D : I, .value = is_double ? value : std::trunc(value)};
        if (is_double) {
            n.ephemeral = value != -1.0 && value >= -2.0 && value <= 2.0;
        } else {
            n.ephemeral = value != 0.0 && value >= -2.0 && value <= 2.0;
        }
        out.push_back(n);
        return n.kind;
    }

    ValueKind parse_identifier(std::vector<Node>& out) {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view word = text_.substr(start, pos_ - start);
        if (peek('(')) {
            return parse_call(word, out);
        }
        if (word == "true" || word == "false") {
            out.push_back(Node{.op = Op::Constant, .kind = B, .value = word == "true" ? 1.0 : 0.0});
            return B;
        }
        for (std::size_t k = 0; k < spec_.parameters.size(); ++k) {
            if (spec_.parameters[k].name == word) {
                out.push_back(Node{.op = Op::Variable, .kind = spec_.parameters[k].kind, .index = static_cast<std::uint32_t>(k)});
                return spec_.parameters[k].kind;
            }
        }
        throw ValidationError("expression", "unknown variable \"" + std::string(word) + "\"");
    }

    ValueKind parse_call(std::string_view word, std::vector<Node>& out) {
        const auto* alias = std::find_if(std::begin(kAliases), std::end(kAliases),
                                         [&](const NameAlias& a) { return iequals(a.name, word); });
        if (alias == std::end(kAliases)) {
            throw ValidationError("expression", "unknown operator \"" + std::string(word) + "\"");
        }
        const Op op = alias->op;
        expect('(');
        const std::size_t self = out.size();
        out.push_back(Node{.op = op});
        std::vector<ValueKind> kinds;
        if (!peek(')')) {
            kinds.push_back(parse_node(out));
            while (peek(',')) {
                ++pos_;
                kinds.push_back(parse_node(out));
            }
        }
        expect(')');

        if (static_cast<int>(kinds.size()) != arity(op)) {
            throw ValidationError("expression", std::string(word) + " expects " + std::to_string(arity(op)) +
                                                    " arguments, got " + std::to_string(kinds.size()));
        }
        const ValueKind result = op == Op::If ? kinds[1] : signature(op).result;
        const auto sig = signature(op, result);
        for (int k = 0; k < sig.arity; ++k) {
            if (kinds[k] != sig.args[k]) {
                throw ValidationError("expression", std::string(word) + " argument " + std::to_string(k + 1) +
                                                        " must be " + std::string(kind_name(sig.args[k])) + ", got " +
                                                        std::string(kind_name(kinds[k])));
            }
        }
        out[self].kind = result;
        return result;
    }

    std::string_view text_;
    const InterfaceSpec& spec_;
    std::vector<std::string> strings_;
    std::size_t pos_ = 0;
};

} // namespace

OperatorSignature signature(Op op, ValueKind result) {
    switch (op) {
    case Op::Variable: return {"Var", 0, {}, result};
    case Op::Constant: return {"Const", 0, {}, result};
    case Op::Add: return {"Add", 2, {D, D}, D};
    case Op::Sub: return {"Sub", 2, {D, D}, D};
    case Op::Mul: return {"Mult", 2, {D, D}, D};
    case Op::Div: return {"Div", 2, {D, D}, D};
    case Op::Pow: return {"Pow", 2, {D, D}, D};
    case Op::Root: return {"Root", 2, {D, D}, D};
    case Op::ToDouble: return {"ToDouble", 1, {I}, D};
    case Op::Cos: return {"Cos", 1, {D}, D};
    case Op::Exp: return {"Exp", 1, {D}, D};
    case Op::Log: return {"Log", 1, {D}, D};
    case Op::ToInt: return {"ToInt", 1, {D}, I};
    case Op::And: return {"And", 2, {B, B}, B};
    case Op::Or: return {"Or", 2, {B, B}, B};
    case Op::Lt: return {"LT", 2, {D, D}, B};
    case Op::Gt: return {"GT", 2, {D, D}, B};
    case Op::Eq: return {"EQ", 2, {B, B}, B};
    case Op::EqArith: return {"EQArith", 2, {D, D}, B};
    case Op::EqString: return {"EQString", 2, {S, S}, B};
    case Op::If: return {"If", 3, {B, result, result}, result};
    }
    throw std::invalid_argument("unknown operator");
}

int arity(Op op) noexcept {
    switch (op) {
    case Op::Variable:
    case Op::Constant: return 0;
    case Op::ToDouble:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::ToInt: return 1;
    case Op::If: return 3;
    default: return 2;
    }
}

bool is_terminal(Op op) noexcept { return op == Op::Variable || op == Op::Constant; }

ExprTree::ExprTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

PrimitiveSet::PrimitiveSet(const InterfaceSpec& spec) : spec_(spec), strings_(string_table(spec)) {
    for (std::size_t k = 0; k < spec.parameters.size(); ++k) {
        variables_[kind_slot(spec.parameters[k].kind)].push_back(static_cast<std::uint32_t>(k));
    }
    const bool has_strings = !strings_.empty() || !variables_[kind_slot(S)].empty();
    functions_[kind_slot(D)] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow, Op::Root,
                                Op::ToDouble, Op::Cos, Op::Exp, Op::Log, Op::If};
    functions_[kind_slot(I)] = {Op::ToInt, Op::If};
    functions_[kind_slot(B)] = {Op::And, Op::Or, Op::Lt, Op::Gt, Op::Eq, Op::EqArith};
    if (has_strings) {
        functions_[kind_slot(B)].push_back(Op::EqString);
        functions_[kind_slot(S)] = {Op::If};
    }
    functions_[kind_slot(B)].push_back(Op::If);
}

std::span<const Op> PrimitiveSet::functions(ValueKind kind) const noexcept { return functions_[kind_slot(kind)]; }

std::span<const std::uint32_t> PrimitiveSet::variables(ValueKind kind) const noexcept {
    return variables_[kind_slot(kind)];
}

std::size_t PrimitiveSet::terminal_choices(ValueKind kind) const noexcept {
    const std::size_t vars = variables_[kind_slot(kind)].size();
    return kind == S ? vars + strings_.size() : vars + 2;
}

double sample_free_constant(ValueKind kind, Rng& rng) {
    if (kind == I) {
        return static_cast<double>(std::uniform_int_distribution<int>(-2, 2)(rng));
    }
    return std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
}

Node random_terminal(ValueKind kind, const PrimitiveSet& primitives, Rng& rng) {
    const std::size_t choices = primitives.terminal_choices(kind);
    if (choices == 0) {
        throw std::invalid_argument("no terminals of kind " + std::string(kind_name(kind)));
    }
    const auto vars = primitives.variables(kind);
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, choices - 1)(rng);
    if (pick < vars.size()) {
        return Node{.op = Op::Variable, .kind = kind, .index = vars[pick]};
    }
    const std::size_t c = pick - vars.size();
    Node n{.op = Op::Constant, .kind = kind};
    switch (kind) {
    case ValueKind::Double:
    case ValueKind::Integer:
        if (c == 0) {
            n.ephemeral = true;
            n.value = sample_free_constant(kind, rng);
        } else {
            n.value = kind == D ? -1.0 : 0.0;
        }
        break;
    case ValueKind::Boolean: n.value = c == 0 ? 1.0 : 0.0; break;
    case ValueKind::String: n.index = static_cast<std::uint32_t>(c); break;
    }
    return n;
}

ExprTree random_tree(ValueKind root_kind, int max_depth, const PrimitiveSet& primitives, Rng& rng,
                     GrowMethod method) {
    if (max_depth < 1) {
        throw std::invalid_argument("random_tree: max_depth must be at least 1");
    }
    if (!primitives.inhabited(root_kind)) {
        throw std::invalid_argument("random_tree: no terminals of kind " + std::string(kind_name(root_kind)));
    }
    std::vector<Node> nodes;
    TreeGrower(primitives, rng, method).grow(root_kind, max_depth, nodes);
    return ExprTree(std::move(nodes));
}

ExprTree random_tree(ValueKind root_kind, int max_depth, const InterfaceSpec& spec, Rng& rng, GrowMethod method) {
    return random_tree(root_kind, max_depth, PrimitiveSet(spec), rng, method);
}

std::vector<int> node_depths(const ExprTree& tree) { return depths_of(tree.nodes()); }

int depth(const ExprTree& tree) {
    const auto d = node_depths(tree);
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

int subtree_depth(const ExprTree& tree, std::size_t at) {
    const auto d = depths_of(tree.nodes().subspan(at, tree[at].size));
    return *std::max_element(d.begin(), d.end());
}

ExprTree subtree(const ExprTree& tree, std::size_t at) {
    const auto span = tree.nodes().subspan(at, tree[at].size);
    return ExprTree(std::vector<Node>(span.begin(), span.end()));
}

ExprTree replace_subtree(const ExprTree& target, std::size_t at, const ExprTree& donor, std::size_t from) {
    const auto t = target.nodes();
    const auto graft = donor.nodes().subspan(from, donor[from].size);
    std::vector<Node> nodes;
    nodes.reserve(t.size() - t[at].size + graft.size());
    nodes.insert(nodes.end(), t.begin(), t.begin() + static_cast<std::ptrdiff_t>(at));
    nodes.insert(nodes.end(), graft.begin(), graft.end());
    nodes.insert(nodes.end(), t.begin() + static_cast<std::ptrdiff_t>(at + t[at].size), t.end());
    recompute_sizes(nodes);
    return ExprTree(std::move(nodes));
}

bool is_well_typed(const ExprTree& tree, const InterfaceSpec& spec, int max_depth) {
    if (tree.empty()) {
        return false;
    }
    const auto nodes = tree.nodes();

    // Sizes must describe exactly one complete prefix tree.
    std::vector<std::uint32_t> stack;
    for (std::size_t k = nodes.size(); k-- > 0;) {
        std::uint32_t size = 1;
        const int a = arity(nodes[k].op);
        if (static_cast<int>(stack.size()) < a) {
            return false;
        }
        for (int c = 0; c < a; ++c) {
            size += stack.back();
            stack.pop_back();
        }
        if (nodes[k].size != size) {
            return false;
        }
        stack.push_back(size);
    }
    if (stack.size() != 1) {
        return false;
    }

    const std::size_t string_count = string_table(spec).size();
    for (std::size_t at = 0; at < nodes.size(); ++at) {
        const Node& n = nodes[at];
        switch (n.op) {
        case Op::Variable:
            if (n.index >= spec.parameters.size() || spec.parameters[n.index].kind != n.kind) {
                return false;
            }
            continue;
        case Op::Constant:
            switch (n.kind) {
            case ValueKind::Double:
                if (!std::isfinite(n.value) || (n.ephemeral && (n.value < -2.0 || n.value > 2.0))) {
                    return false;
                }
                break;
            case ValueKind::Integer:
                if (n.value != std::trunc(n.value) || (n.ephemeral && (n.value < -2.0 || n.value > 2.0))) {
                    return false;
                }
                break;
            case ValueKind::Boolean:
                if (n.value != 0.0 && n.value != 1.0) {
                    return false;
                }
                break;
            case ValueKind::String:
                if (n.index >= string_count) {
                    return false;
                }
                break;
            }
            continue;
        default: break;
        }
        if (n.op != Op::If && signature(n.op).result != n.kind) {
            return false;
        }
        const auto sig = signature(n.op, n.kind);
        std::size_t child = at + 1;
        for (int c = 0; c < sig.arity; ++c) {
            if (nodes[child].kind != sig.args[c]) {
                return false;
            }
            child += nodes[child].size;
        }
    }
    return depth(tree) <= max_depth;
}

EvalResult evaluate(const ExprTree& tree, const InputVector& binding, const InterfaceSpec& spec,
                    const EvalOptions& options) {
    if (tree.empty()) {
        throw EvalError("cannot evaluate an empty tree");
    }
    ScalarEvaluator evaluator(tree, binding, spec, options);
    const Cell c = evaluator.eval(0);
    switch (tree.kind()) {
    case ValueKind::Double: return {Value{c.d}, std::isfinite(c.d)};
    case ValueKind::Integer: return {Value{c.i}, true};
    case ValueKind::Boolean: return {Value{c.b}, true};
    case ValueKind::String: {
        const auto& table = evaluator.strings();
        if (c.s >= table.size()) {
            throw EvalError("string constant out of range");
        }
        return {Value{table[c.s]}, true};
    }
    }
    throw EvalError("unknown result kind");
}

Eigen::MatrixXd encode_inputs(std::span<const InputVector> inputs, const InterfaceSpec& spec) {
    const auto strings = string_table(spec);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(spec.arity()));
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        if (inputs[r].size() != spec.arity()) {
            throw std::invalid_argument("encode_inputs: arity mismatch in row " + std::to_string(r));
        }
        for (std::size_t c = 0; c < spec.arity(); ++c) {
            const Value& v = inputs[r][c];
            double encoded = 0.0;
            if (kind_of(v) == ValueKind::String) {
                auto it = std::find(strings.begin(), strings.end(), std::get<std::string>(v));
                if (it == strings.end()) {
                    throw std::invalid_argument("encode_inputs: unknown string literal \"" + std::get<std::string>(v) + "\"");
                }
                encoded = static_cast<double>(it - strings.begin());
            } else {
                encoded = numeric_value(v);
            }
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = encoded;
        }
    }
    return x;
}

Eigen::ArrayXd evaluate_batch(const ExprTree& tree, const Eigen::MatrixXd& encoded, const EvalOptions& options) {
    if (tree.empty()) {
        throw EvalError("cannot evaluate an empty tree");
    }
    return BatchEvaluator(tree, encoded, options).eval(0);
}

std::string render(const ExprTree& tree, const InterfaceSpec& spec) {
    std::string out;
    if (!tree.empty()) {
        render_into(tree, 0, spec, string_table(spec), out);
    }
    return out;
}

ExprTree parse_expr(std::string_view text, const InterfaceSpec& spec) { return ExprParser(text, spec).parse(); }

} // namespace tbc
