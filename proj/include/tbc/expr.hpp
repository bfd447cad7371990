#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tbc/spec_io.hpp"
#include "tbc/value.hpp"

namespace tbc {

/// Operator set of the typed GP. `Variable` and `Constant` are the terminals.
enum class Op : std::uint8_t {
    Variable,
    Constant,
    // D-valued
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Root,
    ToDouble,
    Cos,
    Exp,
    Log,
    // I-valued
    ToInt,
    // B-valued
    And,
    Or,
    Lt,
    Gt,
    Eq,
    EqArith,
    EqString,
    // polymorphic in its result kind
    If,
};

inline constexpr int kOpCount = static_cast<int>(Op::If) + 1;

struct OperatorSignature {
    std::string_view name;
    int arity = 0;
    std::array<ValueKind, 3> args{};
    ValueKind result = ValueKind::Double;
};

/// Signature of `op` when it produces `result`. Only `If` depends on `result`; for every
/// other operator `result` must equal the fixed result kind.
OperatorSignature signature(Op op, ValueKind result = ValueKind::Double);

int arity(Op op) noexcept;
bool is_terminal(Op op) noexcept;

/// One node of a tree stored in prefix order.
struct Node {
    Op op = Op::Constant;
    ValueKind kind = ValueKind::Double;
    // free constant drawn from [-2, 2]; mutation resamples it
    bool ephemeral = false;
    // nodes in the subtree rooted here, self included
    std::uint32_t size = 1;
    // parameter index for Variable, string-table index for String constants
    std::uint32_t index = 0;
    // D payload, I payload as an integral double, B payload as 0/1
    double value = 0.0;

    bool operator==(const Node&) const = default;
};

/// A strongly-typed expression tree held as a flat prefix-order node array.
/// The subtree rooted at node `i` occupies `[i, i + nodes()[i].size)`.
class ExprTree {
public:
    ExprTree() = default;
    explicit ExprTree(std::vector<Node> nodes);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Node& operator[](std::size_t i) const { return nodes_[i]; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    ValueKind kind() const { return nodes_.front().kind; }

    bool operator==(const ExprTree&) const = default;

private:
    std::vector<Node> nodes_;
};

/// Result of evaluating a tree at one input. `finite` is false exactly when a numeric
/// result is infinite or NaN; it is always true for booleans and strings.
struct EvalResult {
    Value value;
    bool finite = true;

    /// Numeric reading used as a model prediction.
    double as_double() const noexcept { return numeric_value(value); }
};

struct EvalOptions {
    /// Relative tolerance of EQArith: |x - y| <= tol * max(1, |x|, |y|).
    double eq_tolerance = 1e-9;
};

/// Terminals and non-terminals available for a given interface.
class PrimitiveSet {
public:
    explicit PrimitiveSet(const InterfaceSpec& spec);

    /// D, I and B always have constants; S only when some string parameter exists.
    bool inhabited(ValueKind kind) const noexcept { return terminal_choices(kind) > 0; }

    std::span<const Op> functions(ValueKind kind) const noexcept;
    std::span<const std::uint32_t> variables(ValueKind kind) const noexcept;
    const std::vector<std::string>& strings() const noexcept { return strings_; }
    const InterfaceSpec& spec() const noexcept { return spec_; }

    /// Number of distinct terminal choices of one kind (variables plus constants).
    std::size_t terminal_choices(ValueKind kind) const noexcept;

private:
    InterfaceSpec spec_;
    std::array<std::vector<Op>, kKindCount> functions_;
    std::array<std::vector<std::uint32_t>, kKindCount> variables_;
    std::vector<std::string> strings_;
};

enum class GrowMethod { Grow, Full };

/// Random well-typed tree of result kind `root_kind` and depth at most `max_depth`.
/// Throws std::invalid_argument when `root_kind` has no terminals (S without string inputs)
/// or `max_depth` is zero.
ExprTree random_tree(ValueKind root_kind, int max_depth, const PrimitiveSet& primitives, Rng& rng,
                     GrowMethod method = GrowMethod::Grow);
ExprTree random_tree(ValueKind root_kind, int max_depth, const InterfaceSpec& spec, Rng& rng,
                     GrowMethod method = GrowMethod::Grow);

/// A uniformly chosen terminal of `kind`; free constants get a fresh value.
Node random_terminal(ValueKind kind, const PrimitiveSet& primitives, Rng& rng);

/// Fresh value for an ephemeral constant of kind D (uniform on [-2, 2]) or I ({-2..2}).
double sample_free_constant(ValueKind kind, Rng& rng);

int depth(const ExprTree& tree);

/// Depth of every node counted from the root (root = 1).
std::vector<int> node_depths(const ExprTree& tree);

/// Depth of the subtree rooted at node `at`.
int subtree_depth(const ExprTree& tree, std::size_t at);

ExprTree subtree(const ExprTree& tree, std::size_t at);

/// Copy of `target` whose subtree at `at` is replaced by `donor`'s subtree at `from`.
ExprTree replace_subtree(const ExprTree& target, std::size_t at, const ExprTree& donor, std::size_t from);

/// Structural check: consistent sizes, arities, child kinds, bound variables and constants,
/// and depth within `max_depth`.
bool is_well_typed(const ExprTree& tree, const InterfaceSpec& spec, int max_depth = 1 << 30);

EvalResult evaluate(const ExprTree& tree, const InputVector& binding, const InterfaceSpec& spec,
                    const EvalOptions& options = {});

/// Encodes inputs column-per-parameter for batch evaluation: D and I as their numeric value,
/// B as 0/1, S as the index of the literal in string_table(spec).
Eigen::MatrixXd encode_inputs(std::span<const InputVector> inputs, const InterfaceSpec& spec);

/// Evaluates the tree over every row of an encoded input matrix. Agrees bit-for-bit with
/// evaluate() on the numeric reading of each row.
Eigen::ArrayXd evaluate_batch(const ExprTree& tree, const Eigen::MatrixXd& encoded, const EvalOptions& options = {});

/// Prefix rendering such as `Mult(weight,Exp(-1.1518922634307343))`.
std::string render(const ExprTree& tree, const InterfaceSpec& spec);

/// Inverse of render(), operator names matched case-insensitively. A free constant that happens
/// to equal the fixed constant (-1.0, or 0 for integers) comes back non-ephemeral; every other
/// node round-trips exactly. Throws ParseError on malformed text and ValidationError on unknown
/// names and type errors.
ExprTree parse_expr(std::string_view text, const InterfaceSpec& spec);

} // namespace tbc
