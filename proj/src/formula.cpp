#include "mdag/formula.hpp"

#include <cctype>
#include <cmath>
#include <functional>

namespace mdag {

namespace {

struct Token {
    enum class Type { Num, Ident, Op, End };
    Type type = Type::End;
    double num = 0.0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ >= s_.size()) {
            cur_ = Token{};
            return;
        }
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = pos_;
            while (end < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                    s_[end] == 'e' || s_[end] == 'E' ||
                    ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
                     (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
                ++end;
            cur_.type = Token::Type::Num;
            cur_.text = s_.substr(pos_, end - pos_);
            try {
                cur_.num = std::stod(cur_.text);
            } catch (...) {
                throw FormulaParseError("bad number '" + cur_.text + "'");
            }
            pos_ = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t end = pos_;
            while (end < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_' ||
                    s_[end] == '@'))
                ++end;
            cur_.type = Token::Type::Ident;
            cur_.text = s_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        // operators, possibly two-character
        static const char* two[] = {"==", "!=", "<=", ">="};
        for (const char* op : two) {
            if (s_.compare(pos_, 2, op) == 0) {
                cur_.type = Token::Type::Op;
                cur_.text = op;
                pos_ += 2;
                return;
            }
        }
        cur_.type = Token::Type::Op;
        cur_.text = std::string(1, c);
        ++pos_;
    }

    const std::string& s_;
    size_t pos_ = 0;
    Token cur_;
};

}  // namespace

Formula Formula::parse(const std::string& text) {
    Formula f;
    f.text_ = text;
    Lexer lex(text);

    auto add_node = [&](Node n) {
        f.nodes_.push_back(n);
        return static_cast<int>(f.nodes_.size()) - 1;
    };
    auto var_slot = [&](const std::string& token) {
        NodeId id = NodeId::parse(token);
        for (size_t i = 0; i < f.vars_.size(); ++i)
            if (f.vars_[i] == id) return static_cast<int>(i);
        f.vars_.push_back(id);
        return static_cast<int>(f.vars_.size()) - 1;
    };

    auto expect_op = [&](const std::string& op) {
        Token t = lex.take();
        if (t.type != Token::Type::Op || t.text != op)
            throw FormulaParseError("expected '" + op + "' in formula '" + text + "'");
    };

    std::function<int()> parse_expr;

    std::function<int()> parse_primary = [&]() -> int {
        Token t = lex.take();
        if (t.type == Token::Type::Num) return add_node({Node::Op::Num, t.num, -1, -1, -1});
        if (t.type == Token::Type::Op && t.text == "(") {
            int e = parse_expr();
            expect_op(")");
            return e;
        }
        if (t.type == Token::Type::Op && t.text == "-") {
            int e = parse_primary();
            Node n;
            n.op = Node::Op::Neg;
            n.a = e;
            return add_node(n);
        }
        if (t.type == Token::Type::Ident) {
            if (lex.peek().type == Token::Type::Op && lex.peek().text == "(") {
                lex.take();  // '('
                Node n;
                if (t.text == "exp")
                    n.op = Node::Op::Exp;
                else if (t.text == "sqrt")
                    n.op = Node::Op::Sqrt;
                else if (t.text == "log")
                    n.op = Node::Op::Log;
                else if (t.text == "I") {
                    // indicator of a comparison
                    int lhs = parse_expr();
                    Token cmp = lex.take();
                    if (cmp.type != Token::Type::Op)
                        throw FormulaParseError("I(...) needs a comparison in '" + text + "'");
                    Node c;
                    if (cmp.text == "=" || cmp.text == "==")
                        c.op = Node::Op::Eq;
                    else if (cmp.text == "!=")
                        c.op = Node::Op::Ne;
                    else if (cmp.text == "<")
                        c.op = Node::Op::Lt;
                    else if (cmp.text == "<=")
                        c.op = Node::Op::Le;
                    else if (cmp.text == ">")
                        c.op = Node::Op::Gt;
                    else if (cmp.text == ">=")
                        c.op = Node::Op::Ge;
                    else
                        throw FormulaParseError("unknown comparison '" + cmp.text + "'");
                    c.a = lhs;
                    c.b = parse_expr();
                    expect_op(")");
                    int cmp_node = add_node(c);
                    Node ind;
                    ind.op = Node::Op::Indicator;
                    ind.a = cmp_node;
                    return add_node(ind);
                } else {
                    throw FormulaParseError("unknown function '" + t.text + "'");
                }
                n.a = parse_expr();
                expect_op(")");
                return add_node(n);
            }
            Node n;
            n.op = Node::Op::Var;
            n.var_slot = var_slot(t.text);
            return add_node(n);
        }
        throw FormulaParseError("unexpected token '" + t.text + "' in '" + text + "'");
    };

    std::function<int()> parse_term = [&]() -> int {
        int lhs = parse_primary();
        while (lex.peek().type == Token::Type::Op &&
               (lex.peek().text == "*" || lex.peek().text == "/")) {
            std::string op = lex.take().text;
            int rhs = parse_primary();
            Node n;
            n.op = op == "*" ? Node::Op::Mul : Node::Op::Div;
            n.a = lhs;
            n.b = rhs;
            lhs = add_node(n);
        }
        return lhs;
    };

    parse_expr = [&]() -> int {
        int lhs = parse_term();
        while (lex.peek().type == Token::Type::Op &&
               (lex.peek().text == "+" || lex.peek().text == "-")) {
            std::string op = lex.take().text;
            int rhs = parse_term();
            Node n;
            n.op = op == "+" ? Node::Op::Add : Node::Op::Sub;
            n.a = lhs;
            n.b = rhs;
            lhs = add_node(n);
        }
        return lhs;
    };

    f.root_ = parse_expr();
    if (lex.peek().type != Token::Type::End)
        throw FormulaParseError("trailing input in formula '" + text + "'");
    f.slot_to_column_.assign(f.vars_.size(), -1);
    return f;
}

void Formula::bind(const std::vector<NodeId>& columns) {
    slot_to_column_.assign(vars_.size(), -1);
    for (size_t s = 0; s < vars_.size(); ++s) {
        for (size_t c = 0; c < columns.size(); ++c)
            if (columns[c] == vars_[s]) {
                slot_to_column_[s] = static_cast<int>(c);
                break;
            }
        if (slot_to_column_[s] < 0)
            throw UnknownNode("formula variable " + vars_[s].token() + " not bound");
    }
}

double Formula::eval_node(int idx, std::span<const double> values) const {
    const Node& n = nodes_[idx];
    switch (n.op) {
        case Node::Op::Num: return n.num;
        case Node::Op::Var: return values[slot_to_column_[n.var_slot]];
        case Node::Op::Add: return eval_node(n.a, values) + eval_node(n.b, values);
        case Node::Op::Sub: return eval_node(n.a, values) - eval_node(n.b, values);
        case Node::Op::Mul: return eval_node(n.a, values) * eval_node(n.b, values);
        case Node::Op::Div: {
            double d = eval_node(n.b, values);
            if (d == 0.0) throw FormulaDomainError("division by zero in '" + text_ + "'");
            return eval_node(n.a, values) / d;
        }
        case Node::Op::Neg: return -eval_node(n.a, values);
        case Node::Op::Exp: return std::exp(eval_node(n.a, values));
        case Node::Op::Sqrt: {
            double v = eval_node(n.a, values);
            if (v < 0) throw FormulaDomainError("sqrt of negative value in '" + text_ + "'");
            return std::sqrt(v);
        }
        case Node::Op::Log: {
            double v = eval_node(n.a, values);
            if (v <= 0) throw FormulaDomainError("log of non-positive value in '" + text_ + "'");
            return std::log(v);
        }
        case Node::Op::Indicator: return eval_node(n.a, values);
        case Node::Op::Eq: return std::abs(eval_node(n.a, values) - eval_node(n.b, values)) < 1e-9;
        case Node::Op::Ne:
            return std::abs(eval_node(n.a, values) - eval_node(n.b, values)) >= 1e-9;
        case Node::Op::Lt: return eval_node(n.a, values) < eval_node(n.b, values);
        case Node::Op::Le: return eval_node(n.a, values) <= eval_node(n.b, values) + 1e-12;
        case Node::Op::Gt: return eval_node(n.a, values) > eval_node(n.b, values);
        case Node::Op::Ge: return eval_node(n.a, values) >= eval_node(n.b, values) - 1e-12;
    }
    throw FormulaDomainError("corrupt formula node");
}

double Formula::eval(std::span<const double> values) const {
    if (root_ < 0) throw FormulaDomainError("empty formula");
    return eval_node(root_, values);
}

}  // namespace mdag
