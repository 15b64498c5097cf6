#include "mdag/expr.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mdag {

namespace {

void collect_free(const ExprPtr& e, std::set<NodeId>& out);

void collect_free(const ExprPtr& e, std::set<NodeId>& out) {
    switch (e->kind) {
        case Expr::Kind::Conditional:
            for (const auto& t : e->targets) out.insert(t.id);
            for (const auto& g : e->given) out.insert(g.id);
            break;
        case Expr::Kind::Product:
            for (const auto& f : e->factors) collect_free(f, out);
            break;
        case Expr::Kind::SumOver: {
            std::set<NodeId> inner;
            collect_free(e->body, inner);
            for (const auto& v : e->sum_vars) inner.erase(v);
            out.insert(inner.begin(), inner.end());
            break;
        }
        case Expr::Kind::Quotient:
            collect_free(e->num, out);
            collect_free(e->den, out);
            break;
    }
}

void collect_all(const ExprPtr& e, std::set<NodeId>& out) {
    switch (e->kind) {
        case Expr::Kind::Conditional:
            for (const auto& t : e->targets) out.insert(t.id);
            for (const auto& t : e->target_fixed) out.insert(t.id);
            for (const auto& g : e->given) out.insert(g.id);
            for (const auto& g : e->given_fixed) out.insert(g.id);
            break;
        case Expr::Kind::Product:
            for (const auto& f : e->factors) collect_all(f, out);
            break;
        case Expr::Kind::SumOver:
            collect_all(e->body, out);
            for (const auto& v : e->sum_vars) out.insert(v);
            break;
        case Expr::Kind::Quotient:
            collect_all(e->num, out);
            collect_all(e->den, out);
            break;
    }
}

}  // namespace

ExprPtr make_conditional(std::vector<VarTerm> targets, std::vector<VarTerm> given,
                         std::vector<FixedTerm> given_fixed,
                         std::vector<FixedTerm> target_fixed) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Conditional;
    e->targets = std::move(targets);
    e->target_fixed = std::move(target_fixed);
    e->given = std::move(given);
    e->given_fixed = std::move(given_fixed);
    return e;
}

ExprPtr make_marginal(std::vector<VarTerm> targets) {
    return make_conditional(std::move(targets), {});
}

ExprPtr make_product(std::vector<ExprPtr> factors) {
    std::vector<ExprPtr> flat;
    for (auto& f : factors) {
        if (!f) continue;
        if (f->kind == Expr::Kind::Product)
            flat.insert(flat.end(), f->factors.begin(), f->factors.end());
        else if (f->kind == Expr::Kind::Conditional && f->targets.empty() &&
                 f->target_fixed.empty())
            continue;  // P() ≡ 1
        else
            flat.push_back(std::move(f));
    }
    if (flat.size() == 1) return flat[0];
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Product;
    e->factors = std::move(flat);
    return e;
}

ExprPtr make_sum(std::vector<NodeId> vars, ExprPtr body) {
    std::set<NodeId> fv;
    collect_free(body, fv);
    std::vector<NodeId> kept;
    for (auto& v : vars)
        if (fv.count(v)) kept.push_back(v);
    if (kept.empty()) return body;
    if (body->kind == Expr::Kind::SumOver) {
        // merge nested sums
        std::vector<NodeId> merged = body->sum_vars;
        merged.insert(merged.end(), kept.begin(), kept.end());
        return make_sum(std::move(merged), body->body);
    }
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::SumOver;
    e->sum_vars = std::move(kept);
    e->body = std::move(body);
    return e;
}

ExprPtr make_quotient(ExprPtr num, ExprPtr den) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Quotient;
    e->num = std::move(num);
    e->den = std::move(den);
    return e;
}

std::vector<NodeId> free_vars(const ExprPtr& e) {
    std::set<NodeId> out;
    collect_free(e, out);
    return {out.begin(), out.end()};
}

std::vector<NodeId> all_vars(const ExprPtr& e) {
    std::set<NodeId> out;
    collect_all(e, out);
    return {out.begin(), out.end()};
}

std::vector<ExprPtr> leaf_factors(const ExprPtr& e) {
    std::vector<ExprPtr> out;
    switch (e->kind) {
        case Expr::Kind::Conditional: out.push_back(e); break;
        case Expr::Kind::Product:
            for (const auto& f : e->factors) {
                auto sub = leaf_factors(f);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            break;
        case Expr::Kind::SumOver: out = leaf_factors(e->body); break;
        case Expr::Kind::Quotient: {
            out = leaf_factors(e->num);
            auto d = leaf_factors(e->den);
            out.insert(out.end(), d.begin(), d.end());
            break;
        }
    }
    return out;
}

bool contains_quotient(const ExprPtr& e) {
    switch (e->kind) {
        case Expr::Kind::Conditional: return false;
        case Expr::Kind::Quotient: return true;
        case Expr::Kind::Product:
            for (const auto& f : e->factors)
                if (contains_quotient(f)) return true;
            return false;
        case Expr::Kind::SumOver: return contains_quotient(e->body);
    }
    return false;
}

namespace {

std::string value_key(const Value& v) {
    if (std::holds_alternative<double>(v)) {
        std::ostringstream os;
        os << std::get<double>(v);
        return "#" + os.str();
    }
    return "$" + std::get<std::string>(v);
}

// Canonical string form used for order-insensitive comparison.
std::string canon(const ExprPtr& e) {
    auto var_key = [](const VarTerm& t) { return t.id.token() + (t.po_m0 ? "^" : ""); };
    auto fixed_key = [](const FixedTerm& t) {
        return t.id.token() + (t.po_m0 ? "^" : "") + "=" + value_key(t.value) +
               (t.is_m0 ? "!" : "");
    };
    switch (e->kind) {
        case Expr::Kind::Conditional: {
            std::vector<std::string> ts, gs;
            for (const auto& t : e->targets) ts.push_back(var_key(t));
            for (const auto& t : e->target_fixed) ts.push_back(fixed_key(t));
            for (const auto& g : e->given) gs.push_back(var_key(g));
            for (const auto& g : e->given_fixed) gs.push_back(fixed_key(g));
            std::sort(ts.begin(), ts.end());
            std::sort(gs.begin(), gs.end());
            std::string out = "P(";
            for (const auto& t : ts) out += t + ",";
            out += "|";
            for (const auto& g : gs) out += g + ",";
            return out + ")";
        }
        case Expr::Kind::Product: {
            std::vector<std::string> fs;
            for (const auto& f : e->factors) fs.push_back(canon(f));
            std::sort(fs.begin(), fs.end());
            std::string out = "prod(";
            for (const auto& f : fs) out += f + ";";
            return out + ")";
        }
        case Expr::Kind::SumOver: {
            std::vector<std::string> vs;
            for (const auto& v : e->sum_vars) vs.push_back(v.token());
            std::sort(vs.begin(), vs.end());
            std::string out = "sum[";
            for (const auto& v : vs) out += v + ",";
            return out + "]" + canon(e->body);
        }
        case Expr::Kind::Quotient:
            return "quot(" + canon(e->num) + "/" + canon(e->den) + ")";
    }
    return "";
}

}  // namespace

bool expr_equal_canonical(const ExprPtr& a, const ExprPtr& b) { return canon(a) == canon(b); }

ExprPtr fix_variables(const ExprPtr& e, const std::vector<std::pair<NodeId, Value>>& fixes) {
    auto find = [&](const NodeId& id) -> const Value* {
        for (const auto& [k, v] : fixes)
            if (k == id) return &v;
        return nullptr;
    };
    switch (e->kind) {
        case Expr::Kind::Conditional: {
            auto out = std::make_shared<Expr>(*e);
            std::vector<VarTerm> given;
            for (const auto& g : e->given) {
                if (const Value* v = find(g.id))
                    out->given_fixed.push_back({g.id, *v, g.po_m0, false});
                else
                    given.push_back(g);
            }
            out->given = std::move(given);
            std::vector<VarTerm> targets;
            for (const auto& t : e->targets) {
                if (const Value* v = find(t.id))
                    out->target_fixed.push_back({t.id, *v, t.po_m0, false});
                else
                    targets.push_back(t);
            }
            out->targets = std::move(targets);
            return out;
        }
        case Expr::Kind::Product: {
            std::vector<ExprPtr> fs;
            for (const auto& f : e->factors) fs.push_back(fix_variables(f, fixes));
            return make_product(std::move(fs));
        }
        case Expr::Kind::SumOver: {
            // bound variables shadow the fixes
            std::vector<std::pair<NodeId, Value>> inner;
            for (const auto& f : fixes) {
                bool bound = false;
                for (const auto& v : e->sum_vars)
                    if (v == f.first) bound = true;
                if (!bound) inner.push_back(f);
            }
            return make_sum(e->sum_vars, fix_variables(e->body, inner));
        }
        case Expr::Kind::Quotient:
            return make_quotient(fix_variables(e->num, fixes), fix_variables(e->den, fixes));
    }
    return e;
}

namespace {

// LaTeX renders trailing digits of a plain name as a subscript (Y1 → Y_1).
std::string latex_name(const std::string& name) {
    size_t cut = name.size();
    while (cut > 1 && std::isdigit(static_cast<unsigned char>(name[cut - 1]))) --cut;
    if (cut == name.size() || cut == 0) return name;
    return name.substr(0, cut) + "_{" + name.substr(cut) + "}";
}

}  // namespace

std::string var_display(const NodeId& id, PrintStyle style) {
    bool latex = style == PrintStyle::Latex;
    if (id.name.rfind("M_", 0) == 0) {
        std::string target = id.name.substr(2);
        if (id.time) {
            std::string inner = latex ? latex_name(target) + "_{" + std::to_string(*id.time) + "}"
                                      : target + "_" + std::to_string(*id.time);
            return "M_{" + inner + "}";
        }
        return latex ? "M_{" + latex_name(target) + "}" : id.name;
    }
    if (!id.time) return latex ? latex_name(id.name) : id.name;
    return latex ? latex_name(id.name) + "_{" + std::to_string(*id.time) + "}" : id.display();
}

std::string value_display(const Value& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    double d = std::get<double>(v);
    std::ostringstream os;
    os << d;
    return os.str();
}

namespace {

std::string print_term(const VarTerm& t, PrintStyle style) {
    std::string s = var_display(t.id, style);
    if (t.po_m0) s += "^{M=0}";
    return s;
}

std::string print_fixed(const FixedTerm& t, PrintStyle style) {
    std::string s = var_display(t.id, style);
    if (t.po_m0) s += "^{M=0}";
    return s + " = " + value_display(t.value);
}

std::string print_impl(const ExprPtr& e, PrintStyle style) {
    bool latex = style == PrintStyle::Latex;
    switch (e->kind) {
        case Expr::Kind::Conditional: {
            std::string out = "P(";
            bool first = true;
            auto sep = [&]() {
                if (!first) out += ", ";
                first = false;
            };
            for (const auto& t : e->targets) {
                sep();
                out += print_term(t, style);
            }
            for (const auto& t : e->target_fixed) {
                sep();
                out += print_fixed(t, style);
            }
            if (!e->given.empty() || !e->given_fixed.empty()) {
                out += latex ? " \\mid " : " | ";
                first = true;
                for (const auto& g : e->given) {
                    sep();
                    out += print_term(g, style);
                }
                for (const auto& g : e->given_fixed) {
                    sep();
                    out += print_fixed(g, style);
                }
            }
            return out + ")";
        }
        case Expr::Kind::Product: {
            std::string out;
            for (size_t i = 0; i < e->factors.size(); ++i) {
                if (i) out += " ";
                bool need_paren = e->factors[i]->kind == Expr::Kind::SumOver;
                if (need_paren) out += latex ? "\\left[" : "[";
                out += print_impl(e->factors[i], style);
                if (need_paren) out += latex ? "\\right]" : "]";
            }
            return out;
        }
        case Expr::Kind::SumOver: {
            std::string out = latex ? "\\sum_{" : "Σ_{";
            for (size_t i = 0; i < e->sum_vars.size(); ++i) {
                if (i) out += ", ";
                out += var_display(e->sum_vars[i], style);
            }
            out += "} ";
            out += print_impl(e->body, style);
            return out;
        }
        case Expr::Kind::Quotient: {
            if (latex)
                return "\\frac{" + print_impl(e->num, style) + "}{" +
                       print_impl(e->den, style) + "}";
            std::string out = "[" + print_impl(e->num, style) + "] / [" +
                              print_impl(e->den, style) + "]";
            return out;
        }
    }
    return "";
}

}  // namespace

std::string pretty_print(const ExprPtr& e, PrintStyle style) {
    return print_impl(e, style);
}

namespace {

nlohmann::json value_to_json(const Value& v) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    return std::get<std::string>(v);
}

Value value_from_json(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    return j.get<std::string>();
}

nlohmann::json expr_to_json_impl(const ExprPtr& e) {
    nlohmann::json j;
    switch (e->kind) {
        case Expr::Kind::Conditional: {
            j["kind"] = e->is_marginal() ? "marginal" : "conditional";
            auto terms = [&](const std::vector<VarTerm>& v) {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& t : v) {
                    nlohmann::json o;
                    o["var"] = t.id.token();
                    if (t.po_m0) o["po"] = true;
                    arr.push_back(std::move(o));
                }
                return arr;
            };
            auto fixed = [&](const std::vector<FixedTerm>& v) {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& t : v) {
                    nlohmann::json o;
                    o["var"] = t.id.token();
                    o["value"] = value_to_json(t.value);
                    if (t.po_m0) o["po"] = true;
                    if (t.is_m0) o["m0"] = true;
                    arr.push_back(std::move(o));
                }
                return arr;
            };
            j["targets"] = terms(e->targets);
            if (!e->target_fixed.empty()) j["target_fixed"] = fixed(e->target_fixed);
            if (!e->given.empty()) j["given"] = terms(e->given);
            if (!e->given_fixed.empty()) j["given_fixed"] = fixed(e->given_fixed);
            break;
        }
        case Expr::Kind::Product: {
            j["kind"] = "product";
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& f : e->factors) arr.push_back(expr_to_json_impl(f));
            j["factors"] = std::move(arr);
            break;
        }
        case Expr::Kind::SumOver: {
            j["kind"] = "sum";
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& v : e->sum_vars) arr.push_back(v.token());
            j["vars"] = std::move(arr);
            j["body"] = expr_to_json_impl(e->body);
            break;
        }
        case Expr::Kind::Quotient:
            j["kind"] = "quotient";
            j["num"] = expr_to_json_impl(e->num);
            j["den"] = expr_to_json_impl(e->den);
            break;
    }
    return j;
}

ExprPtr expr_from_json_impl(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "conditional" || kind == "marginal") {
        auto terms = [&](const char* key) {
            std::vector<VarTerm> out;
            if (!j.contains(key)) return out;
            for (const auto& o : j.at(key)) {
                VarTerm t;
                t.id = NodeId::parse(o.at("var").get<std::string>());
                t.po_m0 = o.value("po", false);
                out.push_back(std::move(t));
            }
            return out;
        };
        auto fixed = [&](const char* key) {
            std::vector<FixedTerm> out;
            if (!j.contains(key)) return out;
            for (const auto& o : j.at(key)) {
                FixedTerm t;
                t.id = NodeId::parse(o.at("var").get<std::string>());
                t.value = value_from_json(o.at("value"));
                t.po_m0 = o.value("po", false);
                t.is_m0 = o.value("m0", false);
                out.push_back(std::move(t));
            }
            return out;
        };
        return make_conditional(terms("targets"), terms("given"), fixed("given_fixed"),
                                fixed("target_fixed"));
    }
    if (kind == "product") {
        std::vector<ExprPtr> fs;
        for (const auto& f : j.at("factors")) fs.push_back(expr_from_json_impl(f));
        return make_product(std::move(fs));
    }
    if (kind == "sum") {
        std::vector<NodeId> vars;
        for (const auto& v : j.at("vars")) vars.push_back(NodeId::parse(v.get<std::string>()));
        return make_sum(std::move(vars), expr_from_json_impl(j.at("body")));
    }
    if (kind == "quotient")
        return make_quotient(expr_from_json_impl(j.at("num")), expr_from_json_impl(j.at("den")));
    throw InvalidSpec("unknown expression kind '" + kind + "'");
}

}  // namespace

std::string expr_to_json(const ExprPtr& e) { return expr_to_json_impl(e).dump(2); }

ExprPtr expr_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw InvalidSpec(std::string("expression JSON parse error: ") + err.what());
    }
    return expr_from_json_impl(j);
}

}  // namespace mdag
