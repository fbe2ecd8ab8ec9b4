#pragma once

// Expression trees over {+, -, *, /, exp, pow, const, var} for user-supplied
// transforms. Keeping the denominator as its own tree is what makes the
// zero-finding in the spectral pass possible without a symbolic dependency.

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailspectra/common.hpp"

namespace tailspectra {

struct Expr {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Exp, Pow };

    Op op = Op::Const;
    double value = 0.0;  // Op::Const only
    std::vector<Expr> args;

    Complex eval(Complex s) const {
        switch (op) {
            case Op::Const: return Complex(value, 0.0);
            case Op::Var: return s;
            case Op::Add: return args[0].eval(s) + args[1].eval(s);
            case Op::Sub: return args[0].eval(s) - args[1].eval(s);
            case Op::Mul: return args[0].eval(s) * args[1].eval(s);
            case Op::Div: return args[0].eval(s) / args[1].eval(s);
            case Op::Exp: return std::exp(args[0].eval(s));
            case Op::Pow: return std::pow(args[0].eval(s), args[1].eval(s));
        }
        return {};
    }

    static Expr constant(double v) { return Expr{Op::Const, v, {}}; }
    static Expr var() { return Expr{Op::Var, 0.0, {}}; }
    static Expr binary(Op o, Expr a, Expr b) { return Expr{o, 0.0, {std::move(a), std::move(b)}}; }
    static Expr exp_of(Expr a) { return Expr{Op::Exp, 0.0, {std::move(a)}}; }
};

inline const char* expr_op_name(Expr::Op op) {
    switch (op) {
        case Expr::Op::Const: return "const";
        case Expr::Op::Var: return "var";
        case Expr::Op::Add: return "add";
        case Expr::Op::Sub: return "sub";
        case Expr::Op::Mul: return "mul";
        case Expr::Op::Div: return "div";
        case Expr::Op::Exp: return "exp";
        case Expr::Op::Pow: return "pow";
    }
    return "?";
}

inline nlohmann::json expr_to_json(const Expr& e) {
    nlohmann::json j;
    j["op"] = expr_op_name(e.op);
    if (e.op == Expr::Op::Const) j["value"] = e.value;
    if (!e.args.empty()) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& c : e.args) a.push_back(expr_to_json(c));
        j["args"] = a;
    }
    return j;
}

inline Expr expr_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("op"))
        throw BadParam("expression node must be an object with an \"op\" field");
    const std::string op = j.at("op").get<std::string>();
    auto arity = [&](std::size_t n) {
        if (!j.contains("args") || j.at("args").size() != n)
            throw BadParam("expression op \"" + op + "\" expects " + std::to_string(n) + " args");
    };
    auto child = [&](std::size_t i) { return expr_from_json(j.at("args").at(i)); };

    if (op == "const") {
        if (!j.contains("value") || !j.at("value").is_number())
            throw BadParam("const node needs a numeric \"value\"");
        return Expr::constant(j.at("value").get<double>());
    }
    if (op == "var") return Expr::var();
    if (op == "exp") {
        arity(1);
        return Expr::exp_of(child(0));
    }
    Expr::Op o;
    if (op == "add") o = Expr::Op::Add;
    else if (op == "sub") o = Expr::Op::Sub;
    else if (op == "mul") o = Expr::Op::Mul;
    else if (op == "div") o = Expr::Op::Div;
    else if (op == "pow") o = Expr::Op::Pow;
    else throw BadParam("unknown expression op \"" + op + "\"");
    arity(2);
    return Expr::binary(o, child(0), child(1));
}

}  // namespace tailspectra
