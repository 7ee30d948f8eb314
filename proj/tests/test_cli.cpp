#include <chrono>
#include <fstream>
#include <set>

#include "cli.hpp"
#include "doctest.h"

using namespace tscli;

namespace {
Transseries X() { return Transseries::x(); }
Monomial em(const Transseries& L) { return intern_exponential(L).first; }

void round_trip(const Transseries& a) {
    std::string s = to_string(a);
    INFO(s);
    Transseries b = parse(s);
    CHECK(b.same_as(a));
    CHECK(to_string(b) == s);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

// a sqrt 2 approximation good to 57 digits
const char* kNearZero = "x+x^-1+x^(2^(1/2)-1414213562373095048801688724209698078569671875376948073176/10^57-1)";
}  // namespace

TEST_CASE("parse examples") {
    CHECK(parse("x^2 + c").same_as(X() * X() + Transseries(Coefficient::param("c"))));
    CHECK(parse("x^2 + c", {{"c", Rational(-2)}}).same_as(X() * X() - 2));
    CHECK(parse("exp(-x^2)").same_as(Transseries::term(1, em(X() * X()))));
    CHECK(parse("e^-x^2").same_as(parse("exp(-x^2)")));
    CHECK(parse("0.25*x").same_as(X().scale(Rational(1, 4))));
    CHECK(parse("010").same_as(Transseries(Rational(10))));
    CHECK(parse("sqrt(x)").same_as(Transseries::term(1, Monomial::x_pow(Rational(1, 2)))));
    CHECK(parse("log(x)").same_as(Transseries::term(1, Monomial::log_atom(1))));
    CHECK(parse("x + O(x^-3)").bound().cut() == Monomial::x_pow(-3));
    CHECK(parse("2^(1/2)*x").dominant().c == Coefficient(ExponentScalar::from_terms(rational_power(2, Rational(1, 2)))));
    CHECK(parse("exp(s)").dominant().c == Coefficient::exp_s(1));
    CHECK(parse("(x+1)^2").same_as(X() * X() + X().scale(2) + 1));
    CHECK(parse("x/(2*x)").same_as(Transseries(Rational(1, 2))));
    CHECK(rational_arg("-3/4") == Rational(-3, 4));
}

TEST_CASE("parse errors carry a column") {
    CHECK(error_of("x + + 1") == "SyntaxError: column 5: unexpected '+'");
    CHECK(error_of("x + (1") == "SyntaxError: column 7: expected ')' before end of input");
    CHECK(error_of("foo(x)").find("column 4: unknown function 'foo'") != std::string::npos);
    CHECK(error_of("x $ 1").find("column 3") != std::string::npos);
    CHECK(error_of("x^x").find("SemanticError: column 2") != std::string::npos);
    CHECK(error_of("1/(x-x)").find("SemanticError: column 2") != std::string::npos);
    CHECK(error_of("1/(x+1)").find("TruncationTooCoarse") != std::string::npos);
    CHECK_THROWS_AS(parse_scalar("x"), Error);
    CHECK_THROWS_AS(rational_arg("2^(1/2)"), Error);
}

TEST_CASE("property: print/parse round trip") {
    const char* corpus[] = {
        "x",
        "x^2 + c",
        "x^2 - 2",
        "x + 1",
        "x + 1 + x^-1",
        "x + c1 + c2*x^-1 + c3*x^-2 + c4*x^-3",
        "x*(1 + 1/x + exp(-x))",
        "x*(1 + 1/x + exp(-x^2))",
        "x + 1 + x*exp(-x^2)",
        "x + 1 + exp(-exp(x^2))",
        "log(2)",
        "x + log(2)",
        "log(3)*2^(1/3)",
        "2^(1/2)*x^(2^(1/2))",
        "x^(2^(1/2)) - 2^(1/2)*x^(-2+2^(1/2)) + x^(-2^(1/2))",
        "x^(-3*2^(1/2))",
        "3^(1/2)*x^(3^(1/2))",
        "x^(1/3) + x^(-2/3)",
        "sqrt(x) + 1",
        "e^-x^2",
        "e^(-2*x^2-4*x)*x^3",
        "e^-4*x*e^(-2*x^2-4*x)",
        "e^(-e*e^(x^2+2*x))",
        "e^(-e^(1/4)*e^(x^2+x))",
        "x + log(2) + 1/2*c*e^(-2*e^x-x)",
        "(1/4*c-1/4*c^2)*e^(-4*e^x-x)",
        "exp(x)",
        "exp(exp(x))",
        "exp(x^2 + x)",
        "x*exp(-x) + exp(-2*x)",
        "log(x)",
        "x*log(x)",
        "x*log(x)^-1",
        "log(log(x))^2*x",
        "x^2*log(x)^3 + log(x)",
        "exp(s)*x + s^2",
        "exp(1/3*s)*x",
        "(1 - exp(-s))*x",
        "s*c1 + s^2*c2",
        "1/(exp(1)-1)*x",
        "(exp(1)-1)^-2*x",
        "(1-e^(2/3)*1/(exp(1)-1)+1/(exp(1)-1))*x*e^-x",
        "e*x",
        "e^(1/2)*x + e^-1",
        "0.5*x + 0.125",
        "x + O(x^-3)",
        "x^2 + c + O(x^-4)",
        "O(e^(-8*e^x-x))",
        "x + 1/2 + e^-e^x^2 + O(e^(-2*e^x^2))",
        "c*d*x + c^2",
        "-x",
        "-x^-1 - 2*x^-2",
        "(x + 1)^3",
        "x^(1/2) - 1/2*c*x^(-1/2) + O(x^(-3/2))",
        "2^(-1/2)*c*x",
        "2^(1/2)*3^(1/2)*x",
    };
    int n = 0;
    for (const char* s : corpus) {
        INFO(s);
        round_trip(parse(s));
        ++n;
    }
    CHECK(n >= 50);
    // computed series
    JuliaReport R = demo_julia(Coefficient::param("c"), Rational(1, 2), std::nullopt);
    for (const Transseries* t : {&R.M1, &R.M2, &R.V, &R.Vi, &R.M2s, &R.M1s, &R.Ms}) round_trip(*t);
    NongridReport N = demo_nongrid(3);
    for (auto& r : N.rounds) round_trip(r);
    round_trip(N.half);
    round_trip(demo_deep_abel(12).V.exact_part());
}

TEST_CASE("machine format") {
    SessionConfig cfg;
    JuliaReport R = demo_julia(Coefficient::param("c"), Rational(1, 2), std::nullopt);
    NongridReport N = demo_nongrid(3);
    std::vector<Transseries> all = {R.M1, R.M2, R.V, R.Vi, R.M2s, R.M1s, R.Ms, N.half, parse("x + log(2) + O(x^-2)")};
    for (auto& r : N.rounds) all.push_back(r);
    for (auto& t : all) {
        INFO(to_string(t));
        nlohmann::json j = to_machine(t, &cfg);
        // text and machine output describe the same term list
        REQUIRE(j["terms"].size() == t.size());
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(j["terms"][i]["coeff"] == to_string(t.terms()[i].c));
        CHECK(from_machine(nlohmann::json::parse(j.dump())).same_as(t));
        CHECK(j["config"]["depth_cap"] == 3);
    }
    // generators are listed before the series that use them
    nlohmann::json j = to_machine(R.V);
    std::set<GenId> seen;
    for (auto& r : j["registry"]) {
        Transseries L = parse(r["series"].get<std::string>());
        for (auto& t : L.terms())
            if (t.m.ex) CHECK(seen.count(t.m.ex));
        seen.insert(r["id"].get<GenId>());
    }
    SessionConfig dcfg;
    Output o = cmd_group(dcfg, "x + 1 + 1/x");
    REQUIRE(o.code == Ok);
    CHECK_THROWS_AS(from_machine(o.machine.back()), Error);
}

TEST_CASE("session config") {
    SessionConfig cfg;
    cfg.merge(nlohmann::json::parse(R"({"order": 6, "params": {"c": "-2"}, "cut": "x^-5"})"));
    CHECK(cfg.order == 6);
    CHECK(cfg.bindings().at("c") == -2);
    CHECK(session_bound(cfg, X()).cut() == Monomial::x_pow(-5));
    cfg.merge(nlohmann::json::parse(R"({"cut": null, "params": {"c": 3}})"));
    CHECK_FALSE(cfg.cut);
    CHECK(cfg.bindings().at("c") == 3);
    CHECK(session_bound(cfg, X() * X()).cut() == Monomial::x_pow(-6));
    CHECK_FALSE(session_bound(cfg, X() + 1).degrees().empty());
    SessionConfig back;
    back.merge(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK_THROWS_AS(cfg.merge(nlohmann::json::parse(R"({"precision": 0})")), Error);
}

TEST_CASE("commands and exit codes") {
    SessionConfig cfg;
    Output o = cmd_classify(cfg, "x*(1 + 1/x + exp(-x))");
    CHECK(o.code == Ok);
    CHECK(o.text == "moderate; first ratio (1, x^-1); witnesses: e^-x (b=-1)\n");
    o = cmd_classify(cfg, "x*(1 + 1/x + exp(-x^2))");
    CHECK(o.text == "deep; first ratio (1, x^-1); witness e^-x^2; purely deep\n");
    o = cmd_classify(cfg, "x^2 + 1");
    CHECK(o.text.rfind("after 2 conjugations: shallow; first ratio (log(2), x^-1)", 0) == 0);

    o = cmd_group(cfg, "x*(1 + 1/x + exp(-x^2))");
    CHECK(o.code == Rejected);
    CHECK(o.error == "deep: no common-support iteration group; witness e^-x^2");
    o = cmd_group(cfg, "x + 1 + 1/x");
    CHECK(o.code == Ok);
    CHECK(o.text.find("alpha[x^-3] = 1/2*s-1/2*s^2") != std::string::npos);
    o = cmd_group(cfg, "x^2");
    CHECK(o.code == Rejected);

    o = cmd_iterate(cfg, "x + 1", "1/2");
    CHECK(o.text.rfind("T^[1/2] = x + 1/2", 0) == 0);
    SessionConfig c2 = cfg;
    c2.params["c"] = "-2";
    o = cmd_iterate(c2, "x^2 + c", "1/2");
    CHECK(o.code == Ok);
    CHECK(o.text.find("x^(2^(1/2)) - 2^(1/2)*x^(-2+2^(1/2)) + x^(-2^(1/2))") != std::string::npos);

    o = cmd_abel(cfg, "x + 1 + x*exp(-x^2)");
    CHECK(o.code == Ok);
    CHECK(o.text.find("tau = 1") != std::string::npos);
    o = cmd_inverse(cfg, "x + 1");
    CHECK(o.text == "T^[-1] = x - 1 + O(deg>4)\n");
    SessionConfig c5 = cfg;
    c5.cut = "x^-5";
    o = cmd_inverse(c5, "x + 1/(x+1)");
    CHECK(o.text == "T^[-1] = x - x^-1 + x^-2 - 2*x^-3 + 4*x^-4 + O(x^-5)\n");
    o = cmd_compose(cfg, "x^2", "x + 1");
    CHECK(o.text == "A o B = x^2 + 2*x + 1\n");

    o = cmd_classify(cfg, "x + + 1");
    CHECK(o.code == InputError);
    CHECK(o.error == "SyntaxError: column 5: unexpected '+'");
    SessionConfig tight = cfg;
    tight.precision = 64;
    o = cmd_classify(tight, kNearZero);
    CHECK(o.code == Undecidable);
    CHECK(cmd_classify(cfg, kNearZero).code == Ok);
    SessionConfig rounds = cfg;
    rounds.max_rounds = 1;
    CHECK(cmd_iterate(rounds, "x^2 + 1", "1/2").code == Budget);
    o = run_support_plot(cfg, "0:1:1", "");
    CHECK(o.code == InputError);
    CHECK(exit_code(ErrorKind::DeepNoCommonSupport) == Rejected);
    CHECK(exit_code(ErrorKind::DepthCapExceeded) == Budget);
    CHECK(exit_code(ErrorKind::SignUndecidable) == Undecidable);
    CHECK(exit_code(ErrorKind::UnboundParameter) == InputError);
}

TEST_CASE("support plot") {
    SessionConfig cfg;
    cfg.params["c"] = "-2";
    auto rows = support_plot(-2, {0, 1, Rational(1, 2), -1}, 4, 10);
    auto as_of = [&](const Rational& s) {
        std::vector<ExponentScalar> a;
        for (auto& r : rows)
            if (r.s == s) a.push_back(r.a);
        return a;
    };
    CHECK(as_of(0) == std::vector<ExponentScalar>{ExponentScalar(1)});
    CHECK(as_of(1) == std::vector<ExponentScalar>{ExponentScalar(2), ExponentScalar(0)});
    ExponentScalar r2 = ExponentScalar::from_terms(rational_power(2, Rational(1, 2)));
    CHECK(as_of(Rational(1, 2)) ==
          std::vector<ExponentScalar>{r2, r2 - 2, -r2, r2 - 4, -r2 - 2});
    CHECK(as_of(-1) == std::vector<ExponentScalar>{ExponentScalar(Rational(1, 2)), ExponentScalar(Rational(-1, 2))});
    Output o = run_support_plot(cfg, "0:1:1/2", "10");
    CHECK(o.text.rfind("s,a,mag\n0,1,10\n0.5,1.414,", 0) == 0);
    cfg.format = "machine";
    o = run_support_plot(cfg, "1:1:1", "");
    CHECK(o.text == "s,a\n1,2\n1,0\n");
}

TEST_CASE("demos finish within a minute") {
    SessionConfig cfg;
    auto t0 = std::chrono::steady_clock::now();
    Output j = run_demo_julia(cfg, "1/2");
    CHECK(j.code == Ok);
    CHECK(j.text.find("[MISMATCH]") == std::string::npos);
    CHECK(j.text.find("[printed value wrong] V^[-1] printed row") != std::string::npos);
    cfg.params["c"] = "-2";
    j = run_demo_julia(cfg, "1/2");
    CHECK(j.text.find("[ok] closed form") != std::string::npos);
    CHECK(j.text.find("[ok] M^[1/2] o M^[1/2] at x = 20") != std::string::npos);
    for (const char* s : {"1", "-1", "1/3", "2"}) {
        INFO(s);
        Output o = run_demo_julia(cfg, s);
        CHECK(o.code == Ok);
        CHECK(o.text.find("[MISMATCH]") == std::string::npos);
    }
    CHECK(run_demo_julia(cfg, "2^(1/2)").code == InputError);
    cfg.params.clear();
    Output d = run_demo_deep_abel(cfg);
    CHECK(d.code == Ok);
    CHECK(d.text.find("[ok] e^-4x^2 e^-2x") != std::string::npos);
    Output n = run_demo_nongrid(cfg);
    CHECK(n.code == Ok);
    CHECK(n.text.find("[ok] T^[1/2] = x + 1/2 + a_0 - a_{1/2}") != std::string::npos);
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 60);
}
