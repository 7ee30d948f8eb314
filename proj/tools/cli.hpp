#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tseries/abel.hpp"

namespace tscli {

using namespace tseries;

struct SessionConfig {
    std::optional<std::string> cut;  // explicit monomial, e.g. "x^-6"
    int order = 0;  // 0: the command's own default
    std::size_t depth_cap = 3;
    long precision = 256;
    std::size_t max_rounds = 128;
    std::map<std::string, std::string> params;  // name -> rational text
    std::string format = "text";

    nlohmann::json to_json() const;
    // fields present in j override this
    void merge(const nlohmann::json& j);
    void apply() const;
    Bindings bindings() const;
    int order_or(int d) const { return order > 0 ? order : d; }
};

// parse; unbound identifiers other than x, e, s become symbolic parameters
Transseries parse(const std::string& text, const Bindings& params = {});
// a constant expression such as "1/2" or "2^(1/2)"
ExponentScalar parse_scalar(const std::string& text, const Bindings& params = {});
Monomial parse_monomial(const std::string& text, const Bindings& params = {});
Rational rational_arg(const std::string& text);
// parse for a command; retries under the session cut when an expansion is infinite
Transseries parse_input(const SessionConfig& cfg, const std::string& expr);

// exponential generators used by t, inner ones first
std::vector<GenId> generators_of(const Transseries& t);
nlohmann::json to_machine(const Transseries& t, const SessionConfig* cfg = nullptr);
Transseries from_machine(const nlohmann::json& j);

// grading used by --order for series ~ x: weight 1 on x^-1, 2p on x^p inside exponents
std::shared_ptr<Grading> default_grading(const Transseries& T);
// the truncation a command works at
Bound session_bound(const SessionConfig& cfg, const Transseries& T);

enum Exit { Ok = 0, Rejected = 1, Undecidable = 2, Budget = 3, InputError = 4 };
int exit_code(ErrorKind k);

struct Output {
    std::string text;
    std::string error;  // for stderr
    nlohmann::json machine = nlohmann::json::array();
    int code = Ok;
};

// runs f with the session applied; library errors become exit codes
Output guarded(const SessionConfig& cfg, const std::function<void(Output&)>& f);
// appends "name = series" to the text and the series to the machine stream
void emit(Output& out, const SessionConfig& cfg, const std::string& name, const Transseries& t);

Output cmd_classify(const SessionConfig& cfg, const std::string& expr);
Output cmd_group(const SessionConfig& cfg, const std::string& expr);
Output cmd_iterate(const SessionConfig& cfg, const std::string& expr, const std::string& s);
Output cmd_abel(const SessionConfig& cfg, const std::string& expr);
Output cmd_inverse(const SessionConfig& cfg, const std::string& expr);
Output cmd_compose(const SessionConfig& cfg, const std::string& a, const std::string& b);

// ---- demos

struct Check {
    std::string name;
    bool ok = false;
    std::string note;
    // the printed value is wrong and an independent check confirms it
    bool erratum = false;
};

struct JuliaReport {
    Coefficient c;
    ExponentScalar s;
    Bound cut;
    Transseries M, M1, M2, V, Vi, M2s, M1s, Ms;
    std::vector<Check> checks;
    bool log_depth_seen = false;
};
// c is Coefficient::param("c") unless bound; cut defaults to x^{(1-order) 2^s}
JuliaReport demo_julia(const Coefficient& c, const ExponentScalar& s, std::optional<Bound> cut, int order = 4);

// coefficients of x^{sqrt2 - 2n} and x^{-sqrt2 - 2n} in 2cosh(sqrt2 acosh(x/2))
Transseries cosh_oracle(int n, const Monomial& cut);

struct DeepAbelReport {
    Transseries T, V;
    std::vector<Check> checks;
};
DeepAbelReport demo_deep_abel(int order);

struct NongridReport {
    Transseries T, half;
    std::vector<std::size_t> generator_counts;  // generators used by rounds 0..k
    std::vector<Transseries> rounds;
    std::vector<Check> checks;
};
NongridReport demo_nongrid(int rounds);

struct PlotRow {
    Rational s;
    ExponentScalar a;
    double mag = 0;
};
std::vector<PlotRow> support_plot(const Rational& c, const std::vector<Rational>& s_values, int order,
                                  const Rational& x0);

Output run_demo_julia(const SessionConfig& cfg, const std::string& s);
Output run_demo_deep_abel(const SessionConfig& cfg);
Output run_demo_nongrid(const SessionConfig& cfg);
Output run_support_plot(const SessionConfig& cfg, const std::string& range, const std::string& x0);

double to_double(const ExponentScalar& e);

}  // namespace tscli
