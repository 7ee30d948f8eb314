#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

using namespace tscli;

int main(int argc, char** argv) {
    CLI::App app{"tseries: transseries iteration, classification and Abel equations"};
    app.require_subcommand(1);

    SessionConfig cfg;
    std::string config_file, format;
    std::vector<std::string> params;
    std::string cut;
    int order = 0;
    long precision = 0;
    std::size_t depth_cap = 0, max_rounds = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--order", order, "truncation order");
        sub->add_option("--cut", cut, "explicit truncation monomial, e.g. x^-6");
        sub->add_option("--param", params, "parameter binding name=rational")->allow_extra_args(false);
        sub->add_option("--format", format, "text or machine")->check(CLI::IsMember({"text", "machine"}));
        sub->add_option("--precision", precision, "bits for sign decisions");
        sub->add_option("--depth-cap", depth_cap, "maximal log/exp depth");
        sub->add_option("--max-rounds", max_rounds, "round budget for fixed points");
        sub->add_option("--config", config_file, "JSON session file");
    };

    std::string expr, expr2, s = "1", range = "-1:1:1/4", x0;
    std::function<Output()> run;

    auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        common(sub);
        return sub;
    };

    add("classify", "classify a transseries as moderate or deep")->add_option("expr", expr)->required();
    add("group", "iteration group of a moderate series ~ x")->add_option("expr", expr)->required();
    {
        auto* sub = add("iterate", "fractional iterate T^[s]");
        sub->add_option("expr", expr)->required();
        sub->add_option("--s", s, "iteration exponent");
    }
    add("abel", "solve V o T = V + tau")->add_option("expr", expr)->required();
    add("inverse", "compositional inverse")->add_option("expr", expr)->required();
    {
        auto* sub = add("compose", "A o B");
        sub->add_option("a", expr)->required();
        sub->add_option("b", expr2)->required();
    }
    add("demo-julia", "x^2 + c and its fractional iterates")->add_option("--s", s, "iteration exponent");
    add("demo-deep-abel", "Abel equation for x + 1 + x e^{-x^2}");
    add("demo-nongrid", "Abel rounds for x + 1 + e^{-e^{x^2}}");
    {
        auto* sub = add("support-plot", "exponents of (x^2 + c)^[s] over a range of s");
        sub->add_option("--range", range, "start:stop:step");
        sub->add_option("--x0", x0, "add |term(x0)| as a third column");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw std::runtime_error("cannot read " + config_file);
            cfg.merge(nlohmann::json::parse(in));
        }
        nlohmann::json over;
        if (order) over["order"] = order;
        if (!cut.empty()) over["cut"] = cut;
        if (!format.empty()) over["format"] = format;
        if (precision) over["precision"] = precision;
        if (depth_cap) over["depth_cap"] = depth_cap;
        if (max_rounds) over["max_rounds"] = max_rounds;
        for (auto& p : params) {
            auto eq = p.find('=');
            if (eq == std::string::npos) throw std::runtime_error("--param expects name=value, got " + p);
            over["params"][p.substr(0, eq)] = p.substr(eq + 1);
        }
        cfg.merge(over);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return InputError;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    Output out;
    if (name == "classify") out = cmd_classify(cfg, expr);
    else if (name == "group") out = cmd_group(cfg, expr);
    else if (name == "iterate") out = cmd_iterate(cfg, expr, s);
    else if (name == "abel") out = cmd_abel(cfg, expr);
    else if (name == "inverse") out = cmd_inverse(cfg, expr);
    else if (name == "compose") out = cmd_compose(cfg, expr, expr2);
    else if (name == "demo-julia") out = run_demo_julia(cfg, s);
    else if (name == "demo-deep-abel") out = run_demo_deep_abel(cfg);
    else if (name == "demo-nongrid") out = run_demo_nongrid(cfg);
    else out = run_support_plot(cfg, range, x0);

    if (cfg.format == "machine" && name != "support-plot") {
        for (auto& j : out.machine) std::cout << j.dump() << "\n";
    } else {
        std::cout << out.text;
    }
    if (!out.error.empty()) std::cerr << "error: " << out.error << "\n";
    return out.code;
}
