#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "torcount/asymptotics.hpp"
#include "torcount/count.hpp"
#include "torcount/errors.hpp"
#include "torcount/hypotheses.hpp"
#include "torcount/moebius.hpp"
#include "torcount/spec.hpp"

using namespace torcount;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct RunConfig {
    std::string command;
    std::string input;
    std::string B_list;
    std::string counts_file;
    std::string mode = "moebius";
    std::string format = "json";
    std::uint64_t prime_bound = 1000000;
    std::uint64_t q_max = DiagonalTruncation{}.q_max;
    double lambda_max = DiagonalTruncation{}.lambda_max;
    double struct_bound = DiagonalTruncation{}.struct_bound;
    std::uint64_t d_bound = 4;
    unsigned threads = 0;
    std::uint64_t seed = AssemblyOptions{}.seed;
    double budget = CountOptions{}.budget;
    bool no_timing = false;
};

std::vector<Rational> parse_B_grid(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(parse_rational(item));
    }
    if (out.empty()) throw InputError("--B needs at least one value");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) throw InputError("--B grid must be strictly increasing");
    return out;
}

AssemblyOptions assembly_options(const RunConfig& cfg) {
    AssemblyOptions o;
    o.prime_bound = cfg.prime_bound;
    o.diag.q_max = cfg.q_max;
    o.diag.lambda_max = cfg.lambda_max;
    o.diag.struct_bound = cfg.struct_bound;
    o.d_bound = cfg.d_bound;
    o.threads = cfg.threads;
    o.seed = cfg.seed;
    return o;
}

json config_json(const RunConfig& c) {
    return {{"input", c.input},         {"B", c.B_list},           {"mode", c.mode}, {"counts", c.counts_file},
            {"prime_bound", c.prime_bound}, {"q_max", c.q_max},    {"lambda_max", c.lambda_max},
            {"struct_bound", c.struct_bound}, {"d_bound", c.d_bound}, {"threads", c.threads},
            {"seed", c.seed},           {"budget", c.budget}};
}

struct CountRow {
    std::string B;
    std::string N;
    std::string mode;
    long long elapsed_ms;
};

std::vector<CountRow> run_counts(const SubvarietySpec& spec, const std::vector<Rational>& grid, const RunConfig& cfg) {
    auto ctx = make_count_context(spec);
    CountOptions opt;
    opt.threads = cfg.threads;
    opt.budget = cfg.budget;
    std::vector<CountRow> rows;
    for (const auto& B : grid) {
        auto timed = [&](const std::string& mode, auto fn) {
            auto t0 = std::chrono::steady_clock::now();
            BigInt N = fn();
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back({to_string(B), N.str(), mode, cfg.no_timing ? 0 : static_cast<long long>(ms)});
            return N;
        };
        if (cfg.mode == "moebius") {
            timed("moebius", [&] { return count_NV(ctx, B, opt); });
        } else if (cfg.mode == "direct") {
            timed("direct", [&] { return count_direct(ctx, B, opt); });
        } else {
            BigInt a = timed("moebius", [&] { return count_NV(ctx, B, opt); });
            BigInt b = timed("direct", [&] { return count_direct(ctx, B, opt); });
            if (a != b)
                throw InvariantError("Moebius count " + a.str() + " != direct count " + b.str() + " at B = " + to_string(B));
        }
    }
    return rows;
}

void print_rows_csv(const std::vector<CountRow>& rows) {
    std::cout << "B,N,mode,elapsed_ms\n";
    for (const auto& r : rows) std::cout << r.B << ',' << r.N << ',' << r.mode << ',' << r.elapsed_ms << '\n';
}

json rows_json(const std::vector<CountRow>& rows) {
    json a = json::array();
    for (const auto& r : rows) a.push_back({{"B", r.B}, {"N", r.N}, {"mode", r.mode}, {"elapsed_ms", r.elapsed_ms}});
    return a;
}

// rows as printed by `count --format csv`
std::vector<CountRow> read_rows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("B,N,mode", 0) != 0)
        throw InputError(path + ": expected the header B,N,mode,elapsed_ms");
    std::vector<CountRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 4) throw InputError(path + ":" + std::to_string(lineno) + ": expected 4 fields");
        parse_rational(f[0]);
        if (f[1].empty() || f[1].find_first_not_of("0123456789") != std::string::npos)
            throw InputError(path + ":" + std::to_string(lineno) + ": N is not a nonnegative integer");
        rows.push_back({f[0], f[1], f[2], std::stoll(f[3])});
    }
    return rows;
}

json fit_json(const std::vector<CountRow>& rows, const Rational& a, int k, double predicted, bool have_prediction) {
    // one point per B; with --mode both the two rows agree
    std::vector<std::pair<double, double>> pts;
    std::string last;
    for (const auto& r : rows) {
        if (r.B == last) continue;
        last = r.B;
        pts.emplace_back(to_double(parse_rational(r.B)), std::stod(r.N));
    }
    FitResult f = empirical_fit(pts, a, k);
    json j = to_json(f);
    json table = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i)
        table.push_back({{"B", pts[i].first}, {"N", pts[i].second}, {"ratio", f.ratios[i]}});
    j["ratio_table"] = table;
    j["model"] = "N(B) = c B^a (log B)^k + c' B^a (log B)^(k-1)";
    if (have_prediction) j["relative_deviation"] = (f.c_hat - predicted) / predicted;
    return j;
}

// (a, k) from the growth polytope alone, for fits without a constant
std::pair<Rational, int> exponents(const SubvarietySpec& spec) {
    auto hd = local_trivialization(spec.L, spec.tv);
    auto P = solve_polytope(hd, spec.tv, growth_weights(spec));
    return {P.a, P.k};
}

int run(const RunConfig& cfg) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["command"] = cfg.command;
    out["config"] = config_json(cfg);
    const bool csv = cfg.format == "csv";

    if (cfg.command == "validate") {
        auto j = load_json_file(cfg.input);
        Fan fan = fan_from_json(j);
        auto rep = validate_fan(fan);
        out["fan"] = to_json(rep);
        out["valid"] = rep.valid();
        if (!rep.valid()) {
            std::cout << out.dump(2) << '\n';
            throw InputError("invalid fan: " + rep.first_failure());
        }
        auto spec = spec_from_json(j);
        out["spec"] = to_json(validate_spec(spec));
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    auto spec = load_spec(cfg.input);
    validate_spec(spec);
    out["name"] = spec.name;

    if (cfg.command == "analyze") {
        const auto& tv = spec.tv;
        auto hd = local_trivialization(spec.L, tv);
        out["grading"] = to_json(tv.grading);
        out["cones"] = to_json(tv.cones, tv.grading);
        out["height"] = to_json(hd, tv);
        out["positivity"] = to_string(hd.positivity);
        out["hypotheses"] = to_json(check_hypotheses(spec));
        json groups = json::array();
        for (const auto& st : classify_groups(spec)) groups.push_back(to_string(st.kind));
        out["group_structure"] = groups;
        if (hd.positivity != Positivity::not_semiample) {
            auto varpi = growth_weights(spec);
            auto P = solve_polytope(hd, tv, varpi);
            out["polytope"] = to_json(P);
            auto E = effective_cone_ak(tv.grading, divisor_class(tv, spec.L), varpi);
            out["effective_cone"] = {{"a", to_string(E.a)}, {"k", E.k}, {"face_generators", E.face_generators}};
            if (E.a != P.a || E.k != P.k) throw InvariantError("polytope and effective-cone (a, k) disagree");
        }
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    if (cfg.command == "mu-table") {
        out["mu"] = to_json(build_mu_table(spec.tv));
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    if (cfg.command == "predict") {
        out["prediction"] = to_json(assemble_constant(spec, assembly_options(cfg)));
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    if (cfg.command == "fit" && !cfg.counts_file.empty()) {
        if (!cfg.B_list.empty()) throw InputError("give either --B or --counts, not both");
        auto rows = read_rows_csv(cfg.counts_file);
        auto [a, k] = exponents(spec);
        out["counts"] = rows_json(rows);
        out["a"] = to_string(a);
        out["k"] = k;
        out["fit"] = fit_json(rows, a, k, 0.0, false);
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    auto grid = parse_B_grid(cfg.B_list);
    if (cfg.command == "count") {
        auto rows = run_counts(spec, grid, cfg);
        if (csv) {
            print_rows_csv(rows);
        } else {
            out["counts"] = rows_json(rows);
            std::cout << out.dump(2) << '\n';
        }
        return 0;
    }

    if (cfg.command == "fit" || cfg.command == "report") {
        std::optional<ConstantReport> pred;
        Rational a;
        int k;
        if (cfg.command == "report") {
            pred = assemble_constant(spec, assembly_options(cfg));
            a = pred->a;
            k = pred->k;
        } else {
            std::tie(a, k) = exponents(spec);
        }
        auto rows = run_counts(spec, grid, cfg);
        if (csv) {
            print_rows_csv(rows);
            return 0;
        }
        out["counts"] = rows_json(rows);
        out["a"] = to_string(a);
        out["k"] = k;
        if (pred) out["prediction"] = to_json(*pred);
        out["fit"] = fit_json(rows, a, k, pred ? pred->c.mid() : 0.0, pred.has_value());
        std::cout << out.dump(2) << '\n';
        return 0;
    }
    throw InputError("unknown command " + cfg.command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"torcount: rational and Campana points on toric varieties via the universal torsor"};
    app.require_subcommand(1, 1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("input", cfg.input, "spec JSON file")->required();
        sub->add_option("--threads", cfg.threads, "worker threads, 0 = all cores");
        sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };
    auto add_predict = [&](CLI::App* sub) {
        sub->add_option("--prime-bound", cfg.prime_bound, "Euler products run over p <= this")->check(CLI::PositiveNumber);
        sub->add_option("--q-max", cfg.q_max, "singular series truncation")->check(CLI::PositiveNumber);
        sub->add_option("--lambda-max", cfg.lambda_max, "singular integral truncation")->check(CLI::PositiveNumber);
        sub->add_option("--struct-bound", cfg.struct_bound, "m-full structure weight bound")->check(CLI::PositiveNumber);
        sub->add_option("--d-bound", cfg.d_bound, "truncated d-sum bound")->check(CLI::PositiveNumber);
        sub->add_option("--seed", cfg.seed, "seed for the Monte-Carlo cross-check");
    };
    auto add_count = [&](CLI::App* sub, bool need_B) {
        auto o = sub->add_option("--B", cfg.B_list, "comma-separated height bounds, e.g. 1e4,1e5");
        if (need_B) o->required();
        sub->add_option("--mode", cfg.mode, "moebius, direct or both")->check(CLI::IsMember({"moebius", "direct", "both"}));
        sub->add_option("--budget", cfg.budget, "ceiling on predicted enumeration work")->check(CLI::PositiveNumber);
        sub->add_flag("--no-timing", cfg.no_timing, "report elapsed_ms = 0 for byte-identical reruns");
    };

    auto* validate = app.add_subcommand("validate", "check the fan certificates and the spec");
    add_common(validate);
    auto* analyze = app.add_subcommand("analyze", "grading, cone index data, heights, growth polytope");
    add_common(analyze);
    auto* mu = app.add_subcommand("mu-table", "local Moebius table and compatibility exponents");
    add_common(mu);
    auto* count = app.add_subcommand("count", "count points of height <= B");
    add_common(count);
    add_count(count, true);
    auto* predict = app.add_subcommand("predict", "predicted c B^a (log B)^k");
    add_common(predict);
    add_predict(predict);
    auto* fit = app.add_subcommand("fit", "count and fit the two-term model");
    add_common(fit);
    add_count(fit, false);
    fit->add_option("--counts", cfg.counts_file, "CSV written by `count --format csv`, instead of counting");
    auto* report = app.add_subcommand("report", "count, predict and fit in one run");
    add_common(report);
    add_count(report, true);
    add_predict(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "fit" && cfg.B_list.empty() && cfg.counts_file.empty()) {
        std::cerr << "error: fit needs --B or --counts\n";
        return 1;
    }
    if (cfg.format == "csv" && cfg.command != "count" && cfg.command != "fit" && cfg.command != "report") {
        std::cerr << "error: csv output is available for count, fit and report\n";
        return 1;
    }
    try {
        return run(cfg);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis gate: " << e.what() << '\n';
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const InvariantError& e) {
        std::cerr << "internal invariant violated: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}
