// Command line front end: synthetic data generation, subgroup selection on
// CSV/JSON samples, the treatment/control reduction, and the Monte Carlo
// experiment runner.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "subsel/harness.hpp"
#include "subsel/hte.hpp"
#include "subsel/io.hpp"
#include "subsel/select.hpp"

namespace {

using namespace subsel;

DataFormat format_for(const std::string& path, const std::string& override_fmt) {
    if (override_fmt == "csv") return DataFormat::CSV;
    if (override_fmt == "json") return DataFormat::JSON;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return DataFormat::JSON;
    return DataFormat::CSV;
}

Variant variant_from(const std::string& name) {
    if (name == "first") return Variant::FirstOrder;
    if (name == "higher") return Variant::HigherOrder;
    throw CLI::ValidationError("--variant must be 'first' or 'higher'");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

int run_generate(const std::string& kind, const std::string& params_json,
                 std::size_t n, std::uint64_t seed, const std::string& output) {
    nlohmann::json spec_json;
    spec_json["kind"] = kind;
    spec_json["params"] = nlohmann::json::parse(params_json);
    spec_json["seed"] = seed;
    const GeneratorSpec spec = spec_from_json(spec_json);

    Rng rng = Rng::stream(seed, 0);
    const Dataset data = sample(spec, n, rng);
    std::ofstream out(output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + output + "'");
    if (format_for(output, "") == DataFormat::JSON) save_dataset_json(data, out);
    else save_dataset_csv(data, out);

    const GroundTruth gt = ground_truth(spec);
    nlohmann::ordered_json meta;
    meta["spec"] = spec_to_json(spec);
    meta["n"] = n;
    meta["tau"] = gt.tau;
    if (gt.m_tau) meta["m_tau"] = *gt.m_tau;
    else meta["m_tau"] = nullptr;
    write_text(output + ".meta.json", meta.dump(2) + "\n");
    return 0;
}

int run_select(const std::string& input, const std::string& fmt, double tau,
               double alpha, double beta, double cs, const std::string& variant,
               double q_inv_tol, const std::string& output) {
    const Dataset data = load_dataset(input, format_for(input, fmt));
    const SelectionConfig cfg(tau, alpha, beta, cs, variant_from(variant), q_inv_tol);
    const SelectionResult res = oss_select(data, cfg);
    write_text(output, result_to_json(res).dump(2) + "\n");
    return 0;
}

int run_select_hte(const std::string& input, double t_level, double zeta0,
                   double pi_const, double alpha, double beta, double cs,
                   const std::string& variant, double q_inv_tol,
                   const std::string& output) {
    const HTEDataset hd = load_hte_csv(input);
    const Propensity prop = Propensity::constant(pi_const, zeta0);
    // tau is overwritten by the proxy threshold; 0.5 is a placeholder.
    const SelectionConfig cfg(0.5, alpha, beta, cs, variant_from(variant), q_inv_tol);
    const SelectionResult res = hte_select(hd, prop, t_level, cfg);
    write_text(output, result_to_json(res).dump(2) + "\n");
    return 0;
}

RateConfig rate_config_from_file(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;

    GeneratorSpec spec = spec_from_json(j.at("generator"));
    spec.seed = seed;

    const auto& sel = j.at("selection");
    const double alpha = j.at("alpha").get<double>();
    const SelectionConfig cfg(
        sel.at("tau").get<double>(), alpha, sel.at("beta").get<double>(),
        sel.at("c_s").get<double>(), variant_from(sel.at("variant").get<std::string>()),
        sel.contains("q_inv_tol") ? sel.at("q_inv_tol").get<double>() : 1e-8);

    RateConfig rc{j.at("beta").get<double>(),
                  j.at("kappa").get<double>(),
                  j.at("gamma").get<double>(),
                  j.at("d").get<int>(),
                  j.at("n_grid").get<std::vector<std::size_t>>(),
                  j.at("reps").get<std::size_t>(),
                  alpha,
                  spec,
                  cfg};
    for (const auto& warning : validate_rate_config(rc))
        std::cerr << "warning: " << warning << '\n';
    return rc;
}

int run_simulate(const std::string& experiment, const std::string& config,
                 const std::string& output, std::uint64_t seed) {
    const RateConfig rc = rate_config_from_file(config, seed);
    std::ofstream out(output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + output + "'");

    if (experiment == "rate") {
        write_report_csv(rate_study(rc), out);
        return 0;
    }
    if (experiment == "type1") {
        out << "n,reps,type1_rate,type1_ci_halfwidth\n";
        for (const std::size_t n : rc.n_grid) {
            const auto [rate, ci] = estimate_type1(rc.spec, rc.sel_cfg, n, rc.reps, seed);
            out << n << ',' << rc.reps << ',' << detail::fmt17(rate) << ','
                << detail::fmt17(ci) << '\n';
        }
        return 0;
    }
    if (experiment == "regret") {
        out << "n,reps,regret_estimate,containment_count\n";
        for (const std::size_t n : rc.n_grid) {
            const auto [regret, contained] =
                estimate_regret(rc.spec, rc.sel_cfg, n, rc.reps, seed);
            out << n << ',' << rc.reps << ',' << detail::fmt17(regret) << ','
                << contained << '\n';
        }
        return 0;
    }
    throw CLI::ValidationError("--experiment must be type1, regret or rate");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subgroup selection with Type I error control"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Sample a synthetic dataset");
    std::string kind, params = "{}", gen_out;
    std::size_t gen_n = 0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--kind", kind,
                    "Generator kind: example1|example2|example3|fano|parametric")
        ->required();
    gen->add_option("--params", params, "Generator parameters as a JSON object")
        ->required();
    gen->add_option("--n", gen_n, "Sample size")->required();
    gen->add_option("--seed", gen_seed, "RNG seed")->required();
    gen->add_option("--output", gen_out, "Output dataset path (.csv or .json)")
        ->required();

    // select
    auto* sel = app.add_subcommand("select", "Run subgroup selection on a dataset");
    std::string sel_in, sel_fmt, sel_variant = "first", sel_out;
    double sel_tau = 0.5, sel_alpha = 0.05, sel_beta = 1.0, sel_cs = 1.0;
    double sel_tol = 1e-8;
    sel->add_option("--input", sel_in, "Input dataset (csv or json)")->required();
    sel->add_option("--format", sel_fmt, "Force input format: csv|json");
    sel->add_option("--tau", sel_tau, "Threshold in (0,1)")->required();
    sel->add_option("--alpha", sel_alpha, "Significance level in (0,1)")->required();
    sel->add_option("--beta", sel_beta, "Smoothness exponent")->required();
    sel->add_option("--cs", sel_cs, "Smoothness constant (>= 1)")->required();
    sel->add_option("--variant", sel_variant, "first|higher")->required();
    sel->add_option("--q-inv-tol", sel_tol, "Invertibility tolerance");
    sel->add_option("--output", sel_out, "Result JSON path")->required();

    // select-hte
    auto* hte = app.add_subcommand("select-hte",
                                   "Selection on treatment/control triples");
    std::string hte_in, hte_variant = "first", hte_out;
    double t_level = 0.0, zeta0 = 0.1, pi_const = 0.5;
    double hte_alpha = 0.05, hte_beta = 1.0, hte_cs = 1.0, hte_tol = 1e-8;
    hte->add_option("--input", hte_in, "Triples CSV (x1..xd,t,y)")->required();
    hte->add_option("--t-level", t_level, "Treatment-effect threshold in [-1,1]")
        ->required();
    hte->add_option("--zeta0", zeta0, "Declared propensity margin in (0,1/2)")
        ->required();
    hte->add_option("--pi-const", pi_const, "Constant propensity value")->required();
    hte->add_option("--alpha", hte_alpha, "Significance level in (0,1)")->required();
    hte->add_option("--beta", hte_beta, "Smoothness exponent")->required();
    hte->add_option("--cs", hte_cs, "Smoothness constant (>= 1)")->required();
    hte->add_option("--variant", hte_variant, "first|higher")->required();
    hte->add_option("--q-inv-tol", hte_tol, "Invertibility tolerance");
    hte->add_option("--output", hte_out, "Result JSON path")->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiments");
    std::string experiment, sim_config, sim_out;
    std::uint64_t sim_seed = 0;
    sim->add_option("--experiment", experiment, "type1|regret|rate")->required();
    sim->add_option("--config", sim_config, "Experiment config JSON")->required();
    sim->add_option("--output", sim_out, "Report CSV path")->required();
    sim->add_option("--seed", sim_seed, "Master seed (mandatory)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_generate(kind, params, gen_n, gen_seed, gen_out);
        if (sel->parsed())
            return run_select(sel_in, sel_fmt, sel_tau, sel_alpha, sel_beta, sel_cs,
                              sel_variant, sel_tol, sel_out);
        if (hte->parsed())
            return run_select_hte(hte_in, t_level, zeta0, pi_const, hte_alpha,
                                  hte_beta, hte_cs, hte_variant, hte_tol, hte_out);
        if (sim->parsed()) return run_simulate(experiment, sim_config, sim_out, sim_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
