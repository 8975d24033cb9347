#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapescale/shapescale.hpp"

namespace {

using shapescale::io::json;
namespace io = shapescale::io;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInconclusive = 2;

struct Common {
    std::string config_path;
    std::string out_path;
};

shapescale::ToolConfig load_config(const Common& common) {
    return common.config_path.empty() ? shapescale::ToolConfig{}
                                      : io::read_tool_config(common.config_path);
}

void write_output(const Common& common, const std::string& text) {
    if (common.out_path.empty() || common.out_path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(common.out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw shapescale::ValidationError("cannot write '" + common.out_path + "'");
    out << text;
}

void write_json(const Common& common, const json& j) { write_output(common, j.dump(2) + "\n"); }

std::optional<shapescale::Dim> dim_option(const std::string& name) {
    if (name.empty()) return std::nullopt;
    const auto d = shapescale::parse_dim(name);
    if (!d) throw shapescale::ValidationError("unknown dimension '" + name + "' (width, depth, mlp_dim)");
    return d;
}

shapescale::Exponents triple(const std::string& text, const char* what) {
    const auto v = io::parse_quantity_list(text);
    if (v.size() != shapescale::kNumDims)
        throw shapescale::ValidationError(std::string(what) + " needs 3 comma-separated values");
    return {v[0], v[1], v[2]};
}

std::vector<std::int64_t> count_list(const std::string& text) {
    std::vector<std::int64_t> out;
    for (const auto& item : io::split(text, ',')) out.push_back(io::parse_count(item));
    return out;
}

// ---------------------------------------------------------------------------

struct CostArgs {
    std::string width, depth, mlp, res, patch, heads, examples, multiplier;
    bool no_pool = false;
    bool no_pos = false;
};

int run_cost(const Common& common, const CostArgs& a) {
    const auto cfg = load_config(common);
    shapescale::ModelConfig c = cfg.settings;
    c.shape = {io::parse_count(a.width), io::parse_count(a.depth), io::parse_count(a.mlp)};
    if (!a.res.empty()) c.image_resolution = io::parse_count(a.res);
    if (!a.patch.empty()) c.patch_size = io::parse_count(a.patch);
    if (!a.heads.empty()) c.num_heads = io::parse_count(a.heads);
    if (a.no_pool) c.include_pooling_head = false;
    if (a.no_pos) c.include_pos_embedding = false;
    const double mult = a.multiplier.empty() ? cfg.flops_multiplier : io::parse_quantity(a.multiplier);
    json j = io::cost_to_json(c, shapescale::cost_breakdown(c));
    if (!a.examples.empty()) {
        const auto n = io::parse_count(a.examples);
        j["examples"] = n;
        j["flops_multiplier"] = mult;
        j["training_compute_gflops"] = shapescale::training_compute(c, n, mult);
    }
    write_json(common, j);
    return kExitOk;
}

struct PlanStarArgs {
    std::string center, step = "1.2", points = "6", ceiling = "0.85", checkpoints = "64M,128M,256M";
    std::string mlp_multiple = "16";
};

int run_plan_star(const Common& common, const PlanStarArgs& a) {
    const auto cfg = load_config(common);
    shapescale::StarPlanOptions opt;
    opt.step_factor = io::parse_quantity(a.step);
    opt.points_per_dim = static_cast<int>(io::parse_count(a.points));
    const auto ceilings = io::parse_quantity_list(a.ceiling);
    if (ceilings.size() == 1) {
        opt.ceiling_ratio = ceilings[0];
    } else if (ceilings.size() == shapescale::kNumDims) {
        opt.ceiling_ratios = std::array<double, shapescale::kNumDims>{ceilings[0], ceilings[1], ceilings[2]};
    } else {
        throw shapescale::ValidationError("--ceiling takes one ratio or three (width,depth,mlp_dim)");
    }
    opt.checkpoints = count_list(a.checkpoints);
    opt.settings = cfg.settings;
    opt.mlp_multiple = io::parse_count(a.mlp_multiple);
    const auto spec = shapescale::plan_star(io::parse_shape(a.center), opt);
    write_json(common, io::manifest_to_json(io::star_manifest(spec)));
    return kExitOk;
}

struct PlanGridArgs {
    std::string widths, depths, mlps, examples, checkpoints, compute_checkpoints;
};

int run_plan_grid(const Common& common, const PlanGridArgs& a) {
    const auto cfg = load_config(common);
    shapescale::GridPlanOptions opt;
    if (!a.checkpoints.empty()) opt.checkpoints = count_list(a.checkpoints);
    if (!a.compute_checkpoints.empty()) opt.compute_checkpoints = io::parse_quantity_list(a.compute_checkpoints);
    opt.settings = cfg.settings;
    opt.flops_multiplier = cfg.flops_multiplier;
    const auto spec = shapescale::plan_grid({count_list(a.widths), count_list(a.depths), count_list(a.mlps)},
                                            io::parse_count(a.examples), opt);
    write_json(common, io::manifest_to_json(io::grid_manifest(spec)));
    return kExitOk;
}

struct SimulateArgs {
    std::string design, truth, noise = "lognormal", metric = "synthetic", format;
    std::string sigma = "0";
    std::uint64_t seed = 0;
};

io::RecordFormat output_format(const Common& common, const std::string& requested) {
    if (requested == "csv") return io::RecordFormat::csv;
    if (requested == "jsonl") return io::RecordFormat::jsonl;
    if (!requested.empty()) throw shapescale::ValidationError("--format must be csv or jsonl");
    return io::format_for_path(common.out_path);
}

int run_simulate(const Common& common, const SimulateArgs& a) {
    const auto manifest = io::manifest_from_json(io::read_json(a.design));
    const auto gt = a.truth.empty() ? shapescale::make_ground_truth()
                                    : io::ground_truth_from_json(io::read_json(a.truth));
    shapescale::NoiseSpec noise;
    if (a.noise == "lognormal")
        noise.model = shapescale::NoiseModel::lognormal;
    else if (a.noise == "gaussian")
        noise.model = shapescale::NoiseModel::gaussian;
    else if (a.noise == "none")
        noise.model = shapescale::NoiseModel::none;
    else
        throw shapescale::ValidationError("--noise must be lognormal, gaussian or none");
    noise.sigma = io::parse_quantity(a.sigma);
    noise.seed = a.seed;
    const shapescale::ComputeContext ctx{manifest.settings, manifest.flops_multiplier};
    io::RecordFile file;
    file.context = ctx;
    file.records = shapescale::gen_runs(gt, manifest.runs, noise, ctx, a.metric, manifest.kind);
    write_output(common, io::emit_records(file, output_format(common, a.format)));
    return kExitOk;
}

struct FitArgs {
    std::string records, holdout, dimension, objective;
    std::uint64_t seed = 0;
    int restarts = 0;
};

shapescale::FitOptions fit_options(const shapescale::ToolConfig& cfg, const io::RecordFile& file,
                                   const std::string& objective, int restarts, std::uint64_t seed) {
    shapescale::FitOptions opt = cfg.fit;
    opt.seed = seed;
    if (restarts > 0) opt.restarts = restarts;
    if (objective == "squared_relative")
        opt.objective = shapescale::FitObjective::squared_relative;
    else if (objective == "absolute_relative")
        opt.objective = shapescale::FitObjective::absolute_relative;
    else if (!objective.empty())
        throw shapescale::ValidationError("--objective must be squared_relative or absolute_relative");
    opt.compute_context = file.context ? *file.context : cfg.compute_context();
    return opt;
}

/// Records grouped by the dimension they vary; a forced dimension takes all records.
std::map<shapescale::Dim, std::vector<shapescale::RunRecord>> by_dimension(
    const std::vector<shapescale::RunRecord>& records, std::optional<shapescale::Dim> forced) {
    std::map<shapescale::Dim, std::vector<shapescale::RunRecord>> out;
    for (const auto& r : records) {
        if (forced) {
            if (!r.dimension_under_test || *r.dimension_under_test == *forced) out[*forced].push_back(r);
        } else if (r.dimension_under_test) {
            out[*r.dimension_under_test].push_back(r);
        }
    }
    if (out.empty())
        throw shapescale::ValidationError(
            "no records to fit: rows need dimension_under_test or pass --dimension");
    return out;
}

int run_fit(const Common& common, const FitArgs& a) {
    const auto cfg = load_config(common);
    const auto file = io::read_records(a.records);
    auto opt = fit_options(cfg, file, a.objective, a.restarts, a.seed);
    std::optional<io::RecordFile> holdout;
    if (!a.holdout.empty()) holdout = io::read_records(a.holdout);

    json fits = json::array();
    bool conclusive = true;
    for (const auto& [dim, records] : by_dimension(file.records, dim_option(a.dimension))) {
        opt.dimension = dim;
        shapescale::FitReport report;
        try {
            report = shapescale::fit_dimension(records, opt);
        } catch (const shapescale::FitNonConvergence& e) {
            report = e.report;
        }
        if (holdout) {
            std::vector<shapescale::RunRecord> held;
            for (const auto& r : holdout->records)
                if (!r.dimension_under_test || *r.dimension_under_test == dim) held.push_back(r);
            if (!held.empty())
                shapescale::extrapolation_check(report, held,
                                                holdout->context ? holdout->context : opt.compute_context);
        }
        conclusive = conclusive && report.converged && !report.degenerate;
        fits.push_back(io::fit_report_to_json(report));
    }
    write_json(common, {{"fits", fits}, {"conclusive", conclusive}});
    return conclusive ? kExitOk : kExitInconclusive;
}

struct ExponentsArgs {
    std::string records, dimension, objective;
    std::optional<std::uint64_t> seed;
};

int run_exponents(const Common& common, const ExponentsArgs& a) {
    const auto cfg = load_config(common);
    const auto file = io::read_records(a.records);
    auto opt = fit_options(cfg, file, a.objective, 0, a.seed.value_or(cfg.fit.seed));
    opt.dimension = dim_option(a.dimension);
    std::map<std::string, std::vector<shapescale::RunRecord>> sets;
    for (const auto& r : file.records)
        if (!opt.dimension || !r.dimension_under_test || *r.dimension_under_test == *opt.dimension)
            sets[r.metric_name].push_back(r);
    if (sets.empty()) throw shapescale::ValidationError("no records for the requested dimension");
    const auto report = shapescale::exponent_stability(sets, opt);
    write_json(common, io::stability_to_json(report));
    return report.failures == 0 ? kExitOk : kExitInconclusive;
}

struct SelectSeedArgs {
    std::string records, bins;
    int min_bins = 2;
};

int run_select_seed(const Common& common, const SelectSeedArgs& a) {
    const auto cfg = load_config(common);
    const auto file = io::read_records(a.records);
    const auto records = shapescale::with_resolved_compute(
        file.records, file.context ? *file.context : cfg.compute_context());
    shapescale::SeedOptions opt;
    if (!a.bins.empty()) opt.bins = io::parse_quantity_list(a.bins);
    opt.min_contiguous_bins = a.min_bins;
    const auto sel = shapescale::select_seed_shape(records, opt);
    write_json(common, io::seed_selection_to_json(sel));
    return sel.conclusive ? kExitOk : kExitInconclusive;
}

struct OptimizeArgs {
    std::string law, compute, isoflop_grid;
};

shapescale::LawParams law_from_file(const std::string& path) {
    const json j = io::read_json(path);
    if (j.is_object() && j.contains("params")) return io::law_from_json(j.at("params"));
    if (j.is_object() && j.contains("fits")) {
        if (j.at("fits").size() != 1)
            throw shapescale::ValidationError(path + ": fit report holds several fits; extract one");
        return io::law_from_json(j.at("fits")[0].at("params"));
    }
    return io::law_from_json(j);
}

int run_optimize(const Common& common, const OptimizeArgs& a) {
    const auto p = law_from_file(a.law);
    const auto fc = shapescale::frontier_constants(p);
    json rows = json::array();
    for (double t : io::parse_quantity_list(a.compute)) {
        const double x = shapescale::optimal_shape_dim(p, t);
        json row{{"compute_gflops", t}, {"x_star", x}, {"loss", shapescale::eval_law(p, x, t)},
                 {"frontier_loss", fc.eval(x, t)}};
        if (!a.isoflop_grid.empty()) {
            json curve = json::array();
            for (const auto& pt : shapescale::isoflop_curve(p, t, io::parse_quantity_list(a.isoflop_grid)))
                curve.push_back({{"x", pt.x}, {"loss", pt.loss}});
            row["isoflop"] = std::move(curve);
        }
        rows.push_back(std::move(row));
    }
    write_json(common, {{"params", io::law_to_json(p)},
                        {"s", shapescale::scaling_exponent(p)},
                        {"frontier", {{"F", fc.F}, {"G", fc.G}}},
                        {"optima", rows}});
    return kExitOk;
}

struct FrontierArgs {
    std::string preset, exponents, weights, x0, t0, t0_examples, grid, format = "csv";
};

int run_frontier(const Common& common, const FrontierArgs& a) {
    const auto cfg = load_config(common);
    shapescale::Exponents s = cfg.exponents;
    if (!a.preset.empty()) {
        const auto p = shapescale::exponent_preset(a.preset);
        if (!p) throw shapescale::ValidationError("unknown --preset '" + a.preset + "' (classification, multitask)");
        s = *p;
    }
    if (!a.exponents.empty()) s = triple(a.exponents, "--exponents");
    const shapescale::Weights w = a.weights.empty() ? cfg.weights : triple(a.weights, "--weights");
    const auto x0 = shapescale::to_real(io::parse_shape(a.x0));
    if (a.t0.empty() == a.t0_examples.empty())
        throw shapescale::ValidationError("give exactly one of --t0 (GFLOPs) or --t0-examples");
    const double t0 = a.t0.empty()
                          ? shapescale::training_compute(cfg.settings.with_shape(io::parse_shape(a.x0)),
                                                         io::parse_count(a.t0_examples), cfg.flops_multiplier)
                          : io::parse_quantity(a.t0);
    const auto table = shapescale::frontier_table(x0, t0, s, w, io::parse_quantity_list(a.grid), cfg.settings,
                                                  cfg.rounding, cfg.flops_multiplier);
    if (a.format == "json") {
        json j = io::frontier_to_json(table);
        j["t0_gflops"] = t0;
        write_json(common, j);
    } else if (a.format == "csv") {
        write_output(common, io::frontier_to_csv(table));
    } else {
        throw shapescale::ValidationError("--format must be csv or json");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compute-optimal transformer shape estimation. Compute is in GFLOPs, durations in "
                 "examples seen, resolution and patch size in pixels."};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "JSON tool config (see docs/config.schema.json)");
    app.add_option("-o,--out", common.out_path, "Output path (default stdout)");

    CostArgs cost;
    auto* c = app.add_subcommand("cost", "Parameter count and forward GFLOPs of one model");
    c->add_option("--width", cost.width, "Width (channels)")->required();
    c->add_option("--depth", cost.depth, "Depth (encoder blocks)")->required();
    c->add_option("--mlp", cost.mlp, "MLP hidden dimension (channels)")->required();
    c->add_option("--res", cost.res, "Image resolution (pixels, default 224)");
    c->add_option("--patch", cost.patch, "Patch size (pixels, default 14)");
    c->add_option("--heads", cost.heads, "Attention heads (default 16)");
    c->add_option("--examples", cost.examples, "Also report training compute for this many examples");
    c->add_option("--flops-multiplier", cost.multiplier, "Training FLOPs per forward FLOP (ratio, default 1)");
    c->add_flag("--no-pool", cost.no_pool, "Exclude the attention-pooling head");
    c->add_flag("--no-pos-emb", cost.no_pos, "Exclude the learned positional embedding");

    PlanStarArgs star;
    auto* ps = app.add_subcommand("plan-star", "Star sweep manifest around a large center shape");
    ps->add_option("--center", star.center, "Center shape width,depth,mlp_dim")->required();
    ps->add_option("--step", star.step, "Ratio between consecutive grid values (default 1.2)");
    ps->add_option("--points", star.points, "Values per dimension (default 6)");
    ps->add_option("--ceiling", star.ceiling,
                   "Largest grid value as a fraction of the center; one ratio or width,depth,mlp_dim (default 0.85)");
    ps->add_option("--checkpoints", star.checkpoints, "Training durations, examples (default 64M,128M,256M)");
    ps->add_option("--mlp-multiple", star.mlp_multiple, "MLP values are multiples of this (default 16)");

    PlanGridArgs grid;
    auto* pg = app.add_subcommand("plan-grid", "Cross-product grid sweep manifest for small models");
    pg->add_option("--widths", grid.widths, "Width values (channels, >= 3)")->required();
    pg->add_option("--depths", grid.depths, "Depth values (blocks, >= 3)")->required();
    pg->add_option("--mlps", grid.mlps, "MLP dim values (channels, >= 3)")->required();
    pg->add_option("--examples", grid.examples, "Examples per run")->required();
    pg->add_option("--checkpoints", grid.checkpoints, "Intermediate evaluation points, examples");
    pg->add_option("--compute-checkpoints", grid.compute_checkpoints,
                   "Evaluate every shape at these training budgets instead (GFLOPs)");

    SimulateArgs sim;
    auto* sm = app.add_subcommand("simulate", "Synthetic run records from a manifest and a ground-truth loss");
    sm->add_option("--design", sim.design, "Manifest from plan-star or plan-grid")->required();
    sm->add_option("--truth", sim.truth, "Ground-truth JSON (default: built-in preset)");
    sm->add_option("--seed", sim.seed, "Noise seed")->required();
    sm->add_option("--sigma", sim.sigma, "Noise level: log-scale std (lognormal) or absolute std (gaussian)");
    sm->add_option("--noise", sim.noise, "lognormal, gaussian or none (default lognormal)");
    sm->add_option("--metric", sim.metric, "metric_name written to every record");
    sm->add_option("--format", sim.format, "csv or jsonl (default from --out extension, else csv)");

    FitArgs fit;
    auto* ft = app.add_subcommand("fit", "Fit the joint size/compute law per shape dimension");
    ft->add_option("--records", fit.records, "Run records (.csv or .jsonl)")->required();
    ft->add_option("--seed", fit.seed, "Restart seed")->required();
    ft->add_option("--dimension", fit.dimension, "width, depth or mlp_dim (default: each dimension present)");
    ft->add_option("--holdout", fit.holdout, "Held-out records for extrapolation error");
    ft->add_option("--objective", fit.objective, "squared_relative or absolute_relative");
    ft->add_option("--restarts", fit.restarts, "Multi-start count (default 32)");

    ExponentsArgs ex;
    auto* ep = app.add_subcommand("exponents", "Exponent stability across metrics in one records file");
    ep->add_option("--records", ex.records, "Run records with several metric_name values")->required();
    ep->add_option("--dimension", ex.dimension, "width, depth or mlp_dim");
    ep->add_option("--seed", ex.seed, "Restart seed (default from config)");
    ep->add_option("--objective", ex.objective, "squared_relative or absolute_relative");

    SelectSeedArgs sel;
    auto* ss = app.add_subcommand("select-seed", "Small compute-optimal seed shape from grid sweep records");
    ss->add_option("--records", sel.records, "Grid sweep run records")->required();
    ss->add_option("--bins", sel.bins, "Budget bins, GFLOPs (default: distinct record computes)");
    ss->add_option("--min-bins", sel.min_bins, "Contiguous bins a winner needs to be conclusive (default 2)");

    OptimizeArgs opt;
    auto* os = app.add_subcommand("optimize-shape", "Compute-optimal value of one dimension from a fitted law");
    os->add_option("--law", opt.law, "Law parameters JSON or a single-fit report")->required();
    os->add_option("--compute", opt.compute, "Compute budgets, GFLOPs")->required();
    os->add_option("--isoflop-grid", opt.isoflop_grid, "Also emit the IsoFLOP curve on these values");

    FrontierArgs fr;
    auto* fa = app.add_subcommand("frontier", "Scaled shapes along a compute grid");
    fa->add_option("--preset", fr.preset, "Exponent preset: classification or multitask");
    fa->add_option("--exponents", fr.exponents, "Custom exponents width,depth,mlp_dim");
    fa->add_option("--weights", fr.weights, "Compute share per dimension, sums to 1 (default 1/3 each)");
    fa->add_option("--x0", fr.x0, "Seed shape width,depth,mlp_dim")->required();
    fa->add_option("--t0", fr.t0, "Seed compute, GFLOPs");
    fa->add_option("--t0-examples", fr.t0_examples, "Seed compute as examples seen by x0");
    fa->add_option("--grid", fr.grid, "Target budgets, GFLOPs, each >= t0")->required();
    fa->add_option("--format", fr.format, "csv or json (default csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*c) return run_cost(common, cost);
        if (*ps) return run_plan_star(common, star);
        if (*pg) return run_plan_grid(common, grid);
        if (*sm) return run_simulate(common, sim);
        if (*ft) return run_fit(common, fit);
        if (*ep) return run_exponents(common, ex);
        if (*ss) return run_select_seed(common, sel);
        if (*os) return run_optimize(common, opt);
        if (*fa) return run_frontier(common, fr);
    } catch (const shapescale::NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInconclusive;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}
