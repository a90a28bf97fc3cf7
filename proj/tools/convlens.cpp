// convlens: confusion-matrix analysis and CNN cost estimation toolkit.
//
// One subcommand per library operation; see --help. All commands are
// deterministic for a fixed --seed and write to --out (default stdout).
// Exit codes: 0 success, 1 input/validation error, 2 internal error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "convlens/clustering.hpp"
#include "convlens/confmat.hpp"
#include "convlens/datagen.hpp"
#include "convlens/io.hpp"
#include "convlens/netarch.hpp"
#include "convlens/netcalc.hpp"
#include "convlens/ordering.hpp"
#include "convlens/predops.hpp"
#include "convlens/render.hpp"

namespace {

using namespace convlens;

void write_out(const std::string& path, const std::string& payload) {
    if (path.empty() || path == "-") {
        std::cout << payload;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    out << payload;
}

Permutation load_order(const std::string& path, std::size_t k) {
    if (path.empty()) return identity_permutation(k);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    json j;
    in >> j;
    Permutation order = order_from_json(j);
    if (order.size() != k || !is_valid_permutation(order))
        throw std::invalid_argument("'" + path + "' does not hold a valid permutation");
    return order;
}

// Group number formatting used by the netcalc table (e.g. 61 710).
std::string grouped(std::uint64_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i && (digits.size() - i) % 3 == 0) out += ' ';
        out += digits[i];
    }
    return out;
}

int cmd_metrics(const std::string& in, double epsilon, const std::string& out) {
    const ConfusionMatrix c = read_confusion_csv_file(in);
    write_out(out, to_json(metrics(c, epsilon)).dump(2) + "\n");
    return 0;
}

int cmd_order(const std::string& in, const AnnealSchedule& schedule, bool trace,
              const std::string& out) {
    const ConfusionMatrix c = read_confusion_csv_file(in);
    write_out(out, to_json(anneal_order(c, schedule, trace)).dump(2) + "\n");
    return 0;
}

int cmd_order_exact(const std::string& in, const std::string& out) {
    const ConfusionMatrix c = read_confusion_csv_file(in);
    write_out(out, to_json(brute_force_order(c)).dump(2) + "\n");
    return 0;
}

int cmd_cluster(const std::string& in, const std::string& order_file, std::int64_t theta,
                double percentile, bool interactive, const std::string& answers,
                const AnnealSchedule& schedule, const std::string& out) {
    const ConfusionMatrix c = read_confusion_csv_file(in);
    Permutation order;
    if (!order_file.empty()) {
        order = load_order(order_file, c.size());
    } else {
        order = anneal_order(c, schedule).permutation;
    }

    std::uint64_t resolved_theta = 0;
    std::size_t queries = 0;
    if (interactive) {
        std::size_t cursor = 0;
        Responder responder = [&](const std::string& left, const std::string& right) {
            std::cerr << "same cluster? " << left << " | " << right << " [y/n] " << std::flush;
            char reply;
            if (!answers.empty()) {
                if (cursor >= answers.size())
                    throw std::invalid_argument("--answers script exhausted");
                reply = answers[cursor++];
                std::cerr << reply << "\n";
            } else {
                std::string line;
                if (!std::getline(std::cin, line) || line.empty())
                    throw std::invalid_argument("no answer given");
                reply = line[0];
            }
            if (reply != 'y' && reply != 'n')
                throw std::invalid_argument("answers must be 'y' or 'n'");
            return reply == 'y';
        };
        resolved_theta = interactive_threshold(c, order, responder, &queries);
    } else if (percentile > 0.0) {
        resolved_theta = percentile_threshold(adjacency_strengths(c, order), percentile);
    } else if (theta >= 0) {
        resolved_theta = static_cast<std::uint64_t>(theta);
    } else {
        throw std::invalid_argument("give one of --theta, --percentile or --interactive");
    }

    const ClusterPlan plan = split_by_threshold(c, order, resolved_theta);
    json j{{"order", plan.order},
           {"strengths", plan.strengths},
           {"threshold", plan.threshold},
           {"clusters", to_json(plan_groups(c, plan))}};
    if (interactive) j["queries"] = queries;
    write_out(out, j.dump(2) + "\n");
    return 0;
}

int cmd_cluster_score(const std::string& candidate_file, const std::string& coarse_file,
                      const std::string& out) {
    std::ifstream cand(candidate_file), coarse(coarse_file);
    if (!cand) throw std::invalid_argument("cannot open '" + candidate_file + "'");
    if (!coarse) throw std::invalid_argument("cannot open '" + coarse_file + "'");
    json jc, jg;
    cand >> jc;
    coarse >> jg;
    const ClusterErrorReport rep =
        cluster_error(clustering_from_json(jc), clustering_from_json(jg));
    write_out(out, json{{"per_group", rep.per_group}, {"total", rep.total}}.dump(2) + "\n");
    return 0;
}

int cmd_render(const std::string& in, const std::string& order_file, const HeatmapOptions& opt,
               const std::string& out) {
    const ConfusionMatrix c = read_confusion_csv_file(in);
    write_out(out, heatmap(c, load_order(order_file, c.size()), opt));
    return 0;
}

int cmd_tile(const std::string& in, const std::string& order_file, std::size_t max_block,
             std::uint64_t threshold, const std::string& out) {
    const ConfusionMatrix c = read_confusion_csv_file(in);
    const TilePlan plan = tile_blocks(c, load_order(order_file, c.size()), max_block, threshold);
    json blocks = json::array();
    for (const TileBlock& b : plan.blocks) blocks.push_back(json{{"first", b.first}, {"last", b.last}});
    write_out(out, json{{"blocks", blocks}, {"required_matrices", plan.required_matrices}}.dump(2) +
                       "\n");
    return 0;
}

int cmd_netcalc_report(const std::string& arch_file, std::uint64_t classes, std::uint64_t batch,
                       const std::string& optimizer, std::uint64_t bytes,
                       const std::string& out) {
    ArchSpec arch = parse_arch(read_text_file(arch_file));
    if (classes > 0) arch = with_class_count(arch, classes);
    const CostReport rep = cost_report(arch);
    const std::uint64_t opt_factor = optimizer == "adam" ? 2 : 0;
    const MemoryFootprint mem = memory_footprint(arch, batch, bytes, opt_factor);

    std::ostringstream table;
    table << std::left << std::setw(24) << "Layer" << std::right << std::setw(16) << "Parameters"
          << std::setw(18) << "FLOPs" << std::setw(16) << "Output floats" << "\n";
    for (const CostRow& row : rep.rows)
        table << std::left << std::setw(24) << row.name << std::right << std::setw(16)
              << grouped(row.params) << std::setw(18) << grouped(row.flops) << std::setw(16)
              << grouped(row.out_floats) << "\n";
    table << std::left << std::setw(24) << "Total" << std::right << std::setw(16)
          << grouped(rep.total_params) << std::setw(18) << grouped(rep.total_flops)
          << std::setw(16) << grouped(rep.total_out_floats) << "\n";
    table << "Training memory (batch " << batch << ", " << optimizer << "): "
          << grouped(mem.training_bytes) << " bytes\n";
    table << "Inference memory: " << grouped(mem.inference_bytes) << " bytes\n";

    json rows = json::array();
    for (const CostRow& row : rep.rows)
        rows.push_back(json{{"name", row.name},
                            {"params", row.params},
                            {"flops", row.flops},
                            {"out_floats", row.out_floats}});
    const json j{{"rows", rows},
                 {"total_params", rep.total_params},
                 {"total_flops", rep.total_flops},
                 {"total_out_floats", rep.total_out_floats},
                 {"training_bytes", mem.training_bytes},
                 {"inference_bytes", mem.inference_bytes}};
    write_out(out, table.str() + j.dump(2) + "\n");
    return 0;
}

int cmd_act(const std::string& name, const std::vector<double>& xs, double alpha,
            const std::string& out) {
    json rows = json::array();
    for (double x : xs) {
        const ActivationValue v = activation(name, x, alpha);
        rows.push_back(json{{"x", x}, {"value", v.value}, {"derivative", v.derivative}});
    }
    write_out(out, json{{"activation", name}, {"points", rows}}.dump(2) + "\n");
    return 0;
}

int cmd_filtercorr(const std::string& in, std::size_t k, const std::string& out) {
    std::vector<FilterTensor> layer;
    std::vector<std::string> names;
    for (const NamedTensor& t : read_tensors_file(in)) {
        names.push_back(t.name);
        layer.push_back(as_filter(t));
    }
    if (layer.size() < 2) throw std::invalid_argument("need at least two filters");
    json pairs = json::array();
    for (std::size_t i = 0; i < layer.size(); ++i)
        for (std::size_t j = i + 1; j < layer.size(); ++j)
            pairs.push_back(json{{"a", names[i]},
                                 {"b", names[j]},
                                 {"rho", k_translation_correlation(layer[i], layer[j], k)}});
    write_out(out, json{{"k", k},
                        {"pairs", pairs},
                        {"avg_max", avg_max_translation_correlation(layer, k)}}
                           .dump(2) +
                       "\n");
    return 0;
}

int cmd_ensemble(const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<PredictionSet> members;
    for (const std::string& path : inputs) members.push_back(read_prediction_csv_file(path));
    std::ostringstream csv;
    write_prediction_csv(csv, ensemble_average(members));
    write_out(out, csv.str());
    return 0;
}

int cmd_smooth(const std::string& targets_file, const std::string& ensemble_file, double alpha,
               const std::string& out) {
    const PredictionSet targets = read_prediction_csv_file(targets_file);
    const PredictionSet ens = read_prediction_csv_file(ensemble_file);
    std::ostringstream csv;
    write_prediction_csv(csv, smooth_labels(targets, ens, alpha));
    write_out(out, csv.str());
    return 0;
}

int cmd_loss(const std::string& outputs_file, const std::string& targets_file,
             const std::string& weights_file, double lambda1, double lambda2, double clamp_eps,
             const std::string& out) {
    const PredictionSet outputs = read_prediction_csv_file(outputs_file);
    const PredictionSet targets = read_prediction_csv_file(targets_file);
    std::vector<double> weights;
    if (!weights_file.empty())
        for (const NamedTensor& t : read_tensors_file(weights_file))
            weights.insert(weights.end(), t.values.begin(), t.values.end());
    const double loss = cross_entropy_loss(outputs.rows, targets.rows, weights, lambda1, lambda2,
                                           clamp_eps);
    write_out(out, json{{"loss", loss}}.dump(2) + "\n");
    return 0;
}

int cmd_updates(const std::string& in, const std::string& out) {
    std::ifstream f(in);
    if (!f) throw std::invalid_argument("cannot open '" + in + "'");
    json j;
    f >> j;
    SnapshotSeries series;
    series.layer_names = j.at("layers").get<std::vector<std::string>>();
    series.epochs = j.at("epochs").get<std::vector<std::vector<std::vector<double>>>>();
    const auto stats = weight_update_stats(series);
    json intervals = json::array();
    for (std::size_t e = 0; e < stats.size(); ++e) {
        json layers = json::array();
        for (std::size_t l = 0; l < stats[e].size(); ++l)
            layers.push_back(json{{"layer", series.layer_names[l]},
                                  {"mean", stats[e][l].mean},
                                  {"max", stats[e][l].max},
                                  {"sum", stats[e][l].sum}});
        intervals.push_back(json{{"from_epoch", e}, {"to_epoch", e + 1}, {"layers", layers}});
    }
    write_out(out, json{{"intervals", intervals}}.dump(2) + "\n");
    return 0;
}

int cmd_filter2d(const std::string& image_file, const std::string& kernel_file,
                 const std::string& kernel_name, const std::string& boundary,
                 const std::string& out) {
    const Raster image = read_pnm_file(image_file);
    FilterTensor kernel;
    bool found = false;
    for (const NamedTensor& t : read_tensors_file(kernel_file)) {
        if (kernel_name.empty() || t.name == kernel_name) {
            kernel = as_filter(t);
            found = true;
            break;
        }
    }
    if (!found) throw std::invalid_argument("kernel '" + kernel_name + "' not found");
    const Raster result = filter2d(image, kernel, boundary_from_name(boundary));
    std::ostringstream buf;
    write_pnm(buf, result, /*binary=*/true);
    write_out(out, buf.str());
    return 0;
}

int cmd_crops(const std::string& image_file, const std::string& labels_file, std::size_t w,
              std::size_t h, std::size_t count, double majority, std::uint64_t seed,
              const std::string& out) {
    const Raster image = read_pnm_file(image_file);
    const Raster labels = read_pnm_file(labels_file);
    const auto samples = crop_dataset(image, labels, w, h, count, majority, seed);
    json draws = json::array();
    std::size_t accepted = 0;
    for (const CropSample& s : samples) {
        json d{{"x", s.x}, {"y", s.y}};
        if (s.majority_class) {
            d["class"] = *s.majority_class;
            ++accepted;
        } else {
            d["rejected"] = true;
        }
        draws.push_back(std::move(d));
    }
    write_out(out, json{{"draws", draws}, {"accepted", accepted}}.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"confusion-matrix analysis and CNN cost estimation toolkit"};
    app.require_subcommand(1);

    std::string in, out, order_file, candidate_file, coarse_file, arch_file;
    std::string name, answers, boundary = "zero", optimizer = "sgd", kernel_file, kernel_name;
    std::string targets_file, ensemble_file, weights_file, labels_file;
    std::vector<std::string> inputs;
    std::vector<double> xs;
    double epsilon = 0.01, percentile = 0.0, alpha = 0.01, smooth_alpha = 0.5;
    double lambda1 = 0.0, lambda2 = 0.0, clamp_eps = 1e-7, majority = 0.5;
    std::int64_t theta = -1;
    std::uint64_t classes = 0, batch = 1, bytes = 4, mass_threshold = 0, seed = 0;
    std::size_t max_block = 50, corr_k = 1, crop_w = 0, crop_h = 0, crop_count = 0;
    bool interactive = false, trace = false;
    AnnealSchedule schedule;
    HeatmapOptions hopt;

    auto add_schedule_flags = [&](CLI::App* cmd) {
        cmd->add_option("--steps", schedule.steps, "annealing steps per chain (0 = 50000*K)");
        cmd->add_option("--t0", schedule.t0, "initial temperature (0 = automatic)");
        cmd->add_option("--cooling", schedule.cooling, "cooling factor in (0,1) (0 = automatic)");
        cmd->add_option("--restarts", schedule.restarts, "independent chains");
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_flag("--current-score", schedule.current_score_metropolis,
                      "standard Metropolis against the current score");
    };

    CLI::App* metrics_cmd = app.add_subcommand("metrics", "confusion-matrix quality metrics");
    metrics_cmd->add_option("--in", in, "confusion CSV")->required();
    metrics_cmd->add_option("--epsilon", epsilon, "skew-check epsilon");
    metrics_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* order_cmd = app.add_subcommand("order", "simulated-annealing matrix ordering");
    order_cmd->add_option("--in", in, "confusion CSV")->required();
    add_schedule_flags(order_cmd);
    order_cmd->add_flag("--trace", trace, "record best-objective trace");
    order_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* exact_cmd = app.add_subcommand("order-exact", "exhaustive ordering (K <= 10)");
    exact_cmd->add_option("--in", in, "confusion CSV")->required();
    exact_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* cluster_cmd = app.add_subcommand("cluster", "cut an ordered matrix into clusters");
    cluster_cmd->add_option("--in", in, "confusion CSV")->required();
    cluster_cmd->add_option("--order", order_file, "ordering result file (default: anneal)");
    cluster_cmd->add_option("--theta", theta, "explicit threshold");
    cluster_cmd->add_option("--percentile", percentile,
                            "fraction of pairs kept above the threshold");
    cluster_cmd->add_flag("--interactive", interactive, "resolve the threshold via y/n queries");
    cluster_cmd->add_option("--answers", answers, "scripted y/n answers for --interactive");
    add_schedule_flags(cluster_cmd);
    cluster_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* score_cmd = app.add_subcommand("cluster-score", "score clusters vs coarse truth");
    score_cmd->add_option("--candidate", candidate_file, "candidate clustering")->required();
    score_cmd->add_option("--coarse", coarse_file, "coarse ground-truth clustering")->required();
    score_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* render_cmd = app.add_subcommand("render", "SVG heatmap of a confusion matrix");
    render_cmd->add_option("--in", in, "confusion CSV")->required();
    render_cmd->add_option("--order", order_file, "ordering result file (default identity)");
    render_cmd->add_flag("--zero-diagonal", hopt.zero_diagonal, "blank the diagonal");
    render_cmd->add_flag("--row-normalize", hopt.row_normalize, "normalize each row");
    render_cmd->add_flag("--log", hopt.log_scale, "log1p scaling");
    render_cmd->add_flag("--labels", hopt.show_labels, "draw class labels");
    render_cmd->add_option("--cell-px", hopt.cell_px, "cell size in pixels");
    render_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* tile_cmd = app.add_subcommand("tile", "diagonal-block tiling for large matrices");
    tile_cmd->add_option("--in", in, "confusion CSV")->required();
    tile_cmd->add_option("--order", order_file, "ordering result file (default identity)");
    tile_cmd->add_option("--max-block", max_block, "largest block size");
    tile_cmd->add_option("--threshold", mass_threshold, "skippable cross-block mass");
    tile_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* netcalc_cmd = app.add_subcommand("netcalc", "static architecture cost model");
    CLI::App* report_cmd = netcalc_cmd->add_subcommand("report", "per-layer cost table");
    report_cmd->add_option("arch", arch_file, "architecture description file")->required();
    report_cmd->add_option("--classes", classes, "substitute the class count");
    report_cmd->add_option("--batch", batch, "mini-batch size for the memory bound");
    report_cmd->add_option("--optimizer", optimizer, "adam|sgd")
        ->check(CLI::IsMember({"adam", "sgd"}));
    report_cmd->add_option("--bytes", bytes, "bytes per value");
    report_cmd->add_option("--out", out, "output file (default stdout)");
    netcalc_cmd->require_subcommand(1);

    CLI::App* act_cmd = app.add_subcommand("act", "evaluate an activation function");
    act_cmd->add_option("--name", name, "activation name")->required();
    act_cmd->add_option("--x", xs, "input value(s)")->required();
    act_cmd->add_option("--alpha", alpha, "slope for lrelu/prelu/elu");
    act_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* corr_cmd = app.add_subcommand("filtercorr", "k-translation filter correlation");
    corr_cmd->add_option("--in", in, "tensor container with the layer's filters")->required();
    corr_cmd->add_option("--k", corr_k, "translation window radius");
    corr_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* ens_cmd = app.add_subcommand("ensemble", "average prediction sets");
    ens_cmd->add_option("--in", inputs, "prediction CSVs (repeatable)")->required();
    ens_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* smooth_cmd = app.add_subcommand("smooth", "smooth one-hot labels");
    smooth_cmd->add_option("--targets", targets_file, "one-hot target CSV")->required();
    smooth_cmd->add_option("--ensemble", ensemble_file, "ensemble prediction CSV")->required();
    smooth_cmd->add_option("--alpha", smooth_alpha, "smoothing factor");
    smooth_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* loss_cmd = app.add_subcommand("loss", "regularized cross-entropy");
    loss_cmd->add_option("--outputs", in, "prediction CSV")->required();
    loss_cmd->add_option("--targets", targets_file, "target CSV")->required();
    loss_cmd->add_option("--weights", weights_file, "tensor container of weights");
    loss_cmd->add_option("--lambda1", lambda1, "l1 weight");
    loss_cmd->add_option("--lambda2", lambda2, "l2 weight");
    loss_cmd->add_option("--clamp", clamp_eps, "probability clamp");
    loss_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* upd_cmd = app.add_subcommand("updates", "per-epoch weight-update statistics");
    upd_cmd->add_option("--in", in, "snapshot series file")->required();
    upd_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* f2d_cmd = app.add_subcommand("filter2d", "linear image filtering");
    f2d_cmd->add_option("--image", in, "PGM/PPM input")->required();
    f2d_cmd->add_option("--kernel", kernel_file, "tensor container with the kernel")->required();
    f2d_cmd->add_option("--kernel-name", kernel_name, "tensor to use (default: first)");
    f2d_cmd->add_option("--boundary", boundary, "dont_compute|zero|nearest|reflect");
    f2d_cmd->add_option("--out", out, "output file (default stdout)");

    CLI::App* crops_cmd = app.add_subcommand("crops", "segmentation-to-classification crops");
    crops_cmd->add_option("--image", in, "PGM/PPM image")->required();
    crops_cmd->add_option("--labels", labels_file, "PGM label map")->required();
    crops_cmd->add_option("--width", crop_w, "crop width")->required();
    crops_cmd->add_option("--height", crop_h, "crop height")->required();
    crops_cmd->add_option("--count", crop_count, "number of draws")->required();
    crops_cmd->add_option("--majority", majority, "majority fraction in [0.5, 1]");
    crops_cmd->add_option("--seed", seed, "random seed");
    crops_cmd->add_option("--out", out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);
    schedule.seed = seed;

    try {
        if (*metrics_cmd) return cmd_metrics(in, epsilon, out);
        if (*order_cmd) return cmd_order(in, schedule, trace, out);
        if (*exact_cmd) return cmd_order_exact(in, out);
        if (*cluster_cmd)
            return cmd_cluster(in, order_file, theta, percentile, interactive, answers, schedule,
                               out);
        if (*score_cmd) return cmd_cluster_score(candidate_file, coarse_file, out);
        if (*render_cmd) return cmd_render(in, order_file, hopt, out);
        if (*tile_cmd) return cmd_tile(in, order_file, max_block, mass_threshold, out);
        if (*netcalc_cmd) return cmd_netcalc_report(arch_file, classes, batch, optimizer, bytes, out);
        if (*act_cmd) return cmd_act(name, xs, alpha, out);
        if (*corr_cmd) return cmd_filtercorr(in, corr_k, out);
        if (*ens_cmd) return cmd_ensemble(inputs, out);
        if (*smooth_cmd) return cmd_smooth(targets_file, ensemble_file, smooth_alpha, out);
        if (*loss_cmd)
            return cmd_loss(in, targets_file, weights_file, lambda1, lambda2, clamp_eps, out);
        if (*upd_cmd) return cmd_updates(in, out);
        if (*f2d_cmd) return cmd_filter2d(in, kernel_file, kernel_name, boundary, out);
        if (*crops_cmd)
            return cmd_crops(in, labels_file, crop_w, crop_h, crop_count, majority, seed, out);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2; // unreachable: a subcommand is required
}
