#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "zsplit/errors.hpp"
#include "zsplit/io.hpp"
#include "zsplit/json_out.hpp"
#include "zsplit/loss.hpp"
#include "zsplit/metrics.hpp"
#include "zsplit/split.hpp"
#include "zsplit/stats.hpp"
#include "zsplit/synth.hpp"

namespace {

using namespace zsplit;

FileFormat resolve_format(const std::string& flag, const std::filesystem::path& path) {
    if (flag == "csv") return FileFormat::Csv;
    if (flag == "jsonl") return FileFormat::Jsonl;
    return infer_format(path);
}

unsigned worker_count() {
    const char* env = std::getenv("ZSPLIT_THREADS");
    if (!env) return 1;
    const long value = std::strtol(env, nullptr, 10);
    return value > 1 ? static_cast<unsigned>(value) : 1;
}

std::array<double, 3> parse_ratio(const std::string& text) {
    std::array<double, 3> out{};
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t sep = text.find_first_of(":,", start);
        const bool last = i == 2;
        if (last != (sep == std::string::npos)) {
            throw CLI::ValidationError("--ratio", "expected three numbers, like 3:1:1");
        }
        const std::string part = text.substr(start, sep == std::string::npos ? sep : sep - start);
        try {
            std::size_t used = 0;
            out[i] = std::stod(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--ratio", "'" + part + "' is not a number");
        }
        start = sep + 1;
    }
    return out;
}

void emit(const ojson& j) { std::cout << j.dump(2) << "\n"; }

/// Shared dataset/config flags. Threshold flags always exist so audit can
/// override the defaults a foreign split never recorded.
struct SplitFlags {
    double tid = SplitConfig{}.t_id;
    std::int64_t timg = SplitConfig{}.t_img;
    double tattr = SplitConfig{}.t_attr;
    std::string ratio = "3:1:1";
    double ratio_tol = SplitConfig{}.ratio_tolerance;
    int max_restarts = SplitConfig{}.max_restarts;
    std::int64_t max_moves = SplitConfig{}.max_moves;
    bool attr_check_train = false;
    std::uint64_t seed = 0;

    SplitConfig config() const {
        SplitConfig c;
        c.t_id = tid;
        c.t_img = timg;
        c.t_attr = tattr;
        c.ratio_targets = parse_ratio(ratio);
        c.ratio_tolerance = ratio_tol;
        c.max_restarts = max_restarts;
        c.max_moves = max_moves;
        c.attr_check_train = attr_check_train;
        c.seed = seed;
        return c;
    }
};

void add_threshold_flags(CLI::App* cmd, SplitFlags& flags) {
    cmd->add_option("--tid", flags.tid,
                    "Identity-count balance threshold: require |#I_valid - #I_test| < "
                    "#I_all * tid (default 0.01)");
    cmd->add_option("--timg", flags.timg,
                    "Image-count balance threshold: require |N_valid - N_test| < timg "
                    "(default 300)");
    cmd->add_option("--tattr", flags.tattr,
                    "Attribute-ratio balance threshold: require every valid/test positive-ratio "
                    "gap < tattr (default 0.03)");
    cmd->add_option("--ratio", flags.ratio,
                    "Identity-count proportions for train:valid:test (default 3:1:1)");
    cmd->add_option("--ratio-tol", flags.ratio_tol,
                    "Allowed relative deviation from the target proportions (default 0.10)");
    cmd->add_flag("--attr-check-train", flags.attr_check_train,
                  "Additionally require the train/test attribute-ratio gap under tattr "
                  "(the criterion itself compares valid/test)");
}

std::vector<double> ratios_from_file(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    if (j.is_object() && j.contains("attributes")) {
        // The stats/weights output shape is accepted directly.
        std::vector<double> r;
        for (const auto& item : j["attributes"]) r.push_back(item.at("ratio").get<double>());
        j = r;
    }
    if (!j.is_array()) {
        throw validation_error(path.string() +
                               ": expected an array of ratios or a weights report");
    }
    std::vector<double> ratios;
    for (const auto& v : j) {
        if (!v.is_number()) throw validation_error(path.string() + ": ratios must be numbers");
        ratios.push_back(v.get<double>());
    }
    if (ratios.size() != expected) {
        throw validation_error(path.string() + ": expected " + std::to_string(expected) +
                               " ratios, got " + std::to_string(ratios.size()));
    }
    return ratios;
}

std::vector<std::string> test_ids_in_order(const Dataset& dataset,
                                           const SplitAssignment& assignment) {
    std::vector<std::string> ids;
    for (const Record& r : dataset.records) {
        if (assignment.at(r.image_id) == Partition::Test) ids.push_back(r.image_id);
    }
    return ids;
}

int run(int argc, char** argv) {
    CLI::App app{"Zero-shot identity split construction, audit, and evaluation for "
                 "attribute-annotated image datasets"};
    app.require_subcommand(1);

    std::string dataset_path, format = "auto", split_path, pred_path, out_path;
    std::string kind = "probs", ratios_path;
    double threshold = 0.5;
    bool by_overlap = false, with_grad = false;
    SplitFlags flags;

    auto add_dataset = [&](CLI::App* cmd) {
        cmd->add_option("--dataset", dataset_path, "Dataset file (CSV or JSONL)")
            ->required();
        cmd->add_option("--format", format, "Dataset file format (default: from extension)")
            ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    };
    auto load = [&]() { return load_dataset(dataset_path, resolve_format(format, dataset_path)); };

    // split
    auto* cmd_split = app.add_subcommand(
        "split", "Construct a zero-shot identity split satisfying the five criteria");
    add_dataset(cmd_split);
    cmd_split->add_option("--seed", flags.seed, "Search seed (required; fixes the output)")
        ->required();
    add_threshold_flags(cmd_split, flags);
    cmd_split->add_option("--max-restarts", flags.max_restarts,
                          "Search restarts before reporting infeasibility (default 20)");
    cmd_split->add_option("--max-moves", flags.max_moves,
                          "Local-search proposals per restart (default 50000)");
    cmd_split->add_option("--out", out_path, "Write the split file here");
    cmd_split->callback([&] {
        const Dataset dataset = load();
        const SplitConfig config = flags.config();
        try {
            SplitResult result = build_zero_shot_split(dataset, config, worker_count());
            if (!out_path.empty()) {
                write_split(result.assignment, result.report, config, dataset, out_path);
            }
            emit(to_json(result.report));
        } catch (const infeasible_error& e) {
            if (e.best_report) emit(to_json(*e.best_report));
            throw;
        }
    });

    // audit
    auto* cmd_audit = app.add_subcommand(
        "audit", "Check an existing split against the five criteria and measure identity leakage");
    add_dataset(cmd_audit);
    cmd_audit->add_option("--split", split_path, "Split file to audit")->required();
    add_threshold_flags(cmd_audit, flags);
    cmd_audit->callback([&] {
        const Dataset dataset = load();
        const SplitAssignment assignment = load_split(split_path, dataset);
        ojson out;
        out["criteria"] = to_json(criteria_evaluate(dataset, assignment, flags.config()));
        out["overlap"] = to_json(overlap_report(dataset, assignment));
        emit(out);
    });

    // stats
    auto* cmd_stats = app.add_subcommand(
        "stats", "Positive ratios, imbalance weights, and identity distributions per partition");
    add_dataset(cmd_stats);
    cmd_stats->add_option("--split", split_path, "Split file")->required();
    cmd_stats->callback([&] {
        const Dataset dataset = load();
        const SplitAssignment assignment = load_split(split_path, dataset);
        ojson out;
        ojson attr_stats, distributions;
        for (Partition p : kPartitions) {
            attr_stats[to_string(p)] = to_json(positive_ratios(dataset, assignment, p));
            distributions[to_string(p)] = to_json(identity_distribution(dataset, assignment, p));
        }
        out["attribute_stats"] = std::move(attr_stats);
        out["identity_distribution"] = std::move(distributions);
        emit(out);
    });

    // eval
    auto* cmd_eval = app.add_subcommand(
        "eval", "Evaluate predictions on the TEST partition (mA and instance metrics)");
    add_dataset(cmd_eval);
    cmd_eval->add_option("--split", split_path, "Split file")->required();
    cmd_eval->add_option("--pred", pred_path, "Prediction scores (CSV or JSONL)")->required();
    cmd_eval->add_option("--kind", kind, "Score kind: probabilities or raw logits (default probs)")
        ->check(CLI::IsMember({"probs", "logits"}));
    cmd_eval->add_option("--threshold", threshold,
                         "Binarization cut on probabilities; a score equal to it counts "
                         "positive (default 0.5)");
    cmd_eval->add_flag("--by-identity-overlap", by_overlap,
                       "Also report TEST images whose identity appears in TRAIN (common-identity) "
                       "separately from the rest (unique-identity)");
    cmd_eval->callback([&] {
        const Dataset dataset = load();
        const SplitAssignment assignment = load_split(split_path, dataset);
        const ScoreKind score_kind = kind == "logits" ? ScoreKind::Logits : ScoreKind::Probs;
        const PredictionSet predictions = load_predictions(
            pred_path, dataset, score_kind, infer_format(pred_path), threshold);
        if (by_overlap) {
            PartitionedEval eval = partitioned_eval(dataset, assignment, predictions);
            ojson out;
            out["all"] = to_json(eval.all);
            out["common"] = to_json(eval.common);
            out["unique"] = to_json(eval.unique);
            emit(out);
        } else {
            emit(to_json(evaluate_subset(dataset, test_ids_in_order(dataset, assignment),
                                         predictions, "all")));
        }
    });

    // weights
    auto* cmd_weights = app.add_subcommand(
        "weights", "Imbalance weight pairs from TRAIN positive ratios, for an external trainer");
    add_dataset(cmd_weights);
    cmd_weights->add_option("--split", split_path, "Split file")->required();
    cmd_weights->callback([&] {
        const Dataset dataset = load();
        const SplitAssignment assignment = load_split(split_path, dataset);
        emit(to_json(positive_ratios(dataset, assignment, Partition::Train)));
    });

    // loss
    auto* cmd_loss = app.add_subcommand(
        "loss", "Weighted binary cross-entropy (and gradient) of a logit file against "
                "dataset labels");
    add_dataset(cmd_loss);
    cmd_loss->add_option("--pred", pred_path, "Logit scores (prediction schema, kind logits)")
        ->required();
    cmd_loss->add_option("--ratios", ratios_path,
                         "Positive ratios as JSON: an array, or the weights command's output");
    cmd_loss->add_option("--split", split_path,
                         "Compute ratios from this split's TRAIN partition instead of --ratios");
    cmd_loss->add_flag("--grad", with_grad, "Also print the gradient matrix");
    cmd_loss->callback([&] {
        const Dataset dataset = load();
        const PredictionSet predictions = load_predictions(
            pred_path, dataset, ScoreKind::Logits, infer_format(pred_path));
        std::vector<double> ratios;
        if (!ratios_path.empty()) {
            ratios = ratios_from_file(ratios_path, dataset.attribute_count());
        } else if (!split_path.empty()) {
            const SplitAssignment assignment = load_split(split_path, dataset);
            ratios = positive_ratios(dataset, assignment, Partition::Train).ratios();
        } else {
            throw std::runtime_error("loss needs --ratios or --split to supply train ratios");
        }

        const std::size_t n = predictions.ids.size();
        const std::size_t m = dataset.attribute_count();
        Matrix logits = Matrix::zeros(n, m);
        Matrix labels = Matrix::zeros(n, m);
        const auto index = index_by_id(dataset);
        for (std::size_t i = 0; i < n; ++i) {
            const Record& r = dataset.records[index.at(predictions.ids[i])];
            for (std::size_t j = 0; j < m; ++j) {
                logits.at(i, j) = predictions.scores[i][j];
                labels.at(i, j) = r.labels[j];
            }
        }
        ojson out;
        out["images"] = n;
        out["loss"] = weighted_bce(logits, labels, ratios);
        if (with_grad) {
            const Matrix grad = weighted_bce_grad(logits, labels, ratios);
            ojson rows = ojson::array();
            for (std::size_t i = 0; i < n; ++i) {
                ojson row = ojson::array();
                for (std::size_t j = 0; j < m; ++j) row.push_back(grad.at(i, j));
                rows.push_back(std::move(row));
            }
            out["gradient"] = std::move(rows);
        }
        emit(out);
    });

    // synth
    SynthConfig synth_config;
    auto* cmd_synth = app.add_subcommand(
        "synth", "Generate a seeded synthetic attribute dataset with identity-level labels");
    cmd_synth->add_option("--out", out_path, "Output dataset path (CSV or JSONL)")->required();
    cmd_synth->add_option("--format", format, "Output format (default: from extension)")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    cmd_synth->add_option("--seed", synth_config.seed, "Generator seed (required)")->required();
    cmd_synth->add_option("--identities", synth_config.identity_count,
                          "Number of pedestrian identities (default 100)");
    cmd_synth->add_option("--mean-images", synth_config.mean_images_per_identity,
                          "Mean images per identity, geometric (default 3)");
    cmd_synth->add_option("--attrs", synth_config.attribute_count,
                          "Number of attributes (default 10)");
    cmd_synth->add_option("--prevalence-lo", synth_config.prevalence_lo,
                          "Lower bound of per-attribute prevalence (default 0.1)");
    cmd_synth->add_option("--prevalence-hi", synth_config.prevalence_hi,
                          "Upper bound of per-attribute prevalence (default 0.9)");
    cmd_synth->add_option("--coverage", synth_config.identity_label_coverage,
                          "Fraction of images keeping their identity label (default 1.0)");
    cmd_synth->add_option("--flip-noise", synth_config.flip_noise,
                          "Per-image, per-attribute label flip probability (default 0.02)");
    cmd_synth->callback([&] {
        const Dataset dataset = generate(synth_config);
        save_dataset(dataset, out_path, resolve_format(format, out_path));
        ojson out;
        out["out"] = out_path;
        out["images"] = dataset.size();
        out["attributes"] = dataset.attribute_count();
        out["identity_count"] = synth_config.identity_count;
        emit(out);
    });

    // validate
    auto* cmd_validate = app.add_subcommand(
        "validate", "Check a dataset file against the schema and report violations as JSON");
    add_dataset(cmd_validate);
    cmd_validate->callback([&] {
        const ParsedDataset parsed =
            parse_dataset(dataset_path, resolve_format(format, dataset_path));
        const ValidationResult result = validate_dataset(parsed.dataset);
        ojson out = to_json(result);
        for (std::size_t i = 0; i < out["issues"].size(); ++i) {
            const auto& issue = result.issues[i];
            if (issue.record_index && *issue.record_index < parsed.line_numbers.size()) {
                out["issues"][i]["line"] = parsed.line_numbers[*issue.record_index];
            }
        }
        emit(out);
        if (!result.ok()) throw validation_error("dataset has validation issues");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the usage diagnostic
        return code == 0 ? 0 : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const infeasible_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
