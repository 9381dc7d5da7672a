// impedscope: config-driven runner for the EIS classification pipeline.
//
// Subcommands: synth | preprocess | masks validate | rank-freqs | train |
// tune | evaluate | report. Every subcommand takes --config, --seed, --out.
// Exit codes: 0 success, 2 validation failure, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "impedscope/impedscope.hpp"

namespace fs = std::filesystem;
using namespace impedscope;

namespace {

struct CommonArgs {
    std::string config;
    uint64_t seed = 0;
    std::string out = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* c = cmd->add_option("--config", args.config, "path to the JSON config");
    if (config_required) c->required();
    cmd->add_option("--seed", args.seed, "root seed for all randomness");
    cmd->add_option("--out", args.out, "output directory");
}

std::string resolve_rel(const std::string& p, const std::string& config_path) {
    if (p.empty()) return p;
    const fs::path cand(p);
    if (cand.is_absolute() || fs::exists(cand)) return p;
    return (fs::path(config_path).parent_path() / cand).string();
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    validate(in.good(), "config not readable: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int cmd_synth(const CommonArgs& args) {
    const nlohmann::json j = load_json(args.config);
    CohortSpec spec = CohortSpec::from_json(j);
    spec.seed = args.seed;
    const std::string geom_path = resolve_rel(spec.geometry_path, args.config);
    const ElectrodeArray array = ElectrodeArray::load(geom_path);
    const Dataset d = generate_cohort(spec, array);
    fs::create_directories(args.out);
    // geometry travels with the dataset so the bundle is self-contained
    {
        std::ifstream src(geom_path, std::ios::binary);
        std::ofstream dst(fs::path(args.out) / "geometry.json", std::ios::binary);
        dst << src.rdbuf();
    }
    save_dataset(d, args.out);
    std::printf("wrote %zu samples / %zu patients to %s\n", d.samples.size(), d.patients.size(),
                args.out.c_str());
    return 0;
}

int cmd_preprocess(const CommonArgs& args) {
    ExperimentConfig cfg = ExperimentConfig::load(args.config);
    cfg.seed = args.seed;
    const PathologyVocabulary vocab = cfg.pathology_path.empty()
                                          ? PathologyVocabulary::defaults()
                                          : PathologyVocabulary::load(cfg.pathology_path);
    const FilterConfig filter =
        cfg.filter_path.empty() ? FilterConfig{} : FilterConfig::load(cfg.filter_path);
    const Dataset raw = load_dataset(cfg.dataset_manifest, vocab);
    const Dataset cleaned = preprocess_dataset(raw, filter);

    const std::string cleaned_dir = (fs::path(args.out) / "cleaned").string();
    Dataset to_save = cleaned;
    save_dataset(to_save, cleaned_dir);
    if (!cfg.geometry_path.empty() && fs::exists(cfg.geometry_path)) {
        std::ifstream src(cfg.geometry_path, std::ios::binary);
        std::ofstream dst(fs::path(cleaned_dir) / "geometry.json", std::ios::binary);
        dst << src.rdbuf();
    }

    std::ostringstream csv;
    csv << "sample_id,patient_id,raw_pathology,category,completeness,retained\n";
    for (const SampleRecord& s : raw.samples) {
        const CleanedSample c = filter_and_average(s, raw.tests_per_sample, raw.bursts_per_test,
                                                   filter, raw.n_patterns, raw.n_freq());
        const bool kept = c.usable && (1.0 - c.completeness) <= filter.completeness_threshold;
        csv << s.sample_id << "," << s.patient_id << "," << s.label.raw_pathology << ","
            << to_string(s.label.category) << "," << num_str(c.completeness) << ","
            << (kept ? 1 : 0) << "\n";
    }
    write_text_file((fs::path(args.out) / "completeness.csv").string(), csv.str());
    std::printf("retained %zu of %zu samples (C_th = %s)\n", cleaned.samples.size(),
                raw.samples.size(), num_str(filter.completeness_threshold).c_str());
    return 0;
}

int cmd_masks_validate(const CommonArgs& args) {
    const nlohmann::json j = load_json(args.config);
    const ElectrodeArray array =
        ElectrodeArray::load(resolve_rel(j.at("geometry").get<std::string>(), args.config));
    const MaskRegistry registry =
        MaskRegistry::load(resolve_rel(j.at("masks").get<std::string>(), args.config));
    const PatternUniverse universe(array);

    std::printf("%-14s %8s %8s  %8s %8s  %8s %8s\n", "mask", "n", "expect", "II dist",
                "expect", "VV dist", "expect");
    bool all_ok = true;
    std::string first_failure;
    for (const auto& name : registry.names()) {
        const auto& def = registry.def(name);
        try {
            const MaskSet mask = registry.build(name, universe, array);
            std::printf("%-14s %8zu %8zu  %8.2f %8.2f  %8.2f %8.2f\n", name.c_str(),
                        mask.indices.size(), def.expected_count, mask.mean_ii_distance_mm,
                        def.expected_ii_distance_mm, mask.mean_vv_distance_mm,
                        def.expected_vv_distance_mm);
        } catch (const ValidationError& e) {
            std::printf("%-14s FAILED: %s\n", name.c_str(), e.what());
            if (first_failure.empty()) first_failure = e.what();
            all_ok = false;
        }
    }
    if (!all_ok) throw ValidationError(first_failure);
    std::printf("all %zu masks validate\n", registry.names().size());
    return 0;
}

Workbench open_workbench(const CommonArgs& args, ExperimentConfig& cfg) {
    cfg = ExperimentConfig::load(args.config);
    cfg.seed = args.seed;
    return Workbench::open(cfg);
}

int cmd_rank_freqs(const CommonArgs& args) {
    ExperimentConfig cfg;
    const Workbench wb = open_workbench(args, cfg);
    run_frequency_sweep(wb, cfg, args.out);
    std::printf("frequency sweep written to %s\n", args.out.c_str());
    return 0;
}

int cmd_train(const CommonArgs& args) {
    ExperimentConfig cfg;
    const Workbench wb = open_workbench(args, cfg);
    const nlohmann::json j = load_json(args.config);
    validate(j.contains("train"), "train config needs a \"train\" block");
    const auto& t = j.at("train");
    const HyperParams hp = HyperParams::from_json(t.at("hyperparams"));
    const MaskChoice mask_choice =
        t.contains("mask") && t.at("mask").is_object()
            ? mask_choice_from_json(t.at("mask"))
            : [&] {
                  MaskChoice m;
                  m.name = t.value("mask", std::string("All"));
                  return m;
              }();
    validate(!mask_choice.is_zthreshold, "train uses a fixed mask");
    const MaskSet mask = mask_choice.name == "All" && !wb.registry.has("All")
                             ? Workbench::full_mask(*wb.universe)
                             : wb.registry.build(mask_choice.name, *wb.universe, wb.array);
    std::vector<size_t> freqs;
    if (t.contains("frequencies")) {
        for (const auto& f : t.at("frequencies")) {
            const int v = f.get<int>();
            validate(v >= 1 && size_t(v) <= wb.n_freq(), "frequency index out of range");
            freqs.push_back(size_t(v - 1));
        }
    } else {
        freqs.resize(wb.n_freq());
        for (size_t f = 0; f < freqs.size(); ++f) freqs[f] = f;
    }

    FeatureMatrix x = assemble_features(wb.cleaned, wb.task_samples, mask, freqs);
    const ZScoreParams zs = zscore_per_frequency(x, nullptr, wb.filter.zscore_per_column);
    const auto model = fit(x.x, wb.labels, hp, substream(cfg.seed, "train"));

    fs::create_directories(args.out);
    save_model_file(*model, (fs::path(args.out) / "model.bin").string());
    nlohmann::ordered_json info;
    info["model"] = to_string(hp.model);
    info["params"] = hp.describe();
    info["converged"] = model->converged();
    info["task"] = cfg.task;
    info["mask"] = mask.name;
    info["n_patterns"] = mask.indices.size();
    std::vector<int> freqs_1b;
    for (const size_t f : freqs) freqs_1b.push_back(int(f) + 1);
    info["frequencies"] = freqs_1b;
    info["n_input"] = x.x.cols();
    info["zscore_mean"] = zs.mean;
    info["zscore_std"] = zs.std;
    write_json_file((fs::path(args.out) / "train.json").string(), info);
    std::printf("model written to %s/model.bin (n_input = %zu)\n", args.out.c_str(), x.x.cols());
    return 0;
}

int cmd_tune(const CommonArgs& args) {
    ExperimentConfig cfg;
    const Workbench wb = open_workbench(args, cfg);
    validate(!cfg.explicit_best_f_t.empty(),
             "tune needs best_f_t in the config (or run `report` for the full schedule)");
    validate(!cfg.explicit_best_masks.empty(), "tune needs best_masks in the config");
    std::vector<MaskChoice> masks;
    for (const auto& name : cfg.explicit_best_masks) {
        MaskChoice m;
        m.name = name;
        masks.push_back(m);
    }
    const TuningResult r =
        run_combination_tuning(wb, cfg, args.out, cfg.explicit_best_f_t, masks);
    std::printf("winner: %s  score=%s\n", r.overall.params.describe().c_str(),
                num_str(r.overall.score).c_str());
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    ExperimentConfig cfg;
    const Workbench wb = open_workbench(args, cfg);
    const nlohmann::json j = load_json(args.config);
    const std::string stage = j.value("stage", std::string("baseline"));
    if (stage == "baseline") {
        run_baseline(wb, cfg, args.out);
    } else if (stage == "iivv-sweep") {
        run_iivv_sweep(wb, cfg, args.out);
    } else if (stage == "final") {
        validate(!cfg.winner.empty(), "evaluate --stage final needs a \"winner\" block");
        Winner w;
        w.params = HyperParams::from_json(cfg.winner.at("hyperparams"));
        w.model = w.params.model;
        w.mask = cfg.winner.contains("mask") ? mask_choice_from_json(cfg.winner.at("mask"))
                                             : MaskChoice{};
        w.f_t = cfg.winner.value("f_T", size_t(0));
        run_final_evaluation(wb, cfg, args.out, w);
    } else {
        throw ValidationError("unknown evaluate stage: " + stage);
    }
    std::printf("%s evaluation written to %s\n", stage.c_str(), args.out.c_str());
    return 0;
}

int cmd_report(const CommonArgs& args) {
    ExperimentConfig cfg;
    const Workbench wb = open_workbench(args, cfg);
    const auto summary = run_full_schedule(wb, cfg, args.out);
    std::printf("report written to %s (winner: %s)\n", args.out.c_str(),
                summary.at("winner").at("params").get<std::string>().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EIS oral-lesion classification pipeline"};
    app.require_subcommand(1);

    CommonArgs synth_args, pre_args, masks_args, rank_args, train_args, tune_args, eval_args,
        report_args;

    auto* synth = app.add_subcommand("synth", "generate a synthetic Cole-model cohort");
    add_common(synth, synth_args);
    auto* pre = app.add_subcommand("preprocess", "filter, average, and gate a raw dataset");
    add_common(pre, pre_args);
    auto* masks = app.add_subcommand("masks", "mask registry utilities");
    auto* masks_validate = masks->add_subcommand("validate", "check mask cardinalities");
    add_common(masks_validate, masks_args);
    auto* rank = app.add_subcommand("rank-freqs", "PCA frequency ranking and AUC-vs-f_T sweep");
    add_common(rank, rank_args);
    auto* train = app.add_subcommand("train", "fit one model on the full task dataset");
    add_common(train, train_args);
    auto* tune = app.add_subcommand("tune", "grid-search the best-k combinations");
    add_common(tune, tune_args);
    auto* eval = app.add_subcommand("evaluate", "baseline, IIVV sweep, or final evaluation");
    add_common(eval, eval_args);
    auto* report = app.add_subcommand("report", "run the full optimization schedule");
    add_common(report, report_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_args);
        if (pre->parsed()) return cmd_preprocess(pre_args);
        if (masks->parsed()) {
            validate(masks_validate->parsed(), "usage: impedscope masks validate --config ...");
            return cmd_masks_validate(masks_args);
        }
        if (rank->parsed()) return cmd_rank_freqs(rank_args);
        if (train->parsed()) return cmd_train(train_args);
        if (tune->parsed()) return cmd_tune(tune_args);
        if (eval->parsed()) return cmd_evaluate(eval_args);
        if (report->parsed()) return cmd_report(report_args);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
