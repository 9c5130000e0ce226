// drfuse: fuse per-model DR lesion masks, score them, and revise
// preliminary DR grades via the pixel-threshold inspection mechanism.

#include "drfuse/augment.hpp"
#include "drfuse/ensemble.hpp"
#include "drfuse/metrics.hpp"
#include "drfuse/postprocess.hpp"
#include "drfuse/recipe.hpp"
#include "drfuse/synth.hpp"
#include "drfuse/tim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace drfuse;
using nlohmann::ordered_json;

namespace {

// Exit code contract: 0 success, 1 file/data failures, 2 validation
// failures (including bad configs and id mismatches).
int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::MissingFile:
    case ErrorKind::IoError:
    case ErrorKind::DecodeError:
    case ErrorKind::UnsupportedBitDepth:
    case ErrorKind::DimMismatch:
        return 1;
    default:
        return 2;
    }
}

std::string mask_filename(const std::string& image_id, int class_number) {
    return image_id + "__O" + std::to_string(class_number) + ".png";
}

std::string format_fraction(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        raise(ErrorKind::IoError, "cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

/// Run fn(i) for i in [0, n) on up to jobs threads. The first exception
/// wins and is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const unsigned count = std::min<unsigned>(jobs, static_cast<unsigned>(n));
    workers.reserve(count);
    for (unsigned w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

/// Image ids found in a directory of <id>__O<k>.png masks, from the
/// class-1 files.
std::vector<std::string> scan_mask_ids(const fs::path& dir) {
    if (!fs::is_directory(dir))
        raise(ErrorKind::MissingFile, dir.string() + " is not a directory");
    std::vector<std::string> ids;
    const std::string suffix = "__O1.png";
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        const auto name = e.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix))
            ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// ----------------------------------------------------------------- fuse

struct FuseOptions {
    std::string manifest_path;
    std::string recipe = "v1";
    std::string out_dir;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool emit_overlays = false;
    std::string images_dir; // optional backdrop source for overlays
};

GrayImage make_overlay(const GrayImage* source, const FusedOutput& fused) {
    GrayImage out = source ? resize_nearest(*source, fused.o1.dims()) : GrayImage(fused.o1.dims(), 0);
    for (std::size_t i = 0; i < out.pixels().size(); ++i) {
        std::uint8_t v = static_cast<std::uint8_t>(out.pixels()[i] / 2);
        if (fused.o2.pixels()[i]) v = 140;
        if (fused.o3.pixels()[i]) v = 200;
        if (fused.o1.pixels()[i]) v = 255;
        out.pixels()[i] = v;
    }
    return out;
}

int run_fuse(const FuseOptions& opt) {
    const auto recipe = load_recipe(opt.recipe);
    const auto manifest = PredictionManifest::load_csv(opt.manifest_path);

    const auto report = validate_manifest(manifest, recipe);
    if (!report.ok()) {
        for (const auto& line : report.lines())
            std::cerr << line << '\n';
        std::cerr << "manifest validation failed: " << report.missing_entries.size() << " missing entries, "
                  << report.missing_files.size() << " missing files\n";
        return 2;
    }

    fs::create_directories(opt.out_dir);
    const auto ids = manifest.image_ids();

    struct ImageRecord {
        std::string image_id;
        std::int64_t o1 = 0, o2 = 0, o3 = 0;
        OverlapReport overlap;
    };
    std::vector<ImageRecord> records(ids.size());

    parallel_for(ids.size(), opt.jobs, [&](std::size_t i) {
        const auto& id = ids[i];
        FusedOutput fused = fuse_image(manifest, recipe, id);
        auto distributed = distribute_overlap(fused.o1, fused.o3, id);
        fused.o1 = std::move(distributed.o1);
        fused.o3 = std::move(distributed.o3);
        fused.overlap13 = mask_intersect(fused.o1, fused.o3);

        save_mask(fused.o1, fs::path(opt.out_dir) / mask_filename(id, 1));
        save_mask(fused.o2, fs::path(opt.out_dir) / mask_filename(id, 2));
        save_mask(fused.o3, fs::path(opt.out_dir) / mask_filename(id, 3));

        if (opt.emit_overlays) {
            std::optional<GrayImage> source;
            if (!opt.images_dir.empty()) {
                const auto src_path = fs::path(opt.images_dir) / (id + ".png");
                if (fs::exists(src_path))
                    source = load_gray(src_path);
            }
            save_gray(make_overlay(source ? &*source : nullptr, fused),
                      fs::path(opt.out_dir) / (id + "__overlay.png"));
        }

        records[i] = {id, pixel_count(fused.o1), pixel_count(fused.o2), pixel_count(fused.o3),
                      distributed.report};
    });

    std::vector<std::vector<std::string>> rows;
    ordered_json jrecords = ordered_json::array();
    for (const auto& rec : records) {
        rows.push_back({rec.image_id, std::to_string(rec.o1), std::to_string(rec.o2), std::to_string(rec.o3),
                        std::to_string(rec.overlap.overlap_pixels),
                        format_fraction(rec.overlap.overlap_fraction_of_1),
                        format_fraction(rec.overlap.overlap_fraction_of_3)});
        jrecords.push_back({{"image_id", rec.image_id},
                            {"o1_pixels", rec.o1},
                            {"o2_pixels", rec.o2},
                            {"o3_pixels", rec.o3},
                            {"overlap_pixels", rec.overlap.overlap_pixels},
                            {"overlap_fraction_of_1", rec.overlap.overlap_fraction_of_1},
                            {"overlap_fraction_of_3", rec.overlap.overlap_fraction_of_3}});
    }
    csv::write_file(fs::path(opt.out_dir) / "fuse_report.csv",
                    {"image_id", "o1_pixels", "o2_pixels", "o3_pixels", "overlap_pixels", "overlap_frac_o1",
                     "overlap_frac_o3"},
                    rows);

    ordered_json summary;
    summary["recipe"] = recipe.name;
    summary["canonical_dims"] = {manifest.canonical_dims().width, manifest.canonical_dims().height};
    summary["images"] = ids.size();
    summary["records"] = std::move(jrecords);
    write_json(fs::path(opt.out_dir) / "summary.json", summary);

    std::cout << "fused " << ids.size() << " image(s) with recipe " << recipe.name << " -> " << opt.out_dir
              << '\n';
    return 0;
}

// ------------------------------------------------------------- eval-seg

struct EvalSegOptions {
    std::string pred_dir;
    std::string gt_dir;
    std::string seg_mode = "aggregate";
    std::string out_dir; // optional
};

int run_eval_seg(const EvalSegOptions& opt) {
    const auto pred_ids = scan_mask_ids(opt.pred_dir);
    const auto gt_ids = scan_mask_ids(opt.gt_dir);
    if (pred_ids != gt_ids) {
        std::cerr << "prediction and ground-truth image sets differ (" << pred_ids.size() << " vs "
                  << gt_ids.size() << " ids)\n";
        return 2;
    }
    if (pred_ids.empty()) {
        std::cerr << "no <id>__O1.png masks found in " << opt.pred_dir << '\n';
        return 2;
    }
    const SegAveraging mode =
        opt.seg_mode == "per-image-mean" ? SegAveraging::PerImageMean : SegAveraging::Aggregate;

    std::array<double, 3> dices{};
    ordered_json jclasses = ordered_json::array();
    std::vector<std::vector<std::string>> rows;
    for (LesionClass cls : kLesionClasses) {
        std::vector<BinaryMask> preds;
        std::vector<BinaryMask> gts;
        preds.reserve(pred_ids.size());
        gts.reserve(pred_ids.size());
        for (const auto& id : pred_ids) {
            preds.push_back(load_mask(fs::path(opt.pred_dir) / mask_filename(id, class_number(cls))));
            gts.push_back(load_mask(fs::path(opt.gt_dir) / mask_filename(id, class_number(cls))));
        }
        const auto score = dataset_class_score(preds, gts, cls, mode);
        dices[class_index(cls)] = score.dice;
        std::printf("class %d: iou %.4f dice %.4f (%d images)\n", class_number(cls), score.iou, score.dice,
                    score.images_counted);
        rows.push_back({std::to_string(class_number(cls)), format_fraction(score.iou),
                        format_fraction(score.dice), std::to_string(score.images_counted)});
        jclasses.push_back({{"class", class_number(cls)},
                            {"iou", score.iou},
                            {"dice", score.dice},
                            {"images", score.images_counted}});
    }
    const double mdsc = mean_dsc(dices);
    std::printf("mean DSC: %.4f\n", mdsc);

    if (!opt.out_dir.empty()) {
        fs::create_directories(opt.out_dir);
        csv::write_file(fs::path(opt.out_dir) / "eval_seg.csv", {"class", "iou", "dice", "images"}, rows);
        ordered_json summary;
        summary["mode"] = opt.seg_mode;
        summary["classes"] = std::move(jclasses);
        summary["mean_dsc"] = mdsc;
        write_json(fs::path(opt.out_dir) / "eval_seg.json", summary);
    }
    return 0;
}

// --------------------------------------------------------- grade-revise

struct GradeReviseOptions {
    std::string prelim_csv;
    std::string fused_dir;
    std::string thresholds_path; // optional
    std::string mode = "same-index";
    std::string out_dir;
};

int run_grade_revise(const GradeReviseOptions& opt) {
    const auto prelim = read_grades_csv(opt.prelim_csv);
    const auto thresholds =
        opt.thresholds_path.empty() ? default_thresholds() : load_thresholds(opt.thresholds_path);
    const IndexMode mode = opt.mode == "any-index" ? IndexMode::AnyIndex : IndexMode::SameIndex;

    const auto fused_ids = scan_mask_ids(opt.fused_dir);
    std::set<std::string> prelim_ids;
    for (const auto& rec : prelim)
        prelim_ids.insert(rec.image_id);
    if (prelim_ids != std::set<std::string>(fused_ids.begin(), fused_ids.end())) {
        std::cerr << "preliminary grades and fused masks cover different image sets (" << prelim_ids.size()
                  << " vs " << fused_ids.size() << " ids)\n";
        return 2;
    }

    std::vector<FusedOutput> fused(fused_ids.size());
    parallel_for(fused_ids.size(), std::max(1u, std::thread::hardware_concurrency()), [&](std::size_t i) {
        const auto& id = fused_ids[i];
        FusedOutput f;
        f.image_id = id;
        f.o1 = load_mask(fs::path(opt.fused_dir) / mask_filename(id, 1));
        f.o2 = load_mask(fs::path(opt.fused_dir) / mask_filename(id, 2));
        f.o3 = load_mask(fs::path(opt.fused_dir) / mask_filename(id, 3));
        f.overlap13 = BinaryMask(f.o1.dims(), 0);
        fused[i] = std::move(f);
    });

    const auto records = revise_batch(prelim, fused, thresholds, mode);

    fs::create_directories(opt.out_dir);
    std::vector<GradeRecord> revised;
    std::vector<std::vector<std::string>> audit_rows;
    ordered_json jrecords = ordered_json::array();
    std::size_t changed = 0;
    for (const auto& rec : records) {
        revised.push_back({rec.image_id, rec.revised});
        changed += rec.revised != rec.preliminary;
        audit_rows.push_back({rec.image_id, std::to_string(grade_value(rec.preliminary)),
                              std::to_string(grade_value(rec.revised)), std::to_string(rec.counts.o1),
                              std::to_string(rec.counts.o2), std::to_string(rec.counts.o3),
                              std::to_string(rec.conditions.sigma0()), std::to_string(rec.conditions.sigma1()),
                              rec.rule_fired});
        jrecords.push_back({{"image_id", rec.image_id},
                            {"preliminary", grade_value(rec.preliminary)},
                            {"revised", grade_value(rec.revised)},
                            {"o1_pixels", rec.counts.o1},
                            {"o2_pixels", rec.counts.o2},
                            {"o3_pixels", rec.counts.o3},
                            {"sigma0", rec.conditions.sigma0()},
                            {"sigma1", rec.conditions.sigma1()},
                            {"rule", rec.rule_fired}});
    }
    write_grades_csv(fs::path(opt.out_dir) / "revised.csv", revised);
    csv::write_file(fs::path(opt.out_dir) / "audit.csv",
                    {"image_id", "preliminary", "revised", "o1_pixels", "o2_pixels", "o3_pixels", "sigma0",
                     "sigma1", "rule"},
                    audit_rows);

    ordered_json summary;
    summary["mode"] = to_string(mode);
    summary["thresholds"] = thresholds_to_json(thresholds);
    summary["samples"] = records.size();
    summary["changed"] = changed;
    summary["records"] = std::move(jrecords);
    write_json(fs::path(opt.out_dir) / "summary.json", summary);

    std::cout << "revised " << records.size() << " grade(s), " << changed << " changed -> " << opt.out_dir
              << '\n';
    return 0;
}

// ----------------------------------------------------------- eval-kappa

struct EvalKappaOptions {
    std::string assigned_csv;
    std::string reference_csv;
    std::string out_dir; // optional
};

int run_eval_kappa(const EvalKappaOptions& opt) {
    const auto assigned = read_grades_csv(opt.assigned_csv);
    const auto reference = read_grades_csv(opt.reference_csv);
    const auto cm = grade_confusion(assigned, reference);
    const double kappa = quadratic_weighted_kappa(cm);

    std::printf("quadratic weighted kappa: %.4f\n", kappa);
    std::printf("confusion matrix (rows = assigned, cols = reference):\n");
    for (int i = 0; i < 3; ++i)
        std::printf("  %6lld %6lld %6lld\n", static_cast<long long>(cm.counts[i][0]),
                    static_cast<long long>(cm.counts[i][1]), static_cast<long long>(cm.counts[i][2]));

    if (!opt.out_dir.empty()) {
        fs::create_directories(opt.out_dir);
        ordered_json j;
        j["kappa"] = kappa;
        j["samples"] = cm.total();
        j["confusion"] = cm.counts;
        write_json(fs::path(opt.out_dir) / "kappa.json", j);
    }
    return 0;
}

// -------------------------------------------------------------- augment

int run_augment(const std::string& manifest_path, const std::string& out_dir) {
    const auto manifest = DatasetManifest::load_csv(manifest_path);
    const auto report = expand_dataset(manifest, out_dir);
    for (const auto& line : report.lines())
        std::cout << line << '\n';

    ordered_json j;
    j["input_images"] = report.input_images;
    j["output_images"] = report.output_images;
    j["input_per_grade"] = report.input_per_grade;
    j["output_per_grade"] = report.output_per_grade;
    j["mask_a"] = {{"input_lesion", report.input_a_lesion},
                   {"input_clean", report.input_a_clean},
                   {"output_lesion", report.output_a_lesion},
                   {"output_clean", report.output_a_clean}};
    j["mask_b"] = {{"input_lesion", report.input_b_lesion},
                   {"input_clean", report.input_b_clean},
                   {"output_lesion", report.output_b_lesion},
                   {"output_clean", report.output_b_clean}};
    write_json(fs::path(out_dir) / "report.json", j);
    return 0;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
    std::string out_dir;
    std::uint64_t seed = 1;
    int images = 4;
    bool no_convnext = false;
};

int run_synth(const SynthOptions& opt) {
    SynthConfig cfg;
    cfg.seed = opt.seed;
    cfg.n_images = opt.images;
    cfg.include_convnext = !opt.no_convnext;
    const auto result = generate_corpus(cfg, opt.out_dir);
    std::cout << "wrote " << result.manifest_entries << " prediction masks, ground truth and grades for "
              << cfg.n_images << " image(s) -> " << opt.out_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MCS-DRNet style mask fusion, scoring and grade revision"};
    app.require_subcommand(1);

    FuseOptions fuse_opt;
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse per-model prediction masks into O1/O2/O3");
    fuse_cmd->add_option("--manifest", fuse_opt.manifest_path, "Prediction manifest CSV")->required();
    fuse_cmd->add_option("--recipe", fuse_opt.recipe, "Recipe name (v1|v2|tim) or recipe JSON path");
    fuse_cmd->add_option("--out", fuse_opt.out_dir, "Output directory")->required();
    fuse_cmd->add_option("--jobs", fuse_opt.jobs, "Worker threads");
    fuse_cmd->add_flag("--emit-overlays", fuse_opt.emit_overlays, "Write fused-mask overlay images");
    fuse_cmd->add_option("--images", fuse_opt.images_dir, "Directory of <id>.png source images for overlays");

    EvalSegOptions seg_opt;
    auto* seg_cmd = app.add_subcommand("eval-seg", "Score fused masks against ground truth");
    seg_cmd->add_option("--pred", seg_opt.pred_dir, "Directory of predicted <id>__O<k>.png masks")->required();
    seg_cmd->add_option("--gt", seg_opt.gt_dir, "Directory of ground-truth <id>__O<k>.png masks")->required();
    seg_cmd->add_option("--seg-mode", seg_opt.seg_mode, "aggregate|per-image-mean")
        ->check(CLI::IsMember({"aggregate", "per-image-mean"}));
    seg_cmd->add_option("--out", seg_opt.out_dir, "Optional report directory");

    GradeReviseOptions revise_opt;
    auto* revise_cmd = app.add_subcommand("grade-revise", "Revise preliminary grades from fused masks");
    revise_cmd->add_option("--prelim", revise_opt.prelim_csv, "Preliminary grades CSV")->required();
    revise_cmd->add_option("--fused", revise_opt.fused_dir, "Directory of fused <id>__O<k>.png masks")
        ->required();
    revise_cmd->add_option("--thresholds", revise_opt.thresholds_path,
                           "Threshold config JSON (default: published values)");
    revise_cmd->add_option("--mode", revise_opt.mode, "same-index|any-index")
        ->check(CLI::IsMember({"same-index", "any-index"}));
    revise_cmd->add_option("--out", revise_opt.out_dir, "Output directory")->required();

    EvalKappaOptions kappa_opt;
    auto* kappa_cmd = app.add_subcommand("eval-kappa", "Quadratic weighted kappa between two grade CSVs");
    kappa_cmd->add_option("--assigned", kappa_opt.assigned_csv, "Assigned grades CSV")->required();
    kappa_cmd->add_option("--reference", kappa_opt.reference_csv, "Reference grades CSV")->required();
    kappa_cmd->add_option("--out", kappa_opt.out_dir, "Optional report directory");

    std::string augment_manifest, augment_out;
    auto* augment_cmd = app.add_subcommand("augment", "Expand a dataset by the six geometric variants");
    augment_cmd->add_option("--manifest", augment_manifest, "Dataset manifest CSV")->required();
    augment_cmd->add_option("--out", augment_out, "Output directory")->required();

    SynthOptions synth_opt;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a deterministic synthetic corpus");
    synth_cmd->add_option("--out", synth_opt.out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_opt.seed, "Random seed");
    synth_cmd->add_option("--images", synth_opt.images, "Number of images");
    synth_cmd->add_flag("--no-convnext", synth_opt.no_convnext, "Skip ConvNeXt prediction terms");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fuse_cmd) return run_fuse(fuse_opt);
        if (*seg_cmd) return run_eval_seg(seg_opt);
        if (*revise_cmd) return run_grade_revise(revise_opt);
        if (*kappa_cmd) return run_eval_kappa(kappa_opt);
        if (*augment_cmd) return run_augment(augment_manifest, augment_out);
        if (*synth_cmd) return run_synth(synth_opt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
