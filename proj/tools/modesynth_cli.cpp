// Experiment CLI for the mode-synthesis library: glyph generation, ROI
// cropping, single-model training, the approach-1/2 protocols, and the
// built-in verification suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modesynth/modesynth.hpp"

namespace fs = std::filesystem;
using namespace modesynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

ImageFormat sniff_format(const fs::path& path) {
    if (path.extension() == ".csv") return ImageFormat::csv;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] == 'P' && magic[1] == '5') return ImageFormat::pgm_binary;
    return ImageFormat::pgm_ascii;
}

ImageGray load_auto(const std::string& path) { return load_image(path, sniff_format(path)); }

Polarity parse_polarity(const std::string& name) {
    if (name == "dark_on_light") return Polarity::dark_on_light;
    if (name == "light_on_dark") return Polarity::light_on_dark;
    throw InvalidRange("polarity must be dark_on_light or light_on_dark");
}

NoiseMode parse_noise(const std::string& name) {
    if (name == "sample_stats") return NoiseMode::sample_stats;
    if (name == "zero") return NoiseMode::zero;
    throw InvalidRange("noise must be sample_stats or zero");
}

std::set<int> parse_levels(const std::string& csv) {
    std::set<int> levels;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            levels.insert(std::stoi(item));
        } catch (const std::exception&) {
            throw InvalidRange("bad CD level '" + item + "'");
        }
    }
    return levels;
}

int cmd_gen(std::uint64_t seed, std::size_t count, std::size_t side, const std::string& out_dir,
            int strokes_min, int strokes_max) {
    const auto glyphs = synth_glyphs(seed, count, side, StrokeRange{strokes_min, strokes_max});
    fs::create_directories(out_dir);
    for (const auto& sample : glyphs) {
        const fs::path path = fs::path(out_dir) / (sample.label + ".pgm");
        save_image(sample.image, path, ImageFormat::pgm_ascii);
        std::cout << path.string() << "\n";
    }
    return kExitOk;
}

int cmd_roi(const std::string& in_path, const std::string& out_path, double threshold,
            const std::string& polarity) {
    const ImageGray img = load_auto(in_path);
    const ImageGray roi = roi_extract(img, threshold, parse_polarity(polarity));
    save_image(roi, out_path,
               fs::path(out_path).extension() == ".csv" ? ImageFormat::csv
                                                        : ImageFormat::pgm_ascii);
    std::cout << out_path << " " << roi.width << "x" << roi.height << "\n";
    return kExitOk;
}

int cmd_train_msm(const std::string& in_path, std::size_t epochs, int quant_decimals,
                  const std::string& noise, std::uint64_t seed, const std::string& out_dir) {
    const ImageGray img = load_auto(in_path);
    MsmConfig cfg;
    cfg.epochs = epochs;
    cfg.quant_decimals = quant_decimals;
    cfg.noise_mode = parse_noise(noise);
    cfg.seed = seed;
    const MsmState state = train(image_to_matrix(img), cfg);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    save_matrix_csv(state.reconstruction, dir / "reconstruction.csv");
    save_image(detail::normalized_image(state.reconstruction), dir / "reconstruction_raw.pgm",
               ImageFormat::pgm_ascii);
    save_image(detail::clamped_image(stage1_inverse(state.reconstruction)),
               dir / "reconstruction_input.pgm", ImageFormat::pgm_ascii);

    nlohmann::json summary;
    summary["epochs"] = epochs;
    summary["error_history"] = state.error_history;
    summary["metric_mae"] = reconstruction_error(state, ErrorMetric::mae);
    summary["metric_sse"] = reconstruction_error(state, ErrorMetric::sse);
    summary["noise_mode"] = to_string(cfg.noise_mode);
    summary["quant_decimals"] = quant_decimals;
    summary["seed"] = seed;
    std::ofstream out(dir / "msm_train.json");
    if (!out) throw IoError("cannot write msm_train.json");
    out << summary.dump(2) << "\n";
    std::cout << "msm trained: mae=" << reconstruction_error(state, ErrorMetric::mae)
              << " sse=" << reconstruction_error(state, ErrorMetric::sse) << "\n";
    return kExitOk;
}

int cmd_train_rbm(const std::string& in_path, std::size_t hidden, std::size_t cd_k,
                  std::size_t epochs, double lr, double momentum, double decay,
                  std::uint64_t seed, const std::string& out_dir) {
    const ImageGray img = load_auto(in_path);
    RbmTrainConfig cfg;
    cfg.num_hidden = hidden;
    cfg.cd_k = cd_k;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.momentum = momentum;
    cfg.weight_decay = decay;
    cfg.seed = seed;

    Matrix data(1, img.pixels.size());
    data.values() = img.pixels;
    const RbmTrainResult result = train_rbm(data, cfg);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    save_params(result.params, dir / "rbm_params.json");

    RngStream recon_rng(seed, 3);
    const auto hid = hidden_given_visible(result.params, data.values(), cfg.hidden_unit_kind,
                                          recon_rng);
    const auto vis = visible_given_hidden(result.params, hid.sample, recon_rng);
    const ImageGray recon = ImageGray::create(img.width, img.height, vis.mean);
    save_image(recon, dir / "reconstruction.pgm", ImageFormat::pgm_ascii);

    nlohmann::json summary;
    summary["cd_k"] = cd_k;
    summary["epochs"] = epochs;
    summary["error_history"] = result.error_history;
    summary["num_hidden"] = hidden;
    summary["seed"] = seed;
    std::ofstream out(dir / "rbm_train.json");
    if (!out) throw IoError("cannot write rbm_train.json");
    out << summary.dump(2) << "\n";
    std::cout << "rbm trained: final reconstruction error=" << result.error_history.back()
              << "\n";
    return kExitOk;
}

int run_report(const ExperimentReport& report, const std::string& report_path, bool audit) {
    emit_report(report, report_path);
    std::cout << "report: " << report_path << "\n";
    for (const auto& row : report.rows) {
        std::printf("  %-3s cd-%-4d %s\n", to_string(row.model), row.cd_level,
                    row.error.empty()
                        ? ("mae=" + std::to_string(row.metric_mae) +
                           " sse=" + std::to_string(row.metric_sse))
                              .c_str()
                        : ("ERROR " + row.error).c_str());
    }
    if (audit) {
        const AuditResult result = audit_report(report_path);
        std::cout << "audit: " << (result.ok ? "ok" : result.message) << "\n";
        if (!result.ok) return kExitValidation;
    }
    return kExitOk;
}

int cmd_verify() {
    bool all_ok = true;
    for (const VerifyCheck& check : run_verification()) {
        std::printf("[%s] %s%s%s\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.empty() ? "" : ": ", check.detail.c_str());
        all_ok = all_ok && check.passed;
    }
    return all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mode-synthesis experiments: MSM vs RBM reconstruction"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate synthetic glyphs");
    std::uint64_t gen_seed = 0;
    std::size_t gen_count = 10, gen_side = 28;
    int strokes_min = 3, strokes_max = 6;
    std::string gen_out;
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--count", gen_count, "Number of glyphs");
    gen->add_option("--side", gen_side, "Image side length (>= 8)");
    gen->add_option("--strokes-min", strokes_min, "Minimum strokes per glyph");
    gen->add_option("--strokes-max", strokes_max, "Maximum strokes per glyph");
    gen->add_option("--out", gen_out, "Output directory")->required();

    // roi
    auto* roi = app.add_subcommand("roi", "Crop to the foreground bounding box");
    std::string roi_in, roi_out, roi_polarity = "dark_on_light";
    double roi_threshold = 0.5;
    roi->add_option("--in", roi_in, "Input image (pgm/csv)")->required();
    roi->add_option("--out", roi_out, "Output image")->required();
    roi->add_option("--threshold", roi_threshold, "Foreground threshold in (0,1)");
    roi->add_option("--polarity", roi_polarity, "dark_on_light | light_on_dark");

    // train-msm
    auto* tmsm = app.add_subcommand("train-msm", "Train the mode synthesizer on one image");
    std::string tmsm_in, tmsm_out, tmsm_noise = "sample_stats";
    std::size_t tmsm_epochs = 1;
    int tmsm_quant = 2;
    std::uint64_t tmsm_seed = 0;
    tmsm->add_option("--in", tmsm_in, "Input image")->required();
    tmsm->add_option("--epochs", tmsm_epochs, "Synthesis epochs (>= 1)");
    tmsm->add_option("--quant-decimals", tmsm_quant, "Mode quantization decimals [0,12]");
    tmsm->add_option("--noise", tmsm_noise, "sample_stats | zero");
    tmsm->add_option("--seed", tmsm_seed, "RNG seed");
    tmsm->add_option("--out", tmsm_out, "Output directory")->required();

    // train-rbm
    auto* trbm = app.add_subcommand("train-rbm", "Train the RBM baseline on one image");
    std::string trbm_in, trbm_out;
    std::size_t trbm_hidden = 64, trbm_cdk = 1, trbm_epochs = 10;
    double trbm_lr = 0.001, trbm_momentum = 0.5, trbm_decay = 0.0002;
    std::uint64_t trbm_seed = 0;
    trbm->add_option("--in", trbm_in, "Input image")->required();
    trbm->add_option("--hidden", trbm_hidden, "Hidden units");
    trbm->add_option("--cd-k", trbm_cdk, "Gibbs steps per update");
    trbm->add_option("--epochs", trbm_epochs, "Training epochs");
    trbm->add_option("--lr", trbm_lr, "Learning rate");
    trbm->add_option("--momentum", trbm_momentum, "Initial momentum");
    trbm->add_option("--decay", trbm_decay, "Weight decay");
    trbm->add_option("--seed", trbm_seed, "RNG seed");
    trbm->add_option("--out", trbm_out, "Output directory")->required();

    // approach1 / approach2
    std::string a_in, a_report, a_dump, a_levels = "1,500";
    std::vector<std::string> a_inputs;
    std::size_t a_trials = 2, a_hidden = 64, a_rbm_epochs = 1;
    std::uint64_t a_seed = 0;
    bool a_audit = false;

    auto* a1 = app.add_subcommand("approach1", "Single-dialect protocol (RBM vs MSM)");
    a1->add_option("--in", a_in, "Input image")->required();
    a1->add_option("--cd", a_levels, "Comma-separated CD levels");
    a1->add_option("--trials", a_trials, "Trials per row (>= 2)");
    a1->add_option("--seed", a_seed, "Base seed");
    a1->add_option("--report", a_report, "Report JSON path")->required();
    a1->add_option("--dump-images", a_dump, "Directory for reconstruction dumps");
    a1->add_option("--rbm-hidden", a_hidden, "RBM hidden units");
    a1->add_option("--rbm-epochs", a_rbm_epochs, "RBM epochs per level");
    a1->add_flag("--audit", a_audit, "Self-audit the report after writing");

    auto* a2 = app.add_subcommand("approach2", "Mixed-dialect protocol on concatenated inputs");
    a2->add_option("--inputs", a_inputs, "Input images (2+)")->required()->expected(-2);
    a2->add_option("--cd", a_levels, "Comma-separated CD levels");
    a2->add_option("--trials", a_trials, "Trials per row (>= 2)");
    a2->add_option("--seed", a_seed, "Base seed");
    a2->add_option("--report", a_report, "Report JSON path")->required();
    a2->add_option("--dump-images", a_dump, "Directory for reconstruction dumps");
    a2->add_option("--rbm-hidden", a_hidden, "RBM hidden units");
    a2->add_option("--rbm-epochs", a_rbm_epochs, "RBM epochs per level");
    a2->add_flag("--audit", a_audit, "Self-audit the report after writing");

    auto* verify = app.add_subcommand("verify", "Run the built-in oracle suites");

    try {
        app.parse(argc, argv);

        if (gen->parsed())
            return cmd_gen(gen_seed, gen_count, gen_side, gen_out, strokes_min, strokes_max);
        if (roi->parsed()) return cmd_roi(roi_in, roi_out, roi_threshold, roi_polarity);
        if (tmsm->parsed())
            return cmd_train_msm(tmsm_in, tmsm_epochs, tmsm_quant, tmsm_noise, tmsm_seed,
                                 tmsm_out);
        if (trbm->parsed())
            return cmd_train_rbm(trbm_in, trbm_hidden, trbm_cdk, trbm_epochs, trbm_lr,
                                 trbm_momentum, trbm_decay, trbm_seed, trbm_out);
        if (a1->parsed() || a2->parsed()) {
            ExperimentOptions opts;
            opts.rbm_hidden = a_hidden;
            opts.rbm_epochs = a_rbm_epochs;
            opts.dump_dir = a_dump;
            const std::set<int> levels = parse_levels(a_levels);
            ExperimentReport report;
            if (a1->parsed()) {
                report = run_approach1(load_auto(a_in), levels, a_trials, a_seed, opts);
            } else {
                std::vector<ImageGray> images;
                for (const auto& path : a_inputs) images.push_back(load_auto(path));
                report = run_approach2(images, levels, a_trials, a_seed, opts);
            }
            return run_report(report, a_report, a_audit);
        }
        if (verify->parsed()) return cmd_verify();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const UnsupportedFormat& e) {
        std::cerr << "unsupported format: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
