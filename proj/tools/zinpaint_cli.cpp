#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zinpaint/engine.hpp"
#include "zinpaint/io_image.hpp"
#include "zinpaint/io_index.hpp"

namespace {

using zinpaint::inpaint_config;
using zinpaint::inpaint_result;

struct cli_options {
    std::string image_path;
    std::string mask_path;
    std::string out_path;
    std::string stats_path;
    std::string report_path;
    std::string save_index_path;
    std::string load_index_path;
    std::string sweep_spec;
    std::string norm = "l2";
    inpaint_config cfg;
};

zinpaint::norm_kind parse_norm(const std::string& s) {
    if (s == "l2") return zinpaint::norm_kind::l2;
    if (s == "l1") return zinpaint::norm_kind::l1;
    throw std::invalid_argument("norm must be l2 or l1");
}

std::string format_seconds(double s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", s);
    return buf;
}

void write_stats_csv(const std::string& path, const std::vector<zinpaint::iteration_record>& recs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write stats file: " + path);
    out << "iteration,target_x,target_y,layout,source_x,source_y,candidates,z_error,bf_error,"
           "elapsed_s\n";
    char buf[256];
    for (const auto& r : recs) {
        std::string bf;
        if (r.bf_error) {
            std::snprintf(buf, sizeof(buf), "%.6f", *r.bf_error);
            bf = buf;
        }
        std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%u,%u,%u,%zu,%.6f,%s,%.6f\n", r.iteration,
                      r.target.x, r.target.y, r.layout_id, r.source.x, r.source.y, r.candidates,
                      r.z_error, bf.c_str(), r.elapsed_seconds);
        out << buf;
    }
}

nlohmann::json config_json(const cli_options& opt) {
    const auto& idx = opt.cfg.index;
    return {{"patch_size", idx.patch_size},     {"coverage", idx.coverage},
            {"dims", idx.dims},                 {"knn", idx.knn},
            {"mu", idx.mu},                     {"nu", idx.nu},
            {"norm", opt.norm},                 {"workers", opt.cfg.workers},
            {"oracle", opt.cfg.oracle},         {"brute_force", opt.cfg.brute_force}};
}

void write_report(const cli_options& opt, const inpaint_result& result, double total_seconds) {
    nlohmann::json j;
    j["config"] = config_json(opt);
    j["dictionary_size"] = result.stats.dictionary_size;
    j["index_build_seconds"] = result.stats.index_build_seconds;
    j["sort_seconds"] = result.stats.sort_seconds;
    j["build_wall_seconds"] = result.stats.build_wall_seconds;
    j["inpaint_seconds"] = result.stats.inpaint_seconds;
    j["total_seconds"] = total_seconds;
    j["iterations"] = result.stats.iterations;
    if (result.stats.mean_acceleration_error)
        j["mean_ae_percent"] = 100.0 * *result.stats.mean_acceleration_error;
    else
        j["mean_ae_percent"] = nullptr;
    j["ae_excluded_iterations"] = result.stats.ae_excluded;
    j["outputs"] = {{"image", opt.out_path}, {"stats", opt.stats_path}};

    std::ofstream out(opt.report_path);
    if (!out) throw std::runtime_error("cannot write report file: " + opt.report_path);
    out << j.dump(2) << "\n";
}

int run_single(cli_options& opt) {
    const auto image = zinpaint::load_image(opt.image_path);
    const auto mask = zinpaint::load_mask(opt.mask_path);
    if (image.width != mask.width || image.height != mask.height)
        throw std::invalid_argument("image and mask dimensions differ");

    const auto t0 = std::chrono::steady_clock::now();
    inpaint_result result;
    if (!opt.load_index_path.empty()) {
        auto mi = zinpaint::load_multi_index(opt.load_index_path);
        result = zinpaint::inpaint(image, mask, mi, opt.cfg);
        if (!opt.save_index_path.empty()) zinpaint::save_multi_index(mi, opt.save_index_path);
    } else if (!opt.save_index_path.empty()) {
        auto mi = zinpaint::multi_index::build(image, mask, opt.cfg.index, nullptr);
        zinpaint::save_multi_index(mi, opt.save_index_path);
        result = zinpaint::inpaint(image, mask, mi, opt.cfg);
        result.stats.build_wall_seconds = 0.0;  // built above, reported via index file
    } else {
        result = zinpaint::inpaint(image, mask, opt.cfg);
    }
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!opt.out_path.empty()) zinpaint::save_image(result.image, opt.out_path);
    if (!opt.stats_path.empty()) write_stats_csv(opt.stats_path, result.records);
    if (!opt.report_path.empty()) write_report(opt, result, total);

    std::cout << "inpainted " << result.stats.iterations << " patches over "
              << result.stats.dictionary_size << " dictionary entries in "
              << format_seconds(total) << " s";
    if (result.stats.mean_acceleration_error)
        std::cout << ", mean AE " << format_seconds(100.0 * *result.stats.mean_acceleration_error)
                  << "%";
    std::cout << "\n";
    return 0;
}

struct sweep_axis {
    std::string name;
    std::vector<std::string> values;
};

sweep_axis parse_sweep(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--sweep expects AXIS=v1,v2,...");
    sweep_axis axis;
    axis.name = spec.substr(0, eq);
    std::stringstream ss(spec.substr(eq + 1));
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) axis.values.push_back(token);
    }
    if (axis.values.empty()) throw std::invalid_argument("--sweep needs at least one value");
    const std::string valid[] = {"D", "k", "mu", "nu", "c", "norm"};
    if (std::find(std::begin(valid), std::end(valid), axis.name) == std::end(valid))
        throw std::invalid_argument("sweep axis must be one of D, k, mu, nu, c, norm");
    return axis;
}

std::string suffixed_path(const std::string& path, const std::string& axis,
                          const std::string& value) {
    const auto dot = path.find_last_of('.');
    const std::string stem = dot == std::string::npos ? path : path.substr(0, dot);
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    return stem + "_" + axis + value + ext;
}

int run_sweep(cli_options& opt) {
    const auto axis = parse_sweep(opt.sweep_spec);
    const auto image = zinpaint::load_image(opt.image_path);
    const auto mask = zinpaint::load_mask(opt.mask_path);
    if (image.width != mask.width || image.height != mask.height)
        throw std::invalid_argument("image and mask dimensions differ");

    std::ostringstream csv;
    csv << "value,seconds,mean_ae_percent\n";
    for (const auto& value : axis.values) {
        cli_options run_opt = opt;
        if (axis.name == "D") run_opt.cfg.index.dims = std::stoi(value);
        else if (axis.name == "k") run_opt.cfg.index.knn = std::stoi(value);
        else if (axis.name == "mu") run_opt.cfg.index.mu = static_cast<std::uint32_t>(std::stoul(value));
        else if (axis.name == "nu") run_opt.cfg.index.nu = static_cast<std::uint32_t>(std::stoul(value));
        else if (axis.name == "c") run_opt.cfg.index.coverage = std::stod(value);
        else run_opt.cfg.index.norm = parse_norm(value);

        const auto t0 = std::chrono::steady_clock::now();
        const auto result = zinpaint::inpaint(image, mask, run_opt.cfg);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        if (!opt.out_path.empty())
            zinpaint::save_image(result.image, suffixed_path(opt.out_path, axis.name, value));

        csv << value << "," << format_seconds(seconds) << ",";
        if (result.stats.mean_acceleration_error) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.4f", 100.0 * *result.stats.mean_acceleration_error);
            csv << buf;
        }
        csv << "\n";
    }

    std::cout << csv.str();
    if (!opt.stats_path.empty()) {
        std::ofstream out(opt.stats_path);
        if (!out) throw std::runtime_error("cannot write stats file: " + opt.stats_path);
        out << csv.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    cli_options opt;
    CLI::App app{"Exemplar-based inpainting accelerated by multi-index z-curve patch search"};
    app.add_option("--image", opt.image_path, "input image (png/ppm/pgm)")->required();
    app.add_option("--mask", opt.mask_path, "mask image; values >= 128 are known, below unknown")
        ->required();
    app.add_option("--out", opt.out_path, "output image path");
    app.add_option("--patch-size", opt.cfg.index.patch_size, "patch size K (odd)");
    app.add_option("--dims", opt.cfg.index.dims, "principal dimensions D");
    app.add_option("--knn", opt.cfg.index.knn, "candidate set size k");
    app.add_option("--mu", opt.cfg.index.mu, "leaf threshold for the recursive search");
    app.add_option("--nu", opt.cfg.index.nu, "minimum interval length for parallel traversal");
    app.add_option("--coverage", opt.cfg.index.coverage, "fraction c of patch pixels per index");
    app.add_option("--norm", opt.norm, "cost norm: l2 or l1");
    app.add_option("--workers", opt.cfg.workers, "worker threads (default: logical cores)");
    app.add_flag("--oracle", opt.cfg.oracle, "run the brute-force oracle per iteration");
    app.add_flag("--brute-force", opt.cfg.brute_force,
                 "replace the index query with a full dictionary scan");
    app.add_option("--stats", opt.stats_path, "per-iteration CSV (sweep table in sweep mode)");
    app.add_option("--save-index", opt.save_index_path, "write the built indices to a file");
    app.add_option("--load-index", opt.load_index_path, "load prebuilt indices from a file");
    app.add_option("--sweep", opt.sweep_spec, "parameter sweep, e.g. mu=16,64,256,1024");
    app.add_option("--report", opt.report_path, "structured JSON run report");

    CLI11_PARSE(app, argc, argv);

    try {
        opt.cfg.index.norm = parse_norm(opt.norm);
        if (!opt.sweep_spec.empty()) return run_sweep(opt);
        if (opt.out_path.empty())
            throw std::invalid_argument("--out is required outside sweep mode");
        return run_single(opt);
    } catch (const zinpaint::empty_dictionary_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
