// Command line front end: generate synthetic clouds, run the decimation
// filters on PCD files, and benchmark the implementations.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "decim/decim.hpp"

namespace {

struct InputArgs {
    std::string input_path;
    std::string scene = "corridor";
    std::size_t points = 1000000;
    std::vector<float> extent{20.0f, 2.0f, 2.5f};
    float noise_sigma = 0.01f;
    std::uint64_t scene_seed = 1;
};

void add_input_options(CLI::App& cmd, InputArgs& args) {
    auto* input = cmd.add_option("--input", args.input_path, "Input cloud (.pcd)");
    cmd.add_option("--scene", args.scene,
                   "Synthetic scene when no --input is given: corridor, uniform-box or "
                   "gaussian-clusters")
        ->excludes(input);
    cmd.add_option("--points", args.points, "Synthetic point count")->capture_default_str();
    cmd.add_option("--extent", args.extent, "Synthetic extents in meters (x y z)")
        ->expected(3)
        ->capture_default_str();
    cmd.add_option("--noise-sigma", args.noise_sigma, "Synthetic noise sigma in meters")
        ->capture_default_str();
    cmd.add_option("--scene-seed", args.scene_seed, "Synthetic generator seed")
        ->capture_default_str();
}

decim::SceneSpec to_scene_spec(const InputArgs& args) {
    decim::SceneSpec spec;
    spec.kind = decim::parse_scene_kind(args.scene);
    spec.extents = {args.extent[0], args.extent[1], args.extent[2]};
    spec.point_count = args.points;
    spec.noise_sigma = args.noise_sigma;
    spec.seed = args.scene_seed;
    return spec;
}

decim::PointCloud load_cloud(const InputArgs& args) {
    if (!args.input_path.empty()) {
        std::size_t dropped = 0;
        decim::PointCloud cloud = decim::read_pcd(args.input_path, &dropped);
        if (dropped > 0)
            std::fprintf(stderr, "warning: dropped %zu points with non-finite coordinates\n",
                         dropped);
        return cloud;
    }
    return decim::gen_synthetic(to_scene_spec(args));
}

decim::PcdMode parse_mode(const std::string& mode) {
    if (mode == "ascii")
        return decim::PcdMode::ascii;
    if (mode == "binary")
        return decim::PcdMode::binary;
    throw decim::ConfigError("unknown PCD mode '" + mode + "', expected ascii or binary");
}

int run_gen(const InputArgs& input, const std::string& output, const std::string& mode) {
    const decim::PointCloud cloud = decim::gen_synthetic(to_scene_spec(input));
    decim::write_pcd(cloud, output, parse_mode(mode));
    std::printf("wrote %zu points to %s (%s)\n", cloud.size(), output.c_str(), mode.c_str());
    return 0;
}

struct FilterArgs {
    float resolution = 0.05f;
    float radius = 0.0f;  // 0 = auto
    int threshold = 0;
    std::size_t batch_size = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 = all cores
    std::string impl = "bucket-parallel";
    std::string output;
    std::string mode = "binary";
};

int run_filter(const InputArgs& input, const FilterArgs& args) {
    const decim::PointCloud cloud = load_cloud(input);
    if (cloud.empty())
        throw decim::ConfigError("the input cloud is empty");
    const decim::Aabb box = decim::compute_aabb(cloud);
    const float max_extent = std::max({box.max.x - box.min.x, box.max.y - box.min.y,
                                       box.max.z - box.min.z});

    decim::PointCloud result;
    if (args.impl == "voxel-centroid") {
        const double t0 = decim::monotonic_seconds();
        result = decim::voxel_centroid_filter(cloud, decim::LeafSize{args.resolution});
        const double t1 = decim::monotonic_seconds();
        std::printf("voxel-centroid: %zu -> %zu points in %.3f ms (leaf %.4g m)\n",
                    cloud.size(), result.size(), (t1 - t0) * 1000.0,
                    static_cast<double>(args.resolution));
    } else if (args.impl == "bucket-parallel" || args.impl == "bucket-serial") {
        decim::FilterConfig cfg;
        cfg.n = decim::resolution_to_exponent(max_extent, args.resolution);
        cfg.radius = args.radius > 0 ? args.radius
                                     : 0.9f * decim::max_admissible_radius(box, cfg.n);
        cfg.threshold = args.threshold;
        cfg.batch_size = args.batch_size;
        cfg.seed = args.seed;
        const unsigned threads = args.impl == "bucket-serial" ? 1 : args.threads;
        std::printf("grid: n=%d (%d cells per axis), radius %.4g m, threshold %d\n", cfg.n,
                    1 << cfg.n, static_cast<double>(cfg.radius), cfg.threshold);

        decim::DecimateResult res = decim::decimate(cloud, cfg, threads);
        result = std::move(res.cloud);
        const decim::FilterStats& st = res.stats;
        std::printf("%s: %zu -> %zu points, %zu deleted in %zu passes\n", args.impl.c_str(),
                    st.input_size, st.output_size, st.deleted_total, st.passes);
        std::printf("phases (ms): normalize %.3f, table %.3f, mark %.3f, select %.3f, "
                    "compact %.3f, total %.3f\n",
                    st.phases.normalize_s * 1000.0, st.phases.build_table_s * 1000.0,
                    st.phases.mark_s * 1000.0, st.phases.select_s * 1000.0,
                    st.phases.compact_s * 1000.0, st.phases.total_s * 1000.0);
    } else {
        throw decim::ConfigError("unknown impl '" + args.impl + "'");
    }

    if (!args.output.empty()) {
        decim::write_pcd(result, args.output, parse_mode(args.mode));
        std::printf("wrote %zu points to %s (%s)\n", result.size(), args.output.c_str(),
                    args.mode.c_str());
    }
    return 0;
}

struct BenchArgs {
    std::vector<float> resolutions{0.02f, 0.04f, 0.05f};
    std::vector<unsigned> threads{0};
    std::vector<std::string> impls{"bucket-parallel", "bucket-serial", "voxel-centroid"};
    int reps = 10;
    int warmup = 2;
    float radius = 0.0f;
    int threshold = 5;
    std::size_t batch_size = 1000;
    std::uint64_t seed = 0;
    std::string csv_path;
};

int run_bench_cmd(const InputArgs& input, const BenchArgs& args) {
    const decim::PointCloud cloud = load_cloud(input);
    decim::BenchConfig cfg;
    cfg.resolutions = args.resolutions;
    cfg.thread_counts = args.threads;
    cfg.impls = args.impls;
    cfg.repetitions = args.reps;
    cfg.warmup = args.warmup;
    cfg.radius = args.radius;
    cfg.threshold = args.threshold;
    cfg.batch_size = args.batch_size;
    cfg.seed = args.seed;
    cfg.log = &std::cerr;

    const std::vector<decim::BenchRecord> records = decim::run_bench(cloud, cfg);
    std::fputs(decim::format_table(records).c_str(), stdout);
    if (!args.csv_path.empty()) {
        decim::emit_csv(records, args.csv_path);
        std::printf("wrote %s\n", args.csv_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point cloud decimation via cubic subspace bucketing"};
    app.require_subcommand(1);

    InputArgs gen_input;
    std::string gen_output;
    std::string gen_mode = "binary";
    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic cloud as PCD");
    gen->add_option("--kind", gen_input.scene, "corridor, uniform-box or gaussian-clusters")
        ->capture_default_str();
    gen->add_option("--points", gen_input.points, "Point count")->capture_default_str();
    gen->add_option("--extent", gen_input.extent, "Extents in meters (x y z)")
        ->expected(3)
        ->capture_default_str();
    gen->add_option("--noise-sigma", gen_input.noise_sigma, "Noise sigma in meters")
        ->capture_default_str();
    gen->add_option("--seed", gen_input.scene_seed, "Generator seed")->capture_default_str();
    gen->add_option("--output", gen_output, "Output path (.pcd)")->required();
    gen->add_option("--mode", gen_mode, "ascii or binary")->capture_default_str();

    InputArgs filter_input;
    FilterArgs filter_args;
    CLI::App* filter = app.add_subcommand("filter", "Decimate a cloud");
    add_input_options(*filter, filter_input);
    filter->add_option("--resolution", filter_args.resolution,
                       "Target cell edge in meters; picks the grid exponent")
        ->capture_default_str();
    filter->add_option("--radius", filter_args.radius,
                       "Neighbor radius in meters (0 = auto from the grid)")
        ->capture_default_str();
    filter->add_option("--threshold", filter_args.threshold,
                       "Keep points with at most this many neighbors")
        ->capture_default_str();
    filter->add_option("--batch-size", filter_args.batch_size,
                       "Random deletions per pass while over the threshold")
        ->capture_default_str();
    filter->add_option("--seed", filter_args.seed, "Deletion RNG seed")->capture_default_str();
    filter->add_option("--threads", filter_args.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    filter->add_option("--impl", filter_args.impl,
                       "bucket-parallel, bucket-serial or voxel-centroid")
        ->capture_default_str();
    filter->add_option("--output", filter_args.output, "Write the result here (.pcd)");
    filter->add_option("--mode", filter_args.mode, "Output mode: ascii or binary")
        ->capture_default_str();

    InputArgs bench_input;
    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Benchmark the implementations");
    add_input_options(*bench, bench_input);
    bench->add_option("--resolutions", bench_args.resolutions, "Cell edges in meters")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--threads", bench_args.threads,
                      "Thread counts for bucket-parallel (0 = all cores)")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--impls", bench_args.impls, "Implementations to run")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--reps", bench_args.reps, "Timed repetitions per combination")
        ->capture_default_str();
    bench->add_option("--warmup", bench_args.warmup, "Unrecorded warmup runs")
        ->capture_default_str();
    bench->add_option("--radius", bench_args.radius,
                      "Neighbor radius in meters (0 = auto per resolution)")
        ->capture_default_str();
    bench->add_option("--threshold", bench_args.threshold, "Neighbor threshold")
        ->capture_default_str();
    bench->add_option("--batch-size", bench_args.batch_size, "Deletions per pass")
        ->capture_default_str();
    bench->add_option("--seed", bench_args.seed, "Deletion RNG seed")->capture_default_str();
    bench->add_option("--csv", bench_args.csv_path, "Also write results as CSV");

    try {
        app.parse(argc, argv);
        if (gen->parsed())
            return run_gen(gen_input, gen_output, gen_mode);
        if (filter->parsed())
            return run_filter(filter_input, filter_args);
        if (bench->parsed())
            return run_bench_cmd(bench_input, bench_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const decim::PcdParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const decim::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const decim::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
