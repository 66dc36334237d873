// modspike: spike-stream modulo imaging pipeline driver.

#include <modspike/modspike.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace modspike;

namespace {

std::size_t thread_count()
{
    if (const char* env = std::getenv("MODSPIKE_THREADS")) {
        char* end = nullptr;
        const unsigned long n = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && n > 0)
            return n;
    }
    return 1;
}

std::string format_metric(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string frame_name(std::size_t j)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04zu.lhdr", j);
    return buf;
}

// Frames are independent; results land in input order regardless of thread count.
std::vector<UnwrapResult> unwrap_all(const ModuloSequence& seq)
{
    std::vector<UnwrapResult> results(seq.frames.size());
    const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(1, seq.frames.size()));
    if (workers <= 1) {
        for (std::size_t j = 0; j < seq.frames.size(); ++j)
            results[j] = unwrap_poisson(seq.frames[j]);
        return results;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t j = t; j < seq.frames.size(); j += workers)
                    results[j] = unwrap_poisson(seq.frames[j]);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return results;
}

std::string residual_line(std::size_t j, const UnwrapResult& r)
{
    std::ostringstream os;
    os << "frame=" << j << " l_mod=" << format_metric(r.residuals.l_mod)
       << " l_grad=" << format_metric(r.residuals.l_grad) << " l_lap=" << format_metric(r.residuals.l_lap)
       << " est_l_mod=" << format_metric(r.estimate_residuals.l_mod)
       << " est_l_grad=" << format_metric(r.estimate_residuals.l_grad)
       << " est_l_lap=" << format_metric(r.estimate_residuals.l_lap) << " converged=" << (r.converged ? 1 : 0);
    return os.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error("cannot create " + path.string());
    out << text;
}

IrradianceClip simulate_clip(const HdrImage& scene, const GlobalMotion& motion, const SimulationSettings& settings)
{
    IrradianceClip clip = synthesize_clip(scene, motion, settings.sensor);
    if (settings.mosaic)
        clip = mosaic_sample(clip);
    return clip;
}

struct EncodeOptions
{
    std::size_t window = 25;
    std::size_t stride = 20;
    double gain = 15.0;
    unsigned bits = 8;

    EncoderConfig config() const { return {window, stride, gain, bits}; }
};

void add_encode_flags(CLI::App* cmd, EncodeOptions& opt)
{
    cmd->add_option("--window", opt.window, "Spike frames per modulo frame (W)")->capture_default_str();
    cmd->add_option("--stride", opt.stride, "Spike frames between modulo frames (P)")->capture_default_str();
    cmd->add_option("--gain", opt.gain, "Per-pixel amplification g")->capture_default_str();
    cmd->add_option("--bits", opt.bits, "Modulo bit depth N")->capture_default_str();
}

std::string eval_report(const HdrImage& ref, const HdrImage& test, double mu, double peak)
{
    std::ostringstream os;
    os << "psnr_l=" << format_metric(psnr_linear(ref, test, peak)) << '\n';
    if (ref.height() >= 11 && ref.width() >= 11)
        os << "ssim_l=" << format_metric(ssim_linear(ref, test, peak)) << '\n';
    else
        os << "ssim_l=nan\n";
    os << "psnr_mu=" << format_metric(psnr_mu(ref, test, mu, peak)) << '\n';
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exposure-decoupled modulo imaging from spike streams"};
    app.require_subcommand(1);

    // simulate
    std::string scene_path, motion_spec = "none", config_arg, spikes_out;
    auto* simulate = app.add_subcommand("simulate", "Scene -> integrate-and-fire spike stream (SPKB)");
    simulate->add_option("--scene", scene_path, "Input LHDR radiance image")->required();
    simulate->add_option("--motion", motion_spec, "none | translate:vx,vy | affine:vx,vy,omega,scale");
    simulate->add_option("--config", config_arg, "key=value list or file (eta,q,f,T,K,shot_noise,seed,reset,mosaic)");
    simulate->add_option("--out", spikes_out, "Output SPKB file")->required();

    // encode
    std::string encode_in, encode_out;
    EncodeOptions enc;
    auto* encode = app.add_subcommand("encode", "Spike stream -> sliding-window modulo frames (MODQ)");
    encode->add_option("--in", encode_in, "Input SPKB file")->required();
    encode->add_option("--out", encode_out, "Output MODQ file")->required();
    add_encode_flags(encode, enc);

    // unwrap
    std::string unwrap_in, unwrap_dir;
    auto* unwrap = app.add_subcommand("unwrap", "Modulo frames -> per-frame HDR (LHDR) + residual report");
    unwrap->add_option("--in", unwrap_in, "Input MODQ file")->required();
    unwrap->add_option("--out-dir", unwrap_dir, "Output directory")->required();

    // eval
    std::string ref_path, test_path;
    double mu = kDefaultMu;
    double peak = kDefaultPeak;
    auto* eval = app.add_subcommand("eval", "Compare two LHDR images");
    eval->add_option("--ref", ref_path, "Reference LHDR")->required();
    eval->add_option("--test", test_path, "Test LHDR")->required();
    eval->add_option("--mu", mu, "mu-law compression")->capture_default_str();
    eval->add_option("--peak", peak, "Linear peak value")->capture_default_str();

    // bandwidth
    std::size_t bw_height = 1000, bw_width = 1000, bw_channels = 1, bw_stride = 20;
    std::uint64_t bw_rate = 20000;
    unsigned bw_bits = 8;
    bool bw_mosaic = false;
    auto* bandwidth = app.add_subcommand("bandwidth", "Raw spike vs modulo output link budget");
    bandwidth->add_option("--height", bw_height)->capture_default_str();
    bandwidth->add_option("--width", bw_width)->capture_default_str();
    bandwidth->add_option("--channels", bw_channels, "Channels when not using the mosaic")->capture_default_str();
    bandwidth->add_option("--readout-hz", bw_rate)->capture_default_str();
    bandwidth->add_option("--bits", bw_bits)->capture_default_str();
    bandwidth->add_option("--stride", bw_stride)->capture_default_str();
    bandwidth->add_flag("--mosaic", bw_mosaic, "Non-Bayer 2x2 macro-pixel output at half resolution");

    // pipeline
    std::string pipe_scene, pipe_dir, pipe_motion = "none", pipe_config;
    std::uint64_t pipe_seed = 0;
    std::size_t pipe_size = 64;
    EncodeOptions pipe_enc;
    double pipe_mu = kDefaultMu;
    double pipe_peak = kDefaultPeak;
    auto* pipeline = app.add_subcommand("pipeline", "simulate -> encode -> unwrap -> eval in one run");
    pipeline->add_option("--scene", pipe_scene, "Input LHDR (default: synthetic smooth scene)");
    pipeline->add_option("--size", pipe_size, "Synthetic scene side length")->capture_default_str();
    pipeline->add_option("--seed", pipe_seed, "Seed for the scene and the sensor noise")->capture_default_str();
    pipeline->add_option("--motion", pipe_motion)->capture_default_str();
    pipeline->add_option("--config", pipe_config, "key=value list or file");
    pipeline->add_option("--out-dir", pipe_dir)->required();
    pipeline->add_option("--mu", pipe_mu)->capture_default_str();
    pipeline->add_option("--peak", pipe_peak)->capture_default_str();
    add_encode_flags(pipeline, pipe_enc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*simulate) {
            const HdrImage scene = read_hdr(scene_path);
            const SimulationSettings settings = load_simulation_settings(config_arg);
            const IrradianceClip clip = simulate_clip(scene, parse_motion(motion_spec), settings);
            const SpikeStream stream = integrate_and_fire(clip, settings.sensor);
            write_spikes(spikes_out, stream);
            std::cout << "frames=" << stream.frame_count() << "\nheight=" << stream.height()
                      << "\nwidth=" << stream.width() << "\nchannels=" << stream.channels()
                      << "\nreadout_rate=" << stream.readout_rate() << '\n';
        } else if (*encode) {
            const SpikeStream stream = read_spikes(encode_in);
            const ModuloSequence seq = encode_stream(stream, enc.config());
            write_modulo(encode_out, seq);
            std::cout << "frames=" << seq.frames.size() << "\neffective_rate=" << format_metric(seq.effective_rate())
                      << '\n';
        } else if (*unwrap) {
            const ModuloSequence seq = read_modulo(unwrap_in);
            fs::create_directories(unwrap_dir);
            const auto results = unwrap_all(seq);
            std::string report;
            for (std::size_t j = 0; j < results.size(); ++j) {
                write_hdr(fs::path(unwrap_dir) / frame_name(j), results[j].hdr);
                report += residual_line(j, results[j]) + '\n';
            }
            write_text(fs::path(unwrap_dir) / "residuals.txt", report);
            std::cout << report;
        } else if (*eval) {
            std::cout << eval_report(read_hdr(ref_path), read_hdr(test_path), mu, peak);
        } else if (*bandwidth) {
            const BandwidthReport r =
                bandwidth_report(bw_height, bw_width, bw_channels, bw_rate, bw_bits, bw_stride, bw_mosaic);
            std::cout << "raw_bps=" << r.raw_bps << "\nmodulo_bps=" << format_metric(r.modulo_bps)
                      << "\nraw_gbps=" << format_metric(BandwidthReport::to_gbps(static_cast<double>(r.raw_bps)))
                      << "\nmodulo_gbps=" << format_metric(BandwidthReport::to_gbps(r.modulo_bps))
                      << "\nreduction_ratio=" << format_metric(r.reduction_ratio) << "\nencoded_shape="
                      << r.encoded_height << 'x' << r.encoded_width << 'x' << r.encoded_channels << '\n';
        } else if (*pipeline) {
            SimulationSettings base;
            base.sensor.rng_seed = pipe_seed;
            const SimulationSettings settings = load_simulation_settings(pipe_config, base);
            const SensorConfig& sensor = settings.sensor;
            HdrImage scene;
            if (pipe_scene.empty()) {
                // keep at most one firing per readout interval at the brightest pixel
                const double peak_radiance = 0.95 * sensor.threshold * sensor.readout_rate / sensor.conversion_gain;
                scene = smooth_scene(pipe_size, pipe_size, 3, peak_radiance, pipe_seed);
            } else {
                scene = read_hdr(pipe_scene);
            }
            fs::create_directories(pipe_dir);
            const fs::path dir(pipe_dir);

            const IrradianceClip clip = simulate_clip(scene, parse_motion(pipe_motion), settings);
            const SpikeStream stream = integrate_and_fire(clip, sensor);
            write_spikes(dir / "spikes.spkb", stream);

            const EncoderConfig cfg = pipe_enc.config();
            const ModuloSequence seq = encode_stream(stream, cfg);
            write_modulo(dir / "modulo.modq", seq);

            const auto reference = ideal_counts(clip, aligned_query(cfg, sensor));

            const auto results = unwrap_all(seq);
            std::string report;
            double psnr_sum = 0.0, ssim_sum = 0.0, psnr_mu_sum = 0.0;
            std::size_t finite = 0;
            for (std::size_t j = 0; j < results.size(); ++j) {
                write_hdr(dir / frame_name(j), results[j].hdr);
                write_hdr(dir / ("reference_" + frame_name(j).substr(6)), reference[j]);
                const double p = psnr_linear(reference[j], results[j].hdr, pipe_peak);
                const double pm = psnr_mu(reference[j], results[j].hdr, pipe_mu, pipe_peak);
                const double s = results[j].hdr.height() >= 11 && results[j].hdr.width() >= 11
                                     ? ssim_linear(reference[j], results[j].hdr, pipe_peak)
                                     : std::nan("");
                report += residual_line(j, results[j]) + " psnr_l=" + format_metric(p) +
                          " ssim_l=" + format_metric(s) + " psnr_mu=" + format_metric(pm) + '\n';
                if (std::isfinite(p) && std::isfinite(pm)) {
                    psnr_sum += p;
                    psnr_mu_sum += pm;
                    ++finite;
                }
                ssim_sum += s;
            }
            std::ostringstream summary;
            summary << "spike_frames=" << stream.frame_count() << "\nmodulo_frames=" << seq.frames.size()
                    << "\neffective_rate=" << format_metric(seq.effective_rate())
                    << "\nmean_psnr_l=" << (finite ? format_metric(psnr_sum / finite) : "inf")
                    << "\nmean_ssim_l=" << format_metric(results.empty() ? std::nan("") : ssim_sum / results.size())
                    << "\nmean_psnr_mu=" << (finite ? format_metric(psnr_mu_sum / finite) : "inf") << '\n';
            write_text(dir / "report.txt", report + summary.str());
            std::cout << summary.str();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
