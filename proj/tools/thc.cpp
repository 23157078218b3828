// Command-line surface for the talking-head codec: encode, decode, simulate,
// evaluate, ablate, plus a synthetic clip generator for desk-scale runs.
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 stream error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "thc/thc.hpp"

namespace {

struct EncodeArgs {
    std::string input;
    std::string output;
    std::string keypoints;
    std::string pose;
    std::string masks;
    std::string ledger;
    int interp = 1;
    int kp = 10;
    int sr = 2;
    int patch = 64;
    int fps = 30;
    double gamma = 15.0;
    double dbg = 0.05;
    unsigned cooldown = 0;
};

int cmd_encode(const EncodeArgs& a) {
    thc::EncodeInputs inputs;
    if (a.input.size() > 4 && a.input.substr(a.input.size() - 4) == ".y4m")
        inputs.frames = thc::read_y4m(a.input);
    else
        inputs.frames = thc::read_frame_dir(a.input);

    inputs.config.width = inputs.frames[0].width;
    inputs.config.height = inputs.frames[0].height;
    inputs.config.num_keypoints = a.kp;
    inputs.config.interp_frames = a.interp;
    inputs.config.sr_factor = a.sr;
    inputs.config.sr_patch = a.patch;
    inputs.config.fps = a.fps;
    inputs.config.pivot_policy.gamma_yaw = a.gamma;
    inputs.config.pivot_policy.gamma_roll = a.gamma;
    inputs.config.pivot_policy.gamma_pitch = a.gamma;
    inputs.config.pivot_policy.d_bg = a.dbg;
    inputs.config.pivot_policy.cooldown_frames = a.cooldown;

    inputs.keypoints = thc::read_keypoint_file(a.keypoints, inputs.frames.size(), a.kp);
    if (!a.pose.empty()) {
        inputs.poses = thc::read_pose_file(a.pose, inputs.frames.size());
        inputs.policy_enabled = true;
    }
    if (!a.masks.empty()) {
        if (a.pose.empty())
            throw thc::ConfigError("masks given without a pose sidecar; policy needs both");
        inputs.bg_masks = thc::read_mask_dir(a.masks, inputs.frames.size());
    }

    thc::EncodeResult result = thc::encode_session(inputs);
    thc::write_stream_file(result.packets, a.output);
    std::string ledger_path = a.ledger.empty() ? a.output + ".ledger.json" : a.ledger;
    thc::save_ledger(result.ledger, ledger_path);

    std::printf("encoded %zu frames -> %s (%zu packets, %zu pivot replacements)\n",
                inputs.frames.size(), a.output.c_str(), result.packets.size(),
                result.replacement_indices.size());
    std::printf("ledger: %s\n", ledger_path.c_str());
    return 0;
}

struct DecodeArgs {
    std::string input;
    std::string output;
    int sr = 0;
    int patch = 0;
    bool overlap = false;
    std::string sr_backend = "auto";  // auto | identity | unsharp
};

int cmd_decode(const DecodeArgs& a) {
    std::vector<thc::Packet> packets = thc::read_stream_file(a.input);
    thc::DecodeOptions opts;
    opts.sr_factor = a.sr;
    opts.sr_patch = a.patch;
    opts.overlap = a.overlap;
    thc::IdentitySrBackend identity;
    thc::UnsharpSrBackend unsharp;
    if (a.sr_backend == "identity")
        opts.sr_backend = &identity;
    else if (a.sr_backend == "unsharp")
        opts.sr_backend = &unsharp;
    else if (a.sr_backend != "auto")
        throw thc::ConfigError("unknown sr backend: " + a.sr_backend);

    thc::DecodeResult result = thc::decode_session(packets, opts);
    thc::write_frame_dir(result.frames, a.output);
    std::printf("decoded %zu frames at %dx%d -> %s\n", result.frames.size(),
                result.frames[0].width, result.frames[0].height, a.output.c_str());
    if (!result.held_frames.empty())
        std::printf("held %zu frames after keypoint loss\n", result.held_frames.size());
    return 0;
}

struct SimulateArgs {
    std::string input;
    std::string output;
    std::string report;
    double loss = 0.0;
    uint64_t bandwidth = 0;
    double latency = 0.0;
    uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    std::vector<thc::Packet> packets = thc::read_stream_file(a.input);
    thc::ChannelConfig cfg;
    cfg.mode = a.loss > 0.0 ? thc::ChannelMode::Lossy : thc::ChannelMode::ReliableOrdered;
    cfg.loss_rate = a.loss;
    cfg.bandwidth_bits_per_s = a.bandwidth;
    cfg.latency_ms = a.latency;
    cfg.seed = a.seed;
    auto [delivered, report] = thc::transmit(packets, cfg);
    thc::write_stream_file(delivered, a.output);
    std::string report_path = a.report.empty() ? a.output + ".channel.json" : a.report;
    std::ofstream out(report_path);
    if (!out) throw thc::IoError("cannot open report for writing: " + report_path);
    out << thc::channel_report_to_json(report).dump(2) << '\n';
    std::printf("delivered %llu bits, dropped %llu keypoint packets, simulated time %.4f s\n",
                static_cast<unsigned long long>(report.delivered_bits),
                static_cast<unsigned long long>(report.counts(thc::PacketKind::KeyPoints).dropped),
                report.simulated_time_s);
    return 0;
}

struct EvaluateArgs {
    std::string ref;
    std::string out;
    std::string ledger;
    std::string report;
    std::string channel;
};

int cmd_evaluate(const EvaluateArgs& a) {
    std::vector<thc::Frame> ref = thc::read_frame_dir(a.ref);
    std::vector<thc::Frame> out = thc::read_frame_dir(a.out);
    thc::RateLedger ledger;
    bool have_ledger = !a.ledger.empty();
    if (have_ledger) ledger = thc::load_ledger(a.ledger);
    thc::EvalReport report =
        thc::evaluate_frames(ref, out, have_ledger ? &ledger : nullptr);
    if (!a.channel.empty()) {
        std::ifstream in(a.channel);
        if (!in) throw thc::IoError("cannot open channel report: " + a.channel);
        nlohmann::json j;
        in >> j;
        report.channel = thc::channel_report_from_json(j);
    }
    std::ofstream repf(a.report);
    if (!repf) throw thc::IoError("cannot open report for writing: " + a.report);
    repf << report.to_json().dump(2) << '\n';
    std::printf("frames %llu  psnr %.4f dB  ssim %.6f",
                static_cast<unsigned long long>(report.frames), report.psnr_mean,
                report.ssim_mean);
    if (have_ledger)
        std::printf("  bpp_paper %.6f  bpp_full %.6f", report.bpp_paper, report.bpp_full);
    std::printf("\nreport: %s\n", a.report.c_str());
    return 0;
}

struct AblateArgs {
    std::string spec;
    std::string csv;
    std::string json;
};

int cmd_ablate(const AblateArgs& a) {
    thc::SessionManifest manifest = thc::read_manifest(a.spec);
    thc::AblationResult result = thc::run_ablation_from_manifest(manifest);
    std::string csv = thc::ablation_csv(result);
    std::fputs(csv.c_str(), stdout);
    std::string csv_path = a.csv.empty() ? manifest.get_or("report", a.spec) + ".csv" : a.csv;
    std::string json_path = a.json.empty() ? manifest.get_or("report", a.spec) + ".json" : a.json;
    std::ofstream csvf(csv_path);
    if (!csvf) throw thc::IoError("cannot open csv for writing: " + csv_path);
    csvf << csv;
    std::ofstream jsonf(json_path);
    if (!jsonf) throw thc::IoError("cannot open json for writing: " + json_path);
    jsonf << thc::ablation_json(result).dump(2) << '\n';
    std::printf("wrote %s and %s\n", csv_path.c_str(), json_path.c_str());
    return 0;
}

struct SynthArgs {
    std::string output;
    int frames = 100;
    int width = 256;
    int height = 256;
    int kp = 10;
    uint64_t seed = 1;
    double wobble = 0.08;
    double drift = 0.0;
    double pose_rate = 0.3;
};

int cmd_synth(const SynthArgs& a) {
    thc::SynthSpec spec;
    spec.width = a.width;
    spec.height = a.height;
    spec.frames = a.frames;
    spec.num_keypoints = a.kp;
    spec.seed = a.seed;
    spec.wobble = static_cast<float>(a.wobble);
    spec.drift = static_cast<float>(a.drift);
    spec.pose_rate = a.pose_rate;
    thc::SynthClip clip = thc::synthesize_clip(spec);

    thc::fs::path root(a.output);
    thc::write_frame_dir(clip.frames, root / "frames");
    thc::write_keypoint_file(clip.trajectories, root / "keypoints.txt");
    thc::write_pose_file(clip.poses, root / "pose.txt");
    thc::fs::create_directories(root / "masks");
    for (size_t i = 0; i < clip.bg_masks.size(); ++i) {
        thc::GrayImage mask;
        mask.width = spec.width;
        mask.height = spec.height;
        mask.pixels.resize(clip.bg_masks[i].size());
        // mask files use nonzero = face
        for (size_t p = 0; p < mask.pixels.size(); ++p)
            mask.pixels[p] = clip.bg_masks[i][p] ? 0 : 255;
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.png", i);
        thc::write_file_bytes(root / "masks" / name, thc::png_encode_gray(mask));
    }
    std::printf("synthesized %d frames under %s (frames/, keypoints.txt, pose.txt, masks/)\n",
                a.frames, a.output.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thc: keypoint-based talking-head video codec harness"};
    app.require_subcommand(1);

    EncodeArgs enc;
    CLI::App* enc_cmd = app.add_subcommand("encode", "Encode a frame sequence to a .thc stream");
    enc_cmd->add_option("--input", enc.input, "Frame directory (PNG) or .y4m file")->required();
    enc_cmd->add_option("--output", enc.output, "Output .thc path")->required();
    enc_cmd->add_option("--keypoints", enc.keypoints, "Keypoint sidecar file")->required();
    enc_cmd->add_option("--interp", enc.interp, "Interpolated frames between keyed frames (0-3)");
    enc_cmd->add_option("--kp", enc.kp, "Keypoints per frame");
    enc_cmd->add_option("--sr", enc.sr, "Super-resolution factor (1 or 2)");
    enc_cmd->add_option("--patch", enc.patch, "SR patch edge in pixels");
    enc_cmd->add_option("--fps", enc.fps, "Frames per second");
    enc_cmd->add_option("--pose", enc.pose, "Pose sidecar; enables adaptive pivot selection");
    enc_cmd->add_option("--masks", enc.masks, "Face mask directory (nonzero = face)");
    enc_cmd->add_option("--gamma", enc.gamma, "Pose thresholds in degrees");
    enc_cmd->add_option("--dbg", enc.dbg, "Background distance threshold");
    enc_cmd->add_option("--cooldown", enc.cooldown, "Frames to wait between replacements");
    enc_cmd->add_option("--ledger", enc.ledger, "Ledger sidecar path");

    DecodeArgs dec;
    CLI::App* dec_cmd = app.add_subcommand("decode", "Decode a .thc stream to a frame directory");
    dec_cmd->add_option("--input", dec.input, "Input .thc path")->required();
    dec_cmd->add_option("--output", dec.output, "Output frame directory")->required();
    dec_cmd->add_option("--sr", dec.sr, "Override super-resolution factor");
    dec_cmd->add_option("--patch", dec.patch, "Override SR patch edge");
    dec_cmd->add_flag("--overlap", dec.overlap, "Half-stride patches with Hann blending");
    dec_cmd->add_option("--sr-backend", dec.sr_backend, "auto | identity | unsharp");

    SimulateArgs sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Pass a stream through the channel model");
    sim_cmd->add_option("--input", sim.input, "Input .thc path")->required();
    sim_cmd->add_option("--output", sim.output, "Delivered .thc path")->required();
    sim_cmd->add_option("--loss", sim.loss, "Keypoint packet loss probability [0,1)");
    sim_cmd->add_option("--bandwidth", sim.bandwidth, "Bandwidth cap in bits per second");
    sim_cmd->add_option("--latency", sim.latency, "Fixed latency in milliseconds");
    sim_cmd->add_option("--seed", sim.seed, "Channel RNG seed");
    sim_cmd->add_option("--report", sim.report, "Channel report JSON path");

    EvaluateArgs ev;
    CLI::App* ev_cmd = app.add_subcommand("evaluate", "PSNR/SSIM/BPP of decoded frames");
    ev_cmd->add_option("--ref", ev.ref, "Reference frame directory")->required();
    ev_cmd->add_option("--out", ev.out, "Decoded frame directory")->required();
    ev_cmd->add_option("--ledger", ev.ledger, "Ledger sidecar from the encoder");
    ev_cmd->add_option("--report", ev.report, "Report JSON path")->required();
    ev_cmd->add_option("--channel", ev.channel, "Channel report JSON to embed");

    AblateArgs ab;
    CLI::App* ab_cmd = app.add_subcommand("ablate", "Sweep a parameter grid per a spec file");
    ab_cmd->add_option("--spec", ab.spec, "Ablation spec file")->required();
    ab_cmd->add_option("--csv", ab.csv, "CSV output path");
    ab_cmd->add_option("--json", ab.json, "JSON output path");

    SynthArgs sy;
    CLI::App* sy_cmd = app.add_subcommand("synth", "Generate a synthetic test clip");
    sy_cmd->add_option("--output", sy.output, "Output directory")->required();
    sy_cmd->add_option("--frames", sy.frames, "Frame count");
    sy_cmd->add_option("--width", sy.width, "Frame width");
    sy_cmd->add_option("--height", sy.height, "Frame height");
    sy_cmd->add_option("--kp", sy.kp, "Keypoints per frame");
    sy_cmd->add_option("--seed", sy.seed, "Scene RNG seed");
    sy_cmd->add_option("--wobble", sy.wobble, "Keypoint oscillation amplitude");
    sy_cmd->add_option("--drift", sy.drift, "Shared keypoint drift per frame");
    sy_cmd->add_option("--pose-rate", sy.pose_rate, "Yaw drift in degrees per frame");

    try {
        app.parse(argc, argv);
        if (enc_cmd->parsed()) return cmd_encode(enc);
        if (dec_cmd->parsed()) return cmd_decode(dec);
        if (sim_cmd->parsed()) return cmd_simulate(sim);
        if (ev_cmd->parsed()) return cmd_evaluate(ev);
        if (ab_cmd->parsed()) return cmd_ablate(ab);
        if (sy_cmd->parsed()) return cmd_synth(sy);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const thc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const thc::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const thc::StreamError& e) {
        std::fprintf(stderr, "stream error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
