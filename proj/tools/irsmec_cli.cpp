#include <CLI11.hpp>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "irsmec/artifacts.hpp"

namespace fs = std::filesystem;
using namespace irsmec;

namespace {

struct CliArgs {
    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::string checkpoint;  // stem; may contain {value} in sweep mode
    std::vector<std::uint64_t> seeds;
    std::string sweep_axis;
    std::vector<double> sweep_values;
    int episodes_override = -1;
    int workers = 0;
};

void apply_axis(RunConfig& cfg, const std::string& axis, double value) {
    if (axis == "K")
        cfg.sys.k_irs = static_cast<int>(value);
    else if (axis == "pmax")
        cfg.sys.p_max = value;
    else if (axis == "N")
        cfg.sys.n_users = static_cast<int>(value);
    else if (axis == "M")
        cfg.sys.m_antennas = static_cast<int>(value);
    else
        throw std::runtime_error("unknown sweep axis '" + axis + "' (use K, pmax, N, M)");
}

std::string substitute_value(const std::string& tmpl, double value) {
    const std::string tag = "{value}";
    std::string out = tmpl;
    const auto pos = out.find(tag);
    if (pos == std::string::npos) return out;
    char buf[32];
    if (value == static_cast<long>(value))
        std::snprintf(buf, sizeof(buf), "%ld", static_cast<long>(value));
    else
        std::snprintf(buf, sizeof(buf), "%g", value);
    return out.replace(pos, tag.size(), buf);
}

/// Loads the learner for a config, pulling state scales from the checkpoint
/// so evaluation sees the same standardization as training.
struct LoadedPolicy {
    std::unique_ptr<CdehLearner> learner;
    StateScales scales;
};

LoadedPolicy load_policy(const RunConfig& cfg, const std::string& ckpt_stem) {
    LoadedPolicy lp;
    if (ckpt_stem.empty()) {
        lp.scales = Environment::compute_scales(cfg.sys, cfg.env, cfg.env.state_scale_samples);
        return lp;
    }
    lp.learner = std::make_unique<CdehLearner>(cfg);
    const nlohmann::json meta = lp.learner->load(ckpt_stem);
    if (meta.contains("state_scales")) {
        lp.scales.dir = meta["state_scales"]["dir"].get<double>();
        lp.scales.irs = meta["state_scales"]["irs"].get<double>();
        lp.scales.g = meta["state_scales"]["g"].get<double>();
    } else {
        lp.scales = Environment::compute_scales(cfg.sys, cfg.env, cfg.env.state_scale_samples);
    }
    return lp;
}

int run_train(const CliArgs& args, RunConfig cfg) {
    if (!args.seeds.empty()) cfg.sys.rng_seed = args.seeds[0];
    cfg.sys.validate();
    fs::create_directories(args.out_dir);

    const StateScales scales =
        Environment::compute_scales(cfg.sys, cfg.env, cfg.env.state_scale_samples);
    Environment env(cfg.sys, cfg.env, scales, cfg.eval.sic_order_rule);
    CdehLearner learner(cfg);

    nlohmann::json meta = run_manifest(cfg, "train", {cfg.sys.rng_seed}, scales);
    if (!args.checkpoint.empty()) {
        learner.load(args.checkpoint);
        std::cout << "resuming from episode " << learner.start_episode() << "\n";
    }

    const auto rows = learner.train(env, args.out_dir, meta);
    write_train_log(args.out_dir + "/train_log.csv", rows,
                    artifact_header(cfg, {cfg.sys.rng_seed}));
    write_text_file(args.out_dir + "/manifest.json", meta.dump(2) + "\n");
    write_text_file(args.out_dir + "/resolved.cfg", resolved_config_text(cfg));
    std::cout << "trained " << rows.size() << " episodes; artifacts in " << args.out_dir
              << "\n";
    return 0;
}

int run_eval_or_sweep(const CliArgs& args, const RunConfig& base_cfg) {
    const bool sweeping = args.mode == "sweep";
    std::vector<double> values = args.sweep_values;
    if (sweeping) {
        if (args.sweep_axis.empty() || values.empty())
            throw std::runtime_error("sweep mode requires --sweep-axis and --sweep-values");
        if (!std::is_sorted(values.begin(), values.end()))
            throw std::runtime_error("sweep values must be sorted ascending");
    } else {
        values = {0.0};
    }
    std::vector<std::uint64_t> seeds =
        args.seeds.empty() ? std::vector<std::uint64_t>{base_cfg.sys.rng_seed} : args.seeds;

    fs::create_directories(args.out_dir);

    struct Point {
        double value;
        RunConfig cfg;
        std::string ckpt;
    };
    std::vector<Point> points;
    for (double v : values) {
        Point p{v, base_cfg, ""};
        if (sweeping) apply_axis(p.cfg, args.sweep_axis, v);
        p.cfg.sys.validate();
        if (!args.checkpoint.empty()) p.ckpt = substitute_value(args.checkpoint, v);
        points.push_back(std::move(p));
    }

    // One result slot per (point, policy, seed); filled by a bounded pool,
    // emitted in deterministic order.
    struct Slot {
        MetricsRow row;
        std::vector<TraceRow> trace;
    };
    std::vector<Slot> slots(points.size() * base_cfg.eval.policies.size() * seeds.size());

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::string first_error;
    auto worker = [&]() {
        while (true) {
            const std::size_t pi = next.fetch_add(1);
            if (pi >= points.size()) return;
            try {
                const Point& pt = points[pi];
                LoadedPolicy lp = load_policy(pt.cfg, pt.ckpt);
                for (std::size_t ci = 0; ci < pt.cfg.eval.policies.size(); ++ci) {
                    const PolicySpec spec =
                        policy_from_name(pt.cfg.eval.policies[ci], lp.learner != nullptr);
                    for (std::size_t si = 0; si < seeds.size(); ++si) {
                        Slot& slot =
                            slots[(pi * pt.cfg.eval.policies.size() + ci) * seeds.size() + si];
                        std::vector<TraceRow>* trace =
                            pt.cfg.eval.emit_trace ? &slot.trace : nullptr;
                        slot.row.policy = spec.name;
                        slot.row.axis = sweeping ? args.sweep_axis : "-";
                        slot.row.value = pt.value;
                        slot.row.metrics =
                            evaluate_policy(pt.cfg, spec, lp.learner.get(), lp.scales,
                                            pt.cfg.eval.episodes, seeds[si], trace);
                    }
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };

    unsigned n_workers = args.workers > 0 ? args.workers : std::thread::hardware_concurrency();
    n_workers = std::max(1u, std::min<unsigned>(n_workers, points.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error(first_error);

    std::vector<MetricsRow> rows;
    std::vector<TraceRow> all_trace;
    for (const auto& slot : slots) {
        rows.push_back(slot.row);
        all_trace.insert(all_trace.end(), slot.trace.begin(), slot.trace.end());
    }

    const std::string header = artifact_header(base_cfg, seeds);
    write_text_file(args.out_dir + "/metrics.csv", metrics_csv_text(rows, header));
    if (base_cfg.eval.emit_trace)
        write_text_file(args.out_dir + "/trace.csv",
                        trace_csv_text(all_trace, base_cfg.sys.n_users, header));
    const StateScales scales0;
    nlohmann::json manifest = run_manifest(base_cfg, args.mode, seeds, scales0);
    if (sweeping) {
        manifest["sweep_axis"] = args.sweep_axis;
        manifest["sweep_values"] = values;
    }
    write_text_file(args.out_dir + "/manifest.json", manifest.dump(2) + "\n");
    write_text_file(args.out_dir + "/resolved.cfg", resolved_config_text(base_cfg));
    std::cout << "wrote " << rows.size() << " metric rows to " << args.out_dir
              << "/metrics.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IRS-assisted MEC uplink simulator and hierarchical RL trainer"};
    CliArgs args;
    app.add_option("--config", args.config_path, "flat key=value config file")->required();
    app.add_option("--mode", args.mode, "train | eval | sweep")->required();
    app.add_option("--out", args.out_dir, "output directory")->required();
    app.add_option("--checkpoint", args.checkpoint,
                   "checkpoint stem (resume for train, policy source for eval/sweep; "
                   "may contain {value} in sweep mode)");
    app.add_option("--seeds", args.seeds, "seed list")->delimiter(',');
    app.add_option("--sweep-axis", args.sweep_axis, "one of K, pmax, N, M");
    app.add_option("--sweep-values", args.sweep_values, "ascending value list")
        ->delimiter(',');
    app.add_option("--episodes", args.episodes_override,
                   "override training/eval episode count");
    app.add_option("--workers", args.workers, "sweep worker pool size (default: cores)");
    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config_file(args.config_path);
        if (args.episodes_override > 0) {
            cfg.agent.episodes = args.episodes_override;
            cfg.eval.episodes = args.episodes_override;
        }
        if (args.mode == "train") return run_train(args, cfg);
        if (args.mode == "eval" || args.mode == "sweep") return run_eval_or_sweep(args, cfg);
        std::cerr << "error: unknown mode '" << args.mode << "'\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
