#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "balance/ingest.hpp"
#include "balance/network.hpp"
#include "balance/simulate.hpp"

namespace balance {

/// A named calendar range that selects one correlation window by date.
struct WindowPreset {
    std::string name;
    std::string start_date;  // inclusive
    std::string end_date;    // inclusive
};

/// The four reference periods: two crisis windows and two calm ones.
const std::vector<WindowPreset>& builtin_presets();
const WindowPreset& find_preset(const std::string& name);

struct PipelineConfig {
    // Input: exactly one of prices_path / synth.
    std::optional<std::filesystem::path> prices_path;
    bool synth = false;
    SynthSpec synth_spec;
    MissingPolicy missing = MissingPolicy::strict;

    std::size_t tau = 50;
    std::size_t stride = 0;  // 0 means stride = tau
    std::vector<std::string> presets;

    double t_lo = 0.1;
    double t_hi = 10.0;
    std::size_t t_points = 50;
    bool t_log = true;

    std::size_t replicas = 8;
    std::size_t equil_sweeps = 2000;
    std::size_t measure_sweeps = 2000;
    std::uint64_t seed = 1;
    InitMode init = InitMode::all_positive;
    bool anneal = false;
    double min_drop = 0.2;

    ZeroSignPolicy zero_sign = ZeroSignPolicy::error;
    std::size_t bins = 60;
    std::uint64_t cap = 300;

    std::optional<std::string> window;  // restrict net/sim/mf to one window id
    std::optional<double> mf_mu;        // Gaussian override for the mean-field weights
    double mf_sigma = 0.0;

    std::filesystem::path out = "out";
    std::size_t threads = 0;  // 0: BALANCE_THREADS or hardware concurrency
    bool strict = false;

    std::size_t effective_stride() const { return stride == 0 ? tau : stride; }
    std::vector<double> grid() const;
};

/// Throws std::invalid_argument describing the first violated invariant.
void validate(const PipelineConfig& cfg);

/// Stable 64-bit FNV-1a digest (hex) of every setting that affects simulation output.
std::string config_hash(const PipelineConfig& cfg);

/// `win_<start_index>`; check with is_window_id.
std::string window_id(std::size_t start_index);
bool is_window_id(const std::string& text);

/// One correlation window as recorded in fits.json.
struct WindowRecord {
    std::string window_id;
    std::size_t ordinal = 0;
    std::size_t start_index = 0;
    std::size_t tau = 0;
    std::string start_date;
    std::string end_date;
    GaussianFit fit;
};

struct Layout {
    std::filesystem::path root;

    std::filesystem::path prices() const { return root / "prices.csv"; }
    std::filesystem::path fits() const { return root / "fits.json"; }
    std::filesystem::path report() const { return root / "report.json"; }
    std::filesystem::path timeline() const { return root / "tc_timeline.csv"; }
    std::filesystem::path corr(const std::string& id) const { return root / "corr" / (id + ".csv"); }
    std::filesystem::path cluster(const std::string& id) const { return root / "cluster" / (id + ".csv"); }
    std::filesystem::path landscape(const std::string& id) const { return root / "landscape" / (id + ".csv"); }
    std::filesystem::path net(const std::string& id) const { return root / "net" / (id + ".json"); }
    std::filesystem::path sweep(const std::string& id) const { return root / "sweep" / (id + ".csv"); }
    std::filesystem::path summary(const std::string& id) const { return root / "summary" / (id + ".json"); }
    std::filesystem::path meanfield(const std::string& id) const { return root / "meanfield" / (id + ".json"); }
};

std::vector<WindowRecord> load_windows(const Layout& layout);

// Subcommands. Each returns a process exit code (0 ok, 1 runtime failure);
// usage errors are rejected earlier by the CLI layer.
int cmd_synth(const PipelineConfig& cfg);
int cmd_corr(const PipelineConfig& cfg);
int cmd_net(const PipelineConfig& cfg);
int cmd_sim(const PipelineConfig& cfg);
int cmd_mf(const PipelineConfig& cfg);
int cmd_report(const PipelineConfig& cfg);

}  // namespace balance
