#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavnb/effective.hpp"
#include "cavnb/params.hpp"
#include "cavnb/sequence.hpp"

namespace cavnb {

using json = nlohmann::json;

/// Raised on malformed configuration; `key` names the offending entry.
struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(const std::string& k, const std::string& msg)
        : std::runtime_error(msg), key(k) {}
};

// Dense operators and states as {"dimension", "n_atoms", "data": [[re, im], ...]},
// row-major, rung order ascending from m = -N/2.
json matrix_to_json(const Matrix& m, int n_atoms);
Matrix matrix_from_json(const json& j);
json state_to_json(const QuantumState& s);
QuantumState state_from_json(const json& j);

json effective_model_to_json(const EffectiveModel& m);
EffectiveModel effective_model_from_json(const json& j);

json couplings_to_json(const DerivedCouplings& d, int n_atoms);

/// CLI/run configuration. All frequencies in the file are in Hz (multiplied by
/// 2 pi on ingestion); angles are radians; durations are seconds.
struct RunConfig {
    PhysicalParams physical;
    std::string scheme = "three_body";  ///< three_body | four_body | exchange_only
    Engine engine = Engine::MeanField;
    // protocol block
    double interaction_time = 50e-6;
    int n_phi = 72;
    double theta0 = 0.25 * kPi;
    double pulse_area = 0.5 * kPi;
    double delta_span = 0;  ///< rad/s; resonance scan half-width (default 8/T)
    int n_delta = 33;
    int n_theta_grid = 20, n_phi_grid = 40;
    int fock_cutoff = 5;
    bool projection_noise = false;
    uint64_t seed = 0;
    std::string out_dir = "out";
    int workers = 0;

    int n_body() const;
    double chi_collective() const;  ///< from the derived couplings
    SequenceParams sequence_params() const;
    json canonical() const;  ///< normalized config echo (for hashing)
};

/// Parses and validates; rejects unknown keys, names missing ones.
RunConfig load_config(const json& j);
RunConfig load_config_file(const std::filesystem::path& path);

/// FNV-1a over the canonical config dump.
std::string config_hash(const json& canonical);

/// CSV with '#'-prefixed metadata lines; numbers printed with %.12g.
struct CsvWriter {
    explicit CsvWriter(const std::filesystem::path& path);
    ~CsvWriter();
    void metadata(const std::string& key, const std::string& value);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void close();

  private:
    struct Impl;
    Impl* impl_;
};

std::string format_double(double v);

}  // namespace cavnb
