#include "cavnb/io.hpp"

#include <cstdio>
#include <fstream>

namespace cavnb {

json matrix_to_json(const Matrix& m, int n_atoms) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            data.push_back({m(r, c).real(), m(r, c).imag()});
    return {{"dimension", m.rows()}, {"n_atoms", n_atoms}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
    const int d = j.at("dimension").get<int>();
    const auto& data = j.at("data");
    if (static_cast<int>(data.size()) != d * d)
        throw std::runtime_error("matrix_from_json: data length mismatch");
    Matrix m(d, d);
    int i = 0;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c, ++i)
            m(r, c) = Complex(data[i][0].get<double>(), data[i][1].get<double>());
    return m;
}

json state_to_json(const QuantumState& s) {
    json out;
    out["n_atoms"] = s.space.n_atoms;
    out["fock_dim"] = s.fock_dim;
    out["dimension"] = s.dim();
    out["representation"] = s.is_pure() ? "pure" : "density";
    json data = json::array();
    if (s.is_pure()) {
        for (Eigen::Index i = 0; i < s.vec.size(); ++i)
            data.push_back({s.vec(i).real(), s.vec(i).imag()});
    } else {
        for (Eigen::Index r = 0; r < s.rho.rows(); ++r)
            for (Eigen::Index c = 0; c < s.rho.cols(); ++c)
                data.push_back({s.rho(r, c).real(), s.rho(r, c).imag()});
    }
    out["data"] = data;
    return out;
}

QuantumState state_from_json(const json& j) {
    QuantumState s;
    s.space = DickeSpace(j.at("n_atoms").get<int>());
    s.fock_dim = j.value("fock_dim", 1);
    const auto& data = j.at("data");
    const int d = j.at("dimension").get<int>();
    if (d != s.dim()) throw std::runtime_error("state_from_json: dimension mismatch");
    if (j.at("representation") == "pure") {
        s.representation = QuantumState::Rep::Pure;
        s.vec.resize(d);
        if (static_cast<int>(data.size()) != d)
            throw std::runtime_error("state_from_json: data length mismatch");
        for (int i = 0; i < d; ++i)
            s.vec(i) = Complex(data[i][0].get<double>(), data[i][1].get<double>());
    } else {
        s.representation = QuantumState::Rep::Density;
        s.rho.resize(d, d);
        if (static_cast<int>(data.size()) != d * d)
            throw std::runtime_error("state_from_json: data length mismatch");
        int i = 0;
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c, ++i)
                s.rho(r, c) = Complex(data[i][0].get<double>(), data[i][1].get<double>());
    }
    return s;
}

json effective_model_to_json(const EffectiveModel& m) {
    json coeffs = json::object();
    for (const auto& [k, v] : m.coefficients) coeffs[k] = {v.real(), v.imag()};
    json jumps = json::array();
    for (const auto& ch : m.jumps)
        jumps.push_back({{"label", ch.label},
                         {"rate", ch.rate},
                         {"delta_m", ch.delta_m},
                         {"frame_freq", ch.frame_freq},
                         {"negligible", ch.negligible}});
    return {{"n_body", m.n_body},
            {"n_atoms", m.n_atoms},
            {"coefficients", coeffs},
            {"jumps", jumps},
            {"fit_residual", m.fit_residual},
            {"polynomial", m.polynomial},
            {"warnings", m.warnings}};
}

EffectiveModel effective_model_from_json(const json& j) {
    EffectiveModel m;
    m.n_body = j.at("n_body").get<int>();
    m.n_atoms = j.at("n_atoms").get<int>();
    for (const auto& [k, v] : j.at("coefficients").items())
        m.coefficients[k] = Complex(v[0].get<double>(), v[1].get<double>());
    for (const auto& ch : j.at("jumps")) {
        JumpChannel c;
        c.label = ch.at("label").get<std::string>();
        c.rate = ch.at("rate").get<double>();
        c.delta_m = ch.at("delta_m").get<int>();
        c.frame_freq = ch.at("frame_freq").get<double>();
        c.negligible = ch.at("negligible").get<bool>();
        m.jumps.push_back(std::move(c));
    }
    m.fit_residual = j.value("fit_residual", 0.0);
    m.polynomial = j.value("polynomial", true);
    return m;
}

json couplings_to_json(const DerivedCouplings& d, int n_atoms) {
    json out;
    out["n_atoms"] = n_atoms;
    out["n_body"] = d.n_body;
    out["G_hz"] = d.G / kTwoPi;
    out["delta_c1_hz"] = d.delta_c1 / kTwoPi;
    out["delta_c2_hz"] = d.delta_c2 / kTwoPi;
    out["chi_n_hz"] = d.chi_n / kTwoPi;
    out["chi_collective_hz"] = d.chi_collective / kTwoPi;
    out["chi2_plus_minus_hz"] = d.chi2_plus_minus / kTwoPi;
    out["chi2_minus_plus_hz"] = d.chi2_minus_plus / kTwoPi;
    out["net_exchange_hz"] = d.net_exchange / kTwoPi;
    out["gamma_hz"] = d.gamma_collective / kTwoPi;
    out["jz_drive_shift_hz"] = d.jz_drive_shift / kTwoPi;
    if (d.chi_collective != 0)
        out["gamma_over_chi_collective"] = d.gamma_collective / std::abs(d.chi_collective);
    out["warnings"] = d.warnings;
    return out;
}

namespace {

void check_keys(const json& j, const std::string& scope,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(scope, scope + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ConfigError(scope + "." + it.key(), "unknown key " + scope + "." + it.key());
    }
}

double require_number(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(key, std::string(key) + " required");
    if (!j.at(key).is_number()) throw ConfigError(key, std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

double optional_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(key, std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

int scheme_order(const std::string& scheme) {
    if (scheme == "three_body") return 3;
    if (scheme == "four_body") return 4;
    if (scheme == "exchange_only") return 2;
    throw ConfigError("scheme", "scheme must be three_body, four_body or exchange_only");
}

}  // namespace

int RunConfig::n_body() const { return scheme_order(scheme); }

double RunConfig::chi_collective() const {
    return derive_couplings(physical, n_body()).chi_collective;
}

SequenceParams RunConfig::sequence_params() const {
    SequenceParams p;
    p.engine = engine;
    p.n_atoms = physical.n_atoms;
    p.n_body = n_body();
    const auto d = derive_couplings(physical, p.n_body);
    p.chi_collective = d.chi_collective;
    p.gamma = d.gamma_collective;
    p.phi_d = physical.phi_d;
    p.delta = physical.six_photon_detuning;
    p.fock_cutoff = fock_cutoff;
    p.projection_noise = projection_noise;
    p.seed = seed;
    if (engine != Engine::MeanField) {
        LadderModel lm = LadderModel::from_params(physical, p.n_body);
        if (engine == Engine::FullCavity) p.ladder = lm;
        p.model = (p.n_body == 4) ? effective_model_fourth_order_4body(lm)
                                  : effective_model_second_order(lm);
    }
    return p;
}

RunConfig load_config(const json& j) {
    check_keys(j, "config",
               {"physical", "scheme", "engine", "protocol", "output", "seed", "workers"});
    if (!j.contains("physical")) throw ConfigError("physical", "physical required");
    const json& ph = j.at("physical");
    check_keys(ph, "physical",
               {"n_atoms", "g0_hz", "delta_a_hz", "kappa_hz", "omega_z_hz", "phi_d",
                "six_photon_detuning_hz", "drive", "tone_phase", "delta_c2_hz",
                "balance_exchange"});

    RunConfig cfg;
    cfg.scheme = j.value("scheme", std::string("three_body"));
    const int n = scheme_order(cfg.scheme);

    if (!ph.contains("n_atoms")) throw ConfigError("n_atoms", "n_atoms required");
    const int n_atoms = ph.at("n_atoms").get<int>();
    const double g0 = kTwoPi * require_number(ph, "g0_hz");
    const double delta_a = kTwoPi * require_number(ph, "delta_a_hz");
    const double kappa = kTwoPi * require_number(ph, "kappa_hz");
    const double omega_z = kTwoPi * require_number(ph, "omega_z_hz");
    const double phi_d = optional_number(ph, "phi_d", 0.0);
    const double delta = kTwoPi * optional_number(ph, "six_photon_detuning_hz", 0.0);
    const double tone_phase = optional_number(ph, "tone_phase", 0.0);
    std::optional<double> delta_c2;
    if (ph.contains("delta_c2_hz")) delta_c2 = kTwoPi * require_number(ph, "delta_c2_hz");

    if (!ph.contains("drive")) throw ConfigError("drive", "drive required");
    const json& drive = ph.at("drive");
    check_keys(drive, "drive", {"alpha_mag", "chi_collective_hz", "tones"});
    if (drive.size() != 1)
        throw ConfigError("drive", "drive must contain exactly one of alpha_mag, "
                                   "chi_collective_hz, tones");

    const bool balance = ph.value("balance_exchange", cfg.scheme == "four_body");
    auto build_symmetric = [&](double alpha_product) {
        double a1 = std::sqrt(alpha_product), a2 = a1;
        if (balance && n != 3) {
            PhysicalParams probe = symmetric_configuration(n_atoms, g0, delta_a, kappa, omega_z, n,
                                                           1.0, 1.0, tone_phase, delta, phi_d,
                                                           delta_c2);
            const double r2 = balance_exchange_ratio(probe);
            const double r = std::sqrt(r2);
            a1 = std::sqrt(alpha_product / r);
            a2 = std::sqrt(alpha_product * r);
        }
        return symmetric_configuration(n_atoms, g0, delta_a, kappa, omega_z, n, a1, a2, tone_phase,
                                       delta, phi_d, delta_c2);
    };

    if (drive.contains("alpha_mag")) {
        const double a = require_number(drive, "alpha_mag");
        cfg.physical = build_symmetric(a * a);
    } else if (drive.contains("chi_collective_hz")) {
        if (n == 2)
            throw ConfigError("chi_collective_hz",
                              "chi_collective_hz calibration needs an n-body scheme");
        const double target = kTwoPi * require_number(drive, "chi_collective_hz");
        PhysicalParams probe = symmetric_configuration(n_atoms, g0, delta_a, kappa, omega_z, n, 1.0,
                                                       1.0, tone_phase, delta, phi_d, delta_c2);
        cfg.physical = build_symmetric(calibrate_alpha_product(probe, target, n));
    } else {
        const json& tones = drive.at("tones");
        if (!tones.is_array() || tones.size() != 2)
            throw ConfigError("tones", "tones must be an array of two entries");
        PhysicalParams p;
        p.n_atoms = n_atoms;
        p.g0 = g0;
        p.delta_a = delta_a;
        p.kappa = kappa;
        p.omega_z = omega_z;
        p.phi_d = phi_d;
        p.six_photon_detuning = delta;
        for (const auto& t : tones) {
            check_keys(t, "tone", {"alpha_re", "alpha_im", "epsilon_hz", "offset_hz"});
            const double offset = kTwoPi * require_number(t, "offset_hz");
            if (t.contains("epsilon_hz")) {
                const double eps = kTwoPi * require_number(t, "epsilon_hz");
                const double bare = offset + dispersive_shift(p);
                p.tones.push_back({intracavity_amplitude(eps, bare, kappa), offset});
            } else {
                p.tones.push_back({Complex(require_number(t, "alpha_re"),
                                           optional_number(t, "alpha_im", 0.0)),
                                   offset});
            }
        }
        cfg.physical = p;
    }

    cfg.engine = Engine::MeanField;
    const std::string eng = j.value("engine", std::string("meanfield"));
    if (eng == "meanfield") cfg.engine = Engine::MeanField;
    else if (eng == "lindblad") cfg.engine = Engine::Lindblad;
    else if (eng == "full_cavity") cfg.engine = Engine::FullCavity;
    else throw ConfigError("engine", "engine must be meanfield, lindblad or full_cavity");

    if (j.contains("protocol")) {
        const json& pr = j.at("protocol");
        check_keys(pr, "protocol",
                   {"interaction_time_s", "n_phi", "theta0", "pulse_area", "delta_span_hz",
                    "n_delta", "n_theta_grid", "n_phi_grid", "fock_cutoff", "projection_noise"});
        if (pr.contains("projection_noise")) cfg.projection_noise = pr.at("projection_noise").get<bool>();
        cfg.interaction_time = optional_number(pr, "interaction_time_s", cfg.interaction_time);
        cfg.n_phi = static_cast<int>(optional_number(pr, "n_phi", cfg.n_phi));
        cfg.theta0 = optional_number(pr, "theta0", cfg.theta0);
        cfg.pulse_area = optional_number(pr, "pulse_area", cfg.pulse_area);
        cfg.delta_span = kTwoPi * optional_number(pr, "delta_span_hz", 0.0);
        cfg.n_delta = static_cast<int>(optional_number(pr, "n_delta", cfg.n_delta));
        cfg.n_theta_grid = static_cast<int>(optional_number(pr, "n_theta_grid", cfg.n_theta_grid));
        cfg.n_phi_grid = static_cast<int>(optional_number(pr, "n_phi_grid", cfg.n_phi_grid));
        cfg.fock_cutoff = static_cast<int>(optional_number(pr, "fock_cutoff", cfg.fock_cutoff));
    }
    if (j.contains("output")) {
        check_keys(j.at("output"), "output", {"dir"});
        cfg.out_dir = j.at("output").value("dir", cfg.out_dir);
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    cfg.physical.validate(2);
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config", std::string("config parse error: ") + e.what());
    }
    return load_config(j);
}

json RunConfig::canonical() const {
    json tones = json::array();
    for (const auto& t : physical.tones)
        tones.push_back({{"alpha_re", t.alpha.real()},
                         {"alpha_im", t.alpha.imag()},
                         {"offset", t.offset}});
    return {{"n_atoms", physical.n_atoms},
            {"g0", physical.g0},
            {"delta_a", physical.delta_a},
            {"kappa", physical.kappa},
            {"omega_z", physical.omega_z},
            {"phi_d", physical.phi_d},
            {"six_photon_detuning", physical.six_photon_detuning},
            {"tones", tones},
            {"scheme", scheme},
            {"engine", static_cast<int>(engine)},
            {"interaction_time", interaction_time},
            {"n_phi", n_phi},
            {"theta0", theta0},
            {"pulse_area", pulse_area},
            {"delta_span", delta_span},
            {"n_delta", n_delta},
            {"n_theta_grid", n_theta_grid},
            {"n_phi_grid", n_phi_grid},
            {"fock_cutoff", fock_cutoff},
            {"seed", seed}};
}

std::string config_hash(const json& canonical) {
    const std::string s = canonical.dump();
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const std::filesystem::path& path) : impl_(new Impl) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    impl_->out.open(path);
    if (!impl_->out) throw std::runtime_error("CsvWriter: cannot open " + path.string());
}

CsvWriter::~CsvWriter() {
    close();
    delete impl_;
}

void CsvWriter::metadata(const std::string& key, const std::string& value) {
    impl_->out << "# " << key << "=" << value << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (size_t i = 0; i < columns.size(); ++i)
        impl_->out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i)
        impl_->out << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::close() {
    if (impl_->out.is_open()) impl_->out.close();
}

}  // namespace cavnb
