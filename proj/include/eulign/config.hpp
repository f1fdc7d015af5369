#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eulign/construction.hpp"
#include "eulign/leaders.hpp"
#include "eulign/particles.hpp"

namespace eulign {

/// Flat dotted-key scenario file: one `key = value` per line, `#`
/// comments. Values are numbers, booleans, names, 3-vectors "(x,y,z)" or
/// control schedules "t0:t1:(fx,fy,fz); ...".
class ConfigMap {
  public:
    static ConfigMap parse_file(const std::string& path);
    static ConfigMap parse_text(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_number(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;

    /// Keys present in the file but never consumed by a getter.
    std::vector<std::string> unused_keys() const;
    const std::map<std::string, std::string>& entries() const { return kv_; }

    /// Parse errors recorded by typed getters (bad number syntax etc.).
    const std::vector<std::string>& parse_errors() const { return errors_; }

  private:
    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> used_;
    mutable std::vector<std::string> errors_;
};

enum class RunMode { Particles, Hydro, Coupled, Construct };

/// Fully normalized scenario with every default materialized.
struct Scenario {
    RunMode mode{RunMode::Hydro};
    double t0{0.0};
    double t_end{1.0};
    std::uint64_t seed{1};

    DomainSpec domain;
    ModelParams params;

    // particles
    std::size_t particle_count{1000};
    double particle_dt{0.005};
    int particle_output_stride{10};
    DensityProfile particle_density;
    VelocityInit particle_velocity;

    // hydro
    int resolution{32};
    SolverOptions solver;
    double fixed_dt{0.0}; // 0 = CFL-adaptive
    double snapshot_stride{0.05};
    DensityProfile hydro_density;
    VelocityProfile hydro_velocity;

    // verification
    double energy_c_tol{10.0};
    double weak_tol{0.1};

    // leaders
    LeaderSet leaders0;
    LeaderForceSpec force;
    double region_margin{0.1};
    double speed_bound{1.5};

    // steering
    int steer_pieces{2};
    int steer_budget{40};
    double steer_step{0.5};
    DensityProfile steer_target;

    // construct mode (breathing density + curl v0)
    int construct_samples{21};
    double construct_amp{0.3};
    double construct_sigma{0.18};
    CurlSpec construct_v0;

    /// Canonical flat-key echo (sorted), suitable for hashing and for
    /// re-validation.
    std::string normalized() const;
};

struct ValidationResult {
    std::optional<Scenario> scenario;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty() && scenario.has_value(); }
};

/// Materializes defaults and checks every documented constraint
/// (kernel sign conventions, positive screening rates, positive initial
/// density on the mask, control coverage, ...). Returns either a
/// normalized scenario or the complete list of violations.
ValidationResult validate(const ConfigMap& cfg);
ValidationResult validate_file(const std::string& path);

} // namespace eulign
