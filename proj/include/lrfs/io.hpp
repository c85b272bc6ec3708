#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "lrfs/densities.hpp"
#include "lrfs/metrics.hpp"
#include "lrfs/multiscan.hpp"
#include "lrfs/sim.hpp"
#include "lrfs/tracker.hpp"

namespace lrfs::io {

using Json = nlohmann::ordered_json;

/// Malformed input; the message starts with the offending field path.
class FieldError : public std::runtime_error {
public:
    FieldError(const std::string& path, const std::string& problem) : std::runtime_error(path + ": " + problem) {}
};

inline Json read_json(const std::string& file)
{
    std::ifstream in(file);
    if (!in) {
        throw FieldError(file, "cannot open file");
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FieldError(file, std::string("invalid JSON: ") + e.what());
    }
}

inline void write_text(const std::string& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error(file + ": cannot write file");
    }
    out << text;
}

inline void write_json(const std::string& file, const Json& value) { write_text(file, value.dump(2) + "\n"); }

// ---- field access with paths ------------------------------------------------

inline const Json& field(const Json& object, const std::string& key, const std::string& path)
{
    if (!object.is_object()) {
        throw FieldError(path, "expected an object");
    }
    const auto it = object.find(key);
    if (it == object.end()) {
        throw FieldError(path + "." + key, "missing field");
    }
    return *it;
}

inline double number(const Json& value, const std::string& path)
{
    if (!value.is_number()) {
        throw FieldError(path, "expected a number");
    }
    return value.get<double>();
}

inline long long integer(const Json& value, const std::string& path)
{
    if (!value.is_number_integer()) {
        throw FieldError(path, "expected an integer");
    }
    return value.get<long long>();
}

inline bool boolean(const Json& value, const std::string& path)
{
    if (!value.is_boolean()) {
        throw FieldError(path, "expected a boolean");
    }
    return value.get<bool>();
}

inline const Json& array(const Json& value, const std::string& path)
{
    if (!value.is_array()) {
        throw FieldError(path, "expected an array");
    }
    return value;
}

inline std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline Vector vector_from(const Json& value, const std::string& path)
{
    const Json& a = array(value, path);
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = number(a[i], at_index(path, i));
    }
    return v;
}

inline Matrix matrix_from(const Json& value, const std::string& path)
{
    const Json& rows = array(value, path);
    if (rows.empty()) {
        throw FieldError(path, "expected a non-empty matrix");
    }
    const auto cols = array(rows[0], at_index(path, 0)).size();
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Vector row = vector_from(rows[i], at_index(path, i));
        if (static_cast<std::size_t>(row.size()) != cols) {
            throw FieldError(at_index(path, i), "rows differ in length");
        }
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

inline Label label_from(const Json& value, const std::string& path)
{
    const Json& a = array(value, path);
    if (a.size() != 2) {
        throw FieldError(path, "expected [birth_time, index]");
    }
    const Label label{static_cast<int>(integer(a[0], at_index(path, 0))), static_cast<int>(integer(a[1], at_index(path, 1)))};
    if (label.birth_time < 0 || label.index < 0) {
        throw FieldError(path, "label fields must be non-negative");
    }
    return label;
}

inline Json to_json(const Vector& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

inline Json to_json(const Matrix& m)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(to_json(Vector(m.row(i).transpose())));
    }
    return out;
}

inline Json to_json(const Label& l) { return Json::array({l.birth_time, l.index}); }

/// Reads an optional field into `target` when present.
template <typename Reader, typename T>
void optional_field(const Json& object, const std::string& key, const std::string& path, T& target, Reader read)
{
    const auto it = object.find(key);
    if (it != object.end()) {
        target = static_cast<T>(read(*it, path + "." + key));
    }
}

// ---- scenario ----------------------------------------------------------------------

inline Json params_to_json(const SimParams& p)
{
    return Json{{"scans", p.scans},
                {"dt", p.dt},
                {"initial_objects", p.initial_objects},
                {"birth_slots", p.birth_slots},
                {"birth_probability", p.birth_probability},
                {"survival_probability", p.survival_probability},
                {"max_speed", p.max_speed},
                {"detection_probability", p.detection_probability},
                {"measurement_noise", p.measurement_noise},
                {"process_noise", p.process_noise},
                {"clutter_rate", p.clutter_rate},
                {"kill_outside_region", p.kill_outside_region}};
}

/// Reads simulation parameters; absent fields keep their defaults. The
/// region may be given as {"region": {"lo": [..], "hi": [..]}}.
inline SimParams params_from_json(const Json& j, const std::string& path, SimParams p = {})
{
    if (!j.is_object()) {
        throw FieldError(path, "expected an object");
    }
    optional_field(j, "scans", path, p.scans, integer);
    optional_field(j, "dt", path, p.dt, number);
    optional_field(j, "initial_objects", path, p.initial_objects, integer);
    optional_field(j, "birth_slots", path, p.birth_slots, integer);
    optional_field(j, "birth_probability", path, p.birth_probability, number);
    optional_field(j, "survival_probability", path, p.survival_probability, number);
    optional_field(j, "max_speed", path, p.max_speed, number);
    optional_field(j, "detection_probability", path, p.detection_probability, number);
    optional_field(j, "measurement_noise", path, p.measurement_noise, number);
    optional_field(j, "process_noise", path, p.process_noise, number);
    optional_field(j, "clutter_rate", path, p.clutter_rate, number);
    optional_field(j, "kill_outside_region", path, p.kill_outside_region, boolean);
    if (j.contains("region")) {
        const Json& region = j["region"];
        p.region_lo = vector_from(field(region, "lo", path + ".region"), path + ".region.lo");
        p.region_hi = vector_from(field(region, "hi", path + ".region"), path + ".region.hi");
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw FieldError(path, e.what());
    }
    return p;
}

inline Json scenario_to_json(const Scenario& s)
{
    Json scans = Json::array();
    for (const auto& scan : s.scans) {
        Json z = Json::array();
        for (const auto& m : scan.z) {
            z.push_back(to_json(m));
        }
        scans.push_back(Json{{"k", scan.k}, {"Z", std::move(z)}});
    }
    Json truth = Json::array();
    for (const auto& t : s.truth) {
        Json states = Json::array();
        for (std::size_t i = 0; i < t.states.size(); ++i) {
            states.push_back(Json{{"k", t.start + static_cast<int>(i)}, {"x", to_json(t.states[i])}});
        }
        truth.push_back(Json{{"label", to_json(t.label)}, {"states", std::move(states)}});
    }
    return Json{{"region", {{"lo", to_json(s.params.region_lo)}, {"hi", to_json(s.params.region_hi)}}},
                {"model", params_to_json(s.params)},
                {"scans", std::move(scans)},
                {"truth", std::move(truth)}};
}

/// Reads trajectories from an array of {"label", "states": [{"k", "x"}]};
/// states must be contiguous in k.
inline std::vector<LabeledTrajectory> trajectories_from_json(const Json& j, const std::string& path)
{
    std::vector<LabeledTrajectory> out;
    const Json& list = array(j, path);
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string p = at_index(path, i);
        LabeledTrajectory t{label_from(field(list[i], "label", p), p + ".label"), 0, {}};
        const Json& states = array(field(list[i], "states", p), p + ".states");
        for (std::size_t s = 0; s < states.size(); ++s) {
            const std::string sp = at_index(p + ".states", s);
            const int k = static_cast<int>(integer(field(states[s], "k", sp), sp + ".k"));
            if (s == 0) {
                t.start = k;
            } else if (k != t.end() + 1) {
                // A gap starts a new trajectory fragment with the same label.
                out.push_back(std::move(t));
                t = LabeledTrajectory{out.back().label, k, {}};
            }
            t.states.push_back(vector_from(field(states[s], "x", sp), sp + ".x"));
        }
        if (!t.states.empty()) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

inline Scenario scenario_from_json(const Json& j, const std::string& path = "scenario")
{
    Scenario s;
    SimParams base;
    const Json& region = field(j, "region", path);
    base.region_lo = vector_from(field(region, "lo", path + ".region"), path + ".region.lo");
    base.region_hi = vector_from(field(region, "hi", path + ".region"), path + ".region.hi");
    s.params = params_from_json(j.contains("model") ? j["model"] : Json::object(), path + ".model", base);
    const Json& scans = array(field(j, "scans", path), path + ".scans");
    for (std::size_t i = 0; i < scans.size(); ++i) {
        const std::string p = at_index(path + ".scans", i);
        ScanMeasurements scan{static_cast<int>(integer(field(scans[i], "k", p), p + ".k")), {}};
        if (i > 0 && scan.k != s.scans.back().k + 1) {
            throw FieldError(p + ".k", "scans must be consecutive");
        }
        const Json& z = array(field(scans[i], "Z", p), p + ".Z");
        for (std::size_t m = 0; m < z.size(); ++m) {
            Vector v = vector_from(z[m], at_index(p + ".Z", m));
            if (v.size() != 2) {
                throw FieldError(at_index(p + ".Z", m), "measurements are 2-D positions");
            }
            scan.z.push_back(std::move(v));
        }
        s.scans.push_back(std::move(scan));
    }
    if (j.contains("truth")) {
        s.truth = trajectories_from_json(j["truth"], path + ".truth");
    }
    return s;
}

// ---- LMB densities -------------------------------------------------------------

inline GaussianMixture mixture_from_json(const Json& j, const std::string& path)
{
    const Json& comps = array(j, path);
    std::vector<WeightedGaussian> out;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string p = at_index(path, i);
        const double w = number(field(comps[i], "w", p), p + ".w");
        const Vector mean = vector_from(field(comps[i], "mean", p), p + ".mean");
        const Matrix cov = matrix_from(field(comps[i], "cov", p), p + ".cov");
        try {
            out.push_back({w, Gaussian(mean, cov)});
        } catch (const std::invalid_argument& e) {
            throw FieldError(p, e.what());
        }
    }
    try {
        return GaussianMixture(std::move(out));
    } catch (const std::invalid_argument& e) {
        throw FieldError(path, e.what());
    }
}

/// {"tracks": [{"label": [s, i], "r": .., "components": [{"w", "mean", "cov"}]}]}
inline LmbDensity lmb_from_json(const Json& j, const std::string& path = "lmb")
{
    const Json& tracks = array(field(j, "tracks", path), path + ".tracks");
    std::map<Label, BernoulliRfs> out;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const std::string p = at_index(path + ".tracks", i);
        const Label label = label_from(field(tracks[i], "label", p), p + ".label");
        const double r = number(field(tracks[i], "r", p), p + ".r");
        GaussianMixture density = mixture_from_json(field(tracks[i], "components", p), p + ".components");
        try {
            if (!out.emplace(label, BernoulliRfs(r, density.normalized())).second) {
                throw FieldError(p + ".label", "duplicate label");
            }
        } catch (const std::invalid_argument& e) {
            throw FieldError(p, e.what());
        }
    }
    try {
        return LmbDensity(std::move(out));
    } catch (const std::invalid_argument& e) {
        throw FieldError(path, e.what());
    }
}

inline Json lmb_to_json(const LmbDensity& lmb)
{
    Json tracks = Json::array();
    for (const auto& [label, track] : lmb.tracks()) {
        Json comps = Json::array();
        for (const auto& c : track.density().components()) {
            comps.push_back(Json{{"w", c.weight}, {"mean", to_json(c.gaussian.mean())}, {"cov", to_json(c.gaussian.covariance())}});
        }
        tracks.push_back(Json{{"label", to_json(label)}, {"r", track.existence()}, {"components", std::move(comps)}});
    }
    return Json{{"tracks", std::move(tracks)}};
}

// ---- tracker configuration ---------------------------------------------------------

/// Reads FilterConfig fields plus "hygiene", "birth" and model overrides.
inline TrackerConfig tracker_config_from_json(const Json& j, const std::string& path = "config")
{
    TrackerConfig cfg;
    if (!j.is_object()) {
        throw FieldError(path, "expected an object");
    }
    FilterConfig& f = cfg.filter;
    optional_field(j, "max_hypotheses", path, f.max_hypotheses, integer);
    optional_field(j, "gibbs_iterations", path, f.gibbs_iterations, integer);
    optional_field(j, "use_ranked_assignment", path, f.use_ranked_assignment, boolean);
    optional_field(j, "requested_k_best", path, f.requested_k_best, integer);
    optional_field(j, "existence_threshold", path, f.existence_threshold, number);
    optional_field(j, "seed", path, f.seed, integer);
    optional_field(j, "threads", path, f.threads, integer);
    for (const char* key : {"max_hypotheses", "gibbs_iterations", "requested_k_best", "seed", "threads"}) {
        if (j.contains(key) && j[key].get<long long>() < 0) {
            throw FieldError(path + "." + key, "must be non-negative");
        }
    }
    if (j.contains("hygiene")) {
        const Json& h = j["hygiene"];
        const std::string p = path + ".hygiene";
        optional_field(h, "prune_threshold", p, f.hygiene.prune_threshold, number);
        optional_field(h, "merge_distance", p, f.hygiene.merge_distance, number);
        optional_field(h, "max_components", p, f.hygiene.max_components, integer);
    }
    if (j.contains("birth")) {
        const Json& b = j["birth"];
        const std::string p = path + ".birth";
        optional_field(b, "initial_count", p, cfg.birth.initial_count, integer);
        optional_field(b, "initial_probability", p, cfg.birth.initial_probability, number);
        optional_field(b, "per_scan", p, cfg.birth.per_scan, integer);
        optional_field(b, "probability", p, cfg.birth.probability, number);
        optional_field(b, "position_sd", p, cfg.birth.position_sd, number);
        optional_field(b, "velocity_sd", p, cfg.birth.velocity_sd, number);
    }
    optional_field(j, "survival_probability", path, cfg.survival_probability, number);
    optional_field(j, "detection_probability", path, cfg.detection_probability, number);
    optional_field(j, "clutter_rate", path, cfg.clutter_rate, number);
    optional_field(j, "gate", path, cfg.gate, number);
    optional_field(j, "multiscan_sweeps", path, cfg.multiscan_sweeps, integer);
    optional_field(j, "multiscan_chains", path, cfg.multiscan_chains, integer);
    try {
        f.validate();
    } catch (const std::invalid_argument& e) {
        throw FieldError(path, e.what());
    }
    return cfg;
}

// ---- track output --------------------------------------------------------------------

struct TrackState {
    int k;
    Vector x;
    double existence;
    double weight;
};

struct TrackRecord {
    Label label;
    std::vector<TrackState> states;
};

/// {"tracks": [{"label", "states": [{"k", "x", "r", "w"}]}]}; mirrors the truth schema.
inline Json tracks_to_json(const std::vector<TrackRecord>& tracks)
{
    Json out = Json::array();
    for (const auto& t : tracks) {
        Json states = Json::array();
        for (const auto& s : t.states) {
            states.push_back(Json{{"k", s.k}, {"x", to_json(s.x)}, {"r", s.existence}, {"w", s.weight}});
        }
        out.push_back(Json{{"label", to_json(t.label)}, {"states", std::move(states)}});
    }
    return Json{{"tracks", std::move(out)}};
}

inline std::vector<TrackRecord> track_records(std::span<const ScanOutput> scans)
{
    std::map<Label, TrackRecord> by_label;
    for (const auto& scan : scans) {
        for (const auto& e : scan.estimates) {
            auto& rec = by_label[e.label];
            rec.label = e.label;
            rec.states.push_back({scan.k, e.mean, e.existence, e.weight});
        }
    }
    std::vector<TrackRecord> out;
    for (auto& [label, rec] : by_label) {
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<TrackRecord> track_records(std::span<const TrajectoryEstimate> estimates)
{
    std::vector<TrackRecord> out;
    for (const auto& e : estimates) {
        TrackRecord rec{e.label, {}};
        for (std::size_t i = 0; i < e.means.size(); ++i) {
            rec.states.push_back({e.start + static_cast<int>(i), e.means[i], e.existence, e.weight});
        }
        out.push_back(std::move(rec));
    }
    return out;
}

/// Trajectories from either a scenario ("truth") or a track file ("tracks").
inline std::vector<LabeledTrajectory> trajectories_from_file_json(const Json& j, const std::string& path)
{
    if (j.contains("truth")) {
        return trajectories_from_json(j["truth"], path + ".truth");
    }
    return trajectories_from_json(field(j, "tracks", path), path + ".tracks");
}

}  // namespace lrfs::io
