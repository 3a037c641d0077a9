#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetnet/hetnet.hpp"
#include "hetnet/spec_io.hpp"

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json defaults() {
    return json::parse(R"({
      "network": null,
      "field": {"name": "", "params": {}},
      "seed": 1,
      "neighborhoods": {"delta": 0.05, "u_factor": 0.9, "v_factor": 0.9, "u_radii": {}, "v_radii": {}},
      "trace": {"t_max": 2000, "min_points": 500, "segment_fraction": 0.1},
      "integrator": {"rel": 1e-8, "abs": 1e-10, "h_max": null, "max_steps": 20000000, "escape_radius": null},
      "simulate": {"x0": null, "t_max": 100, "events": true},
      "itinerary": {"x0": null, "t_max": 2500, "horizon_symbols": 60, "coding": 0},
      "basin": {"n_samples": 200, "region": {"type": "tube"}, "deltas": null, "horizon_time": 2500,
                "horizon_symbols": 60, "convergence_threshold": null, "prefix": null, "target": null,
                "k_max": 12, "window": 12, "min_symbols": 6, "min_trailing_zeros": 2, "coding": 0},
      "returnmap": {"c": 2, "e": 1, "c_tilde": -1, "c_hat": 1, "eps": 1, "delta0": 0.5, "n_max": 10,
                    "nu_A": 2, "nu_B": 4, "m_min": 1, "m_max": 20, "fit_m_min": 10, "fit_m_max": 20},
      "validate": {"sequences": []}
    })");
}

void deep_merge(json& base, const json& patch) {
    for (const auto& [k, v] : patch.items()) {
        if (v.is_object() && base.contains(k) && base[k].is_object()) deep_merge(base[k], v);
        else base[k] = v;
    }
}

double num_or_inf(const json& j) { return j.is_null() ? kInf : j.get<double>(); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Flags {
    std::string config;
    std::string network;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::string out = "out";
    double delta = 0.0;
    double t_max = 0.0;
    double rel = 0.0;
    double abs = 0.0;
    std::vector<double> x0;
    std::size_t n_samples = 0;
    long horizon_symbols = 0;
    CLI::Option *o_network{}, *o_seed{}, *o_delta{}, *o_t_max{}, *o_rel{}, *o_abs{}, *o_x0{}, *o_n{}, *o_h{};
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "Run config (JSON)");
    f.o_network = sub->add_option("--network", f.network, "Network spec path (overrides the config)");
    f.o_seed = sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", f.out, "Output directory");
    f.o_delta = sub->add_option("--delta", f.delta, "Tube radius");
    f.o_rel = sub->add_option("--rel-tol", f.rel, "Integrator relative tolerance");
    f.o_abs = sub->add_option("--abs-tol", f.abs, "Integrator absolute tolerance");
}

// config file < flags
json resolve_config(const std::string& command, const Flags& f) {
    json cfg = defaults();
    if (!f.config.empty()) {
        const json file = load_json_file(f.config);
        if (!file.is_object()) throw SpecError("'" + f.config + "': config must be a JSON object");
        deep_merge(cfg, file);
        if (cfg["network"].is_string()) {
            fs::path p = cfg["network"].get<std::string>();
            if (p.is_relative()) p = fs::path(f.config).parent_path() / p;
            cfg["network"] = p.lexically_normal().string();
        }
    }
    if (f.o_network->count()) cfg["network"] = f.network;
    if (f.o_seed->count()) cfg["seed"] = f.seed;
    if (f.o_delta->count()) {
        cfg["neighborhoods"]["delta"] = f.delta;
        cfg["basin"]["deltas"] = json::array({f.delta});
    }
    if (f.o_rel->count()) cfg["integrator"]["rel"] = f.rel;
    if (f.o_abs->count()) cfg["integrator"]["abs"] = f.abs;
    if (f.o_t_max && f.o_t_max->count()) {
        if (command == "basin") cfg["basin"]["horizon_time"] = f.t_max;
        else cfg[command]["t_max"] = f.t_max;
    }
    if (f.o_x0 && f.o_x0->count()) cfg[command]["x0"] = f.x0;
    if (f.o_n && f.o_n->count()) cfg["basin"]["n_samples"] = f.n_samples;
    if (f.o_h && f.o_h->count()) cfg[command]["horizon_symbols"] = f.horizon_symbols;
    cfg["command"] = command;
    return cfg;
}

IntegratorOptions integrator_options(const json& cfg) {
    const json& j = cfg.at("integrator");
    IntegratorOptions io;
    io.rel = j.at("rel").get<double>();
    io.abs = j.at("abs").get<double>();
    io.h_max = num_or_inf(j.at("h_max"));
    io.max_steps = j.at("max_steps").get<std::size_t>();
    io.escape_radius = num_or_inf(j.at("escape_radius"));
    io.validate();
    return io;
}

struct Model {
    NetworkSpec spec;
    std::optional<VectorField> field;
};

Model load_model(const json& cfg, bool need_field) {
    if (!cfg.at("network").is_string()) throw SpecError("config: 'network' (spec path) is required");
    Model m{load_network_spec(cfg.at("network").get<std::string>()), std::nullopt};
    if (need_field || !m.spec.fields.empty()) {
        const FieldSpec& fspec = find_field(m.spec, cfg.at("field").value("name", ""));
        m.field = build_field(fspec, cfg.at("field").value("params", json::object()));
        if (m.field->dim != m.spec.network.dim())
            throw SpecError("field '" + fspec.name + "' has dimension " + std::to_string(m.field->dim) + ", network has " + std::to_string(m.spec.network.dim()));
    }
    return m;
}

std::shared_ptr<const NetworkGeometry> trace(const json& cfg, const Model& m, double min_delta) {
    const json& t = cfg.at("trace");
    TraceOptions opt;
    opt.t_max = t.at("t_max").get<double>();
    opt.min_points = t.at("min_points").get<std::size_t>();
    opt.max_segment = t.at("segment_fraction").get<double>() * min_delta;
    return std::make_shared<const NetworkGeometry>(trace_network(m.spec.network, *m.field, opt));
}

NeighborhoodSet neighborhoods(const json& cfg, const Model& m, std::shared_ptr<const NetworkGeometry> g, double delta) {
    const json& n = cfg.at("neighborhoods");
    RadiiOverrides r;
    r.u_factor = n.at("u_factor").get<double>();
    r.v_factor = n.at("v_factor").get<double>();
    for (const auto& [k, v] : n.at("u_radii").items()) r.u[std::stoi(k)] = v.get<double>();
    for (const auto& [k, v] : n.at("v_radii").items()) r.v[std::stoi(k)] = v.get<double>();
    return make_neighborhoods(m.spec.network, std::move(g), delta, r);
}

State initial_point(const json& section, const HeteroclinicNetwork& net) {
    if (!section.contains("x0") || section.at("x0").is_null()) throw SpecError("config: initial point x0 is required");
    State x0 = section.at("x0").get<State>();
    if (x0.size() != net.dim()) throw SpecError("config: x0 has dimension " + std::to_string(x0.size()) + ", network has " + std::to_string(net.dim()));
    return x0;
}

const CycleCoding* pick_coding(const Model& m, const json& section) {
    if (m.spec.codings.empty()) return nullptr;
    const auto i = section.value("coding", std::size_t{0});
    if (i >= m.spec.codings.size()) throw SpecError("config: coding index out of range");
    return &m.spec.codings[i];
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json periodicity_json(const std::optional<Periodicity>& p) {
    if (!p) return nullptr;
    return {{"kind", p->preperiod == 0 ? "periodic" : "preperiodic"}, {"period", p->period}, {"preperiod", p->preperiod}};
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const json& cfg, const fs::path& out) {
    const json& s = cfg.at("simulate");
    const double t_max = s.at("t_max").get<double>();
    if (!(t_max > 0.0)) throw SpecError("simulate: t_max must be positive");
    const IntegratorOptions io = integrator_options(cfg);
    const Model m = load_model(cfg, true);
    const State x0 = initial_point(s, m.spec.network);
    std::optional<NeighborhoodSet> nb;
    if (s.at("events").get<bool>()) {
        const double delta = cfg.at("neighborhoods").at("delta").get<double>();
        nb = neighborhoods(cfg, m, trace(cfg, m, delta), delta);
    }
    IntegratorOptions run_io = io;
    if (nb && !std::isfinite(run_io.escape_radius)) run_io.escape_radius = default_escape_radius(*nb->geometry);
    const TrajectoryRecord rec = integrate(*m.field, x0, t_max, run_io, nb ? &*nb : nullptr);
    std::ostringstream csv;
    write_trajectory_csv(csv, rec);
    write_text_file(out / "trajectory.csv", csv.str());
    json rep;
    rep["config"] = cfg;
    rep["status"] = to_string(rec.status);
    rep["message"] = rec.message;
    rep["t_end"] = rec.t_end();
    rep["points"] = rec.size();
    rep["events"] = events_json(rec, nb ? &*nb : nullptr);
    write_text_file(out / "events.json", dump(rep));
    std::cout << "simulate: " << to_string(rec.status) << ", " << rec.size() << " points, " << rec.events.size() << " events -> " << out.string() << "\n";
    if (!rec.ok()) {
        std::cerr << "error: integration " << to_string(rec.status) << ": " << rec.message << "\n";
        return 1;
    }
    return 0;
}

// --------------------------------------------------------------- itinerary

int cmd_itinerary(const json& cfg, const fs::path& out) {
    const json& s = cfg.at("itinerary");
    const double t_max = s.at("t_max").get<double>();
    if (!(t_max > 0.0)) throw SpecError("itinerary: t_max must be positive");
    const long horizon = s.at("horizon_symbols").get<long>();
    if (horizon < 1) throw SpecError("itinerary: horizon_symbols must be at least 1");
    const IntegratorOptions io = integrator_options(cfg);
    const Model m = load_model(cfg, true);
    const State x0 = initial_point(s, m.spec.network);
    const CycleCoding* coding = pick_coding(m, s);
    const double delta = cfg.at("neighborhoods").at("delta").get<double>();
    const NeighborhoodSet nb = neighborhoods(cfg, m, trace(cfg, m, delta), delta);

    IntegratorOptions run_io = io;
    if (!std::isfinite(run_io.escape_radius)) run_io.escape_radius = default_escape_radius(*nb.geometry);
    const TrajectoryRecord rec = integrate(*m.field, x0, t_max, run_io, &nb);
    const VisitTimeline tl = make_timeline(rec);
    json rep;
    rep["config"] = cfg;
    rep["status"] = to_string(rec.status);
    rep["t_end"] = rec.t_end();
    const auto mi = try_extract_maximal_itinerary(tl, nb, static_cast<std::size_t>(horizon));
    Word word;
    if (!mi) {
        rep["verdict"] = tl.any_u ? "unsettled" : "no_anchor";
    } else {
        word = mi->word;
        const FollowCertificate cert = follows(tl, word, nb);
        rep["verdict"] = word.empty() && !tl.any_u ? "no_anchor" : verdict_string(cert);
        rep["entry_time"] = mi->entry_time;
        rep["restarts"] = mi->restarts;
        rep["shift_consistent"] = shift_consistency_check(tl, nb, word);
    }
    rep["word"] = word;
    rep["word_length"] = word.size();
    rep["periodicity"] = periodicity_json(detect_periodic_tail(word, 2));
    if (coding) {
        const auto rc = detail::recode_from_anchor(*coding, word);
        rep["recoded"] = rc ? json(*rc) : json(nullptr);
    }
    rep["visits"] = tl.visits.size();
    write_text_file(out / "itinerary.json", dump(rep));
    std::cout << "itinerary: " << rep["verdict"].get<std::string>() << ", word " << to_string(word);
    if (rep.contains("recoded") && rep["recoded"].is_string()) std::cout << " (" << rep["recoded"].get<std::string>() << ")";
    std::cout << "\n";
    if (!rec.ok()) {
        std::cerr << "error: integration " << to_string(rec.status) << ": " << rec.message << "\n";
        return 1;
    }
    return 0;
}

// ------------------------------------------------------------------- basin

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json estimate_json(const BasinEstimate& e) {
    json j;
    j["target"] = e.target;
    j["delta"] = e.delta;
    j["convergence_threshold"] = finite_or_null(e.convergence_threshold);
    j["total"] = e.total;
    j["failed"] = e.failed;
    j["valid"] = e.valid;
    j["followed"] = e.followed;
    j["followed_fraction"] = e.followed_fraction();
    j["followed_ci"] = interval_json(e.followed_ci);
    j["attracted"] = e.attracted;
    j["attracted_fraction"] = e.attracted_fraction();
    j["attracted_ci"] = interval_json(e.attracted_ci);
    if (!e.per_k.empty()) {
        j["k_max"] = e.k_max;
        j["per_k"] = e.per_k;
        j["basin"] = e.basin;
        j["basin_fraction"] = e.basin_fraction();
        j["basin_ci"] = interval_json(e.basin_ci);
        j["inclusion_violations"] = e.inclusion_violations;
        j["certificate_mismatches"] = e.certificate_mismatches;
    }
    return j;
}

json census_json(const SequenceCensus& c) {
    json j;
    j["total"] = c.total;
    j["failed"] = c.failed;
    j["unsettled"] = c.unsettled;
    j["unresolved"] = c.unresolved;
    j["classified"] = c.classified;
    j["classified_fraction"] = c.classified_fraction();
    j["conflicts"] = c.conflicts;
    j["classes"] = json::array();
    for (const auto& cl : c.classes) {
        json k;
        k["key"] = cl.key;
        k["kind"] = cl.kind == CensusClass::Kind::periodic ? "periodic" : "irregular";
        k["representative"] = cl.representative;
        k["count"] = cl.count;
        k["recoded"] = cl.recoded ? json(*cl.recoded) : json(nullptr);
        k["heads"] = json::object();
        for (const auto& [h, n] : cl.heads) k["heads"][h] = n;
        k["uncodable_members"] = cl.uncodable_members;
        j["classes"].push_back(std::move(k));
    }
    return j;
}

SymbolSequence parse_target(const json& t, const CycleCoding* coding) {
    auto decoded = [&](const char* key) {
        if (!coding) throw SpecError("basin target uses coded words but the network has no coding");
        const std::string text = t.at(key).get<std::string>();
        return decode(*coding, split_code(*coding, text));
    };
    if (t.contains("word")) return SymbolSequence::finite(t.at("word").get<Word>());
    if (t.contains("tail")) return SymbolSequence::eventually_periodic(t.value("head", Word{}), t.at("tail").get<Word>());
    if (t.contains("coded_tail"))
        return SymbolSequence::eventually_periodic(t.contains("coded_head") ? decoded("coded_head") : Word{}, decoded("coded_tail"));
    if (t.contains("staircase")) {
        const json& r = t.at("staircase");
        StaircaseRule rule{r.at("a").get<Word>(), r.at("b").get<Word>(), r.value("first_exponent", std::size_t{1}), r.value("step", std::size_t{1})};
        return SymbolSequence::generated(rule, t.value("offset", std::size_t{0}));
    }
    throw SpecError("basin target needs one of word, tail, coded_tail or staircase");
}

std::string samples_csv(const std::vector<SampleOutcome>& outs, const SequenceCensus& census, const BasinEstimate* decomposition,
                        std::size_t dim) {
    std::ostringstream s;
    s << "index";
    for (std::size_t k = 0; k < dim; ++k) s << ",x" << k + 1;
    s << ",status,settled,word,minimal_k,terminal_distance,class\n";
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto& o = outs[i];
        s << i;
        for (double v : o.initial) s << ',' << format_double(v);
        s << ',' << to_string(o.status) << ',' << (o.settled ? 1 : 0) << ',';
        for (std::size_t k = 0; k < o.word.size(); ++k) s << (k ? " " : "") << o.word[k];
        s << ',';
        if (decomposition && decomposition->minimal_k[i] >= 0) s << decomposition->minimal_k[i];
        s << ',' << format_double(o.terminal_distance) << ',';
        if (census.sample_class[i] >= 0) s << census.classes[static_cast<std::size_t>(census.sample_class[i])].key;
        s << '\n';
    }
    return s.str();
}

int cmd_basin(const json& cfg, const fs::path& out, std::size_t jobs) {
    const json& b = cfg.at("basin");
    SamplingPlan proto;
    proto.n_samples = b.at("n_samples").get<std::size_t>();
    proto.seed = cfg.at("seed").get<std::uint64_t>();
    proto.horizon_time = b.at("horizon_time").get<double>();
    proto.horizon_symbols = b.at("horizon_symbols").get<std::size_t>();
    proto.convergence_threshold = num_or_inf(b.at("convergence_threshold"));
    std::vector<double> deltas = b.at("deltas").is_null() ? std::vector<double>{cfg.at("neighborhoods").at("delta").get<double>()}
                                                           : b.at("deltas").get<std::vector<double>>();
    if (deltas.empty()) throw SpecError("basin: deltas must not be empty");
    const json& region = b.at("region");
    const std::string region_type = region.value("type", "tube");
    std::optional<BallRegion> ball;
    if (region_type == "ball") {
        ball = BallRegion{region.at("center").get<State>(), region.at("radius").get<double>()};
    } else if (region_type != "tube") {
        throw SpecError("basin: region type must be 'tube' or 'ball'");
    }
    for (double d : deltas) {
        SamplingPlan p = proto;
        if (ball) p.region = *ball;
        else p.region = TubeRegion{d};
        p.validate();
    }
    DecompositionOptions dopt;
    dopt.k_max = b.at("k_max").get<std::size_t>();
    dopt.window = b.at("window").get<std::size_t>();
    if (dopt.window == 0) throw SpecError("basin: window must be positive");
    const IntegratorOptions io = integrator_options(cfg);
    const Model m = load_model(cfg, true);
    const CycleCoding* coding = pick_coding(m, b);
    std::optional<Word> prefix;
    if (!b.at("prefix").is_null()) {
        prefix = b.at("prefix").get<Word>();
        if (!validate_sequence(m.spec.network, *prefix).valid) throw SpecError("basin: prefix is not a sequence on the network");
    }
    std::optional<SymbolSequence> target;
    if (!b.at("target").is_null()) {
        target = parse_target(b.at("target"), coding);
        if (!validate_sequence(m.spec.network, *target, 200).valid) throw SpecError("basin: target is not a sequence on the network");
    }
    CensusOptions copt;
    copt.min_symbols = b.at("min_symbols").get<std::size_t>();
    copt.coding = coding;

    const auto geometry = trace(cfg, m, *std::min_element(deltas.begin(), deltas.end()));
    json rep;
    rep["config"] = cfg;
    rep["runs"] = json::array();
    std::vector<BasinEstimate> decompositions;
    std::size_t failed = 0;
    for (double delta : deltas) {
        SamplingPlan plan = proto;
        if (ball) plan.region = *ball;
        else plan.region = TubeRegion{delta};
        const NeighborhoodSet nb = neighborhoods(cfg, m, geometry, delta);
        const SampleSet samples = sample_region(plan, *geometry);
        BasinContext ctx{&m.spec.network, &*m.field, &nb, io, jobs};
        const auto outs = run_samples(ctx, plan, samples);
        json run;
        run["delta"] = delta;
        run["region_volume"] = samples.region_volume;
        run["attempts"] = samples.attempts;
        if (prefix) {
            run["stable_set"] = estimate_json(estimate_stable_set(outs, nb, m.spec.network, *prefix));
            run["attracting_set"] = estimate_json(estimate_attracting_set(outs, nb, m.spec.network, *prefix, plan.convergence_threshold));
        }
        std::optional<BasinEstimate> dec;
        if (target) {
            dec = estimate_basin_decomposition(outs, nb, m.spec.network, *target, plan.convergence_threshold, dopt);
            run["decomposition"] = estimate_json(*dec);
            decompositions.push_back(*dec);
        }
        const SequenceCensus cen = census(outs, nb, copt);
        run["census"] = census_json(cen);
        for (const auto& o : outs) failed += o.failed();
        std::ostringstream name;
        name << "samples_delta_" << format_double(delta) << ".csv";
        run["samples_file"] = name.str();
        write_text_file(out / name.str(), samples_csv(outs, cen, dec ? &*dec : nullptr, m.spec.network.dim()));
        std::cout << "basin: delta=" << delta << " classified " << cen.classified << "/" << cen.total << " in " << cen.classes.size()
                  << " classes, conflicts " << cen.conflicts;
        if (dec) std::cout << ", basin " << dec->basin << "/" << dec->valid;
        std::cout << "\n";
        rep["runs"].push_back(std::move(run));
    }
    if (target) {
        const FasEvidence ev = classify_fas_evidence(decompositions, b.at("min_trailing_zeros").get<std::size_t>());
        rep["evidence"] = {{"label", to_string(ev.label)}, {"rationale", ev.rationale}};
        std::cout << "basin: evidence " << to_string(ev.label) << "\n";
    }
    rep["failed_samples"] = failed;
    write_text_file(out / "basin_report.json", dump(rep));
    return 0;
}

// --------------------------------------------------------------- returnmap

int cmd_returnmap(const json& cfg, const fs::path& out) {
    const json& r = cfg.at("returnmap");
    ReturnMapParams p;
    p.c = r.at("c").get<double>();
    p.e = r.at("e").get<double>();
    p.c_tilde = r.at("c_tilde").get<double>();
    p.c_hat = r.at("c_hat").get<double>();
    p.eps = r.at("eps").get<double>();
    p.delta0 = r.at("delta0").get<double>();
    p.validate();
    const long n_max = r.at("n_max").get<long>();
    const double nu_A = r.at("nu_A").get<double>(), nu_B = r.at("nu_B").get<double>();
    const long m_min = r.at("m_min").get<long>(), m_max = r.at("m_max").get<long>();
    const long f_lo = r.at("fit_m_min").get<long>(), f_hi = r.at("fit_m_max").get<long>();
    if (n_max < 1) throw SpecError("returnmap: n_max must be at least 1");
    if (!(nu_A > 0.0) || !(nu_B > 0.0)) throw SpecError("returnmap: nu_A and nu_B must be positive");
    if (m_min < 0 || m_max < m_min) throw SpecError("returnmap: need 0 <= m_min <= m_max");

    const double nu = p.nu();
    json meta = {{"table", "time_for_n_turns"}, {"formula", "T^n = c_tilde ln(delta0) (1 - nu^n) / (1 - nu), local map delta -> delta^nu"},
                 {"c", p.c}, {"e", p.e}, {"nu", nu}, {"c_tilde", p.c_tilde}, {"delta0", p.delta0}};
    std::ostringstream t;
    t << "# " << meta.dump() << "\n";
    t << "n,delta_n,T_closed,T_sum,status\n";
    const LocalMapOrbit orbit = iterate_local_map(p.delta0, nu, static_cast<std::size_t>(n_max));
    double sum = 0.0;
    for (long n = 1; n <= n_max; ++n) {
        const double prev = orbit.values[static_cast<std::size_t>(n - 1)];
        const double dn = orbit.values[static_cast<std::size_t>(n)];
        sum = prev > 0.0 ? sum + transition_time(prev, p.c_tilde) : kInf;
        const double closed = total_time_n_turns(p.delta0, nu, static_cast<double>(n), p.c_tilde);
        t << n << ',' << format_double(dn) << ',' << format_double(closed) << ',' << format_double(sum) << ','
          << (dn > 0.0 ? "ok" : "underflow") << '\n';
    }
    write_text_file(out / "time_for_n_turns.csv", t.str());

    json meta2 = {{"table", "turn_count"}, {"formula", "(1 - nu_A^n) / (1 - nu_A) = (1 - nu_B^m) / (1 - nu_B)"}, {"nu_A", nu_A}, {"nu_B", nu_B}};
    std::ostringstream c;
    c << "# " << meta2.dump() << "\n";
    c << "m,n,status,local_slope\n";
    double prev = std::numeric_limits<double>::quiet_NaN();
    std::size_t flagged = 0;
    for (long m = m_min; m <= m_max; ++m) {
        c << m << ',';
        try {
            const double n = n_of_m(static_cast<double>(m), nu_A, nu_B);
            c << format_double(n) << ",ok,";
            if (!std::isnan(prev)) c << format_double(n - prev);
            prev = n;
        } catch (const DomainError& e) {
            std::string msg = e.what();
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            c << ",domain_error: " << msg << ',';
            prev = std::numeric_limits<double>::quiet_NaN();
            ++flagged;
        }
        c << '\n';
    }
    write_text_file(out / "turn_count.csv", c.str());

    json rep;
    rep["config"] = cfg;
    rep["nu"] = nu;
    rep["stability"] = to_string(cycle_stability(p.c, p.e));
    rep["flagged_rows"] = flagged;
    if (nu_A > 1.0 && nu_B > 1.0 && f_lo >= 1 && f_hi - f_lo >= 3) {
        const TurnCountReport lr = asymptotic_linearity_report(nu_A, nu_B, static_cast<int>(f_lo), static_cast<int>(f_hi));
        rep["linearity"] = {{"m_range", {f_lo, f_hi}},
                            {"slope", lr.tail_fit.slope},
                            {"intercept", lr.tail_fit.intercept},
                            {"max_rel_residual", lr.tail_fit.max_rel_residual},
                            {"conjectured_slope", lr.conjectured_slope},
                            {"slope_scan", lr.slope_scan}};
    } else {
        rep["linearity"] = nullptr;
        rep["linearity_skipped"] = "needs nu_A > 1, nu_B > 1 and a fit range of at least 4 points";
    }
    write_text_file(out / "returnmap_report.json", dump(rep));
    std::cout << "returnmap: nu=" << nu << " (" << rep["stability"].get<std::string>() << "), " << flagged << " flagged rows -> " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const json& cfg, const fs::path& out) {
    const Model m = load_model(cfg, false);
    const auto& net = m.spec.network;
    json rep;
    rep["config"] = cfg;
    rep["network"] = {{"ambient_dim", net.dim()}, {"equilibria", net.equilibria().size()}, {"connections", net.connections().size()}};
    rep["distribution_nodes"] = distribution_nodes(net);
    rep["codings"] = json::array();
    for (const auto& c : m.spec.codings) {
        json j;
        j["anchor"] = c.anchor() ? json(*c.anchor()) : json(nullptr);
        for (const auto& [label, w] : c.symbols()) j["symbols"][label] = w;
        rep["codings"].push_back(std::move(j));
    }
    bool ok = true;
    rep["sequences"] = json::array();
    for (const auto& s : cfg.at("validate").at("sequences")) {
        const Word w = s.get<Word>();
        const SequenceCheck chk = validate_sequence(net, w);
        ok = ok && chk.valid;
        rep["sequences"].push_back({{"word", w}, {"valid", chk.valid}, {"first_violation", chk.first_violation ? json(*chk.first_violation) : json(nullptr)}});
    }
    if (m.field) {
        const double delta = cfg.at("neighborhoods").at("delta").get<double>();
        const auto g = trace(cfg, m, delta);
        const NeighborhoodSet nb = neighborhoods(cfg, m, g, delta);
        json geo = json::array();
        for (const auto& pl : g->polylines())
            geo.push_back({{"connection", pl.connection}, {"length", pl.length()}, {"points", pl.points.size()}});
        rep["field"] = m.field->name;
        rep["geometry"] = geo;
        json radii;
        for (const auto& [id, ball] : nb.U) radii["U"][std::to_string(id)] = ball.radius;
        for (const auto& [id, ball] : nb.V) radii["V"][std::to_string(id)] = ball.radius;
        rep["neighborhoods"] = {{"delta", delta}, {"radii", radii}};
    }
    rep["valid"] = ok;
    write_text_file(out / "validate.json", dump(rep));
    std::cout << "validate: network ok (" << net.equilibria().size() << " equilibria, " << net.connections().size() << " connections)";
    if (!ok) std::cout << ", invalid sequences present";
    std::cout << "\n";
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and symbolic analysis near heteroclinic networks"};
    app.require_subcommand(1);
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const char* name : {"simulate", "itinerary", "basin", "returnmap", "validate"}) {
        static const std::map<std::string, std::string> help = {
            {"simulate", "Integrate one trajectory and export states and events"},
            {"itinerary", "Extract the maximal itinerary of one trajectory"},
            {"basin", "Monte Carlo estimates of stable sets, basins and the sequence census"},
            {"returnmap", "Tables for the homoclinic return-map model"},
            {"validate", "Check a network spec, its codings and geometry"}};
        subs.emplace_back(name, app.add_subcommand(name, help.at(name)));
    }
    // Each subcommand gets its own copy of the shared flags; only one runs.
    std::vector<Flags> flags(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto* sub = subs[i].second;
        Flags& g = flags[i];
        add_common(sub, g);
        const std::string& name = subs[i].first;
        if (name == "simulate" || name == "itinerary" || name == "basin") g.o_t_max = sub->add_option("--t-max", g.t_max, "Integration horizon");
        if (name == "simulate" || name == "itinerary") g.o_x0 = sub->add_option("--x0", g.x0, "Initial point")->delimiter(',');
        if (name == "basin") g.o_n = sub->add_option("--n-samples", g.n_samples, "Monte Carlo samples");
        if (name == "itinerary" || name == "basin") g.o_h = sub->add_option("--horizon-symbols", g.horizon_symbols, "Symbol horizon");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    std::size_t which = 0;
    while (!subs[which].second->parsed()) ++which;
    const std::string command = subs[which].first;
    Flags& g = flags[which];

    json cfg;
    try {
        cfg = resolve_config(command, g);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const fs::path out = g.out;
    try {
        if (command == "simulate") return cmd_simulate(cfg, out);
        if (command == "itinerary") return cmd_itinerary(cfg, out);
        if (command == "basin") return cmd_basin(cfg, out, g.jobs);
        if (command == "returnmap") return cmd_returnmap(cfg, out);
        return cmd_validate(cfg, out);
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        // parameters outside an operation's domain
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
