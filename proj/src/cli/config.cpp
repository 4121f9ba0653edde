#include "adams/cli/config.hpp"

#include <cmath>
#include <limits>

namespace adams::cli {

namespace {

struct KeyLocation {
    std::size_t offset = std::string::npos;
    std::size_t line = 0;
};

KeyLocation find_key(const std::string* source, const std::string& key, std::size_t from) {
    if (source == nullptr) return {};
    const std::string quoted = "\"" + key + "\"";
    std::size_t pos = from;
    while ((pos = source->find(quoted, pos)) != std::string::npos) {
        std::size_t after = pos + quoted.size();
        while (after < source->size() && std::isspace(static_cast<unsigned char>((*source)[after]))) ++after;
        if (after < source->size() && (*source)[after] == ':') {
            std::size_t line = 1;
            for (std::size_t i = 0; i < pos; ++i) line += (*source)[i] == '\n';
            return {pos, line};
        }
        pos = after;
    }
    return {};
}

std::string describe(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return "null";
        case Json::value_t::boolean: return "a boolean";
        case Json::value_t::string: return "a string";
        case Json::value_t::array: return "an array";
        case Json::value_t::object: return "an object";
        default: return "a number";
    }
}

Json parse_document(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    try {
        Json j = Json::parse(text);
        if (!j.is_object()) throw SchemaError("config root must be a JSON object", 1);
        return j;
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
        throw SchemaError(std::string("invalid JSON: ") + e.what(), line);
    }
}

void check_version(ObjectReader& root) {
    auto v = root.integer("schema_version", kSchemaVersion);
    if (v != kSchemaVersion) {
        root.fail("schema_version", "unsupported schema_version " + std::to_string(v) + " (expected " +
                                        std::to_string(kSchemaVersion) + ")");
    }
}

Common read_common(ObjectReader& root, const Overrides& o) {
    Common c;
    c.seed = root.unsigned_integer("seed", c.seed);
    auto threads = root.integer("threads", 1);
    if (threads < 0) root.fail("threads", "must be >= 0");
    c.threads = static_cast<unsigned>(threads);
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    return c;
}

HyperParams read_hyper(ObjectReader r, OptimizerKind& kind, const HyperParams& defaults) {
    try {
        kind = parse_optimizer_kind(r.string("kind", std::string(to_string(kind))));
    } catch (const ConfigError& e) {
        r.fail("kind", e.what());
    }
    HyperParams h = defaults;
    h.beta1 = r.number("beta1", h.beta1);
    h.beta2 = r.number("beta2", h.beta2);
    h.weight_decay = r.number("weight_decay", h.weight_decay);
    h.epsilon = r.number("epsilon", h.epsilon);
    h.peak_lr = r.number("peak_lr", h.peak_lr);
    h.clip_threshold = r.nullable_number("clip_threshold", h.clip_threshold);
    h.bias_correction = r.boolean("bias_correction", h.bias_correction);
    r.finish();
    try {
        h.validate();
    } catch (const ConfigError& e) {
        r.fail("kind", e.what());
    }
    return h;
}

Json hyper_json(OptimizerKind kind, const HyperParams& h) {
    Json j;
    j["kind"] = std::string(to_string(kind));
    j["beta1"] = h.beta1;
    j["beta2"] = h.beta2;
    j["weight_decay"] = h.weight_decay;
    j["epsilon"] = h.epsilon;
    j["peak_lr"] = h.peak_lr;
    j["clip_threshold"] = h.clip_threshold ? Json(*h.clip_threshold) : Json(nullptr);
    j["bias_correction"] = h.bias_correction;
    return j;
}

std::size_t read_size(ObjectReader& r, const std::string& key, std::size_t fallback) {
    auto v = r.integer(key, static_cast<std::int64_t>(fallback));
    if (v < 0) r.fail(key, "must be >= 0");
    return static_cast<std::size_t>(v);
}

/// Reads the training keys shared by train, compare-updates and sweep.
TrainConfig read_train(ObjectReader& root, const Common& common, const Overrides& o, TrainConfig t) {
    t.seed = common.seed;
    t.threads = common.threads;
    t.hyper = read_hyper(root.object("optimizer"), t.optimizer, t.hyper);

    auto sched = root.object("schedule");
    t.steps = sched.integer("steps", t.steps);
    t.warmup_steps = sched.integer("warmup_steps", t.warmup_steps);
    t.final_lr_fraction = sched.number("final_lr_fraction", t.final_lr_fraction);
    sched.finish();
    if (o.steps) {
        t.steps = *o.steps;
        // A shortened run keeps a proportionate warmup rather than failing validation.
        if (t.steps > 0 && t.warmup_steps >= t.steps) t.warmup_steps = t.steps / 10;
    }

    auto model = root.object("model");
    t.model.vocab = read_size(model, "vocab", t.model.vocab);
    t.model.context = read_size(model, "context", t.model.context);
    t.model.embed = read_size(model, "embed", t.model.embed);
    t.model.hidden = read_size(model, "hidden", t.model.hidden);
    model.finish();
    t.corpus.vocab = t.model.vocab;

    auto corpus = root.object("corpus");
    t.corpus_seed = corpus.unsigned_integer("seed", t.corpus_seed);
    t.corpus_length = read_size(corpus, "length", t.corpus_length);
    auto kind = corpus.string("kind", "random");
    if (kind == "random") {
        t.corpus.kind = ChainKind::kRandom;
    } else if (kind == "peaked") {
        t.corpus.kind = ChainKind::kPeaked;
    } else {
        corpus.fail("kind", "unknown corpus kind '" + kind + "' (expected random or peaked)");
    }
    t.corpus.sharpness = corpus.number("sharpness", t.corpus.sharpness);
    t.corpus.row_max = corpus.number("row_max", t.corpus.row_max);
    t.val_fraction = corpus.number("val_fraction", t.val_fraction);
    corpus.finish();

    t.batch_size = read_size(root, "batch_size", t.batch_size);
    t.eval_size = read_size(root, "eval_size", t.eval_size);
    t.record_stride = root.integer("record_stride", t.record_stride);
    try {
        t.validate();
    } catch (const ConfigError& e) {
        throw SchemaError(std::string("invalid training configuration: ") + e.what(), 0);
    }
    return t;
}

Json train_json(const TrainConfig& t) {
    Json j;
    j["optimizer"] = hyper_json(t.optimizer, t.hyper);
    j["schedule"] = {{"steps", t.steps}, {"warmup_steps", t.warmup_steps}, {"final_lr_fraction", t.final_lr_fraction}};
    j["model"] = {{"vocab", t.model.vocab}, {"context", t.model.context}, {"embed", t.model.embed},
                  {"hidden", t.model.hidden}};
    j["corpus"] = {{"seed", t.corpus_seed},
                   {"length", t.corpus_length},
                   {"kind", t.corpus.kind == ChainKind::kRandom ? "random" : "peaked"},
                   {"sharpness", t.corpus.sharpness},
                   {"row_max", t.corpus.row_max},
                   {"val_fraction", t.val_fraction}};
    j["batch_size"] = t.batch_size;
    j["eval_size"] = t.eval_size;
    j["record_stride"] = t.record_stride;
    return j;
}

Json common_json(const Common& c) {
    // threads is a scheduling knob and never changes results, so it is not persisted.
    return {{"schema_version", kSchemaVersion}, {"seed", c.seed}};
}

Json nullable(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

SchemaError::SchemaError(const std::string& message, std::size_t line)
    : ConfigError(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

const Json ObjectReader::kEmpty = Json::object();

ObjectReader::ObjectReader(const Json& object, std::string path, const std::string* source)
    : object_(object), path_(std::move(path)), source_(source) {}

std::size_t locate_key(const std::string& source, const std::string& key) { return find_key(&source, key, 0).line; }

void ObjectReader::fail(const std::string& key, const std::string& message) const {
    std::string full = path_.empty() ? key : path_ + "." + key;
    // Search from the enclosing object's key so nested duplicates resolve to the right line.
    std::size_t from = 0;
    std::size_t start = 0;
    while (start < path_.size()) {
        auto dot = path_.find('.', start);
        auto part = path_.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        auto loc = find_key(source_, part, from);
        if (loc.offset != std::string::npos) from = loc.offset;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    throw SchemaError(full + ": " + message, find_key(source_, key, from).line);
}

bool ObjectReader::has(const std::string& key) const { return object_.contains(key); }

const Json* ObjectReader::value(const std::string& key) {
    consumed_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
}

double ObjectReader::number(const std::string& key, double fallback) {
    const Json* v = value(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(key, "expected a number, got " + describe(*v));
    double d = v->get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
}

std::int64_t ObjectReader::integer(const std::string& key, std::int64_t fallback) {
    const Json* v = value(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(key, "expected an integer, got " + describe(*v));
    if (v->is_number_unsigned() && v->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        fail(key, "integer out of range");
    }
    return v->get<std::int64_t>();
}

std::uint64_t ObjectReader::unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const Json* v = value(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(key, "expected a non-negative integer, got " + describe(*v));
    if (!v->is_number_unsigned() && v->get<std::int64_t>() < 0) fail(key, "must be >= 0");
    return v->get<std::uint64_t>();
}

bool ObjectReader::boolean(const std::string& key, bool fallback) {
    const Json* v = value(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(key, "expected a boolean, got " + describe(*v));
    return v->get<bool>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback) {
    const Json* v = value(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(key, "expected a string, got " + describe(*v));
    return v->get<std::string>();
}

std::optional<double> ObjectReader::nullable_number(const std::string& key, std::optional<double> fallback) {
    const Json* v = value(key);
    if (!v) return fallback;
    if (v->is_null()) return std::nullopt;
    if (!v->is_number()) fail(key, "expected a number or null, got " + describe(*v));
    return v->get<double>();
}

std::vector<double> ObjectReader::numbers(const std::string& key, const std::vector<double>& fallback) {
    const Json* v = value(key);
    if (!v) return fallback;
    if (!v->is_array()) fail(key, "expected an array of numbers, got " + describe(*v));
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) fail(key, "array elements must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

ObjectReader ObjectReader::object(const std::string& key) {
    const Json* v = value(key);
    std::string path = path_.empty() ? key : path_ + "." + key;
    if (!v) return ObjectReader(kEmpty, path, source_);
    if (!v->is_object()) fail(key, "expected an object, got " + describe(*v));
    return ObjectReader(*v, path, source_);
}

void ObjectReader::finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
        if (!consumed_.count(it.key())) fail(it.key(), "unknown key");
    }
}

std::vector<EmaPoint> EmaSettings::points() const {
    std::vector<EmaPoint> out;
    for (double m : mu) {
        for (double s : sigma) {
            for (double b2 : beta2) out.push_back({ema::Process::kS, m, s, b2, 0.0});
        }
    }
    for (double m : mu) {
        for (double s : sigma) {
            for (std::size_t i = 0; i < v_beta.size(); ++i) out.push_back({ema::Process::kV, m, s, v_beta[i], v_beta1[i]});
        }
    }
    for (double m : degenerate_mu) {
        if (!beta2.empty()) out.push_back({ema::Process::kS, m, 0.0, beta2.back(), 0.0});
        if (!v_beta.empty()) out.push_back({ema::Process::kV, m, 0.0, v_beta.front(), v_beta1.front()});
    }
    return out;
}

TrainSettings parse_train(const std::string& text, const Overrides& o) {
    Json doc = parse_document(text);
    ObjectReader root(doc, "", &text);
    check_version(root);
    TrainSettings s;
    s.common = read_common(root, o);
    s.train = read_train(root, s.common, o, TrainConfig{});
    root.finish();
    return s;
}

EmaSettings parse_ema(const std::string& text, const Overrides& o) {
    Json doc = parse_document(text);
    ObjectReader root(doc, "", &text);
    check_version(root);
    EmaSettings s;
    s.common = read_common(root, o);
    s.samples = root.integer("samples", s.samples);
    if (s.samples < 10'000) root.fail("samples", "at least 10000 samples are required");
    s.burn_in = root.integer("burn_in", s.burn_in);
    if (s.burn_in < 0) root.fail("burn_in", "must be >= 0 (0 selects the automatic burn-in)");
    s.max_failure_fraction = root.number("max_failure_fraction", s.max_failure_fraction);
    auto grid = root.object("grid");
    s.mu = grid.numbers("mu", s.mu);
    s.sigma = grid.numbers("sigma", s.sigma);
    s.beta2 = grid.numbers("beta2", s.beta2);
    s.v_beta = grid.numbers("v_beta", s.v_beta);
    s.v_beta1 = grid.numbers("v_beta1", s.v_beta1);
    s.degenerate_mu = grid.numbers("degenerate_mu", s.degenerate_mu);
    if (s.v_beta.size() != s.v_beta1.size()) grid.fail("v_beta1", "must have the same length as v_beta");
    for (double v : s.sigma) {
        if (!(v >= 0.0)) grid.fail("sigma", "values must be >= 0");
    }
    auto check_betas = [&grid](const std::vector<double>& values, const char* key) {
        for (double v : values) {
            if (!(v >= 0.0 && v < 1.0)) grid.fail(key, "values must lie in [0, 1)");
        }
    };
    check_betas(s.beta2, "beta2");
    check_betas(s.v_beta, "v_beta");
    check_betas(s.v_beta1, "v_beta1");
    grid.finish();
    root.finish();
    return s;
}

TheorySettings parse_theory(const std::string& text, const Overrides& o) {
    Json doc = parse_document(text);
    ObjectReader root(doc, "", &text);
    check_version(root);
    TheorySettings s;
    s.common = read_common(root, o);

    auto obj = root.object("objective");
    s.objective = obj.string("kind", s.objective);
    if (s.objective != "cosh" && s.objective != "quadratic") {
        obj.fail("kind", "unknown objective '" + s.objective + "' (expected cosh or quadratic)");
    }
    s.dim = read_size(obj, "dim", s.dim);
    if (s.dim == 0) obj.fail("dim", "must be positive");
    s.a = obj.number("a", s.a);
    s.b = obj.number("b", s.b);
    s.curvature = obj.number("curvature", s.curvature);
    s.box = obj.number("box", s.box);
    if (!(s.a > 0.0)) obj.fail("a", "must be positive");
    if (!(s.b > 0.0)) obj.fail("b", "must be positive");
    if (!(s.curvature > 0.0)) obj.fail("curvature", "must be positive");
    if (!(s.box > 0.0)) obj.fail("box", "must be positive");
    obj.finish();

    s.points = root.integer("points", s.points);
    if (s.points < 1) root.fail("points", "must be positive");

    auto neg = root.object("negative_control");
    s.negative_l1_scale = neg.number("l1_scale", s.negative_l1_scale);
    if (!(s.negative_l1_scale > 0.0)) neg.fail("l1_scale", "must be positive");
    neg.finish();

    auto noise = root.object("noise");
    s.noise_R = noise.number("R", s.noise_R);
    s.noise_draws = noise.integer("draws", s.noise_draws);
    if (!(s.noise_R > 0.0)) noise.fail("R", "must be positive");
    if (s.noise_draws < 1) noise.fail("draws", "must be positive");
    noise.finish();

    auto upd = root.object("bounded_update");
    s.update_states = upd.integer("states", s.update_states);
    s.update_beta1 = upd.numbers("beta1", s.update_beta1);
    s.update_beta2 = upd.numbers("beta2", s.update_beta2);
    if (s.update_states < 1) upd.fail("states", "must be positive");
    upd.finish();

    auto c = root.object("constants");
    auto& in = s.constants;
    in.L0 = c.number("L0", in.L0);
    in.L1 = c.number("L1", in.L1);
    in.L = c.number("L", in.L);
    in.R = c.number("R", in.R);
    in.T = c.number("T", in.T);
    in.delta = c.number("delta", in.delta);
    in.eta = c.number("eta", in.eta);
    in.beta1 = c.number("beta1", in.beta1);
    in.beta2 = c.number("beta2", in.beta2);
    in.f_gap = c.number("f_gap", in.f_gap);
    in.d = read_size(c, "d", in.d);
    in.epsilon = c.number("epsilon", in.epsilon);
    s.constants_rel_tol = c.number("rel_tol", s.constants_rel_tol);
    auto expected = c.object("expected");
    s.expected_sigma = expected.nullable_number("sigma", std::nullopt);
    s.expected_G = expected.nullable_number("G", std::nullopt);
    s.expected_F = expected.nullable_number("F", std::nullopt);
    s.expected_C = expected.nullable_number("C", std::nullopt);
    expected.finish();
    try {
        theory::theory_constants(in);
    } catch (const std::invalid_argument& e) {
        c.fail("delta", e.what());
    }
    c.finish();
    root.finish();
    return s;
}

CompareSettings parse_compare(const std::string& text, const Overrides& o) {
    Json doc = parse_document(text);
    ObjectReader root(doc, "", &text);
    check_version(root);
    CompareSettings s;
    s.common = read_common(root, o);
    TrainConfig defaults;
    defaults.optimizer = OptimizerKind::kAdamW;
    defaults.steps = 1000;
    defaults.warmup_steps = 50;
    s.shadow.train = read_train(root, s.common, o, defaults);
    s.lion_scaling = root.boolean("lion_scaling", s.lion_scaling);
    s.shadow.shadow = OptimizerKind::kAdamS;
    HyperParams shadow_defaults = s.shadow.train.hyper;
    bool explicit_shadow = root.has("shadow");
    s.shadow.shadow_hyper = read_hyper(root.object("shadow"), s.shadow.shadow, shadow_defaults);
    if (s.lion_scaling) {
        if (s.shadow.shadow != OptimizerKind::kLion) root.fail("lion_scaling", "requires shadow.kind = lion");
        if (explicit_shadow) {
            Json sh = doc["shadow"];
            for (const char* k : {"beta1", "beta2", "weight_decay", "peak_lr"}) {
                if (sh.contains(k)) root.fail("lion_scaling", std::string("conflicts with explicit shadow.") + k);
            }
        }
        s.shadow.shadow_hyper = HyperParams::lion_from_adamw(s.shadow.train.hyper);
    }
    auto window = root.object("window");
    s.window_first = window.integer("first", s.window_first);
    s.window_last = window.integer("last", s.window_last);
    if (s.window_first < 1 || s.window_last < s.window_first) window.fail("first", "window must satisfy 1 <= first <= last");
    window.finish();
    s.baseline = root.nullable_number("baseline", s.baseline);
    root.finish();
    return s;
}

SweepSettings parse_sweep(const std::string& text, const Overrides& o) {
    Json doc = parse_document(text);
    ObjectReader root(doc, "", &text);
    check_version(root);
    SweepSettings s;
    s.common = read_common(root, o);
    s.train = read_train(root, s.common, o, TrainConfig{});
    auto grid = root.object("grid");
    s.beta1 = grid.numbers("beta1", s.beta1);
    s.beta2 = grid.numbers("beta2", s.beta2);
    if (s.beta1.empty() || s.beta2.empty()) grid.fail("beta1", "grid axes must be non-empty");
    for (double b : s.beta1) {
        if (!(b >= 0.0 && b < 1.0)) grid.fail("beta1", "values must lie in [0, 1)");
    }
    for (double b : s.beta2) {
        if (!(b >= 0.0 && b < 1.0)) grid.fail("beta2", "values must lie in [0, 1)");
    }
    grid.finish();
    s.flag_tolerance = root.number("flag_tolerance", s.flag_tolerance);
    if (!(s.flag_tolerance >= 0.0)) root.fail("flag_tolerance", "must be >= 0");
    root.finish();
    return s;
}

Json to_json(const TrainSettings& s) {
    Json j = common_json(s.common);
    j.update(train_json(s.train));
    return j;
}

Json to_json(const EmaSettings& s) {
    Json j = common_json(s.common);
    j["samples"] = s.samples;
    j["burn_in"] = s.burn_in;
    j["max_failure_fraction"] = s.max_failure_fraction;
    j["grid"] = {{"mu", s.mu},         {"sigma", s.sigma},     {"beta2", s.beta2},
                 {"v_beta", s.v_beta}, {"v_beta1", s.v_beta1}, {"degenerate_mu", s.degenerate_mu}};
    return j;
}

Json to_json(const TheorySettings& s) {
    Json j = common_json(s.common);
    j["objective"] = {{"kind", s.objective}, {"dim", s.dim},   {"a", s.a},
                      {"b", s.b},            {"curvature", s.curvature}, {"box", s.box}};
    j["points"] = s.points;
    j["negative_control"] = {{"l1_scale", s.negative_l1_scale}};
    j["noise"] = {{"R", s.noise_R}, {"draws", s.noise_draws}};
    j["bounded_update"] = {{"states", s.update_states}, {"beta1", s.update_beta1}, {"beta2", s.update_beta2}};
    const auto& in = s.constants;
    j["constants"] = {{"L0", in.L0},       {"L1", in.L1},       {"L", in.L},         {"R", in.R},
                      {"T", in.T},         {"delta", in.delta}, {"eta", in.eta},     {"beta1", in.beta1},
                      {"beta2", in.beta2}, {"f_gap", in.f_gap}, {"d", in.d},         {"epsilon", in.epsilon},
                      {"rel_tol", s.constants_rel_tol},
                      {"expected",
                       {{"sigma", nullable(s.expected_sigma)},
                        {"G", nullable(s.expected_G)},
                        {"F", nullable(s.expected_F)},
                        {"C", nullable(s.expected_C)}}}};
    return j;
}

Json to_json(const CompareSettings& s) {
    Json j = common_json(s.common);
    j.update(train_json(s.shadow.train));
    j["lion_scaling"] = s.lion_scaling;
    Json shadow = hyper_json(s.shadow.shadow, s.shadow.shadow_hyper);
    if (s.lion_scaling) shadow = {{"kind", "lion"}};
    j["shadow"] = shadow;
    j["window"] = {{"first", s.window_first}, {"last", s.window_last}};
    j["baseline"] = nullable(s.baseline);
    return j;
}

Json to_json(const SweepSettings& s) {
    Json j = common_json(s.common);
    j.update(train_json(s.train));
    j["grid"] = {{"beta1", s.beta1}, {"beta2", s.beta2}};
    j["flag_tolerance"] = s.flag_tolerance;
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace adams::cli
