#include "pdmp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace pdmp {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::toy: return "toy";
        case ModelKind::morris_lecar: return "morris-lecar";
        case ModelKind::custom: return "custom";
    }
    return "?";
}

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::simulate: return "simulate";
        case ExperimentKind::couple: return "couple";
        case ExperimentKind::bounds: return "bounds";
        case ExperimentKind::full_check: return "full-check";
        case ExperimentKind::audit: return "audit";
    }
    return "?";
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

struct Value {
    enum class Kind { scalar, string, list, matrix } kind = Kind::scalar;
    std::string text;  // raw token for scalars, contents for strings
    std::vector<double> list;
    std::vector<std::vector<double>> rows;
    int line = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<double> parse_list(const std::string& body, int line) {
    std::vector<double> out;
    const std::string inner = trim(body);
    if (inner.empty()) return out;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        if (!parse_number(trim(item), v)) throw ConfigError("expected a number, got '" + trim(item) + "'", line);
        out.push_back(v);
    }
    return out;
}

Value parse_value(const std::string& raw, int line) {
    Value v;
    v.line = line;
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError("missing value", line);
    if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated list", line);
        const std::string inner = trim(s.substr(1, s.size() - 2));
        if (!inner.empty() && inner.front() == '[') {
            v.kind = Value::Kind::matrix;
            std::size_t pos = 0;
            while (pos < inner.size()) {
                const auto open = inner.find('[', pos);
                if (open == std::string::npos) break;
                const auto close = inner.find(']', open);
                if (close == std::string::npos) throw ConfigError("unterminated matrix row", line);
                v.rows.push_back(parse_list(inner.substr(open + 1, close - open - 1), line));
                pos = close + 1;
                const auto next = inner.find_first_not_of(" \t", pos);
                if (next != std::string::npos && inner[next] != ',') throw ConfigError("malformed matrix", line);
                if (next != std::string::npos) pos = next + 1;
            }
        } else {
            v.kind = Value::Kind::list;
            v.list = parse_list(inner, line);
        }
        return v;
    }
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ConfigError("unterminated string", line);
        v.kind = Value::Kind::string;
        v.text = s.substr(1, s.size() - 2);
        return v;
    }
    v.kind = Value::Kind::scalar;
    v.text = s;
    return v;
}

double as_double(const Value& v, const std::string& key) {
    double out;
    if (v.kind != Value::Kind::scalar || !parse_number(v.text, out))
        throw ConfigError("key '" + key + "' expects a number", v.line);
    return out;
}

long long as_int(const Value& v, const std::string& key) {
    long long out;
    if (v.kind == Value::Kind::scalar) {
        const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
        if (res.ec == std::errc() && res.ptr == v.text.data() + v.text.size()) return out;
    }
    throw ConfigError("key '" + key + "' expects an integer", v.line);
}

std::uint64_t as_u64(const Value& v, const std::string& key) {
    std::uint64_t out;
    if (v.kind == Value::Kind::scalar) {
        const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
        if (res.ec == std::errc() && res.ptr == v.text.data() + v.text.size()) return out;
    }
    throw ConfigError("key '" + key + "' expects an unsigned 64-bit integer", v.line);
}

bool as_bool(const Value& v, const std::string& key) {
    if (v.kind == Value::Kind::scalar && v.text == "true") return true;
    if (v.kind == Value::Kind::scalar && v.text == "false") return false;
    throw ConfigError("key '" + key + "' expects true or false", v.line);
}

std::string as_string(const Value& v, const std::string& key) {
    if (v.kind == Value::Kind::string) return v.text;
    double ignored;
    if (v.kind == Value::Kind::scalar && !parse_number(v.text, ignored)) return v.text;
    throw ConfigError("key '" + key + "' expects a string", v.line);
}

Vec as_vec(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::list) throw ConfigError("key '" + key + "' expects a list", v.line);
    return Eigen::Map<const Vec>(v.list.data(), static_cast<Eigen::Index>(v.list.size()));
}

template <std::size_t N>
std::array<double, N> as_array(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::list || v.list.size() != N)
        throw ConfigError("key '" + key + "' expects a list of " + std::to_string(N) + " numbers", v.line);
    std::array<double, N> out{};
    std::copy(v.list.begin(), v.list.end(), out.begin());
    return out;
}

Mat as_mat(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::matrix || v.rows.empty())
        throw ConfigError("key '" + key + "' expects a matrix [[...], ...]", v.line);
    const std::size_t cols = v.rows.front().size();
    Mat m(v.rows.size(), cols);
    for (std::size_t r = 0; r < v.rows.size(); ++r) {
        if (v.rows[r].size() != cols) throw ConfigError("ragged matrix in '" + key + "'", v.line);
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = v.rows[r][c];
    }
    return m;
}

using Setter = std::function<void(ExperimentConfig&, const Value&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> table = {
        {"experiment",
         {{"kind",
           [](ExperimentConfig& c, const Value& v) {
               const auto s = as_string(v, "kind");
               static const std::map<std::string, ExperimentKind> kinds = {
                   {"simulate", ExperimentKind::simulate}, {"couple", ExperimentKind::couple},
                   {"bounds", ExperimentKind::bounds},     {"full-check", ExperimentKind::full_check},
                   {"audit", ExperimentKind::audit}};
               const auto it = kinds.find(s);
               if (it == kinds.end()) throw ConfigError("unknown experiment kind '" + s + "'", v.line);
               c.kind = it->second;
           }},
          {"replicas", [](ExperimentConfig& c, const Value& v) { c.replicas = static_cast<int>(as_int(v, "replicas")); }},
          {"horizon", [](ExperimentConfig& c, const Value& v) { c.horizon = as_double(v, "horizon"); }},
          {"sample_dt", [](ExperimentConfig& c, const Value& v) { c.sample_dt = as_double(v, "sample_dt"); }},
          {"master_seed", [](ExperimentConfig& c, const Value& v) { c.master_seed = as_u64(v, "master_seed"); }},
          {"output_dir", [](ExperimentConfig& c, const Value& v) { c.output_dir = as_string(v, "output_dir"); }},
          {"record_jumps", [](ExperimentConfig& c, const Value& v) { c.record_jumps = as_bool(v, "record_jumps"); }}}},
        {"model",
         {{"kind",
           [](ExperimentConfig& c, const Value& v) {
               const auto s = as_string(v, "kind");
               if (s == "toy")
                   c.model = ModelKind::toy;
               else if (s == "morris-lecar")
                   c.model = ModelKind::morris_lecar;
               else if (s == "custom")
                   c.model = ModelKind::custom;
               else
                   throw ConfigError("unknown model kind '" + s + "'", v.line);
           }},
          {"sampler", [](ExperimentConfig& c, const Value& v) { c.sampler = as_string(v, "sampler"); }}}},
        {"toy",
         {{"lambda", [](ExperimentConfig& c, const Value& v) { c.toy.lambda = as_vec(v, "lambda"); }},
          {"alpha", [](ExperimentConfig& c, const Value& v) { c.toy.alpha = as_double(v, "alpha"); }},
          {"a", [](ExperimentConfig& c, const Value& v) { c.toy.a = as_vec(v, "a"); }},
          {"rates", [](ExperimentConfig& c, const Value& v) { c.toy.rates = as_string(v, "rates"); }},
          {"amplitude", [](ExperimentConfig& c, const Value& v) { c.toy.amplitude = as_double(v, "amplitude"); }}}},
        {"morris-lecar",
         {{"C", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.C = as_double(v, "C"); }},
          {"I", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.I_in = as_double(v, "I"); }},
          {"g", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.g = as_array<3>(v, "g"); }},
          {"V_eq", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.V_eq = as_array<3>(v, "V_eq"); }},
          {"c", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.c = as_array<2>(v, "c"); }},
          {"V_half", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.V_half = as_array<2>(v, "V_half"); }},
          {"V_slope", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.V_slope = as_array<2>(v, "V_slope"); }},
          {"K", [](ExperimentConfig& c, const Value& v) { c.morris_lecar.K = static_cast<int>(as_int(v, "K")); }},
          {"k_cap", [](ExperimentConfig& c, const Value& v) { c.k_cap = static_cast<int>(as_int(v, "k_cap")); }}}},
        {"custom",
         {{"generator", [](ExperimentConfig& c, const Value& v) { c.custom.generator = as_mat(v, "generator"); }},
          {"alpha", [](ExperimentConfig& c, const Value& v) { c.custom.alpha = as_vec(v, "alpha"); }}}},
        {"initial",
         {{"x", [](ExperimentConfig& c, const Value& v) { c.x0 = as_vec(v, "x"); }},
          {"mode", [](ExperimentConfig& c, const Value& v) { c.mode0 = static_cast<int>(as_int(v, "mode")); }},
          {"x_tilde", [](ExperimentConfig& c, const Value& v) { c.x0_tilde = as_vec(v, "x_tilde"); }},
          {"mode_tilde",
           [](ExperimentConfig& c, const Value& v) { c.mode0_tilde = static_cast<int>(as_int(v, "mode_tilde")); }}}},
        {"distance",
         {{"p", [](ExperimentConfig& c, const Value& v) { c.p = as_double(v, "p"); }},
          {"q", [](ExperimentConfig& c, const Value& v) { c.q = as_double(v, "q"); }},
          {"estimator", [](ExperimentConfig& c, const Value& v) { c.estimator = as_string(v, "estimator"); }},
          {"slack", [](ExperimentConfig& c, const Value& v) { c.slack = as_double(v, "slack"); }},
          {"moment_bound", [](ExperimentConfig& c, const Value& v) { c.moment_bound = as_double(v, "moment_bound"); }},
          {"bootstrap", [](ExperimentConfig& c, const Value& v) { c.bootstrap = static_cast<int>(as_int(v, "bootstrap")); }}}},
        {"grid",
         {{"points", [](ExperimentConfig& c, const Value& v) { c.grid_points = static_cast<int>(as_int(v, "points")); }},
          {"t_max", [](ExperimentConfig& c, const Value& v) { c.grid_max = as_double(v, "t_max"); }}}},
    };
    return table;
}

// custom fields are numbered: field0_matrix, field0_offset, field1_matrix, ...
bool set_custom_field(ExperimentConfig& c, const std::string& key, const Value& v) {
    static const std::regex pattern(R"(field(\d+)_(matrix|offset))");
    std::smatch m;
    if (!std::regex_match(key, m, pattern)) return false;
    const std::size_t index = std::stoul(m[1].str());
    if (index > 1024) throw ConfigError("field index too large", v.line);
    if (c.custom.matrices.size() <= index) {
        c.custom.matrices.resize(index + 1);
        c.custom.offsets.resize(index + 1);
    }
    if (m[2].str() == "matrix")
        c.custom.matrices[index] = as_mat(v, key);
    else
        c.custom.offsets[index] = as_vec(v, key);
    return true;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::set<std::string> seen;
    int line_no = 0;
    const auto& table = schema();
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        bool quoted = false;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (line[k] == '"') quoted = !quoted;
            if (line[k] == '#' && !quoted) {
                line.resize(k);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (!table.count(section)) throw ConfigError("unknown section [" + section + "]", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        if (section.empty()) throw ConfigError("key outside any section", line_no);
        const std::string key = trim(line.substr(0, eq));
        const Value value = parse_value(line.substr(eq + 1), line_no);
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) throw ConfigError("duplicate key '" + full + "'", line_no);
        const auto& keys = table.at(section);
        const auto it = keys.find(key);
        if (it != keys.end()) {
            it->second(config, value);
        } else if (!(section == "custom" && set_custom_field(config, key, value))) {
            throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line_no);
        }
    }
    for (const char* required : {"experiment.kind", "model.kind"}) {
        if (!seen.count(required)) throw ConfigError(std::string("missing required key '") + required + "'");
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void ExperimentConfig::validate() const {
    if (replicas < 1) throw ConfigError("replicas must be at least 1");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(sample_dt > 0.0)) throw ConfigError("sample_dt must be positive");
    if (sampler != "thinning" && sampler != "inversion") throw ConfigError("sampler must be thinning or inversion");
    if (!(p >= 1.0)) throw ConfigError("p must be at least 1");
    if (estimator != "coupling-plugin") throw ConfigError("unknown estimator '" + estimator + "'");
    if (slack < 0.0) throw ConfigError("slack must be non-negative");
    if (bootstrap < 0) throw ConfigError("bootstrap must be non-negative");
    if (grid_points < 2) throw ConfigError("grid points must be at least 2");
    if (mode0 < 0 || mode0_tilde < 0) throw ConfigError("initial modes must be non-negative");
    switch (model) {
        case ModelKind::toy:
            if (toy.lambda.size() != 2) throw ConfigError("toy lambda needs two rates");
            if (toy.rates != "constant" && toy.rates != "state-dependent")
                throw ConfigError("toy rates must be constant or state-dependent");
            break;
        case ModelKind::morris_lecar:
            try {
                morris_lecar.validate(k_cap);
            } catch (const InvalidAssumption& e) {
                throw ConfigError(e.what());
            }
            break;
        case ModelKind::custom: {
            const auto n = custom.matrices.size();
            if (n < 1) throw ConfigError("custom model needs at least one field");
            if (custom.generator.rows() != static_cast<Eigen::Index>(n) ||
                custom.generator.cols() != static_cast<Eigen::Index>(n))
                throw ConfigError("custom generator must be n x n for n fields");
            if (custom.alpha.size() != static_cast<Eigen::Index>(n))
                throw ConfigError("custom alpha needs one value per field");
            const auto d = custom.matrices.front().rows();
            for (std::size_t k = 0; k < n; ++k) {
                if (custom.matrices[k].rows() != d || custom.matrices[k].cols() != d || custom.offsets[k].size() != d)
                    throw ConfigError("custom field " + std::to_string(k) + " has inconsistent dimensions");
            }
            break;
        }
    }
}

SwitchedModel ExperimentConfig::build_model() const {
    SwitchedModel m;
    switch (model) {
        case ModelKind::toy:
            m = toy.rates == "constant" ? toy_model(toy.lambda(0), toy.lambda(1), toy.alpha, toy.a)
                                        : toy_state_dependent_model(toy.alpha, toy.a, 1.0, toy.amplitude);
            break;
        case ModelKind::morris_lecar: m = morris_lecar_model(morris_lecar, k_cap); break;
        case ModelKind::custom: {
            m.name = "custom";
            m.dim = static_cast<int>(custom.matrices.front().rows());
            for (std::size_t k = 0; k < custom.matrices.size(); ++k)
                m.fields.push_back(VectorField::affine(custom.matrices[k], custom.offsets[k], custom.alpha(k)));
            m.rates = SwitchGenerator::from_matrix(custom.generator);
            m.alpha_modes = custom.alpha;
            m.alpha = custom.alpha.minCoeff() > 0.0 ? custom.alpha.minCoeff() : 0.0;
            const double radius = m.alpha > 0.0 ? invariant_radius(m.fields, m.alpha) : 1.0;
            m.region = {Vec::Zero(m.dim), radius > 0.0 ? radius : 1.0};
            break;
        }
    }
    m.sampler = sampler == "inversion" ? JumpSampler::inversion : JumpSampler::thinning;
    return m;
}

std::vector<double> ExperimentConfig::grid() const {
    const double t_max = grid_max > 0.0 ? grid_max : horizon;
    std::vector<double> g(grid_points);
    for (int k = 0; k < grid_points; ++k) g[k] = t_max * k / (grid_points - 1);
    g.back() = t_max;
    return g;
}

namespace {

std::string list_text(const Vec& v) {
    std::string s = "[";
    for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_double(v(k));
    return s + "]";
}

template <std::size_t N>
std::string list_text(const std::array<double, N>& a) {
    return list_text(Vec(Eigen::Map<const Vec>(a.data(), N)));
}

std::string matrix_text(const Mat& m) {
    std::string s = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) s += (r ? ", " : "") + list_text(Vec(m.row(r).transpose()));
    return s + "]";
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "[experiment]\n"
        << "kind = " << to_string(c.kind) << "\n"
        << "replicas = " << c.replicas << "\n"
        << "horizon = " << format_double(c.horizon) << "\n"
        << "sample_dt = " << format_double(c.sample_dt) << "\n"
        << "master_seed = " << c.master_seed << "\n"
        << "output_dir = \"" << c.output_dir << "\"\n"
        << "record_jumps = " << (c.record_jumps ? "true" : "false") << "\n\n";
    out << "[model]\n"
        << "kind = " << to_string(c.model) << "\n"
        << "sampler = " << c.sampler << "\n\n";
    out << "[toy]\n"
        << "lambda = " << list_text(c.toy.lambda) << "\n"
        << "alpha = " << format_double(c.toy.alpha) << "\n"
        << "a = " << list_text(c.toy.a) << "\n"
        << "rates = " << c.toy.rates << "\n"
        << "amplitude = " << format_double(c.toy.amplitude) << "\n\n";
    const auto& ml = c.morris_lecar;
    out << "[morris-lecar]\n"
        << "C = " << format_double(ml.C) << "\n"
        << "I = " << format_double(ml.I_in) << "\n"
        << "g = " << list_text(ml.g) << "\n"
        << "V_eq = " << list_text(ml.V_eq) << "\n"
        << "c = " << list_text(ml.c) << "\n"
        << "V_half = " << list_text(ml.V_half) << "\n"
        << "V_slope = " << list_text(ml.V_slope) << "\n"
        << "K = " << ml.K << "\n"
        << "k_cap = " << c.k_cap << "\n\n";
    if (!c.custom.matrices.empty()) {
        out << "[custom]\n";
        for (std::size_t k = 0; k < c.custom.matrices.size(); ++k) {
            out << "field" << k << "_matrix = " << matrix_text(c.custom.matrices[k]) << "\n";
            out << "field" << k << "_offset = " << list_text(c.custom.offsets[k]) << "\n";
        }
        out << "generator = " << matrix_text(c.custom.generator) << "\n"
            << "alpha = " << list_text(c.custom.alpha) << "\n\n";
    }
    out << "[initial]\n";
    if (c.x0.size() > 0) out << "x = " << list_text(c.x0) << "\n";
    out << "mode = " << c.mode0 << "\n";
    if (c.x0_tilde.size() > 0) out << "x_tilde = " << list_text(c.x0_tilde) << "\n";
    out << "mode_tilde = " << c.mode0_tilde << "\n\n";
    out << "[distance]\n"
        << "p = " << format_double(c.p) << "\n"
        << "q = " << format_double(c.q) << "\n"
        << "estimator = " << c.estimator << "\n"
        << "slack = " << format_double(c.slack) << "\n"
        << "moment_bound = " << format_double(c.moment_bound) << "\n"
        << "bootstrap = " << c.bootstrap << "\n\n";
    out << "[grid]\n"
        << "points = " << c.grid_points << "\n"
        << "t_max = " << format_double(c.grid_max) << "\n";
    return out.str();
}

}  // namespace pdmp
