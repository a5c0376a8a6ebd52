#include "bioconv/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include "json.hpp"

namespace bioconv {

namespace {

using Value = std::variant<double, std::string, bool, std::vector<double>>;

struct Entry {
    Value value;
    int line = 0;
    bool used = false;
};

using Table = std::map<std::string, std::map<std::string, Entry>>;

[[noreturn]] void syntax_error(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg, line, "");
}

[[noreturn]] void semantic_error(const std::string& key, int line, const std::string& msg) {
    throw ConfigError(key + ": " + msg, line, key);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing comment, honouring quoted strings.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

Value parse_value(const std::string& raw, int line) {
    const std::string s = trim(raw);
    if (s.empty()) syntax_error(line, "missing value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') syntax_error(line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\') {
                if (i + 2 >= s.size() || (s[i + 1] != '"' && s[i + 1] != '\\'))
                    syntax_error(line, "invalid escape in string");
                out += s[++i];
            } else if (s[i] == '"') {
                syntax_error(line, "unexpected quote inside string");
            } else {
                out += s[i];
            }
        }
        return out;
    }
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '[') {
        if (s.back() != ']') syntax_error(line, "unterminated array");
        std::vector<double> items;
        const std::string body = trim(s.substr(1, s.size() - 2));
        if (body.empty()) return items;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto v = parse_number(trim(item));
            if (!v) syntax_error(line, "array items must be numbers");
            items.push_back(*v);
        }
        if (body.back() == ',') syntax_error(line, "trailing comma in array");
        return items;
    }
    const auto v = parse_number(s);
    if (!v) syntax_error(line, "cannot parse value '" + s + "'");
    return *v;
}

Table tokenize(const std::string& text) {
    Table t;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') syntax_error(line, "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (!valid_name(section)) syntax_error(line, "invalid section name '" + section + "'");
            if (t.count(section)) syntax_error(line, "duplicate section [" + section + "]");
            t[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) syntax_error(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        if (!valid_name(key)) syntax_error(line, "invalid key '" + key + "'");
        if (section.empty()) syntax_error(line, "key '" + key + "' outside any section");
        auto& sec = t[section];
        if (sec.count(key)) syntax_error(line, "duplicate key '" + section + "." + key + "'");
        sec[key] = Entry{parse_value(s.substr(eq + 1), line), line, false};
    }
    return t;
}

class Reader {
public:
    explicit Reader(Table& t) : t_(t) {}

    [[nodiscard]] bool has_section(const std::string& s) const { return t_.count(s) > 0; }

    Entry* find(const std::string& sec, const std::string& key) {
        auto it = t_.find(sec);
        if (it == t_.end()) return nullptr;
        auto jt = it->second.find(key);
        if (jt == it->second.end()) return nullptr;
        jt->second.used = true;
        return &jt->second;
    }

    void number(const std::string& sec, const std::string& key, double& out) {
        if (Entry* e = find(sec, key)) {
            if (!std::holds_alternative<double>(e->value)) semantic_error(sec + "." + key, e->line, "expected a number");
            out = std::get<double>(e->value);
        }
    }

    void integer(const std::string& sec, const std::string& key, int& out) {
        if (Entry* e = find(sec, key)) {
            if (!std::holds_alternative<double>(e->value)) semantic_error(sec + "." + key, e->line, "expected an integer");
            const double v = std::get<double>(e->value);
            if (v != std::floor(v) || std::abs(v) > 1e9) semantic_error(sec + "." + key, e->line, "expected an integer");
            out = static_cast<int>(v);
        }
    }

    void text(const std::string& sec, const std::string& key, std::string& out) {
        if (Entry* e = find(sec, key)) {
            if (!std::holds_alternative<std::string>(e->value))
                semantic_error(sec + "." + key, e->line, "expected a quoted string");
            out = std::get<std::string>(e->value);
        }
    }

    void boolean(const std::string& sec, const std::string& key, bool& out) {
        if (Entry* e = find(sec, key)) {
            if (!std::holds_alternative<bool>(e->value)) semantic_error(sec + "." + key, e->line, "expected true or false");
            out = std::get<bool>(e->value);
        }
    }

    void triple(const std::string& sec, const std::string& key, std::array<double, 3>& out) {
        if (Entry* e = find(sec, key)) {
            if (!std::holds_alternative<std::vector<double>>(e->value) ||
                std::get<std::vector<double>>(e->value).size() != 3)
                semantic_error(sec + "." + key, e->line, "expected an array of three numbers");
            const auto& v = std::get<std::vector<double>>(e->value);
            out = {v[0], v[1], v[2]};
        }
    }

    void optional_number(const std::string& sec, const std::string& key, std::optional<double>& out) {
        if (Entry* e = find(sec, key)) {
            if (!std::holds_alternative<double>(e->value)) semantic_error(sec + "." + key, e->line, "expected a number");
            out = std::get<double>(e->value);
        }
    }

    [[nodiscard]] int line_of(const std::string& sec, const std::string& key) const {
        auto it = t_.find(sec);
        if (it == t_.end()) return 0;
        auto jt = it->second.find(key);
        return jt == it->second.end() ? 0 : jt->second.line;
    }

    void reject_unused(const std::set<std::string>& known_sections) const {
        for (const auto& [sec, keys] : t_) {
            if (!known_sections.count(sec)) semantic_error(sec, 0, "unknown section [" + sec + "]");
            for (const auto& [key, e] : keys)
                if (!e.used) semantic_error(sec + "." + key, e.line, "unknown key");
        }
    }

private:
    Table& t_;
};

void require(bool ok, const std::string& key, int line, const std::string& msg) {
    if (!ok) semantic_error(key, line, msg);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Table table = tokenize(text);
    Reader rd(table);
    RunConfig cfg;

    if (!rd.has_section("domain")) semantic_error("domain", 0, "missing section [domain]");
    rd.triple("domain", "edges", cfg.edges);
    std::array<double, 3> cells{static_cast<double>(cfg.cells[0]), static_cast<double>(cfg.cells[1]),
                                static_cast<double>(cfg.cells[2])};
    rd.triple("domain", "cells", cells);
    for (int a = 0; a < 3; ++a) {
        const double e = cfg.edges[static_cast<std::size_t>(a)];
        require(e > 0.0, "domain.edges", rd.line_of("domain", "edges"), "edges must be positive");
        const double c = cells[static_cast<std::size_t>(a)];
        require(c == std::floor(c) && c >= 4 && c <= 1024, "domain.cells", rd.line_of("domain", "cells"),
                "cells must be integers in [4, 1024]");
        cfg.cells[static_cast<std::size_t>(a)] = static_cast<int>(c);
    }

    const bool dimless = rd.has_section("dimensionless");
    const bool phys = rd.has_section("physical");
    if (dimless && phys)
        semantic_error("dimensionless/physical", 0,
                       "both [dimensionless] and [physical] are present; exactly one parameter block is allowed");
    if (!dimless && !phys)
        semantic_error("dimensionless/physical", 0, "one of [dimensionless] or [physical] is required");
    if (dimless) {
        cfg.block = ParameterBlock::dimensionless;
        auto& g = cfg.groups;
        const std::pair<const char*, double*> keys[] = {
            {"S_c", &g.S_c}, {"gamma", &g.gamma}, {"chi", &g.chi}, {"delta", &g.delta}, {"beta", &g.beta}, {"g", &cfg.gravity}};
        for (const auto& [k, ptr] : keys) rd.number("dimensionless", k, *ptr);
        require(g.S_c > 0.0, "dimensionless.S_c", rd.line_of("dimensionless", "S_c"), "must be positive");
        require(g.delta > 0.0, "dimensionless.delta", rd.line_of("dimensionless", "delta"), "must be positive");
        require(g.gamma >= 0.0, "dimensionless.gamma", rd.line_of("dimensionless", "gamma"), "must be non-negative");
        require(g.chi >= 0.0, "dimensionless.chi", rd.line_of("dimensionless", "chi"), "must be non-negative");
        require(g.beta >= 0.0, "dimensionless.beta", rd.line_of("dimensionless", "beta"), "must be non-negative");
        require(cfg.gravity > 0.0, "dimensionless.g", rd.line_of("dimensionless", "g"), "must be positive");
    } else {
        cfg.block = ParameterBlock::physical;
        PhysicalParams p;
        const std::pair<const char*, double*> keys[] = {
            {"eta", &p.eta}, {"D_n", &p.D_n},     {"D_c", &p.D_c},         {"rho", &p.rho},
            {"rho_b", &p.rho_b}, {"V_b", &p.V_b}, {"n_r", &p.n_r},         {"L", &p.L},
            {"chi_bar", &p.chi_bar}, {"c_air", &p.c_air}, {"k", &p.k}, {"g", &p.g}};
        for (const auto& [k, ptr] : keys) rd.number("physical", k, *ptr);
        try {
            cfg.groups = dimensionless_from_physical(p);
        } catch (const std::invalid_argument& e) {
            std::string msg = e.what();
            const std::string prefix = "PhysicalParams.";
            std::string field = "physical";
            if (msg.rfind(prefix, 0) == 0) {
                const auto sp = msg.find(' ');
                field = "physical." + msg.substr(prefix.size(), sp - prefix.size());
            }
            semantic_error(field, 0, msg);
        }
        cfg.gravity = p.g;
        cfg.physical = p;
    }

    rd.text("consumption", "kind", cfg.consumption.kind);
    rd.number("consumption", "c_star", cfg.consumption.c_star);
    rd.number("consumption", "width", cfg.consumption.width);
    require(cfg.consumption.kind == "bump" || cfg.consumption.kind == "tent", "consumption.kind",
            rd.line_of("consumption", "kind"), "unknown kind '" + cfg.consumption.kind + "' (bump | tent)");
    require(cfg.consumption.width > 0.0 && cfg.consumption.c_star >= cfg.consumption.width, "consumption.width",
            rd.line_of("consumption", "width"), "need 0 < width <= c_star");

    auto& src = cfg.sources;
    rd.text("sources", "f_n", src.f_n);
    rd.number("sources", "f_n_amplitude", src.f_n_amplitude);
    rd.text("sources", "f_c", src.f_c);
    rd.number("sources", "f_c_amplitude", src.f_c_amplitude);
    rd.text("sources", "F", src.F);
    rd.number("sources", "F_amplitude", src.F_amplitude);
    rd.boolean("sources", "project_f_n", src.project_f_n);
    require(src.f_n == "zero" || src.f_n == "cosine", "sources.f_n", rd.line_of("sources", "f_n"),
            "unknown profile '" + src.f_n + "' (zero | cosine)");
    require(src.f_c == "zero" || src.f_c == "cosine", "sources.f_c", rd.line_of("sources", "f_c"),
            "unknown profile '" + src.f_c + "' (zero | cosine)");
    require(src.F == "zero" || src.F == "shear", "sources.F", rd.line_of("sources", "F"),
            "unknown profile '" + src.F + "' (zero | shear)");

    rd.number("mass", "alpha1", cfg.alpha1);
    rd.number("mass", "alpha2", cfg.alpha2);
    require(cfg.alpha1 > 0.0 && cfg.alpha1 <= 1.0, "mass.alpha1", rd.line_of("mass", "alpha1"), "must lie in (0, 1]");
    require(cfg.alpha2 > 0.0 && cfg.alpha2 <= 1.0, "mass.alpha2", rd.line_of("mass", "alpha2"), "must lie in (0, 1]");

    std::string mode = "analytic";
    rd.text("constants", "mode", mode);
    require(mode == "analytic" || mode == "discrete", "constants.mode", rd.line_of("constants", "mode"),
            "unknown mode '" + mode + "' (analytic | discrete)");
    cfg.constants_mode = mode == "analytic" ? ConstantsMode::analytic : ConstantsMode::discrete;
    rd.optional_number("constants", "C_poi_dirichlet", cfg.overrides.C_poi_dirichlet);
    rd.optional_number("constants", "C_poi_meanzero", cfg.overrides.C_poi_meanzero);
    rd.optional_number("constants", "C_tr", cfg.overrides.C_tr);
    rd.optional_number("constants", "C_1", cfg.overrides.C_1);
    for (const char* k : {"C_poi_dirichlet", "C_poi_meanzero", "C_tr", "C_1"}) {
        std::optional<double> v;
        if (std::string(k) == "C_poi_dirichlet") v = cfg.overrides.C_poi_dirichlet;
        if (std::string(k) == "C_poi_meanzero") v = cfg.overrides.C_poi_meanzero;
        if (std::string(k) == "C_tr") v = cfg.overrides.C_tr;
        if (std::string(k) == "C_1") v = cfg.overrides.C_1;
        if (v) require(*v > 0.0, std::string("constants.") + k, rd.line_of("constants", k), "must be positive");
    }

    auto& sv = cfg.solver;
    rd.number("solver", "tolerance", sv.tolerance);
    rd.integer("solver", "max_outer", sv.max_outer);
    rd.number("solver", "relaxation", sv.relaxation);
    rd.number("solver", "linear_tolerance", sv.linear_tolerance);
    rd.integer("solver", "linear_max_iterations", sv.linear_max_iterations);
    std::string top = "neumann";
    rd.text("solver", "oxygen_top", top);
    rd.boolean("solver", "strict", sv.strict);
    require(top == "neumann" || top == "dirichlet", "solver.oxygen_top", rd.line_of("solver", "oxygen_top"),
            "unknown boundary condition '" + top + "' (neumann | dirichlet)");
    sv.oxygen_top = top == "neumann" ? OxygenTopBc::neumann : OxygenTopBc::dirichlet;
    require(sv.tolerance > 0.0 && sv.tolerance < 1.0, "solver.tolerance", rd.line_of("solver", "tolerance"),
            "must lie in (0, 1)");
    require(sv.linear_tolerance > 0.0 && sv.linear_tolerance < 1.0, "solver.linear_tolerance",
            rd.line_of("solver", "linear_tolerance"), "must lie in (0, 1)");
    require(sv.max_outer >= 1, "solver.max_outer", rd.line_of("solver", "max_outer"), "must be >= 1");
    require(sv.linear_max_iterations >= 1, "solver.linear_max_iterations",
            rd.line_of("solver", "linear_max_iterations"), "must be >= 1");
    require(sv.relaxation > 0.0 && sv.relaxation <= 1.0, "solver.relaxation", rd.line_of("solver", "relaxation"),
            "must lie in (0, 1]");

    rd.text("output", "directory", cfg.output_directory);
    rd.text("output", "prefix", cfg.output_prefix);
    require(!cfg.output_prefix.empty(), "output.prefix", rd.line_of("output", "prefix"), "must not be empty");

    rd.reject_unused({"domain", "dimensionless", "physical", "consumption", "sources", "mass", "constants", "solver",
                      "output"});
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", 0, "");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg, int indent) {
    using nlohmann::json;
    json j;
    j["domain"] = {{"edges", cfg.edges}, {"cells", cfg.cells}};
    j["parameter_block"] = cfg.block == ParameterBlock::dimensionless ? "dimensionless" : "physical";
    j["groups"] = {{"S_c", cfg.groups.S_c},
                   {"gamma", cfg.groups.gamma},
                   {"chi", cfg.groups.chi},
                   {"delta", cfg.groups.delta},
                   {"beta", cfg.groups.beta},
                   {"g", cfg.gravity}};
    if (cfg.physical) {
        const auto& p = *cfg.physical;
        j["physical"] = {{"eta", p.eta}, {"D_n", p.D_n},         {"D_c", p.D_c},     {"rho", p.rho},
                         {"rho_b", p.rho_b}, {"V_b", p.V_b},     {"n_r", p.n_r},     {"L", p.L},
                         {"chi_bar", p.chi_bar}, {"c_air", p.c_air}, {"k", p.k}, {"g", p.g}};
    }
    j["consumption"] = {{"kind", cfg.consumption.kind}, {"c_star", cfg.consumption.c_star}, {"width", cfg.consumption.width}};
    const auto& s = cfg.sources;
    j["sources"] = {{"f_n", s.f_n},         {"f_n_amplitude", s.f_n_amplitude}, {"f_c", s.f_c},
                    {"f_c_amplitude", s.f_c_amplitude}, {"F", s.F},         {"F_amplitude", s.F_amplitude},
                    {"project_f_n", s.project_f_n}};
    j["mass"] = {{"alpha1", cfg.alpha1}, {"alpha2", cfg.alpha2}};
    json consts;
    consts["mode"] = cfg.constants_mode == ConstantsMode::analytic ? "analytic" : "discrete";
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    consts["C_poi_dirichlet"] = opt(cfg.overrides.C_poi_dirichlet);
    consts["C_poi_meanzero"] = opt(cfg.overrides.C_poi_meanzero);
    consts["C_tr"] = opt(cfg.overrides.C_tr);
    consts["C_1"] = opt(cfg.overrides.C_1);
    j["constants"] = consts;
    const auto& sv = cfg.solver;
    j["solver"] = {{"tolerance", sv.tolerance},
                   {"max_outer", sv.max_outer},
                   {"relaxation", sv.relaxation},
                   {"linear_tolerance", sv.linear_tolerance},
                   {"linear_max_iterations", sv.linear_max_iterations},
                   {"oxygen_top", sv.oxygen_top == OxygenTopBc::neumann ? "neumann" : "dirichlet"},
                   {"strict", sv.strict}};
    j["output"] = {{"directory", cfg.output_directory}, {"prefix", cfg.output_prefix}};
    return j.dump(indent);
}

ChamberDomain make_domain(const RunConfig& cfg) { return ChamberDomain(cfg.edges[0], cfg.edges[1], cfg.edges[2]); }

MacGrid make_grid(const RunConfig& cfg) { return MacGrid(make_domain(cfg), cfg.cells); }

ConsumptionFunction make_consumption(const RunConfig& cfg) {
    const double cs = cfg.consumption.c_star;
    const double w = cfg.consumption.width;
    if (cfg.consumption.kind == "bump") return default_consumption_function(cs, w);
    ConsumptionFunction r = custom_consumption_function(
        [cs, w](double s) {
            if (s <= 0.0 || s >= cs + w) return 0.0;
            if (s < w) return s / w;
            if (s <= cs) return 1.0;
            return (cs + w - s) / w;
        },
        1.0, cs, 1.0 / w, 0.0, cs + w);
    r.slope = [cs, w](double s) {
        if (s <= 0.0 || s >= cs + w) return 0.0;
        if (s < w) return 1.0 / w;
        if (s <= cs) return 0.0;
        return -1.0 / w;
    };
    std::ostringstream os;
    os << "tent(c_star=" << cs << ", width=" << w << ")";
    r.description = os.str();
    return r;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double f_n_profile(const std::array<double, 3>& x, const std::array<double, 3>& L) {
    return std::cos(kTwoPi * x[2] / L[2]) + 0.5 * std::cos(kTwoPi * x[0] / L[0]) * std::cos(kTwoPi * x[1] / L[1]);
}

double f_c_profile(const std::array<double, 3>& x, const std::array<double, 3>& L) {
    return std::cos(kTwoPi * x[0] / L[0]) + 0.5 * std::cos(kTwoPi * x[1] / L[1]) * std::cos(kTwoPi * x[2] / L[2]);
}

std::array<double, 3> shear_profile(const std::array<double, 3>& x, const std::array<double, 3>& L) {
    return {std::sin(kTwoPi * x[1] / L[1]) * std::sin(std::numbers::pi * x[2] / L[2]), 0.0,
            std::sin(kTwoPi * x[0] / L[0])};
}

}  // namespace

SourceNorms source_norms(const RunConfig& cfg) {
    const double vol = cfg.edges[0] * cfg.edges[1] * cfg.edges[2];
    // cos^2 over a full period averages 1/2; the cross terms are orthogonal
    const double cosine = std::sqrt(vol * (0.5 + 0.25 * 0.25));
    const double shear = std::sqrt(vol * (0.25 + 0.5));
    SourceNorms n;
    n.f_n = cfg.sources.f_n == "cosine" ? std::abs(cfg.sources.f_n_amplitude) * cosine : 0.0;
    n.f_c = cfg.sources.f_c == "cosine" ? std::abs(cfg.sources.f_c_amplitude) * cosine : 0.0;
    n.F = cfg.sources.F == "shear" ? std::abs(cfg.sources.F_amplitude) * shear : 0.0;
    return n;
}

ProblemData make_problem(const RunConfig& cfg, const MacGrid& grid) {
    ProblemData d(grid);
    d.groups = cfg.groups;
    d.gravity = cfg.gravity;
    d.r = make_consumption(cfg);
    d.alpha1 = cfg.alpha1;
    d.alpha2 = cfg.alpha2;
    d.oxygen_top = cfg.solver.oxygen_top;
    const auto& L = grid.domain().edges();
    const auto& s = cfg.sources;
    for (int k = 0; k < grid.n(2); ++k)
        for (int j = 0; j < grid.n(1); ++j)
            for (int i = 0; i < grid.n(0); ++i) {
                const auto x = grid.cell_position(i, j, k);
                if (s.f_n == "cosine") d.f_n.at(i, j, k) = s.f_n_amplitude * f_n_profile(x, L);
                if (s.f_c == "cosine") d.f_c.at(i, j, k) = s.f_c_amplitude * f_c_profile(x, L);
            }
    if (s.project_f_n) project_zero_sum(d.f_n.values());
    if (s.F == "shear") {
        for (int a = 0; a < 3; ++a) {
            const auto dims = grid.face_dims(a);
            for (int k = 0; k < dims[2]; ++k)
                for (int j = 0; j < dims[1]; ++j)
                    for (int i = 0; i < dims[0]; ++i) {
                        if (grid.boundary_face(a, i, j, k)) continue;
                        d.F.at(a, i, j, k) =
                            s.F_amplitude * shear_profile(grid.face_position(a, i, j, k), L)[static_cast<std::size_t>(a)];
                    }
        }
    }
    return d;
}

ProblemData make_problem(const RunConfig& cfg) { return make_problem(cfg, make_grid(cfg)); }

PicardOptions make_picard_options(const RunConfig& cfg) {
    PicardOptions o;
    o.tolerance = cfg.solver.tolerance;
    o.max_outer = cfg.solver.max_outer;
    o.relaxation = cfg.solver.relaxation;
    o.linear.tolerance = cfg.solver.linear_tolerance;
    o.linear.max_iterations = cfg.solver.linear_max_iterations;
    o.strict = cfg.solver.strict;
    return o;
}

Certificate make_certificate(const RunConfig& cfg) {
    const ChamberDomain dom = make_domain(cfg);
    DomainConstants dc = domain_constants(dom, cfg.constants_mode);
    dc = apply_overrides(dc, cfg.overrides);
    const SourceNorms sn = source_norms(cfg);
    const CertificateInputs in = make_inputs(dc, dom, cfg.groups, cfg.gravity, make_consumption(cfg), cfg.alpha1,
                                             cfg.alpha2, sn.f_n, sn.f_c, sn.F);
    return build_certificate(in);
}

}  // namespace bioconv
