#include "bioconv/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bioconv {

namespace {

constexpr char kMagic[8] = {'B', 'I', 'O', 'C', '1', '\0', '\0', '\0'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& b) : b_(b) {}

    std::uint64_t uint(int bytes, const char* what) {
        need(static_cast<std::size_t>(bytes), what);
        std::uint64_t v = 0;
        for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * b);
        return v;
    }
    std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(uint(4, what)); }
    std::uint64_t u64(const char* what) { return uint(8, what); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::string text(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] bool done() const { return pos_ == b_.size(); }
    [[nodiscard]] std::size_t remaining() const { return b_.size() - pos_; }

private:
    void need(std::size_t n, const char* what) const {
        if (b_.size() - pos_ < n) throw FormatError(std::string("sidecar truncated while reading ") + what);
    }
    const std::vector<std::uint8_t>& b_;
    std::size_t pos_ = 0;
};

void write_bytes(const std::string& path, const char* data, std::size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

std::string vtk_text(const FieldState& s) {
    const MacGrid& g = s.grid();
    std::ostringstream os;
    os << std::setprecision(17);
    os << "# vtk DataFile Version 3.0\n";
    os << "bioconv fields alpha1=" << s.alpha1 << " alpha2=" << s.alpha2 << "\n";
    os << "ASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.n(0) + 1 << " " << g.n(1) + 1 << " " << g.n(2) + 1 << "\n";
    os << "ORIGIN 0 0 0\n";
    os << "SPACING " << g.h(0) << " " << g.h(1) << " " << g.h(2) << "\n";
    os << "CELL_DATA " << g.cell_count() << "\n";
    const auto scalars = [&](const char* name, const ScalarField& f) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : f.values()) os << v << "\n";
    };
    scalars("n_hat", s.n_hat);
    scalars("c_hat", s.c_hat);
    scalars("n", s.n());
    scalars("c", s.c());
    scalars("p", s.p);
    const auto uc = velocity_at_cells(s.u);
    os << "VECTORS u double\n";
    for (std::size_t i = 0; i < g.cell_count(); ++i) os << uc[0][i] << " " << uc[1][i] << " " << uc[2][i] << "\n";
    return os.str();
}

void write_vtk(const FieldState& state, const std::string& path) {
    const std::string text = vtk_text(state);
    write_bytes(path, text.data(), text.size());
}

std::vector<std::uint8_t> encode_sidecar(const FieldState& s) {
    const MacGrid& g = s.grid();
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    for (int a = 0; a < 3; ++a) put_u32(out, static_cast<std::uint32_t>(g.n(a)));
    for (int a = 0; a < 3; ++a) put_f64(out, g.domain().edge(a));
    put_f64(out, s.alpha1);
    put_f64(out, s.alpha2);
    const std::pair<const char*, const std::vector<double>*> fields[] = {
        {"u_x", &s.u.component(0)}, {"u_y", &s.u.component(1)}, {"u_z", &s.u.component(2)},
        {"p", &s.p.values()},       {"n_hat", &s.n_hat.values()}, {"c_hat", &s.c_hat.values()}};
    put_u32(out, static_cast<std::uint32_t>(std::size(fields)));
    for (const auto& [name, values] : fields) {
        const std::size_t len = std::strlen(name);
        put_u32(out, static_cast<std::uint32_t>(len));
        out.insert(out.end(), name, name + len);
        put_u64(out, values->size());
        for (double v : *values) put_f64(out, v);
    }
    return out;
}

FieldState decode_sidecar(const std::vector<std::uint8_t>& bytes) {
    ByteReader rd(bytes);
    if (rd.text(8, "magic") != std::string(kMagic, 8)) throw FormatError("sidecar: bad magic (expected BIOC1)");
    std::array<int, 3> cells{};
    for (auto& c : cells) {
        const std::uint32_t v = rd.u32("grid dims");
        if (v == 0 || v > 4096) throw FormatError("sidecar: grid dimension out of range");
        c = static_cast<int>(v);
    }
    std::array<double, 3> L{};
    for (auto& l : L) {
        l = rd.f64("edge lengths");
        if (!(l > 0.0) || !std::isfinite(l)) throw FormatError("sidecar: edge length must be positive");
    }
    const MacGrid g(ChamberDomain(L[0], L[1], L[2]), cells);
    const double alpha1 = rd.f64("alpha1");
    const double alpha2 = rd.f64("alpha2");
    FieldState s(g, alpha1, alpha2);

    const std::uint32_t count = rd.u32("field count");
    std::map<std::string, std::vector<double>*> slots = {{"u_x", &s.u.component(0)}, {"u_y", &s.u.component(1)},
                                                         {"u_z", &s.u.component(2)}, {"p", &s.p.values()},
                                                         {"n_hat", &s.n_hat.values()}, {"c_hat", &s.c_hat.values()}};
    std::set<std::string> seen;
    for (std::uint32_t f = 0; f < count; ++f) {
        const std::uint32_t len = rd.u32("field name length");
        if (len > 64) throw FormatError("sidecar: field name too long");
        const std::string name = rd.text(len, "field name");
        auto it = slots.find(name);
        if (it == slots.end()) throw FormatError("sidecar: unknown field '" + name + "'");
        if (!seen.insert(name).second) throw FormatError("sidecar: duplicate field '" + name + "'");
        const std::uint64_t n = rd.u64("value count");
        if (n != it->second->size())
            throw FormatError("sidecar: field '" + name + "' has " + std::to_string(n) + " values, header implies " +
                              std::to_string(it->second->size()));
        for (double& v : *it->second) v = rd.f64("field values");
    }
    if (seen.size() != slots.size()) throw FormatError("sidecar: missing fields");
    if (!rd.done()) throw FormatError("sidecar: " + std::to_string(rd.remaining()) + " trailing bytes");
    return s;
}

void write_sidecar(const FieldState& state, const std::string& path) {
    const auto bytes = encode_sidecar(state);
    write_bytes(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

FieldState read_sidecar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_sidecar(bytes);
}

std::pair<std::string, std::string> write_fields(const FieldState& state, const std::string& base) {
    std::pair<std::string, std::string> paths{base + ".vtk", base + ".bioc"};
    write_vtk(state, paths.first);
    write_sidecar(state, paths.second);
    return paths;
}

FieldState read_fields(const std::string& sidecar_path) { return read_sidecar(sidecar_path); }

std::string solve_report_to_json(const SolveReport& r, const PicardHistory& history, int indent) {
    using nlohmann::json;
    const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["final_increment"] = num(r.final_increment);
    j["norms"] = {{"u_v", num(r.norms.u_v)},       {"n_hat_h1", num(r.norms.n_h1)}, {"c_hat_h1", num(r.norms.c_h1)},
                  {"div_u_l2", num(r.norms.div_u)}, {"u_l2", num(r.norms.u_l2)}};
    j["contraction_ratio"] = num(r.contraction_ratio);
    j["pi"] = r.pi_value ? num(*r.pi_value) : json(nullptr);
    j["ratio_within_pi"] = r.ratio_within_pi ? json(*r.ratio_within_pi) : json(nullptr);
    j["flux_residual"] = num(r.flux_residual);
    j["max_drift_n"] = num(r.max_drift_n);
    j["max_drift_c"] = num(r.max_drift_c);
    j["warnings"] = r.warnings;
    json hist = json::array();
    for (const auto& rec : history.records) {
        hist.push_back({{"iteration", rec.iteration},
                        {"du_v", num(rec.du_v)},
                        {"dn_h1", num(rec.dn_h1)},
                        {"dc_h1", num(rec.dc_h1)},
                        {"increment", num(rec.increment)},
                        {"ratio", num(rec.ratio)},
                        {"drift_n", num(rec.step.drift_n)},
                        {"drift_c", num(rec.step.drift_c)},
                        {"linear_iterations", rec.step.linear_iterations}});
    }
    j["history"] = hist;
    return j.dump(indent);
}

}  // namespace bioconv
