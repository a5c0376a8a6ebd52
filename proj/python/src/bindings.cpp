#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bioconv/cli.hpp"
#include "bioconv/config.hpp"
#include "bioconv/io.hpp"
#include "bioconv/verify.hpp"

namespace py = pybind11;
using namespace bioconv;

namespace {

// Values are stored x-fastest, so numpy sees shape (nz, ny, nx).
py::array_t<double> as_array(const std::vector<double>& v, const std::array<int, 3>& dims) {
    py::array_t<double> a({dims[2], dims[1], dims[0]});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::dict state_dict(const FieldState& s) {
    const MacGrid& g = s.grid();
    py::dict d;
    d["cells"] = g.cells();
    d["edges"] = g.domain().edges();
    d["alpha1"] = s.alpha1;
    d["alpha2"] = s.alpha2;
    d["u_x"] = as_array(s.u.component(0), g.face_dims(0));
    d["u_y"] = as_array(s.u.component(1), g.face_dims(1));
    d["u_z"] = as_array(s.u.component(2), g.face_dims(2));
    d["p"] = as_array(s.p.values(), g.cells());
    d["n_hat"] = as_array(s.n_hat.values(), g.cells());
    d["c_hat"] = as_array(s.c_hat.values(), g.cells());
    return d;
}

py::tuple cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"bioconv"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

py::dict mms_evaluate(const std::string& name, const py::array_t<double, py::array::c_style | py::array::forcecast>& pts) {
    if (pts.ndim() != 2 || pts.shape(1) != 3) throw std::invalid_argument("points must have shape (N, 3)");
    const MmsCase mc = mms_case(name);
    const auto n = pts.shape(0);
    const auto x = pts.unchecked<2>();
    py::array_t<double> u({n, py::ssize_t{3}}), F({n, py::ssize_t{3}});
    std::vector<double> p(n), nh(n), ch(n), fn(n), fc(n), r(n);
    auto U = u.mutable_unchecked<2>();
    auto FF = F.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const Point q{x(i, 0), x(i, 1), x(i, 2)};
        const Point uv = mc.u(q), Fv = mc.F(q);
        for (int a = 0; a < 3; ++a) {
            U(i, a) = uv[static_cast<std::size_t>(a)];
            FF(i, a) = Fv[static_cast<std::size_t>(a)];
        }
        const auto k = static_cast<std::size_t>(i);
        p[k] = mc.p(q);
        nh[k] = mc.n_hat(q);
        ch[k] = mc.c_hat(q);
        fn[k] = mc.f_n(q);
        fc[k] = mc.f_c(q);
        r[k] = mc.r(mc.alpha2 / mc.domain.measure() + ch[k]);
    }
    const auto vec = [](const std::vector<double>& v) {
        py::array_t<double> a(py::array::ShapeContainer{static_cast<py::ssize_t>(v.size())});
        std::copy(v.begin(), v.end(), a.mutable_data());
        return a;
    };
    py::dict d;
    d["u"] = u;
    d["p"] = vec(p);
    d["n_hat"] = vec(nh);
    d["c_hat"] = vec(ch);
    d["f_n"] = vec(fn);
    d["f_c"] = vec(fc);
    d["F"] = F;
    d["r_of_c"] = vec(r);
    return d;
}

py::dict mms_parameters(const std::string& name) {
    const MmsCase mc = mms_case(name);
    py::dict d;
    d["edges"] = mc.domain.edges();
    d["S_c"] = mc.groups.S_c;
    d["gamma"] = mc.groups.gamma;
    d["chi"] = mc.groups.chi;
    d["delta"] = mc.groups.delta;
    d["beta"] = mc.groups.beta;
    d["gravity"] = mc.gravity;
    d["alpha1"] = mc.alpha1;
    d["alpha2"] = mc.alpha2;
    d["consumption"] = mc.r.description;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stationary bioconvection solver: certificates, Picard solve, verification";

    m.def("run_cli", &cli, py::arg("args"),
          "Run the command-line tool in-process. Returns (exit_code, stdout, stderr).");
    m.def(
        "config_json", [](const std::string& path) { return config_to_json(load_config(path)); }, py::arg("path"),
        "Parse and validate a config file; returns its JSON form.");
    m.def(
        "certificate_json", [](const std::string& path) { return certificate_to_json(make_certificate(load_config(path))); },
        py::arg("path"));
    m.def(
        "solve",
        [](const std::string& path) {
            const RunConfig cfg = load_config(path);
            const ProblemData data = make_problem(cfg);
            SolveOutcome out{FieldState(data.grid), {}, {}};
            {
                py::gil_scoped_release release;
                out = solve_stationary(FieldState(data.grid, cfg.alpha1, cfg.alpha2), data, make_picard_options(cfg));
            }
            py::dict d = state_dict(out.state);
            d["report"] = solve_report_to_json(out.report, out.history);
            return d;
        },
        py::arg("path"), "Solve a config from rest; returns fields as numpy arrays plus the report JSON.");
    m.def(
        "read_sidecar", [](const std::string& path) { return state_dict(read_sidecar(path)); }, py::arg("path"));
    m.def("mms_case_names", &mms_case_names);
    m.def("mms_parameters", &mms_parameters, py::arg("name"));
    m.def("mms_evaluate", &mms_evaluate, py::arg("name"), py::arg("points"),
          "Exact fields and sources of a manufactured case at points of shape (N, 3).");

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<PicardDivergence>(m, "PicardDivergence", PyExc_RuntimeError);
}
