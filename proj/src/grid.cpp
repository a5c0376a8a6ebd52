#include "bioconv/grid.hpp"

#include <algorithm>
#include <cmath>

namespace bioconv {

MacGrid::MacGrid(const ChamberDomain& domain, std::array<int, 3> cells)
    : domain_(domain), cells_(cells), spacing_{} {
    for (int a = 0; a < 3; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (cells_[ua] < 4) {
            throw std::invalid_argument("MacGrid: at least 4 cells per axis are required (axis " +
                                        std::to_string(a) + " has " + std::to_string(cells_[ua]) +
                                        ")");
        }
        spacing_[ua] = domain_.edge(a) / cells_[ua];
    }
}

ScalarField::ScalarField(const MacGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cell_count()) {
        throw std::invalid_argument("ScalarField: value count does not match the cell count");
    }
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    if (!(grid_ == o.grid_)) throw GridMismatch("ScalarField::operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    if (!(grid_ == o.grid_)) throw GridMismatch("ScalarField::operator-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

ScalarField& ScalarField::shift(double a) {
    for (double& v : values_) v += a;
    return *this;
}

VectorField::VectorField(const MacGrid& grid) : grid_(grid) {
    for (int a = 0; a < 3; ++a) comps_[static_cast<std::size_t>(a)].assign(grid_.face_count(a), 0.0);
}

std::size_t VectorField::size() const { return comps_[0].size() + comps_[1].size() + comps_[2].size(); }

std::vector<double> VectorField::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& c : comps_) out.insert(out.end(), c.begin(), c.end());
    return out;
}

VectorField VectorField::unflatten(const MacGrid& grid, std::span<const double> flat) {
    VectorField v(grid);
    if (flat.size() != v.size()) throw std::invalid_argument("VectorField::unflatten: size mismatch");
    std::size_t off = 0;
    for (int a = 0; a < 3; ++a) {
        auto& c = v.component(a);
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  flat.begin() + static_cast<std::ptrdiff_t>(off + c.size()), c.begin());
        off += c.size();
    }
    return v;
}

VectorField& VectorField::operator+=(const VectorField& o) {
    if (!(grid_ == o.grid_)) throw GridMismatch("VectorField::operator+=");
    for (int a = 0; a < 3; ++a) {
        auto& c = comps_[static_cast<std::size_t>(a)];
        const auto& d = o.comps_[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += d[i];
    }
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    if (!(grid_ == o.grid_)) throw GridMismatch("VectorField::operator-=");
    for (int a = 0; a < 3; ++a) {
        auto& c = comps_[static_cast<std::size_t>(a)];
        const auto& d = o.comps_[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= d[i];
    }
    return *this;
}

VectorField& VectorField::operator*=(double a) {
    for (auto& c : comps_)
        for (double& v : c) v *= a;
    return *this;
}

std::size_t face_offset(const MacGrid& grid, int axis) {
    std::size_t off = 0;
    for (int a = 0; a < axis; ++a) off += grid.face_count(a);
    return off;
}

}  // namespace bioconv
