#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bioconv/model.hpp"

namespace bioconv {

/// Uniform marker-and-cell grid on a ChamberDomain. Scalars live at cell
/// centres; velocity component a lives on the faces normal to axis a.
/// Cell (i,j,k) has linear index i + n1 (j + n2 k); face arrays use the
/// same ordering with the normal axis extended by one.
class MacGrid {
public:
    MacGrid(const ChamberDomain& domain, std::array<int, 3> cells);

    [[nodiscard]] const ChamberDomain& domain() const { return domain_; }
    [[nodiscard]] int n(int axis) const { return cells_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] double h(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] const std::array<int, 3>& cells() const { return cells_; }
    [[nodiscard]] double cell_volume() const { return spacing_[0] * spacing_[1] * spacing_[2]; }
    [[nodiscard]] double measure() const { return domain_.measure(); }

    [[nodiscard]] std::size_t cell_count() const {
        return static_cast<std::size_t>(cells_[0]) * cells_[1] * cells_[2];
    }
    [[nodiscard]] std::size_t cell_index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(cells_[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(cells_[1]) * k);
    }

    /// Index extents of the face array normal to `axis`.
    [[nodiscard]] std::array<int, 3> face_dims(int axis) const {
        std::array<int, 3> d = cells_;
        d[static_cast<std::size_t>(axis)] += 1;
        return d;
    }
    [[nodiscard]] std::size_t face_count(int axis) const {
        const auto d = face_dims(axis);
        return static_cast<std::size_t>(d[0]) * d[1] * d[2];
    }
    [[nodiscard]] std::size_t face_index(int axis, int i, int j, int k) const {
        const auto d = face_dims(axis);
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(d[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(d[1]) * k);
    }
    /// True for faces lying on the boundary (normal index 0 or n).
    [[nodiscard]] bool boundary_face(int axis, int i, int j, int k) const {
        const int idx = axis == 0 ? i : (axis == 1 ? j : k);
        return idx == 0 || idx == n(axis);
    }

    [[nodiscard]] double cell_center(int axis, int idx) const { return (idx + 0.5) * h(axis); }
    [[nodiscard]] std::array<double, 3> cell_position(int i, int j, int k) const {
        return {cell_center(0, i), cell_center(1, j), cell_center(2, k)};
    }
    [[nodiscard]] std::array<double, 3> face_position(int axis, int i, int j, int k) const {
        std::array<double, 3> x = cell_position(i, j, k);
        const int idx = axis == 0 ? i : (axis == 1 ? j : k);
        x[static_cast<std::size_t>(axis)] = idx * h(axis);
        return x;
    }

    bool operator==(const MacGrid& other) const {
        return cells_ == other.cells_ && domain_.edges() == other.domain_.edges();
    }

private:
    ChamberDomain domain_;
    std::array<int, 3> cells_;
    std::array<double, 3> spacing_;
};

class GridMismatch : public std::invalid_argument {
public:
    explicit GridMismatch(const std::string& where)
        : std::invalid_argument(where + ": fields live on different grids") {}
};

/// Cell-centred scalar field.
class ScalarField {
public:
    explicit ScalarField(const MacGrid& grid, double value = 0.0)
        : grid_(grid), values_(grid.cell_count(), value) {}
    ScalarField(const MacGrid& grid, std::vector<double> values);

    [[nodiscard]] const MacGrid& grid() const { return grid_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] std::vector<double>& values() { return values_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(int i, int j, int k) { return values_[grid_.cell_index(i, j, k)]; }
    [[nodiscard]] double at(int i, int j, int k) const { return values_[grid_.cell_index(i, j, k)]; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double a);
    /// Adds a constant to every cell.
    ScalarField& shift(double a);

private:
    MacGrid grid_;
    std::vector<double> values_;
};

/// Face-centred vector field; component a is stored on the faces normal to a.
class VectorField {
public:
    explicit VectorField(const MacGrid& grid);

    [[nodiscard]] const MacGrid& grid() const { return grid_; }
    [[nodiscard]] std::vector<double>& component(int axis) { return comps_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] const std::vector<double>& component(int axis) const {
        return comps_[static_cast<std::size_t>(axis)];
    }
    double& at(int axis, int i, int j, int k) {
        return comps_[static_cast<std::size_t>(axis)][grid_.face_index(axis, i, j, k)];
    }
    [[nodiscard]] double at(int axis, int i, int j, int k) const {
        return comps_[static_cast<std::size_t>(axis)][grid_.face_index(axis, i, j, k)];
    }
    /// Total number of face values over the three components.
    [[nodiscard]] std::size_t size() const;

    /// Concatenate components (x, y, z) into one vector and back.
    [[nodiscard]] std::vector<double> flatten() const;
    static VectorField unflatten(const MacGrid& grid, std::span<const double> flat);

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double a);

private:
    MacGrid grid_;
    std::array<std::vector<double>, 3> comps_;
};

/// Offset of component `axis` in the flattened face ordering.
std::size_t face_offset(const MacGrid& grid, int axis);

}  // namespace bioconv
