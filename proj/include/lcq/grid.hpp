#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lcq {

/// One axis of a rectangular tensor grid: `count` evenly spaced nodes on [lo, hi].
struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    int count = 2;

    double spacing() const { return (hi - lo) / (count - 1); }
    double coord(int i) const { return lo + spacing() * i; }
};

/// Rectangular tensor grid over an arbitrary number of axes, row-major node
/// order with the last axis fastest.
class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<GridAxis> axes);

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return total_; }
    const GridAxis& axis(int d) const { return axes_[d]; }
    const std::vector<GridAxis>& axes() const { return axes_; }
    std::size_t stride(int d) const { return strides_[d]; }

    std::size_t flat_index(std::span<const int> multi) const;
    void multi_index(std::size_t flat, std::span<int> out) const;
    void node_coords(std::size_t flat, std::span<double> out) const;

    bool operator==(const Grid& other) const;

private:
    std::vector<GridAxis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

/// Scalar values attached to every node of a Grid. Values are finite 64-bit
/// floats; once a field is filled it is treated as immutable and is safe for
/// concurrent reads.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(Grid grid, std::vector<double> values);
    explicit ScalarField(Grid grid, double fill = 0.0);

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double value_at_node(std::size_t flat) const { return values_[flat]; }

    /// Multilinear interpolation. Coordinates outside [lo, hi] are clamped to
    /// the boundary before interpolating.
    double interpolate(std::span<const double> point) const;

    /// Per-axis finite difference of interpolated values with step = one grid
    /// spacing; one-sided at boundary-adjacent points.
    std::vector<double> gradient(std::span<const double> point) const;

    /// Fills a field by evaluating fn at every node.
    template <typename Fn>
    static ScalarField sample(const Grid& grid, Fn&& fn) {
        std::vector<double> vals(grid.size());
        std::vector<double> pt(grid.dim());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid.node_coords(i, pt);
            vals[i] = fn(std::span<const double>(pt));
        }
        return ScalarField(grid, std::move(vals));
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Max nodewise |a - b|. Grids must match.
double sup_diff(const ScalarField& a, const ScalarField& b);

/// Field file format, bit-exact for 64-bit floats:
///   optional leading '#' comment lines, then
///   FIELD v1
///   <axis count>
///   <lo> <hi> <count>        (one line per axis)
///   node values, whitespace separated, row-major, 17 significant digits
void write_field(std::ostream& os, const ScalarField& field,
                 const std::vector<std::string>& header_comments = {});
ScalarField read_field(std::istream& is, std::vector<std::string>* header_comments = nullptr);

void write_field_file(const std::string& path, const ScalarField& field,
                      const std::vector<std::string>& header_comments = {});
ScalarField read_field_file(const std::string& path,
                            std::vector<std::string>* header_comments = nullptr);

}  // namespace lcq
