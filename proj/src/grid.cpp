#include "lcq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lcq {

Grid::Grid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw std::invalid_argument("Grid: no axes");
    if (axes_.size() > 8) throw std::invalid_argument("Grid: more than 8 axes unsupported");
    for (const auto& ax : axes_) {
        if (!(ax.lo < ax.hi)) throw std::invalid_argument("Grid: axis needs lo < hi");
        if (ax.count < 2) throw std::invalid_argument("Grid: axis needs count >= 2");
    }
    strides_.assign(axes_.size(), 1);
    for (int d = static_cast<int>(axes_.size()) - 2; d >= 0; --d)
        strides_[d] = strides_[d + 1] * axes_[d + 1].count;
    total_ = strides_[0] * axes_[0].count;
}

std::size_t Grid::flat_index(std::span<const int> multi) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim(); ++d) flat += static_cast<std::size_t>(multi[d]) * strides_[d];
    return flat;
}

void Grid::multi_index(std::size_t flat, std::span<int> out) const {
    for (int d = 0; d < dim(); ++d) {
        out[d] = static_cast<int>(flat / strides_[d]);
        flat %= strides_[d];
    }
}

void Grid::node_coords(std::size_t flat, std::span<double> out) const {
    for (int d = 0; d < dim(); ++d) {
        const int i = static_cast<int>(flat / strides_[d]);
        flat %= strides_[d];
        out[d] = axes_[d].coord(i);
    }
}

bool Grid::operator==(const Grid& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        if (axes_[d].lo != other.axes_[d].lo || axes_[d].hi != other.axes_[d].hi ||
            axes_[d].count != other.axes_[d].count)
            return false;
    }
    return true;
}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("ScalarField: value count does not match grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("ScalarField: non-finite value");
}

ScalarField::ScalarField(Grid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

namespace {
constexpr int kMaxDim = 8;
}  // namespace

// Locates the cell and fractional offset for one clamped coordinate.
static inline void locate(const GridAxis& ax, double c, int& cell, double& frac) {
    if (c <= ax.lo) {
        cell = 0;
        frac = 0.0;
        return;
    }
    if (c >= ax.hi) {
        cell = ax.count - 2;
        frac = 1.0;
        return;
    }
    const double u = (c - ax.lo) / ax.spacing();
    cell = std::min(static_cast<int>(u), ax.count - 2);
    frac = u - cell;
}

double ScalarField::interpolate(std::span<const double> point) const {
    const int d = grid_.dim();
    if (static_cast<int>(point.size()) != d)
        throw std::invalid_argument("interpolate: point dimension mismatch");
    int cell[kMaxDim];
    double frac[kMaxDim];
    for (int i = 0; i < d; ++i) locate(grid_.axis(i), point[i], cell[i], frac[i]);

    double acc = 0.0;
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = 0;
        for (int i = 0; i < d; ++i) {
            const int bit = (c >> i) & 1;
            w *= bit ? frac[i] : (1.0 - frac[i]);
            idx += static_cast<std::size_t>(cell[i] + bit) * grid_.stride(i);
        }
        acc += w * values_[idx];
    }
    return acc;
}

std::vector<double> ScalarField::gradient(std::span<const double> point) const {
    const int d = grid_.dim();
    if (static_cast<int>(point.size()) != d)
        throw std::invalid_argument("gradient: point dimension mismatch");
    std::vector<double> g(d);
    std::vector<double> probe(point.begin(), point.end());
    for (int i = 0; i < d; ++i) {
        const GridAxis& ax = grid_.axis(i);
        const double step = ax.spacing();
        const bool room_up = point[i] + step <= ax.hi;
        const bool room_down = point[i] - step >= ax.lo;
        if (room_up && room_down) {
            probe[i] = point[i] + step;
            const double up = interpolate(probe);
            probe[i] = point[i] - step;
            const double down = interpolate(probe);
            g[i] = (up - down) / (2.0 * step);
        } else if (room_up) {
            probe[i] = point[i] + step;
            g[i] = (interpolate(probe) - interpolate(point)) / step;
        } else {
            probe[i] = point[i] - step;
            g[i] = (interpolate(point) - interpolate(probe)) / step;
        }
        probe[i] = point[i];
    }
    return g;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("sup_diff: grid mismatch");
    double m = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
    return m;
}

void write_field(std::ostream& os, const ScalarField& field,
                 const std::vector<std::string>& header_comments) {
    for (const auto& line : header_comments) os << "# " << line << "\n";
    const Grid& g = field.grid();
    os << "FIELD v1\n" << g.dim() << "\n";
    char buf[64];
    for (int d = 0; d < g.dim(); ++d) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %d", g.axis(d).lo, g.axis(d).hi,
                      g.axis(d).count);
        os << buf << "\n";
    }
    const auto vals = field.values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
        os << buf << ((i + 1) % 8 == 0 || i + 1 == vals.size() ? '\n' : ' ');
    }
}

ScalarField read_field(std::istream& is, std::vector<std::string>* header_comments) {
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '#') {
            if (header_comments) {
                std::string body = line.substr(1);
                if (!body.empty() && body[0] == ' ') body.erase(0, 1);
                header_comments->push_back(body);
            }
            continue;
        }
        break;
    }
    if (line != "FIELD v1") throw std::runtime_error("read_field: bad magic line");
    int dim = 0;
    if (!(is >> dim) || dim < 1 || dim > kMaxDim)
        throw std::runtime_error("read_field: bad axis count");
    std::vector<GridAxis> axes(dim);
    for (int d = 0; d < dim; ++d) {
        if (!(is >> axes[d].lo >> axes[d].hi >> axes[d].count))
            throw std::runtime_error("read_field: bad axis line");
    }
    Grid grid(std::move(axes));
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (!(is >> vals[i])) throw std::runtime_error("read_field: missing node values");
    }
    return ScalarField(std::move(grid), std::move(vals));
}

void write_field_file(const std::string& path, const ScalarField& field,
                      const std::vector<std::string>& header_comments) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_field(os, field, header_comments);
}

ScalarField read_field_file(const std::string& path,
                            std::vector<std::string>* header_comments) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_field(is, header_comments);
}

}  // namespace lcq
