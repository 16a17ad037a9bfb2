#include "ergochron/lattice.hpp"

#include <algorithm>
#include <stdexcept>

namespace ergochron {

std::string to_string(Boundary b)
{
    return b == Boundary::periodic ? "periodic" : "open";
}

Boundary boundary_from_string(const std::string& s)
{
    if (s == "periodic")
        return Boundary::periodic;
    if (s == "open")
        return Boundary::open;
    throw std::invalid_argument("unknown boundary '" + s + "' (expected periodic or open)");
}

std::size_t LatticeSpec::site_count() const
{
    std::size_t n = 1;
    for (int e : extents)
        n *= static_cast<std::size_t>(std::max(e, 0));
    return n;
}

void LatticeSpec::validate() const
{
    if (dims() < 1 || dims() > 3)
        throw std::invalid_argument("lattice dimension must be 1, 2 or 3, got " +
                                    std::to_string(dims()));
    for (int e : extents) {
        if (e < 1)
            throw std::invalid_argument("lattice extent must be >= 1, got " + std::to_string(e));
        // A wrapped axis shorter than 3 would bond a site to itself or double a bond.
        if (boundary == Boundary::periodic && e < 3)
            throw std::invalid_argument("periodic lattice extent must be >= 3, got " +
                                        std::to_string(e));
    }
}

std::size_t LatticeSpec::index_of(const std::vector<int>& coords) const
{
    if (coords.size() != extents.size())
        throw std::invalid_argument("coordinate rank does not match lattice dimension");
    std::size_t idx = 0;
    for (std::size_t a = 0; a < extents.size(); ++a) {
        if (coords[a] < 0 || coords[a] >= extents[a])
            throw std::out_of_range("lattice coordinate out of range");
        idx = idx * static_cast<std::size_t>(extents[a]) + static_cast<std::size_t>(coords[a]);
    }
    return idx;
}

std::vector<int> LatticeSpec::coords_of(std::size_t index) const
{
    if (index >= site_count())
        throw std::out_of_range("site index out of range");
    std::vector<int> c(extents.size());
    for (std::size_t a = extents.size(); a-- > 0;) {
        c[a] = static_cast<int>(index % static_cast<std::size_t>(extents[a]));
        index /= static_cast<std::size_t>(extents[a]);
    }
    return c;
}

std::string LatticeSpec::label() const
{
    std::string s = std::to_string(dims()) + "D ";
    if (dims() == 1)
        return s + "N=" + std::to_string(extents[0]);
    for (std::size_t a = 0; a < extents.size(); ++a) {
        if (a)
            s += 'x';
        s += std::to_string(extents[a]);
    }
    return s;
}

NeighborTable::NeighborTable(std::vector<std::vector<int>> neighbors)
    : neighbors_(std::move(neighbors))
{
    for (const auto& n : neighbors_)
        coordination_ = std::max(coordination_, static_cast<int>(n.size()));
}

std::size_t NeighborTable::bond_count() const
{
    std::size_t half_edges = 0;
    for (const auto& n : neighbors_)
        half_edges += n.size();
    return half_edges / 2;
}

NeighborTable build_neighbor_table(const LatticeSpec& spec)
{
    spec.validate();
    const std::size_t n_sites = spec.site_count();
    std::vector<std::vector<int>> nbrs(n_sites);

    for (std::size_t site = 0; site < n_sites; ++site) {
        const std::vector<int> c = spec.coords_of(site);
        auto& list = nbrs[site];
        for (int a = 0; a < spec.dims(); ++a) {
            const int extent = spec.extents[a];
            for (int step : {-1, +1}) {
                std::vector<int> d = c;
                d[a] += step;
                if (d[a] < 0 || d[a] >= extent) {
                    if (spec.boundary == Boundary::open)
                        continue;
                    d[a] = (d[a] + extent) % extent;
                }
                list.push_back(static_cast<int>(spec.index_of(d)));
            }
        }
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return NeighborTable(std::move(nbrs));
}

}  // namespace ergochron
