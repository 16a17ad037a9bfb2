#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ergochron {

enum class Boundary { periodic, open };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Rectangular 1D/2D/3D lattice geometry.
///
/// Sites are indexed row-major: the last axis runs fastest, so for extents
/// {Lx, Ly} the site (x, y) has index x * Ly + y. CSV outputs that mention
/// site indices follow this convention.
struct LatticeSpec {
    std::vector<int> extents;
    Boundary boundary = Boundary::periodic;

    int dims() const { return static_cast<int>(extents.size()); }
    std::size_t site_count() const;

    /// Throws std::invalid_argument when the geometry is unusable.
    void validate() const;

    std::size_t index_of(const std::vector<int>& coords) const;
    std::vector<int> coords_of(std::size_t index) const;

    /// Short human label such as "1D N=100" or "2D 10x10".
    std::string label() const;
};

class NeighborTable {
  public:
    NeighborTable() = default;
    explicit NeighborTable(std::vector<std::vector<int>> neighbors);

    std::size_t site_count() const { return neighbors_.size(); }
    const std::vector<int>& neighbors(std::size_t site) const { return neighbors_[site]; }

    /// Largest degree over all sites; equals 2 * dims on periodic lattices.
    int coordination() const { return coordination_; }
    std::size_t bond_count() const;

  private:
    std::vector<std::vector<int>> neighbors_;
    int coordination_ = 0;
};

NeighborTable build_neighbor_table(const LatticeSpec& spec);

}  // namespace ergochron
