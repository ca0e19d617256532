#pragma once

// Primal network simplex for the balanced transportation problem on a
// complete bipartite graph. The spanning tree is kept in thread/parent form
// with strongly feasible bases (Cunningham's rule through the <, <= tie
// breaking in the leaving-arc search), block-search pricing, and an
// artificial root joined to every node. Capacities are unbounded.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace sphw::detail {

class TransportSimplex {
public:
    /// cost(i, j) must be nonnegative. supply and demand are nonnegative
    /// and should have equal sums; a rounding-level imbalance is absorbed
    /// by the artificial arcs.
    TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                     const std::function<double(std::size_t, std::size_t)>& cost);

    /// Returns the number of pivots performed.
    std::size_t run();

    double flow(std::size_t i, std::size_t j) const { return flow_[i * n2_ + j]; }
    double total_cost() const;
    std::size_t sources() const noexcept { return n1_; }
    std::size_t targets() const noexcept { return n2_; }

private:
    using Index = std::int64_t;
    static constexpr int kDirUp = 1;
    static constexpr int kDirDown = -1;
    static constexpr std::int8_t kStateLower = 1;
    static constexpr std::int8_t kStateTree = 0;

    Index source(Index e) const { return e < arc_num_ ? e / n2_ : art_source_[e - arc_num_]; }
    Index target(Index e) const {
        return e < arc_num_ ? static_cast<Index>(n1_) + e % n2_ : art_target_[e - arc_num_];
    }

    bool find_entering_arc();
    void find_join_node();
    void find_leaving_arc();
    void change_flow();
    void update_tree_structure();
    void update_potential();

    std::size_t n1_;
    Index n2_;
    Index node_num_;
    Index arc_num_;
    Index root_;

    std::vector<double> cost_;
    std::vector<double> flow_;
    std::vector<std::int8_t> state_;
    std::vector<Index> art_source_;
    std::vector<Index> art_target_;

    std::vector<double> pi_;
    std::vector<Index> parent_;
    std::vector<Index> pred_;
    std::vector<Index> thread_;
    std::vector<Index> rev_thread_;
    std::vector<Index> succ_num_;
    std::vector<Index> last_succ_;
    std::vector<int> pred_dir_;
    std::vector<Index> dirty_revs_;

    Index block_size_;
    Index next_arc_ = 0;
    double eps_;

    // Pivot scratch.
    Index in_arc_ = 0;
    Index join_ = 0;
    Index u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
    double delta_ = 0.0;
};

} // namespace sphw::detail
