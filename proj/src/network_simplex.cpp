#include "network_simplex.hpp"

#include <algorithm>
#include <stdexcept>

namespace sphw::detail {

TransportSimplex::TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                                   const std::function<double(std::size_t, std::size_t)>& cost)
    : n1_(supply.size()),
      n2_(static_cast<Index>(demand.size())),
      node_num_(static_cast<Index>(supply.size() + demand.size())),
      arc_num_(static_cast<Index>(supply.size()) * static_cast<Index>(demand.size())),
      root_(node_num_) {
    const Index all_arcs = arc_num_ + node_num_;
    cost_.resize(static_cast<std::size_t>(all_arcs));
    flow_.assign(static_cast<std::size_t>(all_arcs), 0.0);
    state_.assign(static_cast<std::size_t>(all_arcs), kStateLower);
    art_source_.resize(static_cast<std::size_t>(node_num_));
    art_target_.resize(static_cast<std::size_t>(node_num_));

    double max_cost = 0.0;
    for (std::size_t i = 0; i < n1_; ++i) {
        for (Index j = 0; j < n2_; ++j) {
            const double c = cost(i, static_cast<std::size_t>(j));
            cost_[i * n2_ + j] = c;
            max_cost = std::max(max_cost, c);
        }
    }
    const double art_cost = (max_cost + 1.0) * static_cast<double>(node_num_);
    eps_ = 1e-14 * std::max(1.0, max_cost);

    const std::size_t nodes = static_cast<std::size_t>(node_num_) + 1;
    pi_.assign(nodes, 0.0);
    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    thread_.assign(nodes, 0);
    rev_thread_.assign(nodes, 0);
    succ_num_.assign(nodes, 0);
    last_succ_.assign(nodes, 0);
    pred_dir_.assign(nodes, kDirUp);

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;

    for (Index u = 0, e = arc_num_; u != node_num_; ++u, ++e) {
        parent_[u] = root_;
        pred_[u] = e;
        thread_[u] = u + 1;
        rev_thread_[u + 1] = u;
        succ_num_[u] = 1;
        last_succ_[u] = u;
        state_[e] = kStateTree;
        const bool is_source = u < static_cast<Index>(n1_);
        const double s = is_source ? supply[static_cast<std::size_t>(u)]
                                   : -demand[static_cast<std::size_t>(u - static_cast<Index>(n1_))];
        if (s >= 0.0) {
            pred_dir_[u] = kDirUp;
            pi_[u] = 0.0;
            art_source_[u] = u;
            art_target_[u] = root_;
            flow_[e] = s;
            cost_[e] = 0.0;
        } else {
            pred_dir_[u] = kDirDown;
            pi_[u] = art_cost;
            art_source_[u] = root_;
            art_target_[u] = u;
            flow_[e] = -s;
            cost_[e] = art_cost;
        }
    }

    block_size_ = std::max<Index>(static_cast<Index>(std::sqrt(static_cast<double>(arc_num_))), 10);
}

bool TransportSimplex::find_entering_arc() {
    double best = -eps_;
    bool found = false;
    Index cnt = block_size_;
    Index e = next_arc_;
    auto scan = [&](Index from, Index to) {
        for (e = from; e != to; ++e) {
            const double c = state_[e] * (cost_[e] + pi_[source(e)] - pi_[target(e)]);
            if (c < best) {
                best = c;
                in_arc_ = e;
                found = true;
            }
            if (--cnt == 0) {
                if (found) return true;
                cnt = block_size_;
            }
        }
        return false;
    };
    if (scan(next_arc_, arc_num_) || scan(0, next_arc_)) {
        next_arc_ = e + 1 == arc_num_ ? 0 : e + 1;
        return true;
    }
    if (!found) return false;
    next_arc_ = e;
    return true;
}

void TransportSimplex::find_join_node() {
    Index u = source(in_arc_);
    Index v = target(in_arc_);
    while (u != v) {
        if (succ_num_[u] < succ_num_[v]) {
            u = parent_[u];
        } else {
            v = parent_[v];
        }
    }
    join_ = u;
}

void TransportSimplex::find_leaving_arc() {
    // The entering arc is always at its lower bound (capacities are
    // infinite), so flow is pushed from its source to its target.
    const Index first = source(in_arc_);
    const Index second = target(in_arc_);
    delta_ = std::numeric_limits<double>::infinity();
    int result = 0;
    for (Index u = first; u != join_; u = parent_[u]) {
        if (pred_dir_[u] == kDirUp) {
            const double d = flow_[pred_[u]];
            if (d < delta_) {
                delta_ = d;
                u_out_ = u;
                result = 1;
            }
        }
    }
    for (Index u = second; u != join_; u = parent_[u]) {
        if (pred_dir_[u] == kDirDown) {
            const double d = flow_[pred_[u]];
            if (d <= delta_) {
                delta_ = d;
                u_out_ = u;
                result = 2;
            }
        }
    }
    if (result == 0) throw std::logic_error("transport simplex: unbounded pivot cycle");
    if (result == 1) {
        u_in_ = first;
        v_in_ = second;
    } else {
        u_in_ = second;
        v_in_ = first;
    }
}

void TransportSimplex::change_flow() {
    if (delta_ > 0.0) {
        const double val = delta_;
        flow_[in_arc_] += val;
        for (Index u = source(in_arc_); u != join_; u = parent_[u]) {
            flow_[pred_[u]] -= pred_dir_[u] * val;
        }
        for (Index u = target(in_arc_); u != join_; u = parent_[u]) {
            flow_[pred_[u]] += pred_dir_[u] * val;
        }
    }
    state_[in_arc_] = kStateTree;
    // The leaving arc carried exactly delta.
    flow_[pred_[u_out_]] = 0.0;
    state_[pred_[u_out_]] = kStateLower;
}

void TransportSimplex::update_tree_structure() {
    const Index old_rev_thread = rev_thread_[u_out_];
    const Index old_succ_num = succ_num_[u_out_];
    const Index old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
        parent_[u_in_] = v_in_;
        pred_[u_in_] = in_arc_;
        pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;

        if (thread_[v_in_] != u_out_) {
            Index after = thread_[old_last_succ];
            thread_[old_rev_thread] = after;
            rev_thread_[after] = old_rev_thread;
            after = thread_[v_in_];
            thread_[v_in_] = u_out_;
            rev_thread_[u_out_] = v_in_;
            thread_[old_last_succ] = after;
            rev_thread_[after] = old_last_succ;
        }
    } else {
        const Index thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

        // Re-hang the stem u_in -> ... -> u_out below v_in, splicing the
        // thread order as each stem node changes parent.
        Index stem = u_in_;
        Index par_stem = v_in_;
        Index next_stem;
        Index last = last_succ_[u_in_];
        Index before;
        Index after = thread_[last];
        thread_[v_in_] = u_in_;
        dirty_revs_.clear();
        dirty_revs_.push_back(v_in_);
        while (stem != u_out_) {
            next_stem = parent_[stem];
            thread_[last] = next_stem;
            dirty_revs_.push_back(last);

            before = rev_thread_[stem];
            thread_[before] = after;
            rev_thread_[after] = before;

            parent_[stem] = par_stem;
            par_stem = stem;
            stem = next_stem;

            last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
            after = thread_[last];
        }
        parent_[u_out_] = par_stem;
        thread_[last] = thread_continue;
        rev_thread_[thread_continue] = last;
        last_succ_[u_out_] = last;

        if (old_rev_thread != v_in_) {
            thread_[old_rev_thread] = after;
            rev_thread_[after] = old_rev_thread;
        }

        for (Index u : dirty_revs_) rev_thread_[thread_[u]] = u;

        Index tmp_sc = 0;
        const Index tmp_ls = last_succ_[u_out_];
        for (Index u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
            pred_[u] = pred_[p];
            pred_dir_[u] = -pred_dir_[p];
            tmp_sc += succ_num_[u] - succ_num_[p];
            succ_num_[u] = tmp_sc;
            last_succ_[p] = tmp_ls;
        }
        pred_[u_in_] = in_arc_;
        pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
        succ_num_[u_in_] = old_succ_num;
    }

    const Index up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const Index last_succ_out = last_succ_[u_out_];
    for (Index u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) {
        last_succ_[u] = last_succ_out;
    }

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
        for (Index u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
            last_succ_[u] = old_rev_thread;
        }
    } else if (last_succ_out != old_last_succ) {
        for (Index u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
            last_succ_[u] = last_succ_out;
        }
    }

    for (Index u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (Index u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void TransportSimplex::update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    const Index end = thread_[last_succ_[u_in_]];
    for (Index u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

std::size_t TransportSimplex::run() {
    std::size_t pivots = 0;
    while (find_entering_arc()) {
        find_join_node();
        find_leaving_arc();
        change_flow();
        update_tree_structure();
        update_potential();
        ++pivots;
    }
    return pivots;
}

double TransportSimplex::total_cost() const {
    double c = 0.0;
    for (Index e = 0; e < arc_num_; ++e) {
        if (flow_[e] != 0.0) c += flow_[e] * cost_[e];
    }
    return c;
}

} // namespace sphw::detail
