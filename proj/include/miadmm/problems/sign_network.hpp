#pragma once

// Node-wise ridge regression coupled by sign constraints between coordinates of
// different nodes. Weakly-constrained multitask learning is the special case of
// a chain of agree edges on matching coordinates.

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <tuple>
#include <vector>

#include "miadmm/problem.hpp"
#include "miadmm/problems/common.hpp"

namespace miadmm::problems {

enum class EdgeSign : std::uint8_t { Agree, Disagree };

/// β_{i,u}·β_{j,v} ≥ 0 (Agree) or ≤ 0 (Disagree).
struct SignedEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    Eigen::Index u = 0;
    Eigen::Index v = 0;
    EdgeSign sign = EdgeSign::Agree;
};

struct SignedNetwork {
    std::size_t nodes = 0;
    Eigen::Index dim = 0;
    std::vector<SignedEdge> edges;
};

/// Least-squares data of one node: loss (1/rows)‖X w − y‖².
struct NodeData {
    Matrix X;
    Vector y;
};

struct MultitaskDataset {
    std::vector<NodeData> tasks;
    double lambda = 0.0;
};

/// Sign requirement a partner value p imposes on a coordinate through an edge.
inline CoordConstraint sign_requirement(double partner, EdgeSign sign) {
    if (partner == 0.0) return CoordConstraint::Free;
    const bool positive = (partner > 0.0) == (sign == EdgeSign::Agree);
    return positive ? CoordConstraint::NonNegative : CoordConstraint::NonPositive;
}

/// Intersection of two requirements on one coordinate.
inline CoordConstraint combine(CoordConstraint a, CoordConstraint b) {
    if (a == CoordConstraint::Free) return b;
    if (b == CoordConstraint::Free || a == b) return a;
    return CoordConstraint::FixedZero;
}

namespace detail {

struct Incidence {
    Eigen::Index own = 0;
    std::size_t partner_node = 0;
    Eigen::Index partner_coord = 0;
    EdgeSign sign = EdgeSign::Agree;
};

struct NetworkData {
    std::vector<std::vector<Incidence>> incident;  // per node
    std::vector<std::unique_ptr<FactorCache>> hessians;
    std::vector<Vector> linear;  // (2/rows) Xᵀy
    std::vector<NodeData> nodes;
    std::vector<SignedEdge> edges;
    double lambda = 0.0;
};

}  // namespace detail

/// Constraints on node `node` given the current values of all blocks.
inline CoordConstraints node_constraints(const SignedNetwork& net, std::size_t node,
                                         std::span<const Vector> blocks) {
    CoordConstraints cs(static_cast<std::size_t>(net.dim), CoordConstraint::Free);
    for (const auto& e : net.edges) {
        if (e.i == node) cs[e.u] = combine(cs[e.u], sign_requirement(blocks[e.j][e.v], e.sign));
        if (e.j == node) cs[e.v] = combine(cs[e.v], sign_requirement(blocks[e.i][e.u], e.sign));
    }
    return cs;
}

inline double node_loss(const NodeData& d, double lambda, const Vector& w) {
    return (d.X * w - d.y).squaredNorm() / static_cast<double>(d.X.rows()) + lambda * w.squaredNorm();
}

inline void validate_network(const SignedNetwork& net) {
    if (net.nodes < 1 || net.dim < 1) throw InvalidArgument("signed network: empty network");
    std::map<std::tuple<std::size_t, Eigen::Index, std::size_t, Eigen::Index>, EdgeSign> seen;
    for (const auto& e : net.edges) {
        if (e.i >= net.nodes || e.j >= net.nodes || e.u < 0 || e.u >= net.dim || e.v < 0 || e.v >= net.dim)
            throw InvalidArgument("signed network: edge index out of range");
        // Both endpoints in one block would make that block's subproblem nonconvex.
        if (e.i == e.j) throw InvalidArgument("signed network: edge within a single node");
        auto key = e.i < e.j ? std::tuple(e.i, e.u, e.j, e.v) : std::tuple(e.j, e.v, e.i, e.u);
        auto [it, inserted] = seen.emplace(key, e.sign);
        if (!inserted && it->second != e.sign)
            throw InconsistentEdge("signed network: edge duplicated with opposite polarity");
    }
}

inline ProblemSpec build_signed_network_problem(const SignedNetwork& net, const std::vector<NodeData>& data,
                                                double lambda) {
    validate_network(net);
    if (data.size() != net.nodes) throw InvalidArgument("signed network: one dataset per node required");
    if (!(lambda > 0.0)) throw InvalidArgument("signed network: lambda must be positive");
    const Eigen::Index m = net.dim;

    auto shared = std::make_shared<detail::NetworkData>();
    shared->nodes = data;
    shared->edges = net.edges;
    shared->lambda = lambda;
    for (const auto& d : data) {
        if (d.X.cols() != m || d.X.rows() < 1 || d.y.size() != d.X.rows())
            throw InvalidArgument("signed network: node data has wrong shape");
        const double scale = 2.0 / static_cast<double>(d.X.rows());
        Matrix p = scale * gram(d.X);
        p.diagonal().array() += 2.0 * lambda;
        shared->hessians.push_back(std::make_unique<FactorCache>(std::move(p)));
        shared->linear.push_back(scale * (d.X.transpose() * d.y));
    }

    ProblemSpec spec;
    spec.z_dim = static_cast<Eigen::Index>(net.nodes) * m;
    spec.smooth = SmoothTerm::zero();
    auto topology = std::make_shared<SignedNetwork>(net);
    for (std::size_t i = 0; i < net.nodes; ++i) {
        spec.blocks.push_back({m, StackSelector{static_cast<Eigen::Index>(i) * m},
                               [shared, topology, i](const BlockContext& ctx) {
                                   auto h = shared->hessians[i]->get(ctx.weight);
                                   const Vector q = shared->linear[i] + ctx.penalty_linear();
                                   return solve_sign_constrained(h->P, &h->factor, q, Vector(),
                                                                 node_constraints(*topology, i, ctx.blocks),
                                                                 ctx.current(), ctx.sub_tol);
                               }});
    }
    spec.objective = [shared](std::span<const Vector> x) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += node_loss(shared->nodes[i], shared->lambda, x[i]);
        return v;
    };
    // One entry per edge: −s·β_{i,u}β_{j,v} with s = +1 for agree, −1 for disagree.
    spec.inequality = [shared](std::span<const Vector> x) {
        Vector out(static_cast<Eigen::Index>(shared->edges.size()));
        for (std::size_t k = 0; k < shared->edges.size(); ++k) {
            const auto& e = shared->edges[k];
            const double prod = x[e.i][e.u] * x[e.j][e.v];
            out[static_cast<Eigen::Index>(k)] = e.sign == EdgeSign::Agree ? -prod : prod;
        }
        return out;
    };
    spec.initial_point.assign(net.nodes, Vector::Zero(m));
    return spec;
}

/// Tasks in the given order; consecutive tasks agree in sign on every feature.
inline SignedNetwork multitask_chain(std::size_t tasks, Eigen::Index features) {
    SignedNetwork net;
    net.nodes = tasks;
    net.dim = features;
    for (std::size_t i = 0; i + 1 < tasks; ++i)
        for (Eigen::Index j = 0; j < features; ++j) net.edges.push_back({i, i + 1, j, j, EdgeSign::Agree});
    return net;
}

inline ProblemSpec build_multitask_problem(const MultitaskDataset& d) {
    if (d.tasks.size() < 2) throw InvalidArgument("build_multitask_problem: need at least two tasks");
    return build_signed_network_problem(multitask_chain(d.tasks.size(), d.tasks.front().X.cols()), d.tasks,
                                        d.lambda);
}

/// Tasks share a common weight vector up to per-task noise, so neighbouring
/// tasks mostly agree in sign.
inline MultitaskDataset gen_multitask(std::size_t tasks, Eigen::Index features, Eigen::Index samples,
                                      double lambda, std::uint64_t seed) {
    if (tasks < 2 || features < 1 || samples < 1) throw InvalidArgument("gen_multitask: sizes must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.1);
    Vector shared(features);
    for (auto& v : shared) v = unif(rng);
    MultitaskDataset d;
    d.lambda = lambda;
    for (std::size_t t = 0; t < tasks; ++t) {
        Vector w(features);
        for (Eigen::Index j = 0; j < features; ++j) w[j] = shared[j] + 0.3 * unif(rng);
        NodeData nd;
        nd.X.resize(samples, features);
        for (Eigen::Index i = 0; i < samples; ++i)
            for (Eigen::Index j = 0; j < features; ++j) nd.X(i, j) = unif(rng);
        nd.y = nd.X * w;
        for (auto& v : nd.y) v += noise(rng);
        d.tasks.push_back(std::move(nd));
    }
    return d;
}

struct PlantedNetwork {
    SignedNetwork net;
    std::vector<NodeData> data;
    std::vector<Vector> truth;
};

/// Planted node weights; each edge's polarity agrees with the planted signs.
inline PlantedNetwork gen_signed_network(std::size_t nodes, Eigen::Index dim, Eigen::Index samples,
                                         std::size_t edges, std::uint64_t seed) {
    if (nodes < 2 || dim < 1 || samples < 1) throw InvalidArgument("gen_signed_network: sizes must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.1);
    PlantedNetwork p;
    p.net.nodes = nodes;
    p.net.dim = dim;
    for (std::size_t i = 0; i < nodes; ++i) {
        Vector w(dim);
        for (auto& v : w) v = unif(rng);
        p.truth.push_back(w);
        NodeData nd;
        nd.X.resize(samples, dim);
        for (Eigen::Index r = 0; r < samples; ++r)
            for (Eigen::Index c = 0; c < dim; ++c) nd.X(r, c) = unif(rng);
        nd.y = nd.X * w;
        for (auto& v : nd.y) v += noise(rng);
        p.data.push_back(std::move(nd));
    }
    std::uniform_int_distribution<std::size_t> pick_node(0, nodes - 1);
    std::uniform_int_distribution<Eigen::Index> pick_coord(0, dim - 1);
    std::map<std::tuple<std::size_t, Eigen::Index, std::size_t, Eigen::Index>, bool> seen;
    const std::size_t possible = nodes * (nodes - 1) / 2 * static_cast<std::size_t>(dim * dim);
    while (p.net.edges.size() < std::min(edges, possible)) {
        std::size_t i = pick_node(rng);
        std::size_t j = pick_node(rng);
        const Eigen::Index u = pick_coord(rng);
        const Eigen::Index v = pick_coord(rng);
        if (i == j) continue;
        if (!seen.emplace(i < j ? std::tuple(i, u, j, v) : std::tuple(j, v, i, u), true).second) continue;
        const EdgeSign s = p.truth[i][u] * p.truth[j][v] >= 0.0 ? EdgeSign::Agree : EdgeSign::Disagree;
        p.net.edges.push_back({i, j, u, v, s});
    }
    return p;
}

}  // namespace miadmm::problems
