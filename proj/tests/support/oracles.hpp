#pragma once

#include "p2gsim/electric_net.hpp"
#include "p2gsim/gas_net.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace p2g::testkit {

/// Full AC power flow by Newton-Raphson in rectangular coordinates on the
/// nodal admittance matrix. Independent of the sweep: no tree ordering is used.
inline std::vector<electric::Complex> newton_power_flow(const electric::RadialTopology& topo,
                                                        const std::vector<electric::Complex>& injections,
                                                        double tolerance = 1e-13, int max_iterations = 50) {
    using C = electric::Complex;
    const auto n = static_cast<Eigen::Index>(topo.bus_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : topo.branches()) {
        const auto a = static_cast<Eigen::Index>(topo.index_of(br.from));
        const auto b = static_cast<Eigen::Index>(topo.index_of(br.to));
        const C adm = 1.0 / C(br.r_pu, br.x_pu);
        y(a, a) += adm;
        y(b, b) += adm;
        y(a, b) -= adm;
        y(b, a) -= adm;
    }
    std::vector<bool> slack(static_cast<std::size_t>(n), false);
    for (std::size_t r : topo.roots()) slack[r] = true;
    std::vector<Eigen::Index> unknown;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!slack[static_cast<std::size_t>(k)]) unknown.push_back(k);
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, C(topo.slack_voltage_pu(), 0.0));
    const auto m = static_cast<Eigen::Index>(unknown.size());
    for (int it = 0; m > 0 && it < max_iterations; ++it) {
        const Eigen::VectorXcd current = y * v;
        Eigen::VectorXd f(2 * m);
        for (Eigen::Index u = 0; u < m; ++u) {
            const Eigen::Index i = unknown[static_cast<std::size_t>(u)];
            const C s = v(i) * std::conj(current(i)) - injections[static_cast<std::size_t>(i)];
            f(2 * u) = s.real();
            f(2 * u + 1) = s.imag();
        }
        if (f.cwiseAbs().maxCoeff() < tolerance) break;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
        for (Eigen::Index u = 0; u < m; ++u) {
            const Eigen::Index i = unknown[static_cast<std::size_t>(u)];
            for (Eigen::Index w = 0; w < m; ++w) {
                const Eigen::Index k = unknown[static_cast<std::size_t>(w)];
                C de = v(i) * std::conj(y(i, k));
                C df = -C(0.0, 1.0) * v(i) * std::conj(y(i, k));
                if (i == k) {
                    de += std::conj(current(i));
                    df += C(0.0, 1.0) * std::conj(current(i));
                }
                jac(2 * u, 2 * w) = de.real();
                jac(2 * u + 1, 2 * w) = de.imag();
                jac(2 * u, 2 * w + 1) = df.real();
                jac(2 * u + 1, 2 * w + 1) = df.imag();
            }
        }
        const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
        for (Eigen::Index u = 0; u < m; ++u) {
            const Eigen::Index i = unknown[static_cast<std::size_t>(u)];
            v(i) += C(dx(2 * u), dx(2 * u + 1));
        }
    }
    return {v.data(), v.data() + n};
}

struct RandomRadialCase {
    electric::ElectricalNetwork network;
    std::vector<electric::Complex> injections;  // indexed like the compiled topology
};

/// Random radial forest with 1..3 feeders and at most `max_buses` buses, with
/// mixed loads and generation.
inline RandomRadialCase random_radial(std::uint64_t seed, int max_buses = 15) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    const int buses = std::uniform_int_distribution<int>(2, max_buses)(rng);
    const int feeders = std::uniform_int_distribution<int>(1, std::min(3, buses / 2 + 1))(rng);
    RandomRadialCase c;
    c.network.base_mva = 10.0;
    c.network.slack_voltage_pu = uni(0.98, 1.05);
    std::vector<int> feeder_of(static_cast<std::size_t>(buses));
    for (int b = 0; b < buses; ++b) {
        const int id = 100 + b;
        if (b < feeders) {
            c.network.transformers.push_back({b + 1, id, 15.0});
            feeder_of[static_cast<std::size_t>(b)] = b;
            continue;
        }
        const int parent = std::uniform_int_distribution<int>(0, b - 1)(rng);
        feeder_of[static_cast<std::size_t>(b)] = feeder_of[static_cast<std::size_t>(parent)];
        const bool flip = uni(0.0, 1.0) < 0.5;
        c.network.branches.push_back({flip ? id : 100 + parent, flip ? 100 + parent : id, uni(0.001, 0.04),
                                      uni(0.0005, 0.03), uni(0.1, 2.0)});
    }
    const electric::RadialTopology topo(c.network);
    c.injections.assign(topo.bus_count(), {});
    for (std::size_t k = 0; k < topo.bus_count(); ++k) {
        if (topo.buses()[k].parent < 0) continue;
        const double p = uni(-0.06, 0.04);
        c.injections[k] = electric::Complex(p, uni(-0.03, 0.01));
    }
    return c;
}

/// Two-node line: citygate node 1 feeding node 2 through one pipe.
inline gas::GasNetwork two_node_line(double length_m = 1000.0, double diameter_mm = 100.0) {
    gas::GasNetwork g;
    g.pipes = {{1, 2, length_m, diameter_mm}};
    g.citygate = 1;
    return g;
}

/// Random connected gas network (tree plus a few loops) with up to `max_nodes` nodes.
inline gas::GasNetwork random_gas_network(std::uint64_t seed, int max_nodes = 10) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    const int nodes = std::uniform_int_distribution<int>(2, max_nodes)(rng);
    gas::GasNetwork g;
    g.citygate = 1;
    for (int k = 2; k <= nodes; ++k) {
        const int parent = std::uniform_int_distribution<int>(1, k - 1)(rng);
        g.pipes.push_back({parent, k, uni(100.0, 800.0), uni(80.0, 200.0)});
    }
    const int loops = nodes > 3 ? std::uniform_int_distribution<int>(0, 2)(rng) : 0;
    for (int l = 0; l < loops; ++l) {
        const int a = std::uniform_int_distribution<int>(2, nodes)(rng);
        const int b = std::uniform_int_distribution<int>(2, nodes)(rng);
        if (a != b) g.pipes.push_back({a, b, uni(200.0, 800.0), uni(80.0, 150.0)});
    }
    return g;
}

}  // namespace p2g::testkit
