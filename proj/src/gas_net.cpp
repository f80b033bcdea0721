#include "p2gsim/gas_net.hpp"

#include "p2gsim/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

namespace p2g::gas {

namespace {

constexpr double kRenouardConstant = 25.24;
constexpr double kRenouardExponent = 1.82;
constexpr double kDiameterExponent = -4.82;
// |p_m^2 - p_n^2| below this is treated as no flow
constexpr double kDeadBandBar2 = 1e-12;
// below this |p_m^2 - p_n^2| the flow is linear in the squared-pressure
// difference, so the implicit solve sees a finite slope
constexpr double kLinearZoneBar2 = 1e-6;

// d|q|/dx over C, for x = |p_m^2 - p_n^2|
double flow_slope(double x) {
    return x < kLinearZoneBar2 ? std::pow(kLinearZoneBar2, 1.0 / kRenouardExponent - 1.0)
                               : std::pow(x, 1.0 / kRenouardExponent - 1.0) / kRenouardExponent;
}

double pipe_coefficient(double length_m, double diameter_mm, double rho) {
    const double resistance = kRenouardConstant * length_m * std::pow(diameter_mm, kDiameterExponent);
    return std::pow(1.0 / resistance, 1.0 / kRenouardExponent) * rho / kSecondsPerHour;
}

double pipe_volume(double length_m, double diameter_mm) {
    const double r = diameter_mm / 2000.0;
    return std::numbers::pi * r * r * length_m;
}

}  // namespace

double renouard_flow(double p_m_bar, double p_n_bar, double length_m, double diameter_mm,
                     double rho_std_kg_per_m3) {
    const double x = p_m_bar * p_m_bar - p_n_bar * p_n_bar;
    if (std::abs(x) < kDeadBandBar2) return 0.0;
    const double ax = std::abs(x);
    const double shape = ax < kLinearZoneBar2 ? ax * std::pow(kLinearZoneBar2, 1.0 / kRenouardExponent - 1.0)
                                              : std::pow(ax, 1.0 / kRenouardExponent);
    const double magnitude = pipe_coefficient(length_m, diameter_mm, rho_std_kg_per_m3) * shape;
    return x > 0.0 ? magnitude : -magnitude;
}

double node_volume(std::span<const Pipe> incident_pipes) {
    if (incident_pipes.empty()) {
        throw GasModelError("node_volume: isolated node has no incident pipes");
    }
    double total = 0.0;
    for (const Pipe& p : incident_pipes) total += pipe_volume(p.length_m, p.diameter_mm);
    return total / 2.0;
}

CompiledGasNetwork::CompiledGasNetwork(const GasNetwork& network) : network_(network) {
    if (network.pipes.empty()) throw GasModelError("gas network has no pipes");
    if (!(network.gas.rho_std_kg_per_m3 > 0.0 && network.gas.r_gas_j_per_kgk > 0.0 &&
          network.gas.temperature_k > 0.0)) {
        throw GasModelError("gas properties must be positive");
    }
    if (!(network.p_min_barg < network.citygate_pressure_barg &&
          network.citygate_pressure_barg <= network.p_max_barg)) {
        throw GasModelError("pressure limits must satisfy p_min < citygate <= p_max");
    }

    auto intern = [&](NodeId id) {
        auto [it, inserted] = index_.try_emplace(id, nodes_.size());
        if (inserted) nodes_.push_back(GasNode{id, 0.0, false, false, false});
        return it->second;
    };
    std::vector<std::vector<Pipe>> incident;
    for (const Pipe& p : network.pipes) {
        if (p.from == p.to) {
            throw GasModelError("pipe " + std::to_string(p.from) + "-" + std::to_string(p.to) + " is a self-loop");
        }
        if (!(p.length_m > 0.0) || !(p.diameter_mm > 0.0)) {
            throw GasModelError("pipe " + std::to_string(p.from) + "-" + std::to_string(p.to) +
                                " must have positive length and diameter");
        }
        const std::size_t a = intern(p.from);
        const std::size_t b = intern(p.to);
        incident.resize(nodes_.size());
        incident[a].push_back(p);
        incident[b].push_back(p);
        edges_.push_back(Edge{a, b, p.length_m, p.diameter_mm, false});
    }
    if (!index_.contains(network.citygate)) {
        throw GasModelError("citygate node " + std::to_string(network.citygate) + " has no pipes");
    }
    citygate_ = index_.at(network.citygate);
    nodes_[citygate_].citygate = true;
    for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_[i].volume_m3 = node_volume(incident[i]);
    for (Edge& e : edges_) {
        if (e.to == citygate_) std::swap(e.from, e.to);
        e.from_citygate = e.from == citygate_;
    }

    std::vector<std::vector<std::size_t>> adjacency(nodes_.size());
    for (const Edge& e : edges_) {
        adjacency[e.from].push_back(e.to);
        adjacency[e.to].push_back(e.from);
    }
    std::vector<bool> seen(nodes_.size(), false);
    std::deque<std::size_t> queue{citygate_};
    seen[citygate_] = true;
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        for (std::size_t j : adjacency[i]) {
            if (!seen[j]) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!seen[i]) {
            throw GasModelError("gas node " + std::to_string(nodes_[i].id) + " is not connected to the citygate");
        }
    }
}

std::size_t CompiledGasNetwork::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw GasModelError("unknown gas node " + std::to_string(id));
    return it->second;
}

double CompiledGasNetwork::citygate_pressure_abs() const { return barg_to_abs(network_.citygate_pressure_barg); }
double CompiledGasNetwork::p_max_abs() const { return barg_to_abs(network_.p_max_barg); }
double CompiledGasNetwork::p_min_abs() const { return barg_to_abs(network_.p_min_barg); }

double CompiledGasNetwork::mass_per_bar(std::size_t node) const {
    return nodes_[node].volume_m3 * 1e5 / (network_.gas.r_gas_j_per_kgk * network_.gas.temperature_k);
}

double CompiledGasNetwork::linepack_volume_m3() const {
    double v = 0.0;
    for (const GasNode& n : nodes_) {
        if (!n.citygate) v += n.volume_m3;
    }
    return v;
}

GasState uniform_state(const CompiledGasNetwork& net, double pressure_barg) {
    GasState s;
    s.pressure_bar_abs.assign(net.node_count(), barg_to_abs(pressure_barg));
    s.pressure_bar_abs[net.citygate_index()] = net.citygate_pressure_abs();
    s.pipe_flow_kg_per_s.assign(net.edges().size(), 0.0);
    for (std::size_t k = 0; k < net.edges().size(); ++k) {
        s.pipe_flow_kg_per_s[k] = edge_flow(net, net.edges()[k], s.pressure_bar_abs);
        if (net.edges()[k].from_citygate) s.citygate_flow_kg_per_s += s.pipe_flow_kg_per_s[k];
    }
    return s;
}

double edge_flow(const CompiledGasNetwork& net, const CompiledGasNetwork::Edge& e,
                 std::span<const double> p) {
    const double q = renouard_flow(p[e.from], p[e.to], e.length_m, e.diameter_mm,
                                   net.network().gas.rho_std_kg_per_m3);
    return e.from_citygate ? std::max(0.0, q) : q;
}

namespace {

void fill_flows(const CompiledGasNetwork& net, GasState& s) {
    s.pipe_flow_kg_per_s.assign(net.edges().size(), 0.0);
    s.citygate_flow_kg_per_s = 0.0;
    for (std::size_t k = 0; k < net.edges().size(); ++k) {
        const auto& e = net.edges()[k];
        s.pipe_flow_kg_per_s[k] = edge_flow(net, e, s.pressure_bar_abs);
        if (e.from_citygate) s.citygate_flow_kg_per_s += s.pipe_flow_kg_per_s[k];
    }
}

/// Nodal continuity system shared by the implicit step and the steady solve:
/// F_m = accumulation_m * (P_m - P_old_m) - (inj_m - wit_m + net pipe inflow_m)
class NodalSystem {
public:
    NodalSystem(const CompiledGasNetwork& net, std::span<const double> inj, std::span<const double> wit,
                bool check_valve = true)
        : net_(net), inj_(inj), wit_(wit), check_valve_(check_valve) {
        for (std::size_t i = 0; i < net.node_count(); ++i) {
            if (i == net.citygate_index()) continue;
            unknown_of_.push_back(i);
        }
        slot_.assign(net.node_count(), -1);
        for (std::size_t u = 0; u < unknown_of_.size(); ++u) slot_[unknown_of_[u]] = static_cast<int>(u);
        for (const auto& e : net.edges()) {
            coefficient_.push_back(pipe_coefficient(e.length_m, e.diameter_mm, net.network().gas.rho_std_kg_per_m3));
        }
    }

    std::size_t size() const { return unknown_of_.size(); }

    Eigen::VectorXd residual(std::span<const double> p, std::span<const double> p_old, double accumulation_scale) const {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
        for (std::size_t u = 0; u < unknown_of_.size(); ++u) {
            const std::size_t i = unknown_of_[u];
            f[u] = wit_[i] - inj_[i];
            if (accumulation_scale > 0.0) f[u] += accumulation_scale * net_.mass_per_bar(i) * (p[i] - p_old[i]);
        }
        for (const auto& e : net_.edges()) {
            const double q = flow(e, p);
            if (slot_[e.from] >= 0) f[slot_[e.from]] += q;
            if (slot_[e.to] >= 0) f[slot_[e.to]] -= q;
        }
        return f;
    }

    Eigen::MatrixXd jacobian(std::span<const double> p, double accumulation_scale) const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
        if (accumulation_scale > 0.0) {
            for (std::size_t u = 0; u < unknown_of_.size(); ++u) {
                j(u, u) += accumulation_scale * net_.mass_per_bar(unknown_of_[u]);
            }
        }
        for (std::size_t k = 0; k < net_.edges().size(); ++k) {
            const auto& e = net_.edges()[k];
            const double x = p[e.from] * p[e.from] - p[e.to] * p[e.to];
            if (check_valve_ && e.from_citygate && x < 0.0) continue;  // closed check valve
            const double g = coefficient_[k] * flow_slope(std::abs(x));
            const double dq_dfrom = 2.0 * g * p[e.from];
            const double dq_dto = -2.0 * g * p[e.to];
            const int a = slot_[e.from];
            const int b = slot_[e.to];
            if (a >= 0) {
                j(a, a) += dq_dfrom;
                if (b >= 0) j(a, b) += dq_dto;
            }
            if (b >= 0) {
                j(b, b) -= dq_dto;
                if (a >= 0) j(b, a) -= dq_dfrom;
            }
        }
        return j;
    }

    std::size_t node_of(std::size_t u) const { return unknown_of_[u]; }

private:
    double flow(const CompiledGasNetwork::Edge& e, std::span<const double> p) const {
        return check_valve_ ? edge_flow(net_, e, p)
                            : renouard_flow(p[e.from], p[e.to], e.length_m, e.diameter_mm,
                                            net_.network().gas.rho_std_kg_per_m3);
    }

    const CompiledGasNetwork& net_;
    std::span<const double> inj_;
    std::span<const double> wit_;
    bool check_valve_;
    std::vector<std::size_t> unknown_of_;
    std::vector<int> slot_;
    std::vector<double> coefficient_;
};

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

/// Damped Newton on the nodal system; `p` holds the initial guess and the result.
NewtonOutcome solve_nodal(const NodalSystem& sys, std::vector<double>& p, std::span<const double> p_old,
                          double accumulation_scale, double tolerance, int max_iterations) {
    NewtonOutcome out;
    Eigen::VectorXd f = sys.residual(p, p_old, accumulation_scale);
    out.residual = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    std::vector<double> trial(p.size());
    for (int it = 0; it < max_iterations && out.residual >= tolerance; ++it) {
        out.iterations = it + 1;
        const Eigen::VectorXd delta = sys.jacobian(p, accumulation_scale).partialPivLu().solve(-f);
        if (!delta.allFinite()) break;
        const double merit = f.squaredNorm();
        double lambda = 1.0;
        bool accepted = false;
        Eigen::VectorXd f_trial;
        for (int ls = 0; ls < 40; ++ls, lambda *= 0.5) {
            trial = p;
            bool positive = true;
            for (std::size_t u = 0; u < sys.size(); ++u) {
                const std::size_t i = sys.node_of(u);
                trial[i] = p[i] + lambda * delta[static_cast<Eigen::Index>(u)];
                positive = positive && trial[i] > 0.0;
            }
            if (!positive) continue;
            f_trial = sys.residual(trial, p_old, accumulation_scale);
            if (f_trial.squaredNorm() < (1.0 - 1e-4 * lambda) * merit) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Dead-band discontinuities can leave a residual floor; accept a stalled
            // iterate only when it is already tight.
            break;
        }
        p.swap(trial);
        f = std::move(f_trial);
        out.residual = f.cwiseAbs().maxCoeff();
    }
    out.converged = out.residual < tolerance;
    return out;
}

std::string describe_pressure(const CompiledGasNetwork& net, std::span<const double> p, std::size_t i) {
    std::ostringstream os;
    os << "gas node " << net.nodes()[i].id << " pressure " << p[i] << " bar abs";
    return os.str();
}

}  // namespace

std::vector<double> pressure_rhs(const CompiledGasNetwork& net, const GasState& state,
                                 std::span<const double> injections_kg_per_s,
                                 std::span<const double> withdrawals_kg_per_s) {
    const std::size_t n = net.node_count();
    std::vector<double> net_inflow(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) net_inflow[i] = injections_kg_per_s[i] - withdrawals_kg_per_s[i];
    for (const auto& e : net.edges()) {
        const double q = edge_flow(net, e, state.pressure_bar_abs);
        net_inflow[e.from] -= q;
        net_inflow[e.to] += q;
    }
    std::vector<double> dpdt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == net.citygate_index()) continue;
        dpdt[i] = net_inflow[i] / net.mass_per_bar(i);
    }
    return dpdt;
}

GasStepResult step(const CompiledGasNetwork& net, const GasState& state,
                   std::span<const double> injections_kg_per_s,
                   std::span<const double> withdrawals_kg_per_s, double dt_s, const StepOptions& options) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("gas step: dt_s must be positive");
    const std::size_t n = net.node_count();
    if (injections_kg_per_s.size() != n || withdrawals_kg_per_s.size() != n || state.pressure_bar_abs.size() != n) {
        throw std::invalid_argument("gas step: vector sizes do not match node count");
    }
    const NodalSystem sys(net, injections_kg_per_s, withdrawals_kg_per_s);

    GasStepResult result;
    std::vector<double> p = state.pressure_bar_abs;
    p[net.citygate_index()] = net.citygate_pressure_abs();
    const double upper = net.p_max_abs() + options.pressure_margin_bar;

    double remaining = dt_s;
    double h = dt_s;
    while (remaining > 1e-9 * dt_s) {
        h = std::min(h, remaining);
        std::vector<double> trial = p;
        const NewtonOutcome nt = solve_nodal(sys, trial, p, 1.0 / h, options.newton_tolerance_kg_per_s,
                                             options.max_newton_iterations);
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) max_change = std::max(max_change, std::abs(trial[i] - p[i]));

        const bool at_floor = h <= options.min_substep_s * (1.0 + 1e-12);
        if ((!nt.converged || max_change > options.max_pressure_change_bar) && !at_floor) {
            h = std::max(h / 2.0, options.min_substep_s);
            continue;
        }
        if (!nt.converged) {
            std::ostringstream os;
            os << "gas step: implicit solve failed at minimum sub-step (residual " << nt.residual << " kg/s)";
            throw GasModelError(os.str());
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(trial[i] > 0.0) || trial[i] > upper) {
                throw GasModelError("gas step: integration left the admissible range: " +
                                    describe_pressure(net, trial, i));
            }
        }
        p.swap(trial);
        double cg = 0.0;
        for (const auto& e : net.edges()) {
            if (e.from_citygate) cg += edge_flow(net, e, p);
        }
        result.citygate_mass_kg += cg * h;
        remaining -= h;
        ++result.substeps;
        h *= 2.0;
    }

    result.state.pressure_bar_abs = std::move(p);
    fill_flows(net, result.state);
    return result;
}

double mean_pressure(const CompiledGasNetwork& net, const GasState& state) {
    double weighted = 0.0;
    double volume = 0.0;
    for (std::size_t i = 0; i < net.node_count(); ++i) {
        if (i == net.citygate_index()) continue;
        weighted += net.nodes()[i].volume_m3 * state.pressure_bar_abs[i];
        volume += net.nodes()[i].volume_m3;
    }
    return weighted / volume;
}

double max_sng_injectable(const CompiledGasNetwork& net, const GasState& state,
                          std::span<const double> withdrawals_kg_per_s, double dt_s) {
    double withdrawn = 0.0;
    for (double w : withdrawals_kg_per_s) withdrawn += w;
    const auto& gas = net.network().gas;
    const double headroom = (net.p_max_abs() - mean_pressure(net, state)) * 1e5 * net.linepack_volume_m3() /
                            (gas.r_gas_j_per_kgk * gas.temperature_k);
    return std::max(0.0, withdrawn * dt_s + headroom);
}

double stored_mass_kg(const CompiledGasNetwork& net, const GasState& state) {
    double m = 0.0;
    for (std::size_t i = 0; i < net.node_count(); ++i) m += net.mass_per_bar(i) * state.pressure_bar_abs[i];
    return m;
}

std::vector<double> steady_state_solve(const CompiledGasNetwork& net,
                                       std::span<const double> withdrawals_kg_per_s,
                                       std::span<const double> injections_kg_per_s,
                                       const SteadyStateOptions& options) {
    const std::size_t n = net.node_count();
    if (withdrawals_kg_per_s.size() != n || injections_kg_per_s.size() != n) {
        throw std::invalid_argument("steady_state_solve: vector sizes do not match node count");
    }
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) balance += withdrawals_kg_per_s[i] - injections_kg_per_s[i];
    if (balance < -options.tolerance_kg_per_s) {
        throw GasModelError("steady_state_solve: injections exceed withdrawals; the citygate cannot export gas");
    }

    const double pcg = net.citygate_pressure_abs();
    std::vector<double> p(n, pcg);
    // Reverse citygate flow is rejected after the solve.
    const NodalSystem sys(net, injections_kg_per_s, withdrawals_kg_per_s, false);

    // Initial guess: squared pressures from a linear-conductance network solve.
    if (sys.size() > 0 && balance > 0.0) {
        const auto m = static_cast<Eigen::Index>(sys.size());
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        std::vector<int> slot(n, -1);
        for (std::size_t u = 0; u < sys.size(); ++u) {
            slot[sys.node_of(u)] = static_cast<int>(u);
            rhs[static_cast<Eigen::Index>(u)] =
                injections_kg_per_s[sys.node_of(u)] - withdrawals_kg_per_s[sys.node_of(u)];
        }
        for (const auto& e : net.edges()) {
            const double g = pipe_coefficient(e.length_m, e.diameter_mm, net.network().gas.rho_std_kg_per_m3);
            const int a = slot[e.from];
            const int b = slot[e.to];
            if (a >= 0) lap(a, a) += g;
            if (b >= 0) lap(b, b) += g;
            if (a >= 0 && b >= 0) {
                lap(a, b) -= g;
                lap(b, a) -= g;
            }
            if (a < 0) rhs[b] += g * pcg * pcg;
            if (b < 0) rhs[a] += g * pcg * pcg;
        }
        const Eigen::VectorXd pi2 = lap.partialPivLu().solve(rhs);
        for (std::size_t u = 0; u < sys.size(); ++u) {
            const double v = pi2[static_cast<Eigen::Index>(u)];
            p[sys.node_of(u)] = std::sqrt(std::clamp(v, 0.25 * pcg * pcg, pcg * pcg));
        }
    }

    const NewtonOutcome nt = solve_nodal(sys, p, p, 0.0, options.tolerance_kg_per_s, options.max_iterations);
    if (!nt.converged) {
        std::ostringstream os;
        os << "steady_state_solve: Newton did not converge (residual " << nt.residual << " kg/s after "
           << nt.iterations << " iterations)";
        throw GasModelError(os.str());
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] < options.pressure_floor_bar_abs) {
            throw GasModelError("steady_state_solve: infeasible demand, " + describe_pressure(net, p, i));
        }
    }
    for (const auto& e : net.edges()) {
        if (e.from_citygate &&
            renouard_flow(p[e.from], p[e.to], e.length_m, e.diameter_mm, net.network().gas.rho_std_kg_per_m3) <
                -options.tolerance_kg_per_s) {
            throw GasModelError("steady_state_solve: solution requires reverse flow through the citygate");
        }
    }
    return p;
}

}  // namespace p2g::gas
