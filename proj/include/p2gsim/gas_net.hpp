#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace p2g::gas {

using NodeId = int;

struct Pipe {
    NodeId from = 0;
    NodeId to = 0;
    double length_m = 0.0;
    double diameter_mm = 0.0;

    bool operator==(const Pipe&) const = default;
};

struct GasProperties {
    double rho_std_kg_per_m3 = 0.78;
    double r_gas_j_per_kgk = 518.0;
    double temperature_k = 288.0;

    bool operator==(const GasProperties&) const = default;
};

/// Medium-pressure distribution network fed by a single pressure-regulated
/// citygate. Limits are gauge pressures; the model works in absolute bar.
struct GasNetwork {
    std::vector<Pipe> pipes;
    NodeId citygate = 1;
    GasProperties gas;
    double citygate_pressure_barg = 4.0;
    double p_min_barg = 1.5;
    double p_max_barg = 5.0;

    bool operator==(const GasNetwork&) const = default;
};

class GasModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pipe flow from the Renouard medium-pressure correlation [kg/s], positive
/// from m to n. Pressures in absolute bar, length in m, diameter in mm.
double renouard_flow(double p_m_bar, double p_n_bar, double length_m, double diameter_mm,
                     double rho_std_kg_per_m3);

/// Half the summed volume of the pipes incident to a node [m3].
double node_volume(std::span<const Pipe> incident_pipes);

struct GasNode {
    NodeId id = 0;
    double volume_m3 = 0.0;
    bool citygate = false;
    bool withdrawal = false;
    bool injection = false;
};

/// Indexed form of a GasNetwork used by the solvers.
class CompiledGasNetwork {
public:
    explicit CompiledGasNetwork(const GasNetwork& network);

    const GasNetwork& network() const { return network_; }
    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<GasNode>& nodes() const { return nodes_; }
    std::vector<GasNode>& nodes() { return nodes_; }
    bool has_node(NodeId id) const { return index_.contains(id); }
    std::size_t index_of(NodeId id) const;
    std::size_t citygate_index() const { return citygate_; }

    struct Edge {
        std::size_t from;
        std::size_t to;
        double length_m;
        double diameter_mm;
        bool from_citygate;  // check valve: no flow back into the citygate
    };
    const std::vector<Edge>& edges() const { return edges_; }

    double citygate_pressure_abs() const;
    double p_max_abs() const;
    double p_min_abs() const;
    /// Storage capacity of node volume: kg per bar of pressure change.
    double mass_per_bar(std::size_t node) const;
    /// Total volume of the nodes whose pressure can change (citygate excluded).
    double linepack_volume_m3() const;

private:
    GasNetwork network_;
    std::vector<GasNode> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::size_t citygate_ = 0;
};

struct GasState {
    std::vector<double> pressure_bar_abs;  // per node index
    double citygate_flow_kg_per_s = 0.0;
    std::vector<double> pipe_flow_kg_per_s;  // per edge, positive from -> to
};

/// Uniform initial state with every node at `pressure_barg`; the citygate is
/// always at its regulated pressure.
GasState uniform_state(const CompiledGasNetwork& net, double pressure_barg);

/// Edge flow honouring the citygate check valve.
double edge_flow(const CompiledGasNetwork& net, const CompiledGasNetwork::Edge& e,
                 std::span<const double> pressure_bar_abs);

/// dP/dt per node [bar/s]; zero at the citygate.
std::vector<double> pressure_rhs(const CompiledGasNetwork& net, const GasState& state,
                                 std::span<const double> injections_kg_per_s,
                                 std::span<const double> withdrawals_kg_per_s);

struct StepOptions {
    double max_pressure_change_bar = 0.01;  // per sub-step
    double min_substep_s = 1.0;
    double newton_tolerance_kg_per_s = 1e-9;
    int max_newton_iterations = 60;
    double pressure_margin_bar = 1.0;  // above p_max before a step is declared failed
};

struct GasStepResult {
    GasState state;
    double citygate_mass_kg = 0.0;  // mass imported through the citygate during the step
    int substeps = 0;
};

/// Advances pressures over dt_s with backward-Euler sub-steps.
GasStepResult step(const CompiledGasNetwork& net, const GasState& state,
                   std::span<const double> injections_kg_per_s,
                   std::span<const double> withdrawals_kg_per_s, double dt_s,
                   const StepOptions& options = {});

/// Volume-weighted mean pressure over the non-citygate nodes [bar abs].
double mean_pressure(const CompiledGasNetwork& net, const GasState& state);

/// SNG mass [kg] the network can accept during one step of dt_s: the step's
/// withdrawals plus the linepack headroom up to p_max, clamped at zero.
double max_sng_injectable(const CompiledGasNetwork& net, const GasState& state,
                          std::span<const double> withdrawals_kg_per_s, double dt_s);

/// Gas mass held in the node volumes [kg], ideal gas.
double stored_mass_kg(const CompiledGasNetwork& net, const GasState& state);

struct SteadyStateOptions {
    double tolerance_kg_per_s = 1e-9;
    int max_iterations = 200;
    double pressure_floor_bar_abs = 0.05;
};

/// Newton solve of nodal continuity with Renouard pipe flows and the citygate
/// at its regulated pressure. Returns absolute pressures per node index.
std::vector<double> steady_state_solve(const CompiledGasNetwork& net,
                                       std::span<const double> withdrawals_kg_per_s,
                                       std::span<const double> injections_kg_per_s,
                                       const SteadyStateOptions& options = {});

}  // namespace p2g::gas
