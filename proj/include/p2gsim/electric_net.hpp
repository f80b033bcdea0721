#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace p2g::electric {

using BusId = int;
using Complex = std::complex<double>;

struct Branch {
    BusId from = 0;
    BusId to = 0;
    double r_pu = 0.0;  // total branch resistance on the system base
    double x_pu = 0.0;
    double length_km = 0.0;

    bool operator==(const Branch&) const = default;
};

/// HV/MV transformer; its MV busbar is the slack bus of one radial feeder.
struct Transformer {
    int id = 0;
    BusId root_bus = 0;
    double base_kv = 15.0;

    bool operator==(const Transformer&) const = default;
};

struct ElectricalNetwork {
    std::vector<Branch> branches;
    std::vector<Transformer> transformers;
    double base_mva = 10.0;
    double slack_voltage_pu = 1.0;

    bool operator==(const ElectricalNetwork&) const = default;
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PowerFlowError : public std::runtime_error {
public:
    PowerFlowError(const std::string& what, double last_residual, int iterations)
        : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}

    double last_residual() const { return last_residual_; }
    int iterations() const { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

/// Bus with its feeder membership, as resolved by compile().
struct Bus {
    BusId id = 0;
    std::size_t feeder = 0;      // index into ElectricalNetwork::transformers
    std::ptrdiff_t parent = -1;  // bus index, -1 for a transformer root
    std::ptrdiff_t parent_branch = -1;
};

/// Radial network in solver form: buses in breadth-first order per feeder,
/// so every parent precedes its children.
class RadialTopology {
public:
    explicit RadialTopology(const ElectricalNetwork& network);

    std::size_t bus_count() const { return buses_.size(); }
    std::size_t feeder_count() const { return roots_.size(); }
    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const std::vector<std::size_t>& roots() const { return roots_; }
    double base_mva() const { return base_mva_; }
    double slack_voltage_pu() const { return slack_voltage_pu_; }

    bool has_bus(BusId id) const { return index_.contains(id); }
    std::size_t index_of(BusId id) const;
    std::size_t feeder_of(BusId id) const { return buses_[index_of(id)].feeder; }

    double kw_to_pu(double kw) const { return kw / (base_mva_ * 1000.0); }
    double pu_to_kw(double pu) const { return pu * base_mva_ * 1000.0; }

private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;  // re-oriented parent -> child, indexed like the input
    std::vector<std::size_t> roots_;
    std::unordered_map<BusId, std::size_t> index_;
    double base_mva_;
    double slack_voltage_pu_;
};

struct PowerFlowOptions {
    double tolerance_pu = 1e-8;
    int max_iterations = 100;
};

struct ElectricalState {
    std::vector<Complex> voltage;        // per bus index
    std::vector<Complex> branch_current; // parent -> child
    std::vector<Complex> branch_power;   // sending-end complex power, parent -> child
    std::vector<double> transformer_import_pu;  // active power, positive HV -> MV
    std::vector<double> feeder_losses_pu;
    int iterations = 0;
    double last_update_pu = 0.0;
};

/// Backward-Forward Sweep for a radial forest. `injections_pu` is the net complex
/// power injected at each bus (generation minus load), indexed like topology.buses().
ElectricalState bfs_power_flow(const RadialTopology& topology, std::span<const Complex> injections_pu,
                               const PowerFlowOptions& options = {});

struct FeederTotals {
    double demand_kw = 0.0;
    double res_kw = 0.0;
};

struct TransformerBalance {
    double import_kw = 0.0;
    double rpf_kw = 0.0;
    double surplus_kw = 0.0;
};

/// Per-feeder import, reverse power flow read from the solved state, and RES
/// surplus from the profile sums.
std::vector<TransformerBalance> transformer_balance(const RadialTopology& topology,
                                                    const ElectricalState& state,
                                                    std::span<const FeederTotals> totals);

/// Active-power Kirchhoff mismatch |P_import - P_load + P_gen - P_loss| summed
/// over feeders, in pu.
double conservation_residual_pu(const RadialTopology& topology, const ElectricalState& state,
                                std::span<const Complex> injections_pu);

}  // namespace p2g::electric
