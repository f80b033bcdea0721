#include "p2gsim/electric_net.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace p2g::electric {

RadialTopology::RadialTopology(const ElectricalNetwork& network)
    : branches_(network.branches),
      base_mva_(network.base_mva),
      slack_voltage_pu_(network.slack_voltage_pu) {
    if (network.transformers.empty()) {
        throw TopologyError("electrical network has no transformers");
    }
    if (!(base_mva_ > 0.0)) {
        throw TopologyError("base_mva must be positive");
    }

    std::unordered_map<BusId, std::vector<std::size_t>> adjacency;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        const Branch& br = branches_[b];
        if (br.from == br.to) {
            throw TopologyError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                                " is a self-loop");
        }
        if (br.r_pu < 0.0 || br.x_pu < 0.0) {
            throw TopologyError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                                " has a negative impedance");
        }
        adjacency[br.from].push_back(b);
        adjacency[br.to].push_back(b);
    }

    std::vector<bool> branch_used(branches_.size(), false);
    for (std::size_t f = 0; f < network.transformers.size(); ++f) {
        const BusId root = network.transformers[f].root_bus;
        if (index_.contains(root)) {
            throw TopologyError("bus " + std::to_string(root) + " is reached from more than one transformer");
        }
        index_[root] = buses_.size();
        roots_.push_back(buses_.size());
        buses_.push_back(Bus{root, f, -1, -1});

        std::deque<BusId> queue{root};
        while (!queue.empty()) {
            const BusId id = queue.front();
            queue.pop_front();
            const std::size_t parent_index = index_.at(id);
            for (std::size_t b : adjacency[id]) {
                if (branch_used[b]) continue;
                branch_used[b] = true;
                Branch& br = branches_[b];
                if (br.to == id) std::swap(br.from, br.to);
                if (index_.contains(br.to)) {
                    throw TopologyError("network is not radial: bus " + std::to_string(br.to) +
                                        " closes a loop (or joins two feeders)");
                }
                index_[br.to] = buses_.size();
                buses_.push_back(Bus{br.to, f, static_cast<std::ptrdiff_t>(parent_index),
                                     static_cast<std::ptrdiff_t>(b)});
                queue.push_back(br.to);
            }
        }
    }
    for (const auto& [id, _] : adjacency) {
        if (!index_.contains(id)) {
            throw TopologyError("bus " + std::to_string(id) + " is not connected to any transformer");
        }
    }
}

std::size_t RadialTopology::index_of(BusId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw TopologyError("unknown bus " + std::to_string(id));
    }
    return it->second;
}

ElectricalState bfs_power_flow(const RadialTopology& topology, std::span<const Complex> injections_pu,
                               const PowerFlowOptions& options) {
    const auto& buses = topology.buses();
    const auto& branches = topology.branches();
    const std::size_t n = buses.size();
    if (injections_pu.size() != n) {
        throw std::invalid_argument("bfs_power_flow: injection vector size does not match bus count");
    }
    for (const Complex& s : injections_pu) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            throw std::invalid_argument("bfs_power_flow: non-finite injection");
        }
    }

    ElectricalState state;
    state.voltage.assign(n, Complex(topology.slack_voltage_pu(), 0.0));
    state.branch_current.assign(branches.size(), Complex{});
    std::vector<Complex> accumulated(n);

    auto backward_sweep = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            accumulated[i] = -std::conj(injections_pu[i] / state.voltage[i]);
        }
        for (std::size_t k = n; k-- > 0;) {
            const Bus& bus = buses[k];
            if (bus.parent < 0) continue;
            state.branch_current[bus.parent_branch] = accumulated[k];
            accumulated[bus.parent] += accumulated[k];
        }
    };

    bool converged = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        backward_sweep();
        double max_change = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const Bus& bus = buses[k];
            if (bus.parent < 0) continue;
            const Branch& br = branches[bus.parent_branch];
            const Complex v = state.voltage[bus.parent] -
                              Complex(br.r_pu, br.x_pu) * state.branch_current[bus.parent_branch];
            max_change = std::max(max_change, std::abs(v - state.voltage[k]));
            state.voltage[k] = v;
        }
        state.iterations = it;
        state.last_update_pu = max_change;
        if (!std::isfinite(max_change)) break;
        if (max_change < options.tolerance_pu) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw PowerFlowError("backward-forward sweep did not converge", state.last_update_pu, state.iterations);
    }
    backward_sweep();

    state.branch_power.assign(branches.size(), Complex{});
    state.transformer_import_pu.assign(topology.feeder_count(), 0.0);
    state.feeder_losses_pu.assign(topology.feeder_count(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const Bus& bus = buses[k];
        if (bus.parent < 0) {
            state.transformer_import_pu[bus.feeder] -= injections_pu[k].real();
            continue;
        }
        const auto b = static_cast<std::size_t>(bus.parent_branch);
        const Complex j = state.branch_current[b];
        state.branch_power[b] = state.voltage[bus.parent] * std::conj(j);
        state.feeder_losses_pu[bus.feeder] += std::norm(j) * branches[b].r_pu;
        if (buses[bus.parent].parent < 0) {
            state.transformer_import_pu[bus.feeder] += state.branch_power[b].real();
        }
    }
    return state;
}

std::vector<TransformerBalance> transformer_balance(const RadialTopology& topology,
                                                    const ElectricalState& state,
                                                    std::span<const FeederTotals> totals) {
    if (totals.size() != topology.feeder_count() || state.transformer_import_pu.size() != topology.feeder_count()) {
        throw std::invalid_argument("transformer_balance: feeder count mismatch");
    }
    std::vector<TransformerBalance> out(topology.feeder_count());
    for (std::size_t f = 0; f < out.size(); ++f) {
        out[f].import_kw = topology.pu_to_kw(state.transformer_import_pu[f]);
        out[f].rpf_kw = std::max(0.0, -out[f].import_kw);
        out[f].surplus_kw = std::max(0.0, totals[f].res_kw - totals[f].demand_kw);
    }
    return out;
}

double conservation_residual_pu(const RadialTopology& topology, const ElectricalState& state,
                                std::span<const Complex> injections_pu) {
    std::vector<double> balance(topology.feeder_count(), 0.0);
    for (std::size_t f = 0; f < balance.size(); ++f) {
        balance[f] = state.transformer_import_pu[f] - state.feeder_losses_pu[f];
    }
    const auto& buses = topology.buses();
    for (std::size_t k = 0; k < buses.size(); ++k) {
        balance[buses[k].feeder] += injections_pu[k].real();
    }
    double total = 0.0;
    for (double b : balance) total += std::abs(b);
    return total;
}

}  // namespace p2g::electric
