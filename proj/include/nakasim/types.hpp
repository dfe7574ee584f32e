#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace nakasim {

using Slot = std::int64_t;
using NodeId = std::uint32_t;
using BlockId = std::uint32_t;
using TxId = std::uint64_t;

inline constexpr BlockId kGenesis = 0;
inline constexpr BlockId kNoBlock = std::numeric_limits<BlockId>::max();
inline constexpr Slot kGenesisSlot = -1;
// SPV miners are not nodes of the protocol; their BPOs carry this node id.
inline constexpr NodeId kSpvNode = std::numeric_limits<NodeId>::max() - 1;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct BpoId {
    Slot slot = kGenesisSlot;
    NodeId node = kNoNode;
    bool honest = true;
    std::uint32_t seq = 0;

    bool operator==(const BpoId& o) const { return slot == o.slot && seq == o.seq && node == o.node; }
};

struct BpoHash {
    std::size_t operator()(const BpoId& b) const noexcept
    {
        std::uint64_t x = static_cast<std::uint64_t>(b.slot) * 0x9E3779B97F4A7C15ULL;
        x ^= (static_cast<std::uint64_t>(b.seq) << 32) ^ b.node;
        x ^= x >> 29;
        return static_cast<std::size_t>(x * 0xBF58476D1CE4E5B9ULL);
    }
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct SimParams {
    std::uint32_t n_nodes = 20;
    double beta = 0.0;
    double rho = 0.1;            // expected BPOs per slot
    double tau = 0.1;            // seconds per slot
    double delta_h = 0.0;        // header delay bound, seconds
    double capacity = 1.0;       // blocks per second per node
    std::int64_t nu = 0;         // slots
    double c_tilde = 0.0;        // blocks
    std::int64_t horizon_slots = 10000;
    std::uint64_t seed = 1;

    double lambda() const { return rho / tau; }
    double lambda_honest() const { return (1.0 - beta) * lambda(); }
    double lambda_adversary() const { return beta * lambda(); }
    std::int64_t header_delay_slots() const;

    // Fills nu from c_tilde (or c_tilde from nu when c_tilde <= 0).
    void link_analysis_params();
    void validate() const;
};

// rho/beta from a pair of honest and adversary rates (blocks per second).
SimParams params_from_rates(double lambda_hon, double lambda_adv, double tau);

}  // namespace nakasim
