#ifndef SPLAYNET_WORKLOAD_HPP
#define SPLAYNET_WORKLOAD_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "splaynet/topology.hpp"

namespace splaynet {

enum class WorkloadKind { Uniform, Zipf, Product, Trace };
enum class ArrivalKind { AllAtOnce, Poisson };

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::Uniform;
    std::size_t m = 1;             // number of splay requests per super-round
    double zipf_alpha = 1.0;
    std::string file;              // product weights or trace path
    ArrivalKind arrival = ArrivalKind::AllAtOnce;
    double poisson_rate = 1.0;     // expected arrivals per time-slot

    // "uniform" | "zipf:<a>" | "product:<file>" | "trace:<file>"
    static WorkloadSpec parse(const std::string& text, std::size_t m);
    std::string label() const;
};

struct SplayRequest {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    std::uint64_t arrival_slot = 0;
};

struct RequestSet {
    std::vector<SplayRequest> requests;
};

/// Draw m valid (src != dst) pairs over the given node ids, reproducible by
/// seed. Requires at least two nodes.
RequestSet generate(const WorkloadSpec& spec, const std::vector<NodeId>& ids, std::uint64_t seed);

/// Parse a trace file: one `src,dst[,arrival_slot]` per line, `#` comments.
RequestSet load_trace(const std::string& path, const std::vector<NodeId>& ids);

struct EntropyPair {
    double sources = 0.0;
    double destinations = 0.0;
};

/// Shannon entropy (bits) of the source and destination frequency
/// distributions; empty terms contribute zero.
EntropyPair empirical_entropy(const RequestSet& rs);

}  // namespace splaynet

#endif
