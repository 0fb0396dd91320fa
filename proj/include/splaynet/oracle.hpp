#ifndef SPLAYNET_ORACLE_HPP
#define SPLAYNET_ORACLE_HPP

#include <vector>

#include "splaynet/rotation.hpp"
#include "splaynet/topology.hpp"

namespace splaynet {

struct OracleRotation {
    NodeId node;
    RotationKind kind;
};

struct OracleTrace {
    std::vector<OracleRotation> rotations;
    int cyber_dollars = 0;
};

/// Non-concurrent reference: s splays to the lowest common ancestor, then d
/// splays upward until it hangs directly under s.
OracleTrace sequential_splay(Tree& t, NodeId s, NodeId d);

/// Round-based serialization of the concurrent double splay: both endpoints
/// rotate toward each other, one rotation per logical round, the current
/// LCA holder waiting. Within a round the endpoint closer to the LCA acts
/// first; remaining ties go to the lower round count then the smaller id,
/// matching the priority routine's arbitration in the simulator.
OracleTrace parallel_reference_splay(Tree& t, NodeId s, NodeId d);

/// One endpoint step of the parallel splay (also used by tests): picks the
/// rotation the protocol's level-two decision rule would perform for
/// `u` splaying toward `peer`.
RotationKind reference_step_kind(const Tree& t, NodeId u, NodeId peer);

}  // namespace splaynet

#endif
