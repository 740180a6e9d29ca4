"""Folded-Clos / fat-tree construction with up-down routing tables.

Node ids are dense ints, hosts first.  Routing is expressed at the
node-neighbor level: per switch either a unique downward neighbor per
destination host, or the set of equal-cost upward neighbors.  Up-down paths
are cycle-free, so no credit-loop handling is needed anywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

HOST, EDGE, AGG, CORE = 0, 1, 2, 3

_TIER_NAMES = {HOST: "host", EDGE: "edge", AGG: "agg", CORE: "core"}


@dataclass
class Topology:
    tiers: int
    radix: int
    host_count: int
    names: list[str]
    node_tier: list[int]
    links: list[tuple[int, int]]            # undirected, both directions exist
    down_route: dict[int, dict[int, int]]   # switch -> dest host -> neighbor
    up_nodes: dict[int, list[int]]          # switch -> equal-cost upward neighbors
    host_attach: list[int] = field(default_factory=list)  # host -> edge switch

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    def tier_name(self, node: int) -> str:
        return _TIER_NAMES[self.node_tier[node]]

    def path_ports(self, src_host: int, dst_host: int) -> int:
        """Number of traversed links on a max-length up-down path src->dst."""
        if src_host == dst_host:
            return 0
        node = self.host_attach[src_host]
        hops = 1
        while True:
            nxt = self.down_route[node].get(dst_host)
            if nxt is None:
                nxt = self.up_nodes[node][0]
            hops += 1
            if nxt == dst_host:
                return hops
            node = nxt


def build_fat_tree(tiers: int, radix: int) -> Topology:
    """Full-bisection fat tree: radix/2, radix^2/2, or radix^3/4 hosts."""
    if tiers not in (1, 2, 3):
        raise ValueError(f"tiers must be 1, 2, or 3, got {tiers}")
    if radix < 2 or radix % 2:
        raise ValueError(f"radix must be even and >= 2, got {radix}")

    half = radix // 2
    names: list[str] = []
    node_tier: list[int] = []
    links: list[tuple[int, int]] = []
    down: dict[int, dict[int, int]] = {}
    up: dict[int, list[int]] = {}

    def add_node(name: str, tier: int) -> int:
        names.append(name)
        node_tier.append(tier)
        return len(names) - 1

    if tiers == 1:
        hosts = [add_node(f"h{i}", HOST) for i in range(half)]
        sw = add_node("e0", EDGE)
        down[sw] = {h: h for h in hosts}
        up[sw] = []
        links += [(h, sw) for h in hosts]
        attach = [sw] * len(hosts)

    elif tiers == 2:
        n_hosts = radix * half
        hosts = [add_node(f"h{i}", HOST) for i in range(n_hosts)]
        leaves = [add_node(f"e{i}", EDGE) for i in range(radix)]
        spines = [add_node(f"a{i}", AGG) for i in range(half)]
        attach = []
        for li, leaf in enumerate(leaves):
            mine = hosts[li * half:(li + 1) * half]
            down[leaf] = {h: h for h in mine}
            up[leaf] = list(spines)
            links += [(h, leaf) for h in mine]
            attach += [leaf] * len(mine)
        for spine in spines:
            down[spine] = {h: leaves[h // half] for h in hosts}
            up[spine] = []
            links += [(leaf, spine) for leaf in leaves]

    else:
        pod_hosts = half * half
        n_hosts = radix * pod_hosts
        hosts = [add_node(f"h{i}", HOST) for i in range(n_hosts)]
        edges = [[add_node(f"e{p}_{e}", EDGE) for e in range(half)] for p in range(radix)]
        aggs = [[add_node(f"a{p}_{a}", AGG) for a in range(half)] for p in range(radix)]
        cores = [[add_node(f"c{g}_{c}", CORE) for c in range(half)] for g in range(half)]
        attach = []
        for p in range(radix):
            for e in range(half):
                sw = edges[p][e]
                mine = hosts[p * pod_hosts + e * half: p * pod_hosts + (e + 1) * half]
                down[sw] = {h: h for h in mine}
                up[sw] = list(aggs[p])
                links += [(h, sw) for h in mine]
                attach += [sw] * len(mine)
            for a in range(half):
                sw = aggs[p][a]
                down[sw] = {
                    h: edges[p][(h % pod_hosts) // half]
                    for h in hosts[p * pod_hosts:(p + 1) * pod_hosts]
                }
                up[sw] = list(cores[a])
                links += [(edges[p][e], sw) for e in range(half)]
        for g in range(half):
            for c in range(half):
                sw = cores[g][c]
                down[sw] = {h: aggs[h // pod_hosts][g] for h in hosts}
                up[sw] = []
                links += [(aggs[p][g], sw) for p in range(radix)]

    return Topology(
        tiers=tiers,
        radix=radix,
        host_count=len(hosts),
        names=names,
        node_tier=node_tier,
        links=links,
        down_route=down,
        up_nodes=up,
        host_attach=attach,
    )
