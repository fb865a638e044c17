"""XOR-gate cost model for the skewing map.

Multiplying by a design-time constant in GF(2^n) is a linear map, so
each product bit is an XOR of input bits and needs no AND gates.  The
reduction by the modulus is folded into the same matrix, so the
reported cost covers multiply-plus-reduce jointly.

Networks are built with a balanced-tree reduction per output row and no
sharing of subexpressions across outputs, giving a reproducible upper
bound (a synthesizer would usually do better).
"""

from __future__ import annotations

from dataclasses import dataclass

from .field import BinaryMatrix, FieldSpec, const_mul_matrix
from .skew import SkewParams


@dataclass(frozen=True)
class XorNetwork:
    """A combinational net of 2-input XOR gates.

    Wires are named in<i> for inputs, g<k> for gate outputs and const0
    for the constant-zero wire; output bit j reads output_map[j].
    Gates are stored in topological order.
    """

    n_inputs: int
    n_outputs: int
    gates: tuple[tuple[str, str, str], ...]
    output_map: tuple[str, ...]

    @property
    def xor_count(self) -> int:
        return len(self.gates)

    def wire_depths(self) -> dict[str, int]:
        depths = {"const0": 0}
        for i in range(self.n_inputs):
            depths[f"in{i}"] = 0
        for out, a, b in self.gates:
            depths[out] = max(depths[a], depths[b]) + 1
        return depths

    @property
    def depth(self) -> int:
        depths = self.wire_depths()
        return max((depths[w] for w in self.output_map), default=0)

    def evaluate(self, x: int) -> int:
        values = {"const0": 0}
        for i in range(self.n_inputs):
            values[f"in{i}"] = (x >> i) & 1
        for out, a, b in self.gates:
            values[out] = values[a] ^ values[b]
        y = 0
        for j, wire in enumerate(self.output_map):
            y |= values[wire] << j
        return y


def matrix_to_network(matrix: BinaryMatrix) -> XorNetwork:
    """Balanced-tree XOR network computing a GF(2) matrix.

    A row of weight r costs r-1 gates at depth ceil(log2 r); weight-1
    rows alias an input and weight-0 rows alias const0.
    """
    gates: list[tuple[str, str, str]] = []
    outputs: list[str] = []
    counter = 0
    for i in range(matrix.size):
        row = matrix.row(i)
        wires = [f"in{j}" for j in range(matrix.size) if (row >> j) & 1]
        if not wires:
            outputs.append("const0")
            continue
        while len(wires) > 1:
            level = []
            for k in range(0, len(wires) - 1, 2):
                name = f"g{counter}"
                counter += 1
                gates.append((name, wires[k], wires[k + 1]))
                level.append(name)
            if len(wires) % 2:
                level.append(wires[-1])
            wires = level
        outputs.append(wires[0])
    return XorNetwork(
        n_inputs=matrix.size,
        n_outputs=matrix.size,
        gates=tuple(gates),
        output_map=tuple(outputs),
    )


def emit_netlist(net: XorNetwork, name: str) -> str:
    """Deterministic structural text: header, XOR lines, output aliases."""
    lines = [
        f"# netlist {name}",
        f"# inputs {net.n_inputs} outputs {net.n_outputs}",
    ]
    for out, a, b in net.gates:
        lines.append(f"XOR {out} {a} {b}")
    for j, wire in enumerate(net.output_map):
        lines.append(f"out{j} = {wire}")
    return "\n".join(lines) + "\n"


def unreduced_row_weights(k: int, n: int) -> list[int]:
    """Per-bit term counts of the plain (pre-reduction) product by k.

    Product bit r of (n-bit input) * k is the XOR of one shifted input
    copy per set bit j of k with 0 <= r - j < n.
    """
    weights = [0] * max(2 * n - 1, 1)
    for j in range(k.bit_length()):
        if (k >> j) & 1:
            for i in range(n):
                weights[i + j] += 1
    return weights


def unreduced_serial_depth(k: int, n: int) -> int:
    """Depth of a serial XOR chain schedule for the unreduced product."""
    return max((w - 1 for w in unreduced_row_weights(k, n) if w), default=0)


@dataclass(frozen=True)
class PathCost:
    constant: int
    xor_count: int
    depth: int

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "xor_count": self.xor_count,
            "depth": self.depth,
        }


@dataclass(frozen=True)
class CostReport:
    """Gate cost of one full lookup: set path, all way paths, final adds."""

    field: FieldSpec
    a: int
    set_path: PathCost
    way_paths: tuple[PathCost, ...]
    combine_xor_count: int
    total_xor_count: int
    critical_path_depth: int

    def to_dict(self) -> dict:
        return {
            "field": {
                "p": self.field.p,
                "n": self.field.n,
                "modulus": self.field.modulus,
                "order": self.field.order,
            },
            "a": self.a,
            "set_path": self.set_path.to_dict(),
            "way_paths": [w.to_dict() for w in self.way_paths],
            "combine_xor_count": self.combine_xor_count,
            "total_xor_count": self.total_xor_count,
            "critical_path_depth": self.critical_path_depth,
        }


def way_network(f: FieldSpec, w: int) -> XorNetwork:
    """Network for the way-w product path; input is the per-domain b*t word."""
    return matrix_to_network(const_mul_matrix(f, w))


def permutation_cost(sp: SkewParams) -> CostReport:
    """Count XOR gates and levels for one lookup of the skewing map.

    The per-domain b*t products sit in registers, so each way path
    multiplies that registered word by its fixed way index, in parallel
    with the a*s set path.  One extra XOR level per output bit then adds
    the two products; the constant c is absorbed into that level's
    wiring (an XOR with a fixed bit is just an optional inversion).
    """
    f = sp.field
    if f.p != 2:
        raise ValueError(f"gate-cost model needs p=2, got {f!r}")
    n = f.n
    set_net = matrix_to_network(const_mul_matrix(f, sp.a))
    set_path = PathCost(sp.a, set_net.xor_count, set_net.depth)
    way_paths = []
    for w in range(f.order):
        net = way_network(f, w)
        way_paths.append(PathCost(w, net.xor_count, net.depth))
    combine = f.order * n
    total = set_path.xor_count + sum(p.xor_count for p in way_paths) + combine
    critical = max(set_path.depth, max(p.depth for p in way_paths)) + 1
    return CostReport(
        field=f,
        a=sp.a,
        set_path=set_path,
        way_paths=tuple(way_paths),
        combine_xor_count=combine,
        total_xor_count=total,
        critical_path_depth=critical,
    )
