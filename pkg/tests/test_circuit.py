"""XOR network construction, gate counts, depths, netlist emission."""

import pytest

from skewcache import (
    BinaryMatrix,
    FieldSpec,
    SkewParams,
    const_mul_matrix,
    emit_netlist,
    matrix_to_network,
    permutation_cost,
    unreduced_serial_depth,
    way_network,
)
from skewcache.circuit import unreduced_row_weights

from support import MODULUS_256

GF8 = FieldSpec.binary(3)


def all_binary_fields(max_n):
    return [
        FieldSpec.binary(n, modulus=MODULUS_256 if n == 8 else 0)
        for n in range(1, max_n + 1)
    ]


class TestMatrixToNetwork:
    def test_identity_is_free(self):
        net = matrix_to_network(const_mul_matrix(GF8, 1))
        assert net.xor_count == 0
        assert net.depth == 0
        assert net.output_map == ("in0", "in1", "in2")

    def test_times_x_in_gf8(self):
        net = matrix_to_network(const_mul_matrix(GF8, 2))
        assert net.xor_count == 1
        assert net.depth == 1
        # out1 = in0 xor in2, the other outputs are plain wires
        assert net.gates == (("g0", "in0", "in2"),)
        assert net.output_map[1] == "g0"

    def test_all_ones_matrix(self):
        matrix = BinaryMatrix(4, (0b1111,) * 4)
        net = matrix_to_network(matrix)
        assert net.xor_count == 12
        assert net.depth == 2

    def test_zero_row_gives_const_wire(self):
        net = matrix_to_network(const_mul_matrix(GF8, 0))
        assert net.xor_count == 0
        assert net.output_map == ("const0", "const0", "const0")
        assert net.evaluate(0b111) == 0

    def test_row_weight_cost_and_depth(self):
        import math

        for f in all_binary_fields(6):
            for k in range(f.order):
                matrix = const_mul_matrix(f, k)
                net = matrix_to_network(matrix)
                weights = [bin(matrix.row(i)).count("1") for i in range(f.n)]
                assert net.xor_count == sum(max(w - 1, 0) for w in weights)
                depths = net.wire_depths()
                for i, w in enumerate(weights):
                    want = math.ceil(math.log2(w)) if w > 1 else 0
                    assert depths[net.output_map[i]] == want


class TestEquivalence:
    @pytest.mark.parametrize("f", all_binary_fields(6))
    def test_networks_compute_the_field_product(self, f):
        for k in range(f.order):
            net = way_network(f, k)
            for x in range(f.order):
                assert net.evaluate(x) == f.mul(k, x)

    def test_nonzero_constants_are_invertible_maps(self):
        for f in all_binary_fields(6):
            for k in range(1, f.order):
                matrix = const_mul_matrix(f, k)
                images = {matrix.apply(x) for x in range(f.order)}
                assert len(images) == f.order


class TestSerialSchedule:
    def test_weights_cover_shifted_copies(self):
        # k = 0b101, n = 3: copies at shifts 0 and 2
        assert unreduced_row_weights(0b101, 3) == [1, 1, 2, 1, 1]

    def test_depth_bound_n_minus_one(self):
        for f in all_binary_fields(8):
            for k in range(f.order):
                assert unreduced_serial_depth(k, f.n) <= f.n - 1 or f.n == 1

    def test_balanced_tree_never_deeper_than_serial(self):
        for f in all_binary_fields(6):
            for k in range(f.order):
                net = way_network(f, k)
                serial_full = max(
                    (bin(const_mul_matrix(f, k).row(i)).count("1") - 1 for i in range(f.n)),
                    default=0,
                )
                assert net.depth <= max(serial_full, 0)


class TestNetlist:
    def test_identity_alias_only(self):
        net = matrix_to_network(BinaryMatrix(2, (1, 2)))
        text = emit_netlist(net, "ident")
        assert "XOR" not in text
        assert "out0 = in0" in text and "out1 = in1" in text
        assert text.startswith("# netlist ident\n# inputs 2 outputs 2\n")

    def test_single_gate_netlist(self):
        text = emit_netlist(way_network(GF8, 2), "times_x")
        assert text.count("XOR") == 1
        assert "XOR g0 in0 in2" in text

    def test_emission_is_byte_deterministic(self):
        for k in range(8):
            net = way_network(GF8, k)
            assert emit_netlist(net, f"w{k}") == emit_netlist(net, f"w{k}")
        rebuilt = way_network(GF8, 5)
        assert emit_netlist(rebuilt, "w5") == emit_netlist(way_network(GF8, 5), "w5")


class TestPermutationCost:
    def test_gf4_defaults(self):
        report = permutation_cost(SkewParams(FieldSpec.binary(2)))
        assert report.set_path.depth == 0           # a = 1 is wiring
        by_way = {p.constant: p for p in report.way_paths}
        assert by_way[0].xor_count == 0 and by_way[0].depth == 0
        assert by_way[1].xor_count == 0 and by_way[1].depth == 0
        assert by_way[2].depth == 1 and by_way[3].depth == 1
        assert report.critical_path_depth == 2      # deepest product + combine

    def test_way_zero_is_free(self):
        report = permutation_cost(SkewParams(GF8))
        assert report.way_paths[0].xor_count == 0

    def test_totals_add_up(self):
        sp = SkewParams(GF8, a=5, b=3, c=1)
        report = permutation_cost(sp)
        expected = (
            report.set_path.xor_count
            + sum(p.xor_count for p in report.way_paths)
            + report.combine_xor_count
        )
        assert report.total_xor_count == expected
        assert report.combine_xor_count == 8 * 3
        assert report.critical_path_depth == 1 + max(
            report.set_path.depth, max(p.depth for p in report.way_paths)
        )

    def test_rejects_prime_fields(self):
        with pytest.raises(ValueError):
            permutation_cost(SkewParams(FieldSpec.prime(7)))

    def test_report_serializes(self):
        import json

        payload = permutation_cost(SkewParams(GF8)).to_dict()
        parsed = json.loads(json.dumps(payload, sort_keys=True))
        assert parsed["field"]["order"] == 8
        assert len(parsed["way_paths"]) == 8
