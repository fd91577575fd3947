import json

import pytest

from graphtriple.conditions import (CONDITION_NAMES, evaluate_all,
                                    hypothesis_check, kgraph_hypothesis_check)

from corpus import (bi_infinite_path, double_entry_tree, dyadic_tree,
                    loop_with_exit_tree, one_vertex_3graph, single_loop,
                    sink_path, single_exit_violating_2graph, torus_2graph,
                    tree_with_ends, two_disjoint_loops, two_vertex_2graph)


class TestHypothesisCheck:
    def test_single_loop_all_true(self):
        hyp = hypothesis_check(single_loop(1))
        for key in ("connected", "locally_finite", "no_sinks",
                    "faithful_graph_trace_exists", "single_entry",
                    "fg_ktheory"):
            assert hyp[key], key

    def test_loop_with_exit_no_trace(self):
        hyp = hypothesis_check(loop_with_exit_tree())
        assert not hyp["faithful_graph_trace_exists"]
        assert hyp["single_entry"]

    def test_dyadic_family_flags_growing_ends(self):
        counts = [hypothesis_check(dyadic_tree(d))["ends_count"]
                  for d in (1, 2, 3)]
        assert counts == [2, 4, 8]
        assert all(hypothesis_check(dyadic_tree(d))["fg_ktheory"]
                   for d in (1, 2, 3))

    def test_kgraph_hypotheses(self):
        hyp = kgraph_hypothesis_check(torus_2graph())
        assert hyp["connected"] and hyp["single_exit"]
        assert not kgraph_hypothesis_check(
            single_exit_violating_2graph())["single_exit"]


PASSING = [
    ("loop1", single_loop(1), {}),
    ("loop3", single_loop(3), {}),
    ("bi_path", bi_infinite_path(), {"level": 2}),
    ("tree2", tree_with_ends(2), {"level": 2}),
    ("torus", torus_2graph(), {"level": 2}),
    ("one_vertex_3graph", one_vertex_3graph(), {"level": 1}),
    ("two_vertex_2graph", two_vertex_2graph(), {"level": 2}),
]


class TestEvaluateAll:
    @pytest.mark.parametrize("name,g,kw", PASSING, ids=[p[0] for p in PASSING])
    def test_nine_hold_on_passing_presentations(self, name, g, kw):
        rep = evaluate_all(g, window=10000, **kw)
        statuses = {n: e.status for n, e in rep.entries.items()}
        assert rep.all_hold(), (name, statuses)
        assert set(statuses) == set(CONDITION_NAMES)
        assert rep.exit_code() == 0

    def test_double_entry_fails_orientability_with_witness(self):
        rep = evaluate_all(double_entry_tree(), level=2, window=10000)
        entry = rep.entries["orientability"]
        assert entry.status == "fails"
        assert entry.witness["nonzero_boundary_coefficients"] == {"c": 1}

    def test_loop_with_exit_marks_not_applicable(self):
        rep = evaluate_all(loop_with_exit_tree(), level=2, window=10000)
        assert rep.exit_code() == 3
        na = [n for n, e in rep.entries.items()
              if e.status == "not_applicable"]
        assert "dimension" in na and "closedness" in na
        assert rep.entries["dimension"].witness["violated_hypothesis"] == \
            "faithful_graph_trace_exists"

    def test_disconnected_fails_irreducibility(self):
        rep = evaluate_all(two_disjoint_loops(), window=10000)
        entry = rep.entries["irreducibility"]
        assert entry.status == "fails"
        assert entry.witness["dimension_interior"] == 2

    def test_sink_fails_orientability(self):
        rep = evaluate_all(sink_path(), level=2, window=10000)
        assert rep.entries["orientability"].status == "fails"
        assert rep.entries["orientability"].witness[
            "nonzero_boundary_coefficients"]["w"] == 1

    def test_single_exit_violation_fails_orientability(self):
        rep = evaluate_all(single_exit_violating_2graph(), level=2)
        entry = rep.entries["orientability"]
        assert entry.status == "fails"
        assert entry.witness["failing_step"]["step"] == "step3_ck_cancellation"

    def test_report_json_deterministic(self):
        rep1 = evaluate_all(single_loop(1), window=5000)
        rep2 = evaluate_all(single_loop(1), window=5000)
        assert json.dumps(rep1.to_json(), sort_keys=True) == \
            json.dumps(rep2.to_json(), sort_keys=True)

    def test_report_shape(self):
        rep = evaluate_all(single_loop(1), window=5000)
        doc = rep.to_json()
        assert doc["report_version"] == 1
        assert set(doc["conditions"]) == set(CONDITION_NAMES)
        for entry in doc["conditions"].values():
            assert entry["status"] in ("holds", "fails", "not_applicable")
            assert entry["name"] in CONDITION_NAMES
