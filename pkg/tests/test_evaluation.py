import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lectometer.errors import CoverageError, RangeError
from lectometer.evaluation import (
    Quality,
    binarize_likert,
    build_ground_truth,
    compare_human_machine,
    error_contingency,
    evaluate,
    loo_agreement,
    machine_predictions,
    machine_to_likert,
    prevailing_mode,
    render_evaluation_text,
)
from lectometer.fusion import FrameScore, ModalityScores
from lectometer.observation import parse_annotations

from conftest import ANNOTATION_HEADER, expressions_fixture


def annotations(rows):
    """rows: (annotator, item, expression, activity, hand, head, overall[, speech])."""
    lines = []
    for r in rows:
        a, i, e, act, h, hd, o = r[:7]
        lines.append(f"{a},{i},frame,{e},{act},{h},{hd},{o},\n")
        if len(r) > 7:
            lines.append(f"{a},{i},audio,,,,,,{r[7]}\n")
    return parse_annotations(ANNOTATION_HEADER + "".join(lines))


class TestLabels:
    @pytest.mark.parametrize("r,q", [(1, Quality.LOW), (2, Quality.LOW), (3, Quality.HIGH), (4, Quality.HIGH)])
    def test_binarize(self, r, q):
        assert binarize_likert(r) is q

    @pytest.mark.parametrize("r", [0, 5])
    def test_binarize_range(self, r):
        with pytest.raises(RangeError):
            binarize_likert(r)

    def test_mode(self):
        H, L = Quality.HIGH, Quality.LOW
        assert prevailing_mode([H, H, L]) is H
        assert prevailing_mode([L, H]) is L
        assert prevailing_mode([H] * 9) is H
        assert prevailing_mode([4, 1, 4, 1, 2]) == 1

    def test_mode_empty(self):
        with pytest.raises(ValueError):
            prevailing_mode([])

    @settings(max_examples=1000)
    @given(st.lists(st.integers(1, 4), min_size=1, max_size=9), st.randoms(use_true_random=False))
    def test_mode_permutation_invariant(self, values, rnd):
        shuffled = values[:]
        rnd.shuffle(shuffled)
        assert prevailing_mode(values) == prevailing_mode(shuffled)

    def test_machine_scale(self):
        assert [machine_to_likert(t) for t in range(6)] == [1, 2, 2, 3, 3, 4]
        with pytest.raises(RangeError):
            machine_to_likert(6)


class TestGroundTruth:
    def test_binarize_then_mode(self):
        ann = annotations([("a", 1, 3, 1, 1, 1, 1), ("b", 1, 3, 1, 1, 1, 1), ("c", 1, 2, 1, 1, 1, 1)])
        assert build_ground_truth(ann)["expression"]["1"] is Quality.HIGH

    def test_tie_goes_low(self):
        ann = annotations([("a", 1, 1, 1, 1, 1, 1), ("b", 1, 4, 1, 1, 1, 1)])
        assert build_ground_truth(ann)["expression"]["1"] is Quality.LOW

    def test_overall_raw_scale(self):
        ann = annotations([("a", 1, 1, 1, 1, 1, 4), ("b", 1, 1, 1, 1, 1, 4), ("c", 1, 1, 1, 1, 1, 3)])
        assert build_ground_truth(ann)["overall"]["1"] == 4

    def test_nine_by_hundred(self):
        ann = annotations([(f"a{a}", i, 3, 3, 3, 3, 3, 3) for a in range(9) for i in range(100)])
        gt = build_ground_truth(ann)
        assert all(len(gt.items(m)) == 100 for m in ("expression", "speech", "pose", "overall"))

    def test_coverage(self):
        ann = annotations([("a", 1, 3, 3, 3, 3, 3)])
        with pytest.raises(CoverageError, match="2"):
            build_ground_truth(ann, frame_items=["1", "2"])


class TestLeaveOneOut:
    def test_identical(self):
        ann = annotations([(a, i, 3, 2, 4, 1, (i % 4) + 1) for a in "abcd" for i in range(5)])
        for field in ("expression", "overall", "pose"):
            assert loo_agreement(ann, field).mean == 0.0

    def test_fixture_114(self):
        ann = annotations([("a", 1, 1, 1, 1, 1, 1), ("b", 1, 1, 1, 1, 1, 1), ("c", 1, 1, 1, 1, 1, 4)])
        r = loo_agreement(ann, "overall")
        assert [r.per_annotator[k] for k in "abc"] == [0.0, 0.0, 3.0]
        assert r.mean == 1.0

    def test_missing_item(self):
        ann = annotations([("a", 1, 1, 1, 1, 1, 1), ("b", 1, 1, 1, 1, 1, 1), ("b", 2, 1, 1, 1, 1, 1)])
        with pytest.raises(CoverageError, match="a:2"):
            loo_agreement(ann, "overall")

    def test_single_annotator(self):
        with pytest.raises(CoverageError):
            loo_agreement(annotations([("a", 1, 1, 1, 1, 1, 1)]), "overall")

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 5).flatmap(lambda n: st.lists(
        st.lists(st.integers(1, 4), min_size=n, max_size=n), min_size=1, max_size=6)))
    def test_zero_iff_identical(self, grid):
        # grid[item][annotator]
        n = len(grid[0])
        ann = annotations([(f"a{a}", i, 1, 1, 1, 1, grid[i][a]) for i in range(len(grid)) for a in range(n)])
        r = loo_agreement(ann, "overall")
        identical = all(len(set(row)) == 1 for row in grid)
        assert (r.mean == 0.0) == identical


def perfect_case(items=10, annotators=3):
    # machine total 4 maps to Likert 3
    rows = [(f"a{a}", i, 4, 1, 4, 4, 3, 4) for a in range(annotators) for i in range(items)]
    frames = [FrameScore(i, i, ModalityScores(1, 0, 1, 1, 1)) for i in range(items)]
    return annotations(rows), frames


class TestComparison:
    def test_identical_groups(self):
        ann, frames = perfect_case()
        gt = build_ground_truth(ann)
        rows = compare_human_machine(machine_predictions(frames, ann), ann, gt)
        assert [r.modality for r in rows] == ["expression", "activity", "speech", "hand", "pose", "overall"]
        for r in rows:
            assert r.chi2_stat == 0.0 and r.p_raw == 1.0 and r.p_adjusted == 1.0
            assert not r.significant

    def test_adjusted_at_least_raw(self):
        text, frames = expressions_fixture()
        ann = parse_annotations(text)
        rows = compare_human_machine(machine_predictions(frames, ann), ann, build_ground_truth(ann))
        expr = rows[0]
        assert expr.human_mae_mean == 0.0 and expr.machine_mae_mean == pytest.approx(0.17)
        for r in rows:
            assert r.p_adjusted >= r.p_raw
            assert r.significant == (r.p_adjusted < 0.05)

    def test_contingency(self):
        assert error_contingency([0, 0, 1], [1, 1, 2]) == [[2, 1, 0], [0, 2, 1]]

    def test_missing_machine_output(self):
        ann, frames = perfect_case()
        gt = build_ground_truth(ann)
        preds = machine_predictions(frames, ann)
        del preds["hand"]["3"]
        with pytest.raises(CoverageError, match="3"):
            compare_human_machine(preds, ann, gt)


class TestEvaluate:
    def test_perfect_machine(self):
        ann, frames = perfect_case()
        res = evaluate(frames, ann)
        assert all(m["metrics"]["accuracy"] == 1.0 for m in res["machine"].values())

    def test_expressions_fixture(self):
        text, frames = expressions_fixture()
        res = evaluate(frames, parse_annotations(text))
        m = res["machine"]["expression"]
        assert m["confusion"] == {"labels": ["High", "Low"], "counts": [[64, 4], [13, 19]]}
        for key, want in [("accuracy", 0.830), ("precision_weighted", 0.829), ("f1_weighted", 0.821),
                          ("mcc", 0.593), ("kappa", 0.578), ("error", 0.170)]:
            assert m["metrics"][key] == pytest.approx(want, abs=1e-3)
        assert res["item_counts"]["expression"] == 100
        assert "expression" in render_evaluation_text(res)

    def test_frame_missing_from_report(self):
        ann, frames = perfect_case()
        with pytest.raises(CoverageError, match="9"):
            evaluate(frames[:9], ann)

    def test_alignment(self):
        ann, frames = perfect_case(items=2)
        shifted = [FrameScore(f.frame_idx + 100, f.t_ms, f.parts) for f in frames]
        res = evaluate(shifted, ann, {"0": 100, "1": 101})
        assert res["machine"]["expression"]["metrics"]["accuracy"] == 1.0
        with pytest.raises(CoverageError, match="7"):
            evaluate(shifted, ann, {"0": 100, "1": 101, "7": 102})
