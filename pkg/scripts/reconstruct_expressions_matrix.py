"""Recover the facial-expression confusion matrix from published summary figures.

The published off-diagonal counts (4 High rated Low, 13 Low rated High, out
of 100 items) leave one free parameter: how the 83 correct items split
between the two classes. Scanning that split against the published kappa
leaves two candidates; the remaining published metrics pick one.

Usage: python scripts/reconstruct_expressions_matrix.py
"""

from lectometer.metrics import ConfusionMatrix, metric_suite

PUBLISHED = {
    "accuracy": 0.830, "precision_weighted": 0.829, "recall_weighted": 0.830,
    "f1_weighted": 0.821, "mcc": 0.593, "kappa": 0.578, "error": 0.170,
}
HIGH_AS_LOW, LOW_AS_HIGH, CORRECT = 4, 13, 83
TOL = 1e-3


def candidate(a: int):
    rows = ((a, HIGH_AS_LOW), (LOW_AS_HIGH, CORRECT - a))
    return rows, metric_suite(ConfusionMatrix(("High", "Low"), rows))


def main() -> None:
    print(f"{'a':>3} {'matrix':<22}" + "".join(f"{k[:9]:>10}" for k in PUBLISHED) + "  fits")
    for a in range(CORRECT + 1):
        rows, s = candidate(a)
        if abs(s.kappa - PUBLISHED["kappa"]) > TOL:
            continue
        fits = all(abs(getattr(s, k) - v) <= TOL for k, v in PUBLISHED.items())
        print(f"{a:>3} {str([list(r) for r in rows]):<22}"
              + "".join(f"{getattr(s, k):>10.4f}" for k in PUBLISHED)
              + ("  all" if fits else "  kappa only"))
    print("\npublished" + " " * 17 + "".join(f"{v:>10.3f}" for v in PUBLISHED.values()))


if __name__ == "__main__":
    main()
