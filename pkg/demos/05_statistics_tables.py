"""
Violation counts to significance tables
=======================================

The evaluation protocol reduces each method to violation counts per
100 episodes, then asks whether the differences are real: Fisher's
exact test for the p-value, an odds ratio for the effect size. This
script renders both comparison tables from a set of counts.
"""

from drivestress.stats import contingency_from_counts, fisher_exact_two_sided, \
    odds_ratio, significance_bucket

# violation counts per 100 evaluation episodes: (v_r1, v_r2, v_r1_r2)
COUNTS = {
    1: {"rs": (3, 33, 1), "sorlw": (0, 24, 0), "eql": (25, 66, 17)},
    2: {"rs": (4, 20, 4), "sorlw": (0, 2, 0), "eql": (15, 18, 15)},
    3: {"rs": (6, 24, 6), "sorlw": (0, 54, 0), "eql": (2, 75, 2)},
    4: {"rs": (5, 30, 5), "sorlw": (0, 99, 0), "eql": (34, 82, 33)},
    5: {"rs": (0, 4, 0), "sorlw": (0, 0, 0), "eql": (0, 0, 0)},
    6: {"rs": (1, 30, 1), "sorlw": (0, 22, 0), "eql": (1, 55, 1)},
}
METRICS = ("v_r1", "v_r2", "v_r1_r2")


def row(count_a, count_b, n=100):
    table = contingency_from_counts(count_a, n, count_b, n)
    p = fisher_exact_two_sided(table)
    ratio = odds_ratio(table)
    shown = "/" if ratio is None else f"{ratio:.3f}"
    return f"{shown:>8}  {significance_bucket(p):>7}"


# %%
# Vector learner vs random search, all three violation metrics.

print("vector learner vs random search")
print("road   " + "   ".join(f"{m:>17}" for m in METRICS))
for road in range(1, 7):
    cells = []
    for i, metric in enumerate(METRICS):
        cells.append(row(COUNTS[road]["eql"][i], COUNTS[road]["rs"][i]))
    print(f"{road:>4}   " + "   ".join(cells))

# %%
# Vector learner vs the scalarized single-objective learner. The
# interesting metric is the completion requirement: the scalarized
# baseline tends to collapse onto one objective.

print("\nvector learner vs scalarized baseline (completion metric)")
for road in range(1, 7):
    print(f"{road:>4}   {row(COUNTS[road]['eql'][1], COUNTS[road]['sorlw'][1])}")
