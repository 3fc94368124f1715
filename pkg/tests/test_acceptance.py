"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one ``[acceptance] criterion N: PASS`` line on success;
a pytest failure marks the criterion red.  Criterion 10 (full-scale corpus
reproduction) is a documented runbook, not CI: see README, "Full-scale
runbook".
"""

import csv
import math
import time

import numpy as np
import pytest

from portrayal.cli import main
from portrayal.diachronic import (
    CorrelationMatrix,
    correlation_matrix,
    ks_two_sample,
    pearson,
    pooled_samples,
    transition_samples,
)
from portrayal.errors import AxisExcluded
from portrayal.semaxes import SemanticAxis, axis_vector
from portrayal.spaces import cosine
from portrayal.synth import PlantSpec, generate_bundle, oracle_distribution
from portrayal.toxicity import ToxicLexicon, adjust_lexicon, build_adjustment
from portrayal.training import (
    SampleSet,
    TrainerConfig,
    build_distribution,
    draw_samples,
    loss_gradient,
    ranking_loss,
    train_group_vector,
)
from util import make_space, make_table, random_unit


def passed(number: int, detail: str) -> None:
    print(f"[acceptance] criterion {number}: PASS ({detail})")


# --- criterion 1: sampler vs enumeration oracle --------------------------------

def random_table_pair(rng, pool):
    size_self = int(rng.integers(3, 7))
    size_other = int(rng.integers(3, 7))
    self_words = list(rng.choice(pool, size=size_self, replace=False))
    other_words = list(rng.choice(pool, size=size_other, replace=False))
    if rng.random() < 0.5:
        self_words.append("ghost")  # in the table but not in the space
    self_table = make_table({w: int(rng.integers(1, 50)) for w in self_words})
    other_table = make_table({w: int(rng.integers(1, 50)) for w in other_words})
    return self_table, other_table


def test_criterion_1_sampler_oracle():
    start = time.perf_counter()
    pool = [f"w{i}" for i in range(10)]
    rng_space = np.random.default_rng(100)
    space = make_space({w: list(rng_space.standard_normal(6)) for w in pool})
    rng = np.random.default_rng(7)
    worst_gap = 0.0
    worst_l1 = 0.0
    for fixture in range(20):
        self_table, other_table = random_table_pair(rng, pool)
        for kind in ("positive", "negative"):
            dist = build_distribution(self_table, other_table, space, kind)
            words, probs = oracle_distribution(self_table, other_table, space, kind)
            assert words == dist.words
            gap = max(abs(p - q) for p, q in zip(probs, dist.probabilities))
            worst_gap = max(worst_gap, gap)
            assert gap <= 1e-12
        dist = build_distribution(self_table, other_table, space, "positive")
        draws = draw_samples(dist, 100_000, seed=fixture)
        frequencies = {w: 0 for w in dist.words}
        for word in draws:
            frequencies[word] += 1
        l1 = sum(
            abs(frequencies[w] / 100_000 - p)
            for w, p in zip(dist.words, dist.probabilities)
        )
        worst_l1 = max(worst_l1, l1)
        assert l1 <= 0.01, (fixture, l1)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    passed(1, f"20 fixtures, max prob gap {worst_gap:.2e}, max draw L1 {worst_l1:.4f}, {elapsed:.1f}s")


# --- criterion 2: analytic gradient vs central finite differences ---------------

def finite_difference(x, w, y, margin, h=1e-6):
    grad = np.zeros_like(x)
    for i in range(len(x)):
        bump = np.zeros_like(x)
        bump[i] = h
        grad[i] = (
            ranking_loss(x + bump, w, y, margin) - ranking_loss(x - bump, w, y, margin)
        ) / (2 * h)
    return grad


def gradient_points(rng, count, dim=10, margin=0.5):
    """Half fully random, half with cosine planted above the margin so the
    active negative branch is exercised."""
    points = []
    while len(points) < count:
        x = rng.standard_normal(dim)
        if len(points) % 2 == 0:
            w = rng.standard_normal(dim)
        else:
            target = rng.uniform(0.6, 0.95)
            u = rng.standard_normal(dim)
            u -= (u @ x) / (x @ x) * x
            u /= np.linalg.norm(u)
            w = target * x / np.linalg.norm(x) + math.sqrt(1 - target**2) * u
        if abs(cosine(x, w) - margin) < 1e-3:
            continue
        points.append((x, w))
    return points


def test_criterion_2_gradient_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(21)
    worst = 0.0
    for x, w in gradient_points(rng, 100):
        for y in (1, -1):
            analytic = loss_gradient(x, w, y)
            numeric = finite_difference(x, w, y, 0.5)
            if np.linalg.norm(analytic) < 1e-9 and np.linalg.norm(numeric) < 1e-9:
                continue
            rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
            worst = max(worst, rel)
            assert rel < 1e-4
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    passed(2, f"100 points, both branches, worst rel err {worst:.2e}, {elapsed:.1f}s")


# --- criterion 3: training fixed points ------------------------------------------

def test_criterion_3_training_fixed_points():
    start = time.perf_counter()
    rng = np.random.default_rng(31)
    w = random_unit(rng, 24)
    space = make_space({"w": list(w)})

    positives = SampleSet(1850, "G", positives=["w"] * 500, negatives=[])
    gv = train_group_vector(positives, space, TrainerConfig(k=500, n=0, epochs=1, seed=5))
    cos_pos = cosine(gv.vector, w)
    assert cos_pos > 0.99  # reached within 500 steps

    negatives = SampleSet(1850, "G", positives=[], negatives=["w"] * 500)
    gv_neg = train_group_vector(negatives, space, TrainerConfig(k=500, n=1, epochs=1, seed=5))
    cos_neg = cosine(gv_neg.vector, w)
    assert cos_neg <= 0.51

    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    passed(3, f"positive cos {cos_pos:.4f} > 0.99, negative cos {cos_neg:.4f} <= 0.51, {elapsed:.1f}s")


# --- criterion 4: planted-bias end-to-end -----------------------------------------

def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_criterion_4_planted_bias_end_to_end(tmp_path):
    start = time.perf_counter()

    # (a) + (b): the stated spec: dim 50, mirrored 0.8/0.2 mix, 10k 5-grams
    # per group per decade, 3 decades
    spec = PlantSpec(
        dim=50,
        bias_a_right=0.8,
        bias_b_right=0.2,
        ngrams_per_group=10_000,
        decades=(1850, 1860, 1870),
        seed=7,
    )
    bundle = tmp_path / "bundle"
    generate_bundle(spec, bundle)
    assert main(["report", "--config", str(bundle / "config.json")]) == 0

    top_rows = [r for r in read_csv(bundle / "out" / "axes_report.csv") if r["rank"] == "1"]
    assert len(top_rows) == 3  # every decade
    for row in top_rows:
        assert row["axis_id"] == "planted.a.01"
        assert row["GRP_A_pole"] == "right" and row["GRP_B_pole"] == "left"
        assert float(row["abs_diff"]) >= 0.2

    tox = {}
    for row in read_csv(bundle / "out" / "toxicity.csv"):
        tox.setdefault(row["decade"], {})[row["group"]] = float(row["toxicity_percent"])
    for decade, groups in tox.items():
        assert groups["GRP_A"] >= 2.0 * groups["GRP_B"], decade

    # (c): same planted parameters extended to six decades with a
    # representation break planted between the 2nd and 3rd decades.  the
    # 3-decade spec has only 2 transitions, below the pooled-KS minimum of
    # 3, so the break check runs on this extended variant.
    break_spec = PlantSpec(
        dim=50,
        bias_a_right=0.8,
        bias_b_right=0.2,
        ngrams_per_group=10_000,
        decades=(1850, 1860, 1870, 1880, 1890, 1900),
        break_decade=1870,
        seed=7,
    )
    break_bundle = tmp_path / "break"
    generate_bundle(break_spec, break_bundle)
    assert main(["scan", "--config", str(break_bundle / "config.json")]) == 0
    assert main(["train", "--config", str(break_bundle / "config.json")]) == 0
    assert main(["analyze", "corr", "--config", str(break_bundle / "config.json")]) == 0
    for group in ("GRP_A", "GRP_B"):
        rows = read_csv(break_bundle / "out" / f"transitions_{group}.csv")
        best = max(rows, key=lambda r: float(r["statistic"]))
        assert (best["interval_start"], best["interval_end"]) == ("1860", "1870"), group

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    passed(4, f"axis top-1 with correct poles, toxicity ratio >= 2, break at 1860-1870, {elapsed:.1f}s")


# --- criterion 5: KS statistic and p-value ---------------------------------------

def brute_force_d(a, b):
    points = sorted(set(a) | set(b))
    best = 0.0
    for x in points:
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best


def direct_series(lam):
    if lam <= 0:
        return 1.0
    total = 0.0
    for j in range(1, 500):
        total += 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
    return min(1.0, max(0.0, total))


def test_criterion_5_ks_correctness():
    rng = np.random.default_rng(55)
    for _ in range(50):
        a = rng.normal(loc=rng.uniform(-1, 1), size=int(rng.integers(2, 40))).tolist()
        b = rng.normal(loc=rng.uniform(-1, 1), size=int(rng.integers(2, 40))).tolist()
        d, p = ks_two_sample(a, b)
        assert d == brute_force_d(a, b)
        lam = math.sqrt(len(a) * len(b) / (len(a) + len(b))) * d
        assert abs(p - direct_series(lam)) <= 1e-9

    assert ks_two_sample([0, 0, 0], [1, 1, 1])[0] == 1.0
    assert ks_two_sample([1, 2, 3], [1, 2, 3]) == (0.0, 1.0)
    assert ks_two_sample([1, 2, 3, 4], [1.5, 2.5, 3.5, 4.5])[0] == 0.25
    passed(5, "50 random pairs exact, p within 1e-9 of the series, hand cases exact")


# --- criterion 6: pearson and the correlation matrix ------------------------------

def test_criterion_6_pearson_and_matrix():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-12)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    rng = np.random.default_rng(66)
    vectors = {d: rng.standard_normal(40) for d in range(1850, 1950, 10)}
    matrix = correlation_matrix(vectors, "g")
    assert np.array_equal(matrix.values, matrix.values.T)
    assert np.all(np.diag(matrix.values) == 1.0)
    assert matrix.values.min() >= -1.0 and matrix.values.max() <= 1.0
    passed(6, "hand cases at 1e-12, random matrix symmetric with unit diagonal")


# --- criterion 7: transition construction -----------------------------------------

def test_criterion_7_transition_construction():
    matrix = CorrelationMatrix(
        group="g",
        decades=[1850, 1860, 1870, 1880],
        values=np.array(
            [
                [1.0, 0.5, 0.4, 0.2],
                [0.5, 1.0, 0.7, 0.6],
                [0.4, 0.7, 1.0, 0.9],
                [0.2, 0.6, 0.9, 1.0],
            ]
        ),
    )
    samples = transition_samples(matrix, 1860)
    assert np.array_equal(samples, np.abs(np.array([0.5 - 0.4, 0.6 - 0.9])))
    assert samples == pytest.approx([0.1, 0.3], abs=1e-12)

    total = sum(len(transition_samples(matrix, t)) for t in matrix.transitions())
    for t in matrix.transitions():
        pooled = pooled_samples(matrix, t)
        assert len(pooled) == total - len(transition_samples(matrix, t))
    passed(7, "worked example gives [0.1, 0.3], pooled sizes reconcile")


# --- criterion 8: rule boundaries ---------------------------------------------------

def basis_axes(dim, count, pole_words=3):
    axes, vectors = [], {}
    for i in range(count):
        e = [0.0] * dim
        e[i] = 1.0
        left = tuple(f"l{i}_{j}" for j in range(pole_words))
        right = tuple(f"r{i}_{j}" for j in range(pole_words))
        for word in left:
            vectors[word] = [-v for v in e]
        for word in right:
            vectors[word] = list(e)
        axes.append(SemanticAxis(f"axis.{i:02d}", left, right))
    return axes, vectors


def test_criterion_8_rule_fidelity():
    # axis exclusion triggers at exactly < 3 present pole words
    axis = SemanticAxis("a.x", ("l0", "l1", "l2"), ("r0", "r1", "r2"))
    full = make_space(
        {"l0": [1, 0], "l1": [1, 0], "l2": [1, 0], "r0": [0, 1], "r1": [0, 1], "r2": [0, 1]}
    )
    axis_vector(axis, full)  # 3 present on both poles: included
    reduced = make_space(
        {"l0": [1, 0], "l1": [1, 0], "l2": [1, 0], "r0": [0, 1], "r1": [0, 1]}
    )
    with pytest.raises(AxisExcluded):
        axis_vector(axis, reduced)  # 2 present: excluded

    # lexicon adjustment removes at 6/10 flips, retains at 5/10, and the
    # anchor decade removes nothing
    dim = 10
    axes, vectors = basis_axes(dim, 10)
    lexicon = ToxicLexicon(
        words=frozenset({"tox"}), categories={"tox": "c"}, levels={"tox": "conservative"}
    )
    anchor_vectors = dict(vectors)
    anchor_vectors["tox"] = [1.0 / math.sqrt(dim)] * dim
    anchor = make_space(anchor_vectors, decade=1990)
    adjustment = build_adjustment(anchor, lexicon, axes, top_n=10)
    assert len(adjustment.top_axes) == 10

    def decade_space(flips, decade):
        pattern = np.ones(dim) / math.sqrt(dim)
        pattern[:flips] *= -1.0
        decade_vectors = dict(vectors)
        decade_vectors["tox"] = list(pattern)
        return make_space(decade_vectors, decade=decade)

    _, removed6 = adjust_lexicon(decade_space(6, 1950), adjustment, lexicon, axes)
    assert removed6 == {"tox"}
    _, removed5 = adjust_lexicon(decade_space(5, 1940), adjustment, lexicon, axes)
    assert removed5 == set()
    _, removed_anchor = adjust_lexicon(anchor, adjustment, lexicon, axes)
    assert removed_anchor == set()
    passed(8, "exclusion at <3 pole words, removal at 6/10 and not 5/10, anchor clean")


# --- criterion 9: pipeline determinism ----------------------------------------------

def test_criterion_9_pipeline_determinism(tmp_path):
    spec = PlantSpec(ngrams_per_group=1500, persons_per_group=10, seed=13)
    bundle = tmp_path / "bundle"
    generate_bundle(spec, bundle)
    for tag in ("one", "two"):
        code = main(
            ["report", "--config", str(bundle / "config.json"),
             "--output", str(tmp_path / tag)]
        )
        assert code == 0
    def artifacts(root):
        # the criterion names CSVs; the trained-vector file is held to the
        # same standard
        return sorted(list(root.rglob("*.csv")) + list(root.rglob("group_vectors.txt")))

    one = artifacts(tmp_path / "one")
    two = artifacts(tmp_path / "two")
    assert one and [p.name for p in one] == [p.name for p in two]
    for p1, p2 in zip(one, two):
        assert p1.read_bytes() == p2.read_bytes(), p1.name
    passed(9, f"{len(one)} outputs byte-identical across two runs")


# --- criterion 10: full-scale reproduction (runbook, not CI) -------------------------

def test_criterion_10_full_scale_runbook():
    pytest.skip(
        "criterion 10 is the optional full-scale reproduction; it needs the "
        "full 5-gram corpus, released decade embeddings, and the toxic-word "
        "lexicon. See README 'Full-scale runbook' for the procedure and the "
        "expected outcomes."
    )
