import math
from fractions import Fraction

import pytest
from scipy import stats as sps

from semee.errors import DegenerateVector, LengthMismatch, MissingJudgment
from semee.metrics import (
    cosine,
    default_head,
    em_match_flags,
    exact_match_scores,
    head_match_flags,
    head_noun_scores,
    majority_reference,
    percent_agreement,
    semantic_scores,
    similarity_match_flags,
    similarity_scores,
    spearman,
    trial_stats,
)
from semee.model import Direction, Instance, JudgmentRecord, Mention, Scores, Task

from conftest import brute_force_max_matching, random_instance


def _rec(inst, direction, verdicts, trial=0):
    return JudgmentRecord(inst.id, direction, tuple(verdicts), "", "agent:stub", trial)


def _ed(ident, tokens, gold, pred):
    return Instance(id=ident, task=Task.ED, tokens=tuple(tokens), gold=gold, predicted=pred,
                    ontology=[("T", ""), ("U", "")])


def test_semantic_scores_reference_case():
    tokens = "a b c d e".split()
    inst = _ed("i1", tokens,
               gold=[Mention("a", 0, 1, "T"), Mention("b", 1, 2, "T")],
               pred=[Mention("c", 2, 3, "T"), Mention("d", 3, 4, "T"), Mention("e", 4, 5, "T")])
    scores = semantic_scores(
        [_rec(inst, Direction.PRECISION, [1, 1, 0]), _rec(inst, Direction.RECALL, [1, 0])],
        [inst],
    )
    assert scores.precision == Fraction(2, 3)
    assert scores.recall == Fraction(1, 2)
    assert scores.f1 == Fraction(4, 7)


def test_semantic_scores_all_ones_and_all_zeros():
    tokens = "a b".split()
    inst = _ed("i1", tokens, gold=[Mention("a", 0, 1, "T")], pred=[Mention("b", 1, 2, "T")])
    ones = semantic_scores(
        [_rec(inst, Direction.PRECISION, [1]), _rec(inst, Direction.RECALL, [1])], [inst])
    assert ones == Scores(Fraction(1), Fraction(1), Fraction(1))
    zeros = semantic_scores(
        [_rec(inst, Direction.PRECISION, [0]), _rec(inst, Direction.RECALL, [0])], [inst])
    assert zeros == Scores(Fraction(0), Fraction(0), Fraction(0))


def test_semantic_scores_empty_families_contribute_nothing():
    tokens = "a b".split()
    no_pred = _ed("i1", tokens, gold=[Mention("a", 0, 1, "T")], pred=[])
    no_gold = _ed("i2", tokens, gold=[], pred=[Mention("b", 1, 2, "T")])
    scores = semantic_scores(
        [_rec(no_pred, Direction.RECALL, [1]), _rec(no_gold, Direction.PRECISION, [1])],
        [no_pred, no_gold],
    )
    assert scores == Scores(Fraction(1), Fraction(1), Fraction(1))


def test_semantic_scores_missing_judgment():
    inst = _ed("i1", ["a"], gold=[Mention("a", 0, 1, "T")], pred=[])
    with pytest.raises(MissingJudgment):
        semantic_scores([], [inst])


def test_semantic_scores_random_fixtures_vs_counter(rng):
    for k in range(20):
        instances = [random_instance(rng, f"i{k}-{j}") for j in range(rng.randint(1, 6))]
        records = []
        cp = tp = rg = tg = 0
        for inst in instances:
            if inst.predicted:
                v = [rng.randint(0, 1) for _ in inst.predicted]
                records.append(_rec(inst, Direction.PRECISION, v))
                cp += sum(v)
                tp += len(v)
            if inst.gold:
                v = [rng.randint(0, 1) for _ in inst.gold]
                records.append(_rec(inst, Direction.RECALL, v))
                rg += sum(v)
                tg += len(v)
        scores = semantic_scores(records, instances)
        p = Fraction(cp, tp) if tp else Fraction(0)
        r = Fraction(rg, tg) if tg else Fraction(0)
        f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
        assert scores == Scores(p, r, f1)


def test_exact_match_table5_shape():
    # prediction with the right type but the wrong span scores zero
    tokens = "its work to doctrine".split()
    inst = _ed("t5", tokens,
               gold=[Mention("work", 1, 2, "Business.Employment-Tenure")],
               pred=[Mention("doctrine", 3, 4, "Business.Employment-Tenure")])
    scores = exact_match_scores([inst])
    assert scores.precision == 0
    assert scores.recall == 0


def test_exact_match_perfect_prediction():
    tokens = "a b".split()
    gold = [Mention("a", 0, 1, "T"), Mention("b", 1, 2, "U")]
    inst = _ed("x", tokens, gold=gold, pred=list(gold))
    assert exact_match_scores([inst]).f1 == 1


def test_exact_match_duplicate_gold_consumed_once():
    tokens = "a b".split()
    dup = Mention("a", 0, 1, "T")
    inst = _ed("x", tokens, gold=[dup, dup], pred=[dup])
    pred_ok, gold_ok = em_match_flags(inst)
    assert sum(pred_ok) == 1
    assert sum(gold_ok) == 1
    scores = exact_match_scores([inst])
    assert scores.precision == 1
    assert scores.recall == Fraction(1, 2)


def test_default_head():
    assert default_head("the Star Ferry terminal concourse") == "concourse"
    assert default_head("Star Ferry concourse") == "concourse"
    assert default_head("owned or controlled by") == "controlled"
    assert default_head("of") == "of"
    assert default_head("") == ""


def test_head_noun_matches_on_head_and_label():
    tokens = "the Star Ferry terminal concourse area".split()
    inst = _ed("h", tokens,
               gold=[Mention("Star Ferry terminal concourse", 1, 5, "Place")],
               pred=[Mention("the Star Ferry terminal concourse", 0, 5, "Place")])
    assert head_noun_scores([inst]).f1 == 1
    # same heads, different labels: no match
    inst2 = _ed("h2", tokens,
                gold=[Mention("Star Ferry terminal concourse", 1, 5, "Place")],
                pred=[Mention("the Star Ferry terminal concourse", 0, 5, "Destination")])
    assert head_noun_scores([inst2]).f1 == 0


def test_head_noun_single_tokens_reduce_to_case_insensitive_em():
    tokens = "Attack attack".split()
    inst = _ed("h3", tokens,
               gold=[Mention("Attack", 0, 1, "T")],
               pred=[Mention("attack", 1, 2, "T")])
    assert head_noun_scores([inst]).f1 == 1


def test_em_implies_head_noun_baseline_ordering(rng):
    for k in range(100):
        inst = random_instance(rng, f"ord{k}")
        em_pred, em_gold = em_match_flags(inst)
        hn_scores = head_noun_scores([inst])
        em_scores = exact_match_scores([inst])
        assert hn_scores.precision >= em_scores.precision
        assert hn_scores.recall >= em_scores.recall


def test_similarity_identical_and_orthogonal():
    tokens = "a b".split()
    inst = _ed("s", tokens, gold=[Mention("a", 0, 1, "T")], pred=[Mention("a", 0, 1, "T")])
    same = similarity_scores([inst], lambda texts: [[1.0, 0.0] for _ in texts], 0.5)
    assert same.f1 == 1
    inst2 = _ed("s2", tokens, gold=[Mention("a", 0, 1, "T")], pred=[Mention("b", 1, 2, "T")])
    vecs = {"a": [1.0, 0.0], "b": [0.0, 1.0]}
    ortho = similarity_scores([inst2], lambda texts: [vecs[t] for t in texts], 0.5)
    assert ortho.f1 == 0


def test_similarity_uses_maximum_matching_not_greedy():
    # greedy by descending similarity would pair pred0-gold0 and strand pred1
    tokens = "p0 p1 g0 g1".split()
    inst = _ed("s3", tokens,
               gold=[Mention("g0", 2, 3, "T"), Mention("g1", 3, 4, "T")],
               pred=[Mention("p0", 0, 1, "T"), Mention("p1", 1, 2, "T")])
    sims = {
        ("p0", "g0"): 0.9, ("p0", "g1"): 0.6,
        ("p1", "g0"): 0.55, ("p1", "g1"): 0.1,
    }

    def eligible(pi, gi):
        return sims[(inst.predicted[pi].text, inst.gold[gi].text)] >= 0.5

    from semee.metrics import _max_bipartite
    pred_ok, gold_ok = _max_bipartite(2, 2, eligible)
    assert sum(pred_ok) == 2
    assert sum(gold_ok) == 2


def _stub_vectors(rng, texts):
    angles = {t: rng.uniform(0, 2 * math.pi) for t in texts}
    return {t: [math.cos(a), math.sin(a)] for t, a in angles.items()}


def test_similarity_matches_brute_force(rng):
    for k in range(150):
        inst = random_instance(rng, f"sim{k}")
        texts = sorted({m.text for m in (*inst.gold, *inst.predicted)})
        vectors = _stub_vectors(rng, texts)
        t = 0.5
        pred_ok, gold_ok = similarity_match_flags(inst, vectors, t)

        def eligible(pi, gi):
            p, g = inst.predicted[pi], inst.gold[gi]
            return p.label == g.label and cosine(vectors[p.text], vectors[g.text]) >= t

        best = brute_force_max_matching(len(inst.predicted), len(inst.gold), eligible)
        assert sum(pred_ok) == best
        assert sum(gold_ok) == best


def test_em_and_head_noun_match_brute_force(rng):
    for k in range(150):
        inst = random_instance(rng, f"bf{k}")
        em_pred, em_gold = em_match_flags(inst)
        best_em = brute_force_max_matching(
            len(inst.predicted), len(inst.gold),
            lambda pi, gi: inst.predicted[pi].located and inst.gold[gi].located
            and inst.predicted[pi].span_key() == inst.gold[gi].span_key())
        assert sum(em_pred) == best_em
        assert sum(em_gold) == best_em

        hn_pred, hn_gold = head_match_flags(inst)
        best_hn = brute_force_max_matching(
            len(inst.predicted), len(inst.gold),
            lambda pi, gi: inst.predicted[pi].label == inst.gold[gi].label
            and default_head(inst.predicted[pi].text) == default_head(inst.gold[gi].text))
        assert sum(hn_pred) == best_hn
        assert sum(hn_gold) == best_hn


def test_percent_agreement():
    assert percent_agreement([1, 0, 1], [1, 1, 1]) == Fraction(2, 3)
    assert percent_agreement([1, 0], [1, 0]) == 1
    assert percent_agreement([1, 0], [0, 1]) == 0
    with pytest.raises(LengthMismatch):
        percent_agreement([1], [1, 0])
    with pytest.raises(LengthMismatch):
        percent_agreement([], [])


def test_percent_agreement_symmetric(rng):
    for _ in range(50):
        n = rng.randint(1, 40)
        a = [rng.randint(0, 1) for _ in range(n)]
        b = [rng.randint(0, 1) for _ in range(n)]
        assert percent_agreement(a, b) == percent_agreement(b, a)
        assert percent_agreement(a, a) == 1


def _oracle_spearman(a, b):
    """Independent route: midranks by sorting, then textbook Pearson."""
    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        out = [0.0] * len(v)
        i = 0
        while i < len(v):
            j = i
            while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
                j += 1
            for k in range(i, j + 1):
                out[order[k]] = (i + j) / 2 + 1
            i = j + 1
        return out

    ra, rb = ranks(a), ranks(b)
    n = len(a)
    ma = sum(ra) / n
    mb = sum(rb) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    va = sum((x - ma) ** 2 for x in ra)
    vb = sum((y - mb) ** 2 for y in rb)
    return cov / math.sqrt(va * vb)


def test_spearman_identity_and_reversal():
    rho, p = spearman([1, 2, 3, 4], [10, 20, 30, 40])
    assert rho == pytest.approx(1.0)
    assert p == pytest.approx(0.0, abs=1e-12)
    rho, _ = spearman([1, 2, 3, 4], [4, 3, 2, 1])
    assert rho == pytest.approx(-1.0)


def test_spearman_binary_hand_case():
    a = [1, 1, 0, 0, 1]
    b = [1, 0, 0, 1, 1]
    rho, p = spearman(a, b)
    assert rho == pytest.approx(_oracle_spearman(a, b), abs=1e-12)
    ref_rho, ref_p = sps.spearmanr(a, b)
    assert rho == pytest.approx(float(ref_rho), abs=1e-9)
    assert p == pytest.approx(float(ref_p), abs=1e-9)


def test_spearman_random_vectors_match_oracles(rng):
    for k in range(100):
        n = rng.randint(3, 50)
        if k % 2 == 0:
            a = [rng.randint(0, 1) for _ in range(n)]
            b = [rng.randint(0, 1) for _ in range(n)]
        else:
            a = [rng.uniform(-5, 5) for _ in range(n)]
            b = [rng.uniform(-5, 5) for _ in range(n)]
        if len(set(a)) < 2 or len(set(b)) < 2:
            continue
        rho, p = spearman(a, b)
        assert rho == pytest.approx(_oracle_spearman(a, b), abs=1e-9)
        ref_rho, ref_p = sps.spearmanr(a, b)
        assert rho == pytest.approx(float(ref_rho), abs=1e-9)
        assert p == pytest.approx(float(ref_p), abs=1e-9)


def test_spearman_degenerate_inputs():
    with pytest.raises(DegenerateVector):
        spearman([1, 1, 1], [0, 1, 0])
    with pytest.raises(DegenerateVector):
        spearman([0, 1], [1, 0])


def test_spearman_monotone_invariance(rng):
    for _ in range(20):
        n = rng.randint(5, 30)
        a = [rng.uniform(0, 1) for _ in range(n)]
        b = [rng.uniform(0, 1) for _ in range(n)]
        rho1, _ = spearman(a, b)
        rho2, _ = spearman([math.exp(3 * x) for x in a], [2 * y + 7 for y in b])
        assert rho1 == pytest.approx(rho2, abs=1e-12)


def test_trial_stats():
    s = trial_stats([5, 5, 5])
    assert (s.mean, s.std, s.n) == (5.0, 0.0, 3)
    s = trial_stats([0, 10])
    assert (s.mean, s.std) == (5.0, 5.0)
    s = trial_stats([7.5])
    assert (s.mean, s.std, s.n) == (7.5, 0.0, 1)


def test_trial_stats_matches_welford(rng):
    for _ in range(30):
        values = [rng.uniform(-10, 10) for _ in range(rng.randint(1, 12))]
        mean = 0.0
        m2 = 0.0
        for i, x in enumerate(values, start=1):
            delta = x - mean
            mean += delta / i
            m2 += delta * (x - mean)
        s = trial_stats(values)
        assert s.mean == pytest.approx(mean, abs=1e-9)
        assert s.std == pytest.approx(math.sqrt(m2 / len(values)), abs=1e-9)


def test_majority_reference_tie_breaks_to_zero():
    vectors = [[1, 0, 1], [0, 0, 1], [1, 1, 0]]
    assert majority_reference(vectors, exclude=0) == [0, 0, 0]
    assert majority_reference(vectors, exclude=2) == [0, 0, 1]


def test_dominance_with_truthful_stub_judge(rng):
    """A judge that accepts at least every token-level match can only raise
    precision and recall."""
    for k in range(60):
        instances = [random_instance(rng, f"dom{k}-{j}") for j in range(rng.randint(1, 5))]
        records = []
        for inst in instances:
            pred_ok, gold_ok = em_match_flags(inst)
            if inst.predicted:
                v = [1 if ok else rng.randint(0, 1) for ok in pred_ok]
                records.append(_rec(inst, Direction.PRECISION, v))
            if inst.gold:
                v = [1 if ok else rng.randint(0, 1) for ok in gold_ok]
                records.append(_rec(inst, Direction.RECALL, v))
        sem = semantic_scores(records, instances)
        em = exact_match_scores(instances)
        assert sem.precision >= em.precision
        assert sem.recall >= em.recall
