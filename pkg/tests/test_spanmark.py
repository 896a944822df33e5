import random

from hypothesis import given, settings
from hypothesis import strategies as st

from semee.model import Mention
from semee.spanmark import MARKER_RE, mark_anchor, mark_spans, strip_markers

from conftest import VOCAB, random_instance


def test_single_gold_mention_marked():
    tokens = "in all its work to Biblical doctrine .".split()
    marked = mark_spans(tokens, [Mention("work", 3, 4, "T")], [])
    assert marked.text == "in all its [t.Gold.0] work [/t.Gold.0] to Biblical doctrine ."
    assert marked.legend[0][0] == "t.Gold.0"


def test_nested_overlap_matches_reference_layout():
    tokens = "that is owned or controlled by another company".split()
    gold = [Mention("owned or controlled by", 2, 6, "T")]
    pred = [Mention("controlled", 4, 5, "T")]
    marked = mark_spans(tokens, gold, pred)
    assert "[t.Gold.0] owned or [t.Pred.0] controlled [/t.Pred.0] by [/t.Gold.0]" in marked.text
    assert marked.warnings == ()


def test_identical_spans_nest_gold_outside_pred():
    tokens = "a professor of".split()
    marked = mark_spans(tokens, [Mention("professor", 1, 2, "T")], [Mention("professor", 1, 2, "U")])
    assert marked.text == "a [t.Gold.0] [t.Pred.0] professor [/t.Pred.0] [/t.Gold.0] of"


def test_identical_spans_same_family_higher_index_outside():
    tokens = "a professor of".split()
    preds = [Mention("professor", 1, 2, "Business"), Mention("professor", 1, 2, "Education")]
    marked = mark_spans(tokens, [], preds)
    assert marked.text == "a [t.Pred.1] [t.Pred.0] professor [/t.Pred.0] [/t.Pred.1] of"


def test_no_mentions_leaves_text_unchanged():
    tokens = "nothing to see here".split()
    marked = mark_spans(tokens, [], [])
    assert marked.text == "nothing to see here"
    assert marked.legend == ()


def test_partial_overlap_warns_but_emits():
    tokens = [f"w{i}" for i in range(8)]
    gold = [Mention("w2 w3 w4", 2, 5, "T")]
    pred = [Mention("w4 w5 w6", 4, 7, "T")]
    marked = mark_spans(tokens, gold, pred)
    assert any("partial overlap" in w for w in marked.warnings)
    # start-then-end order: gold opens, pred opens, gold closes, pred closes
    assert marked.text.index("[t.Gold.0]") < marked.text.index("[t.Pred.0]")
    assert marked.text.index("[/t.Gold.0]") < marked.text.index("[/t.Pred.0]")
    assert strip_markers(marked.text) == tokens


def test_unlocated_mentions_skipped_with_warning():
    tokens = "a b c".split()
    marked = mark_spans(tokens, [], [Mention("zzz", None, None, "T")])
    assert marked.text == "a b c"
    assert any("unlocated" in w for w in marked.warnings)


def test_mark_anchor_bare_tags():
    tokens = "She was not tried in the deaths .".split()
    anchor = Mention("tried", 3, 4, "Justice:Trial-Hearing")
    assert mark_anchor(tokens, anchor) == "She was not [t] tried [/t] in the deaths ."


def test_mark_anchor_at_start_and_single_token():
    assert mark_anchor(["go"], Mention("go", 0, 1, "T")) == "[t] go [/t]"
    tokens = "run fast".split()
    assert mark_anchor(tokens, Mention("run", 0, 1, "T")) == "[t] run [/t] fast"


def test_strip_inverse_on_random_instances():
    rng = random.Random(7)
    for k in range(300):
        inst = random_instance(rng, f"r{k}")
        marked = mark_spans(inst.tokens, inst.gold, inst.predicted)
        assert strip_markers(marked.text) == list(inst.tokens)


def test_marker_balance_without_partial_overlap():
    # nested-only instances produce a properly balanced tag sequence
    tokens = [f"w{i}" for i in range(10)]
    gold = [Mention("w1 w2 w3 w4", 1, 5, "T"), Mention("w6", 6, 7, "T")]
    pred = [Mention("w2 w3", 2, 4, "T")]
    marked = mark_spans(tokens, gold, pred)
    stack = []
    for tok in marked.text.split(" "):
        if MARKER_RE.fullmatch(tok):
            if tok.startswith("[/"):
                assert stack and stack[-1] == tok.replace("[/", "["), marked.text
                stack.pop()
            else:
                stack.append(tok)
    assert stack == []


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_strip_inverse_property(data):
    tokens = data.draw(st.lists(st.sampled_from(VOCAB), min_size=1, max_size=12))
    n = len(tokens)
    spans = data.draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(1, 3), st.sampled_from("AB")),
        max_size=5,
    ))
    gold, pred = [], []
    for start, width, fam in spans:
        end = min(start + width, n)
        m = Mention(" ".join(tokens[start:end]), start, end, "T")
        (gold if fam == "A" else pred).append(m)
    marked = mark_spans(tokens, gold, pred)
    assert strip_markers(marked.text) == tokens
