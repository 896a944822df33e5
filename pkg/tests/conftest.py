import random

import pytest

from semee.model import Instance, Mention, Task

VOCAB = ("alpha bravo charlie delta echo foxtrot golf hotel india juliett kilo lima "
         "mike november oscar papa quebec romeo sierra tango").split()
ED_LABELS = ("Conflict.Attack", "Movement.Transport", "Life.Injure")
ROLE_LABELS = ("Agent", "Victim", "Place", "Instrument")


def random_mention(rng: random.Random, tokens, labels) -> Mention:
    start = rng.randrange(len(tokens))
    end = start + rng.randint(1, min(3, len(tokens) - start))
    return Mention(" ".join(tokens[start:end]), start, end, rng.choice(labels))


def random_instance(rng: random.Random, ident: str, task: Task = Task.ED,
                    max_gold: int = 3, max_pred: int = 3, min_tokens: int = 4) -> Instance:
    n = rng.randint(min_tokens, 16)
    tokens = tuple(rng.choice(VOCAB) for _ in range(n))
    labels = ED_LABELS if task == Task.ED else ROLE_LABELS
    gold = [random_mention(rng, tokens, labels) for _ in range(rng.randint(0, max_gold))]
    pred = [random_mention(rng, tokens, labels) for _ in range(rng.randint(0, max_pred))]
    anchor = None
    ontology = [(label, "") for label in labels]
    if task == Task.EAE:
        anchor = random_mention(rng, tokens, ("Conflict.Attack",))
        ontology = [("Conflict.Attack", "")] + ontology
    return Instance(
        id=ident,
        task=task,
        tokens=tokens,
        gold=gold,
        predicted=pred,
        anchor=anchor,
        ontology=ontology,
    )


def random_dataset(rng: random.Random, count: int, eae_share: float = 0.4) -> list[Instance]:
    out = []
    for k in range(count):
        task = Task.EAE if rng.random() < eae_share else Task.ED
        out.append(random_instance(rng, f"inst-{k:04d}", task))
    return out


def brute_force_max_matching(n_pred: int, n_gold: int, eligible) -> int:
    """Exhaustive maximum one-to-one matching size; oracle for the scorers."""
    best = 0

    def rec(pi: int, used: frozenset, count: int):
        nonlocal best
        if count + (n_pred - pi) <= best:
            return
        if pi == n_pred:
            best = max(best, count)
            return
        rec(pi + 1, used, count)
        for gi in range(n_gold):
            if gi not in used and eligible(pi, gi):
                rec(pi + 1, used | {gi}, count + 1)

    rec(0, frozenset(), 0)
    return best


@pytest.fixture
def rng():
    return random.Random(20240817)
