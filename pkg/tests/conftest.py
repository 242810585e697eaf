import numpy as np
import pytest

from bayesaudit.election import BallotManifest, Choice, Contest


def make_contest(
    n=254,
    reported="B",
    tie=("A", "B"),
    collection="col",
    rule="plurality",
    choices=None,
    contest_id="race",
):
    if choices is None:
        choices = (Choice("A"), Choice("B"))
    return Contest(contest_id, tuple(choices), rule, tuple(tie), reported, ((collection, n),))


def make_manifest(collection="col", n=254, box_size=50):
    containers = []
    box = 1
    left = n
    while left > 0:
        take = min(box_size, left)
        containers.append((f"B{box}", take))
        left -= take
        box += 1
    return BallotManifest(collection, tuple(containers))


@pytest.fixture
def contest():
    return make_contest()


@pytest.fixture
def manifest():
    return make_manifest()


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
