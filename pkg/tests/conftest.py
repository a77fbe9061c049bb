import math
from pathlib import Path

import numpy as np
import pytest

from minkpp.types import Label, PositionStats, SequenceRecord

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def make_position(logp_target=-1.0, mu=-2.0, sigma=0.5, logp_vector=None):
    return PositionStats(logp_target=logp_target, mu=mu, sigma=sigma, logp_vector=logp_vector)


def make_record(record_id="rec-0", label=Label.MEMBER, logps=(-1.0, -2.0, -0.5),
                mus=None, sigmas=None, text=None):
    mus = mus if mus is not None else tuple(lp - 0.5 for lp in logps)
    sigmas = sigmas if sigmas is not None else (0.7,) * len(logps)
    return SequenceRecord(
        id=record_id,
        label=label,
        positions=tuple(
            PositionStats(logp_target=lp, mu=m, sigma=s)
            for lp, m, s in zip(logps, mus, sigmas)
        ),
        text_bytes=text.encode("utf-8") if text is not None else None,
    )


def random_record(rng: np.random.Generator, record_id: str, label=None, n_positions=None):
    """A structurally valid record with random but invariant-respecting stats."""
    n = n_positions or int(rng.integers(1, 40))
    logps = -rng.exponential(2.0, size=n)
    mus = logps - rng.exponential(1.0, size=n)  # mu below logp, both <= 0
    sigmas = rng.exponential(1.0, size=n)
    label = label or Label(["member", "nonmember", "unknown"][int(rng.integers(0, 3))])
    return SequenceRecord(
        id=record_id,
        label=label,
        positions=tuple(
            PositionStats(logp_target=float(lp), mu=float(m), sigma=float(s))
            for lp, m, s in zip(logps, mus, sigmas)
        ),
    )


@pytest.fixture(scope="session")
def corpus_text() -> str:
    path = DATA_DIR / "corpus.txt"
    return path.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus_split(corpus_text):
    cut = int(len(corpus_text) * 0.8)
    return corpus_text[:cut], corpus_text[cut:]


LN2 = math.log(2.0)
