import numpy as np
import pytest

from broadgen.tokenizer import tokenize

REEBOK_ITEM = {
    "item_id": "reebok-1",
    "title": "Reebok Men's Shoes size 9",
    "pre_queries": [
        {"text": "reebok men shoes size 9", "impressions": 40},
        {"text": "reebok men shoes size 10", "impressions": 25},
        {"text": "reebok men shoes", "impressions": 90},
    ],
    "augmentation_keyphrases": [],
}


@pytest.fixture
def reebok_item():
    return dict(REEBOK_ITEM, pre_queries=list(REEBOK_ITEM["pre_queries"]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def toks(*texts):
    return [tokenize(t) for t in texts]


def random_distance(rng, n, integer=False):
    x = rng.integers(1, 4, (n, n)).astype(float) if integer else rng.random((n, n))
    d = np.triu(x, 1)
    return d + d.T
