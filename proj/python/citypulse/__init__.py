"""Python access to the CityPulse core: text preprocessing, geo filtering,
vocabularies, skip-gram embeddings, LDA, evaluation metrics and the
command line."""

import json

from ._core import (
    EmbeddingModel,
    Error,
    LdaModel,
    Vocabulary,
    build_vocabulary,
    city_filter,
    five_number_summary,
    metrics,
    preprocess,
    roc_auc,
    run_cli,
    tokenize,
    train_lda,
    train_skipgram,
)
from ._core import generate_fixture as _generate_fixture
from ._core import normalize_record as _normalize_record

__all__ = [
    "EmbeddingModel",
    "Error",
    "LdaModel",
    "Vocabulary",
    "build_vocabulary",
    "city_filter",
    "five_number_summary",
    "generate_fixture",
    "metrics",
    "parse_record",
    "preprocess",
    "roc_auc",
    "run_cli",
    "tokenize",
    "train_lda",
    "train_skipgram",
]


def parse_record(line):
    """One NDJSON tweet as a dict of the fields CityPulse keeps."""
    return json.loads(_normalize_record(line))


def generate_fixture(seed=1, shrink=1.0, holdout=0.0, embedding_docs=6000):
    """Returns (records, ledger): NDJSON lines and the ground-truth ledger."""
    ndjson, ledger = _generate_fixture(seed, shrink, holdout, embedding_docs)
    return ndjson.splitlines(), json.loads(ledger)
