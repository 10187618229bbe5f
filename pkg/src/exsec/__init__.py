"""Security-typed lambda calculus with existential declassification policies."""

from importlib import resources

__version__ = "0.1.0"


def corpus_path(name: str):
    """Path of a bundled example program."""
    return resources.files(__name__) / "corpus" / name
