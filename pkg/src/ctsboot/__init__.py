"""Bootstrap tests for equality of the generating processes of categorical time series."""

from .bootstrap import TestConfig, TestResult, default_tuning, pvalue_from_replicates, run_test
from .cluster import classical_mds, pvalue_clustering, pvalue_matrix
from .distances import DistanceKind, dist_b, dist_cc, dist_mle, distance
from .features import extract_features
from .models import HiddenMarkov, MarkovChain, ModelFamily, Ndarma, ThetaVector
from .rng import RandomStream
from .series import Alphabet, CategoricalSeries

__all__ = [
    "Alphabet",
    "CategoricalSeries",
    "DistanceKind",
    "HiddenMarkov",
    "MarkovChain",
    "ModelFamily",
    "Ndarma",
    "RandomStream",
    "TestConfig",
    "TestResult",
    "ThetaVector",
    "classical_mds",
    "default_tuning",
    "dist_b",
    "dist_cc",
    "dist_mle",
    "distance",
    "extract_features",
    "pvalue_clustering",
    "pvalue_from_replicates",
    "pvalue_matrix",
    "run_test",
]
