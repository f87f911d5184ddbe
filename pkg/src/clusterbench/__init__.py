"""clusterbench: synthetic-data benchmarking of classical clustering algorithms.

Generate labeled Gaussian-mixture datasets with controlled class separation,
cluster them with five from-scratch algorithms, score partitions with four
external validity indices, and quantify parameter sensitivity through
default, one-dimensional and random multi-dimensional parameter studies.
"""

from .datagen import (
    ClassModel,
    Dataset,
    DatasetSpec,
    generate_class,
    generate_corpus,
    generate_covariance,
    generate_dataset,
    tune_alpha,
)
from .metrics import (
    ContingencyTable,
    PairCounts,
    Partition,
    adjusted_rand,
    build_contingency,
    fowlkes_mallows,
    jaccard,
    nmi,
    pair_counts,
    score_partition,
)
from .clusterers import (
    ALGORITHM_NAMES,
    ClusterResult,
    ClustererConfig,
    ParamDescriptor,
    clara,
    em_gmm,
    hierarchical,
    kmeans,
    pam,
    param_descriptors,
    run_algorithm,
    spectral,
)
from .stats import KruskalResult, chi_square_upper_tail, kruskal_wallis

__version__ = "0.1.0"
